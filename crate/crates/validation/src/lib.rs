//! Acceptance suite for `ppn-gain`; see `tests/acceptance.rs`. Run it alone with
//! `cargo test -p ppn-gain-validation --test acceptance`.
