use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("invalid engagement state: {0}")]
    InvalidState(String),
    #[error("singular range: R = {0}")]
    SingularRange(f64),
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GuidanceError {
    #[error("navigation gain N = 1 is singular for the terminal-angle formula")]
    SingularGain,
    #[error("line-of-sight angle equals the desired terminal angle; required gain is undefined")]
    SingularGeometry,
    #[error("engagement does not require a two-phase schedule (desired {desired_deg:.3} deg >= band edge {band_edge_deg:.3} deg)")]
    SinglePhaseSuffices { desired_deg: f64, band_edge_deg: f64 },
    #[error("only heading0 > los0 is supported; reflect the engagement first")]
    UnsupportedSide,
    #[error("final-phase gain {0} outside [2, 5]")]
    FinalGainOutOfRange(f64),
    #[error("orientation gain {gain} outside [{min}, {max}]")]
    OrientationGainOutOfRange { gain: f64, min: f64, max: f64 },
    #[error("empty orientation-gain interval [{min}, {max}]")]
    InfeasibleEngagement { min: f64, max: f64 },
    #[error("non-finite guidance input")]
    NonFinite,
}

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Guidance(#[from] GuidanceError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("effort samples must be time-ordered and at least two long")]
    BadSamples,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: unexpected header {found:?}, expected {expected:?}")]
    Schema {
        path: PathBuf,
        found: Vec<String>,
        expected: Vec<String>,
    },
    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("need at least {needed} rows, got {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("training diverged at epoch {epoch} (loss = {loss})")]
    Diverged { epoch: usize, loss: f64 },
    #[error("target variance is zero for output {0}; R^2 undefined")]
    ZeroVariance(usize),
    #[error("model spec mismatch: expected {expected}, found {found}")]
    SpecMismatch { expected: String, found: String },
    #[error("unsupported model file version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("model parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}
