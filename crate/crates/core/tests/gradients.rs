//! Backpropagation against central finite differences.

use ppn_gain::mlp::{init_model, MlpModel, MlpSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;
const REL_TOL: f64 = 1e-6;
/// Gradients smaller than this are compared on an absolute scale.
const SCALE_FLOOR: f64 = 1e-3;

fn central_difference(model: &MlpModel, x: &[f64], output: usize, param: usize) -> f64 {
    let base = model.parameters();
    let mut m = model.clone();
    let mut p = base.clone();
    p[param] = base[param] + STEP;
    m.set_parameters(&p).unwrap();
    let up = m.forward(x).unwrap()[output];
    p[param] = base[param] - STEP;
    m.set_parameters(&p).unwrap();
    let down = m.forward(x).unwrap()[output];
    (up - down) / (2.0 * STEP)
}

fn check(spec: MlpSpec, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = init_model(&spec, seed);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let x: Vec<f64> = (0..spec.inputs()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let output = rng.gen_range(0..spec.outputs());
        let param = rng.gen_range(0..spec.parameter_count());
        let analytic = model.output_gradient(&x, output).unwrap()[param];
        let numeric = central_difference(&model, &x, output, param);
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(SCALE_FLOOR);
        worst = worst.max(rel);
        assert!(rel <= REL_TOL, "param {param} output {output}: analytic {analytic} numeric {numeric} rel {rel}");
    }
    worst
}

#[test]
fn model_a_gradients_match_finite_differences() {
    let worst = check(MlpSpec::model_a(), 11);
    println!("model A worst relative error {worst:e}");
}

#[test]
fn model_b_gradients_match_finite_differences() {
    let worst = check(MlpSpec::model_b(), 12);
    println!("model B worst relative error {worst:e}");
}

#[test]
fn loss_gradient_matches_finite_differences() {
    let spec = MlpSpec::model_b();
    let model = init_model(&spec, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let xs: Vec<Vec<f64>> = (0..8).map(|_| vec![rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)]).collect();
    let ys: Vec<Vec<f64>> = (0..8).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    let (_, grad) = model.loss_and_gradient(&xs, &ys).unwrap();
    let base = model.parameters();
    for _ in 0..50 {
        let i = rng.gen_range(0..base.len());
        let mut m = model.clone();
        let mut p = base.clone();
        p[i] += STEP;
        m.set_parameters(&p).unwrap();
        let up = m.loss_and_gradient(&xs, &ys).unwrap().0;
        p[i] = base[i] - STEP;
        m.set_parameters(&p).unwrap();
        let down = m.loss_and_gradient(&xs, &ys).unwrap().0;
        let numeric = (up - down) / (2.0 * STEP);
        let rel = (grad[i] - numeric).abs() / grad[i].abs().max(numeric.abs()).max(SCALE_FLOOR);
        assert!(rel <= REL_TOL, "param {i}: {} vs {numeric}", grad[i]);
    }
}
