mod config;

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ppn_gain::guidance::{gain_bounds, predict_terminal_angle, requires_two_phase, GainSchedule};
use ppn_gain::kinematics::Sample;
use ppn_gain::mlp::{
    evaluate, held_out_rows, load_model, predict_gains, save_model, train, MlpModel, MlpSpec, TRAINED_DESIRED_DEG,
    TRAINED_HEADING0_DEG,
};
use ppn_gain::simulation::{simulate_with, Logging, SimOptions};
use ppn_gain::sweep::{read_dataset, run_sweep, save_reduction, DatasetRecord, Problem};

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "ppn-gain", version, about = "Two-phase PPN gain selection: bounds, simulation, sweeps and surrogate models")]
struct Cli {
    /// TOML run configuration; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a configuration key, e.g. `--set grid.t_max=300`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Feasible orientation-gain interval for an engagement.
    Bounds(Engagement),
    /// Simulate one engagement.
    Simulate(SimulateArgs),
    /// Sweep the gain grid and write the optimal-gain dataset(s).
    Sweep(SweepArgs),
    /// Train a surrogate model on a dataset.
    Train(TrainArgs),
    /// Query a trained surrogate.
    Predict(PredictArgs),
    /// R^2 of a surrogate on a dataset.
    Evaluate(EvaluateArgs),
    /// Gridded optimal-gain surface from a model or a dataset.
    ExportSurface(SurfaceArgs),
    /// Effort against orientation gain for fixed final gains.
    ExportCostCurve(CostCurveArgs),
}

#[derive(Debug, Args)]
struct Engagement {
    /// Initial heading angle (deg).
    #[arg(long, allow_hyphen_values = true)]
    ap0: f64,
    /// Desired terminal heading angle (deg).
    #[arg(long, allow_hyphen_values = true)]
    apf: f64,
    /// Final-phase gain.
    #[arg(long)]
    nf: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    /// Two-phase with the given orientation and final gains.
    Shaped,
    /// Two-phase with the geometric orientation gain and N_req handover.
    Baseline,
    /// Constant-gain PPN (`--nf` is the gain).
    Single,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, allow_hyphen_values = true)]
    ap0: f64,
    /// Desired terminal heading (deg); optional in single mode.
    #[arg(long, allow_hyphen_values = true)]
    apf: Option<f64>,
    #[arg(long, value_enum, default_value = "shaped")]
    mode: Mode,
    #[arg(long, allow_hyphen_values = true)]
    nori: Option<f64>,
    #[arg(long)]
    nf: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    /// Write the trajectory (t,R,theta_deg,alpha_p_deg,a_p) to this CSV.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Keep every n-th integration step in the trajectory.
    #[arg(long, default_value_t = 1)]
    every: usize,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Dataset to write; both when omitted.
    #[arg(long)]
    problem: Option<Problem>,
    /// Output path (single problem only); defaults to the configured path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    problem: Problem,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    ap0: f64,
    #[arg(long, allow_hyphen_values = true)]
    apf: f64,
    /// Final gain (model A only).
    #[arg(long)]
    nf: Option<f64>,
    /// Print the prediction as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
}

#[derive(Debug, Args)]
struct SurfaceArgs {
    #[arg(long, required_unless_present = "dataset", conflicts_with = "dataset")]
    model: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Grid spacing in degrees (model only).
    #[arg(long, default_value_t = 2.0)]
    step: f64,
    /// Final gains for a problem A surface. Repeatable.
    #[arg(long)]
    nf: Vec<f64>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CostCurveArgs {
    #[arg(long, allow_hyphen_values = true)]
    ap0: f64,
    #[arg(long, allow_hyphen_values = true)]
    apf: f64,
    /// Final gains to trace. Repeatable.
    #[arg(long, required = true)]
    nf: Vec<f64>,
    /// Orientation-gain spacing; defaults to the grid's.
    #[arg(long)]
    step: Option<f64>,
    /// Horizon (s); defaults to the grid's.
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    match cli.command {
        Command::Bounds(a) => cmd_bounds(&cfg, &a),
        Command::Simulate(a) => cmd_simulate(&cfg, &a),
        Command::Sweep(a) => cmd_sweep(&cfg, &a),
        Command::Train(a) => cmd_train(&cfg, &a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::ExportSurface(a) => cmd_export_surface(&a),
        Command::ExportCostCurve(a) => cmd_cost_curve(&cfg, &a),
    }
}

fn cmd_bounds(cfg: &RunConfig, a: &Engagement) -> Result<ExitCode> {
    let b = gain_bounds(cfg.los0(), a.ap0.to_radians(), a.apf.to_radians(), a.nf)?;
    println!("n_min: {:.4}", b.n_min);
    println!("n_max: {:.4}", b.n_max);
    println!("clamped_low: {}", b.clamped_low);
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(cfg: &RunConfig, a: &SimulateArgs) -> Result<ExitCode> {
    let vehicle = cfg.vehicle_with_heading(a.ap0);
    let mut integrator = cfg.integrator();
    if let Some(t) = a.t_max {
        integrator.t_max = t;
    }
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| anyhow!("--{flag} is required in this mode"));
    let schedule = match a.mode {
        Mode::Shaped => GainSchedule::shaped(need(a.nori, "nori")?, need(a.nf, "nf")?, need(a.apf, "apf")?.to_radians()),
        Mode::Baseline => GainSchedule::baseline(need(a.apf, "apf")?.to_radians()),
        Mode::Single => {
            let n = need(a.nf, "nf")?;
            let desired = match a.apf {
                Some(d) => d.to_radians(),
                None => predict_terminal_angle(n, vehicle.los0, vehicle.heading0)?,
            };
            GainSchedule::single(n, desired)
        }
    };
    let opts = SimOptions { logging: Logging::Every(a.every.max(1)), ..SimOptions::default() };
    let out = match simulate_with(&vehicle, &schedule, &integrator, &opts) {
        Ok(out) => out,
        Err(e) => {
            println!("verdict: infeasible");
            return Err(e.into());
        }
    };
    println!("verdict: {}", out.verdict);
    println!("termination: {:?}", out.termination);
    println!("t_f: {:.4}", out.t_final);
    println!("J: {:.6}", out.effort);
    println!("alpha_pf_deg: {:.4}", out.terminal_heading.to_degrees());
    println!("alpha_pf_error_deg: {:.4}", out.angle_error(schedule.desired).to_degrees());
    if let Some(sw) = out.switch {
        println!("switch_t: {:.4}", sw.t);
        println!("switch_theta_deg: {:.4}", sw.los.to_degrees());
        println!("switch_alpha_p_deg: {:.4}", sw.heading.to_degrees());
        println!("final_gain: {:.4}", sw.gain);
    }
    if let Some(path) = &a.trajectory {
        write_trajectory(path, &out.trajectory)?;
    }
    Ok(if out.verdict.is_feasible() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn write_trajectory(path: &Path, samples: &[Sample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["t", "R", "theta_deg", "alpha_p_deg", "a_p"])?;
    for s in samples {
        let st = &s.state;
        w.write_record([st.t, st.range, st.los.to_degrees(), st.heading.to_degrees(), s.accel].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, a: &SweepArgs) -> Result<ExitCode> {
    if a.out.is_some() && a.problem.is_none() {
        bail!("--out needs --problem");
    }
    let sweep = cfg.sweep();
    let started = Instant::now();
    let result = run_sweep(&sweep)?;
    let st = result.stats();
    println!("pairs: {}", st.pairs);
    println!("scenarios: {}", st.scenarios);
    println!("tuples: {}", st.tuples);
    println!("feasible: {} timeout: {} angle_miss: {} no_switch: {}", st.feasible, st.timeout, st.angle_miss, st.no_switch);
    for h in result.horizons() {
        println!("extended horizon: alpha_p0 {} alpha_pf_des {} t_max {}", h.heading0_deg, h.desired_deg, h.t_max);
    }
    let problems = match a.problem {
        Some(p) => vec![p],
        None => vec![Problem::A, Problem::B],
    };
    for p in problems {
        let path = a.out.clone().unwrap_or_else(|| cfg.dataset_path(p).to_path_buf());
        let reduction = result.reduce(p);
        save_reduction(&path, p, &reduction)?;
        println!("problem {p}: {} records, {} infeasible -> {}", reduction.records.len(), reduction.infeasible.len(), path.display());
    }
    println!("elapsed_s: {:.1}", started.elapsed().as_secs_f64());
    Ok(ExitCode::SUCCESS)
}

fn load_dataset(path: &Path, problem: Problem) -> Result<Vec<DatasetRecord>> {
    let (found, records) = read_dataset(path)?;
    if found != problem {
        bail!("{} holds a problem {found} dataset, expected problem {problem}", path.display());
    }
    Ok(records)
}

fn output_names(problem: Problem) -> &'static [&'static str] {
    match problem {
        Problem::A => &["N_ori"],
        Problem::B => &["N_f", "N_ori"],
    }
}

fn select(records: &[DatasetRecord], rows: &[usize]) -> Vec<DatasetRecord> {
    rows.iter().map(|&i| records[i]).collect()
}

fn print_r2(label: &str, problem: Problem, r2: &[f64]) {
    for (name, v) in output_names(problem).iter().zip(r2) {
        println!("R2 {label} {name}: {v:.4}");
    }
}

fn cmd_train(cfg: &RunConfig, a: &TrainArgs) -> Result<ExitCode> {
    let p = a.problem;
    let dataset = a.dataset.clone().unwrap_or_else(|| cfg.dataset_path(p).to_path_buf());
    let out = a.out.clone().unwrap_or_else(|| cfg.model_path(p).to_path_buf());
    let records = load_dataset(&dataset, p)?;
    let mut tc = cfg.train_config(p);
    if let Some(s) = a.seed {
        tc.seed = s;
    }
    if let Some(e) = a.epochs {
        tc.epochs = e;
    }
    let started = Instant::now();
    let trained = train(&records, p, &MlpSpec::for_problem(p), &tc)?;
    save_model(&trained.model, &out)?;
    println!("rows: {} train, {} held out", trained.train_rows.len(), trained.test_rows.len());
    println!("final_loss: {:.6e}", trained.loss_history.last().copied().unwrap_or(f64::NAN));
    if !trained.test_rows.is_empty() {
        let r2 = evaluate(&trained.model, &select(&records, &trained.test_rows), p)?;
        print_r2("held-out", p, &r2);
    }
    println!("model: {}", out.display());
    println!("elapsed_s: {:.1}", started.elapsed().as_secs_f64());
    Ok(ExitCode::SUCCESS)
}

fn model_problem(model: &MlpModel) -> Result<Problem> {
    model.problem.ok_or_else(|| anyhow!("model file does not record which problem it was trained for"))
}

fn cmd_predict(a: &PredictArgs) -> Result<ExitCode> {
    let model = load_model(&a.model)?;
    let pred = predict_gains(&model, a.ap0, a.apf, a.nf)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&pred)?);
    } else {
        if let Some(nf) = pred.n_f_raw {
            println!("N_f_raw: {nf:.4}");
        }
        println!("N_ori_raw: {:.4}", pred.n_ori_raw);
        println!("N_f: {:.4}", pred.n_f);
        println!("N_ori: {:.4}", pred.n_ori);
    }
    for w in &pred.warnings {
        eprintln!("warning: {w}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<ExitCode> {
    let model = load_model(&a.model)?;
    let p = model_problem(&model)?;
    let records = load_dataset(&a.dataset, p)?;
    println!("rows: {}", records.len());
    print_r2("all", p, &evaluate(&model, &records, p)?);
    match held_out_rows(&model, records.len()) {
        Some(rows) if !rows.is_empty() => print_r2("held-out", p, &evaluate(&model, &select(&records, &rows), p)?),
        _ => println!("held-out split unavailable for this dataset"),
    }
    Ok(ExitCode::SUCCESS)
}

fn axis((lo, hi): (f64, f64), step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        bail!("--step must be positive");
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_export_surface(a: &SurfaceArgs) -> Result<ExitCode> {
    let mut w = csv::Writer::from_writer(open_out(a.out.as_deref())?);
    if let Some(path) = &a.dataset {
        let (p, records) = read_dataset(path)?;
        let gain = if p == Problem::A { "N_f" } else { "N_f_opt" };
        w.write_record(["alpha_p0_deg", "alpha_pf_des_deg", gain, "N_ori_opt", "J_opt"])?;
        for r in records.iter().filter(|r| a.nf.is_empty() || a.nf.iter().any(|&g| (g - r.n_f).abs() < 1e-9)) {
            w.write_record([r.heading0_deg, r.desired_deg, r.n_f, r.n_ori_opt, r.effort_opt].map(|v| v.to_string()))?;
        }
    } else if let Some(path) = &a.model {
        let model = load_model(path)?;
        let p = model_problem(&model)?;
        let headings = axis(TRAINED_HEADING0_DEG, a.step)?;
        let desired = axis(TRAINED_DESIRED_DEG, a.step)?;
        let pairs = headings
            .iter()
            .flat_map(|&h| desired.iter().map(move |&d| (h, d)))
            .filter(|&(h, d)| requires_two_phase(0.0, h.to_radians(), d.to_radians()));
        match p {
            Problem::A => {
                let gains = if a.nf.is_empty() { vec![2.0, 3.0, 4.0, 5.0] } else { a.nf.clone() };
                w.write_record(["alpha_p0_deg", "alpha_pf_des_deg", "N_f", "N_ori_pred"])?;
                for (h, d) in pairs {
                    for &nf in &gains {
                        let y = model.predict(&[h, d, nf])?;
                        w.write_record([h, d, nf, y[0]].map(|v| v.to_string()))?;
                    }
                }
            }
            Problem::B => {
                w.write_record(["alpha_p0_deg", "alpha_pf_des_deg", "N_f_pred", "N_ori_pred"])?;
                for (h, d) in pairs {
                    let y = model.predict(&[h, d])?;
                    w.write_record([h, d, y[0], y[1]].map(|v| v.to_string()))?;
                }
            }
        }
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_cost_curve(cfg: &RunConfig, a: &CostCurveArgs) -> Result<ExitCode> {
    let vehicle = cfg.vehicle_with_heading(a.ap0);
    let mut integrator = cfg.integrator_for_grid();
    if let Some(t) = a.t_max {
        integrator.t_max = t;
    }
    let step = a.step.unwrap_or(cfg.grid.orientation_step);
    let desired = a.apf.to_radians();
    let mut w = csv::Writer::from_writer(open_out(a.out.as_deref())?);
    w.write_record(["N_f", "N_ori", "J", "t_f", "verdict"])?;
    for &nf in &a.nf {
        let bounds = gain_bounds(vehicle.los0, vehicle.heading0, desired, nf)?;
        for n_ori in ppn_gain::sweep::orientation_grid(&bounds, step) {
            let out = simulate_with(&vehicle, &GainSchedule::shaped(n_ori, nf, desired), &integrator, &SimOptions::quiet())?;
            w.write_record([format!("{nf}"), format!("{n_ori:.2}"), out.effort.to_string(), out.t_final.to_string(), out.verdict.to_string()])?;
        }
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}
