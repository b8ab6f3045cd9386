//! `ermkit` command-line front end.
//!
//! Exit codes: 0 ok, 2 usage or validation error, 3 I/O error, 4 numerical
//! failure (including non-convergence under `--strict`).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    csv_field, frontier, frontiers_to_csv, predict_dataset, prediction_errors, rb_exponential_fit,
    render_svg, volumetric_summary, Statistic, ValueMode, DEFAULT_THRESHOLD,
};
use crate::basis::{BasisRule, RuleKind};
use crate::circuit::{CapabilityKind, Dataset};
use crate::encoding::{
    encode_batch, reshape_to_three_channels, write_tensor_file, ClassMap, CHANNEL_LEGEND,
};
use crate::error::{Error, Result};
use crate::fit::{bootstrap_from_fit, fit, train_test_split, FitConfig, Objective};
use crate::model::ErmModel;
use crate::simgen::{
    exact_dataset, generate_circuits, sample_dataset, ErrorRates, GeneratorSpec, GroundTruth,
};

/// Must agree with [`crate::circuit::FORMAT_VERSION`].
const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (file format_version 1)");

#[derive(Debug, Parser)]
#[command(name = "ermkit", version = VERSION, about = "Error rates models for benchmark data")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Exit with code 4 when a fit does not converge.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate mirror circuits and synthetic data from a known model.
    Generate(GenerateArgs),
    /// Fit a model to a dataset.
    Fit(FitArgs),
    /// Per-record predictions as CSV.
    Predict(PredictArgs),
    /// Prediction errors as CSV plus a JSON summary.
    Evaluate(EvaluateArgs),
    /// Volumetric grid, frontiers and optional SVG.
    Vbplot(VbplotArgs),
    /// Exponential decay fit per width.
    Rbfit(RbfitArgs),
    /// Encode circuits as tensors.
    Encode(EncodeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    SuccessProbability,
    ProcessPolarization,
}

impl From<KindArg> for CapabilityKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::SuccessProbability => CapabilityKind::SuccessProbability,
            KindArg::ProcessPolarization => CapabilityKind::ProcessPolarization,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Lsq,
    Mle,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    widths: Vec<usize>,
    /// Even benchmark depths.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
    depths: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    per_shape: usize,
    /// Probability that a matched qubit pair gets a two-qubit gate.
    #[arg(long, default_value_t = 0.25)]
    density: f64,
    #[arg(long, value_enum, default_value = "success-probability")]
    kind: KindArg,
    /// Sample this many shots per circuit (success probability only).
    #[arg(long)]
    shots: Option<u64>,
    /// Basis rule of the ground-truth model.
    #[arg(long, default_value = "arity")]
    rule: String,
    #[arg(long, default_value_t = 0.001)]
    eps_1q: f64,
    #[arg(long, default_value_t = 0.01)]
    eps_2q: f64,
    #[arg(long, default_value_t = 0.0)]
    eps_readout: f64,
    #[arg(long, default_value = "synthetic")]
    processor: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset output.
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth model output.
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    /// `arity`, `gate_name` or `location`, optionally with `+readout` and
    /// `+width`; or an inline rule JSON object.
    #[arg(long, default_value = "arity")]
    rule: String,
    #[arg(long, value_enum)]
    objective: ObjectiveArg,
    /// Bootstrap replicas (0 disables).
    #[arg(long, default_value_t = 0)]
    bootstrap: usize,
    /// Training fraction; the rest is recorded as holdout.
    #[arg(long, default_value_t = 1.0)]
    split: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Model JSON or fit JSON.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Restrict to the holdout ids recorded in this fit JSON.
    #[arg(long)]
    holdout: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    AsIs,
    Polarization,
}

#[derive(Debug, Args)]
struct VbplotArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "as-is")]
    mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    frontier_out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RbfitArgs {
    #[arg(long)]
    data: PathBuf,
    /// Widths to fit (default: all).
    #[arg(long, value_delimiter = ',')]
    widths: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[arg(long)]
    data: PathBuf,
    /// Tensor rows (default: largest width).
    #[arg(long)]
    n: Option<usize>,
    /// Tensor columns (default: largest layer count).
    #[arg(long)]
    d_max: Option<usize>,
    /// Reshape to three channels with the default target.
    #[arg(long)]
    reshape: bool,
    #[arg(long)]
    out: PathBuf,
    /// Write the channel legend and class map as JSON.
    #[arg(long)]
    legend: Option<PathBuf>,
}

/// Parses `arity[+readout][+width]` (also `gate_name`, `location`) or a
/// rule JSON object.
pub fn parse_rule(s: &str) -> Result<BasisRule> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(Error::from);
    }
    let mut parts = s.split('+').map(str::trim);
    let kind = match parts.next().unwrap_or("") {
        "arity" | "by_arity" => RuleKind::ByArity,
        "gate_name" | "gate" | "by_gate_name" => RuleKind::ByGateName,
        "location" | "by_location" => RuleKind::ByLocation,
        other => return Err(Error::Precondition(format!("unknown basis rule `{other}`"))),
    };
    let mut rule = BasisRule::new(kind, false, false);
    for p in parts {
        match p {
            "readout" => rule.include_readout = true,
            "width" => rule.width_indexed = true,
            other => {
                return Err(Error::Precondition(format!(
                    "unknown rule option `{other}`"
                )))
            }
        }
    }
    Ok(rule)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    Dataset::parse(&read(path)?)
}

/// Accepts a bare model JSON or a fit JSON carrying one under `model`.
fn load_model(path: &Path) -> Result<ErmModel> {
    let v: serde_json::Value = serde_json::from_str(&read(path)?)?;
    match v.get("model") {
        Some(m) => ErmModel::from_json_value(m.clone()),
        None => ErmModel::from_json_value(v),
    }
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let spec = GeneratorSpec {
        widths: a.widths.clone(),
        depths: a.depths.clone(),
        circuits_per_shape: a.per_shape,
        two_qubit_density: a.density,
        seed: a.seed,
        ..GeneratorSpec::default()
    };
    let rule = parse_rule(&a.rule)?;
    let circuits = generate_circuits(&spec)?;
    let arities = spec.arities();
    let truth = GroundTruth::uniform(
        &rule,
        circuits.iter().map(|g| &g.circuit),
        &arities,
        ErrorRates {
            one_qubit: a.eps_1q,
            two_qubit: a.eps_2q,
            readout: a.eps_readout,
        },
    )?;
    let kind = CapabilityKind::from(a.kind);
    let data = match (a.shots, kind) {
        (Some(shots), CapabilityKind::SuccessProbability) => sample_dataset(
            &a.processor,
            &circuits,
            &truth,
            &rule,
            &arities,
            shots,
            a.seed,
        )?,
        (Some(_), CapabilityKind::ProcessPolarization) => {
            return Err(Error::Precondition(
                "--shots applies to success-probability data only".into(),
            ))
        }
        (None, k) => exact_dataset(&a.processor, &circuits, &truth, &rule, &arities, k)?,
    };
    write(&a.out, &data.to_json())?;
    write(&a.truth, &truth.model.to_json())
}

fn run_fit(a: &FitArgs, strict: bool) -> Result<()> {
    let data = load_dataset(&a.data)?;
    let rule = parse_rule(&a.rule)?;
    let objective = match a.objective {
        ObjectiveArg::Lsq => Objective::LeastSquares,
        ObjectiveArg::Mle => Objective::Mle,
    };
    let cfg = FitConfig {
        objective,
        restarts: a.restarts,
        seed: a.seed,
        ..FitConfig::default()
    };
    let (train, holdout) = train_test_split(&data, a.split, a.seed)?;
    let mut result = fit(&train, &rule, &cfg)?;
    if a.bootstrap > 0 {
        result.stderr = Some(bootstrap_from_fit(
            &train,
            &rule,
            &cfg,
            &result,
            a.bootstrap,
        )?);
    }
    for w in result.warnings() {
        eprintln!("warning: {w}");
    }
    let mut v = result.to_json_value();
    v["split"] = serde_json::json!(a.split);
    v["seed"] = serde_json::json!(a.seed);
    v["holdout"] = serde_json::json!(holdout.records.iter().map(|r| r.id()).collect::<Vec<_>>());
    write(&a.out, &(serde_json::to_string_pretty(&v)? + "\n"))?;
    if strict && !result.converged {
        return Err(Error::Numerical("fit did not converge".into()));
    }
    Ok(())
}

fn predict(a: &PredictArgs) -> Result<()> {
    let m = load_model(&a.model)?;
    let d = load_dataset(&a.data)?;
    let values = predict_dataset(&m, &d)?;
    let mut out = String::from("id,width,depth,prediction\n");
    for (r, v) in d.records.iter().zip(values) {
        out += &format!(
            "{},{},{},{v}\n",
            csv_field(r.id()),
            r.width(),
            r.plot_depth()
        );
    }
    emit(a.out.as_deref(), &out)
}

fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let m = load_model(&a.model)?;
    let mut d = load_dataset(&a.data)?;
    if let Some(path) = &a.holdout {
        let v: serde_json::Value = serde_json::from_str(&read(path)?)?;
        let ids: BTreeSet<String> =
            serde_json::from_value(v.get("holdout").cloned().ok_or_else(|| {
                Error::Format(format!("{} has no holdout list", path.display()))
            })?)?;
        d = d.with_records(
            d.records
                .iter()
                .filter(|r| ids.contains(r.id()))
                .cloned()
                .collect(),
        );
    }
    let report = prediction_errors(&m, &d)?;
    emit(a.out.as_deref(), &report.to_csv())?;
    let summary = report.summary_json() + "\n";
    match &a.summary {
        Some(p) => write(p, &summary),
        None => {
            eprint!("{summary}");
            Ok(())
        }
    }
}

fn vbplot(a: &VbplotArgs) -> Result<()> {
    let d = load_dataset(&a.data)?;
    let mode = match a.mode {
        ModeArg::AsIs => ValueMode::AsIs,
        ModeArg::Polarization => ValueMode::PolarizationOfSuccess,
    };
    let grid = volumetric_summary(&d, mode)?;
    let fronts: Vec<_> = Statistic::ALL
        .iter()
        .map(|&s| frontier(&grid, s, a.threshold))
        .collect();
    emit(a.out.as_deref(), &grid.to_csv())?;
    if let Some(p) = &a.frontier_out {
        write(p, &frontiers_to_csv(&fronts))?;
    }
    if let Some(p) = &a.svg {
        write(p, &render_svg(&grid, &fronts))?;
    }
    Ok(())
}

fn rbfit(a: &RbfitArgs) -> Result<()> {
    let d = load_dataset(&a.data)?;
    let widths = if a.widths.is_empty() {
        d.widths()
    } else {
        a.widths.clone()
    };
    let mut out = String::from("width,p,amplitude,epsilon,residual\n");
    for w in widths {
        let f = rb_exponential_fit(&d, w)?;
        out += &format!(
            "{},{},{},{},{}\n",
            f.width, f.p, f.amplitude, f.epsilon, f.residual
        );
    }
    emit(a.out.as_deref(), &out)
}

fn encode(a: &EncodeArgs) -> Result<()> {
    let d = load_dataset(&a.data)?;
    let circuits: Vec<_> = d.records.iter().map(|r| r.circuit.clone()).collect();
    let n = a.n.unwrap_or_else(|| d.max_width().unwrap_or(0));
    let d_max = a
        .d_max
        .unwrap_or_else(|| circuits.iter().map(|c| c.depth()).max().unwrap_or(0));
    let map = ClassMap::for_circuits(&circuits)?;
    let mut tensors = encode_batch(&circuits, n, d_max, &map)?;
    let mut shape = [n, d_max, CHANNEL_LEGEND.len()];
    if a.reshape {
        tensors = tensors
            .iter()
            .map(|t| reshape_to_three_channels(t, None))
            .collect::<Result<_>>()?;
        shape = crate::encoding::default_three_channel_shape(n, d_max);
    }
    write_tensor_file(&a.out, shape, &tensors)?;
    if let Some(p) = &a.legend {
        let v = serde_json::json!({
            "channels": CHANNEL_LEGEND,
            "classes": map.classes,
            "readout_gates": map.readout,
            "source_shape": [n, d_max, CHANNEL_LEGEND.len()],
            "reshaped": a.reshape,
        });
        write(p, &(serde_json::to_string_pretty(&v)? + "\n"))?;
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Fit(a) => run_fit(a, cli.strict),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Vbplot(a) => vbplot(a),
        Command::Rbfit(a) => rbfit(a),
        Command::Encode(a) => encode(a),
    }
}

/// Parses `args` (including the program name) and runs. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
