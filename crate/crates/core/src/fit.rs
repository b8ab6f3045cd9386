//! Fitting error rates models to benchmark data.
//!
//! Parameters are optimized as `θ_x = logit(γ_x)`, which keeps every
//! polarization in `(0, 1)`. Two objectives are supported: the sum of squared
//! prediction errors, and the binomial negative log-likelihood of observed
//! success counts. Each fit runs one "informed" start (all elements sharing a
//! single polarization, found by a 1-D search) plus `restarts` random starts
//! with `γ ~ U(0.8, 1)`, and keeps the best.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{count_dataset, enumerate_elements, BasisElementId, BasisRule};
use crate::circuit::{CapabilityKind, Dataset};
use crate::error::{Error, Result};
use crate::model::{fidelity_from_polarization, ErmModel};
use crate::optim::{self, Settings, Smooth};
use crate::rng::{keyed_hash, substream};

/// Box constraint on logit coordinates; `sigmoid(30) = 1 - 9.4e-14`.
pub const THETA_BOUND: f64 = 30.0;
/// Polarizations this close to 0 or 1 are reported as boundary solutions.
pub const BOUNDARY_EPSILON: f64 = 1e-8;
/// Predicted products below this on every record are reported as vanishing.
pub const VANISHING_PRODUCT: f64 = 1e-3;
const MLE_CLAMP: f64 = 1e-12;
const MAX_BOOTSTRAP_DROP: f64 = 0.2;
const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Objective {
    #[serde(rename = "lsq")]
    LeastSquares,
    #[serde(rename = "mle")]
    Mle,
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lsq" => Ok(Objective::LeastSquares),
            "mle" => Ok(Objective::Mle),
            other => Err(Error::Precondition(format!(
                "unknown objective `{other}` (expected lsq or mle)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub objective: Objective,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub parameter_tolerance: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Width used to report ε for elements of a non-width-indexed model.
    /// Defaults to the largest circuit width in the training data.
    pub report_width: Option<usize>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            objective: Objective::LeastSquares,
            max_iterations: 2000,
            gradient_tolerance: 1e-9,
            parameter_tolerance: 1e-10,
            restarts: 8,
            seed: 0,
            report_width: None,
        }
    }
}

impl FitConfig {
    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.gradient_tolerance > 0.0 && self.parameter_tolerance > 0.0) {
            return Err(Error::Precondition("tolerances must be positive".into()));
        }
        if self.restarts < 1 {
            return Err(Error::Precondition("restarts must be at least 1".into()));
        }
        Ok(())
    }

    fn settings(&self) -> Settings {
        Settings {
            max_iterations: self.max_iterations,
            gtol: self.gradient_tolerance,
            xtol: self.parameter_tolerance,
            lower: -THETA_BOUND,
            upper: THETA_BOUND,
        }
    }
}

pub fn sigmoid(theta: f64) -> f64 {
    if theta >= 0.0 {
        1.0 / (1.0 + (-theta).exp())
    } else {
        let e = theta.exp();
        e / (1.0 + e)
    }
}

pub fn logit(gamma: f64) -> f64 {
    (gamma / (1.0 - gamma)).ln()
}

fn ln_sigmoid(theta: f64) -> f64 {
    if theta >= 0.0 {
        -(-theta).exp().ln_1p()
    } else {
        theta - theta.exp().ln_1p()
    }
}

fn xlogy_ratio(k: f64, num: f64, den: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * (num / den).ln()
    }
}

#[derive(Debug, Clone)]
struct Row {
    counts: Vec<(usize, f64)>,
    /// `E = scale * P + floor`.
    scale: f64,
    floor: f64,
    estimate: f64,
    shots: f64,
    successes: f64,
}

/// Objective of a fit as a function of the logit coordinates of every element.
#[derive(Debug, Clone)]
pub struct ObjectiveFunction {
    objective: Objective,
    elements: Vec<BasisElementId>,
    rows: Vec<Row>,
    /// `Σ_c -[k ln ŝ + (m-k) ln(1-ŝ)]`, the NLL of the saturated model.
    saturated_nll: f64,
}

impl ObjectiveFunction {
    pub fn new(
        d: &Dataset,
        rule: &BasisRule,
        elements: &[BasisElementId],
        objective: Objective,
    ) -> Result<Self> {
        if objective == Objective::Mle && d.capability_kind != CapabilityKind::SuccessProbability {
            return Err(Error::Precondition(
                "maximum likelihood requires success-probability data".into(),
            ));
        }
        let index: BTreeMap<&BasisElementId, usize> =
            elements.iter().enumerate().map(|(i, l)| (l, i)).collect();
        let counts = count_dataset(d, rule)?;
        let mut rows = Vec::with_capacity(d.len());
        let mut saturated_nll = 0.0;
        for (rec, cv) in d.records.iter().zip(counts) {
            let mut missing = Vec::new();
            let mut entries = Vec::new();
            for (label, n) in cv.iter() {
                match index.get(label) {
                    Some(&i) => entries.push((i, n as f64)),
                    None => missing.push(label.0.clone()),
                }
            }
            if !missing.is_empty() {
                return Err(Error::MissingElements { labels: missing });
            }
            let (scale, floor) = match d.capability_kind {
                CapabilityKind::ProcessPolarization => (1.0, 0.0),
                CapabilityKind::SuccessProbability => {
                    let floor = 0.5f64.powi(rec.width() as i32);
                    (1.0 - floor, floor)
                }
            };
            let (shots, successes) = match (objective, rec.shots, rec.successes) {
                (Objective::Mle, Some(m), Some(k)) => (m as f64, k as f64),
                (Objective::Mle, _, _) => {
                    return Err(Error::Precondition(format!(
                        "record `{}` lacks shot and success counts required by maximum likelihood",
                        rec.id()
                    )))
                }
                _ => (0.0, 0.0),
            };
            if objective == Objective::Mle {
                let p = successes / shots;
                saturated_nll -=
                    xlogy_ratio(successes, p, 1.0) + xlogy_ratio(shots - successes, 1.0 - p, 1.0);
            }
            rows.push(Row {
                counts: entries,
                scale,
                floor,
                estimate: rec.estimate,
                shots,
                successes,
            });
        }
        Ok(Self {
            objective,
            elements: elements.to_vec(),
            rows,
            saturated_nll,
        })
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn elements(&self) -> &[BasisElementId] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Sum of squared errors, or the negative log-likelihood.
    pub fn value(&self, theta: &[f64]) -> f64 {
        let (lng, omg) = Self::coords(theta);
        self.reported(self.eval(&lng, &omg, None))
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let (lng, omg) = Self::coords(theta);
        let mut g = vec![0.0; self.dim()];
        self.eval(&lng, &omg, Some(&mut g));
        g
    }

    /// Objective at explicit polarizations (which may include γ = 1).
    pub fn value_at_polarizations(&self, gammas: &[f64]) -> f64 {
        let lng: Vec<f64> = gammas.iter().map(|g| g.ln()).collect();
        let omg: Vec<f64> = gammas.iter().map(|g| 1.0 - g).collect();
        self.reported(self.eval(&lng, &omg, None))
    }

    /// Objective at a model's parameters; every element must be present.
    pub fn value_at_model(&self, m: &ErmModel) -> Result<f64> {
        let gammas = self
            .elements
            .iter()
            .map(|l| {
                m.polarization(l).ok_or_else(|| Error::MissingElements {
                    labels: vec![l.0.clone()],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.value_at_polarizations(&gammas))
    }

    /// Predicted products `P_c` for every row.
    fn products(&self, theta: &[f64]) -> Vec<f64> {
        let (lng, _) = Self::coords(theta);
        self.rows
            .iter()
            .map(|r| r.counts.iter().map(|&(i, n)| n * lng[i]).sum::<f64>().exp())
            .collect()
    }

    fn coords(theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (
            theta.iter().map(|&t| ln_sigmoid(t)).collect(),
            theta.iter().map(|&t| sigmoid(-t)).collect(),
        )
    }

    fn reported(&self, internal: f64) -> f64 {
        match self.objective {
            Objective::LeastSquares => internal,
            Objective::Mle => internal + self.saturated_nll,
        }
    }

    /// Internal objective: squared error, or the binomial deviance
    /// `Σ k ln(ŝ/E) + (m-k) ln((1-ŝ)/(1-E))`, which differs from the NLL by a
    /// data-only constant and stays small near the optimum.
    ///
    /// With `E` clamped inside the logs, the gradient uses the clamped `E` in
    /// `∂/∂E` and the unclamped `∂E/∂θ`, so it still points away from the
    /// clamp region.
    fn eval(&self, lng: &[f64], omg: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut total = 0.0;
        for row in &self.rows {
            let p = row
                .counts
                .iter()
                .map(|&(i, n)| n * lng[i])
                .sum::<f64>()
                .exp();
            let e = row.scale * p + row.floor;
            let coef = match self.objective {
                Objective::LeastSquares => {
                    let r = e - row.estimate;
                    total += r * r;
                    2.0 * r
                }
                Objective::Mle => {
                    let ec = e.clamp(row.floor + MLE_CLAMP, 1.0 - MLE_CLAMP);
                    let (k, m) = (row.successes, row.shots);
                    let s_hat = k / m;
                    total += xlogy_ratio(k, s_hat, ec) + xlogy_ratio(m - k, 1.0 - s_hat, 1.0 - ec);
                    -k / ec + (m - k) / (1.0 - ec)
                }
            };
            if let Some(g) = grad.as_deref_mut() {
                let base = coef * row.scale * p;
                for &(i, n) in &row.counts {
                    g[i] += base * n * omg[i];
                }
            }
        }
        total
    }
}

impl Smooth for ObjectiveFunction {
    fn dim(&self) -> usize {
        self.elements.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (lng, omg) = Self::coords(x);
        self.eval(&lng, &omg, None)
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let (lng, omg) = Self::coords(x);
        self.eval(&lng, &omg, Some(grad))
    }
}

/// Outcome of one (sub-)model fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubFitDiagnostics {
    /// Circuit width of a sub-model; `None` for a model over all widths.
    pub width: Option<usize>,
    pub n_records: usize,
    /// Final objective of every start: the informed start first.
    pub restart_objectives: Vec<f64>,
    pub iterations: usize,
    pub optimizer_converged: bool,
    pub identifiable: bool,
    pub count_rank: usize,
    /// Elements whose polarizations the data does not pin down individually.
    pub unconstrained: Vec<BasisElementId>,
    /// Elements whose polarization sits at 0 or 1.
    pub boundary: Vec<BasisElementId>,
    pub vanishing_product: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: ErmModel,
    pub objective: Objective,
    /// Sum over sub-models of the minimized objective (squared error or NLL).
    pub objective_value: f64,
    pub error_rates: BTreeMap<BasisElementId, f64>,
    /// Bootstrap 1σ of each ε_x.
    pub stderr: Option<BTreeMap<BasisElementId, f64>>,
    pub n_train: usize,
    pub converged: bool,
    pub diagnostics: Vec<SubFitDiagnostics>,
}

impl FitResult {
    pub fn is_boundary(&self) -> bool {
        self.diagnostics
            .iter()
            .any(|d| !d.boundary.is_empty() || d.vanishing_product)
    }

    pub fn is_identifiable(&self) -> bool {
        self.diagnostics.iter().all(|d| d.identifiable)
    }

    pub fn warnings(&self) -> Vec<String> {
        self.diagnostics
            .iter()
            .flat_map(|d| d.warnings.iter().cloned())
            .collect()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let error_rates: BTreeMap<&str, WireRate> = self
            .model
            .params()
            .map(|(l, _, w)| {
                (
                    l.as_str(),
                    WireRate {
                        epsilon: self.error_rates[l],
                        stderr: self.stderr.as_ref().and_then(|s| s.get(l).copied()),
                        width: w,
                    },
                )
            })
            .collect();
        serde_json::json!({
            "model": self.model.to_json_value(),
            "objective": self.objective,
            "objective_value": self.objective_value,
            "error_rates": error_rates,
            "n_train": self.n_train,
            "converged": self.converged,
            "diagnostics": self.diagnostics,
        })
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Self> {
        let field = |k: &str| {
            v.get(k)
                .cloned()
                .ok_or_else(|| Error::Format(format!("fit result lacks `{k}`")))
        };
        let model = ErmModel::from_json_value(field("model")?)?;
        let rates: BTreeMap<BasisElementId, WireRate> =
            serde_json::from_value(field("error_rates")?)?;
        let stderr: BTreeMap<BasisElementId, f64> = rates
            .iter()
            .filter_map(|(k, r)| r.stderr.map(|s| (k.clone(), s)))
            .collect();
        Ok(FitResult {
            objective: serde_json::from_value(field("objective")?)?,
            objective_value: serde_json::from_value(field("objective_value")?)?,
            error_rates: model.error_rates(),
            stderr: (!stderr.is_empty()).then_some(stderr),
            n_train: serde_json::from_value(field("n_train")?)?,
            converged: serde_json::from_value(field("converged")?)?,
            diagnostics: match v.get("diagnostics") {
                Some(d) => serde_json::from_value(d.clone())?,
                None => Vec::new(),
            },
            model,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct WireRate {
    epsilon: f64,
    stderr: Option<f64>,
    width: usize,
}

/// Numerical rank of the record-by-element count matrix, and the elements
/// that appear in some null-space direction.
fn rank_and_unconstrained(rows: &[Vec<f64>], p: usize) -> (usize, Vec<usize>) {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |a, &b| a.max(b.abs()))
        .max(1.0);
    let tol = RANK_TOLERANCE * scale;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..p {
        let Some(best) = (r..m.len()).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
        else {
            break;
        };
        if m[best][c].abs() <= tol {
            continue;
        }
        m.swap(r, best);
        let pivot = m[r][c];
        m[r].iter_mut().for_each(|v| *v /= pivot);
        for i in 0..m.len() {
            if i != r && m[i][c] != 0.0 {
                let f = m[i][c];
                let (src, dst) = if i < r {
                    let (a, b) = m.split_at_mut(r);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = m.split_at_mut(i);
                    (&a[r], &mut b[0])
                };
                for k in 0..p {
                    dst[k] -= f * src[k];
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..p).filter(|c| !pivots.contains(c)).collect();
    let mut involved = vec![false; p];
    for &f in &free {
        involved[f] = true;
        for (row, &pc) in pivots.iter().enumerate() {
            if m[row][f].abs() > tol {
                involved[pc] = true;
            }
        }
    }
    (pivots.len(), (0..p).filter(|&i| involved[i]).collect())
}

struct PartFit {
    elements: Vec<BasisElementId>,
    theta: Vec<f64>,
    value: f64,
    diagnostics: SubFitDiagnostics,
    converged: bool,
}

/// Fits one model (no width partitioning) to `d`. With `start`, runs a single
/// optimization from those logit coordinates instead of the multi-start.
fn fit_part(
    d: &Dataset,
    rule: &BasisRule,
    cfg: &FitConfig,
    width: Option<usize>,
    start: Option<&[f64]>,
    elements: Option<Vec<BasisElementId>>,
) -> Result<PartFit> {
    if d.is_empty() {
        return Err(Error::Precondition("cannot fit an empty dataset".into()));
    }
    let elements = match elements {
        Some(e) => e,
        None => enumerate_elements(d, rule)?,
    };
    let f = ObjectiveFunction::new(d, rule, &elements, cfg.objective)?;
    let p = elements.len();

    let count_rows: Vec<Vec<f64>> = f
        .rows
        .iter()
        .map(|r| {
            let mut v = vec![0.0; p];
            for &(i, n) in &r.counts {
                v[i] = n;
            }
            v
        })
        .collect();
    let (rank, unconstrained) = rank_and_unconstrained(&count_rows, p);
    let identifiable = rank == p;

    let settings = cfg.settings();
    let mut starts: Vec<Vec<f64>> = Vec::new();
    match start {
        Some(s) => starts.push(s.to_vec()),
        None => {
            let t = if p == 0 {
                0.0
            } else {
                optim::golden_section(
                    |t| Smooth::value(&f, &vec![t; p]),
                    -THETA_BOUND,
                    THETA_BOUND,
                    1e-9,
                )
            };
            starts.push(vec![t; p]);
            for i in 0..cfg.restarts {
                let mut rng = substream(cfg.seed, "restart", i as u64);
                starts.push((0..p).map(|_| logit(rng.random_range(0.8..1.0))).collect());
            }
        }
    }

    let outcomes: Vec<optim::Outcome> = starts
        .iter()
        .map(|x0| optim::minimize(&f, x0, &settings))
        .collect();
    let best = outcomes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value).then(a.0.cmp(&b.0)))
        .map(|(_, o)| o.clone())
        .expect("at least one start");

    let gammas: Vec<f64> = best.x.iter().map(|&t| sigmoid(t)).collect();
    let boundary: Vec<BasisElementId> = elements
        .iter()
        .zip(&gammas)
        .filter(|(_, &g)| g >= 1.0 - BOUNDARY_EPSILON || g <= BOUNDARY_EPSILON)
        .map(|(l, _)| l.clone())
        .collect();
    let vanishing_product = f.products(&best.x).iter().all(|&p| p < VANISHING_PRODUCT);

    let mut warnings = Vec::new();
    if !identifiable {
        warnings.push(format!(
            "non-identifiable{}: count matrix has rank {rank} < {p}; unconstrained elements: {}",
            width.map(|w| format!(" at width {w}")).unwrap_or_default(),
            unconstrained
                .iter()
                .map(|&i| elements[i].as_str())
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    if !best.converged {
        warnings.push(format!(
            "optimizer did not converge after {} iterations",
            best.iterations
        ));
    }

    let diagnostics = SubFitDiagnostics {
        width,
        n_records: d.len(),
        restart_objectives: outcomes.iter().map(|o| f.reported(o.value)).collect(),
        iterations: best.iterations,
        optimizer_converged: best.converged,
        identifiable,
        count_rank: rank,
        unconstrained: unconstrained.iter().map(|&i| elements[i].clone()).collect(),
        boundary,
        vanishing_product,
        warnings,
    };
    Ok(PartFit {
        value: f.reported(best.value),
        converged: best.converged && identifiable,
        theta: best.x,
        elements,
        diagnostics,
    })
}

fn part_model(rule: &BasisRule, part: &PartFit, report_width: usize) -> Result<ErmModel> {
    let params = part
        .elements
        .iter()
        .zip(&part.theta)
        .map(|(l, &t)| {
            let w = l.width_prefix().unwrap_or(report_width);
            (l.clone(), sigmoid(t), w)
        })
        .collect();
    ErmModel::new(*rule, params)
}

fn assemble(
    rule: &BasisRule,
    cfg: &FitConfig,
    parts: Vec<PartFit>,
    n_train: usize,
    report_width: usize,
) -> Result<FitResult> {
    let models = parts
        .iter()
        .map(|p| part_model(rule, p, report_width))
        .collect::<Result<Vec<_>>>()?;
    let model = ErmModel::merge(*rule, &models)?;
    Ok(FitResult {
        error_rates: model.error_rates(),
        model,
        objective: cfg.objective,
        objective_value: parts.iter().map(|p| p.value).sum(),
        stderr: None,
        n_train,
        converged: parts.iter().all(|p| p.converged),
        diagnostics: parts.into_iter().map(|p| p.diagnostics).collect(),
    })
}

fn report_width(d: &Dataset, cfg: &FitConfig) -> usize {
    cfg.report_width.or_else(|| d.max_width()).unwrap_or(1)
}

/// Fits with `cfg.objective`, partitioning by width when the rule asks for it.
pub fn fit(d: &Dataset, rule: &BasisRule, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    if rule.width_indexed {
        return fit_width_indexed(d, rule, cfg);
    }
    let part = fit_part(d, rule, cfg, None, None, None)?;
    assemble(rule, cfg, vec![part], d.len(), report_width(d, cfg))
}

pub fn fit_least_squares(d: &Dataset, rule: &BasisRule, cfg: &FitConfig) -> Result<FitResult> {
    fit(d, rule, &cfg.with_objective(Objective::LeastSquares))
}

pub fn fit_mle(d: &Dataset, rule: &BasisRule, cfg: &FitConfig) -> Result<FitResult> {
    fit(d, rule, &cfg.with_objective(Objective::Mle))
}

/// Fits one independent sub-model per circuit width and merges them.
pub fn fit_width_indexed(d: &Dataset, rule: &BasisRule, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    if !rule.width_indexed {
        return Err(Error::Precondition(
            "fit_width_indexed needs a width-indexed basis rule".into(),
        ));
    }
    if d.is_empty() {
        return Err(Error::Precondition("cannot fit an empty dataset".into()));
    }
    let parts = d
        .widths()
        .into_par_iter()
        .map(|w| fit_part(&d.width_subset(w), rule, cfg, Some(w), None, None))
        .collect::<Result<Vec<_>>>()?;
    assemble(rule, cfg, parts, d.len(), report_width(d, cfg))
}

/// Circuit-level nonparametric bootstrap of the ε_x of a previous fit.
///
/// Records are resampled with replacement (within each width for
/// width-indexed rules) and every replica is refit from `best`'s parameters.
/// Replicas that fail to converge are dropped; more than 20% dropped is an
/// error. Returns the sample standard deviation of each ε_x.
pub fn bootstrap_from_fit(
    d: &Dataset,
    rule: &BasisRule,
    cfg: &FitConfig,
    best: &FitResult,
    replicas: usize,
) -> Result<BTreeMap<BasisElementId, f64>> {
    if replicas < 2 {
        return Err(Error::Precondition(
            "bootstrap needs at least 2 replicas".into(),
        ));
    }
    let groups: Vec<Dataset> = if rule.width_indexed {
        d.widths().into_iter().map(|w| d.width_subset(w)).collect()
    } else {
        vec![d.clone()]
    };

    let samples: Vec<Option<Vec<(BasisElementId, f64)>>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(cfg.seed, "bootstrap", r as u64);
            let mut eps = Vec::new();
            for g in &groups {
                let n = g.len();
                let picks: Vec<_> = (0..n)
                    .map(|_| g.records[rng.random_range(0..n)].clone())
                    .collect();
                // Duplicate ids are fine for fitting; skip dataset validation.
                let resampled = g.with_records(picks);
                let elements = enumerate_elements(&resampled, rule).ok()?;
                let start: Vec<f64> = elements
                    .iter()
                    .map(|l| best.model.polarization(l).map(logit))
                    .collect::<Option<Vec<_>>>()?;
                let width = rule.width_indexed.then(|| g.records[0].width());
                let part =
                    fit_part(&resampled, rule, cfg, width, Some(&start), Some(elements)).ok()?;
                if !part.converged {
                    return None;
                }
                for (l, &t) in part.elements.iter().zip(&part.theta) {
                    let w = best.model.widths()[best.model.index_of(l)?];
                    let f = fidelity_from_polarization(sigmoid(t), w).ok()?;
                    eps.push((l.clone(), 1.0 - f));
                }
            }
            Some(eps)
        })
        .collect();

    let dropped = samples.iter().filter(|s| s.is_none()).count();
    if dropped as f64 > MAX_BOOTSTRAP_DROP * replicas as f64 {
        return Err(Error::Numerical(format!(
            "{dropped} of {replicas} bootstrap replicas failed to converge"
        )));
    }
    let mut per_element: BTreeMap<BasisElementId, Vec<f64>> = BTreeMap::new();
    for s in samples.into_iter().flatten() {
        for (l, e) in s {
            per_element.entry(l).or_default().push(e);
        }
    }
    Ok(per_element
        .into_iter()
        .filter(|(_, v)| v.len() >= 2)
        .map(|(l, v)| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (l, var.sqrt())
        })
        .collect())
}

pub fn bootstrap_uncertainties(
    d: &Dataset,
    rule: &BasisRule,
    cfg: &FitConfig,
    replicas: usize,
) -> Result<BTreeMap<BasisElementId, f64>> {
    let best = fit(d, rule, cfg)?;
    bootstrap_from_fit(d, rule, cfg, &best, replicas)
}

/// Fit followed by a bootstrap; the result carries `stderr`.
pub fn fit_with_bootstrap(
    d: &Dataset,
    rule: &BasisRule,
    cfg: &FitConfig,
    replicas: usize,
) -> Result<FitResult> {
    let mut result = fit(d, rule, cfg)?;
    result.stderr = Some(bootstrap_from_fit(d, rule, cfg, &result, replicas)?);
    Ok(result)
}

/// Deterministic train/holdout split.
///
/// Records are ranked by a seeded hash of their id; the first
/// `round(fraction * n)` form the training set. Both halves keep the original
/// record order.
pub fn train_test_split(d: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Precondition(format!(
            "split fraction {fraction} outside [0, 1]"
        )));
    }
    let n = d.len();
    let mut order: Vec<(u64, usize)> = d
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| (keyed_hash(seed, r.id()), i))
        .collect();
    order.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then_with(|| d.records[a.1].id().cmp(d.records[b.1].id()))
    });
    let n_train = (fraction * n as f64).round() as usize;
    let mut is_train = vec![false; n];
    for &(_, i) in &order[..n_train] {
        is_train[i] = true;
    }
    let (train, test): (Vec<_>, Vec<_>) = d
        .records
        .iter()
        .cloned()
        .zip(is_train)
        .partition(|(_, t)| *t);
    Ok((
        d.with_records(train.into_iter().map(|(r, _)| r).collect()),
        d.with_records(test.into_iter().map(|(r, _)| r).collect()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, CircuitRecord, GateApplication, GateArities};

    fn arities() -> GateArities {
        [("X".to_owned(), 1), ("CX".to_owned(), 2)]
            .into_iter()
            .collect()
    }

    fn circuit(id: &str, n1: usize, n2: usize) -> Circuit {
        let mut layers = Vec::new();
        for _ in 0..n1 {
            layers.push(vec![GateApplication::one("X", 0)]);
        }
        for _ in 0..n2 {
            layers.push(vec![GateApplication::two("CX", 0, 1)]);
        }
        Circuit::new(id, vec![0, 1], layers).unwrap()
    }

    fn polarization_data(shapes: &[(usize, usize)], g1: f64, g2: f64) -> Dataset {
        let records = shapes
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                CircuitRecord::new(
                    circuit(&format!("c{i}"), a, b),
                    g1.powi(a as i32) * g2.powi(b as i32),
                )
            })
            .collect();
        Dataset::new("t", CapabilityKind::ProcessPolarization, arities(), records).unwrap()
    }

    #[test]
    fn single_circuit_closed_form() {
        let c = Circuit::new("one", vec![0], vec![vec![GateApplication::one("X", 0)]; 7]).unwrap();
        let d = Dataset::new(
            "t",
            CapabilityKind::ProcessPolarization,
            arities(),
            vec![CircuitRecord::new(c, 0.8)],
        )
        .unwrap();
        let r = fit_least_squares(&d, &BasisRule::by_arity(false), &FitConfig::default()).unwrap();
        assert!(r.converged);
        let g = r.model.polarization(&"1q".into()).unwrap();
        assert!((g - 0.8f64.powf(1.0 / 7.0)).abs() < 1e-9, "{g}");
    }

    #[test]
    fn identical_counts_are_non_identifiable() {
        let d = polarization_data(&[(3, 2), (3, 2), (3, 2)], 0.99, 0.95);
        let r = fit_least_squares(&d, &BasisRule::by_arity(false), &FitConfig::default()).unwrap();
        assert!(!r.converged);
        assert!(!r.is_identifiable());
        assert_eq!(r.diagnostics[0].unconstrained.len(), 2);
        assert!(r.warnings()[0].contains("non-identifiable"));
        // the product is still fit
        let p = r
            .model
            .predict_polarization(&crate::basis::CountVector::from([("1q", 3), ("2q", 2)]));
        assert!((p.unwrap().value - 0.99f64.powi(3) * 0.95f64.powi(2)).abs() < 1e-9);
    }

    #[test]
    fn recovers_noiseless_polarizations() {
        let shapes: Vec<(usize, usize)> = (0..20).map(|i| (i % 7 + 1, i % 5)).collect();
        let d = polarization_data(&shapes, 0.995, 0.98);
        let r = fit_least_squares(&d, &BasisRule::by_arity(false), &FitConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.model.polarization(&"1q".into()).unwrap() - 0.995).abs() < 1e-8);
        assert!((r.model.polarization(&"2q".into()).unwrap() - 0.98).abs() < 1e-8);
        assert_eq!(r.diagnostics[0].restart_objectives.len(), 9);
    }

    #[test]
    fn rank_detection() {
        let (r, u) = rank_and_unconstrained(&[vec![1.0, 2.0, 1.0], vec![2.0, 4.0, 1.0]], 3);
        assert_eq!(r, 2);
        assert_eq!(u, vec![0, 1]);
        let (r, u) = rank_and_unconstrained(&[vec![1.0, 0.0], vec![0.0, 3.0]], 2);
        assert_eq!((r, u.len()), (2, 0));
    }

    #[test]
    fn split_is_exact_and_deterministic() {
        let shapes: Vec<(usize, usize)> = (0..150).map(|i| (i % 9, i % 4)).collect();
        let d = polarization_data(&shapes, 0.99, 0.9);
        let (a, b) = train_test_split(&d, 0.8, 3).unwrap();
        assert_eq!((a.len(), b.len()), (120, 30));
        let (a2, _) = train_test_split(&d, 0.8, 3).unwrap();
        assert_eq!(a, a2);
        let (all, none) = train_test_split(&d, 1.0, 3).unwrap();
        assert_eq!((all.len(), none.len()), (150, 0));
        assert!(train_test_split(&d, 1.5, 3).is_err());
    }

    #[test]
    fn mle_requires_counts() {
        let d = polarization_data(&[(1, 0)], 0.99, 0.9);
        assert!(matches!(
            fit_mle(&d, &BasisRule::by_arity(false), &FitConfig::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn objective_json_names() {
        assert_eq!(
            serde_json::to_string(&Objective::LeastSquares).unwrap(),
            "\"lsq\""
        );
        assert_eq!("mle".parse::<Objective>().unwrap(), Objective::Mle);
    }
}
