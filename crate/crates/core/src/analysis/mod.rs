//! Summary statistics over benchmark data and fitted models.

mod rb;
mod volumetric;

pub use rb::{rb_exponential_fit, RbFit};
pub use volumetric::{
    frontier, frontiers_to_csv, render_svg, volumetric_summary, CellStats, Frontier, Statistic,
    ValueMode, VolumetricGrid, DEFAULT_THRESHOLD,
};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::basis::{count_basis_elements, count_dataset, BasisElementId};
use crate::circuit::Dataset;
use crate::error::{Error, Result};
use crate::model::{fidelity_from_polarization, ErmModel};

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub id: String,
    pub width: usize,
    pub depth: usize,
    pub estimate: f64,
    pub prediction: f64,
    /// `prediction - estimate`
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionReport {
    pub rows: Vec<PredictionRow>,
    /// Mean of `|delta|`; `None` for an empty dataset.
    pub delta_abs: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    delta_abs: Option<f64>,
    n_test: usize,
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

impl PredictionReport {
    pub fn n_test(&self) -> usize {
        self.rows.len()
    }

    /// `id,width,depth,estimate,prediction,delta`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,width,depth,estimate,prediction,delta\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_field(&r.id),
                r.width,
                r.depth,
                r.estimate,
                r.prediction,
                r.delta
            );
        }
        out
    }

    /// `{"delta_abs": f, "n_test": k}`
    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&Summary {
            delta_abs: self.delta_abs,
            n_test: self.n_test(),
        })
        .expect("summary serialization")
    }
}

/// Model predictions for every record, using the dataset's capability kind.
pub fn predict_dataset(m: &ErmModel, d: &Dataset) -> Result<Vec<f64>> {
    let counts = count_dataset(d, m.rule())?;
    let mut missing = std::collections::BTreeSet::new();
    for cv in &counts {
        missing.extend(m.missing(cv));
    }
    if !missing.is_empty() {
        return Err(Error::MissingElements {
            labels: missing.into_iter().collect(),
        });
    }
    d.records
        .iter()
        .zip(&counts)
        .map(|(r, cv)| Ok(m.predict(cv, d.capability_kind, r.width())?.value))
        .collect()
}

/// Per-record `δ(c) = E(c) - ŝ(c)` and `δ_abs = mean |δ(c)|`.
pub fn prediction_errors(m: &ErmModel, d: &Dataset) -> Result<PredictionReport> {
    let predictions = predict_dataset(m, d)?;
    let rows: Vec<PredictionRow> = d
        .records
        .iter()
        .zip(predictions)
        .map(|(r, e)| PredictionRow {
            id: r.id().to_owned(),
            width: r.width(),
            depth: r.plot_depth(),
            estimate: r.estimate,
            prediction: e,
            delta: e - r.estimate,
        })
        .collect();
    let delta_abs = (!rows.is_empty())
        .then(|| rows.iter().map(|r| r.delta.abs()).sum::<f64>() / rows.len() as f64);
    Ok(PredictionReport { rows, delta_abs })
}

/// Mean error rate of a `w`-qubit layer implied by the model.
///
/// Averages the per-layer gate counts over all records of this width
/// (readout excluded), forms `Π γ_x^{N̄_x}`, and converts the result to an
/// `n = w` process infidelity.
pub fn erm_mean_layer_error(m: &ErmModel, d: &Dataset, width: usize) -> Result<f64> {
    let mut totals: BTreeMap<BasisElementId, f64> = BTreeMap::new();
    let mut layers = 0usize;
    let mut seen = 0usize;
    for r in d.records.iter().filter(|r| r.width() == width) {
        seen += 1;
        layers += r.circuit.depth();
        let cv = count_basis_elements(&r.circuit, m.rule(), &d.gate_arities)?;
        for (label, n) in cv.iter().filter(|(l, _)| !l.is_readout()) {
            *totals.entry(label.clone()).or_insert(0.0) += n as f64;
        }
    }
    if seen == 0 {
        return Err(Error::Precondition(format!("no records of width {width}")));
    }
    if layers == 0 {
        return Err(Error::Precondition(format!(
            "records of width {width} contain no layers"
        )));
    }
    let mut log_p = 0.0;
    let mut missing = Vec::new();
    for (label, total) in &totals {
        match m.polarization(label) {
            Some(g) => log_p += total / layers as f64 * g.ln(),
            None => missing.push(label.0.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingElements { labels: missing });
    }
    Ok(1.0 - fidelity_from_polarization(log_p.exp(), width)?)
}
