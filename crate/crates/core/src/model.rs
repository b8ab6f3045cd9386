//! Error rates models under global depolarization.
//!
//! Every basis element `x` carries a process polarization `γ_x`. A circuit's
//! process polarization is `Π_x γ_x^{N_x}` and the success probability of an
//! `n`-qubit definite-outcome circuit is `(1 - 2^-n) Π_x γ_x^{N_x} + 2^-n`.
//! Products are evaluated as `exp(Σ N_x ln γ_x)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::basis::{BasisElementId, BasisRule, CountVector};
use crate::circuit::CapabilityKind;
use crate::error::{Error, Result};

fn four_pow(n: usize) -> f64 {
    4f64.powi(n as i32)
}

fn two_pow_neg(n: usize) -> f64 {
    0.5f64.powi(n as i32)
}

/// `(4^n F - 1) / (4^n - 1)`.
pub fn polarization_from_fidelity(fidelity: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("qubit count must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::Domain(format!("fidelity {fidelity} outside [0, 1]")));
    }
    let d2 = four_pow(n);
    Ok((d2 * fidelity - 1.0) / (d2 - 1.0))
}

/// `(γ (4^n - 1) + 1) / 4^n`, the inverse of [`polarization_from_fidelity`].
pub fn fidelity_from_polarization(polarization: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("qubit count must be at least 1".into()));
    }
    let d2 = four_pow(n);
    let lo = -1.0 / (d2 - 1.0);
    if !(lo..=1.0).contains(&polarization) {
        return Err(Error::Domain(format!(
            "polarization {polarization} outside [{lo}, 1] for {n} qubit(s)"
        )));
    }
    Ok((polarization * (d2 - 1.0) + 1.0) / d2)
}

/// Polarization of a definite-outcome circuit's output from its success
/// probability: `(s - 2^-n) / (1 - 2^-n)`.
pub fn success_to_polarization(success: f64, n: usize) -> f64 {
    let floor = two_pow_neg(n);
    (success - floor) / (1.0 - floor)
}

/// Eq. (5) map from circuit polarization to success probability.
pub fn polarization_to_success(polarization: f64, n: usize) -> f64 {
    let floor = two_pow_neg(n);
    (1.0 - floor) * polarization + floor
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapabilityPrediction {
    pub value: f64,
    pub kind: CapabilityKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErmModel {
    rule: BasisRule,
    elements: Vec<BasisElementId>,
    polarizations: Vec<f64>,
    widths: Vec<usize>,
    index: BTreeMap<BasisElementId, usize>,
}

/// One parameter of a model: `(label, polarization, reporting width)`.
pub type ElementParam = (BasisElementId, f64, usize);

impl ErmModel {
    pub fn new(rule: BasisRule, params: Vec<ElementParam>) -> Result<Self> {
        let mut elements = Vec::with_capacity(params.len());
        let mut polarizations = Vec::with_capacity(params.len());
        let mut widths = Vec::with_capacity(params.len());
        let mut index = BTreeMap::new();
        for (label, gamma, width) in params {
            if !(gamma > 0.0 && gamma <= 1.0) {
                return Err(Error::Domain(format!(
                    "polarization of `{label}` is {gamma}, must lie in (0, 1]"
                )));
            }
            if width == 0 {
                return Err(Error::Domain(format!(
                    "width of `{label}` must be positive"
                )));
            }
            if index.insert(label.clone(), elements.len()).is_some() {
                return Err(Error::Domain(format!("duplicate element `{label}`")));
            }
            elements.push(label);
            polarizations.push(gamma);
            widths.push(width);
        }
        Ok(Self {
            rule,
            elements,
            polarizations,
            widths,
            index,
        })
    }

    /// Model whose polarizations come from error rates `ε_x = 1 - F_x`.
    pub fn from_error_rates(
        rule: BasisRule,
        rates: impl IntoIterator<Item = (BasisElementId, f64, usize)>,
    ) -> Result<Self> {
        let params = rates
            .into_iter()
            .map(|(label, eps, width)| {
                let gamma = polarization_from_fidelity(1.0 - eps, width)?;
                Ok((label, gamma, width))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rule, params)
    }

    pub fn rule(&self) -> &BasisRule {
        &self.rule
    }

    pub fn elements(&self) -> &[BasisElementId] {
        &self.elements
    }

    pub fn polarizations(&self) -> &[f64] {
        &self.polarizations
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, label: &BasisElementId) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn polarization(&self, label: &BasisElementId) -> Option<f64> {
        self.index_of(label).map(|i| self.polarizations[i])
    }

    pub fn params(&self) -> impl Iterator<Item = (&BasisElementId, f64, usize)> {
        self.elements
            .iter()
            .zip(&self.polarizations)
            .zip(&self.widths)
            .map(|((l, &g), &w)| (l, g, w))
    }

    /// Labels in `counts` without a parameter in this model.
    pub fn missing(&self, counts: &CountVector) -> Vec<String> {
        counts
            .counts
            .keys()
            .filter(|k| !self.index.contains_key(*k))
            .map(|k| k.0.clone())
            .collect()
    }

    /// `Σ_x N_x ln γ_x`.
    pub fn log_polarization(&self, counts: &CountVector) -> Result<f64> {
        let missing = self.missing(counts);
        if !missing.is_empty() {
            return Err(Error::MissingElements { labels: missing });
        }
        Ok(counts
            .iter()
            .map(|(k, n)| n as f64 * self.polarizations[self.index[k]].ln())
            .sum())
    }

    pub fn predict_polarization(&self, counts: &CountVector) -> Result<CapabilityPrediction> {
        Ok(CapabilityPrediction {
            value: self.log_polarization(counts)?.exp(),
            kind: CapabilityKind::ProcessPolarization,
        })
    }

    pub fn predict_success_probability(
        &self,
        counts: &CountVector,
        n: usize,
    ) -> Result<CapabilityPrediction> {
        if n == 0 {
            return Err(Error::Domain("circuit width must be at least 1".into()));
        }
        let p = self.log_polarization(counts)?.exp();
        Ok(CapabilityPrediction {
            value: polarization_to_success(p, n).clamp(two_pow_neg(n), 1.0),
            kind: CapabilityKind::SuccessProbability,
        })
    }

    pub fn predict(
        &self,
        counts: &CountVector,
        kind: CapabilityKind,
        width: usize,
    ) -> Result<CapabilityPrediction> {
        match kind {
            CapabilityKind::ProcessPolarization => self.predict_polarization(counts),
            CapabilityKind::SuccessProbability => self.predict_success_probability(counts, width),
        }
    }

    /// `ε_x = 1 - F_x`, each at the element's own width.
    pub fn error_rates(&self) -> BTreeMap<BasisElementId, f64> {
        self.params()
            .map(|(l, g, w)| {
                // γ ∈ (0, 1] is inside the conversion's domain.
                let f = fidelity_from_polarization(g, w).expect("polarization in range");
                (l.clone(), 1.0 - f)
            })
            .collect()
    }

    /// Union of disjoint models sharing one rule.
    pub fn merge(rule: BasisRule, parts: &[ErmModel]) -> Result<Self> {
        let params = parts
            .iter()
            .flat_map(|m| m.params().map(|(l, g, w)| (l.clone(), g, w)))
            .collect();
        Self::new(rule, params)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(WireModel::from(self)).expect("model serialization")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&WireModel::from(self)).expect("model serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: WireModel = serde_json::from_str(text)?;
        wire.try_into()
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self> {
        let wire: WireModel = serde_json::from_value(value)?;
        wire.try_into()
    }
}

pub fn error_rate_report(m: &ErmModel) -> BTreeMap<BasisElementId, f64> {
    m.error_rates()
}

#[derive(Serialize, Deserialize)]
pub(crate) struct WireParam {
    polarization: f64,
    width: usize,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct WireModel {
    rule: BasisRule,
    elements: Vec<BasisElementId>,
    params: BTreeMap<BasisElementId, WireParam>,
}

impl From<&ErmModel> for WireModel {
    fn from(m: &ErmModel) -> Self {
        WireModel {
            rule: m.rule,
            elements: m.elements.clone(),
            params: m
                .params()
                .map(|(l, g, w)| {
                    (
                        l.clone(),
                        WireParam {
                            polarization: g,
                            width: w,
                        },
                    )
                })
                .collect(),
        }
    }
}

impl TryFrom<WireModel> for ErmModel {
    type Error = Error;

    fn try_from(mut wire: WireModel) -> Result<Self> {
        let params = wire
            .elements
            .into_iter()
            .map(|label| {
                let p = wire.params.remove(&label).ok_or_else(|| {
                    Error::Format(format!("element `{label}` has no entry in params"))
                })?;
                Ok((label, p.polarization, p.width))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(extra) = wire.params.keys().next() {
            return Err(Error::Format(format!(
                "params entry `{extra}` is not listed in elements"
            )));
        }
        ErmModel::new(wire.rule, params)
    }
}
