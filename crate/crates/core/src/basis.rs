//! Basis elements, the decomposition rule, and the counting function.
//!
//! Label grammar:
//!
//! | rule            | one-qubit gate | two-qubit gate         | readout     |
//! |-----------------|----------------|------------------------|-------------|
//! | `by_arity`      | `1q`           | `2q`                   | `readout`   |
//! | `by_gate_name`  | gate name      | gate name              | `readout`   |
//! | `by_location`   | `1q@<i>`       | `2q@{<min>,<max>}`     | `readout`   |
//!
//! Width-indexed rules prepend `w<width>:` to every label.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Dataset, GateApplication, GateArities};
use crate::error::{Error, Result};

pub const READOUT_LABEL: &str = "readout";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BasisElementId(pub String);

impl BasisElementId {
    pub fn new(label: impl Into<String>) -> Self {
        Self(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Width from a `w<k>:` prefix, if any.
    pub fn width_prefix(&self) -> Option<usize> {
        let rest = self.0.strip_prefix('w')?;
        let (num, _) = rest.split_once(':')?;
        num.parse().ok()
    }

    /// The label with any width prefix removed.
    pub fn base(&self) -> &str {
        match self.width_prefix() {
            Some(_) => self.0.split_once(':').map_or(&self.0, |(_, b)| b),
            None => &self.0,
        }
    }

    pub fn is_readout(&self) -> bool {
        self.base() == READOUT_LABEL
    }
}

impl fmt::Display for BasisElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for BasisElementId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    ByArity,
    ByGateName,
    ByLocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisRule {
    pub kind: RuleKind,
    pub include_readout: bool,
    pub width_indexed: bool,
}

impl BasisRule {
    pub fn new(kind: RuleKind, include_readout: bool, width_indexed: bool) -> Self {
        Self {
            kind,
            include_readout,
            width_indexed,
        }
    }

    pub fn by_arity(include_readout: bool) -> Self {
        Self::new(RuleKind::ByArity, include_readout, false)
    }

    pub fn width_indexed(mut self) -> Self {
        self.width_indexed = true;
        self
    }

    fn prefixed(&self, width: usize, base: String) -> BasisElementId {
        if self.width_indexed {
            BasisElementId(format!("w{width}:{base}"))
        } else {
            BasisElementId(base)
        }
    }

    /// Label of one gate application inside a circuit of the given width.
    pub fn gate_label(
        &self,
        gate: &GateApplication,
        width: usize,
        arities: &GateArities,
    ) -> Result<BasisElementId> {
        let arity = *arities
            .get(&gate.name)
            .ok_or_else(|| Error::Decomposition {
                gate: gate.name.clone(),
                reason: "not declared in gate_arities".into(),
            })?;
        if arity as usize != gate.arity() {
            return Err(Error::Decomposition {
                gate: gate.name.clone(),
                reason: format!(
                    "declared arity {arity} but applied to {} qubit(s)",
                    gate.arity()
                ),
            });
        }
        let base = match (self.kind, gate.arity()) {
            (RuleKind::ByArity, 1) => "1q".to_owned(),
            (RuleKind::ByArity, _) => "2q".to_owned(),
            (RuleKind::ByGateName, _) => gate.name.clone(),
            (RuleKind::ByLocation, 1) => format!("1q@{}", gate.qubits[0]),
            (RuleKind::ByLocation, _) => {
                let (a, b) = (gate.qubits[0], gate.qubits[1]);
                format!("2q@{{{},{}}}", a.min(b), a.max(b))
            }
        };
        Ok(self.prefixed(width, base))
    }

    pub fn readout_label(&self, width: usize) -> BasisElementId {
        self.prefixed(width, READOUT_LABEL.to_owned())
    }
}

/// Number of occurrences of each basis element in a circuit. Elements with a
/// zero count are absent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountVector {
    pub counts: BTreeMap<BasisElementId, u64>,
}

impl CountVector {
    pub fn get(&self, label: &BasisElementId) -> u64 {
        self.counts.get(label).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn add(&mut self, label: BasisElementId, n: u64) {
        if n > 0 {
            *self.counts.entry(label).or_insert(0) += n;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisElementId, u64)> {
        self.counts.iter().map(|(k, &v)| (k, v))
    }

    /// Sum over everything except readout elements.
    pub fn gate_total(&self) -> u64 {
        self.iter()
            .filter(|(k, _)| !k.is_readout())
            .map(|(_, v)| v)
            .sum()
    }
}

impl<const N: usize> From<[(&str, u64); N]> for CountVector {
    fn from(items: [(&str, u64); N]) -> Self {
        let mut cv = CountVector::default();
        for (k, v) in items {
            cv.add(BasisElementId::from(k), v);
        }
        cv
    }
}

pub fn count_basis_elements(
    c: &Circuit,
    rule: &BasisRule,
    arities: &GateArities,
) -> Result<CountVector> {
    let mut cv = CountVector::default();
    let w = c.width();
    for gate in c.gates() {
        cv.add(rule.gate_label(gate, w, arities)?, 1);
    }
    if rule.include_readout {
        cv.add(rule.readout_label(w), 1);
    }
    Ok(cv)
}

/// Count vectors for every record of a dataset, in record order.
pub fn count_dataset(d: &Dataset, rule: &BasisRule) -> Result<Vec<CountVector>> {
    d.records
        .iter()
        .map(|r| count_basis_elements(&r.circuit, rule, &d.gate_arities))
        .collect()
}

/// Sorted, deduplicated union of the labels occurring in a dataset.
pub fn enumerate_elements(d: &Dataset, rule: &BasisRule) -> Result<Vec<BasisElementId>> {
    let mut set = BTreeSet::new();
    for cv in count_dataset(d, rule)? {
        set.extend(cv.counts.into_keys());
    }
    Ok(set.into_iter().collect())
}
