//! Circuit intermediate representation and the benchmark dataset container.
//!
//! A [`Dataset`] is what a benchmark produces: a set of circuits, each paired
//! with an estimated capability value (a success probability or a process
//! polarization). Gate names are opaque; only their arity is known, via the
//! dataset's `gate_arities` header.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version written into and required from every dataset file.
pub const FORMAT_VERSION: u32 = 1;

/// Relative slack allowed between `estimate` and `successes / shots`.
const SUCCESS_RATIO_TOLERANCE: f64 = 1e-12;

/// Gate name to arity (1 or 2).
pub type GateArities = BTreeMap<String, u8>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateApplication {
    pub name: String,
    pub qubits: Vec<usize>,
}

impl GateApplication {
    pub fn new(name: impl Into<String>, qubits: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            qubits,
        }
    }

    pub fn one(name: impl Into<String>, q: usize) -> Self {
        Self::new(name, vec![q])
    }

    pub fn two(name: impl Into<String>, a: usize, b: usize) -> Self {
        Self::new(name, vec![a, b])
    }

    pub fn arity(&self) -> usize {
        self.qubits.len()
    }
}

pub type Layer = Vec<GateApplication>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub id: String,
    pub qubits: Vec<usize>,
    pub layers: Vec<Layer>,
}

impl Circuit {
    /// Builds a circuit and checks its invariants.
    pub fn new(id: impl Into<String>, qubits: Vec<usize>, layers: Vec<Layer>) -> Result<Self> {
        let c = Self {
            id: id.into(),
            qubits,
            layers,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn width(&self) -> usize {
        self.qubits.len()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width(), self.depth())
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn gates(&self) -> impl Iterator<Item = &GateApplication> {
        self.layers.iter().flatten()
    }

    /// Position of a qubit index within `self.qubits`.
    pub fn position(&self, qubit: usize) -> Option<usize> {
        self.qubits.iter().position(|&q| q == qubit)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::validation(&self.id, msg));
        if self.qubits.is_empty() {
            return fail("circuit has no qubits".into());
        }
        let register: BTreeSet<usize> = self.qubits.iter().copied().collect();
        if register.len() != self.qubits.len() {
            return fail(format!("duplicate qubit in register {:?}", self.qubits));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            let mut used = BTreeSet::new();
            for gate in layer {
                if gate.name.is_empty() {
                    return fail(format!("layer {l}: empty gate name"));
                }
                if !(1..=2).contains(&gate.qubits.len()) {
                    return fail(format!(
                        "layer {l}: gate `{}` acts on {} qubits (must be 1 or 2)",
                        gate.name,
                        gate.qubits.len()
                    ));
                }
                if gate.qubits.len() == 2 && gate.qubits[0] == gate.qubits[1] {
                    return fail(format!(
                        "layer {l}: gate `{}` repeats qubit {}",
                        gate.name, gate.qubits[0]
                    ));
                }
                for &q in &gate.qubits {
                    if !register.contains(&q) {
                        return fail(format!(
                            "layer {l}: gate `{}` acts on qubit {q} outside the register",
                            gate.name
                        ));
                    }
                    if !used.insert(q) {
                        return fail(format!("layer {l}: qubit {q} used by more than one gate"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `(width, depth)` of a circuit, depth being the raw layer count.
pub fn circuit_shape(c: &Circuit) -> (usize, usize) {
    c.shape()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapabilityKind {
    SuccessProbability,
    ProcessPolarization,
}

impl fmt::Display for CapabilityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CapabilityKind::SuccessProbability => "success_probability",
            CapabilityKind::ProcessPolarization => "process_polarization",
        })
    }
}

/// Smallest process polarization an `n`-qubit channel can have.
pub fn min_polarization(n: usize) -> f64 {
    -1.0 / (4f64.powi(n as i32) - 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitRecord {
    pub circuit: Circuit,
    pub estimate: f64,
    pub shots: Option<u64>,
    pub successes: Option<u64>,
    /// Opaque depth convention used only for plot axes.
    pub benchmark_depth: Option<usize>,
}

impl CircuitRecord {
    pub fn new(circuit: Circuit, estimate: f64) -> Self {
        Self {
            circuit,
            estimate,
            shots: None,
            successes: None,
            benchmark_depth: None,
        }
    }

    pub fn with_counts(mut self, successes: u64, shots: u64) -> Self {
        self.successes = Some(successes);
        self.shots = Some(shots);
        self
    }

    pub fn with_benchmark_depth(mut self, depth: usize) -> Self {
        self.benchmark_depth = Some(depth);
        self
    }

    pub fn id(&self) -> &str {
        &self.circuit.id
    }

    pub fn width(&self) -> usize {
        self.circuit.width()
    }

    /// Depth used for grouping and plotting: the benchmark depth when present,
    /// the layer count otherwise.
    pub fn plot_depth(&self) -> usize {
        self.benchmark_depth.unwrap_or_else(|| self.circuit.depth())
    }

    pub fn validate(&self, kind: CapabilityKind) -> Result<()> {
        self.circuit.validate()?;
        let id = self.id();
        let w = self.width();
        if !self.estimate.is_finite() {
            return Err(Error::validation(id, "estimate is not finite"));
        }
        match kind {
            CapabilityKind::SuccessProbability => {
                if !(0.0..=1.0).contains(&self.estimate) {
                    return Err(Error::validation(
                        id,
                        format!("success probability {} outside [0, 1]", self.estimate),
                    ));
                }
            }
            CapabilityKind::ProcessPolarization => {
                let lo = min_polarization(w);
                if self.estimate < lo || self.estimate > 1.0 {
                    return Err(Error::validation(
                        id,
                        format!(
                            "polarization {} outside [{lo}, 1] for width {w}",
                            self.estimate
                        ),
                    ));
                }
            }
        }
        match (self.shots, self.successes) {
            (None, None) => {}
            (None, Some(_)) => {
                return Err(Error::validation(id, "successes given without shots"));
            }
            (Some(0), _) => return Err(Error::validation(id, "shots must be positive")),
            (Some(m), Some(k)) => {
                if k > m {
                    return Err(Error::validation(
                        id,
                        format!("successes {k} exceed shots {m}"),
                    ));
                }
                if kind == CapabilityKind::SuccessProbability {
                    let ratio = k as f64 / m as f64;
                    if (ratio - self.estimate).abs() > SUCCESS_RATIO_TOLERANCE {
                        return Err(Error::validation(
                            id,
                            format!(
                                "estimate {} disagrees with successes/shots = {ratio}",
                                self.estimate
                            ),
                        ));
                    }
                }
            }
            (Some(_), None) => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub processor: String,
    pub capability_kind: CapabilityKind,
    pub gate_arities: GateArities,
    pub records: Vec<CircuitRecord>,
}

impl Dataset {
    pub fn new(
        processor: impl Into<String>,
        capability_kind: CapabilityKind,
        gate_arities: GateArities,
        records: Vec<CircuitRecord>,
    ) -> Result<Self> {
        let d = Self {
            processor: processor.into(),
            capability_kind,
            gate_arities,
            records,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, &arity) in &self.gate_arities {
            if name.is_empty() || !(1..=2).contains(&arity) {
                return Err(Error::Dataset(format!(
                    "gate_arities entry `{name}`: {arity} (arity must be 1 or 2)"
                )));
            }
        }
        let mut ids = BTreeSet::new();
        for r in &self.records {
            if !ids.insert(r.id()) {
                return Err(Error::validation(r.id(), "duplicate record id"));
            }
            r.validate(self.capability_kind)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct circuit widths, ascending.
    pub fn widths(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.records.iter().map(CircuitRecord::width).collect();
        set.into_iter().collect()
    }

    pub fn max_width(&self) -> Option<usize> {
        self.records.iter().map(CircuitRecord::width).max()
    }

    /// Copy of this dataset's header with a different record list.
    pub fn with_records(&self, records: Vec<CircuitRecord>) -> Dataset {
        Dataset {
            processor: self.processor.clone(),
            capability_kind: self.capability_kind,
            gate_arities: self.gate_arities.clone(),
            records,
        }
    }

    /// Records of one width, in original order.
    pub fn width_subset(&self, width: usize) -> Dataset {
        self.with_records(
            self.records
                .iter()
                .filter(|r| r.width() == width)
                .cloned()
                .collect(),
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let wire: WireDataset = serde_json::from_str(text)?;
        wire.into_dataset()
    }

    pub fn to_json(&self) -> String {
        let wire = WireDataset::from_dataset(self);
        // Serializing plain structs, vectors and string-keyed maps cannot fail.
        serde_json::to_string_pretty(&wire).expect("dataset serialization")
    }
}

pub fn parse_dataset(text: &str) -> Result<Dataset> {
    Dataset::parse(text)
}

pub fn serialize_dataset(d: &Dataset) -> String {
    d.to_json()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireDataset {
    format_version: u32,
    processor: String,
    capability_kind: CapabilityKind,
    #[serde(default)]
    gate_arities: GateArities,
    records: Vec<WireRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireRecord {
    id: String,
    qubits: Vec<usize>,
    layers: Vec<Vec<GateApplication>>,
    estimate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    successes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    benchmark_depth: Option<usize>,
}

impl WireDataset {
    fn into_dataset(self) -> Result<Dataset> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Dataset(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let records = self
            .records
            .into_iter()
            .map(|r| CircuitRecord {
                circuit: Circuit {
                    id: r.id,
                    qubits: r.qubits,
                    layers: r.layers,
                },
                estimate: r.estimate,
                shots: r.shots,
                successes: r.successes,
                benchmark_depth: r.benchmark_depth,
            })
            .collect();
        Dataset::new(
            self.processor,
            self.capability_kind,
            self.gate_arities,
            records,
        )
    }

    fn from_dataset(d: &Dataset) -> Self {
        WireDataset {
            format_version: FORMAT_VERSION,
            processor: d.processor.clone(),
            capability_kind: d.capability_kind,
            gate_arities: d.gate_arities.clone(),
            records: d
                .records
                .iter()
                .map(|r| WireRecord {
                    id: r.circuit.id.clone(),
                    qubits: r.circuit.qubits.clone(),
                    layers: r.circuit.layers.clone(),
                    estimate: r.estimate,
                    shots: r.shots,
                    successes: r.successes,
                    benchmark_depth: r.benchmark_depth,
                })
                .collect(),
        }
    }
}
