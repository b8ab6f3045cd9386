//! Synthetic benchmark data with known ground truth.
//!
//! Circuits are simplified randomized mirror circuits: `depth / 2` random
//! layers, a random Pauli layer, then the inverse of the random layers in
//! reverse order. The ideal output is a single bitstring, found by
//! propagating the Pauli layer through the Clifford half. Noise follows the
//! global depolarizing model, so success probabilities are available exactly
//! ([`analytic_success_probability`]), by finite-shot sampling
//! ([`sample_dataset`]), and by brute-force density-matrix simulation
//! ([`oracle_simulate`], widths up to 3).
//!
//! The mirror structure is a minimal construction that guarantees a definite
//! outcome; under this noise model only the basis-element counts matter.

mod oracle;

pub use oracle::{oracle_simulate, unitary, ORACLE_MAX_WIDTH};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::basis::{count_basis_elements, BasisElementId, BasisRule, RuleKind};
use crate::circuit::{
    CapabilityKind, Circuit, CircuitRecord, Dataset, GateApplication, GateArities, Layer,
};
use crate::error::{Error, Result};
use crate::model::ErmModel;
use crate::rng::{substream, Stream};

pub const DEFAULT_ONE_QUBIT_GATES: [&str; 7] = ["I", "X", "Y", "Z", "H", "S", "Sdg"];
pub const DEFAULT_TWO_QUBIT_GATES: [&str; 1] = ["CX"];
pub const PAULIS: [&str; 4] = ["I", "X", "Y", "Z"];

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub widths: Vec<usize>,
    /// Benchmark depths; each must be even.
    pub depths: Vec<usize>,
    pub circuits_per_shape: usize,
    /// ξ: probability that an edge of a random matching carries a 2-qubit gate.
    pub two_qubit_density: f64,
    pub one_qubit_gates: Vec<String>,
    pub two_qubit_gates: Vec<String>,
    /// Allowed qubit pairs; `None` means the linear chain `(i, i+1)`.
    pub connectivity: Option<Vec<(usize, usize)>>,
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            widths: vec![1, 2, 3],
            depths: vec![2, 4, 8],
            circuits_per_shape: 10,
            two_qubit_density: 0.25,
            one_qubit_gates: DEFAULT_ONE_QUBIT_GATES
                .iter()
                .map(|s| s.to_string())
                .collect(),
            two_qubit_gates: DEFAULT_TWO_QUBIT_GATES
                .iter()
                .map(|s| s.to_string())
                .collect(),
            connectivity: None,
            seed: 0,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Precondition(m));
        if self.widths.is_empty() || self.widths.contains(&0) {
            return bad("widths must be non-empty and at least 1".into());
        }
        if let Some(d) = self.depths.iter().find(|d| *d % 2 == 1) {
            return bad(format!("mirror circuit depth {d} is odd"));
        }
        if !(0.0..=1.0).contains(&self.two_qubit_density) {
            return bad(format!(
                "two-qubit density {} outside [0, 1]",
                self.two_qubit_density
            ));
        }
        if self.one_qubit_gates.is_empty() {
            return bad("no one-qubit gates".into());
        }
        for g in &self.one_qubit_gates {
            if oracle::unitary(g).map(|u| u.len()) != Some(4) {
                return Err(Error::Semantics(g.clone()));
            }
        }
        for g in &self.two_qubit_gates {
            if oracle::unitary(g).map(|u| u.len()) != Some(16) {
                return Err(Error::Semantics(g.clone()));
            }
        }
        let max_w = *self.widths.iter().max().unwrap_or(&1);
        if let Some(edges) = &self.connectivity {
            for &(a, b) in edges {
                if a == b || a >= max_w || b >= max_w {
                    return bad(format!("connectivity pair ({a}, {b}) out of range"));
                }
            }
        }
        Ok(())
    }

    /// Gate arity header covering every gate the generator can emit.
    pub fn arities(&self) -> GateArities {
        let mut a = GateArities::new();
        for g in self
            .one_qubit_gates
            .iter()
            .map(String::as_str)
            .chain(PAULIS)
        {
            a.insert(g.to_owned(), 1);
        }
        for g in &self.two_qubit_gates {
            a.insert(g.clone(), 2);
        }
        a
    }

    fn edges(&self, width: usize) -> Vec<(usize, usize)> {
        match &self.connectivity {
            Some(e) => e
                .iter()
                .copied()
                .filter(|&(a, b)| a < width && b < width)
                .collect(),
            None => (1..width).map(|i| (i - 1, i)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedCircuit {
    pub circuit: Circuit,
    /// Ideal output; character `k` is the bit of `circuit.qubits[k]`.
    pub target: String,
    pub benchmark_depth: usize,
}

fn inverse_name(name: &str) -> String {
    match name {
        "S" => "Sdg".to_owned(),
        "Sdg" => "S".to_owned(),
        other => other.to_owned(),
    }
}

fn inverse_layer(layer: &Layer) -> Layer {
    layer
        .iter()
        .map(|g| GateApplication::new(inverse_name(&g.name), g.qubits.clone()))
        .collect()
}

/// Conjugates the Pauli `(x, z)` by one gate, ignoring phase.
fn conjugate(x: &mut [bool], z: &mut [bool], gate: &GateApplication, pos: impl Fn(usize) -> usize) {
    match (gate.name.as_str(), gate.qubits.as_slice()) {
        ("H", &[q]) => {
            let q = pos(q);
            std::mem::swap(&mut x[q], &mut z[q]);
        }
        ("S" | "Sdg", &[q]) => {
            let q = pos(q);
            z[q] ^= x[q];
        }
        ("CX", &[c, t]) => {
            let (c, t) = (pos(c), pos(t));
            x[t] ^= x[c];
            z[c] ^= z[t];
        }
        ("CZ", &[a, b]) => {
            let (a, b) = (pos(a), pos(b));
            z[a] ^= x[b];
            z[b] ^= x[a];
        }
        _ => {}
    }
}

/// Builds `half · pauli · half⁻¹` on qubits `0..width` and its ideal output.
///
/// `pauli[k]` is one of `I`, `X`, `Y`, `Z` for qubit `k`.
pub fn mirror_from_half(
    id: impl Into<String>,
    width: usize,
    half: Vec<Layer>,
    pauli: &[&str],
) -> Result<GeneratedCircuit> {
    if pauli.len() != width {
        return Err(Error::Precondition(format!(
            "Pauli layer has {} entries for width {width}",
            pauli.len()
        )));
    }
    let benchmark_depth = 2 * half.len();
    let mut x: Vec<bool> = pauli.iter().map(|p| matches!(*p, "X" | "Y")).collect();
    let mut z: Vec<bool> = pauli.iter().map(|p| matches!(*p, "Z" | "Y")).collect();
    // Q = C† P C with C the first half: conjugate by the last layer first.
    for layer in half.iter().rev() {
        for g in layer {
            conjugate(&mut x, &mut z, g, |q| q);
        }
    }
    let target: String = x.iter().map(|&b| if b { '1' } else { '0' }).collect();

    let mut layers = half.clone();
    layers.push(
        pauli
            .iter()
            .enumerate()
            .map(|(q, p)| GateApplication::one(*p, q))
            .collect(),
    );
    layers.extend(half.iter().rev().map(inverse_layer));
    let circuit = Circuit::new(id, (0..width).collect(), layers)?;
    Ok(GeneratedCircuit {
        circuit,
        target,
        benchmark_depth,
    })
}

fn random_layer(spec: &GeneratorSpec, width: usize, rng: &mut Stream) -> Layer {
    let mut edges = spec.edges(width);
    edges.shuffle(rng);
    let mut busy = vec![false; width];
    let mut layer = Vec::new();
    for (a, b) in edges {
        if busy[a] || busy[b] {
            continue;
        }
        if !spec.two_qubit_gates.is_empty() && rng.random_bool(spec.two_qubit_density) {
            busy[a] = true;
            busy[b] = true;
            let name = spec.two_qubit_gates.choose(rng).expect("non-empty");
            let (c, t) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
            layer.push(GateApplication::two(name.clone(), c, t));
        }
    }
    for (q, _) in busy.iter().enumerate().filter(|(_, b)| !**b) {
        let name = spec.one_qubit_gates.choose(rng).expect("non-empty");
        layer.push(GateApplication::one(name.clone(), q));
    }
    layer.sort_by_key(|g| g.qubits[0]);
    layer
}

/// One random mirror circuit of benchmark depth `depth` (even).
pub fn generate_mirror_circuit(
    spec: &GeneratorSpec,
    id: impl Into<String>,
    width: usize,
    depth: usize,
    rng: &mut Stream,
) -> Result<GeneratedCircuit> {
    if depth % 2 == 1 {
        return Err(Error::Precondition(format!(
            "mirror circuit depth {depth} is odd"
        )));
    }
    if width == 0 {
        return Err(Error::Precondition("width must be at least 1".into()));
    }
    let half: Vec<Layer> = (0..depth / 2)
        .map(|_| random_layer(spec, width, rng))
        .collect();
    let pauli: Vec<&str> = (0..width)
        .map(|_| *PAULIS.choose(rng).expect("non-empty"))
        .collect();
    mirror_from_half(id, width, half, &pauli)
}

/// Every circuit of the spec, ordered by width, then depth, then index.
/// Circuit `i` draws from its own stream, so output is schedule-independent.
pub fn generate_circuits(spec: &GeneratorSpec) -> Result<Vec<GeneratedCircuit>> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for &w in &spec.widths {
        for &d in &spec.depths {
            for k in 0..spec.circuits_per_shape {
                jobs.push((w, d, k));
            }
        }
    }
    jobs.into_par_iter()
        .enumerate()
        .map(|(i, (w, d, k))| {
            let mut rng = substream(spec.seed, "circuit", i as u64);
            generate_mirror_circuit(spec, format!("w{w}-d{d}-{k}"), w, d, &mut rng)
        })
        .collect()
}

/// Generating parameters of a synthetic experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub model: ErmModel,
}

/// Error rates assigned by element type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRates {
    pub one_qubit: f64,
    pub two_qubit: f64,
    pub readout: f64,
}

impl GroundTruth {
    pub fn new(model: ErmModel) -> Self {
        Self { model }
    }

    /// Assigns `rates` to every element the circuits use, by element type.
    /// Each ε is converted at the element's width prefix, or at the largest
    /// circuit width for non-indexed rules.
    pub fn uniform<'a>(
        rule: &BasisRule,
        circuits: impl IntoIterator<Item = &'a Circuit>,
        arities: &GateArities,
        rates: ErrorRates,
    ) -> Result<Self> {
        let mut labels = std::collections::BTreeSet::new();
        let mut max_w = 1;
        for c in circuits {
            max_w = max_w.max(c.width());
            labels.extend(count_basis_elements(c, rule, arities)?.counts.into_keys());
        }
        let entries = labels
            .into_iter()
            .map(|l: BasisElementId| {
                let eps = if l.is_readout() {
                    rates.readout
                } else if element_arity(rule, &l, arities) == 2 {
                    rates.two_qubit
                } else {
                    rates.one_qubit
                };
                let w = l.width_prefix().unwrap_or(max_w);
                (l, eps, w)
            })
            .collect::<Vec<_>>();
        Ok(Self::new(ErmModel::from_error_rates(*rule, entries)?))
    }
}

fn element_arity(rule: &BasisRule, label: &BasisElementId, arities: &GateArities) -> u8 {
    let base = label.base();
    match rule.kind {
        RuleKind::ByArity | RuleKind::ByLocation => {
            if base.starts_with("2q") {
                2
            } else {
                1
            }
        }
        RuleKind::ByGateName => arities.get(base).copied().unwrap_or(1),
    }
}

pub fn analytic_success_probability(
    c: &Circuit,
    truth: &GroundTruth,
    rule: &BasisRule,
    arities: &GateArities,
) -> Result<f64> {
    let counts = count_basis_elements(c, rule, arities)?;
    Ok(truth
        .model
        .predict_success_probability(&counts, c.width())?
        .value)
}

pub fn analytic_polarization(
    c: &Circuit,
    truth: &GroundTruth,
    rule: &BasisRule,
    arities: &GateArities,
) -> Result<f64> {
    let counts = count_basis_elements(c, rule, arities)?;
    Ok(truth.model.predict_polarization(&counts)?.value)
}

fn record_for(g: &GeneratedCircuit, estimate: f64) -> CircuitRecord {
    CircuitRecord::new(g.circuit.clone(), estimate).with_benchmark_depth(g.benchmark_depth)
}

/// Dataset whose estimates are the exact model values.
pub fn exact_dataset(
    processor: &str,
    circuits: &[GeneratedCircuit],
    truth: &GroundTruth,
    rule: &BasisRule,
    arities: &GateArities,
    kind: CapabilityKind,
) -> Result<Dataset> {
    let records = circuits
        .par_iter()
        .map(|g| {
            let v = match kind {
                CapabilityKind::SuccessProbability => {
                    analytic_success_probability(&g.circuit, truth, rule, arities)?
                }
                CapabilityKind::ProcessPolarization => {
                    analytic_polarization(&g.circuit, truth, rule, arities)?
                }
            };
            Ok(record_for(g, v))
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(processor, kind, arities.clone(), records)
}

/// Finite-shot success-probability data: `successes ~ Binomial(shots, p)`.
pub fn sample_dataset(
    processor: &str,
    circuits: &[GeneratedCircuit],
    truth: &GroundTruth,
    rule: &BasisRule,
    arities: &GateArities,
    shots: u64,
    seed: u64,
) -> Result<Dataset> {
    if shots == 0 {
        return Err(Error::Precondition("shots must be at least 1".into()));
    }
    let records = circuits
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let p = analytic_success_probability(&g.circuit, truth, rule, arities)?;
            let mut rng = substream(seed, "shots", i as u64);
            let k = sample_successes(shots, p, &mut rng)?;
            Ok(record_for(g, k as f64 / shots as f64).with_counts(k, shots))
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(
        processor,
        CapabilityKind::SuccessProbability,
        arities.clone(),
        records,
    )
}

pub fn sample_successes(shots: u64, p: f64, rng: &mut Stream) -> Result<u64> {
    let dist = Binomial::new(shots, p.clamp(0.0, 1.0))
        .map_err(|e| Error::Domain(format!("binomial({shots}, {p}): {e}")))?;
    Ok(dist.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> GeneratorSpec {
        GeneratorSpec {
            widths: vec![1, 2, 3],
            depths: vec![0, 2, 6],
            circuits_per_shape: 4,
            two_qubit_density: 0.5,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn trivial_mirror_targets_zero() {
        let half = vec![vec![
            GateApplication::one("I", 0),
            GateApplication::one("I", 1),
        ]];
        let g = mirror_from_half("t", 2, half, &["I", "I"]).unwrap();
        assert_eq!(g.target, "00");
        assert_eq!(g.benchmark_depth, 2);
        assert_eq!(g.circuit.depth(), 3);
    }

    #[test]
    fn pauli_x_flips_its_bit() {
        let half = vec![vec![
            GateApplication::one("I", 0),
            GateApplication::one("I", 1),
            GateApplication::one("I", 2),
        ]];
        let g = mirror_from_half("t", 3, half, &["X", "I", "I"]).unwrap();
        assert_eq!(g.target, "100");
        let g = mirror_from_half("t", 3, vec![], &["Z", "Y", "I"]).unwrap();
        assert_eq!(g.target, "010");
    }

    #[test]
    fn odd_depth_rejected() {
        let mut rng = substream(0, "t", 0);
        assert!(generate_mirror_circuit(&spec(), "x", 2, 3, &mut rng).is_err());
        let mut s = spec();
        s.depths = vec![2, 5];
        assert!(generate_circuits(&s).is_err());
    }

    #[test]
    fn generation_is_reproducible() {
        let a = generate_circuits(&spec()).unwrap();
        let b = generate_circuits(&spec()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 36);
        let mut s = spec();
        s.seed = 12;
        assert_ne!(generate_circuits(&s).unwrap(), a);
    }

    #[test]
    fn layers_respect_connectivity() {
        let mut s = spec();
        s.widths = vec![4];
        s.two_qubit_density = 1.0;
        s.connectivity = Some(vec![(0, 3), (1, 2)]);
        for g in generate_circuits(&s).unwrap() {
            for gate in g.circuit.gates().filter(|g| g.arity() == 2) {
                let (a, b) = (
                    gate.qubits[0].min(gate.qubits[1]),
                    gate.qubits[0].max(gate.qubits[1]),
                );
                assert!((a, b) == (0, 3) || (a, b) == (1, 2));
            }
        }
    }

    #[test]
    fn ideal_oracle_returns_target() {
        let s = spec();
        let rule = BasisRule::by_arity(true);
        let circuits = generate_circuits(&s).unwrap();
        let arities = s.arities();
        let truth = GroundTruth::uniform(
            &rule,
            circuits.iter().map(|g| &g.circuit),
            &arities,
            ErrorRates {
                one_qubit: 0.0,
                two_qubit: 0.0,
                readout: 0.0,
            },
        )
        .unwrap();
        for g in &circuits {
            let dist = oracle_simulate(&g.circuit, &truth, &rule, &arities).unwrap();
            let idx =
                usize::from_str_radix(&g.target.chars().rev().collect::<String>(), 2).unwrap();
            assert!((dist[idx] - 1.0).abs() < 1e-12, "{} {:?}", g.target, dist);
        }
    }

    #[test]
    fn exact_and_sampled_datasets() {
        let s = spec();
        let rule = BasisRule::by_arity(true);
        let circuits = generate_circuits(&s).unwrap();
        let arities = s.arities();
        let truth = GroundTruth::uniform(
            &rule,
            circuits.iter().map(|g| &g.circuit),
            &arities,
            ErrorRates {
                one_qubit: 0.01,
                two_qubit: 0.05,
                readout: 0.02,
            },
        )
        .unwrap();
        let exact = exact_dataset(
            "sim",
            &circuits,
            &truth,
            &rule,
            &arities,
            CapabilityKind::SuccessProbability,
        )
        .unwrap();
        assert!(exact
            .records
            .iter()
            .all(|r| r.estimate < 1.0 && r.estimate > 0.125));
        let a = sample_dataset("sim", &circuits, &truth, &rule, &arities, 100, 5).unwrap();
        let b = sample_dataset("sim", &circuits, &truth, &rule, &arities, 100, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.records.iter().all(|r| r.shots == Some(100)));
    }

    #[test]
    fn single_shot_certain_success() {
        let mut rng = substream(1, "t", 0);
        assert_eq!(sample_successes(1, 1.0, &mut rng).unwrap(), 1);
    }

    #[test]
    fn deep_circuits_approach_floor() {
        let rule = BasisRule::by_arity(false);
        let arities: GateArities = [("X".to_owned(), 1)].into_iter().collect();
        let truth = GroundTruth::new(ErmModel::new(rule, vec![("1q".into(), 0.9, 2)]).unwrap());
        let mut last = 1.0;
        for depth in [1, 10, 50, 200, 1000] {
            let layers = vec![vec![GateApplication::one("X", 0)]; depth];
            let c = Circuit::new("d", vec![0, 1], layers).unwrap();
            let p = analytic_success_probability(&c, &truth, &rule, &arities).unwrap();
            assert!(p < last && p >= 0.25);
            last = p;
        }
        assert!((last - 0.25).abs() < 1e-12);
    }
}
