//! Compares the product formula against explicit density-matrix simulation.

use ermkit::simgen::{
    analytic_success_probability, generate_circuits, oracle_simulate, ErrorRates, GeneratorSpec,
    GroundTruth,
};
use ermkit::BasisRule;

fn main() -> ermkit::Result<()> {
    let spec = GeneratorSpec {
        widths: vec![1, 2, 3],
        depths: vec![2, 4, 8],
        circuits_per_shape: 2,
        two_qubit_density: 0.6,
        ..GeneratorSpec::default()
    };
    let rule = BasisRule::by_arity(true);
    let circuits = generate_circuits(&spec)?;
    let arities = spec.arities();
    let rates = ErrorRates {
        one_qubit: 0.02,
        two_qubit: 0.08,
        readout: 0.05,
    };
    let truth = GroundTruth::uniform(&rule, circuits.iter().map(|g| &g.circuit), &arities, rates)?;
    for g in &circuits {
        let probs = oracle_simulate(&g.circuit, &truth, &rule, &arities)?;
        let k: usize = g
            .target
            .chars()
            .enumerate()
            .filter(|(_, b)| *b == '1')
            .map(|(i, _)| 1 << i)
            .sum();
        let s = analytic_success_probability(&g.circuit, &truth, &rule, &arities)?;
        println!(
            "{:<10} target {}  oracle {:.12}  formula {:.12}",
            g.circuit.id, g.target, probs[k], s
        );
    }
    Ok(())
}
