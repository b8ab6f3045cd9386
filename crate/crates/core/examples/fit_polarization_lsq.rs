//! Least-squares fit of a two-element model to exact polarizations,
//! scored on a holdout set.

use ermkit::analysis::prediction_errors;
use ermkit::fit::train_test_split;
use ermkit::simgen::{exact_dataset, generate_circuits, ErrorRates, GeneratorSpec, GroundTruth};
use ermkit::{fit, BasisRule, CapabilityKind, FitConfig};

fn main() -> ermkit::Result<()> {
    let spec = GeneratorSpec {
        widths: vec![4],
        depths: vec![2, 4, 8, 16, 32],
        circuits_per_shape: 30,
        two_qubit_density: 0.5,
        seed: 1,
        ..GeneratorSpec::default()
    };
    let rule = BasisRule::by_arity(false);
    let circuits = generate_circuits(&spec)?;
    let truth = GroundTruth::uniform(
        &rule,
        circuits.iter().map(|g| &g.circuit),
        &spec.arities(),
        ErrorRates {
            one_qubit: 0.005,
            two_qubit: 0.02,
            readout: 0.0,
        },
    )?;
    let data = exact_dataset(
        "demo",
        &circuits,
        &truth,
        &rule,
        &spec.arities(),
        CapabilityKind::ProcessPolarization,
    )?;
    let (train, test) = train_test_split(&data, 0.8, 1)?;

    let result = fit(&train, &rule, &FitConfig::default())?;
    for (label, eps) in &result.error_rates {
        println!("{label:>4}: eps = {eps:.6}");
    }
    let report = prediction_errors(&result.model, &test)?;
    println!(
        "holdout n={} delta_abs={:.2e}",
        report.n_test(),
        report.delta_abs.unwrap_or(0.0)
    );
    Ok(())
}
