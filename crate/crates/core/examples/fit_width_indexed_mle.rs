//! One sub-model per width, fit by maximum likelihood to shot counts,
//! with bootstrap error bars.

use ermkit::fit::fit_with_bootstrap;
use ermkit::simgen::{generate_circuits, sample_dataset, ErrorRates, GeneratorSpec, GroundTruth};
use ermkit::{BasisRule, FitConfig, Objective};

fn main() -> ermkit::Result<()> {
    let spec = GeneratorSpec {
        widths: vec![1, 2, 3, 4, 5],
        depths: vec![2, 16, 32, 64, 128],
        circuits_per_shape: 20,
        seed: 5,
        ..GeneratorSpec::default()
    };
    let rule = BasisRule::by_arity(true).width_indexed();
    let circuits = generate_circuits(&spec)?;
    let rates = ErrorRates {
        one_qubit: 0.001,
        two_qubit: 0.01,
        readout: 0.02,
    };
    let truth = GroundTruth::uniform(
        &rule,
        circuits.iter().map(|g| &g.circuit),
        &spec.arities(),
        rates,
    )?;
    let data = sample_dataset("demo", &circuits, &truth, &rule, &spec.arities(), 1024, 5)?;

    let cfg = FitConfig::default()
        .with_objective(Objective::Mle)
        .with_seed(5);
    let result = fit_with_bootstrap(&data, &rule, &cfg, 50)?;
    let stderr = result.stderr.clone().unwrap_or_default();
    let exact = truth.model.error_rates();
    println!(
        "{:<12} {:>9} {:>9} {:>9}",
        "element", "truth", "fit", "1 sigma"
    );
    for (label, eps) in &result.error_rates {
        println!(
            "{:<12} {:>9.5} {:>9.5} {:>9.5}",
            label.as_str(),
            exact[label],
            eps,
            stderr.get(label).copied().unwrap_or(f64::NAN)
        );
    }
    for w in result.warnings() {
        println!("warning: {w}");
    }
    Ok(())
}
