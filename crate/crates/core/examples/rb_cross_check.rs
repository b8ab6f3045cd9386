//! Mean layer error from a fitted model against an exponential decay fit.

use ermkit::analysis::{erm_mean_layer_error, rb_exponential_fit};
use ermkit::simgen::{generate_circuits, sample_dataset, ErrorRates, GeneratorSpec, GroundTruth};
use ermkit::{fit, BasisRule, FitConfig, Objective};

fn main() -> ermkit::Result<()> {
    let spec = GeneratorSpec {
        widths: vec![1, 2, 3, 4],
        depths: vec![2, 16, 32, 64, 128],
        circuits_per_shape: 20,
        seed: 9,
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
    let data = sample_dataset("demo", &circuits, &truth, &rule, &spec.arities(), 1024, 9)?;
    let model = fit(
        &data,
        &rule,
        &FitConfig::default().with_objective(Objective::Mle),
    )?
    .model;

    println!("width  erm_eps   rb_eps    rb_p");
    for w in data.widths() {
        let rb = rb_exponential_fit(&data, w)?;
        println!(
            "{w:>5}  {:.5}  {:.5}  {:.5}",
            erm_mean_layer_error(&model, &data, w)?,
            rb.epsilon,
            rb.p
        );
    }
    Ok(())
}
