//! Width x depth summary with 1/e frontiers, written as CSV and SVG.
//!
//! `cargo run --example volumetric_plot -- out_dir`

use ermkit::analysis::{
    frontier, frontiers_to_csv, render_svg, volumetric_summary, Statistic, ValueMode,
    DEFAULT_THRESHOLD,
};
use ermkit::simgen::{generate_circuits, sample_dataset, ErrorRates, GeneratorSpec, GroundTruth};
use ermkit::BasisRule;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| ".".into());
    let spec = GeneratorSpec {
        widths: vec![1, 2, 4, 6, 8],
        depths: vec![2, 4, 8, 16, 32, 64],
        circuits_per_shape: 5,
        seed: 3,
        ..GeneratorSpec::default()
    };
    let rule = BasisRule::by_arity(true);
    let circuits = generate_circuits(&spec)?;
    let rates = ErrorRates {
        one_qubit: 0.003,
        two_qubit: 0.03,
        readout: 0.02,
    };
    let truth = GroundTruth::uniform(
        &rule,
        circuits.iter().map(|g| &g.circuit),
        &spec.arities(),
        rates,
    )?;
    let data = sample_dataset("demo", &circuits, &truth, &rule, &spec.arities(), 1000, 3)?;

    let grid = volumetric_summary(&data, ValueMode::PolarizationOfSuccess)?;
    let fronts: Vec<_> = Statistic::ALL
        .iter()
        .map(|&s| frontier(&grid, s, DEFAULT_THRESHOLD))
        .collect();
    print!("{}", frontiers_to_csv(&fronts));
    let dir = std::path::Path::new(&out);
    std::fs::write(dir.join("grid.csv"), grid.to_csv())?;
    std::fs::write(dir.join("grid.svg"), render_svg(&grid, &fronts))?;
    println!("wrote grid.csv and grid.svg to {}", dir.display());
    Ok(())
}
