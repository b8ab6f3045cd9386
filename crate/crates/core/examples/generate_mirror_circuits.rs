//! Random mirror circuits and their ideal outputs.

use ermkit::simgen::{generate_circuits, GeneratorSpec};

fn main() -> ermkit::Result<()> {
    let spec = GeneratorSpec {
        widths: vec![2, 4],
        depths: vec![2, 6],
        circuits_per_shape: 2,
        two_qubit_density: 0.5,
        seed: 7,
        ..GeneratorSpec::default()
    };
    for g in generate_circuits(&spec)? {
        let c = &g.circuit;
        println!("{} target={} layers={}", c.id, g.target, c.depth());
        for (t, layer) in c.layers.iter().enumerate() {
            let gates: Vec<String> = layer
                .iter()
                .map(|a| format!("{}{:?}", a.name, a.qubits))
                .collect();
            println!("  {t:>2}: {}", gates.join(" "));
        }
    }
    Ok(())
}
