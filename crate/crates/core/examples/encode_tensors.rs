//! Circuit tensors, the three-channel reshape, and the binary tensor file.

use ermkit::encoding::{
    decode, encode_batch, placement, read_tensor_file, reshape_to_three_channels,
    write_tensor_file, ClassMap, CHANNEL_LEGEND,
};
use ermkit::simgen::{generate_circuits, GeneratorSpec};

fn main() -> ermkit::Result<()> {
    let spec = GeneratorSpec {
        widths: vec![2, 3],
        depths: vec![2, 4],
        circuits_per_shape: 3,
        two_qubit_density: 0.7,
        ..GeneratorSpec::default()
    };
    let circuits: Vec<_> = generate_circuits(&spec)?
        .into_iter()
        .map(|g| g.circuit)
        .collect();
    let map = ClassMap::for_circuits(&circuits)?;
    let (n, d_max) = (3, 5);
    let tensors = encode_batch(&circuits, n, d_max, &map)?;

    for (k, name) in CHANNEL_LEGEND.iter().enumerate() {
        println!("channel {k}: {name}");
    }
    let c = &circuits[0];
    assert_eq!(
        decode(&tensors[0], c.width(), c.depth())?,
        placement(c, &map)?
    );
    let r = reshape_to_three_channels(&tensors[0], None)?;
    println!("{:?} -> {:?}", tensors[0].shape, r.shape);

    let path = std::env::temp_dir().join("ermkit-example-tensors.bin");
    write_tensor_file(&path, [n, d_max, 10], &tensors)?;
    let (shape, back) = read_tensor_file(&path, Some([n, d_max, 10]))?;
    println!(
        "{} tensors of shape {shape:?} read back equal: {}",
        back.len(),
        back == tensors
    );
    Ok(())
}
