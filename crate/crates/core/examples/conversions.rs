//! Fidelity, polarization and success-probability conversions.

use ermkit::basis::CountVector;
use ermkit::model::{polarization_to_success, success_to_polarization};
use ermkit::{fidelity_from_polarization, polarization_from_fidelity, BasisRule, ErmModel};

fn main() -> ermkit::Result<()> {
    for n in [1, 2, 5] {
        let g = polarization_from_fidelity(0.99, n)?;
        println!(
            "n={n}: F=0.99 -> gamma={g:.6} -> F={:.6}",
            fidelity_from_polarization(g, n)?
        );
    }
    let s = polarization_to_success(0.8, 3);
    println!(
        "gamma=0.8 on 3 qubits -> s={s:.4} -> gamma={:.4}",
        success_to_polarization(s, 3)
    );

    let m = ErmModel::from_error_rates(
        BasisRule::by_arity(true),
        vec![
            ("1q".into(), 0.001, 4),
            ("2q".into(), 0.01, 4),
            ("readout".into(), 0.02, 4),
        ],
    )?;
    let counts = CountVector::from([("1q", 40), ("2q", 6), ("readout", 1)]);
    println!("E(c) = {:.5}", m.predict_polarization(&counts)?.value);
    println!(
        "s(c) = {:.5}",
        m.predict_success_probability(&counts, 4)?.value
    );
    Ok(())
}
