//! Brute-force density-matrix simulation with explicit depolarizing channels.
//!
//! Each layer applies one `n`-qubit depolarizing channel per counted basis
//! element, then the layer's unitary. A readout element adds one final
//! channel. Qubit `circuit.qubits[k]` is bit `k` of the basis-state index.

use num_complex::Complex64;

use super::GroundTruth;
use crate::basis::BasisRule;
use crate::circuit::{Circuit, GateArities};
use crate::error::{Error, Result};

pub const ORACLE_MAX_WIDTH: usize = 3;

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Row-major unitary of a built-in gate. For two-qubit gates the first listed
/// qubit is the more significant index.
pub fn unitary(name: &str) -> Option<Vec<C>> {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Some(match name {
        "I" => vec![l, o, o, l],
        "X" => vec![o, l, l, o],
        "Y" => vec![o, -i, i, o],
        "Z" => vec![l, o, o, -l],
        "H" => vec![c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)],
        "S" => vec![l, o, o, i],
        "Sdg" => vec![l, o, o, -i],
        "CX" => vec![
            l, o, o, o, //
            o, l, o, o, //
            o, o, o, l, //
            o, o, l, o,
        ],
        "CZ" => vec![
            l, o, o, o, //
            o, l, o, o, //
            o, o, l, o, //
            o, o, o, -l,
        ],
        _ => return None,
    })
}

struct DensityMatrix {
    dim: usize,
    rho: Vec<C>,
}

impl DensityMatrix {
    fn ground(n: usize) -> Self {
        let dim = 1 << n;
        let mut rho = vec![c(0.0, 0.0); dim * dim];
        rho[0] = c(1.0, 0.0);
        Self { dim, rho }
    }

    fn trace(&self) -> C {
        (0..self.dim).map(|k| self.rho[k * self.dim + k]).sum()
    }

    /// `ρ ← γ ρ + (1 - γ) tr(ρ) I / 2^n`.
    fn depolarize(&mut self, gamma: f64) {
        let mix = self.trace() * ((1.0 - gamma) / self.dim as f64);
        for v in &mut self.rho {
            *v *= gamma;
        }
        for k in 0..self.dim {
            self.rho[k * self.dim + k] += mix;
        }
    }

    /// `ρ ← U ρ U†` with `small` acting on bit positions `pos`.
    fn apply(&mut self, small: &[C], pos: &[usize]) {
        let d = self.dim;
        let k = pos.len();
        let sub =
            |idx: usize| -> usize { pos.iter().fold(0, |acc, &p| (acc << 1) | ((idx >> p) & 1)) };
        let mask: usize = pos.iter().map(|&p| 1 << p).sum();
        let mut u = vec![c(0.0, 0.0); d * d];
        for row in 0..d {
            for col in 0..d {
                if row & !mask == col & !mask {
                    u[row * d + col] = small[sub(row) * (1 << k) + sub(col)];
                }
            }
        }
        let mut tmp = vec![c(0.0, 0.0); d * d];
        for r in 0..d {
            for j in 0..d {
                let a = u[r * d + j];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for col in 0..d {
                    tmp[r * d + col] += a * self.rho[j * d + col];
                }
            }
        }
        for r in 0..d {
            for col in 0..d {
                self.rho[r * d + col] =
                    (0..d).map(|j| tmp[r * d + j] * u[col * d + j].conj()).sum();
            }
        }
    }
}

/// Full output distribution over `2^n` bitstrings (index bit `k` is qubit
/// position `k`).
pub fn oracle_simulate(
    circuit: &Circuit,
    truth: &GroundTruth,
    rule: &BasisRule,
    arities: &GateArities,
) -> Result<Vec<f64>> {
    let n = circuit.width();
    if n > ORACLE_MAX_WIDTH {
        return Err(Error::Size(format!(
            "oracle simulates at most {ORACLE_MAX_WIDTH} qubits, circuit `{}` has {n}",
            circuit.id
        )));
    }
    let gamma_of = |label| {
        truth
            .model
            .polarization(&label)
            .ok_or_else(|| Error::MissingElements {
                labels: vec![label.0.clone()],
            })
    };
    let mut state = DensityMatrix::ground(n);
    for layer in &circuit.layers {
        for g in layer {
            state.depolarize(gamma_of(rule.gate_label(g, n, arities)?)?);
        }
        for g in layer {
            let u = unitary(&g.name).ok_or_else(|| Error::Semantics(g.name.clone()))?;
            let pos: Vec<usize> = g
                .qubits
                .iter()
                .map(|&q| circuit.position(q).expect("validated circuit"))
                .collect();
            state.apply(&u, &pos);
        }
    }
    if rule.include_readout {
        state.depolarize(gamma_of(rule.readout_label(n))?);
    }
    Ok((0..state.dim)
        .map(|k| state.rho[k * state.dim + k].re)
        .collect())
}
