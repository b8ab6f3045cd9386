use std::collections::BTreeMap;

use serde::Serialize;

use crate::circuit::{CapabilityKind, Dataset};
use crate::error::{Error, Result};
use crate::model::fidelity_from_polarization;
use crate::optim::golden_section;

/// Result of fitting `s(d) = A p^d + 2^-w` to mean success probability
/// against depth at one width.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RbFit {
    pub width: usize,
    /// Per-layer polarization.
    pub p: f64,
    pub amplitude: f64,
    /// Fixed asymptote `2^-w`.
    pub asymptote: f64,
    /// Mean layer error rate `1 - F(p)` at this width.
    pub epsilon: f64,
    pub depths: Vec<usize>,
    pub mean_success: Vec<f64>,
    pub residual: f64,
}

impl RbFit {
    pub fn predict(&self, depth: f64) -> f64 {
        self.amplitude * self.p.powf(depth) + self.asymptote
    }
}

/// Optimal amplitude and residual for a fixed decay `p`.
fn profile(p: f64, xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let (mut num, mut den) = (0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let b = p.powf(x);
        num += y * b;
        den += b * b;
    }
    let a = if den > 0.0 { num / den } else { 0.0 };
    let r = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (y - a * p.powf(x)).powi(2))
        .sum();
    (a, r)
}

/// Fits mean success probability against depth (benchmark depth when the
/// records carry one) at one width.
pub fn rb_exponential_fit(d: &Dataset, width: usize) -> Result<RbFit> {
    if d.capability_kind != CapabilityKind::SuccessProbability {
        return Err(Error::Precondition(
            "exponential decay fit needs success-probability data".into(),
        ));
    }
    let mut by_depth: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for r in d.records.iter().filter(|r| r.width() == width) {
        let e = by_depth.entry(r.plot_depth()).or_insert((0.0, 0));
        e.0 += r.estimate;
        e.1 += 1;
    }
    if by_depth.len() < 3 {
        return Err(Error::Precondition(format!(
            "width {width} has {} distinct depth(s); at least 3 are needed",
            by_depth.len()
        )));
    }
    let asymptote = 0.5f64.powi(width as i32);
    let depths: Vec<usize> = by_depth.keys().copied().collect();
    let mean_success: Vec<f64> = by_depth.values().map(|&(s, n)| s / n as f64).collect();
    let xs: Vec<f64> = depths.iter().map(|&d| d as f64).collect();
    let ys: Vec<f64> = mean_success.iter().map(|s| s - asymptote).collect();

    // Coarse scan over p = exp(-s) with log-spaced s, then golden refinement.
    const GRID: usize = 4000;
    let s_of = |k: usize| 10f64.powf(-9.0 + 10.5 * k as f64 / (GRID - 1) as f64);
    let mut best_k = 0;
    let mut best_r = f64::INFINITY;
    for k in 0..GRID {
        let (_, r) = profile((-s_of(k)).exp(), &xs, &ys);
        if r < best_r {
            best_r = r;
            best_k = k;
        }
    }
    let lo = s_of(best_k.saturating_sub(1));
    let hi = s_of((best_k + 1).min(GRID - 1));
    let s = golden_section(
        |s| profile((-s).exp(), &xs, &ys).1,
        lo,
        hi,
        1e-15 * hi.max(1e-12),
    );
    let mut p = (-s).exp();
    let (mut amplitude, mut residual) = profile(p, &xs, &ys);
    let (a1, r1) = profile(1.0, &xs, &ys);
    if r1 <= residual {
        p = 1.0;
        amplitude = a1;
        residual = r1;
    }
    let epsilon = 1.0 - fidelity_from_polarization(p, width)?;
    Ok(RbFit {
        width,
        p,
        amplitude,
        asymptote,
        epsilon,
        depths,
        mean_success,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, CircuitRecord, GateArities};

    fn decay_data(width: usize, p0: f64, amp: f64, depths: &[usize]) -> Dataset {
        let floor = 0.5f64.powi(width as i32);
        let recs = depths
            .iter()
            .map(|&d| {
                let c = Circuit::new(format!("d{d}"), (0..width).collect(), vec![]).unwrap();
                CircuitRecord::new(c, amp * p0.powi(d as i32) + floor).with_benchmark_depth(d)
            })
            .collect();
        Dataset::new(
            "rb",
            CapabilityKind::SuccessProbability,
            GateArities::new(),
            recs,
        )
        .unwrap()
    }

    #[test]
    fn recovers_noiseless_decay() {
        let d = decay_data(2, 0.97, 0.7, &[0, 4, 8, 16, 32, 64]);
        let f = rb_exponential_fit(&d, 2).unwrap();
        assert!((f.p - 0.97).abs() < 1e-9, "{}", f.p);
        assert!((f.amplitude - 0.7).abs() < 1e-7);
        assert!((f.predict(1e6) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn perfect_data_gives_unit_decay() {
        let d = decay_data(3, 1.0, 0.875, &[2, 4, 8]);
        let f = rb_exponential_fit(&d, 3).unwrap();
        assert_eq!(f.p, 1.0);
        assert_eq!(f.epsilon, 0.0);
    }

    #[test]
    fn too_few_depths() {
        let d = decay_data(1, 0.9, 0.5, &[2, 4]);
        assert!(matches!(
            rb_exponential_fit(&d, 1),
            Err(Error::Precondition(_))
        ));
        assert!(rb_exponential_fit(&d, 5).is_err());
    }
}
