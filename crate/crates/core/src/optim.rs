//! Box-constrained BFGS with a projected backtracking line search.

pub(crate) trait Smooth {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    /// Writes the gradient into `grad` and returns the value.
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Settings {
    pub max_iterations: usize,
    /// Converged once `|projected gradient|_inf <= gtol * (1 + |f|)`.
    pub gtol: f64,
    /// Converged once a full quasi-Newton step moves less than `xtol * (1 + |x|_inf)`.
    pub xtol: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const ARMIJO: f64 = 1e-4;
const MAX_STEP: f64 = 10.0;
const MAX_HALVINGS: usize = 60;
/// A failed line search still counts as convergence below this gradient level.
const FLOOR_GTOL: f64 = 1e-6;
/// Accepted steps that lower `f` by no more than rounding noise.
const STALL: f64 = 1e-14;
const MAX_STALLS: usize = 5;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn projected_norm(g: &[f64], active: &[bool]) -> f64 {
    g.iter()
        .zip(active)
        .fold(0.0, |m, (&gi, &a)| if a { m } else { m.max(gi.abs()) })
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

fn active_set(x: &[f64], g: &[f64], s: &Settings) -> Vec<bool> {
    x.iter()
        .zip(g)
        .map(|(&xi, &gi)| (xi <= s.lower && gi > 0.0) || (xi >= s.upper && gi < 0.0))
        .collect()
}

pub(crate) fn minimize<F: Smooth + ?Sized>(f: &F, x0: &[f64], s: &Settings) -> Outcome {
    let n = f.dim();
    let clip = |v: f64| v.clamp(s.lower, s.upper);
    let mut x: Vec<f64> = x0.iter().map(|&v| clip(v)).collect();
    let mut g = vec![0.0; n];
    let mut fx = f.value_grad(&x, &mut g);
    let mut h = identity(n);
    let mut fresh = true;
    let mut active = active_set(&x, &g, s);

    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut stalls = 0;

    for it in 0..s.max_iterations {
        let pg: Vec<f64> = g
            .iter()
            .zip(&active)
            .map(|(&gi, &a)| if a { 0.0 } else { gi })
            .collect();
        let pg_norm = inf_norm(&pg);
        if pg_norm <= s.gtol * (1.0 + fx.abs()) {
            return Outcome {
                x,
                value: fx,
                iterations: it,
                converged: true,
            };
        }

        for i in 0..n {
            d[i] = if active[i] {
                0.0
            } else {
                -(0..n).map(|j| h[i * n + j] * pg[j]).sum::<f64>()
            };
        }
        if dot(&d, &pg) >= 0.0 {
            h = identity(n);
            fresh = true;
            for i in 0..n {
                d[i] = -pg[i];
            }
        }
        let dn = inf_norm(&d);
        if dn > MAX_STEP {
            d.iter_mut().for_each(|v| *v *= MAX_STEP / dn);
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            for i in 0..n {
                xn[i] = clip(x[i] + alpha * d[i]);
            }
            let step: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let fnew = f.value(&xn);
            if fnew.is_finite() && fnew <= fx + ARMIJO * dot(&pg, &step) {
                accepted = Some(fnew);
                break;
            }
            alpha *= 0.5;
        }

        let Some(_) = accepted else {
            if !fresh {
                h = identity(n);
                fresh = true;
                continue;
            }
            return Outcome {
                x,
                value: fx,
                iterations: it,
                converged: pg_norm <= FLOOR_GTOL * (1.0 + fx.abs()),
            };
        };

        let fnew = f.value_grad(&xn, &mut gn);
        let sv: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let new_active = active_set(&xn, &gn, s);

        if new_active != active {
            h = identity(n);
            fresh = true;
        } else {
            let sy = dot(&sv, &yv);
            let yy = dot(&yv, &yv);
            if sy > 1e-12 * dot(&sv, &sv).sqrt() * yy.sqrt() && sy > 0.0 {
                if fresh {
                    let scale = sy / yy;
                    h.iter_mut().for_each(|v| *v *= scale);
                    fresh = false;
                }
                bfgs_update(&mut h, &sv, &yv, n);
            }
        }

        let small_step = inf_norm(&sv) <= s.xtol * (1.0 + inf_norm(&xn));
        let stalled = fx - fnew <= STALL * (1.0 + fx.abs());
        x.copy_from_slice(&xn);
        g.copy_from_slice(&gn);
        fx = fnew;
        active = new_active;
        if small_step && alpha == 1.0 {
            return Outcome {
                x,
                value: fx,
                iterations: it + 1,
                converged: true,
            };
        }
        if stalled {
            stalls += 1;
            if stalls >= MAX_STALLS {
                let pg_norm = projected_norm(&g, &active);
                return Outcome {
                    x,
                    value: fx,
                    iterations: it + 1,
                    converged: pg_norm <= FLOOR_GTOL * (1.0 + fx.abs()),
                };
            }
        } else {
            stalls = 0;
        }
    }

    let pg_norm = projected_norm(&g, &active);
    Outcome {
        converged: pg_norm <= s.gtol * (1.0 + fx.abs()),
        x,
        value: fx,
        iterations: s.max_iterations,
    }
}

/// Inverse-Hessian update `H <- (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], n: usize) {
    let rho = 1.0 / dot(s, y);
    let hy: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum())
        .collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] +=
                -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Golden-section minimization of a scalar function on `[lo, hi]`.
pub(crate) fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}
