//! Dormand-Prince 5(4) integrator with continuous (dense) output.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Step-size control.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on accepted plus rejected steps.
    pub max_steps: usize,
    /// Largest allowed step; `f64::INFINITY` for none.
    pub max_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 2_000_000,
            max_step: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone)]
struct DenseStep<const N: usize> {
    t: f64,
    h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t) / self.h;
        let theta1 = 1.0 - theta;
        let r = &self.rcont;
        core::array::from_fn(|i| {
            r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])))
        })
    }

    fn derivative(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t) / self.h;
        let theta1 = 1.0 - theta;
        let r = &self.rcont;
        core::array::from_fn(|i| {
            let s = r[3][i] + theta1 * r[4][i];
            let ds = -r[4][i];
            let rr = r[2][i] + theta * s;
            let drr = s + theta * ds;
            let p = r[1][i] + theta1 * rr;
            let dp = -rr + theta1 * drr;
            (p + theta * dp) / self.h
        })
    }
}

/// Piecewise-polynomial solution covering `[t0, t_end]`.
#[derive(Debug, Clone)]
pub struct DenseSolution<const N: usize> {
    t0: f64,
    y0: [f64; N],
    steps: Vec<DenseStep<N>>,
    rejected: usize,
}

impl<const N: usize> DenseSolution<N> {
    pub fn t_start(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.steps.last().map_or(self.t0, |s| s.t + s.h)
    }

    pub fn accepted_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    /// Step boundaries, starting with `t0`.
    pub fn mesh(&self) -> impl Iterator<Item = f64> + '_ {
        core::iter::once(self.t0).chain(self.steps.iter().map(|s| s.t + s.h))
    }

    fn locate(&self, t: f64) -> Option<&DenseStep<N>> {
        if self.steps.is_empty() {
            return None;
        }
        let idx = self.steps.partition_point(|s| s.t + s.h < t);
        Some(&self.steps[idx.min(self.steps.len() - 1)])
    }

    /// State at `t`, clamped to the covered interval.
    pub fn eval(&self, t: f64) -> [f64; N] {
        match self.locate(t) {
            None => self.y0,
            Some(step) => step.eval(t.clamp(self.t0, self.t_end())),
        }
    }

    /// Time derivative of the interpolant at `t`.
    pub fn derivative(&self, t: f64) -> [f64; N] {
        match self.locate(t) {
            None => [0.0; N],
            Some(step) => step.derivative(t.clamp(self.t0, self.t_end())),
        }
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    core::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

struct Stages<const N: usize> {
    y_new: [f64; N],
    k: [[f64; N]; 7],
    err: [f64; N],
}

fn stages<const N: usize, F>(f: &F, t: f64, y: &[f64; N], k1: [f64; N], h: f64) -> Stages<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, &k1)]));
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(
        t + C5 * h,
        &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        t + h,
        &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y_new = axpy(y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(t + h, &y_new);
    let err =
        core::array::from_fn(|i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]));
    Stages {
        y_new,
        k: [k1, k2, k3, k4, k5, k6, k7],
        err,
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` adaptively.
///
/// `guard` runs after every accepted step and may abort the integration.
pub fn solve<const N: usize, F, G>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: SolverOptions,
    mut guard: G,
) -> Result<DenseSolution<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: FnMut(f64, &[f64; N]) -> Result<()>,
{
    let mut sol = DenseSolution {
        t0,
        y0,
        steps: Vec::new(),
        rejected: 0,
    };
    let span = t_end - t0;
    if span <= 0.0 {
        return Ok(sol);
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);

    let scale = |y: &[f64; N], i: usize| opts.abs_tol + opts.rel_tol * y[i].abs();
    let norm_y = (0..N).map(|i| (y[i] / scale(&y, i)).powi(2)).sum::<f64>().sqrt();
    let norm_f = (0..N).map(|i| (k1[i] / scale(&y, i)).powi(2)).sum::<f64>().sqrt();
    let mut h = if norm_f > 1e-10 {
        0.01 * (norm_y / norm_f).max(1e-6)
    } else {
        1e-6
    };
    h = h.min(span).min(opts.max_step).max(span * 1e-12);

    let mut total = 0usize;
    while t < t_end {
        total += 1;
        if total > opts.max_steps {
            return Err(Error::NoConvergence {
                what: "ODE integrator",
                iterations: opts.max_steps,
            });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1e-300) {
            return Err(Error::StepUnderflow { t, h });
        }

        let st = stages(&f, t, &y, k1, h);
        let err = ((0..N)
            .map(|i| {
                let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(st.y_new[i].abs());
                (st.err[i] / sc).powi(2)
            })
            .sum::<f64>()
            / N as f64)
            .sqrt();

        if !err.is_finite() {
            sol.rejected += 1;
            h *= 0.1;
            continue;
        }
        if err <= 1.0 {
            let k = &st.k;
            let rcont: [[f64; N]; 5] = {
                let r1 = y;
                let r2: [f64; N] = core::array::from_fn(|i| st.y_new[i] - y[i]);
                let r3: [f64; N] = core::array::from_fn(|i| h * k[0][i] - r2[i]);
                let r4: [f64; N] = core::array::from_fn(|i| r2[i] - h * k[6][i] - r3[i]);
                let r5: [f64; N] = core::array::from_fn(|i| {
                    h * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i])
                });
                [r1, r2, r3, r4, r5]
            };
            sol.steps.push(DenseStep { t, h, rcont });
            t = if last { t_end } else { t + h };
            y = st.y_new;
            k1 = st.k[6];
            guard(t, &y)?;
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).min(opts.max_step);
        } else {
            sol.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok(sol)
}

/// Fifth-order Dormand-Prince solution with `n_steps` equal steps and no
/// error control. Used for convergence-order checks.
pub fn solve_fixed<const N: usize, F>(f: F, t0: f64, y0: [f64; N], t_end: f64, n_steps: usize) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let h = (t_end - t0) / n_steps as f64;
    let mut y = y0;
    for i in 0..n_steps {
        let t = t0 + h * i as f64;
        let k1 = f(t, &y);
        y = stages(&f, t, &y, k1, h).y_new;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sho(_t: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let sol = solve(sho, 0.0, [1.0, 0.0], 10.0, SolverOptions::default(), |_, _| Ok(())).unwrap();
        for i in 0..=200 {
            let t = 0.05 * i as f64;
            let y = sol.eval(t);
            assert!((y[0] - t.cos()).abs() < 1e-8, "t={t}");
            assert!((y[1] + t.sin()).abs() < 1e-8);
            let d = sol.derivative(t);
            assert!((d[0] + t.sin()).abs() < 1e-6);
        }
        assert_eq!(sol.t_end(), 10.0);
    }

    #[test]
    fn zero_span_returns_initial_state() {
        let sol = solve(sho, 0.0, [1.0, 0.0], 0.0, SolverOptions::default(), |_, _| Ok(())).unwrap();
        assert_eq!(sol.accepted_steps(), 0);
        assert_eq!(sol.eval(0.0), [1.0, 0.0]);
    }

    #[test]
    fn guard_aborts() {
        let r = solve(sho, 0.0, [1.0, 0.0], 10.0, SolverOptions::default(), |t, _| {
            if t > 1.0 {
                Err(Error::Singularity { tau: t, xi: 0.0 })
            } else {
                Ok(())
            }
        });
        assert!(matches!(r, Err(Error::Singularity { .. })));
    }

    #[test]
    fn fixed_step_is_fifth_order() {
        let err = |n| {
            let y = solve_fixed(sho, 0.0, [1.0, 0.0], 2.0, n);
            (y[0] - 2f64.cos()).hypot(y[1] + 2f64.sin())
        };
        let (e1, e2) = (err(16), err(32));
        let order = (e1 / e2).log2();
        assert!(order > 4.7, "observed order {order}");
    }
}
