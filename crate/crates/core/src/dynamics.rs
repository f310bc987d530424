//! Wave-packet dispersion under friction in dimensionless form.
//!
//! With `xi^2 = 2 b sigma^2 / hbar` and `tau = b t / m` the root-mean-square
//! displacement obeys
//!
//! ```text
//! xi'' + xi' + alpha^2 xi = xi^-3,    xi(0) = xi0,  xi'(0) = 0
//! ```
//!
//! where `alpha = m omega0 / b` switches on a harmonic trap. `alpha = 0` is
//! the dissipative Ermakov equation, `alpha > 0` the damped Pinney equation.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::ode::{self, DenseSolution, SolverOptions};
use crate::system::PhysicalSystem;

/// Smallest `xi` tolerated before the integration is declared singular.
pub const XI_FLOOR: f64 = 1e-8;

pub const DEFAULT_TAU_END_ERMAKOV: f64 = 100.0;
pub const DEFAULT_TAU_END_PINNEY: f64 = 30.0;
pub const DEFAULT_INTERVALS: usize = 2000;

/// Placement of output samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    /// `n` equal intervals, so `n + 1` samples including both ends.
    Uniform(usize),
    /// `tau = 0`, then `n + 1` log-spaced samples from `tau_min` to `tau_end`.
    Log { intervals: usize, tau_min: f64 },
}

impl Sampling {
    fn grid(self, tau_end: f64) -> Vec<f64> {
        if tau_end == 0.0 {
            return alloc::vec![0.0];
        }
        match self {
            Sampling::Uniform(n) => (0..=n).map(|i| tau_end * i as f64 / n as f64).collect(),
            Sampling::Log { intervals, tau_min } => {
                let (a, b) = (tau_min.ln(), tau_end.ln());
                let mut g = alloc::vec![0.0];
                g.extend((0..=intervals).map(|i| {
                    if i == intervals {
                        tau_end
                    } else {
                        (a + (b - a) * i as f64 / intervals as f64).exp()
                    }
                }));
                g
            }
        }
    }
}

/// Inputs of a dimensionless dispersion run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessParams {
    /// Initial dispersion `xi0^2`.
    pub xi0_sq: f64,
    /// Trap strength; zero for a free particle.
    pub alpha: f64,
    pub tau_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub sampling: Sampling,
    /// Initial `d xi / d tau`. Zero unless deliberately overridden.
    pub initial_rate: f64,
}

impl DimensionlessParams {
    /// Free particle with the default horizon.
    pub fn ermakov(xi0_sq: f64) -> Self {
        DimensionlessParams {
            xi0_sq,
            alpha: 0.0,
            tau_end: DEFAULT_TAU_END_ERMAKOV,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            sampling: Sampling::Uniform(DEFAULT_INTERVALS),
            initial_rate: 0.0,
        }
    }

    /// Harmonic trap with the default horizon.
    pub fn pinney(xi0_sq: f64, alpha: f64) -> Self {
        DimensionlessParams {
            alpha,
            tau_end: DEFAULT_TAU_END_PINNEY,
            ..Self::ermakov(xi0_sq)
        }
    }

    pub fn with_tau_end(self, tau_end: f64) -> Self {
        DimensionlessParams { tau_end, ..self }
    }

    pub fn with_sampling(self, sampling: Sampling) -> Self {
        DimensionlessParams { sampling, ..self }
    }

    pub fn with_tolerances(self, rel_tol: f64, abs_tol: f64) -> Self {
        DimensionlessParams {
            rel_tol,
            abs_tol,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what, value| Err(Error::Domain { what, value });
        if !(self.xi0_sq.is_finite() && self.xi0_sq > 0.0) {
            return bad("xi0^2", self.xi0_sq);
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad("alpha", self.alpha);
        }
        if !(self.tau_end.is_finite() && self.tau_end >= 0.0) {
            return bad("tau_end", self.tau_end);
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerance", self.rel_tol.min(self.abs_tol));
        }
        if !self.initial_rate.is_finite() {
            return bad("initial rate", self.initial_rate);
        }
        match self.sampling {
            Sampling::Uniform(0) => bad("sample intervals", 0.0),
            Sampling::Log { intervals, tau_min } if intervals == 0 || !(tau_min > 0.0 && tau_min < self.tau_end) => {
                bad("log sampling tau_min", tau_min)
            }
            _ => Ok(()),
        }
    }
}

/// One output point of a dispersion trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub tau: f64,
    pub xi: f64,
    pub dxi_dtau: f64,
}

impl Sample {
    pub fn xi_sq(&self) -> f64 {
        self.xi * self.xi
    }

    /// `d xi^2 / d tau = 2 xi xi'`.
    pub fn rate(&self) -> f64 {
        2.0 * self.xi * self.dxi_dtau
    }
}

/// Sampled solution of the dispersion equation plus its dense interpolant.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub alpha: f64,
    dense: DenseSolution<2>,
}

impl Trajectory {
    pub fn tau_end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.tau)
    }

    /// State from the dense interpolant at any `tau` inside the horizon.
    pub fn at(&self, tau: f64) -> Sample {
        let [xi, dxi_dtau] = self.dense.eval(tau);
        Sample { tau, xi, dxi_dtau }
    }

    /// Residual `xi'' + xi' + alpha^2 xi - xi^-3` of the interpolant at `tau`.
    pub fn residual(&self, tau: f64) -> f64 {
        let [xi, v] = self.dense.eval(tau);
        let acc = self.dense.derivative(tau)[1];
        acc + v + self.alpha * self.alpha * xi - xi.powi(-3)
    }

    /// Lyapunov function `xi'^2/2 + alpha^2 xi^2/2 + xi^-2/2`, non-increasing in `tau`.
    pub fn lyapunov(&self, tau: f64) -> f64 {
        let [xi, v] = self.dense.eval(tau);
        0.5 * (v * v + self.alpha * self.alpha * xi * xi + 1.0 / (xi * xi))
    }

    /// Step boundaries of the underlying integration.
    pub fn mesh(&self) -> impl Iterator<Item = f64> + '_ {
        self.dense.mesh()
    }
}

/// Integrates the dispersion equation for `params`.
pub fn integrate_dispersion(params: &DimensionlessParams) -> Result<Trajectory> {
    params.validate()?;
    let a2 = params.alpha * params.alpha;
    let rhs = move |_tau: f64, y: &[f64; 2]| {
        let xi = y[0];
        [y[1], 1.0 / (xi * xi * xi) - y[1] - a2 * xi]
    };
    let opts = SolverOptions {
        rel_tol: params.rel_tol,
        abs_tol: params.abs_tol,
        ..SolverOptions::default()
    };
    let y0 = [params.xi0_sq.sqrt(), params.initial_rate];
    let dense = ode::solve(rhs, 0.0, y0, params.tau_end, opts, |tau, y| {
        if y[0] < XI_FLOOR || !y[0].is_finite() {
            Err(Error::Singularity { tau, xi: y[0] })
        } else {
            Ok(())
        }
    })?;
    let samples = params
        .sampling
        .grid(params.tau_end)
        .into_iter()
        .map(|tau| {
            if tau == 0.0 {
                Sample {
                    tau,
                    xi: y0[0],
                    dxi_dtau: y0[1],
                }
            } else {
                let [xi, dxi_dtau] = dense.eval(tau);
                Sample { tau, xi, dxi_dtau }
            }
        })
        .collect();
    Ok(Trajectory {
        samples,
        alpha: params.alpha,
        dense,
    })
}

/// Short-time (ballistic, vacuum) law `xi^2 = xi0^2 + tau^2 / xi0^2`.
pub fn short_time_xi_sq(xi0_sq: f64, tau: f64) -> f64 {
    xi0_sq + tau * tau / xi0_sq
}

/// Long-time (overdamped) law `xi^4 = xi0^4 + 4 tau`.
pub fn long_time_xi_sq(xi0_sq: f64, tau: f64) -> f64 {
    (xi0_sq * xi0_sq + 4.0 * tau).sqrt()
}

impl PhysicalSystem {
    /// Dimensionless parameters for a run up to physical time `t_end`.
    pub fn to_dimensionless(&self, t_end: f64) -> DimensionlessParams {
        let base = if self.omega0 > 0.0 {
            DimensionlessParams::pinney(self.xi_sq_of(self.sigma0_sq), self.alpha())
        } else {
            DimensionlessParams::ermakov(self.xi_sq_of(self.sigma0_sq))
        };
        base.with_tau_end(self.tau_of(t_end))
    }
}

/// Maps a dimensionless trajectory back to `(t [s], sigma^2 [m^2])` pairs.
pub fn to_physical(traj: &Trajectory, sys: &PhysicalSystem) -> Vec<(f64, f64)> {
    traj.samples
        .iter()
        .map(|s| (sys.time_of(s.tau), sys.sigma_sq_of(s.xi_sq())))
        .collect()
}

/// Free spreading in vacuum, `sigma^2 = sigma0^2 + (hbar t / 2 m sigma0)^2`.
pub fn vacuum_sigma_sq(sys: &PhysicalSystem, t: f64) -> f64 {
    let spread = sys.hbar * t / (2.0 * sys.mass * sys.sigma0_sq.sqrt());
    sys.sigma0_sq + spread * spread
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{HBAR, M_ELECTRON};

    #[test]
    fn closed_forms() {
        assert_eq!(short_time_xi_sq(0.1, 0.0), 0.1);
        assert_eq!(short_time_xi_sq(1.0, 1.0), 2.0);
        assert!((long_time_xi_sq(0.1, 0.0) - 0.1).abs() < 1e-15);
        assert!((long_time_xi_sq(0.1, 100.0) - 400.01f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pinney_equilibrium_is_stationary() {
        let traj = integrate_dispersion(&DimensionlessParams::pinney(1.0, 1.0)).unwrap();
        for s in &traj.samples {
            assert!((s.xi_sq() - 1.0).abs() < 1e-12, "tau={} xi^2={}", s.tau, s.xi_sq());
        }
    }

    #[test]
    fn initial_conditions() {
        let traj = integrate_dispersion(&DimensionlessParams::ermakov(0.1)).unwrap();
        let first = traj.samples[0];
        assert_eq!(first.tau, 0.0);
        assert_eq!(first.dxi_dtau, 0.0);
        assert!((first.xi_sq() - 0.1).abs() < 1e-15);
        assert_eq!(traj.samples.len(), DEFAULT_INTERVALS + 1);
        assert!(traj.samples.windows(2).all(|w| w[1].tau > w[0].tau));
    }

    #[test]
    fn zero_horizon_gives_single_sample() {
        let traj = integrate_dispersion(&DimensionlessParams::ermakov(1.0).with_tau_end(0.0)).unwrap();
        assert_eq!(traj.samples.len(), 1);
    }

    #[test]
    fn invalid_params_rejected() {
        for p in [
            DimensionlessParams::ermakov(0.0),
            DimensionlessParams::ermakov(-1.0),
            DimensionlessParams::pinney(1.0, -1.0),
            DimensionlessParams::ermakov(1.0).with_tau_end(-1.0),
            DimensionlessParams::ermakov(1.0).with_tolerances(0.0, 1e-12),
            DimensionlessParams::ermakov(1.0).with_sampling(Sampling::Uniform(0)),
        ] {
            assert!(matches!(integrate_dispersion(&p), Err(Error::Domain { .. })), "{p:?}");
        }
    }

    #[test]
    fn log_sampling() {
        let p = DimensionlessParams::ermakov(0.1).with_sampling(Sampling::Log {
            intervals: 50,
            tau_min: 1e-3,
        });
        let traj = integrate_dispersion(&p).unwrap();
        assert_eq!(traj.samples.len(), 52);
        assert_eq!(traj.tau_end(), 100.0);
    }

    #[test]
    fn dimension_maps() {
        let b = 1e-16;
        let sys = PhysicalSystem::new(M_ELECTRON, b, HBAR / (2.0 * b)).unwrap();
        let p = sys.to_dimensionless(sys.relaxation_time());
        assert!((p.xi0_sq - 1.0).abs() < 1e-14);
        assert!((p.tau_end - 1.0).abs() < 1e-14);

        // Hand arithmetic: 2 * 1e-16 * 1e-18 / 1.054571817e-34 = 1.8965043136...
        let sys = PhysicalSystem::new(M_ELECTRON, b, 1e-18).unwrap();
        let p = sys.to_dimensionless(1.0);
        assert!((p.xi0_sq - 1.896_504_313_655_48).abs() < 1e-12, "{}", p.xi0_sq);
    }

    #[test]
    fn trap_gives_alpha() {
        let sys = PhysicalSystem::new(2.0, 4.0, 1.0).unwrap().with_trap(3.0).unwrap();
        assert_eq!(sys.alpha(), 1.5);
        assert_eq!(
            sys.to_dimensionless(1.0).tau_end,
            DimensionlessParams::pinney(1.0, 1.0).with_tau_end(2.0).tau_end
        );
    }

    #[test]
    fn vacuum_law() {
        let sys = PhysicalSystem::new(M_ELECTRON, 1e-16, 1e-18).unwrap();
        assert_eq!(vacuum_sigma_sq(&sys, 0.0), sys.sigma0_sq);
        for &t in &[1e-16, 1e-14, 3e-13] {
            let lhs = vacuum_sigma_sq(&sys, t);
            let rhs = HBAR / (2.0 * sys.friction) * short_time_xi_sq(sys.xi_sq_of(sys.sigma0_sq), sys.tau_of(t));
            assert!(((lhs - rhs) / lhs).abs() < 1e-12);
        }
        let heavy = PhysicalSystem {
            mass: 2.0 * sys.mass,
            ..sys
        };
        let t = 1e-14;
        let added = (vacuum_sigma_sq(&sys, t) - sys.sigma0_sq).sqrt();
        let added_heavy = (vacuum_sigma_sq(&heavy, t) - sys.sigma0_sq).sqrt();
        assert!((added_heavy / added - 0.5).abs() < 1e-12);
    }
}
