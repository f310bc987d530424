//! Overdamped zero-temperature spreading in a cosine potential.
//!
//! For a Gaussian packet the quantum pressure acts like a temperature
//! `1/beta_Q = hbar^2 / (4 m sigma^2)` that falls as the packet widens. The
//! Festa-d'Agliano rate for a cosine `U = A cos(q x)` gives
//!
//! ```text
//! d sigma^2 / dt = 2 / (b beta_Q I0(beta_Q A)^2)
//! ```
//!
//! whose integral from `sigma^2 = 0` is the implicit law
//! `x^2 [I0(x)^2 - I1(x)^2] = 16 m A^2 t / (hbar^2 b)` with `x = beta_Q A`.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::ode::{self, SolverOptions};
use crate::potential::CosinePotential;
use crate::special::{self, i0e};
use crate::system::PhysicalSystem;

/// Quantum thermodynamic-like temperature of a packet with dispersion `sigma_sq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumTemperatureState {
    /// m^2
    pub sigma_sq: f64,
    /// `hbar^2 / (4 m sigma^2)`, J.
    pub beta_q_inv: f64,
}

impl QuantumTemperatureState {
    pub fn new(sigma_sq: f64, sys: &PhysicalSystem) -> Self {
        QuantumTemperatureState {
            sigma_sq,
            beta_q_inv: sys.hbar * sys.hbar / (4.0 * sys.mass * sigma_sq),
        }
    }

    pub fn beta_q(&self) -> f64 {
        1.0 / self.beta_q_inv
    }
}

/// Length, frequency and time scales set by the potential amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleSet {
    /// de Broglie wavelength of the activation energy, `hbar / (2 sqrt(2 m A))`, m.
    pub lambda_a: f64,
    /// `4 A / hbar`, 1/s.
    pub omega_a: f64,
    /// `b / (m omega_A^2)`, s.
    pub t_relax: f64,
}

/// `beta_Q A = 4 m A sigma^2 / hbar^2`.
pub fn reduced_barrier(sigma_sq: f64, sys: &PhysicalSystem, pot: &CosinePotential) -> f64 {
    4.0 * sys.mass * pot.amplitude * sigma_sq / (sys.hbar * sys.hbar)
}

/// Time scale `hbar^2 b / (16 m A^2)` of the implicit law.
fn law_time_unit(sys: &PhysicalSystem, pot: &CosinePotential) -> f64 {
    sys.hbar * sys.hbar * sys.friction / (16.0 * sys.mass * pot.amplitude * pot.amplitude)
}

/// Growth rate `d sigma^2 / dt` at dispersion `sigma_sq`, m^2/s.
pub fn dispersion_rate(sigma_sq: f64, sys: &PhysicalSystem, pot: &CosinePotential) -> Result<f64> {
    if !(sigma_sq.is_finite() && sigma_sq > 0.0) {
        return Err(Error::Domain {
            what: "sigma^2",
            value: sigma_sq,
        });
    }
    let state = QuantumTemperatureState::new(sigma_sq, sys);
    let x = state.beta_q() * pot.amplitude;
    let i0 = i0e(x);
    Ok(2.0 * state.beta_q_inv * (-2.0 * x).exp() / (sys.friction * i0 * i0))
}

/// Time needed to reach dispersion `sigma_sq` starting from zero, s.
pub fn time_of_dispersion(sigma_sq: f64, sys: &PhysicalSystem, pot: &CosinePotential) -> Result<f64> {
    if !(sigma_sq.is_finite() && sigma_sq >= 0.0) {
        return Err(Error::Domain {
            what: "sigma^2",
            value: sigma_sq,
        });
    }
    if sigma_sq == 0.0 {
        return Ok(0.0);
    }
    if pot.amplitude == 0.0 {
        return Ok(sys.mass * sys.friction * sigma_sq * sigma_sq / (sys.hbar * sys.hbar));
    }
    let x = reduced_barrier(sigma_sq, sys, pot);
    Ok(law_time_unit(sys, pot) * special::ln_x2_i0sq_minus_i1sq(x).exp())
}

/// Dispersion reached at time `t` from zero, inverting the implicit law, m^2.
pub fn dispersion_of_time(t: f64, sys: &PhysicalSystem, pot: &CosinePotential) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain { what: "time", value: t });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if pot.amplitude == 0.0 {
        return Ok(free_subdiffusion(t, sys));
    }
    let target = (t / law_time_unit(sys, pot)).ln();
    // Root in u = ln x so the bracket tolerance is relative in x.
    let g = |u: f64| special::ln_x2_i0sq_minus_i1sq(u.exp()) - target;
    let mut lo = 1e-8f64.ln();
    if g(lo) > 0.0 {
        // x^2 (I0^2 - I1^2) >= x^2, so x <= sqrt(rhs).
        lo = 0.5 * target - 1.0;
    }
    // Upper end doubles x, i.e. adds ln 2 to u.
    let mut hi = 0.0;
    let mut doublings = 0;
    while g(hi) < 0.0 {
        if doublings == 64 {
            return Err(Error::NoSignChange {
                lo,
                f_lo: g(lo),
                hi,
                f_hi: g(hi),
            });
        }
        hi += core::f64::consts::LN_2;
        doublings += 1;
    }
    let u = special::find_root(g, lo, hi, 1e-13)?;
    let x = u.exp();
    Ok(sys.hbar * sys.hbar * x / (4.0 * sys.mass * pot.amplitude))
}

/// Time below which the logarithmic law has no positive solution,
/// `hbar^2 b / (32 pi m A^2)`, s.
pub fn log_domain_threshold(sys: &PhysicalSystem, pot: &CosinePotential) -> f64 {
    sys.hbar * sys.hbar * sys.friction / (32.0 * PI * sys.mass * pot.amplitude * pot.amplitude)
}

/// Strong-potential asymptote `sigma^2 = hbar^2/(8 m A) ln(32 pi m A^2 t / (hbar^2 b))`, m^2.
pub fn log_asymptote_sigma_sq(t: f64, sys: &PhysicalSystem, pot: &CosinePotential) -> Result<f64> {
    let threshold = log_domain_threshold(sys, pot);
    if !(t > threshold) || !t.is_finite() {
        return Err(Error::LogDomain { t, threshold });
    }
    Ok(sys.hbar * sys.hbar / (8.0 * sys.mass * pot.amplitude) * (t / threshold).ln())
}

/// Free overdamped law `sigma^2 = hbar sqrt(t / (m b))`, m^2.
pub fn free_subdiffusion(t: f64, sys: &PhysicalSystem) -> f64 {
    sys.hbar * (t / (sys.mass * sys.friction)).sqrt()
}

pub fn characteristic_scales(sys: &PhysicalSystem, pot: &CosinePotential) -> Result<ScaleSet> {
    let a = pot.amplitude;
    if !(a > 0.0) {
        return Err(Error::Domain {
            what: "potential amplitude",
            value: a,
        });
    }
    let lambda_a = sys.hbar / (2.0 * (2.0 * sys.mass * a).sqrt());
    let omega_a = 4.0 * a / sys.hbar;
    Ok(ScaleSet {
        lambda_a,
        omega_a,
        t_relax: sys.friction / (sys.mass * omega_a * omega_a),
    })
}

/// Dispersion at each of `times` (ascending, s) obtained by integrating the
/// rate law as an ODE from `sigma0_sq`, independently of the implicit law.
///
/// Internally integrates `d(x^2)/ds = 1 / I0(x)^2` with `x = beta_Q A` and
/// `s = 16 m A^2 t / (hbar^2 b)`, which is the rate law rewritten for `sigma^4`.
pub fn dispersion_by_rate_ode(
    sys: &PhysicalSystem,
    pot: &CosinePotential,
    sigma0_sq: f64,
    times: &[f64],
) -> Result<Vec<f64>> {
    if !(pot.amplitude > 0.0) {
        return Err(Error::Domain {
            what: "potential amplitude",
            value: pot.amplitude,
        });
    }
    let unit = law_time_unit(sys, pot);
    let s_end = times.iter().fold(0.0f64, |m, &t| m.max(t)) / unit;
    let x0 = reduced_barrier(sigma0_sq, sys, pot);
    let rhs = |_s: f64, w: &[f64; 1]| {
        let x = w[0].max(0.0).sqrt();
        let i = i0e(x);
        [(-2.0 * x).exp() / (i * i)]
    };
    let opts = SolverOptions {
        rel_tol: 1e-10,
        abs_tol: 1e-14 * (1.0 + x0 * x0),
        ..SolverOptions::default()
    };
    let sol = ode::solve(rhs, 0.0, [x0 * x0], s_end, opts, |_, _| Ok(()))?;
    let to_sigma = sys.hbar * sys.hbar / (4.0 * sys.mass * pot.amplitude);
    Ok(times.iter().map(|&t| sol.eval(t / unit)[0].sqrt() * to_sigma).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{HBAR, M_ELECTRON};

    fn electron() -> (PhysicalSystem, CosinePotential) {
        let sys = PhysicalSystem::new(M_ELECTRON, 1e-16, 1e-20).unwrap();
        let pot = CosinePotential::with_period(1.67e-20, 3.6e-10).unwrap();
        (sys, pot)
    }

    #[test]
    fn quantum_temperature_coupling() {
        let (sys, _) = electron();
        let s = QuantumTemperatureState::new(3e-19, &sys);
        assert!((s.beta_q_inv * s.sigma_sq / (HBAR * HBAR / (4.0 * M_ELECTRON)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn flat_potential_rate() {
        let (sys, pot) = electron();
        let flat = CosinePotential { amplitude: 0.0, ..pot };
        let s2 = 2e-19;
        let expected = HBAR * HBAR / (2.0 * M_ELECTRON * sys.friction * s2);
        assert!((dispersion_rate(s2, &sys, &flat).unwrap() / expected - 1.0).abs() < 1e-14);
        assert!(matches!(dispersion_rate(0.0, &sys, &flat), Err(Error::Domain { .. })));
    }

    #[test]
    fn rate_decreases_with_amplitude() {
        let (sys, pot) = electron();
        let mut prev = f64::INFINITY;
        for k in 0..10 {
            let p = CosinePotential {
                amplitude: pot.amplitude * k as f64 * 0.3,
                ..pot
            };
            let r = dispersion_rate(1e-19, &sys, &p).unwrap();
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn zero_dispersion_and_zero_time() {
        let (sys, pot) = electron();
        assert_eq!(time_of_dispersion(0.0, &sys, &pot).unwrap(), 0.0);
        assert_eq!(dispersion_of_time(0.0, &sys, &pot).unwrap(), 0.0);
        assert!(dispersion_of_time(-1.0, &sys, &pot).is_err());
    }

    #[test]
    fn log_law_identities() {
        let (sys, pot) = electron();
        let th = log_domain_threshold(&sys, &pot);
        let v = log_asymptote_sigma_sq(core::f64::consts::E * th, &sys, &pot).unwrap();
        let scale = HBAR * HBAR / (8.0 * M_ELECTRON * pot.amplitude);
        assert!((v / scale - 1.0).abs() < 1e-14);
        let d = log_asymptote_sigma_sq(1e3 * th, &sys, &pot).unwrap()
            - log_asymptote_sigma_sq(1e2 * th, &sys, &pot).unwrap();
        assert!((d / (scale * 10f64.ln()) - 1.0).abs() < 1e-12);
        assert!(matches!(
            log_asymptote_sigma_sq(th, &sys, &pot),
            Err(Error::LogDomain { .. })
        ));
        assert!(
            matches!(log_asymptote_sigma_sq(0.5 * th, &sys, &pot), Err(Error::LogDomain { threshold, .. }) if threshold == th)
        );
    }

    #[test]
    fn free_law() {
        let (sys, _) = electron();
        assert_eq!(free_subdiffusion(0.0, &sys), 0.0);
        let a = free_subdiffusion(1e-12, &sys);
        assert!((free_subdiffusion(4e-12, &sys) / a - 2.0).abs() < 1e-14);
        // Same law from the dimensionless long-time asymptote with xi0 -> 0.
        let tau = sys.tau_of(1e-12);
        let via_xi = sys.sigma_sq_of(crate::dynamics::long_time_xi_sq(0.0, tau));
        assert!((via_xi / a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scales() {
        let (sys, pot) = electron();
        let s = characteristic_scales(&sys, &pot).unwrap();
        let quarter = CosinePotential {
            amplitude: pot.amplitude / 4.0,
            ..pot
        };
        let s4 = characteristic_scales(&sys, &quarter).unwrap();
        assert!((s4.lambda_a / s.lambda_a - 2.0).abs() < 1e-14);
        // 4 * 1.67e-20 / 1.054571817e-34
        assert!((s.omega_a / 6.334_324_407_609e14 - 1.0).abs() < 1e-9, "{}", s.omega_a);
        let prefactor = HBAR * HBAR / (8.0 * M_ELECTRON * pot.amplitude);
        assert!((prefactor / (s.lambda_a * s.lambda_a) - 1.0).abs() < 1e-14);
        assert!(characteristic_scales(&sys, &CosinePotential { amplitude: 0.0, ..pot }).is_err());
    }
}
