//! Semiclassical thermo-quantum diffusion in a cosine potential.
//!
//! Inserting the classical Boltzmann density into the Bohm quantum potential
//! and integrating over inverse temperature replaces the external potential
//! `U = A cos(q x)` by an effective one,
//!
//! ```text
//! U_eff = [1 - lambda_T^2 q^2 (1 - beta U / 3) / 2] U          (full cubic)
//! U_eff = (1 - lambda_T^2 q^2 / 2) U                           (linearized)
//! ```
//!
//! with `lambda_T = hbar / (2 sqrt(m k_B T))`. The long-time diffusivity then
//! follows from the Lifson-Jackson period averages; for the linearized form
//! they reduce to a Bessel function and, for high barriers, to an Arrhenius
//! law with activation energy `(2 - lambda_T^2 q^2) A`.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::constants::{HBAR, K_B, N_A};
use crate::error::{Checked, Error, Result, Validity};
use crate::potential::{CosinePotential, PeriodicPotential};
use crate::quadrature::{self, QuadOptions};
use crate::special::i0e;

fn positive(what: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Domain { what, value: v })
    }
}

/// Thermal de Broglie wavelength `hbar / (2 sqrt(m k_B T))`, m.
pub fn thermal_wavelength(mass: f64, temperature: f64) -> Result<f64> {
    positive("mass", mass)?;
    positive("temperature", temperature)?;
    Ok(HBAR / (2.0 * (mass * K_B * temperature).sqrt()))
}

/// Temperature `hbar^2 q^2 / (4 m k_B)` at which the effective reciprocal
/// temperature peaks, K.
pub fn crossover_temperature(mass: f64, wavenumber: f64) -> f64 {
    HBAR * HBAR * wavenumber * wavenumber / (4.0 * mass * K_B)
}

/// Temperature where `lambda_T^2 q^2 = 2` and the effective potential
/// vanishes, K. Equal to half the crossover temperature.
pub fn free_diffusion_temperature(mass: f64, wavenumber: f64) -> f64 {
    HBAR * HBAR * wavenumber * wavenumber / (8.0 * mass * K_B)
}

/// Potential period whose crossover temperature is `t_q` for `mass`, m.
pub fn period_from_crossover(mass: f64, t_q: f64) -> f64 {
    2.0 * PI * HBAR / (4.0 * mass * K_B * t_q).sqrt()
}

/// A particle diffusing thermally in a cosine potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoSystem {
    /// kg
    pub mass: f64,
    /// kg/s
    pub friction: f64,
    /// K
    pub temperature: f64,
    pub potential: CosinePotential,
}

impl ThermoSystem {
    pub fn new(mass: f64, friction: f64, temperature: f64, potential: CosinePotential) -> Result<Self> {
        Ok(ThermoSystem {
            mass: positive("mass", mass)?,
            friction: positive("friction", friction)?,
            temperature: positive("temperature", temperature)?,
            potential,
        })
    }

    pub fn at_temperature(&self, temperature: f64) -> Result<Self> {
        ThermoSystem::new(self.mass, self.friction, temperature, self.potential)
    }

    pub fn amplitude(&self) -> f64 {
        self.potential.amplitude
    }

    pub fn wavenumber(&self) -> f64 {
        self.potential.wavenumber
    }

    /// `1 / k_B T`, 1/J.
    pub fn beta(&self) -> f64 {
        1.0 / (K_B * self.temperature)
    }

    pub fn lambda_t(&self) -> f64 {
        HBAR / (2.0 * (self.mass * K_B * self.temperature).sqrt())
    }

    /// Einstein constant `k_B T / b`, m^2/s.
    pub fn einstein_d(&self) -> f64 {
        K_B * self.temperature / self.friction
    }

    /// `lambda_T^2 q^2`, equal to `T_q / T`.
    pub fn tq_factor(&self) -> f64 {
        let l = self.lambda_t() * self.wavenumber();
        l * l
    }

    /// `beta (1 - lambda_T^2 q^2 / 2)`, 1/J.
    pub fn effective_beta(&self) -> f64 {
        self.beta() * (1.0 - 0.5 * self.tq_factor())
    }

    /// `beta A (1 - lambda_T^2 q^2 / 2)`: argument of the Bessel law.
    pub fn reduced_barrier(&self) -> f64 {
        self.effective_beta() * self.amplitude()
    }

    /// Tunneling-reduced activation energy `(2 - lambda_T^2 q^2) A`, J.
    pub fn activation_energy(&self) -> f64 {
        (2.0 - self.tq_factor()) * self.amplitude()
    }

    /// Arrhenius prefactor `pi (2 - lambda_T^2 q^2) A / b`, m^2/s.
    pub fn prefactor(&self) -> f64 {
        PI * self.activation_energy() / self.friction
    }

    pub fn crossover_temperature(&self) -> f64 {
        crossover_temperature(self.mass, self.wavenumber())
    }

    pub fn free_diffusion_temperature(&self) -> f64 {
        free_diffusion_temperature(self.mass, self.wavenumber())
    }

    /// Same system with `lambda_T -> 0`.
    pub fn classical(&self) -> ClassicalView<'_> {
        ClassicalView(self)
    }

    pub fn effective_potential(&self, mode: EffectiveMode) -> EffectivePotentialSpec {
        EffectivePotentialSpec::new(self, mode)
    }
}

/// Classical-limit quantities of a [`ThermoSystem`].
#[derive(Debug, Clone, Copy)]
pub struct ClassicalView<'a>(&'a ThermoSystem);

impl ClassicalView<'_> {
    pub fn bessel_deff(&self) -> f64 {
        let s = self.0;
        let x = s.beta() * s.amplitude();
        let i = i0e(x);
        s.einstein_d() * (-2.0 * x).exp() / (i * i)
    }

    pub fn arrhenius_deff(&self) -> f64 {
        let s = self.0;
        2.0 * PI * s.amplitude() / s.friction * (-2.0 * s.beta() * s.amplitude()).exp()
    }
}

/// Which form of the effective potential to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectiveMode {
    FullCubic,
    Linearized,
}

/// Effective potential seen by the semiclassical density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectivePotentialSpec {
    pub mode: EffectiveMode,
    pub underlying: CosinePotential,
    /// `lambda_T^2 q^2`.
    pub tq_factor: f64,
    /// Inverse thermal energy used by the cubic term, 1/J.
    pub beta: f64,
}

impl EffectivePotentialSpec {
    pub fn new(sys: &ThermoSystem, mode: EffectiveMode) -> Self {
        EffectivePotentialSpec {
            mode,
            underlying: sys.potential,
            tq_factor: sys.tq_factor(),
            beta: sys.beta(),
        }
    }

    /// Whether the linearized barrier is nonzero.
    pub fn has_barrier(&self) -> bool {
        self.tq_factor != 2.0 && self.underlying.amplitude > 0.0
    }

    fn linear_factor(&self) -> f64 {
        1.0 - 0.5 * self.tq_factor
    }
}

impl PeriodicPotential for EffectivePotentialSpec {
    fn period(&self) -> f64 {
        self.underlying.period()
    }

    fn value(&self, x: f64) -> f64 {
        let u = self.underlying.value(x);
        match self.mode {
            EffectiveMode::Linearized => self.linear_factor() * u,
            EffectiveMode::FullCubic => (1.0 - 0.5 * self.tq_factor * (1.0 - self.beta * u / 3.0)) * u,
        }
    }

    fn gradient(&self, x: f64) -> f64 {
        let u = self.underlying.value(x);
        let du = self.underlying.gradient(x);
        match self.mode {
            EffectiveMode::Linearized => self.linear_factor() * du,
            EffectiveMode::FullCubic => (self.linear_factor() + self.tq_factor * self.beta * u / 3.0) * du,
        }
    }

    fn laplacian(&self, x: f64) -> f64 {
        let u = self.underlying.value(x);
        let du = self.underlying.gradient(x);
        let d2u = self.underlying.laplacian(x);
        match self.mode {
            EffectiveMode::Linearized => self.linear_factor() * d2u,
            EffectiveMode::FullCubic => {
                (self.linear_factor() + self.tq_factor * self.beta * u / 3.0) * d2u
                    + self.tq_factor * self.beta * du * du / 3.0
            }
        }
    }
}

/// Effective potential at `x` for `sys` in the chosen mode, J.
pub fn effective_potential(x: f64, sys: &ThermoSystem, mode: EffectiveMode) -> f64 {
    sys.effective_potential(mode).value(x)
}

/// Bohm quantum potential of the classical equilibrium density
/// `rho ~ exp(-beta U)`: `lambda_T^2 [U'' - beta U'^2 / 2]`, J.
pub fn quantum_potential_boltzmann<P: PeriodicPotential + ?Sized>(pot: &P, x: f64, lambda_t: f64, beta: f64) -> f64 {
    let g = pot.gradient(x);
    lambda_t * lambda_t * (pot.laplacian(x) - 0.5 * beta * g * g)
}

/// Closed form of [`quantum_potential_boltzmann`] for the cosine:
/// `-lambda_T^2 q^2 [U + beta (A^2 - U^2) / 2]`, J.
pub fn quantum_potential_cosine(x: f64, sys: &ThermoSystem) -> f64 {
    let u = sys.potential.value(x);
    let a = sys.amplitude();
    -sys.tq_factor() * (u + 0.5 * sys.beta() * (a * a - u * u))
}

fn period_average<F: Fn(f64) -> f64>(f: F, period: f64) -> Result<f64> {
    let opts = QuadOptions {
        rel_tol: 1e-12,
        abs_tol: 0.0,
        initial_segments: 16,
        max_segments: 4000,
    };
    Ok(quadrature::integrate(f, 0.0, period, opts)? / period)
}

/// Lifson-Jackson diffusivity `D / (<e^{beta U}> <e^{-beta U}>)` for any
/// periodic potential, averages taken over one period by adaptive quadrature.
pub fn lifson_jackson_deff<P: PeriodicPotential + ?Sized>(pot: &P, beta: f64, einstein_d: f64) -> Result<f64> {
    let period = pot.period();
    const PROBES: usize = 4096;
    let (lo, hi) = (0..PROBES).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
        let u = pot.value(period * i as f64 / PROBES as f64);
        (lo.min(u), hi.max(u))
    });
    // Shifting by the extrema keeps both exponentials at or below ~1.
    let plus = period_average(|x| (beta * (pot.value(x) - hi)).exp(), period)?;
    let minus = period_average(|x| (-beta * (pot.value(x) - lo)).exp(), period)?;
    Ok(einstein_d * (-beta * (hi - lo)).exp() / (plus * minus))
}

impl ThermoSystem {
    /// Lifson-Jackson diffusivity with the effective potential in `mode`, m^2/s.
    pub fn lifson_jackson_deff(&self, mode: EffectiveMode) -> Result<f64> {
        lifson_jackson_deff(&self.effective_potential(mode), self.beta(), self.einstein_d())
    }

    /// Closed-form average for the linearized potential:
    /// `D / I0(beta A (1 - lambda_T^2 q^2 / 2))^2`, m^2/s.
    pub fn bessel_deff(&self) -> f64 {
        let x = self.reduced_barrier().abs();
        let i = i0e(x);
        self.einstein_d() * (-2.0 * x).exp() / (i * i)
    }

    /// High-barrier Arrhenius form
    /// `pi (2 - lambda_T^2 q^2) (A / b) exp[-beta (2 - lambda_T^2 q^2) A]`.
    ///
    /// Warns when the reduced barrier is below one.
    pub fn arrhenius_deff(&self) -> Result<Checked<f64>> {
        let tq = self.tq_factor();
        if tq >= 2.0 {
            return Err(Error::NotSemiclassical { tq_factor: tq });
        }
        let d = self.prefactor() * (-self.beta() * self.activation_energy()).exp();
        let reduced = self.reduced_barrier();
        Ok(if reduced < 1.0 {
            Checked::warn(
                d,
                Validity::LowBarrier {
                    reduced_barrier: reduced,
                },
            )
        } else {
            Checked::ok(d)
        })
    }
}

/// Energy with an explicit unit tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Energy {
    /// J per particle.
    Joule(f64),
    /// J/mol.
    JoulePerMole(f64),
}

impl Energy {
    pub fn kj_per_mol(v: f64) -> Self {
        Energy::JoulePerMole(v * 1e3)
    }

    /// Energy per particle, J.
    pub fn per_particle(self) -> f64 {
        match self {
            Energy::Joule(e) => e,
            Energy::JoulePerMole(e) => e / N_A,
        }
    }
}

/// Potential and friction recovered from classical Arrhenius parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrheniusFit {
    pub activation_energy: Energy,
    /// Pre-exponential factor, m^2/s.
    pub d0: f64,
    pub mass: f64,
    /// Cosine amplitude `E_a / 2`, J.
    pub amplitude: f64,
    /// `2 pi A / D0`, kg/s.
    pub friction: f64,
    /// Momentum relaxation time `m / b`, s.
    pub relaxation_time: f64,
}

/// Inverts the classical limit `D = 2 pi (A / b) exp(-2 beta A)` of the
/// Arrhenius form: `A = E_a / 2`, `b = 2 pi A / D0`.
pub fn fit_from_arrhenius(activation_energy: Energy, d0: f64, mass: f64) -> Result<ArrheniusFit> {
    let ea = positive("activation energy", activation_energy.per_particle())?;
    positive("pre-exponential factor", d0)?;
    positive("mass", mass)?;
    let amplitude = 0.5 * ea;
    let friction = 2.0 * PI * amplitude / d0;
    Ok(ArrheniusFit {
        activation_energy,
        d0,
        mass,
        amplitude,
        friction,
        relaxation_time: mass / friction,
    })
}

/// One row of an isotope scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow<'a> {
    pub label: &'a str,
    pub mass: f64,
    pub temperature: f64,
    /// 1/T, 1/K.
    pub inv_t: f64,
    /// Arrhenius form; `None` outside the semiclassical domain.
    pub d_eff_arrhenius: Option<f64>,
    /// Bessel form.
    pub d_eff_bessel: f64,
    pub warning: Option<Validity>,
}

/// Tabulated `(isotope, T, D_eff)` results with the parameters used.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionReport<'a> {
    pub amplitude: f64,
    pub friction: f64,
    pub wavenumber: f64,
    pub rows: Vec<ScanRow<'a>>,
}

/// `n` temperatures from `t_min` to `t_max` equally spaced in `1/T`,
/// ordered by increasing temperature.
pub fn inverse_temperature_grid(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return alloc::vec![t_min];
    }
    let (a, b) = (1.0 / t_max, 1.0 / t_min);
    (0..n)
        .rev()
        .map(|i| 1.0 / (a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Diffusivity against temperature for each `(label, mass)`, using the
/// amplitude and friction of `fit`. Rows outside the semiclassical regime are
/// kept and flagged.
pub fn isotope_scan<'a>(
    fit: &ArrheniusFit,
    masses: &[(&'a str, f64)],
    wavenumber: f64,
    temperatures: &[f64],
) -> Result<DiffusionReport<'a>> {
    let pot = CosinePotential::new(fit.amplitude, wavenumber)?;
    let mut rows = Vec::with_capacity(masses.len() * temperatures.len());
    for &(label, mass) in masses {
        for &t in temperatures {
            let sys = ThermoSystem::new(mass, fit.friction, t, pot)?;
            let (d19, mut warning) = match sys.arrhenius_deff() {
                Ok(c) => (Some(c.value), c.warning),
                Err(Error::NotSemiclassical { tq_factor }) => (None, Some(Validity::NotSemiclassical { tq_factor })),
                Err(e) => return Err(e),
            };
            let t_q = sys.crossover_temperature();
            if d19.is_some() && t < t_q {
                warning = Some(Validity::BelowCrossover {
                    temperature: t,
                    crossover: t_q,
                });
            }
            rows.push(ScanRow {
                label,
                mass,
                temperature: t,
                inv_t: 1.0 / t,
                d_eff_arrhenius: d19,
                d_eff_bessel: sys.bessel_deff(),
                warning,
            });
        }
    }
    Ok(DiffusionReport {
        amplitude: fit.amplitude,
        friction: fit.friction,
        wavenumber,
        rows,
    })
}
