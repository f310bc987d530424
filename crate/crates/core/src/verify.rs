//! Canned verification runs of the density solvers against the reduced
//! models. Shared by the acceptance suite and the `pde-check` command.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::constants::{M_ELECTRON, M_HYDROGEN};
use crate::error::Result;
use crate::pde::{self, DensityField, Evolution, EvolveOptions, FluxScheme, Grid1D, TimeStepping};
use crate::periodic::free_subdiffusion;
use crate::potential::{CosinePotential, PeriodicPotential};
use crate::system::PhysicalSystem;
use crate::thermo::{EffectiveMode, EffectivePotentialSpec, ThermoSystem};

/// Tolerance of the sigma^4 law for the quantum and closure free runs.
pub const FREE_LAW_TOL: f64 = 0.01;
/// Tolerance on the Gaussian kurtosis of the quantum free run.
pub const KURTOSIS_TOL: f64 = 0.02;
/// Tolerance of the measured effective diffusivity.
pub const DEFF_TOL: f64 = 0.05;
pub const MASS_TOL: f64 = 1e-8;

/// Ni(111)-like hydrogen parameters used by the semiclassical runs.
pub const NI_AMPLITUDE: f64 = 1.67e-20;
pub const NI_FRICTION: f64 = 3.3e-13;
pub const NI_PERIOD: f64 = 3.6e-10;
pub const SEMICLASSICAL_TEMPERATURE: f64 = 600.0;

/// Scenario knobs. `cells` is the line cell count for the free runs and
/// cells per period for the cosine run; `duration` scales the default run
/// length (zero gives the initial state only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub cells: usize,
    pub duration: f64,
    pub outputs: usize,
}

impl ScenarioConfig {
    pub fn quantum_default() -> Self {
        ScenarioConfig {
            cells: 256,
            duration: 1.0,
            outputs: 60,
        }
    }

    pub fn semiclassical_default() -> Self {
        ScenarioConfig {
            cells: 32,
            duration: 1.0,
            outputs: 200,
        }
    }
}

/// Free electron with `sigma0^2 = 1e-18 m^2` and `b = 1e-16 kg/s`.
pub fn free_electron() -> PhysicalSystem {
    PhysicalSystem::new(M_ELECTRON, 1e-16, 1e-18).expect("valid constants")
}

/// Time over which `sigma^4` grows by `sigma0^4`.
pub fn free_law_time(sys: &PhysicalSystem) -> f64 {
    sys.sigma0_sq * sys.sigma0_sq * sys.mass * sys.friction / (sys.hbar * sys.hbar)
}

/// Outcome of a free-particle run compared with `sigma^4 = sigma0^4 + hbar^2 t / (m b)`.
#[derive(Debug, Clone)]
pub struct FreeReport {
    pub evolution: Evolution,
    /// Largest relative deviation of `sigma^4` from the law.
    pub max_law_error: f64,
    /// Largest deviation of the kurtosis from 3.
    pub max_kurtosis_error: f64,
    pub mass_error: f64,
}

impl FreeReport {
    pub fn passed(&self) -> bool {
        self.max_law_error <= FREE_LAW_TOL && self.mass_error <= MASS_TOL
    }

    fn from_evolution(evolution: Evolution, sys: &PhysicalSystem) -> Self {
        let s0 = evolution.snapshots[0].moments.sigma_sq;
        let rate = sys.hbar * sys.hbar / (sys.mass * sys.friction);
        let t0 = evolution.snapshots[0].time;
        let (mut law, mut kurt) = (0.0f64, 0.0f64);
        for s in &evolution.snapshots {
            let expect = s0 * s0 + rate * (s.time - t0);
            law = law.max((s.moments.sigma_sq * s.moments.sigma_sq / expect - 1.0).abs());
            kurt = kurt.max((s.moments.kurtosis / 3.0 - 1.0).abs());
        }
        let mass_error = evolution.max_mass_error();
        FreeReport {
            evolution,
            max_law_error: law,
            max_kurtosis_error: kurt,
            mass_error,
        }
    }
}

fn free_setup(sys: &PhysicalSystem, cfg: &ScenarioConfig) -> Result<(Grid1D, DensityField, f64)> {
    // Three law times double sigma^2.
    let t_end = 3.0 * free_law_time(sys) * cfg.duration;
    let sigma_max = free_subdiffusion(t_end, sys).max(sys.sigma0_sq).sqrt();
    let grid = Grid1D::line_for_sigma(sigma_max, cfg.cells)?;
    let rho0 = DensityField::gaussian(&grid, 0.0, sys.sigma0_sq);
    Ok((grid, rho0, t_end))
}

/// Free Gaussian under the full quantum diffusion equation.
pub fn quantum_free(sys: &PhysicalSystem, cfg: &ScenarioConfig) -> Result<FreeReport> {
    let (grid, rho0, t_end) = free_setup(sys, cfg)?;
    let opts = EvolveOptions::new(t_end).with_outputs(cfg.outputs);
    let ev = pde::evolve_quantum(&rho0, &grid, sys, &|_| 0.0, &opts)?;
    Ok(FreeReport::from_evolution(ev, sys))
}

/// Free Gaussian under the Gaussian-closure Smoluchowski equation.
pub fn closure_free(sys: &PhysicalSystem, cfg: &ScenarioConfig) -> Result<FreeReport> {
    let (grid, rho0, t_end) = free_setup(sys, cfg)?;
    let opts = EvolveOptions::new(t_end).with_outputs(cfg.outputs);
    let ev = pde::evolve_closure(&rho0, &grid, sys, &|_| 0.0, &opts)?;
    Ok(FreeReport::from_evolution(ev, sys))
}

/// Hydrogen on a Ni(111)-like cosine at the given temperature.
pub fn nickel_hydrogen(temperature: f64) -> Result<ThermoSystem> {
    let pot = CosinePotential::with_period(NI_AMPLITUDE, NI_PERIOD)?;
    ThermoSystem::new(M_HYDROGEN, NI_FRICTION, temperature, pot)
}

/// Outcome of a long semiclassical run in a periodic potential.
#[derive(Debug, Clone)]
pub struct DeffReport {
    pub evolution: Evolution,
    pub measured: f64,
    pub expected: f64,
    pub relative_error: f64,
    pub mass_error: f64,
    /// Root-mean-square travel at the end of the run, in periods.
    pub travel_periods: f64,
}

impl DeffReport {
    pub fn passed(&self) -> bool {
        self.relative_error <= DEFF_TOL && self.mass_error <= MASS_TOL
    }
}

/// Effective diffusivity measured from the spreading of a wide Gaussian on a
/// line spanning many periods, against the Lifson-Jackson value of the same
/// effective potential.
///
/// The run lasts until the rms travel `sqrt(2 D_eff t)` reaches 20 periods.
/// Steps are backward Euler with exponentially fitted fluxes.
pub fn semiclassical_deff(sys: &ThermoSystem, mode: EffectiveMode, cfg: &ScenarioConfig) -> Result<DeffReport> {
    let spec = EffectivePotentialSpec::new(sys, mode);
    let period = spec.period();
    let expected = sys.lifson_jackson_deff(mode)?;
    let sigma0_sq = (2.0 * period) * (2.0 * period);
    let travel = 20.0 * period;
    let t_end = travel * travel / (2.0 * expected) * cfg.duration;
    let sigma_max = (sigma0_sq + 2.0 * expected * t_end).sqrt();
    let periods = (crate::pde::LINE_WIDTH_SIGMAS * sigma_max / period).ceil();
    let grid = Grid1D::line(periods * period, 2 * periods as usize * cfg.cells)?;
    let rho0 = DensityField::gaussian(&grid, 0.0, sigma0_sq);
    let opts = EvolveOptions::new(t_end)
        .with_outputs(cfg.outputs)
        .with_dt(t_end / 4000.0)
        .with_scheme(FluxScheme::ExponentialFitting, TimeStepping::Implicit);
    let evolution = pde::evolve_semiclassical(&rho0, &grid, sys, &spec, &opts)?;
    let measured = if t_end > 0.0 {
        evolution.effective_diffusivity(0.5)
    } else {
        f64::NAN
    };
    let relative_error = (measured / expected - 1.0).abs();
    let mass_error = evolution.max_mass_error();
    let travel_periods = (2.0 * expected * t_end).sqrt() / period;
    Ok(DeffReport {
        evolution,
        measured,
        expected,
        relative_error,
        mass_error,
        travel_periods,
    })
}

/// Largest relative change per cell-relaxation time `L^2 / D` of a periodic
/// equilibrium density `exp(-beta U_eff)` evolved under the exponentially
/// fitted scheme.
pub fn equilibrium_drift(sys: &ThermoSystem, mode: EffectiveMode, cells: usize, stepping: TimeStepping) -> Result<f64> {
    let spec = EffectivePotentialSpec::new(sys, mode);
    let grid = Grid1D::periodic(spec.period(), cells)?;
    let rho0 = DensityField::boltzmann(&grid, |x| spec.value(x), sys.beta());
    let relax = spec.period() * spec.period() / sys.einstein_d();
    let t_end = 5.0 * relax;
    let opts = EvolveOptions::new(t_end)
        .with_outputs(5)
        .with_scheme(FluxScheme::ExponentialFitting, stepping);
    let opts = if stepping == TimeStepping::Implicit {
        opts.with_dt(relax / 100.0)
    } else {
        opts
    };
    let ev = pde::evolve_semiclassical(&rho0, &grid, sys, &spec, &opts)?;
    let drift = ev
        .final_field
        .rho
        .iter()
        .zip(&rho0.rho)
        .map(|(a, b)| (a / b - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(drift / (t_end / relax))
}

/// `sigma^2(t)` of the closure equation in a weak cosine compared with the
/// rate-law ODE started from the same measured initial dispersion.
#[derive(Debug, Clone)]
pub struct ClosureCosineReport {
    pub evolution: Evolution,
    pub ode: Vec<f64>,
    pub max_relative_error: f64,
    pub mass_error: f64,
}

/// Electron on a 1 nm cosine, starting at `sigma0 = 5` periods with
/// `beta_Q A = barrier` initially.
pub fn closure_cosine(barrier: f64, cells_per_period: usize, duration: f64) -> Result<ClosureCosineReport> {
    let period = 1e-9;
    let sigma0_sq = 25.0 * period * period;
    let sys = PhysicalSystem::new(M_ELECTRON, 1e-16, sigma0_sq)?;
    let amplitude = barrier * sys.hbar * sys.hbar / (4.0 * sys.mass * sigma0_sq);
    let pot = CosinePotential::with_period(amplitude, period)?;
    let d0 = sys.hbar * sys.hbar / (4.0 * sys.mass * sigma0_sq * sys.friction);
    let t_end = 20.0 * period * period / d0 * duration;
    let sigma_max = (2.5 * sigma0_sq).sqrt();
    let periods = (crate::pde::LINE_WIDTH_SIGMAS * sigma_max / period).ceil();
    let grid = Grid1D::line(periods * period, 2 * periods as usize * cells_per_period)?;
    let rho0 = DensityField::gaussian(&grid, 0.0, sigma0_sq);
    let opts = EvolveOptions::new(t_end).with_outputs(40);
    let evolution = pde::evolve_closure(&rho0, &grid, &sys, &|x| pot.value(x), &opts)?;
    let times: Vec<f64> = evolution.snapshots.iter().map(|s| s.time).collect();
    let s0 = evolution.snapshots[0].moments.sigma_sq;
    let ode = crate::periodic::dispersion_by_rate_ode(&sys, &pot, s0, &times)?;
    let max_relative_error = evolution
        .snapshots
        .iter()
        .zip(&ode)
        .map(|(s, o)| (s.moments.sigma_sq / o - 1.0).abs())
        .fold(0.0, f64::max);
    let mass_error = evolution.max_mass_error();
    Ok(ClosureCosineReport {
        evolution,
        ode,
        max_relative_error,
        mass_error,
    })
}
