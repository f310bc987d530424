//! One function per subcommand: resolve parameters, compute, write CSV and
//! manifest.

use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::{Args, ValueEnum};
use qdiff_core::constants::{Particle, ANGSTROM, M_HYDROGEN};
use qdiff_core::dq;
use qdiff_core::dynamics::{
    integrate_dispersion, DimensionlessParams, Sampling, DEFAULT_INTERVALS, DEFAULT_TAU_END_ERMAKOV,
    DEFAULT_TAU_END_PINNEY,
};
use qdiff_core::periodic::{dispersion_of_time, free_subdiffusion, log_asymptote_sigma_sq, time_of_dispersion};
use qdiff_core::potential::CosinePotential;
use qdiff_core::system::PhysicalSystem;
use qdiff_core::thermo::{
    crossover_temperature, fit_from_arrhenius, free_diffusion_temperature, inverse_temperature_grid, isotope_scan,
    ArrheniusFit, EffectiveMode, Energy,
};
use qdiff_core::verify::{self, ScenarioConfig};
use qdiff_core::{Error, Validity};

use crate::config::Config;
use crate::format::{sci, sci_opt, Table};
use crate::manifest::RunManifest;
use crate::{CheckFailed, UsageError};

/// Ni(111) values used as defaults throughout.
const NI_EA_KJ_MOL: f64 = 20.0;
const NI_D0: f64 = 3.2e-7;
const NI_AMPLITUDE: f64 = 1.67e-20;
const NI_FRICTION: f64 = 3.3e-13;
const NI_PERIOD_ANGSTROM: f64 = 3.6;

/// Where and how a command writes.
pub struct Sink<'a> {
    pub out_dir: &'a Path,
    pub config: &'a Config,
}

impl Sink<'_> {
    fn emit(&self, stem: &str, table: &Table, manifest: &mut RunManifest) -> Result<PathBuf> {
        self.config.finish()?;
        let csv = self.out_dir.join(format!("{stem}.csv"));
        table.write(&csv)?;
        manifest.output(&csv);
        manifest.write(self.out_dir, stem)?;
        Ok(csv)
    }
}

fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Particle symbol (`e`, `mu`, `H`, `D`, `T`) or a mass in kg.
fn parse_mass(s: &str) -> Result<(String, f64)> {
    if let Some(p) = Particle::from_symbol(s) {
        return Ok((p.symbol().to_string(), p.mass()));
    }
    match s.parse::<f64>() {
        Ok(m) if m > 0.0 && m.is_finite() => Ok((s.to_string(), m)),
        _ => Err(usage(format!("`{s}` is neither a particle symbol nor a mass in kg"))),
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || n == 0 {
        return Err(usage(format!(
            "log grid needs 0 < min <= max and at least one point (got {lo}, {hi}, {n})"
        )));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

#[derive(Debug, Args)]
pub struct Fig1Args {
    /// Initial dimensionless dispersion.
    #[arg(long)]
    pub xi0_sq: Option<f64>,
    /// End of the dimensionless time window.
    #[arg(long)]
    pub tau_end: Option<f64>,
    /// Number of equal output intervals.
    #[arg(long)]
    pub samples: Option<usize>,
}

pub fn fig1(a: &Fig1Args, sink: &Sink) -> Result<PathBuf> {
    let c = sink.config;
    let xi0_sq = pick(a.xi0_sq, c.f64("xi0_sq")?, 0.1);
    let tau_end = pick(a.tau_end, c.f64("tau_end")?, DEFAULT_TAU_END_ERMAKOV);
    let samples = pick(a.samples, c.usize("samples")?, DEFAULT_INTERVALS);
    let params = DimensionlessParams::ermakov(xi0_sq)
        .with_tau_end(tau_end)
        .with_sampling(Sampling::Uniform(samples));
    let traj = integrate_dispersion(&params)?;
    let mut table = Table::new(&["tau", "xi_sq", "dxi_sq_dtau"]);
    for s in &traj.samples {
        table.push(vec![sci(s.tau), sci(s.xi_sq()), sci(s.rate())]);
    }
    let mut m = RunManifest::new("fig1");
    m.num("xi0_sq", xi0_sq)
        .num("tau_end", tau_end)
        .param("samples", samples.to_string());
    sink.emit("fig1", &table, &mut m)
}

#[derive(Debug, Args)]
pub struct Fig2Args {
    /// Comma-separated initial dispersions; default is log-spaced over [0.01, 0.5].
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub xi0_sq: Option<Vec<f64>>,
    /// Size of the default list.
    #[arg(long)]
    pub points: Option<usize>,
}

pub fn fig2(a: &Fig2Args, sink: &Sink) -> Result<PathBuf> {
    let c = sink.config;
    let points = pick(a.points, c.usize("points")?, 25);
    let list = match a.xi0_sq.clone().or(c.f64_list("xi0_sq")?) {
        Some(l) => l,
        None => log_grid(0.01, 0.5, points)?,
    };
    if list.is_empty() {
        return Err(usage("the xi0_sq list is empty"));
    }
    let scan = dq::fig2_scan(&list)?;
    let mut table = Table::new(&["xi0_sq", "tau_at_max", "max_rate", "fit_value"]);
    for p in &scan {
        table.push(vec![
            sci(p.xi0_sq),
            sci(p.tau_at_max),
            sci(p.max_rate),
            sci(p.fit_value()),
        ]);
    }
    let mut m = RunManifest::new("fig2");
    m.param("xi0_sq", list.iter().map(|&x| sci(x)).collect::<Vec<_>>().join(","));
    sink.emit("fig2", &table, &mut m)
}

#[derive(Debug, Args)]
pub struct Fig3Args {
    #[arg(long)]
    pub xi0_sq: Option<f64>,
    /// Dimensionless trap strength.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub tau_end: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

pub fn fig3(a: &Fig3Args, sink: &Sink) -> Result<PathBuf> {
    let c = sink.config;
    let xi0_sq = pick(a.xi0_sq, c.f64("xi0_sq")?, 0.1);
    let alpha = pick(a.alpha, c.f64("alpha")?, 1.0);
    let tau_end = pick(a.tau_end, c.f64("tau_end")?, DEFAULT_TAU_END_PINNEY);
    let samples = pick(a.samples, c.usize("samples")?, DEFAULT_INTERVALS);
    let params = DimensionlessParams::pinney(xi0_sq, alpha)
        .with_tau_end(tau_end)
        .with_sampling(Sampling::Uniform(samples));
    let traj = integrate_dispersion(&params)?;
    let mut table = Table::new(&["tau", "xi_sq"]);
    for s in &traj.samples {
        table.push(vec![sci(s.tau), sci(s.xi_sq())]);
    }
    let mut m = RunManifest::new("fig3");
    m.num("xi0_sq", xi0_sq)
        .num("alpha", alpha)
        .num("tau_end", tau_end)
        .param("samples", samples.to_string());
    sink.emit("fig3", &table, &mut m)
}

#[derive(Debug, Args)]
pub struct Fig4Args {
    /// Potential amplitude A, J. Conflicts with --ea-kj-mol.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Friction b, kg/s. Conflicts with --d0.
    #[arg(long)]
    pub friction: Option<f64>,
    /// Classical activation energy, kJ/mol; with --d0 fits A and b.
    #[arg(long)]
    pub ea_kj_mol: Option<f64>,
    /// Arrhenius pre-exponential factor, m^2/s.
    #[arg(long)]
    pub d0: Option<f64>,
    /// Lattice period, Å.
    #[arg(long)]
    pub period_angstrom: Option<f64>,
    /// Comma-separated particle symbols or masses in kg.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub isotopes: Option<Vec<String>>,
    /// Lowest temperature, K.
    #[arg(long)]
    pub t_min: Option<f64>,
    /// Highest temperature, K.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Temperatures per isotope, equally spaced in 1/T.
    #[arg(long)]
    pub points: Option<usize>,
}

pub fn fig4(a: &Fig4Args, sink: &Sink) -> Result<PathBuf> {
    let c = sink.config;
    let amplitude = a.amplitude.or(c.f64("amplitude")?);
    let friction = a.friction.or(c.f64("friction")?);
    let ea = a.ea_kj_mol.or(c.f64("ea_kj_mol")?);
    let d0 = a.d0.or(c.f64("d0")?);
    let fit = match (amplitude, friction, ea, d0) {
        (None, None, Some(ea), Some(d0)) => fit_from_arrhenius(Energy::kj_per_mol(ea), d0, M_HYDROGEN)?,
        (Some(_), _, Some(_), _) | (_, Some(_), _, Some(_)) => {
            return Err(usage("give either amplitude/friction or ea_kj_mol/d0, not both"))
        }
        (amp, fr, None, None) => ArrheniusFit {
            activation_energy: Energy::Joule(2.0 * amp.unwrap_or(NI_AMPLITUDE)),
            d0: f64::NAN,
            mass: M_HYDROGEN,
            amplitude: amp.unwrap_or(NI_AMPLITUDE),
            friction: fr.unwrap_or(NI_FRICTION),
            relaxation_time: M_HYDROGEN / fr.unwrap_or(NI_FRICTION),
        },
        _ => return Err(usage("ea_kj_mol and d0 must be given together")),
    };
    let period = pick(a.period_angstrom, c.f64("period_angstrom")?, NI_PERIOD_ANGSTROM);
    let isotopes = match a.isotopes.clone().or(c.string_list("isotopes")?) {
        Some(l) => l,
        None => vec!["H".into(), "D".into(), "T".into()],
    };
    if isotopes.is_empty() {
        return Err(usage("the isotope list is empty"));
    }
    let t_min = pick(a.t_min, c.f64("t_min")?, 100.0);
    let t_max = pick(a.t_max, c.f64("t_max")?, 1000.0);
    let points = pick(a.points, c.usize("points")?, 50);
    if !(t_min > 0.0 && t_max >= t_min) || points == 0 {
        return Err(usage("temperature range needs 0 < t_min <= t_max and points >= 1"));
    }
    let masses: Vec<(String, f64)> = isotopes.iter().map(|s| parse_mass(s)).collect::<Result<_>>()?;
    let labelled: Vec<(&str, f64)> = masses.iter().map(|(l, m)| (l.as_str(), *m)).collect();
    let pot = CosinePotential::with_period(fit.amplitude, period * ANGSTROM)?;
    let temps = inverse_temperature_grid(t_min, t_max, points);
    let report = isotope_scan(&fit, &labelled, pot.wavenumber, &temps)?;
    let mut table = Table::new(&["isotope", "T", "inv_T", "D_eff_eq19", "D_eff_eq18", "validity_flag"]);
    for r in &report.rows {
        // The Bessel law has no meaning once the effective barrier changes sign.
        let eq18 = match r.warning {
            Some(Validity::NotSemiclassical { .. }) => None,
            _ => Some(r.d_eff_bessel),
        };
        table.push(vec![
            r.label.to_string(),
            sci(r.temperature),
            sci(r.inv_t),
            sci_opt(r.d_eff_arrhenius),
            sci_opt(eq18),
            r.warning.map(|w| w.tag()).unwrap_or("ok").to_string(),
        ]);
    }
    let mut m = RunManifest::new("fig4");
    m.num("amplitude", fit.amplitude).num("friction", fit.friction);
    if let (Some(ea), Some(d0)) = (ea, d0) {
        m.num("ea_kj_mol", ea).num("d0", d0);
    }
    m.num("period_angstrom", period)
        .param(
            "isotopes",
            masses
                .iter()
                .map(|(l, m)| format!("{l}:{}", sci(*m)))
                .collect::<Vec<_>>()
                .join(","),
        )
        .num("t_min", t_min)
        .num("t_max", t_max)
        .param("points", points.to_string());
    sink.emit("fig4", &table, &mut m)
}

#[derive(Debug, Args)]
pub struct SigmaTArgs {
    /// Particle symbol or mass in kg.
    #[arg(long)]
    pub mass: Option<String>,
    /// Friction b, kg/s.
    #[arg(long)]
    pub friction: Option<f64>,
    /// Potential amplitude A, J; zero gives free spreading.
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub period_angstrom: Option<f64>,
    /// Comma-separated times, s; overrides the log grid.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub times: Option<Vec<f64>>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

pub fn sigma_t(a: &SigmaTArgs, sink: &Sink) -> Result<PathBuf> {
    let c = sink.config;
    let mass_spec = pick(a.mass.clone(), c.string("mass")?, "e".to_string());
    let (label, mass) = parse_mass(&mass_spec)?;
    let friction = pick(a.friction, c.f64("friction")?, 1e-16);
    let amplitude = pick(a.amplitude, c.f64("amplitude")?, NI_AMPLITUDE);
    let period = pick(a.period_angstrom, c.f64("period_angstrom")?, NI_PERIOD_ANGSTROM);
    let t_min = pick(a.t_min, c.f64("t_min")?, 1e-16);
    let t_max = pick(a.t_max, c.f64("t_max")?, 1e-9);
    let points = pick(a.points, c.usize("points")?, 50);
    let times = match a.times.clone().or(c.f64_list("times")?) {
        Some(t) => t,
        None => log_grid(t_min, t_max, points)?,
    };
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(usage("times must be finite and non-negative"));
    }
    // The law starts from sigma^2 = 0; the initial dispersion is unused.
    let sys = PhysicalSystem::new(mass, friction, ANGSTROM * ANGSTROM)?;
    let pot = CosinePotential::with_period(amplitude, period * ANGSTROM)?;
    let mut table = Table::new(&[
        "t",
        "sigma_sq_exact",
        "sigma_sq_log_asymptote",
        "sigma_sq_free",
        "round_trip_residual",
    ]);
    for &t in &times {
        let exact = dispersion_of_time(t, &sys, &pot)?;
        let asymptote = if amplitude > 0.0 {
            match log_asymptote_sigma_sq(t, &sys, &pot) {
                Ok(v) => Some(v),
                Err(Error::LogDomain { .. }) => None,
                Err(e) => return Err(e.into()),
            }
        } else {
            None
        };
        let residual = if t == 0.0 {
            0.0
        } else {
            (time_of_dispersion(exact, &sys, &pot)? / t - 1.0).abs()
        };
        table.push(vec![
            sci(t),
            sci(exact),
            sci_opt(asymptote),
            sci(free_subdiffusion(t, &sys)),
            sci(residual),
        ]);
    }
    let mut m = RunManifest::new("sigma-t");
    m.param("mass_label", label)
        .num("mass", mass)
        .num("friction", friction)
        .num("amplitude", amplitude)
        .num("period_angstrom", period)
        .param("times", times.iter().map(|&t| sci(t)).collect::<Vec<_>>().join(","));
    sink.emit("sigma_t", &table, &mut m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Scenario {
    /// Free Gaussian under the full quantum diffusion equation.
    Eq9Free,
    /// Free Gaussian under the Gaussian-closure Smoluchowski equation.
    Eq10Free,
    /// Hydrogen on a Ni(111)-like cosine, effective diffusivity.
    Eq16Cosine,
}

impl Scenario {
    fn name(self) -> &'static str {
        match self {
            Scenario::Eq9Free => "eq9_free",
            Scenario::Eq10Free => "eq10_free",
            Scenario::Eq16Cosine => "eq16_cosine",
        }
    }
}

#[derive(Debug, Args)]
pub struct PdeCheckArgs {
    #[arg(long, value_enum)]
    pub scenario: Scenario,
    /// Cell count (free runs) or cells per period (cosine run).
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Multiple of the default run length; 0 reports the initial state.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Number of output times.
    #[arg(long)]
    pub outputs: Option<usize>,
}

pub fn pde_check(a: &PdeCheckArgs, sink: &Sink) -> Result<PathBuf> {
    let c = sink.config;
    let base = match a.scenario {
        Scenario::Eq16Cosine => ScenarioConfig::semiclassical_default(),
        _ => ScenarioConfig::quantum_default(),
    };
    let cfg = ScenarioConfig {
        cells: pick(a.resolution, c.usize("resolution")?, base.cells),
        duration: pick(a.duration, c.f64("duration")?, base.duration),
        outputs: pick(a.outputs, c.usize("outputs")?, base.outputs),
    };
    if !(cfg.duration >= 0.0 && cfg.duration.is_finite()) || cfg.outputs == 0 {
        return Err(usage("duration must be non-negative and outputs at least 1"));
    }
    let mut table = Table::new(&["t", "mean", "sigma_sq", "kurtosis", "mass", "sigma_sq_reference"]);
    let mut summary: Vec<(&str, String)> = Vec::new();
    let initial_only = cfg.duration == 0.0;
    let (evolution, passed) = match a.scenario {
        Scenario::Eq9Free | Scenario::Eq10Free => {
            let sys = verify::free_electron();
            let r = if a.scenario == Scenario::Eq9Free {
                verify::quantum_free(&sys, &cfg)?
            } else {
                verify::closure_free(&sys, &cfg)?
            };
            summary.push(("sigma4_law_max_deviation", sci(r.max_law_error)));
            summary.push(("sigma4_law_tolerance", sci(verify::FREE_LAW_TOL)));
            summary.push(("kurtosis_max_deviation", sci(r.max_kurtosis_error)));
            summary.push(("mass_max_error", sci(r.mass_error)));
            let passed = r.passed();
            (r.evolution, passed)
        }
        Scenario::Eq16Cosine => {
            let sys = verify::nickel_hydrogen(verify::SEMICLASSICAL_TEMPERATURE)?;
            let r = verify::semiclassical_deff(&sys, EffectiveMode::Linearized, &cfg)?;
            if !initial_only {
                summary.push(("d_eff_measured", sci(r.measured)));
            }
            summary.push(("d_eff_lifson_jackson", sci(r.expected)));
            if !initial_only {
                summary.push(("d_eff_relative_error", sci(r.relative_error)));
            }
            summary.push(("d_eff_tolerance", sci(verify::DEFF_TOL)));
            summary.push(("travel_periods", sci(r.travel_periods)));
            summary.push(("mass_max_error", sci(r.mass_error)));
            let passed = r.passed();
            (r.evolution, passed)
        }
    };
    let s0 = evolution.snapshots[0].moments.sigma_sq;
    let t0 = evolution.snapshots[0].time;
    let reference = |t: f64| -> f64 {
        match a.scenario {
            Scenario::Eq16Cosine => {
                let sys = verify::nickel_hydrogen(verify::SEMICLASSICAL_TEMPERATURE).expect("valid defaults");
                s0 + 2.0 * sys.lifson_jackson_deff(EffectiveMode::Linearized).expect("converges") * (t - t0)
            }
            _ => {
                let sys = verify::free_electron();
                (s0 * s0 + sys.hbar * sys.hbar * (t - t0) / (sys.mass * sys.friction)).sqrt()
            }
        }
    };
    for s in &evolution.snapshots {
        table.push(vec![
            sci(s.time),
            sci(s.moments.mean),
            sci(s.moments.sigma_sq),
            sci(s.moments.kurtosis),
            sci(s.mass),
            sci(reference(s.time)),
        ]);
    }
    let status = if initial_only {
        "initial"
    } else if passed {
        "pass"
    } else {
        "fail"
    };
    println!("scenario={}", a.scenario.name());
    println!("cells={}", evolution.grid.n_cells);
    println!("steps={}", evolution.steps);
    let m0 = evolution.snapshots[0].moments;
    println!("initial_sigma_sq={}", sci(m0.sigma_sq));
    println!("initial_kurtosis={}", sci(m0.kurtosis));
    for (k, v) in &summary {
        println!("{k}={v}");
    }
    println!("status={status}");

    let mut m = RunManifest::new("pde-check");
    m.param("scenario", a.scenario.name())
        .param("resolution", cfg.cells.to_string())
        .num("duration", cfg.duration)
        .param("outputs", cfg.outputs.to_string());
    for (k, v) in &summary {
        m.param(k, v.clone());
    }
    m.param("status", status);
    let stem = format!("pde_{}", a.scenario.name());
    let path = sink.emit(&stem, &table, &mut m)?;
    if status == "fail" {
        return Err(CheckFailed(format!("{} outside tolerance", a.scenario.name())).into());
    }
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnergyUnit {
    #[value(name = "kJ/mol", alias = "kj/mol", alias = "kj_mol")]
    KjPerMol,
    #[value(name = "J/mol", alias = "j/mol", alias = "j_mol")]
    JPerMol,
    /// Joule per particle.
    #[value(name = "J", alias = "j")]
    Joule,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Classical activation energy, in --ea-unit.
    #[arg(long)]
    pub ea: Option<f64>,
    #[arg(long, value_enum)]
    pub ea_unit: Option<EnergyUnit>,
    /// Pre-exponential factor, m^2/s.
    #[arg(long)]
    pub d0: Option<f64>,
    /// Particle symbol or mass in kg.
    #[arg(long)]
    pub mass: Option<String>,
    /// Lattice period, Å, for the crossover temperatures.
    #[arg(long)]
    pub period_angstrom: Option<f64>,
}

pub fn fit(a: &FitArgs, sink: &Sink) -> Result<PathBuf> {
    let c = sink.config;
    let ea = pick(a.ea, c.f64("ea")?, NI_EA_KJ_MOL);
    let unit = match (a.ea_unit, c.string("ea_unit")?) {
        (Some(u), _) => u,
        (None, Some(s)) => EnergyUnit::from_str(&s, true).map_err(|e| usage(format!("config key `ea_unit`: {e}")))?,
        (None, None) => EnergyUnit::KjPerMol,
    };
    let d0 = pick(a.d0, c.f64("d0")?, NI_D0);
    let (label, mass) = parse_mass(&pick(a.mass.clone(), c.string("mass")?, "H".to_string()))?;
    let period = pick(a.period_angstrom, c.f64("period_angstrom")?, NI_PERIOD_ANGSTROM);
    let energy = match unit {
        EnergyUnit::KjPerMol => Energy::kj_per_mol(ea),
        EnergyUnit::JPerMol => Energy::JoulePerMole(ea),
        EnergyUnit::Joule => Energy::Joule(ea),
    };
    let f = fit_from_arrhenius(energy, d0, mass)?;
    let q = CosinePotential::with_period(f.amplitude, period * ANGSTROM)?.wavenumber;
    let mut table = Table::new(&["A", "b", "m_over_b", "T_q", "T_free"]);
    table.push(vec![
        sci(f.amplitude),
        sci(f.friction),
        sci(f.relaxation_time),
        sci(crossover_temperature(mass, q)),
        sci(free_diffusion_temperature(mass, q)),
    ]);
    let mut m = RunManifest::new("fit");
    m.num("ea", ea)
        .param(
            "ea_unit",
            unit.to_possible_value().expect("named").get_name().to_string(),
        )
        .num("d0", d0)
        .param("mass_label", label)
        .num("mass", mass)
        .num("period_angstrom", period);
    sink.emit("fit", &table, &mut m)
}
