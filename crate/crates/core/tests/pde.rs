use qdiff_core::error::Error;
use qdiff_core::pde::{self, DensityField, EvolveOptions, FluxScheme, Grid1D, TimeStepping};
use qdiff_core::potential::{CosinePotential, PeriodicPotential};
use qdiff_core::thermo::{EffectiveMode, EffectivePotentialSpec};
use qdiff_core::verify::{self, ScenarioConfig};

fn cfg(cells: usize) -> ScenarioConfig {
    ScenarioConfig {
        cells,
        ..ScenarioConfig::quantum_default()
    }
}

#[test]
fn quantum_free_follows_sigma4_law() {
    let sys = verify::free_electron();
    let r = verify::quantum_free(&sys, &cfg(256)).unwrap();
    assert!(r.max_law_error < 0.01, "{}", r.max_law_error);
    assert!(r.max_kurtosis_error < 0.02, "{}", r.max_kurtosis_error);
    assert!(r.mass_error < 1e-8);
    assert_eq!(r.evolution.widenings, 0);
}

#[test]
fn quantum_free_converges_at_second_order() {
    let sys = verify::free_electron();
    let coarse = verify::quantum_free(&sys, &cfg(128)).unwrap().max_law_error;
    let fine = verify::quantum_free(&sys, &cfg(256)).unwrap().max_law_error;
    let order = (coarse / fine).log2();
    assert!(order > 1.7, "order {order}");
}

#[test]
fn closure_agrees_with_quantum_on_gaussians() {
    let sys = verify::free_electron();
    let q = verify::quantum_free(&sys, &cfg(256)).unwrap();
    let c = verify::closure_free(&sys, &cfg(256)).unwrap();
    assert!(c.passed());
    for (a, b) in q.evolution.snapshots.iter().zip(&c.evolution.snapshots) {
        assert_eq!(a.time, b.time);
        assert!((a.moments.sigma_sq / b.moments.sigma_sq - 1.0).abs() < 0.01);
    }
}

#[test]
fn closure_temperature_is_self_consistent() {
    let sys = verify::free_electron();
    let c = verify::closure_free(&sys, &cfg(128)).unwrap();
    let k = sys.hbar * sys.hbar / (4.0 * sys.mass);
    for s in &c.evolution.snapshots {
        assert!((s.thermal_energy * s.moments.sigma_sq / k - 1.0).abs() < 1e-12);
    }
}

#[test]
fn closure_in_cosine_tracks_rate_law() {
    let r = verify::closure_cosine(1.0, 16, 1.0).unwrap();
    assert!(r.max_relative_error < 0.01, "{}", r.max_relative_error);
    assert!(r.mass_error < 1e-8);
    let last = r.evolution.snapshots.last().unwrap();
    assert!(last.moments.sigma_sq > 1.4 * r.evolution.snapshots[0].moments.sigma_sq);
}

#[test]
fn semiclassical_deff_matches_lifson_jackson() {
    let sys = verify::nickel_hydrogen(verify::SEMICLASSICAL_TEMPERATURE).unwrap();
    for mode in [EffectiveMode::Linearized, EffectiveMode::FullCubic] {
        let r = verify::semiclassical_deff(&sys, mode, &ScenarioConfig::semiclassical_default()).unwrap();
        assert!(r.passed(), "{mode:?}: {} vs {}", r.measured, r.expected);
        assert!(r.travel_periods >= 20.0);
    }
}

#[test]
fn semiclassical_free_limit() {
    let pot = CosinePotential::with_period(0.0, verify::NI_PERIOD).unwrap();
    let sys = qdiff_core::thermo::ThermoSystem::new(qdiff_core::constants::M_HYDROGEN, verify::NI_FRICTION, 400.0, pot)
        .unwrap();
    let cfg = ScenarioConfig {
        cells: 8,
        ..ScenarioConfig::semiclassical_default()
    };
    let r = verify::semiclassical_deff(&sys, EffectiveMode::Linearized, &cfg).unwrap();
    assert!((r.measured / sys.einstein_d() - 1.0).abs() < 0.02);
}

#[test]
fn equilibrium_is_stationary() {
    let sys = verify::nickel_hydrogen(300.0).unwrap();
    for stepping in [TimeStepping::Explicit, TimeStepping::Implicit] {
        let drift = verify::equilibrium_drift(&sys, EffectiveMode::FullCubic, 128, stepping).unwrap();
        assert!(drift < 1e-6, "{stepping:?}: {drift}");
    }
}

#[test]
fn zero_time_returns_initial_field() {
    let sys = verify::free_electron();
    let grid = Grid1D::line_for_sigma(1e-9, 128).unwrap();
    let rho0 = DensityField::gaussian(&grid, 0.0, sys.sigma0_sq);
    let ev = pde::evolve_quantum(&rho0, &grid, &sys, &|_| 0.0, &EvolveOptions::new(0.0)).unwrap();
    assert_eq!(ev.final_field, rho0);
    assert_eq!(ev.snapshots.len(), 1);
    assert_eq!(ev.steps, 0);
}

#[test]
fn oversized_step_is_rejected() {
    let sys = verify::free_electron();
    let grid = Grid1D::line_for_sigma(2e-9, 128).unwrap();
    let rho0 = DensityField::gaussian(&grid, 0.0, sys.sigma0_sq);
    let t = verify::free_law_time(&sys);
    let opts = EvolveOptions::new(t).with_dt(t / 10.0);
    assert!(matches!(
        pde::evolve_quantum(&rho0, &grid, &sys, &|_| 0.0, &opts),
        Err(Error::Stability { .. })
    ));
    let opts = opts.with_dt(t).with_scheme(FluxScheme::Central, TimeStepping::Explicit);
    assert!(matches!(
        pde::evolve_closure(&rho0, &grid, &sys, &|_| 0.0, &opts),
        Err(Error::Stability { .. })
    ));
}

#[test]
fn narrow_line_is_widened() {
    let sys = verify::free_electron();
    // Half-width of only 5 sigma at the end of the run.
    let t = 3.0 * verify::free_law_time(&sys);
    let grid = Grid1D::line(5.0 * (2.0 * sys.sigma0_sq).sqrt(), 128).unwrap();
    let rho0 = DensityField::gaussian(&grid, 0.0, sys.sigma0_sq);
    let opts = EvolveOptions::new(t).with_outputs(20);
    let ev = pde::evolve_closure(&rho0, &grid, &sys, &|_| 0.0, &opts).unwrap();
    assert!(ev.widenings > 0);
    assert!(ev.grid.n_cells > 128);
    assert!(ev.max_mass_error() < 1e-8);
    let last = ev.snapshots.last().unwrap().moments.sigma_sq;
    assert!((last / (2.0 * sys.sigma0_sq) - 1.0).abs() < 0.01);
}

#[test]
fn periodic_relaxation_conserves_mass_and_stays_positive() {
    let sys = verify::nickel_hydrogen(200.0).unwrap();
    let spec = EffectivePotentialSpec::new(&sys, EffectiveMode::FullCubic);
    let grid = Grid1D::periodic(spec.period(), 64).unwrap();
    // start far from equilibrium: all mass on the barrier
    let rho0 = DensityField::from_fn(&grid, |x| (-(x * x) / 1e-22).exp());
    let t = 2.0 * spec.period() * spec.period() / sys.einstein_d();
    for flux in [FluxScheme::Central, FluxScheme::ExponentialFitting] {
        for stepping in [TimeStepping::Explicit, TimeStepping::Implicit] {
            let opts = EvolveOptions::new(t).with_outputs(10).with_scheme(flux, stepping);
            let ev = pde::evolve_semiclassical(&rho0, &grid, &sys, &spec, &opts).unwrap();
            assert!(ev.max_mass_error() < 1e-8);
            assert!(ev.final_field.rho.iter().all(|&r| r > 0.0));
        }
    }
}
