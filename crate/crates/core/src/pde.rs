//! One-dimensional finite-volume evolution of the overdamped density
//! equations, used to check the reduced models from first principles.
//!
//! Three equations share one conservative flux-form engine:
//!
//! - the quantum diffusion equation `d_t rho = d_x[rho d_x(U + Q) / b]`,
//!   with the Bohm potential `Q = -hbar^2 (sqrt rho)'' / (2 m sqrt rho)`;
//! - its Gaussian closure, a Smoluchowski equation with temperature
//!   `hbar^2 / (4 m sigma^2)` recomputed from the density every step;
//! - the semiclassical Smoluchowski equation with the effective potential
//!   at the physical temperature.
//!
//! Fluxes live on cell faces and the boundary faces of a truncated line
//! carry no flux, so total mass is conserved to rounding.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::potential::PeriodicPotential;
use crate::system::PhysicalSystem;
use crate::thermo::{EffectivePotentialSpec, ThermoSystem};

/// Smallest density kept on the grid.
pub const RHO_FLOOR: f64 = 1e-300;
pub const MIN_CELLS: usize = 64;
/// Boundary-to-peak density ratio above which a truncated line is widened.
pub const LEAK_RATIO: f64 = 1e-10;
/// Half-width of a truncated line in units of the largest expected sigma.
pub const LINE_WIDTH_SIGMAS: f64 = 12.0;

/// Spatial domain of a [`Grid1D`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// `[0, length)` with periodic wrap.
    Periodic { length: f64 },
    /// `[-half_width, half_width]` with closed ends.
    Line { half_width: f64 },
}

/// Uniform cell-centred grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub domain: Domain,
    pub n_cells: usize,
    pub dx: f64,
}

impl Grid1D {
    pub fn periodic(length: f64, n_cells: usize) -> Result<Self> {
        Self::check(length, n_cells)?;
        Ok(Grid1D {
            domain: Domain::Periodic { length },
            n_cells,
            dx: length / n_cells as f64,
        })
    }

    pub fn line(half_width: f64, n_cells: usize) -> Result<Self> {
        Self::check(half_width, n_cells)?;
        Ok(Grid1D {
            domain: Domain::Line { half_width },
            n_cells,
            dx: 2.0 * half_width / n_cells as f64,
        })
    }

    /// Truncated line of half-width `12 * max_sigma`.
    pub fn line_for_sigma(max_sigma: f64, n_cells: usize) -> Result<Self> {
        Self::line(LINE_WIDTH_SIGMAS * max_sigma, n_cells)
    }

    fn check(size: f64, n_cells: usize) -> Result<()> {
        if n_cells < MIN_CELLS {
            return Err(Error::Domain {
                what: "cell count",
                value: n_cells as f64,
            });
        }
        if !(size.is_finite() && size > 0.0) {
            return Err(Error::Domain {
                what: "domain size",
                value: size,
            });
        }
        Ok(())
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.domain, Domain::Periodic { .. })
    }

    /// Position of cell `i`. Periodic cells start at `x = 0`; line cells are
    /// centred in their intervals.
    pub fn x(&self, i: usize) -> f64 {
        match self.domain {
            Domain::Periodic { .. } => self.dx * i as f64,
            Domain::Line { half_width } => -half_width + self.dx * (i as f64 + 0.5),
        }
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.x(i)).collect()
    }

    fn widened(&self, extra_each_side: usize) -> Grid1D {
        match self.domain {
            Domain::Periodic { .. } => *self,
            Domain::Line { half_width } => Grid1D {
                domain: Domain::Line {
                    half_width: half_width + self.dx * extra_each_side as f64,
                },
                n_cells: self.n_cells + 2 * extra_each_side,
                dx: self.dx,
            },
        }
    }
}

/// Probability density per cell at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub rho: Vec<f64>,
    pub time: f64,
}

impl DensityField {
    /// Samples `f` on the grid and normalises to unit discrete mass.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: &Grid1D, f: F) -> Self {
        let mut rho: Vec<f64> = grid.positions().into_iter().map(|x| f(x).max(RHO_FLOOR)).collect();
        let mass: f64 = rho.iter().sum::<f64>() * grid.dx;
        rho.iter_mut().for_each(|r| *r /= mass);
        DensityField { rho, time: 0.0 }
    }

    /// Gaussian of the given mean and variance.
    pub fn gaussian(grid: &Grid1D, mean: f64, sigma_sq: f64) -> Self {
        Self::from_fn(grid, |x| (-(x - mean) * (x - mean) / (2.0 * sigma_sq)).exp())
    }

    /// Equilibrium `exp(-beta U)` of a potential.
    pub fn boltzmann<F: Fn(f64) -> f64>(grid: &Grid1D, potential: F, beta: f64) -> Self {
        let u: Vec<f64> = grid.positions().into_iter().map(&potential).collect();
        let u_min = u.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut field = DensityField {
            rho: u.iter().map(|&v| (-beta * (v - u_min)).exp().max(RHO_FLOOR)).collect(),
            time: 0.0,
        };
        let mass = field.mass(grid);
        field.rho.iter_mut().for_each(|r| *r /= mass);
        field
    }

    pub fn mass(&self, grid: &Grid1D) -> f64 {
        self.rho.iter().sum::<f64>() * grid.dx
    }
}

/// Low-order moments of a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub sigma_sq: f64,
    pub kurtosis: f64,
}

/// Mean, variance and kurtosis of `field` by midpoint quadrature, normalised
/// by the discrete mass.
pub fn measure_moments(field: &DensityField, grid: &Grid1D) -> Moments {
    let xs = grid.positions();
    let mass: f64 = field.rho.iter().sum();
    let mean = xs.iter().zip(&field.rho).map(|(x, r)| x * r).sum::<f64>() / mass;
    let (m2, m4) = xs.iter().zip(&field.rho).fold((0.0, 0.0), |(m2, m4), (x, r)| {
        let d2 = (x - mean) * (x - mean);
        (m2 + d2 * r, m4 + d2 * d2 * r)
    });
    let sigma_sq = m2 / mass;
    Moments {
        mean,
        sigma_sq,
        kurtosis: m4 / mass / (sigma_sq * sigma_sq),
    }
}

/// Face-flux discretisation of the drift-diffusion equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluxScheme {
    /// Second-order central flux.
    #[default]
    Central,
    /// Exponentially fitted (Scharfetter-Gummel / Chang-Cooper) flux; the
    /// discrete Boltzmann density is an exact steady state.
    ExponentialFitting,
}

/// Time integration of the drift-diffusion equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeStepping {
    /// Forward Euler with a checked stability bound.
    #[default]
    Explicit,
    /// Backward Euler; coefficients that depend on the density are frozen at
    /// the start of the step.
    Implicit,
}

/// Controls for an evolution run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub t_end: f64,
    /// Time step; `None` picks a stable step (explicit) or `t_end / 2000` (implicit).
    pub dt: Option<f64>,
    pub flux: FluxScheme,
    pub stepping: TimeStepping,
    /// Number of equal output intervals.
    pub outputs: usize,
    /// How often a step may be halved after producing negative density.
    pub max_halvings: usize,
    /// Keep the full density at every output time.
    pub keep_fields: bool,
}

impl EvolveOptions {
    pub fn new(t_end: f64) -> Self {
        EvolveOptions {
            t_end,
            dt: None,
            flux: FluxScheme::default(),
            stepping: TimeStepping::default(),
            outputs: 100,
            max_halvings: 8,
            keep_fields: false,
        }
    }

    pub fn with_dt(self, dt: f64) -> Self {
        EvolveOptions { dt: Some(dt), ..self }
    }

    pub fn with_scheme(self, flux: FluxScheme, stepping: TimeStepping) -> Self {
        EvolveOptions { flux, stepping, ..self }
    }

    pub fn with_outputs(self, outputs: usize) -> Self {
        EvolveOptions {
            outputs: outputs.max(1),
            ..self
        }
    }
}

/// Observables recorded at an output time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub mass: f64,
    pub moments: Moments,
    /// Temperature-like energy driving diffusion at this time, J.
    pub thermal_energy: f64,
}

/// Result of an evolution run.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    /// Final grid; a truncated line may have been widened during the run.
    pub grid: Grid1D,
    pub snapshots: Vec<Snapshot>,
    pub fields: Vec<DensityField>,
    pub final_field: DensityField,
    pub steps: usize,
    pub widenings: usize,
}

impl Evolution {
    /// Largest relative deviation of the discrete mass from one.
    pub fn max_mass_error(&self) -> f64 {
        self.snapshots.iter().map(|s| (s.mass - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Half the least-squares slope of `sigma^2(t)` over the last `fraction`
    /// of the snapshots.
    pub fn effective_diffusivity(&self, fraction: f64) -> f64 {
        let n = self.snapshots.len();
        let start = ((1.0 - fraction) * n as f64).floor() as usize;
        let pts = &self.snapshots[start.min(n.saturating_sub(2))..];
        let m = pts.len() as f64;
        let tm = pts.iter().map(|s| s.time).sum::<f64>() / m;
        let ym = pts.iter().map(|s| s.moments.sigma_sq).sum::<f64>() / m;
        let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(sxy, sxx), s| {
            let dt = s.time - tm;
            (sxy + dt * (s.moments.sigma_sq - ym), sxx + dt * dt)
        });
        0.5 * sxy / sxx
    }
}

/// Bernoulli function `z / (e^z - 1)`.
fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        1.0 - 0.5 * z + z * z / 12.0
    } else {
        z / z.exp_m1()
    }
}

/// Tridiagonal rate matrix `L` with `d rho_i/dt = lo_i rho_{i-1} + di_i rho_i + up_i rho_{i+1}`.
/// For periodic grids `lo_0` couples to the last cell and `up_{n-1}` to the first.
struct RateMatrix {
    lo: Vec<f64>,
    di: Vec<f64>,
    up: Vec<f64>,
    periodic: bool,
}

impl RateMatrix {
    /// Drift-diffusion operator `d_x[D (rho' + rho U' / theta)]` with node
    /// potential `u`, thermal energy `theta` and diffusivity `d`.
    fn drift_diffusion(grid: &Grid1D, u: &[f64], theta: f64, d: f64, flux: FluxScheme) -> Self {
        let n = grid.n_cells;
        let periodic = grid.is_periodic();
        let k = d / (grid.dx * grid.dx);
        // Face i+1/2 flux: k dx (a_i rho_i - g_i rho_{i+1}); a_i / g_i = e^{-delta}
        // for the fitted flux, so the discrete Boltzmann density carries none.
        let faces = if periodic { n } else { n - 1 };
        let mut a = vec![0.0; n];
        let mut g = vec![0.0; n];
        for i in 0..faces {
            let j = (i + 1) % n;
            let delta = (u[j] - u[i]) / theta;
            let (ai, gi) = match flux {
                FluxScheme::Central => (1.0 - 0.5 * delta, 1.0 + 0.5 * delta),
                FluxScheme::ExponentialFitting => (bernoulli(delta), bernoulli(-delta)),
            };
            a[i] = k * ai;
            g[i] = k * gi;
        }
        let mut lo = vec![0.0; n];
        let mut di = vec![0.0; n];
        let mut up = vec![0.0; n];
        for i in 0..n {
            // outflow through the right face
            di[i] -= a[i];
            up[i] += g[i];
            // exchange through the left face
            let left = if i > 0 {
                Some(i - 1)
            } else if periodic {
                Some(n - 1)
            } else {
                None
            };
            if let Some(l) = left {
                lo[i] += a[l];
                di[i] -= g[l];
            }
        }
        RateMatrix { lo, di, up, periodic }
    }

    /// Largest explicit step keeping forward Euler positivity-preserving.
    fn explicit_limit(&self) -> f64 {
        let worst = self.di.iter().fold(0.0f64, |m, d| m.max(-d));
        if worst > 0.0 {
            1.0 / worst
        } else {
            f64::INFINITY
        }
    }

    fn apply(&self, rho: &[f64], out: &mut [f64]) {
        let n = rho.len();
        for i in 0..n {
            let left = if i > 0 {
                rho[i - 1]
            } else if self.periodic {
                rho[n - 1]
            } else {
                0.0
            };
            let right = if i + 1 < n {
                rho[i + 1]
            } else if self.periodic {
                rho[0]
            } else {
                0.0
            };
            out[i] = self.lo[i] * left + self.di[i] * rho[i] + self.up[i] * right;
        }
    }

    /// Solves `(I - dt L) x = rhs`.
    fn solve_implicit(&self, dt: f64, rhs: &[f64]) -> Vec<f64> {
        let a: Vec<f64> = self.lo.iter().map(|v| -dt * v).collect();
        let b: Vec<f64> = self.di.iter().map(|v| 1.0 - dt * v).collect();
        let c: Vec<f64> = self.up.iter().map(|v| -dt * v).collect();
        if self.periodic {
            solve_cyclic(&a, &b, &c, rhs)
        } else {
            solve_tridiagonal(&a, &b, &c, rhs)
        }
    }
}

/// Thomas algorithm; `a[0]` and `c[n-1]` are ignored.
fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut cp = vec![0.0; n];
    let mut x = vec![0.0; n];
    cp[0] = c[0] / b[0];
    x[0] = d[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        x[i] = (d[i] - a[i] * x[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        x[i] -= cp[i] * x[i + 1];
    }
    x
}

/// Cyclic tridiagonal solve by Sherman-Morrison; `a[0]` couples row 0 to the
/// last column and `c[n-1]` couples the last row to column 0.
fn solve_cyclic(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let gamma = -b[0];
    let mut bb = b.to_vec();
    bb[0] = b[0] - gamma;
    bb[n - 1] = b[n - 1] - c[n - 1] * a[0] / gamma;
    let x = solve_tridiagonal(a, &bb, c, d);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = c[n - 1];
    let z = solve_tridiagonal(a, &bb, c, &u);
    let fact = (x[0] + a[0] * x[n - 1] / gamma) / (1.0 + z[0] + a[0] * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

/// Pads `rho` by `extra` cells on each side with the Gaussian tail of the
/// given moments, scaled to meet the old boundary values.
fn pad_gaussian_tail(rho: &[f64], extra: usize, x_first: f64, dx: f64, m: &Moments) -> Vec<f64> {
    let n = rho.len();
    let x_last = x_first + dx * (n - 1) as f64;
    let tail = |edge_value: f64, x_edge: f64, x: f64| {
        let e = (x_edge - m.mean) * (x_edge - m.mean);
        let p = (x - m.mean) * (x - m.mean);
        (edge_value * (-(p - e).max(0.0) / (2.0 * m.sigma_sq)).exp()).max(RHO_FLOOR)
    };
    let mut out = Vec::with_capacity(n + 2 * extra);
    for k in (1..=extra).rev() {
        out.push(tail(rho[0], x_first, x_first - dx * k as f64));
    }
    out.extend_from_slice(rho);
    for k in 1..=extra {
        out.push(tail(rho[n - 1], x_last, x_last + dx * k as f64));
    }
    out
}

/// Mutable state shared by the three evolutions.
struct Runner<'a> {
    grid: Grid1D,
    rho: Vec<f64>,
    u: Vec<f64>,
    potential: &'a dyn Fn(f64) -> f64,
    widenings: usize,
}

impl<'a> Runner<'a> {
    fn new(rho0: &DensityField, grid: &Grid1D, potential: &'a dyn Fn(f64) -> f64) -> Result<Self> {
        if rho0.rho.len() != grid.n_cells {
            return Err(Error::Domain {
                what: "density length",
                value: rho0.rho.len() as f64,
            });
        }
        let rho = rho0.rho.iter().map(|r| r.max(RHO_FLOOR)).collect();
        let u = grid.positions().into_iter().map(potential).collect();
        Ok(Runner {
            grid: *grid,
            rho,
            u,
            potential,
            widenings: 0,
        })
    }

    fn leaking(&self) -> bool {
        if self.grid.is_periodic() {
            return false;
        }
        let peak = self.rho.iter().cloned().fold(0.0, f64::max);
        let edge = self.rho[0].max(self.rho[self.grid.n_cells - 1]);
        edge > LEAK_RATIO * peak
    }

    fn widen(&mut self) {
        let extra = self.grid.n_cells / 4;
        let m = measure_moments(&self.field(0.0), &self.grid);
        self.rho = pad_gaussian_tail(&self.rho, extra, self.grid.x(0), self.grid.dx, &m);
        self.grid = self.grid.widened(extra);
        self.u = self.grid.positions().into_iter().map(self.potential).collect();
        self.widenings += 1;
    }

    fn field(&self, time: f64) -> DensityField {
        DensityField {
            rho: self.rho.clone(),
            time,
        }
    }

    fn snapshot(&self, time: f64, thermal_energy: f64) -> Snapshot {
        let field = DensityField {
            rho: self.rho.clone(),
            time,
        };
        Snapshot {
            time,
            mass: field.mass(&self.grid),
            moments: measure_moments(&field, &self.grid),
            thermal_energy,
        }
    }
}

/// Which equation a run integrates.
enum Model<'s> {
    Quantum { sys: &'s PhysicalSystem },
    Closure { sys: &'s PhysicalSystem },
    Thermal { theta: f64, friction: f64 },
}

impl Model<'_> {
    fn thermal_energy(&self, r: &Runner<'_>) -> f64 {
        match self {
            Model::Quantum { sys } | Model::Closure { sys } => {
                let m = measure_moments(&r.field(0.0), &r.grid);
                sys.hbar * sys.hbar / (4.0 * sys.mass * m.sigma_sq)
            }
            Model::Thermal { theta, .. } => *theta,
        }
    }

    fn friction(&self) -> f64 {
        match self {
            Model::Quantum { sys } | Model::Closure { sys } => sys.friction,
            Model::Thermal { friction, .. } => *friction,
        }
    }
}

/// Explicit step of the quantum diffusion equation. The Bohm potential is
/// evaluated from `ln rho`: `Q = -hbar^2/(8m) [2 (ln rho)'' + ((ln rho)')^2]`.
fn quantum_rate(grid: &Grid1D, rho: &[f64], u: &[f64], sys: &PhysicalSystem, out: &mut [f64]) {
    let n = rho.len();
    let periodic = grid.is_periodic();
    let l: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
    let at = |i: isize| -> f64 {
        if periodic {
            l[i.rem_euclid(n as isize) as usize]
        } else if i < 0 {
            // quadratic ghost extrapolation
            3.0 * l[0] - 3.0 * l[1] + l[2]
        } else if i as usize >= n {
            3.0 * l[n - 1] - 3.0 * l[n - 2] + l[n - 3]
        } else {
            l[i as usize]
        }
    };
    let h = grid.dx;
    let c = sys.hbar * sys.hbar / (8.0 * sys.mass);
    let phi: Vec<f64> = (0..n as isize)
        .map(|i| {
            let d1 = (at(i + 1) - at(i - 1)) / (2.0 * h);
            let d2 = (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (h * h);
            u[i as usize] - c * (2.0 * d2 + d1 * d1)
        })
        .collect();
    let faces = if periodic { n } else { n - 1 };
    out.iter_mut().for_each(|o| *o = 0.0);
    for i in 0..faces {
        let j = (i + 1) % n;
        let flux = -0.5 * (rho[i] + rho[j]) * (phi[j] - phi[i]) / (h * sys.friction);
        out[i] -= flux / h;
        out[j] += flux / h;
    }
}

/// Explicit stability bound of the quantum equation. Linearising the Bohm
/// term about a background with log-gradient `g = (ln rho)'` gives a symbol
/// bounded by `kappa (4/dx^2 + |g|/dx)^2`, `kappa = hbar^2 / (4 m b)`; for a
/// flat background this is the hyperdiffusion limit `dx^4 / (8 kappa)`.
/// A drift limit covers the external potential.
fn quantum_limit(grid: &Grid1D, rho: &[f64], u: &[f64], sys: &PhysicalSystem) -> f64 {
    let kappa = sys.hbar * sys.hbar / (4.0 * sys.mass * sys.friction);
    let h = grid.dx;
    let mut g = rho.windows(2).map(|w| (w[1] / w[0]).ln().abs()).fold(0.0, f64::max);
    if grid.is_periodic() {
        g = g.max((rho[0] / rho[rho.len() - 1]).ln().abs());
    }
    let hyper = 2.0 * h.powi(4) / (kappa * (4.0 + g) * (4.0 + g));
    let max_du = u.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let drift = if max_du > 0.0 {
        h * h * sys.friction / max_du
    } else {
        f64::INFINITY
    };
    hyper.min(drift)
}

fn evolve(
    rho0: &DensityField,
    grid: &Grid1D,
    potential: &dyn Fn(f64) -> f64,
    model: Model<'_>,
    opts: &EvolveOptions,
) -> Result<Evolution> {
    if !(opts.t_end.is_finite() && opts.t_end >= 0.0) {
        return Err(Error::Domain {
            what: "t_end",
            value: opts.t_end,
        });
    }
    let mut r = Runner::new(rho0, grid, potential)?;
    let t0 = rho0.time;
    let mut snapshots = vec![r.snapshot(t0, model.thermal_energy(&r))];
    let mut fields = if opts.keep_fields {
        vec![r.field(t0)]
    } else {
        Vec::new()
    };
    let mut steps = 0usize;
    if opts.t_end == 0.0 {
        return Ok(Evolution {
            grid: r.grid,
            snapshots,
            fields,
            final_field: r.field(t0),
            steps,
            widenings: 0,
        });
    }

    let friction = model.friction();
    let mut rate = vec![0.0; r.rho.len()];
    let outputs = opts.outputs.max(1);
    let interval = opts.t_end / outputs as f64;
    let mut time = t0;

    for k in 1..=outputs {
        let target = t0 + interval * k as f64;
        while time < target {
            if r.leaking() {
                r.widen();
                rate = vec![0.0; r.rho.len()];
            }
            let theta = model.thermal_energy(&r);
            let remaining = target - time;
            match model {
                Model::Quantum { sys } => {
                    let limit = quantum_limit(&r.grid, &r.rho, &r.u, sys);
                    let dt = opts.dt.unwrap_or(0.4 * limit);
                    if dt > limit {
                        return Err(Error::Stability { dt, limit });
                    }
                    let mut h = dt.min(remaining);
                    let mut halvings = 0;
                    loop {
                        quantum_rate(&r.grid, &r.rho, &r.u, sys, &mut rate);
                        let cand: Vec<f64> = r.rho.iter().zip(&rate).map(|(p, q)| p + h * q).collect();
                        if cand.iter().all(|&v| v >= 0.0) {
                            r.rho = cand.into_iter().map(|v| v.max(RHO_FLOOR)).collect();
                            break;
                        }
                        halvings += 1;
                        if halvings > opts.max_halvings {
                            return Err(Error::NegativeDensity {
                                time,
                                retries: opts.max_halvings,
                            });
                        }
                        h *= 0.5;
                    }
                    time = if h == remaining { target } else { time + h };
                }
                Model::Closure { .. } | Model::Thermal { .. } => {
                    let d = theta / friction;
                    let op = RateMatrix::drift_diffusion(&r.grid, &r.u, theta, d, opts.flux);
                    let h = match opts.stepping {
                        TimeStepping::Explicit => {
                            let limit = op.explicit_limit();
                            let dt = opts.dt.unwrap_or(0.9 * limit);
                            if dt > limit {
                                return Err(Error::Stability { dt, limit });
                            }
                            let h = dt.min(remaining);
                            op.apply(&r.rho, &mut rate);
                            let cand: Vec<f64> = r.rho.iter().zip(&rate).map(|(p, q)| p + h * q).collect();
                            if cand.iter().any(|&v| v < 0.0) {
                                return Err(Error::NegativeDensity { time, retries: 0 });
                            }
                            r.rho = cand;
                            h
                        }
                        TimeStepping::Implicit => {
                            let dt = opts.dt.unwrap_or(opts.t_end / 2000.0);
                            let h = dt.min(remaining);
                            r.rho = op.solve_implicit(h, &r.rho);
                            h
                        }
                    };
                    r.rho.iter_mut().for_each(|v| *v = v.max(RHO_FLOOR));
                    time = if h == remaining { target } else { time + h };
                }
            }
            steps += 1;
        }
        snapshots.push(r.snapshot(time, model.thermal_energy(&r)));
        if opts.keep_fields {
            fields.push(r.field(time));
        }
    }
    let final_field = r.field(time);
    Ok(Evolution {
        grid: r.grid,
        snapshots,
        fields,
        final_field,
        steps,
        widenings: r.widenings,
    })
}

/// Evolves the nonlinear quantum diffusion equation (explicit only).
pub fn evolve_quantum(
    rho0: &DensityField,
    grid: &Grid1D,
    sys: &PhysicalSystem,
    potential: &dyn Fn(f64) -> f64,
    opts: &EvolveOptions,
) -> Result<Evolution> {
    evolve(rho0, grid, potential, Model::Quantum { sys }, opts)
}

/// Evolves the Gaussian-closure Smoluchowski equation, recomputing
/// `1/beta_Q = hbar^2 / (4 m sigma^2)` from the density before every step.
pub fn evolve_closure(
    rho0: &DensityField,
    grid: &Grid1D,
    sys: &PhysicalSystem,
    potential: &dyn Fn(f64) -> f64,
    opts: &EvolveOptions,
) -> Result<Evolution> {
    evolve(rho0, grid, potential, Model::Closure { sys }, opts)
}

/// Evolves the semiclassical Smoluchowski equation in the effective potential.
pub fn evolve_semiclassical(
    rho0: &DensityField,
    grid: &Grid1D,
    sys: &ThermoSystem,
    spec: &EffectivePotentialSpec,
    opts: &EvolveOptions,
) -> Result<Evolution> {
    let potential = |x: f64| spec.value(x);
    let model = Model::Thermal {
        theta: 1.0 / sys.beta(),
        friction: sys.friction,
    };
    evolve(rho0, grid, &potential, model, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid1D::periodic(1.0, 32).is_err());
        assert!(Grid1D::line(-1.0, 128).is_err());
        let g = Grid1D::line(2.0, 64).unwrap();
        assert!((g.x(0) + 2.0 - g.dx / 2.0).abs() < 1e-15);
        let p = Grid1D::periodic(2.0, 64).unwrap();
        assert_eq!(p.x(0), 0.0);
    }

    #[test]
    fn moments_of_gaussian() {
        let g = Grid1D::line(12.0, 1024).unwrap();
        let f = DensityField::gaussian(&g, 0.0, 1.0);
        let m = measure_moments(&f, &g);
        assert!(m.mean.abs() < 1e-12);
        assert!((m.sigma_sq - 1.0).abs() < 1e-6);
        assert!((m.kurtosis - 3.0).abs() < 1e-5);
        assert!((f.mass(&g) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn moments_of_uniform_periodic() {
        let g = Grid1D::periodic(3.0, 1024).unwrap();
        let f = DensityField::from_fn(&g, |_| 1.0);
        let m = measure_moments(&f, &g);
        assert!((m.sigma_sq / (9.0 / 12.0) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn cyclic_solver() {
        let n = 7;
        let a: Vec<f64> = (0..n).map(|i| -0.3 - 0.01 * i as f64).collect();
        let b: Vec<f64> = (0..n).map(|i| 2.0 + 0.1 * i as f64).collect();
        let c: Vec<f64> = (0..n).map(|i| -0.5 + 0.02 * i as f64).collect();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 1.5).collect();
        let d: Vec<f64> = (0..n)
            .map(|i| a[i] * x_true[(i + n - 1) % n] + b[i] * x_true[i] + c[i] * x_true[(i + 1) % n])
            .collect();
        let x = solve_cyclic(&a, &b, &c, &d);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_columns_sum_to_zero() {
        for grid in [Grid1D::periodic(1.0, 64).unwrap(), Grid1D::line(1.0, 64).unwrap()] {
            let u: Vec<f64> = grid.positions().iter().map(|x| (6.0 * x).cos()).collect();
            for flux in [FluxScheme::Central, FluxScheme::ExponentialFitting] {
                let op = RateMatrix::drift_diffusion(&grid, &u, 0.7, 1.3, flux);
                let n = grid.n_cells;
                for j in 0..n {
                    let mut e = vec![0.0; n];
                    e[j] = 1.0;
                    let mut out = vec![0.0; n];
                    op.apply(&e, &mut out);
                    let s: f64 = out.iter().sum();
                    assert!(s.abs() < 1e-9 * op.di[j].abs(), "{s}");
                }
            }
        }
    }

    #[test]
    fn padding_decays_from_edge() {
        let rho = vec![1e-3; 10];
        let m = Moments {
            mean: 4.5,
            sigma_sq: 4.0,
            kurtosis: 3.0,
        };
        let out = pad_gaussian_tail(&rho, 3, 0.0, 1.0, &m);
        assert_eq!(out.len(), 16);
        assert!(out[2] < 1e-3 && out[1] < out[2] && out[0] < out[1]);
        assert!(out[13] < 1e-3 && out[14] < out[13]);
        // x = 10 against edge x = 9: exp(-(5.5^2 - 4.5^2) / 8)
        assert!((out[13] / 1e-3 - (-1.25f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn drift_points_downhill() {
        // A single face with U rising to the right pushes mass left.
        let grid = Grid1D::line(1.0, 64).unwrap();
        let u: Vec<f64> = grid.positions().iter().map(|x| 5.0 * x).collect();
        for flux in [FluxScheme::Central, FluxScheme::ExponentialFitting] {
            let op = RateMatrix::drift_diffusion(&grid, &u, 1.0, 1.0, flux);
            let rho = vec![1.0; 64];
            let mut out = vec![0.0; 64];
            op.apply(&rho, &mut out);
            assert!(out[0] > 0.0 && out[63] < 0.0);
        }
    }

    #[test]
    fn fitted_flux_keeps_boltzmann_steady() {
        let grid = Grid1D::periodic(1.0, 64).unwrap();
        let u: Vec<f64> = grid
            .positions()
            .iter()
            .map(|x| 3.0 * (core::f64::consts::TAU * x).cos())
            .collect();
        let rho: Vec<f64> = u.iter().map(|v| (-v).exp()).collect();
        let op = RateMatrix::drift_diffusion(&grid, &u, 1.0, 1.0, FluxScheme::ExponentialFitting);
        let mut out = vec![0.0; 64];
        op.apply(&rho, &mut out);
        for (o, r) in out.iter().zip(&rho) {
            assert!((o / r).abs() < 1e-10);
        }
    }
}
