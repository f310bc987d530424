use core::fmt;

/// Failures raised by the numerical routines.
///
/// Every variant is a hard failure. Soft out-of-validity conditions are
/// reported through [`Validity`] instead.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside the mathematical domain of the operation.
    Domain { what: &'static str, value: f64 },
    /// The root bracket does not contain a sign change.
    NoSignChange { lo: f64, f_lo: f64, hi: f64, f_hi: f64 },
    /// An iterative method ran out of iterations.
    NoConvergence { what: &'static str, iterations: usize },
    /// The dispersion variable collapsed towards the `xi^-3` singularity.
    Singularity { tau: f64, xi: f64 },
    /// The adaptive step size fell below the representable resolution.
    StepUnderflow { t: f64, h: f64 },
    /// The interior maximum of the spreading rate lies on the sampled boundary.
    HorizonTooShort { tau_end: f64 },
    /// Adaptive quadrature did not reach the requested tolerance.
    Integration { estimate: f64, error: f64 },
    /// A sampled potential has too few points for derivative estimation.
    Resolution { samples: usize, required: usize },
    /// An explicit time step exceeds the stability bound of the scheme.
    Stability { dt: f64, limit: f64 },
    /// A PDE step produced negative density even after repeated halving.
    NegativeDensity { time: f64, retries: usize },
    /// The semiclassical tunneling correction is outside its domain (`lambda_T^2 q^2 >= 2`).
    NotSemiclassical { tq_factor: f64 },
    /// Logarithmic asymptote requested below its domain threshold.
    LogDomain { t: f64, threshold: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value:e}"),
            Error::NoSignChange { lo, f_lo, hi, f_hi } => {
                write!(f, "no sign change in bracket [{lo:e}, {hi:e}] (f = {f_lo:e}, {f_hi:e})")
            }
            Error::NoConvergence { what, iterations } => {
                write!(f, "{what} did not converge in {iterations} iterations")
            }
            Error::Singularity { tau, xi } => {
                write!(f, "dispersion collapsed to xi = {xi:e} at tau = {tau:e}")
            }
            Error::StepUnderflow { t, h } => write!(f, "step size underflow h = {h:e} at t = {t:e}"),
            Error::HorizonTooShort { tau_end } => write!(
                f,
                "rate maximum sits on the boundary of the sampled range (tau_end = {tau_end:e})"
            ),
            Error::Integration { estimate, error } => write!(
                f,
                "quadrature failed to converge (estimate {estimate:e}, error {error:e})"
            ),
            Error::Resolution { samples, required } => write!(
                f,
                "sampled potential has {samples} points, at least {required} required"
            ),
            Error::Stability { dt, limit } => {
                write!(f, "time step {dt:e} exceeds stability limit {limit:e}")
            }
            Error::NegativeDensity { time, retries } => {
                write!(f, "negative density at t = {time:e} after {retries} step halvings")
            }
            Error::NotSemiclassical { tq_factor } => write!(
                f,
                "lambda_T^2 q^2 = {tq_factor:e} >= 2: outside the semiclassical domain"
            ),
            Error::LogDomain { t, threshold } => write!(
                f,
                "t = {t:e} s is not above the logarithmic-law threshold {threshold:e} s"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

/// A soft warning attached to a value computed outside the regime where
/// the underlying approximation is expected to hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Validity {
    /// The `(d xi^2/d tau)_max = 1/(2 xi0^2)` fit is only claimed for `xi0^2 <= 0.1`.
    FitRange { xi0_sq: f64 },
    /// The Arrhenius form needs `beta A (1 - lambda_T^2 q^2 / 2) >~ 1`.
    LowBarrier { reduced_barrier: f64 },
    /// Below the crossover temperature the quasi-equilibrium picture degrades.
    BelowCrossover { temperature: f64, crossover: f64 },
    /// `lambda_T^2 q^2 >= 2`: the tunneling-corrected law does not apply.
    NotSemiclassical { tq_factor: f64 },
}

impl fmt::Display for Validity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Validity::FitRange { xi0_sq } => {
                write!(f, "xi0^2 = {xi0_sq} is outside the fit range xi0^2 <= 0.1")
            }
            Validity::LowBarrier { reduced_barrier } => {
                write!(f, "reduced barrier {reduced_barrier} < 1")
            }
            Validity::BelowCrossover { temperature, crossover } => {
                write!(f, "T = {temperature} K below crossover {crossover} K")
            }
            Validity::NotSemiclassical { tq_factor } => {
                write!(f, "lambda_T^2 q^2 = {tq_factor} >= 2")
            }
        }
    }
}

impl Validity {
    /// Short machine-readable tag used in tabulated output.
    pub fn tag(&self) -> &'static str {
        match self {
            Validity::FitRange { .. } => "fit_range",
            Validity::LowBarrier { .. } => "low_barrier",
            Validity::BelowCrossover { .. } => "below_crossover",
            Validity::NotSemiclassical { .. } => "not_semiclassical",
        }
    }
}

/// A value together with an optional validity warning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checked<T> {
    pub value: T,
    pub warning: Option<Validity>,
}

impl<T> Checked<T> {
    pub fn ok(value: T) -> Self {
        Checked { value, warning: None }
    }

    pub fn warn(value: T, warning: Validity) -> Self {
        Checked {
            value,
            warning: Some(warning),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.warning.is_none()
    }
}
