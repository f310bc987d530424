//! Periodic external potentials.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// A smooth potential with period [`period`](PeriodicPotential::period).
pub trait PeriodicPotential {
    fn period(&self) -> f64;
    /// Potential energy, J.
    fn value(&self, x: f64) -> f64;
    /// First derivative, J/m.
    fn gradient(&self, x: f64) -> f64;
    /// Second derivative, J/m^2.
    fn laplacian(&self, x: f64) -> f64;
}

/// `U(x) = A cos(q x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosinePotential {
    /// Amplitude `A`, J.
    pub amplitude: f64,
    /// Wavenumber `q`, 1/m.
    pub wavenumber: f64,
}

impl CosinePotential {
    pub fn new(amplitude: f64, wavenumber: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::Domain {
                what: "potential amplitude",
                value: amplitude,
            });
        }
        if !(wavenumber.is_finite() && wavenumber > 0.0) {
            return Err(Error::Domain {
                what: "wavenumber",
                value: wavenumber,
            });
        }
        Ok(CosinePotential { amplitude, wavenumber })
    }

    /// Cosine with the given spatial period instead of a wavenumber.
    pub fn with_period(amplitude: f64, period: f64) -> Result<Self> {
        Self::new(amplitude, 2.0 * PI / period)
    }
}

impl PeriodicPotential for CosinePotential {
    fn period(&self) -> f64 {
        2.0 * PI / self.wavenumber
    }

    fn value(&self, x: f64) -> f64 {
        self.amplitude * (self.wavenumber * x).cos()
    }

    fn gradient(&self, x: f64) -> f64 {
        -self.amplitude * self.wavenumber * (self.wavenumber * x).sin()
    }

    fn laplacian(&self, x: f64) -> f64 {
        -self.wavenumber * self.wavenumber * self.value(x)
    }
}

/// Minimum node count for [`SampledPotential`].
pub const MIN_SAMPLES: usize = 8;

/// A periodic potential known at `n` equally spaced nodes `x_i = i L / n`.
///
/// Node derivatives come from fourth-order periodic central differences.
/// Values between nodes use cubic Hermite interpolation; derivatives between
/// nodes are interpolated linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPotential {
    period: f64,
    values: Vec<f64>,
    gradients: Vec<f64>,
    laplacians: Vec<f64>,
}

impl SampledPotential {
    pub fn new(period: f64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < MIN_SAMPLES {
            return Err(Error::Resolution {
                samples: n,
                required: MIN_SAMPLES,
            });
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::Domain {
                what: "period",
                value: period,
            });
        }
        let h = period / n as f64;
        let at = |i: isize| values[i.rem_euclid(n as isize) as usize];
        let gradients = (0..n as isize)
            .map(|i| (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h))
            .collect();
        let laplacians = (0..n as isize)
            .map(|i| (-at(i - 2) + 16.0 * at(i - 1) - 30.0 * at(i) + 16.0 * at(i + 1) - at(i + 2)) / (12.0 * h * h))
            .collect();
        Ok(SampledPotential {
            period,
            values,
            gradients,
            laplacians,
        })
    }

    /// Samples `pot` at `n` nodes over one period.
    pub fn sample<P: PeriodicPotential + ?Sized>(pot: &P, n: usize) -> Result<Self> {
        let period = pot.period();
        Self::new(
            period,
            (0..n).map(|i| pot.value(period * i as f64 / n as f64)).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn spacing(&self) -> f64 {
        self.period / self.values.len() as f64
    }

    fn locate(&self, x: f64) -> (usize, usize, f64) {
        let n = self.values.len();
        let mut r = x % self.period;
        if r < 0.0 {
            r += self.period;
        }
        let u = r / self.spacing();
        let i = (u.floor() as usize).min(n - 1);
        (i, (i + 1) % n, u - i as f64)
    }
}

impl PeriodicPotential for SampledPotential {
    fn period(&self) -> f64 {
        self.period
    }

    fn value(&self, x: f64) -> f64 {
        let (i, j, s) = self.locate(x);
        let h = self.spacing();
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.values[i] + h10 * h * self.gradients[i] + h01 * self.values[j] + h11 * h * self.gradients[j]
    }

    fn gradient(&self, x: f64) -> f64 {
        let (i, j, s) = self.locate(x);
        (1.0 - s) * self.gradients[i] + s * self.gradients[j]
    }

    fn laplacian(&self, x: f64) -> f64 {
        let (i, j, s) = self.locate(x);
        (1.0 - s) * self.laplacians[i] + s * self.laplacians[j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_derivatives() {
        let p = CosinePotential::new(2.0, 3.0).unwrap();
        assert!((p.period() - 2.0 * PI / 3.0).abs() < 1e-15);
        let x = 0.37;
        let h = 1e-5;
        let fd = (p.value(x + h) - p.value(x - h)) / (2.0 * h);
        assert!((fd - p.gradient(x)).abs() < 1e-8);
        assert!((p.laplacian(x) + 9.0 * p.value(x)).abs() < 1e-14);
    }

    #[test]
    fn cosine_rejects_bad_parameters() {
        assert!(CosinePotential::new(-1.0, 1.0).is_err());
        assert!(CosinePotential::new(1.0, 0.0).is_err());
    }

    #[test]
    fn sampled_matches_cosine() {
        let c = CosinePotential::new(1.0, 2.0 * PI).unwrap();
        let s = SampledPotential::sample(&c, 256).unwrap();
        for k in 0..97 {
            let x = k as f64 * 0.0173 - 0.4;
            assert!((s.value(x) - c.value(x)).abs() < 1e-7);
            assert!((s.gradient(x) - c.gradient(x)).abs() < 2e-3);
            assert!((s.laplacian(x) - c.laplacian(x)).abs() < 0.02 * 4.0 * PI * PI);
        }
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            SampledPotential::new(1.0, alloc::vec![0.0; 4]),
            Err(Error::Resolution {
                samples: 4,
                required: MIN_SAMPLES
            })
        ));
    }
}
