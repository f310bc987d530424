//! Particle and environment parameters in SI units.

#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};

/// A particle of mass `m` subject to friction `b`, prepared as a Gaussian
/// wave packet with position dispersion `sigma0_sq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalSystem {
    /// Particle mass, kg.
    pub mass: f64,
    /// Friction constant, kg/s.
    pub friction: f64,
    /// Initial position dispersion, m^2.
    pub sigma0_sq: f64,
    /// Harmonic trap angular frequency, 1/s. Zero for a free particle.
    pub omega0: f64,
    /// Temperature, K. Only needed for ratios against the Einstein constant.
    pub temperature: Option<f64>,
    pub hbar: f64,
    pub k_b: f64,
}

fn positive(what: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Domain { what, value: v })
    }
}

impl PhysicalSystem {
    pub fn new(mass: f64, friction: f64, sigma0_sq: f64) -> Result<Self> {
        Ok(PhysicalSystem {
            mass: positive("mass", mass)?,
            friction: positive("friction", friction)?,
            sigma0_sq: positive("sigma0^2", sigma0_sq)?,
            omega0: 0.0,
            temperature: None,
            hbar: HBAR,
            k_b: K_B,
        })
    }

    pub fn with_trap(mut self, omega0: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 >= 0.0) {
            return Err(Error::Domain {
                what: "trap frequency",
                value: omega0,
            });
        }
        self.omega0 = omega0;
        Ok(self)
    }

    pub fn with_temperature(mut self, temperature: f64) -> Result<Self> {
        self.temperature = Some(positive("temperature", temperature)?);
        Ok(self)
    }

    /// Momentum relaxation time `m/b`, s.
    pub fn relaxation_time(&self) -> f64 {
        self.mass / self.friction
    }

    /// `tau = b t / m`.
    pub fn tau_of(&self, t: f64) -> f64 {
        t / self.relaxation_time()
    }

    pub fn time_of(&self, tau: f64) -> f64 {
        tau * self.relaxation_time()
    }

    /// `xi^2 = 2 b sigma^2 / hbar`.
    pub fn xi_sq_of(&self, sigma_sq: f64) -> f64 {
        2.0 * self.friction * sigma_sq / self.hbar
    }

    pub fn sigma_sq_of(&self, xi_sq: f64) -> f64 {
        self.hbar * xi_sq / (2.0 * self.friction)
    }

    /// Dimensionless trap strength `m omega0 / b`.
    pub fn alpha(&self) -> f64 {
        self.mass * self.omega0 / self.friction
    }

    /// Einstein diffusion constant `k_B T / b`, if a temperature is set.
    pub fn einstein_d(&self) -> Option<f64> {
        self.temperature.map(|t| self.k_b * t / self.friction)
    }

    /// Thermal de Broglie wavelength `hbar / (2 sqrt(m k_B T))`, if a temperature is set.
    pub fn thermal_wavelength(&self) -> Option<f64> {
        self.temperature
            .map(|t| self.hbar / (2.0 * (self.mass * self.k_b * t).sqrt()))
    }
}
