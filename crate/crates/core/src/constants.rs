//! Physical constants (CODATA 2018) and particle masses.

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Avogadro constant, 1/mol.
pub const N_A: f64 = 6.022_140_76e23;
/// One angstrom in metres.
pub const ANGSTROM: f64 = 1e-10;

/// Electron mass, kg.
pub const M_ELECTRON: f64 = 9.109_383_701_5e-31;
/// Muon mass, kg.
pub const M_MUON: f64 = 1.883_531_627e-28;
/// Hydrogen, taken as the bare proton mass, kg.
pub const M_HYDROGEN: f64 = 1.672_621_92e-27;
/// Deuteron mass, kg.
pub const M_DEUTERIUM: f64 = 3.343_583_8e-27;
/// Triton mass, kg.
pub const M_TRITIUM: f64 = 5.007_356_7e-27;

/// Named particle used by scans and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Particle {
    Electron,
    Muon,
    Hydrogen,
    Deuterium,
    Tritium,
}

impl Particle {
    pub const ISOTOPES: [Particle; 3] = [Particle::Hydrogen, Particle::Deuterium, Particle::Tritium];

    pub fn mass(self) -> f64 {
        match self {
            Particle::Electron => M_ELECTRON,
            Particle::Muon => M_MUON,
            Particle::Hydrogen => M_HYDROGEN,
            Particle::Deuterium => M_DEUTERIUM,
            Particle::Tritium => M_TRITIUM,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Particle::Electron => "e",
            Particle::Muon => "mu",
            Particle::Hydrogen => "H",
            Particle::Deuterium => "D",
            Particle::Tritium => "T",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Particle> {
        match s {
            "e" | "electron" => Some(Particle::Electron),
            "mu" | "muon" => Some(Particle::Muon),
            "H" | "h" | "hydrogen" | "proton" => Some(Particle::Hydrogen),
            "D" | "d" | "deuterium" => Some(Particle::Deuterium),
            "T" | "t" | "tritium" => Some(Particle::Tritium),
            _ => None,
        }
    }
}
