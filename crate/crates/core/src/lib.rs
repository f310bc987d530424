//! Dissipative quantum-hydrodynamic diffusion.
//!
//! The crate covers three regimes of wave-packet spreading under friction:
//!
//! - [`dynamics`]: inertial spreading of a Gaussian packet (dissipative
//!   Ermakov and damped Pinney equations), with [`dq`] extracting the
//!   apparent quantum diffusion constant.
//! - [`periodic`]: overdamped zero-temperature spreading in a cosine
//!   potential, where the dispersion grows logarithmically in time.
//! - [`thermo`]: semiclassical thermo-quantum diffusion, giving
//!   tunneling-corrected Lifson-Jackson and Arrhenius diffusivities.
//!
//! [`pde`] evolves the underlying 1D density equations directly and is used
//! to cross-check the reduced models. Numerical building blocks live in
//! [`special`], [`quadrature`] and [`ode`].
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
// Guards like `!(x > 0.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod constants;
pub mod dq;
pub mod dynamics;
pub mod error;
pub mod ode;
pub mod pde;
pub mod periodic;
pub mod potential;
pub mod quadrature;
pub mod special;
pub mod system;
pub mod thermo;
pub mod verify;

pub use error::{Checked, Error, Result, Validity};
pub use system::PhysicalSystem;
