//! Numerical core for the relaxation limit of the bipolar Euler-Poisson system.
//!
//! Everything here is allocation-only (`alloc`) and free of IO so it can be
//! embedded anywhere. The companion `bipolar-relax` crate adds configuration
//! files, CSV output, sweeps and the command line.
//!
//! Module map:
//!
//! * [`eos`]: power-law pressure / internal energy, relative (Bregman) quantities.
//! * [`grid`]: uniform box meshes, cell and face fields, discrete calculus.
//! * [`poisson`]: Neumann Poisson solves with a mean-zero pin.
//! * [`euler_poisson`]: staggered stiff-relaxation stepper for the hydro system.
//! * [`drift_diffusion`]: the limit system and its lifted residuals.
//! * [`relative_energy`]: Ψ, the J terms, lemma bounds and the ε-rate fit.
//! * [`coupled`]: drives both solvers side by side on a common time line.
#![no_std]
// `!(x > 0.0)` guards also reject NaN; index loops mirror the stencils.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

extern crate alloc;

pub mod coupled;
pub mod drift_diffusion;
pub mod eos;
mod error;
pub mod euler_poisson;
pub mod grid;
pub mod poisson;
pub mod relative_energy;
mod transport;
pub mod weak;

pub use error::{Error, Result};
pub use eos::{BarotropicLaw, GasLaw, LowerBoundConstants};
pub use grid::{BoundaryClosure, Grid, ScalarField, VectorField};
