//! Numerical laboratory for finite-time blow-up of small-data semilinear
//! wave equations u_tt − Δ_g u + b(t)u_t = c₁|u_t|^p + c₂|u|^q on radial
//! asymptotically Euclidean backgrounds.
//!
//! The crate builds the full chain from geometry to scaling law: metric
//! profiles and their decay constants, the damping-removing time rescaling,
//! elliptic and temporal eigenmodes, a radial finite-difference solver with
//! blow-up detection, test-function functionals with their differential
//! inequalities, Kato-type ODE blow-up engines, and an ε-sweep harness that
//! fits lifespan exponents T_ε ~ ε^(−α).

// Validation guards use the `!(x > 0.0)` form on purpose: it rejects NaN
// parameters, which `x <= 0.0` would silently accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Parallel-array index loops are the house style for grid kernels here.
#![allow(clippy::needless_range_loop)]

pub mod blowup;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod eigenmode;
pub mod error;
pub mod exponents;
pub mod metric;
pub mod ode;
pub mod quad;
pub mod rescale;
pub mod temporal_mode;
pub mod wave_solver;

pub use error::{Error, Result};
