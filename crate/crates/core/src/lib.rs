//! Finite-volume schemes for systems of non-local conservation laws in two
//! space dimensions.
//!
//! The crate solves
//!
//! ```text
//! ∂t ρᵏ + ∂x fᵏ(t, x, y, ρᵏ, η∗ρ) + ∂y gᵏ(t, x, y, ρᵏ, ν∗ρ) = 0,   k = 1..N
//! ```
//!
//! on a uniform Cartesian grid, where η and ν are m×N matrices of compactly
//! supported kernels. Two schemes are provided: a first-order Lax-Friedrichs
//! scheme and a positivity-preserving second-order scheme built from a
//! minmod-limited MUSCL reconstruction and a two-stage SSP Runge-Kutta
//! integrator.
//!
//! The crate is `no_std` (with `alloc`) when built without the default
//! features. The `std` feature enables error trait integration, `fft` enables
//! the spectral convolution path and `parallel` spreads face and cell sweeps
//! over a rayon thread pool. Every reduction has a fixed order, so results do
//! not depend on the number of threads.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod convolution;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod kernels;
mod math;
pub mod models;
mod par;
pub mod schemes;

pub use convolution::{ConvolutionEngine, ConvolutionMethod, FaceConvolutions};
pub use error::{Error, Result};
pub use grid::{BoundaryKind, Field, GhostedField, Grid, GridSpec};
pub use kernels::{KernelMatrix, KernelSpec, KernelStencil, Orientation};
pub use models::{FluxFunction, ModelSpec, NonlocalTerm};
pub use schemes::{Order, SchemeConfig, Solver, SolverState, Stage};
