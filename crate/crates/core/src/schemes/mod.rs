//! The first-order Lax-Friedrichs scheme and the second-order MUSCL + RK2
//! scheme.

mod cfl;
mod flux;
mod reconstruction;
mod stepper;

use alloc::format;
use core::fmt;
use core::str::FromStr;

pub use cfl::{cfl_bound, check_mesh_restriction, compute_dt};
pub use flux::{lax_friedrichs, numerical_flux};
pub use reconstruction::{face_values, limited_slope, limited_slopes, minmod, ReconstructedFaces, Slopes};
pub use stepper::{Solver, SolverState, Stage};

use crate::error::{Error, Result};
use crate::grid::BoundaryKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn as_u8(self) -> u8 {
        match self {
            Order::First => 1,
            Order::Second => 2,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Order::First),
            "2" => Ok(Order::Second),
            other => Err(Error::InvalidConfig(format!(
                "order must be 1 or 2, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub order: Order,
    /// Limiter coefficient; ignored (treated as 0) by the first-order scheme.
    pub theta: f64,
    /// Diffusion coefficient of the x-flux.
    pub alpha: f64,
    /// Diffusion coefficient of the y-flux.
    pub beta: f64,
    pub cfl_safety: f64,
    pub bc: BoundaryKind,
}

impl SchemeConfig {
    /// `θ = 0.5`, `α = β = 1/6`, unit safety factor.
    pub fn second_order(bc: BoundaryKind) -> Self {
        Self {
            order: Order::Second,
            theta: 0.5,
            alpha: 1.0 / 6.0,
            beta: 1.0 / 6.0,
            cfl_safety: 1.0,
            bc,
        }
    }

    pub fn first_order(bc: BoundaryKind) -> Self {
        Self {
            order: Order::First,
            ..Self::second_order(bc)
        }
    }

    pub fn with_order(self, order: Order) -> Self {
        Self { order, ..self }
    }

    /// The `θ` used by the reconstruction.
    pub fn effective_theta(&self) -> f64 {
        match self.order {
            Order::First => 0.0,
            Order::Second => self.theta,
        }
    }

    /// Upper end of the open interval for `α` and `β`.
    pub fn coefficient_limit(&self) -> f64 {
        1.0 / (3.0 * (1.0 + self.effective_theta()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidConfig(format!(
                "θ must lie in [0, 1], got {}",
                self.theta
            )));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "CFL safety factor must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        let limit = self.coefficient_limit();
        for (name, v) in [("α", self.alpha), ("β", self.beta)] {
            if !(v > 0.0 && v < limit) {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {v} is outside (0, {limit}) for order {}",
                    self.order
                )));
            }
        }
        Ok(())
    }
}
