//! Time-step restriction and mesh restriction.

use alloc::format;

use super::{Order, SchemeConfig};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::models::ModelSpec;

/// Largest admissible `λ̄ = 2λ` for one direction:
/// `min{1, 4 − 6ᾱ(1 + θ), 6ᾱ} / (6(1 + θ)L + 1)` with `ᾱ = 2·coeff`.
///
/// The first-order scheme uses `θ = 0`.
pub fn cfl_bound(order: Order, theta: f64, coeff: f64, lipschitz: f64) -> Result<f64> {
    let theta = match order {
        Order::First => 0.0,
        Order::Second => theta,
    };
    let abar = 2.0 * coeff;
    let num = 1.0f64.min(4.0 - 6.0 * abar * (1.0 + theta)).min(6.0 * abar);
    let bound = num / (6.0 * (1.0 + theta) * lipschitz + 1.0);
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "CFL bound is {bound} for θ={theta}, coefficient {coeff}, L={lipschitz}; \
             the diffusion coefficient is outside its admissible interval"
        )));
    }
    Ok(bound)
}

/// `Δt = safety · min(λ̄x/2 · Δx, λ̄y/2 · Δy)`.
pub fn compute_dt(model: &ModelSpec, config: &SchemeConfig, grid: &Grid) -> Result<f64> {
    let bx = cfl_bound(config.order, config.theta, config.alpha, model.lipschitz_x)?;
    let by = cfl_bound(config.order, config.theta, config.beta, model.lipschitz_y)?;
    Ok(config.cfl_safety * (0.5 * bx * grid.dx()).min(0.5 * by * grid.dy()))
}

/// `true` if `Δx, Δy ≤ 1/(3M)`; logs a warning otherwise. `M = 0` always passes.
pub fn check_mesh_restriction(grid: &Grid, growth: f64) -> bool {
    if growth <= 0.0 {
        return true;
    }
    let limit = 1.0 / (3.0 * growth);
    let ok = grid.dx() <= limit && grid.dy() <= limit;
    if !ok {
        log::warn!(
            "mesh sizes ({}, {}) exceed 1/(3M) = {limit}; positivity is not guaranteed",
            grid.dx(),
            grid.dy()
        );
    }
    ok
}
