//! Lax-Friedrichs numerical flux.

/// `(f(u) + f(v))/2 − c·(v − u)/(2λ)` from precomputed `f(u)`, `f(v)`.
#[inline]
pub fn lax_friedrichs(fu: f64, fv: f64, u: f64, v: f64, coeff: f64, ratio: f64) -> f64 {
    0.5 * (fu + fv) - coeff * (v - u) / (2.0 * ratio)
}

/// Numerical flux with traces `u` (left/below) and `v` (right/above).
///
/// `f_face` is the physical flux at the face as a function of the density
/// alone; `coeff` is `α` or `β` and `ratio` is `λx = Δt/Δx` or `λy`.
#[inline]
pub fn numerical_flux<F: Fn(f64) -> f64>(u: f64, v: f64, f_face: F, coeff: f64, ratio: f64) -> f64 {
    lax_friedrichs(f_face(u), f_face(v), u, v, coeff, ratio)
}
