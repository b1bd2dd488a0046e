//! Built-in problems: a non-local crowd model and the non-local and local
//! Keyfitz-Kranzer systems.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

use crate::error::{Error, Result};
use crate::grid::{BoundaryKind, GridSpec};
use crate::kernels::{KernelMatrix, KernelSpec};
use crate::math;

/// A flux component `f^k(t, x, y, ρ^k, A)` (or `g^k` with `B`).
pub trait FluxFunction: Send + Sync {
    /// Flux of species `species` with density `rho` and non-local term `nonlocal`.
    fn eval(&self, t: f64, x: f64, y: f64, rho: f64, nonlocal: &[f64], species: usize) -> f64;

    /// Fluxes of every species at one face for both traces:
    /// `out[k] = [f^k(traces[k][0]), f^k(traces[k][1])]`.
    ///
    /// Models override this to share work that depends only on the face.
    fn eval_face(&self, t: f64, x: f64, y: f64, nonlocal: &[f64], traces: &[[f64; 2]], out: &mut [[f64; 2]]) {
        for (k, (tr, o)) in traces.iter().zip(out.iter_mut()).enumerate() {
            *o = [
                self.eval(t, x, y, tr[0], nonlocal, k),
                self.eval(t, x, y, tr[1], nonlocal, k),
            ];
        }
    }

    /// [`FluxFunction::eval_face`] on the faces `(x, ys[j])`, with
    /// `nonlocal`, `traces` and `out` holding consecutive per-face blocks.
    fn eval_line(
        &self,
        t: f64,
        x: f64,
        ys: &[f64],
        nonlocal: &[f64],
        traces: &[[f64; 2]],
        out: &mut [[f64; 2]],
    ) {
        if ys.is_empty() {
            return;
        }
        let m = nonlocal.len() / ys.len();
        let n = traces.len() / ys.len();
        for (j, &y) in ys.iter().enumerate() {
            self.eval_face(
                t,
                x,
                y,
                &nonlocal[j * m..(j + 1) * m],
                &traces[j * n..(j + 1) * n],
                &mut out[j * n..(j + 1) * n],
            );
        }
    }
}

/// `f(ρ) = c·ρ` for every species, independent of position and `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFlux {
    pub speed: f64,
}

impl FluxFunction for LinearFlux {
    fn eval(&self, _: f64, _: f64, _: f64, rho: f64, _: &[f64], _: usize) -> f64 {
        self.speed * rho
    }
}

/// How the flux arguments `A`, `B` are obtained from the state.
#[derive(Debug, Clone, PartialEq)]
pub enum NonlocalTerm {
    /// Midpoint-quadrature convolutions with the given kernel matrices.
    Convolution {
        kernel_x: KernelMatrix,
        kernel_y: KernelMatrix,
    },
    /// Averages of the two cells adjacent to each face, one channel per species.
    LocalAverage,
}

pub type InitialCondition = Arc<dyn Fn(f64, f64, &mut [f64]) + Send + Sync>;

/// A complete problem definition.
#[derive(Clone)]
pub struct ModelSpec {
    pub name: String,
    pub n_species: usize,
    pub channels: usize,
    pub flux_x: Arc<dyn FluxFunction>,
    pub flux_y: Arc<dyn FluxFunction>,
    pub nonlocal: NonlocalTerm,
    /// `max_k ‖∂ρ f^k‖`.
    pub lipschitz_x: f64,
    /// `max_k ‖∂ρ g^k‖`.
    pub lipschitz_y: f64,
    /// Growth constant `M`; `None` leaves the mesh restriction unchecked.
    pub growth: Option<f64>,
    pub domain: GridSpec,
    pub boundary: BoundaryKind,
    pub initial: InitialCondition,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("n_species", &self.n_species)
            .field("channels", &self.channels)
            .field("nonlocal", &self.nonlocal)
            .field("lipschitz_x", &self.lipschitz_x)
            .field("lipschitz_y", &self.lipschitz_y)
            .field("growth", &self.growth)
            .field("domain", &self.domain)
            .field("boundary", &self.boundary)
            .finish_non_exhaustive()
    }
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_species == 0 || self.channels == 0 {
            return Err(Error::InvalidConfig(format!(
                "model {} needs at least one species and one channel",
                self.name
            )));
        }
        for (name, v) in [("Lf", self.lipschitz_x), ("Lg", self.lipschitz_y)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if let Some(m) = self.growth {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "M must be finite and >= 0, got {m}"
                )));
            }
        }
        match &self.nonlocal {
            NonlocalTerm::Convolution { kernel_x, kernel_y } => {
                for km in [kernel_x, kernel_y] {
                    if km.channels() != self.channels || km.species() != self.n_species {
                        return Err(Error::DimensionMismatch(format!(
                            "kernel matrix is {}x{}, model has m={} and N={}",
                            km.channels(),
                            km.species(),
                            self.channels,
                            self.n_species
                        )));
                    }
                }
            }
            NonlocalTerm::LocalAverage => {
                if self.channels != self.n_species {
                    return Err(Error::DimensionMismatch(
                        "local face averages need one channel per species".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `max(‖∂x η‖, ‖∂y ν‖)` over all kernel entries, if the model is non-local.
    pub fn kernel_gradient_bound(&self) -> Option<f64> {
        match &self.nonlocal {
            NonlocalTerm::Convolution { kernel_x, kernel_y } => {
                Some(kernel_x.max_gradient().max(kernel_y.max_gradient()))
            }
            NonlocalTerm::LocalAverage => None,
        }
    }
}

/// Walking direction of the crowd model.
///
/// `v¹ = (1 − y²)³ exp(−1/(x − 9.5)²)` for `x < 9.5`, `|y| ≤ 1` and `0`
/// elsewhere; `v² = −2y exp(1 − 1/y²)`, continued by `0` at `y = 0`.
pub fn crowd_velocity(x: f64, y: f64) -> (f64, f64) {
    (crowd_v1(x, y), crowd_v2(y))
}

#[inline]
fn crowd_v1(x: f64, y: f64) -> f64 {
    if x < 9.5 && y.abs() <= 1.0 {
        let s = 1.0 - y * y;
        let d = x - 9.5;
        s * s * s * math::exp(-1.0 / (d * d))
    } else {
        0.0
    }
}

#[inline]
fn crowd_v2(y: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        -2.0 * y * math::exp(1.0 - 1.0 / (y * y))
    }
}

/// `ρ(1 − ρ)(1 − A)·v`, one direction of the crowd flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrowdFlux {
    /// 0 for the x-direction (`v¹`), 1 for the y-direction (`v²`).
    pub direction: usize,
}

impl CrowdFlux {
    #[inline]
    fn factor(&self, x: f64, y: f64, a: f64) -> f64 {
        (1.0 - a)
            * if self.direction == 0 {
                crowd_v1(x, y)
            } else {
                crowd_v2(y)
            }
    }
}

impl FluxFunction for CrowdFlux {
    fn eval(&self, _: f64, x: f64, y: f64, rho: f64, nonlocal: &[f64], _: usize) -> f64 {
        rho * (1.0 - rho) * self.factor(x, y, nonlocal[0])
    }

    fn eval_face(&self, _: f64, x: f64, y: f64, nonlocal: &[f64], traces: &[[f64; 2]], out: &mut [[f64; 2]]) {
        let c = self.factor(x, y, nonlocal[0]);
        let [u, v] = traces[0];
        out[0] = [u * (1.0 - u) * c, v * (1.0 - v) * c];
    }

    fn eval_line(
        &self,
        _: f64,
        x: f64,
        ys: &[f64],
        nonlocal: &[f64],
        traces: &[[f64; 2]],
        out: &mut [[f64; 2]],
    ) {
        let m = nonlocal.len() / ys.len().max(1);
        // the x-dependent part of v¹ is shared by the whole line
        let ex = if self.direction == 0 && x < 9.5 {
            let d = x - 9.5;
            math::exp(-1.0 / (d * d))
        } else {
            0.0
        };
        for (j, &y) in ys.iter().enumerate() {
            let v = if self.direction == 1 {
                crowd_v2(y)
            } else if x < 9.5 && y.abs() <= 1.0 {
                let s = 1.0 - y * y;
                s * s * s * ex
            } else {
                0.0
            };
            let c = (1.0 - nonlocal[j * m]) * v;
            let [u, w] = traces[j];
            out[j] = [u * (1.0 - u) * c, w * (1.0 - w) * c];
        }
    }
}

/// `ρ^k φ(A₁² + A₂²)` with `φ = sin` (x) or `cos` (y), for every species.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyfitzKranzerFlux {
    pub direction: usize,
}

impl KeyfitzKranzerFlux {
    #[inline]
    fn phi(&self, a: &[f64]) -> f64 {
        let s = a[0] * a[0] + a[1] * a[1];
        if self.direction == 0 {
            math::sin(s)
        } else {
            math::cos(s)
        }
    }
}

impl FluxFunction for KeyfitzKranzerFlux {
    fn eval(&self, _: f64, _: f64, _: f64, rho: f64, nonlocal: &[f64], _: usize) -> f64 {
        rho * self.phi(nonlocal)
    }

    fn eval_face(&self, _: f64, _: f64, _: f64, nonlocal: &[f64], traces: &[[f64; 2]], out: &mut [[f64; 2]]) {
        let phi = self.phi(nonlocal);
        for (tr, o) in traces.iter().zip(out.iter_mut()) {
            *o = [tr[0] * phi, tr[1] * phi];
        }
    }
}

fn indicator(x: f64, y: f64, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) -> f64 {
    if x >= x0 && x <= x1 && y >= y0 && y <= y1 {
        1.0
    } else {
        0.0
    }
}

/// Two blocks: `χ[1,4]×[0.1,0.8] + χ[2,5]×[−0.8,−0.1]`.
pub fn crowd_initial(x: f64, y: f64) -> f64 {
    indicator(x, y, (1.0, 4.0), (0.1, 0.8)) + indicator(x, y, (2.0, 5.0), (-0.8, -0.1))
}

/// Piecewise-constant data on the four quadrants of `[−0.4, 0.4]²`.
pub fn kk_initial(x: f64, y: f64) -> [f64; 2] {
    let r = 0.4;
    let right = x > 0.0 && x <= r;
    let left = x >= -r && x <= 0.0;
    let top = y > 0.0 && y <= r;
    let bottom = y >= -r && y <= 0.0;
    if right && top {
        [1.0, math::sqrt(3.0)]
    } else if left && top {
        [math::sqrt(2.0), 1.0]
    } else if left && bottom {
        [0.5, 1.0 / 3.0]
    } else if right && bottom {
        [math::sqrt(3.0), math::sqrt(2.0)]
    } else {
        [0.0, 0.0]
    }
}

/// Crowd dynamics, `∂tρ + ∇·(ρ(1 − ρ)(1 − μ∗ρ) v) = 0`, on `[0,10]×[−1,1]`.
///
/// `μ` is the cubic kernel with radius 0.4. The Lipschitz constants are
/// `Lf = Lg = 2`: `|∂ρ(ρ(1 − ρ))| ≤ 1` on `[0, 1]` and `|(1 − A) v| ≤ 2`
/// there, which gives the step `Δt = Δx/38 ≈ 0.026Δx` with `θ = 0.5`,
/// `α = β = 1/6`. The growth constant is left unchecked.
pub fn crowd_model() -> ModelSpec {
    let mu = KernelSpec::cubic(0.4).expect("valid kernel");
    let kernel = KernelMatrix::diagonal(mu, 1);
    ModelSpec {
        name: "crowd".into(),
        n_species: 1,
        channels: 1,
        flux_x: Arc::new(CrowdFlux { direction: 0 }),
        flux_y: Arc::new(CrowdFlux { direction: 1 }),
        nonlocal: NonlocalTerm::Convolution {
            kernel_x: kernel.clone(),
            kernel_y: kernel,
        },
        lipschitz_x: 2.0,
        lipschitz_y: 2.0,
        growth: None,
        domain: GridSpec::new(0.0, 10.0, -1.0, 1.0, 400, 80),
        boundary: BoundaryKind::NoFlow,
        initial: Arc::new(|x, y, out: &mut [f64]| out[0] = crowd_initial(x, y)),
    }
}

/// Non-local Keyfitz-Kranzer system with diagonal cubic kernels of radius `r`.
///
/// `f^k = ρ^k sin(A₁² + A₂²)`, `g^k = ρ^k cos(B₁² + B₂²)`; `|φ| ≤ 1` gives
/// `Lf = Lg = 1`.
pub fn kk_model(radius: f64) -> Result<ModelSpec> {
    let mu = KernelSpec::cubic(radius)?;
    let kernel = KernelMatrix::diagonal(mu, 2);
    Ok(ModelSpec {
        name: "kk".into(),
        nonlocal: NonlocalTerm::Convolution {
            kernel_x: kernel.clone(),
            kernel_y: kernel,
        },
        ..kk_local_model()
    })
}

/// Local Keyfitz-Kranzer system: the flux arguments are the face averages of
/// the two adjacent cells instead of convolutions.
pub fn kk_local_model() -> ModelSpec {
    ModelSpec {
        name: "kk-local".into(),
        n_species: 2,
        channels: 2,
        flux_x: Arc::new(KeyfitzKranzerFlux { direction: 0 }),
        flux_y: Arc::new(KeyfitzKranzerFlux { direction: 1 }),
        nonlocal: NonlocalTerm::LocalAverage,
        lipschitz_x: 1.0,
        lipschitz_y: 1.0,
        growth: None,
        domain: GridSpec::new(-1.0, 1.0, -1.0, 1.0, 400, 400),
        boundary: BoundaryKind::Outflow,
        initial: Arc::new(|x, y, out: &mut [f64]| out.copy_from_slice(&kk_initial(x, y))),
    }
}

/// Looks up a built-in model: `crowd`, `kk` (needs `radius`) or `kk-local`.
pub fn by_name(name: &str, radius: Option<f64>) -> Result<ModelSpec> {
    match name {
        "crowd" => {
            let mut m = crowd_model();
            if let Some(r) = radius {
                let kernel = KernelMatrix::diagonal(KernelSpec::cubic(r)?, 1);
                m.nonlocal = NonlocalTerm::Convolution {
                    kernel_x: kernel.clone(),
                    kernel_y: kernel,
                };
            }
            Ok(m)
        }
        "kk" => kk_model(radius.unwrap_or(0.0125)),
        "kk-local" | "kk_local" => Ok(kk_local_model()),
        other => Err(Error::InvalidConfig(format!(
            "unknown model {other:?} (expected crowd, kk or kk-local)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    #[test]
    fn crowd_line_matches_single_faces() {
        let ys: Vec<f64> = (0..=40).map(|j| -1.05 + j as f64 * 0.0525).collect();
        let a: Vec<f64> = ys.iter().map(|y| 0.3 + 0.2 * y).collect();
        let traces: Vec<[f64; 2]> = ys.iter().map(|y| [0.5 + 0.4 * y, 0.25 - 0.1 * y]).collect();
        for direction in [0, 1] {
            let f = CrowdFlux { direction };
            for x in [0.0, 4.3, 9.49, 9.5, 9.8] {
                let mut line = vec![[0.0; 2]; ys.len()];
                f.eval_line(0.0, x, &ys, &a, &traces, &mut line);
                for (j, &y) in ys.iter().enumerate() {
                    let mut one = [[0.0; 2]];
                    f.eval_face(0.0, x, y, &a[j..=j], &traces[j..=j], &mut one);
                    assert_eq!(line[j], one[0], "direction {direction}, x {x}, y {y}");
                }
            }
        }
    }

    #[test]
    fn velocity_special_points() {
        assert_eq!(crowd_velocity(9.5, 0.5).0, 0.0);
        assert_eq!(crowd_velocity(9.7, 0.0).0, 0.0);
        assert_eq!(crowd_velocity(3.0, 0.0).1, 0.0);
        assert_eq!(crowd_velocity(5.0, 1.0).0, 0.0);
        assert_eq!(crowd_velocity(5.0, -1.0).0, 0.0);
        // continuous approach to the stopping line
        assert!(crowd_velocity(9.5 - 1e-3, 0.0).0 < 1e-300);
        let (v1, v2) = crowd_velocity(5.0, 0.5);
        assert!((v1 - 0.75f64.powi(3) * (-1.0 / 20.25f64).exp()).abs() < 1e-16);
        assert!((v2 + (-3.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn crowd_flux_values() {
        let m = crowd_model();
        m.validate().unwrap();
        let f = &m.flux_x;
        assert_eq!(f.eval(0.0, 5.0, 0.0, 0.0, &[0.3], 0), 0.0);
        assert_eq!(f.eval(0.0, 5.0, 0.0, 1.0, &[0.3], 0), 0.0);
        let expect = 0.25 * (-1.0 / 20.25f64).exp();
        assert!((f.eval(0.0, 5.0, 0.0, 0.5, &[0.0], 0) - expect).abs() < 1e-16);
        assert_eq!(f.eval(0.0, 5.0, 0.3, 0.4, &[1.0], 0), 0.0);
    }

    #[test]
    fn crowd_initial_blocks() {
        assert_eq!(crowd_initial(1.5, 0.5), 1.0);
        assert_eq!(crowd_initial(0.5, 0.0), 0.0);
        assert_eq!(crowd_initial(4.5, -0.5), 1.0);
        assert_eq!(crowd_initial(4.5, 0.5), 0.0);
        assert_eq!(crowd_initial(3.0, 0.0), 0.0);
    }

    #[test]
    fn kk_flux_and_initial() {
        let m = kk_model(0.0125).unwrap();
        m.validate().unwrap();
        assert_eq!(m.flux_x.eval(0.0, 0.0, 0.0, 1.0, &[0.0, 0.0], 0), 0.0);
        assert_eq!(m.flux_y.eval(0.0, 0.0, 0.0, 1.0, &[0.0, 0.0], 1), 1.0);
        assert_eq!(kk_initial(0.2, 0.2), [1.0, 3f64.sqrt()]);
        assert_eq!(kk_initial(-0.2, 0.2), [2f64.sqrt(), 1.0]);
        assert_eq!(kk_initial(-0.2, -0.2), [0.5, 1.0 / 3.0]);
        assert_eq!(kk_initial(0.2, -0.2), [3f64.sqrt(), 2f64.sqrt()]);
        assert_eq!(kk_initial(0.6, 0.6), [0.0, 0.0]);
        assert_eq!(kk_initial(0.0, 0.0), [0.5, 1.0 / 3.0]);
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(by_name("crowd", None).unwrap().name, "crowd");
        assert_eq!(by_name("kk", Some(0.04)).unwrap().n_species, 2);
        assert_eq!(
            by_name("kk-local", None).unwrap().nonlocal,
            NonlocalTerm::LocalAverage
        );
        assert!(by_name("traffic", None).is_err());
        assert!(by_name("kk", Some(-1.0)).is_err());
    }

    #[test]
    fn validation_catches_bad_specs() {
        let mut m = crowd_model();
        m.lipschitz_x = -1.0;
        assert!(m.validate().is_err());
        let mut m = kk_local_model();
        m.channels = 1;
        assert!(m.validate().is_err());
        let mut m = kk_model(0.1).unwrap();
        m.n_species = 3;
        assert!(m.validate().is_err());
    }

    fn all_models() -> Vec<ModelSpec> {
        vec![crowd_model(), kk_model(0.05).unwrap(), kk_local_model()]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn fluxes_vanish_at_zero_density(
            t in 0.0f64..10.0, x in -2.0f64..12.0, y in -1.0f64..1.0,
            a1 in -3.0f64..3.0, a2 in -3.0f64..3.0,
        ) {
            for m in all_models() {
                let a = [a1, a2];
                let a = &a[..m.channels];
                for k in 0..m.n_species {
                    prop_assert_eq!(m.flux_x.eval(t, x, y, 0.0, a, k), 0.0);
                    prop_assert_eq!(m.flux_y.eval(t, x, y, 0.0, a, k), 0.0);
                }
            }
        }

        #[test]
        fn declared_lipschitz_bounds_hold(
            x in 0.0f64..10.0, y in -1.0f64..1.0, rho in 0.0f64..1.0,
            a1 in 0.0f64..1.0, a2 in 0.0f64..2.0,
        ) {
            for m in all_models() {
                let a = [a1, a2];
                let a = &a[..m.channels];
                for k in 0..m.n_species {
                    let fx = m.flux_x.eval(0.0, x, y, rho, a, k);
                    let fy = m.flux_y.eval(0.0, x, y, rho, a, k);
                    prop_assert!(fx.abs() <= m.lipschitz_x * rho.abs() + 1e-15);
                    prop_assert!(fy.abs() <= m.lipschitz_y * rho.abs() + 1e-15);
                }
            }
        }

        #[test]
        fn local_and_nonlocal_kk_share_closures(
            rho in 0.0f64..2.0, a1 in -2.0f64..2.0, a2 in -2.0f64..2.0, k in 0usize..2,
        ) {
            let (nl, l) = (kk_model(0.03).unwrap(), kk_local_model());
            let a = [a1, a2];
            prop_assert_eq!(nl.flux_x.eval(0.0, 0.1, 0.2, rho, &a, k), l.flux_x.eval(0.0, 0.1, 0.2, rho, &a, k));
            prop_assert_eq!(nl.flux_y.eval(0.0, 0.1, 0.2, rho, &a, k), l.flux_y.eval(0.0, 0.1, 0.2, rho, &a, k));
        }

        #[test]
        fn face_evaluation_matches_pointwise(
            x in 0.0f64..10.0, y in -1.0f64..1.0, u in 0.0f64..2.0, v in 0.0f64..2.0,
            a1 in 0.0f64..1.0, a2 in 0.0f64..1.0,
        ) {
            for m in all_models() {
                let a = [a1, a2];
                let a = &a[..m.channels];
                let traces = vec![[u, v]; m.n_species];
                let mut out = vec![[0.0; 2]; m.n_species];
                for f in [&m.flux_x, &m.flux_y] {
                    f.eval_face(0.0, x, y, a, &traces, &mut out);
                    for (k, o) in out.iter().enumerate() {
                        prop_assert_eq!(o[0], f.eval(0.0, x, y, u, a, k));
                        prop_assert_eq!(o[1], f.eval(0.0, x, y, v, a, k));
                    }
                }
            }
        }
    }
}
