//! Face-centered evaluation of the non-local terms `A = η∗ρ` and `B = ν∗ρ`.
//!
//! Outside the domain `ρ` is extended by zero, except under periodic
//! boundaries where it wraps. Two evaluation paths produce the same values:
//! direct summation over the sparse stencils (fixed summation order, exact
//! to round-off against a brute-force loop) and, with the `fft` feature,
//! zero-padded FFT convolution for wide kernels on fine grids.

mod direct;
#[cfg(feature = "fft")]
mod fft;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{BoundaryKind, Field, GhostedField, Grid};
use crate::kernels::{build_stencil, KernelMatrix, KernelStencil, Orientation};

/// Non-local terms at the x-faces (`A`) and y-faces (`B`) of a grid.
///
/// `A` has `(nx + 1) × ny` faces, `B` has `nx × (ny + 1)`; each face holds
/// one value per channel. Face index `fi` is the face between cells
/// `fi − 1` and `fi`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceConvolutions {
    nx: usize,
    ny: usize,
    channels: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl FaceConvolutions {
    pub fn zeros(nx: usize, ny: usize, channels: usize) -> Self {
        Self {
            nx,
            ny,
            channels,
            a: vec![0.0; (nx + 1) * ny * channels],
            b: vec![0.0; nx * (ny + 1) * channels],
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn a(&self, q: usize, fi: usize, j: usize) -> f64 {
        self.a[(fi * self.ny + j) * self.channels + q]
    }

    #[inline]
    pub fn b(&self, q: usize, i: usize, fj: usize) -> f64 {
        self.b[(i * (self.ny + 1) + fj) * self.channels + q]
    }

    /// All channels of `A` at x-face `(fi, j)`.
    #[inline]
    pub fn a_face(&self, fi: usize, j: usize) -> &[f64] {
        let s = (fi * self.ny + j) * self.channels;
        &self.a[s..s + self.channels]
    }

    /// All channels of `B` at y-face `(i, fj)`.
    #[inline]
    pub fn b_face(&self, i: usize, fj: usize) -> &[f64] {
        let s = (i * (self.ny + 1) + fj) * self.channels;
        &self.b[s..s + self.channels]
    }

    /// Raw x-face values, ordered `(fi, j, q)`.
    pub fn a_values(&self) -> &[f64] {
        &self.a
    }

    /// Raw y-face values, ordered `(i, fj, q)`.
    pub fn b_values(&self) -> &[f64] {
        &self.b
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.a, &mut self.b)
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(&self.b).all(|v| v.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.a
            .iter()
            .chain(&self.b)
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Strategy for evaluating the face convolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionMethod {
    /// Pick the cheaper path from a static operation-count estimate.
    #[default]
    Auto,
    Direct,
    Fft,
}

impl ConvolutionMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::Auto => "auto",
            Self::Direct => "direct",
            Self::Fft => "fft",
        }
    }
}

impl fmt::Display for ConvolutionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConvolutionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(Self::Auto),
            "direct" => Ok(Self::Direct),
            "fft" => Ok(Self::Fft),
            other => Err(Error::InvalidConfig(format!(
                "unknown convolution method {other:?} (expected auto, direct or fft)"
            ))),
        }
    }
}

fn check_stencils(field: &Field, sx: &KernelStencil, sy: &KernelStencil) -> Result<()> {
    let shape = (field.nx(), field.ny());
    if sx.orientation() != Orientation::XFace || sy.orientation() != Orientation::YFace {
        return Err(Error::InvalidKernel(
            "expected an x-face and a y-face stencil, in that order".into(),
        ));
    }
    if sx.grid_shape() != shape || sy.grid_shape() != shape {
        return Err(Error::DimensionMismatch(format!(
            "field is {}x{} but the stencils were built for {:?} and {:?}",
            shape.0,
            shape.1,
            sx.grid_shape(),
            sy.grid_shape()
        )));
    }
    if sx.n_channels() != sy.n_channels()
        || sx.n_species() != field.n_species()
        || sy.n_species() != field.n_species()
    {
        return Err(Error::DimensionMismatch(format!(
            "field has {} species, stencils have {}/{} species and {}/{} channels",
            field.n_species(),
            sx.n_species(),
            sy.n_species(),
            sx.n_channels(),
            sy.n_channels()
        )));
    }
    Ok(())
}

/// Direct evaluation with `ρ` extended by zero outside the domain.
pub fn face_convolutions(field: &Field, sx: &KernelStencil, sy: &KernelStencil) -> Result<FaceConvolutions> {
    face_convolutions_with(field, sx, sy, BoundaryKind::Outflow)
}

/// Direct evaluation; `Periodic` wraps `ρ`, any other kind zero-extends it.
pub fn face_convolutions_with(
    field: &Field,
    sx: &KernelStencil,
    sy: &KernelStencil,
    bc: BoundaryKind,
) -> Result<FaceConvolutions> {
    check_stencils(field, sx, sy)?;
    let plan = direct::DirectPlan::new(sx, sy, bc == BoundaryKind::Periodic);
    let mut out = FaceConvolutions::zeros(field.nx(), field.ny(), sx.n_channels());
    plan.evaluate(field, &mut out);
    Ok(out)
}

/// Face averages of neighbouring cell values, one channel per species.
///
/// Boundary faces average the interior cell with its ghost, so the ghost
/// width must be at least 1.
pub fn face_averages(ghosted: &GhostedField) -> FaceConvolutions {
    let (nx, ny, n) = (ghosted.nx(), ghosted.ny(), ghosted.n_species());
    let mut out = FaceConvolutions::zeros(nx, ny, n);
    let (a, b) = out.parts_mut();
    for k in 0..n {
        for fi in 0..=nx {
            let left = ghosted.row(k, fi as isize - 1);
            let right = ghosted.row(k, fi as isize);
            let w = ghosted.width();
            for j in 0..ny {
                a[(fi * ny + j) * n + k] = 0.5 * (left[j + w] + right[j + w]);
            }
        }
        for i in 0..nx {
            let row = ghosted.row(k, i as isize);
            let w = ghosted.width();
            for fj in 0..=ny {
                b[(i * (ny + 1) + fj) * n + k] = 0.5 * (row[fj + w - 1] + row[fj + w]);
            }
        }
    }
    out
}

enum Backend {
    Direct(direct::DirectPlan),
    #[cfg(feature = "fft")]
    Fft(fft::FftPlan),
}

/// Precomputed stencils (and FFT spectra) for repeated evaluation on one grid.
pub struct ConvolutionEngine {
    nx: usize,
    ny: usize,
    channels: usize,
    species: usize,
    stencil_x: KernelStencil,
    stencil_y: KernelStencil,
    #[cfg_attr(not(feature = "fft"), allow(dead_code))]
    nonnegative_weights: bool,
    backend: Backend,
}

impl fmt::Debug for ConvolutionEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvolutionEngine")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("channels", &self.channels)
            .field("method", &self.method())
            .finish()
    }
}

impl ConvolutionEngine {
    pub fn new(
        grid: &Grid,
        kernel_x: &KernelMatrix,
        kernel_y: &KernelMatrix,
        bc: BoundaryKind,
        method: ConvolutionMethod,
    ) -> Result<Self> {
        if kernel_x.channels() != kernel_y.channels() || kernel_x.species() != kernel_y.species() {
            return Err(Error::DimensionMismatch(format!(
                "kernel matrices are {}x{} and {}x{}",
                kernel_x.channels(),
                kernel_x.species(),
                kernel_y.channels(),
                kernel_y.species()
            )));
        }
        let sx = build_stencil(kernel_x, grid, Orientation::XFace)?;
        let sy = build_stencil(kernel_y, grid, Orientation::YFace)?;
        let periodic = bc == BoundaryKind::Periodic;
        let method = match method {
            ConvolutionMethod::Auto => choose_method(&sx, &sy, periodic),
            m => m,
        };
        let backend = match method {
            ConvolutionMethod::Fft => {
                #[cfg(feature = "fft")]
                {
                    Backend::Fft(fft::FftPlan::new(&sx, &sy, periodic))
                }
                #[cfg(not(feature = "fft"))]
                {
                    return Err(Error::InvalidConfig(
                        "FFT convolution requested but the `fft` feature is disabled".into(),
                    ));
                }
            }
            _ => Backend::Direct(direct::DirectPlan::new(&sx, &sy, periodic)),
        };
        let nonnegative_weights =
            (0..sx.n_channels()).all(|q| sx.channel(q).iter().chain(sy.channel(q)).all(|e| e.weight >= 0.0));
        Ok(Self {
            nx: grid.nx(),
            ny: grid.ny(),
            channels: kernel_x.channels(),
            species: kernel_x.species(),
            stencil_x: sx,
            stencil_y: sy,
            nonnegative_weights,
            backend,
        })
    }

    /// The path actually used (never `Auto`).
    pub fn method(&self) -> ConvolutionMethod {
        match self.backend {
            Backend::Direct(_) => ConvolutionMethod::Direct,
            #[cfg(feature = "fft")]
            Backend::Fft(_) => ConvolutionMethod::Fft,
        }
    }

    pub fn stencil_x(&self) -> &KernelStencil {
        &self.stencil_x
    }

    pub fn stencil_y(&self) -> &KernelStencil {
        &self.stencil_y
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn evaluate(&self, field: &Field) -> Result<FaceConvolutions> {
        let mut out = FaceConvolutions::zeros(self.nx, self.ny, self.channels);
        self.evaluate_into(field, &mut out)?;
        Ok(out)
    }

    pub fn evaluate_into(&self, field: &Field, out: &mut FaceConvolutions) -> Result<()> {
        if field.nx() != self.nx || field.ny() != self.ny || field.n_species() != self.species {
            return Err(Error::DimensionMismatch(format!(
                "field is {}x{} with {} species, engine expects {}x{} with {}",
                field.nx(),
                field.ny(),
                field.n_species(),
                self.nx,
                self.ny,
                self.species
            )));
        }
        if out.nx != self.nx || out.ny != self.ny || out.channels != self.channels {
            *out = FaceConvolutions::zeros(self.nx, self.ny, self.channels);
        }
        match &self.backend {
            Backend::Direct(plan) => plan.evaluate(field, out),
            #[cfg(feature = "fft")]
            Backend::Fft(plan) => {
                plan.evaluate(field, out);
                // Transform round-off can push exact zeros slightly negative.
                if self.nonnegative_weights && field.min() >= 0.0 {
                    let (a, b) = out.parts_mut();
                    for v in a.iter_mut().chain(b.iter_mut()) {
                        if *v < 0.0 {
                            *v = 0.0;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(feature = "fft")]
fn choose_method(sx: &KernelStencil, sy: &KernelStencil, periodic: bool) -> ConvolutionMethod {
    let (nx, ny) = sx.grid_shape();
    let direct = ((nx + 1) * ny * sx.len() + nx * (ny + 1) * sy.len()) as f64;
    let fft = fft::FftPlan::estimated_cost(sx, sy, periodic);
    if fft < direct {
        ConvolutionMethod::Fft
    } else {
        ConvolutionMethod::Direct
    }
}

#[cfg(not(feature = "fft"))]
fn choose_method(_: &KernelStencil, _: &KernelStencil, _: bool) -> ConvolutionMethod {
    ConvolutionMethod::Direct
}

#[cfg(test)]
mod tests;
