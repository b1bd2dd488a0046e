//! Compactly supported radial kernels and their face-centered stencils.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::math;

/// Exact integral of `(r² − x² − y²)^p` over the disk of radius `r`.
///
/// In polar coordinates the integral is `2π ∫₀^r (r² − s²)^p s ds`, which
/// evaluates to `π r^(2p+2) / (p + 1)`; for `p = 3` this is `π r⁸ / 4`.
pub fn kernel_normalization(radius: f64, exponent: u32) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidKernel(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if exponent == 0 {
        return Err(Error::InvalidKernel("exponent must be at least 1".into()));
    }
    let p = exponent as i32;
    Ok(PI * math::powi(radius, 2 * p + 2) / (p as f64 + 1.0))
}

/// Normalized kernel `k(x, y) = (r² − x² − y²)^p / Z` on the disk `x² + y² ≤ r²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    radius: f64,
    exponent: u32,
    normalization: f64,
}

impl KernelSpec {
    pub fn new(radius: f64, exponent: u32) -> Result<Self> {
        let normalization = kernel_normalization(radius, exponent)?;
        Ok(Self {
            radius,
            exponent,
            normalization,
        })
    }

    /// The cubic kernel used by the built-in models.
    pub fn cubic(radius: f64) -> Result<Self> {
        Self::new(radius, 3)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let s = self.radius * self.radius - x * x - y * y;
        if s < 0.0 {
            0.0
        } else {
            math::powi(s, self.exponent as i32) / self.normalization
        }
    }

    /// `sup |∂x k| = sup |∂y k|`.
    ///
    /// `|∂x k| = 2p|x|(r² − s²)^(p−1) / Z` is largest on the axis at
    /// `x = r / √(2p − 1)`.
    pub fn max_gradient(&self) -> f64 {
        let p = self.exponent as f64;
        let r = self.radius;
        let x = r / math::sqrt(2.0 * p - 1.0);
        2.0 * p * x * math::powi(r * r - x * x, self.exponent as i32 - 1) / self.normalization
    }
}

/// Which family of faces a stencil evaluates at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Faces `(x_{i+1/2}, y_j)`.
    XFace,
    /// Faces `(x_i, y_{j+1/2})`.
    YFace,
}

/// An `m × N` matrix of kernels; `None` entries are identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    channels: usize,
    species: usize,
    entries: Vec<Option<KernelSpec>>,
}

impl KernelMatrix {
    pub fn zeros(channels: usize, species: usize) -> Self {
        Self {
            channels,
            species,
            entries: vec![None; channels * species],
        }
    }

    /// `diag(k, …, k)` with `n` channels and species.
    pub fn diagonal(kernel: KernelSpec, n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for q in 0..n {
            m.set(q, q, Some(kernel));
        }
        m
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn species(&self) -> usize {
        self.species
    }

    pub fn get(&self, q: usize, k: usize) -> Option<&KernelSpec> {
        self.entries[q * self.species + k].as_ref()
    }

    pub fn set(&mut self, q: usize, k: usize, kernel: Option<KernelSpec>) {
        self.entries[q * self.species + k] = kernel;
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &KernelSpec)> + '_ {
        self.entries.iter().enumerate().filter_map(move |(idx, e)| {
            e.as_ref()
                .map(|kernel| (idx / self.species, idx % self.species, kernel))
        })
    }

    pub fn max_radius(&self) -> f64 {
        self.iter().map(|(_, _, k)| k.radius()).fold(0.0, f64::max)
    }

    /// Largest kernel-gradient sup-norm over all entries.
    pub fn max_gradient(&self) -> f64 {
        self.iter().map(|(_, _, k)| k.max_gradient()).fold(0.0, f64::max)
    }
}

/// One non-zero weight of a stencil.
///
/// For an x-face stencil the weight multiplies `ρᵏ(i − dl, j − dp)` in the
/// value at face `(i + ½, j)` and equals `ΔxΔy · k((dl + ½)Δx, dp·Δy)`; for a
/// y-face stencil the offset is `(dl·Δx, (dp + ½)Δy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilEntry {
    pub dl: i32,
    pub dp: i32,
    pub species: usize,
    pub weight: f64,
}

/// Precomputed midpoint-quadrature weights for one face orientation.
///
/// The entries of each channel are sorted by `(dp, dl, species)`, which is
/// the summation order used by the direct convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelStencil {
    orientation: Orientation,
    grid_shape: (usize, usize),
    half_widths: (usize, usize),
    species: usize,
    channels: Vec<Vec<StencilEntry>>,
}

impl KernelStencil {
    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// `(nx, ny)` of the grid the stencil was built on.
    pub fn grid_shape(&self) -> (usize, usize) {
        self.grid_shape
    }

    /// `(Lx, Ly)` with `Lx ≥ ⌈r/Δx⌉`, `Ly ≥ ⌈r/Δy⌉`; every offset satisfies
    /// `-Lx-1 ≤ dl ≤ Lx` and `-Ly-1 ≤ dp ≤ Ly`.
    pub fn half_widths(&self) -> (usize, usize) {
        self.half_widths
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_species(&self) -> usize {
        self.species
    }

    /// All entries of channel `q`, in summation order.
    pub fn channel(&self, q: usize) -> &[StencilEntry] {
        &self.channels[q]
    }

    /// Entries of the `(q, k)` kernel.
    pub fn weights(&self, q: usize, k: usize) -> impl Iterator<Item = &StencilEntry> + '_ {
        self.channels[q].iter().filter(move |e| e.species == k)
    }

    /// `Σ weights` of the `(q, k)` kernel, i.e. the quadrature of its integral.
    pub fn weight_sum(&self, q: usize, k: usize) -> f64 {
        self.weights(q, k).map(|e| e.weight).sum()
    }

    pub fn len(&self) -> usize {
        self.channels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Extreme offsets over all entries: `(dl_min, dl_max, dp_min, dp_max)`.
    pub fn offset_bounds(&self) -> Option<(i32, i32, i32, i32)> {
        self.channels.iter().flatten().fold(None, |acc, e| {
            Some(match acc {
                None => (e.dl, e.dl, e.dp, e.dp),
                Some((a, b, c, d)) => (a.min(e.dl), b.max(e.dl), c.min(e.dp), d.max(e.dp)),
            })
        })
    }
}

fn half_width(radius: f64, h: f64) -> usize {
    // Guard against r/h landing a hair above an integer.
    math::ceil(radius / h * (1.0 - 1e-12)).max(0.0) as usize
}

/// Discretizes `matrix` at the faces of `grid` with the given orientation.
pub fn build_stencil(matrix: &KernelMatrix, grid: &Grid, orientation: Orientation) -> Result<KernelStencil> {
    let (dx, dy) = (grid.dx(), grid.dy());
    let area = dx * dy;
    let r_max = matrix.max_radius();
    let lx = half_width(r_max, dx);
    let ly = half_width(r_max, dy);
    let (sx, sy) = match orientation {
        Orientation::XFace => (0.5, 0.0),
        Orientation::YFace => (0.0, 0.5),
    };
    let mut channels = vec![Vec::new(); matrix.channels()];
    for (q, k, kernel) in matrix.iter() {
        if kernel.radius() < 0.5 * dx.min(dy) {
            log::warn!(
                "kernel under-resolved: radius {} below half the mesh size ({dx}, {dy})",
                kernel.radius()
            );
        }
        let before = channels[q].len();
        for dp in -(ly as i32) - 1..=(ly as i32) {
            for dl in -(lx as i32) - 1..=(lx as i32) {
                let x = (dl as f64 + sx) * dx;
                let y = (dp as f64 + sy) * dy;
                let w = kernel.eval(x, y);
                if w > 0.0 {
                    channels[q].push(StencilEntry {
                        dl,
                        dp,
                        species: k,
                        weight: area * w,
                    });
                }
            }
        }
        if channels[q].len() == before {
            return Err(Error::InvalidKernel(format!(
                "kernel ({q}, {k}) with radius {} has no quadrature node at the {:?} faces \
                 of a grid with mesh sizes ({dx}, {dy})",
                kernel.radius(),
                orientation
            )));
        }
    }
    for entries in &mut channels {
        entries.sort_by_key(|e| (e.dp, e.dl, e.species));
    }
    Ok(KernelStencil {
        orientation,
        grid_shape: (grid.nx(), grid.ny()),
        half_widths: (lx, ly),
        species: matrix.species(),
        channels,
    })
}
