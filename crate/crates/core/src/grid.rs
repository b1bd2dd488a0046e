//! Uniform Cartesian grids, per-species cell averages and ghost layers.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Rectangular domain `[x1, x2] × [y1, y2]` split into `nx × ny` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x1: f64, x2: f64, y1: f64, y2: f64, nx: usize, ny: usize) -> Self {
        Self {
            x1,
            x2,
            y1,
            y2,
            nx,
            ny,
        }
    }

    /// Same domain with the cell counts multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            nx: self.nx * factor,
            ny: self.ny * factor,
            ..*self
        }
    }

    /// Same domain with `nx`, `ny` cells.
    pub fn with_cells(&self, nx: usize, ny: usize) -> Self {
        Self { nx, ny, ..*self }
    }
}

/// Validated grid with precomputed mesh sizes.
///
/// Cell `(i, j)` covers `[x1 + iΔx, x1 + (i+1)Δx) × [y1 + jΔy, y1 + (j+1)Δy)`.
/// Faces normal to x are indexed `fi = 0..=nx` with abscissa `x1 + fi·Δx`, so
/// face `fi` separates cells `fi - 1` and `fi`; y-faces likewise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    spec: GridSpec,
    dx: f64,
    dy: f64,
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        let GridSpec {
            x1,
            x2,
            y1,
            y2,
            nx,
            ny,
        } = spec;
        if !(x1.is_finite() && x2.is_finite() && y1.is_finite() && y2.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite bounds [{x1}, {x2}] x [{y1}, {y2}]"
            )));
        }
        if x2 <= x1 || y2 <= y1 {
            return Err(Error::InvalidGrid(format!(
                "empty domain [{x1}, {x2}] x [{y1}, {y2}]"
            )));
        }
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 cells per direction, got {nx} x {ny}"
            )));
        }
        let dx = (x2 - x1) / nx as f64;
        let dy = (y2 - y1) / ny as f64;
        if !(dx > 0.0 && dy > 0.0) {
            return Err(Error::InvalidGrid(format!("degenerate mesh sizes {dx}, {dy}")));
        }
        Ok(Self { spec, dx, dy })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn nx(&self) -> usize {
        self.spec.nx
    }

    pub fn ny(&self) -> usize {
        self.spec.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn n_cells(&self) -> usize {
        self.spec.nx * self.spec.ny
    }

    #[inline]
    pub fn x_center(&self, i: usize) -> f64 {
        self.spec.x1 + (i as f64 + 0.5) * self.dx
    }

    #[inline]
    pub fn y_center(&self, j: usize) -> f64 {
        self.spec.y1 + (j as f64 + 0.5) * self.dy
    }

    /// Abscissa of x-face `fi` (`0..=nx`).
    #[inline]
    pub fn x_face(&self, fi: usize) -> f64 {
        self.spec.x1 + fi as f64 * self.dx
    }

    /// Ordinate of y-face `fj` (`0..=ny`).
    #[inline]
    pub fn y_face(&self, fj: usize) -> f64 {
        self.spec.y1 + fj as f64 * self.dy
    }

    pub fn x_centers(&self) -> Vec<f64> {
        (0..self.nx()).map(|i| self.x_center(i)).collect()
    }

    pub fn y_centers(&self) -> Vec<f64> {
        (0..self.ny()).map(|j| self.y_center(j)).collect()
    }

    pub fn x_faces(&self) -> Vec<f64> {
        (0..=self.nx()).map(|fi| self.x_face(fi)).collect()
    }

    pub fn y_faces(&self) -> Vec<f64> {
        (0..=self.ny()).map(|fj| self.y_face(fj)).collect()
    }

    /// Whether `fine` covers the same domain with `factor` times as many cells
    /// per direction.
    pub fn nests(&self, fine: &Grid, factor: usize) -> bool {
        let (a, b) = (&self.spec, &fine.spec);
        a.x1 == b.x1
            && a.x2 == b.x2
            && a.y1 == b.y1
            && a.y2 == b.y2
            && a.nx * factor == b.nx
            && a.ny * factor == b.ny
    }
}

/// Boundary treatment on the four sides of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    /// Zero-order extrapolation into the ghosts and zero numerical flux on
    /// the physical boundary faces.
    NoFlow,
    /// Zero-order extrapolation; boundary fluxes are computed normally, so
    /// mass may leave the domain.
    Outflow,
    /// Indices wrap in both directions.
    Periodic,
}

impl BoundaryKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryKind::NoFlow => "noflow",
            BoundaryKind::Outflow => "outflow",
            BoundaryKind::Periodic => "periodic",
        }
    }
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "noflow" | "no-flow" | "no_flow" => Ok(BoundaryKind::NoFlow),
            "outflow" => Ok(BoundaryKind::Outflow),
            "periodic" => Ok(BoundaryKind::Periodic),
            other => Err(Error::InvalidConfig(format!(
                "unknown boundary kind {other:?} (expected noflow, outflow or periodic)"
            ))),
        }
    }
}

/// Cell averages of every species at one time level.
///
/// Species are stored one after another; within a species the layout is
/// row-major over `(i, j)` with `j` contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    nx: usize,
    ny: usize,
    n_species: usize,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(n_species: usize, nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            n_species,
            data: vec![0.0; n_species * nx * ny],
        }
    }

    pub fn constant(n_species: usize, nx: usize, ny: usize, value: f64) -> Self {
        Self {
            nx,
            ny,
            n_species,
            data: vec![value; n_species * nx * ny],
        }
    }

    pub fn zeros_on(grid: &Grid, n_species: usize) -> Self {
        Self::zeros(n_species, grid.nx(), grid.ny())
    }

    /// Builds a field from `f(species, i, j)`.
    pub fn from_fn<F>(n_species: usize, nx: usize, ny: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize, usize) -> f64,
    {
        let mut data = Vec::with_capacity(n_species * nx * ny);
        for k in 0..n_species {
            for i in 0..nx {
                for j in 0..ny {
                    data.push(f(k, i, j));
                }
            }
        }
        Self {
            nx,
            ny,
            n_species,
            data,
        }
    }

    /// Wraps raw species-major storage.
    pub fn from_vec(n_species: usize, nx: usize, ny: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_species * nx * ny {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {n_species} species on {nx} x {ny}",
                data.len()
            )));
        }
        Ok(Self {
            nx,
            ny,
            n_species,
            data,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n_species(&self) -> usize {
        self.n_species
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn species(&self, k: usize) -> &[f64] {
        let n = self.nx * self.ny;
        &self.data[k * n..(k + 1) * n]
    }

    pub fn species_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.nx * self.ny;
        &mut self.data[k * n..(k + 1) * n]
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.nx + i) * self.ny + j]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, value: f64) {
        self.data[(k * self.nx + i) * self.ny + j] = value;
    }

    pub fn matches(&self, grid: &Grid) -> bool {
        self.nx == grid.nx() && self.ny == grid.ny()
    }

    pub fn same_shape(&self, other: &Field) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.n_species == other.n_species
    }

    /// First non-finite entry as `(species, i, j)`.
    pub fn first_non_finite(&self) -> Option<(usize, usize, usize)> {
        let pos = self.data.iter().position(|v| !v.is_finite())?;
        let n = self.nx * self.ny;
        Some((pos / n, (pos % n) / self.ny, pos % self.ny))
    }

    /// Smallest entry over all species and cells.
    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest absolute entry over all species and cells.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

/// Projects a pointwise initial datum onto cell averages.
///
/// Each cell value is the tensor-product midpoint rule with
/// `samples_per_axis²` points; one sample per axis samples the cell center.
/// `ic(x, y, out)` writes the value of every species at `(x, y)` into `out`.
pub fn project_initial<F>(grid: &Grid, n_species: usize, samples_per_axis: usize, ic: F) -> Result<Field>
where
    F: Fn(f64, f64, &mut [f64]),
{
    if samples_per_axis == 0 {
        return Err(Error::InvalidConfig("samples_per_axis must be at least 1".into()));
    }
    let s = samples_per_axis;
    let inv = 1.0 / (s * s) as f64;
    let mut field = Field::zeros_on(grid, n_species);
    let mut sample = vec![0.0; n_species];
    let mut acc = vec![0.0; n_species];
    for i in 0..grid.nx() {
        for j in 0..grid.ny() {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for a in 0..s {
                let x = grid.spec().x1 + (i as f64 + (a as f64 + 0.5) / s as f64) * grid.dx();
                for b in 0..s {
                    let y = grid.spec().y1 + (j as f64 + (b as f64 + 0.5) / s as f64) * grid.dy();
                    ic(x, y, &mut sample);
                    for k in 0..n_species {
                        if !sample[k].is_finite() {
                            return Err(Error::NonFiniteInitial { i, j, species: k });
                        }
                        acc[k] += sample[k];
                    }
                }
            }
            for (k, &a) in acc.iter().enumerate() {
                field.set(k, i, j, if s == 1 { a } else { a * inv });
            }
        }
    }
    Ok(field)
}

/// A field extended by `width` ghost layers on every side.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostedField {
    nx: usize,
    ny: usize,
    width: usize,
    n_species: usize,
    data: Vec<f64>,
}

impl GhostedField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n_species(&self) -> usize {
        self.n_species
    }

    /// Length of one extended row (`ny + 2·width`).
    #[inline]
    pub fn row_len(&self) -> usize {
        self.ny + 2 * self.width
    }

    /// Extended storage of species `k`, `(nx + 2w) × (ny + 2w)` row-major.
    pub fn species(&self, k: usize) -> &[f64] {
        let n = (self.nx + 2 * self.width) * self.row_len();
        &self.data[k * n..(k + 1) * n]
    }

    /// Value at interior-relative indices; ghosts have `i < 0`, `i >= nx`, etc.
    #[inline]
    pub fn get(&self, k: usize, i: isize, j: isize) -> f64 {
        let w = self.width as isize;
        let ii = (i + w) as usize;
        let jj = (j + w) as usize;
        self.species(k)[ii * self.row_len() + jj]
    }

    /// Extended row `i` (interior-relative, may be a ghost row) of species `k`.
    pub fn row(&self, k: usize, i: isize) -> &[f64] {
        let ii = (i + self.width as isize) as usize;
        let len = self.row_len();
        &self.species(k)[ii * len..(ii + 1) * len]
    }
}

#[inline]
fn ghost_index(idx: isize, n: usize, bc: BoundaryKind) -> usize {
    let n = n as isize;
    match bc {
        BoundaryKind::Periodic => idx.rem_euclid(n) as usize,
        BoundaryKind::NoFlow | BoundaryKind::Outflow => idx.clamp(0, n - 1) as usize,
    }
}

/// Extends `field` by `width` ghost layers.
///
/// `NoFlow` and `Outflow` copy the nearest interior value; `Periodic` wraps.
/// Corner ghosts follow the same rule in both directions.
pub fn fill_ghosts(field: &Field, bc: BoundaryKind, width: usize) -> Result<GhostedField> {
    let (nx, ny) = (field.nx(), field.ny());
    if width > nx || width > ny {
        return Err(Error::InvalidConfig(format!(
            "ghost width {width} exceeds interior extent {nx} x {ny}"
        )));
    }
    let ex = nx + 2 * width;
    let ey = ny + 2 * width;
    let w = width as isize;
    let cols: Vec<usize> = (0..ey as isize).map(|jj| ghost_index(jj - w, ny, bc)).collect();
    let mut data = Vec::with_capacity(field.n_species() * ex * ey);
    for k in 0..field.n_species() {
        let src = field.species(k);
        for ii in 0..ex as isize {
            let i = ghost_index(ii - w, nx, bc);
            let row = &src[i * ny..(i + 1) * ny];
            data.extend(cols.iter().map(|&j| row[j]));
        }
    }
    Ok(GhostedField {
        nx,
        ny,
        width,
        n_species: field.n_species(),
        data,
    })
}
