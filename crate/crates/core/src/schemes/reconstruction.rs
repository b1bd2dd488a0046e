//! Minmod-limited piecewise-linear reconstruction.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::GhostedField;
use crate::par;

/// `sgn(a₁)·min|aₖ|` if all arguments share a strict sign, else 0.
#[inline]
pub fn minmod(a1: f64, a2: f64, a3: f64) -> f64 {
    if a1 > 0.0 && a2 > 0.0 && a3 > 0.0 {
        a1.min(a2).min(a3)
    } else if a1 < 0.0 && a2 < 0.0 && a3 < 0.0 {
        a1.max(a2).max(a3)
    } else {
        0.0
    }
}

/// Limited slope `σ = 2θ·minmod(ρ₀ − ρ₋, (ρ₊ − ρ₋)/2, ρ₊ − ρ₀)`.
#[inline]
pub fn limited_slope(minus: f64, center: f64, plus: f64, theta: f64) -> f64 {
    2.0 * theta * minmod(center - minus, 0.5 * (plus - minus), plus - center)
}

/// Slopes `σˣ` on cells `i ∈ [−1, nx]` and `σʸ` on `j ∈ [−1, ny]`, i.e. every
/// cell adjacent to a face of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Slopes {
    nx: usize,
    ny: usize,
    n_species: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Slopes {
    #[inline]
    pub fn x(&self, k: usize, i: isize, j: usize) -> f64 {
        self.x[(k * (self.nx + 2) + (i + 1) as usize) * self.ny + j]
    }

    #[inline]
    pub fn y(&self, k: usize, i: usize, j: isize) -> f64 {
        self.y[(k * self.nx + i) * (self.ny + 2) + (j + 1) as usize]
    }

    pub fn n_species(&self) -> usize {
        self.n_species
    }

    pub fn is_zero(&self) -> bool {
        self.x.iter().chain(&self.y).all(|&s| s == 0.0)
    }
}

/// Slopes of a ghost-filled field (ghost width ≥ 2).
pub fn limited_slopes(g: &GhostedField, theta: f64) -> Slopes {
    let (nx, ny, n) = (g.nx(), g.ny(), g.n_species());
    assert!(g.width() >= 2, "reconstruction needs two ghost layers");
    let w = g.width();
    let mut x = vec![0.0; n * (nx + 2) * ny];
    let mut y = vec![0.0; n * nx * (ny + 2)];
    if theta != 0.0 {
        par::for_each_row(&mut x, ny, |r, row| {
            let (k, i) = (r / (nx + 2), r % (nx + 2));
            let i = i as isize - 1;
            let (m, c, p) = (g.row(k, i - 1), g.row(k, i), g.row(k, i + 1));
            for j in 0..ny {
                row[j] = limited_slope(m[j + w], c[j + w], p[j + w], theta);
            }
        });
        par::for_each_row(&mut y, ny + 2, |r, row| {
            let (k, i) = (r / nx, r % nx);
            let c = g.row(k, i as isize);
            for (jj, s) in row.iter_mut().enumerate() {
                // jj = j + 1 with j ∈ [−1, ny]
                let at = jj + w - 1;
                *s = limited_slope(c[at - 1], c[at], c[at + 1], theta);
            }
        });
    }
    Slopes {
        nx,
        ny,
        n_species: n,
        x,
        y,
    }
}

/// Face traces of the reconstruction.
///
/// At x-face `fi` (between cells `fi − 1` and `fi`) the minus trace comes
/// from the left cell, `ρ + σˣ/2`, and the plus trace from the right cell,
/// `ρ − σˣ/2`; y-faces likewise with `σʸ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedFaces {
    nx: usize,
    ny: usize,
    n_species: usize,
    x_minus: Vec<f64>,
    x_plus: Vec<f64>,
    y_minus: Vec<f64>,
    y_plus: Vec<f64>,
}

impl ReconstructedFaces {
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n_species(&self) -> usize {
        self.n_species
    }

    /// `ρ⁻` at x-face `(fi, j)`.
    #[inline]
    pub fn x_minus(&self, k: usize, fi: usize, j: usize) -> f64 {
        self.x_minus[(k * (self.nx + 1) + fi) * self.ny + j]
    }

    /// `ρ⁺` at x-face `(fi, j)`.
    #[inline]
    pub fn x_plus(&self, k: usize, fi: usize, j: usize) -> f64 {
        self.x_plus[(k * (self.nx + 1) + fi) * self.ny + j]
    }

    /// `ρ⁻` at y-face `(i, fj)`.
    #[inline]
    pub fn y_minus(&self, k: usize, i: usize, fj: usize) -> f64 {
        self.y_minus[(k * self.nx + i) * (self.ny + 1) + fj]
    }

    /// `ρ⁺` at y-face `(i, fj)`.
    #[inline]
    pub fn y_plus(&self, k: usize, i: usize, fj: usize) -> f64 {
        self.y_plus[(k * self.nx + i) * (self.ny + 1) + fj]
    }

    pub fn min(&self) -> f64 {
        self.x_minus
            .iter()
            .chain(&self.x_plus)
            .chain(&self.y_minus)
            .chain(&self.y_plus)
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn face_values(g: &GhostedField, slopes: &Slopes) -> ReconstructedFaces {
    let (nx, ny, n) = (g.nx(), g.ny(), g.n_species());
    let w = g.width();
    let mut x_minus = vec![0.0; n * (nx + 1) * ny];
    let mut x_plus = vec![0.0; n * (nx + 1) * ny];
    let mut y_minus = vec![0.0; n * nx * (ny + 1)];
    let mut y_plus = vec![0.0; n * nx * (ny + 1)];

    par::for_each_row(&mut x_minus, ny, |r, row| {
        let (k, fi) = (r / (nx + 1), (r % (nx + 1)) as isize);
        let c = g.row(k, fi - 1);
        for j in 0..ny {
            row[j] = c[j + w] + 0.5 * slopes.x(k, fi - 1, j);
        }
    });
    par::for_each_row(&mut x_plus, ny, |r, row| {
        let (k, fi) = (r / (nx + 1), (r % (nx + 1)) as isize);
        let c = g.row(k, fi);
        for j in 0..ny {
            row[j] = c[j + w] - 0.5 * slopes.x(k, fi, j);
        }
    });
    par::for_each_row(&mut y_minus, ny + 1, |r, row| {
        let (k, i) = (r / nx, r % nx);
        let c = g.row(k, i as isize);
        for (fj, v) in row.iter_mut().enumerate() {
            let j = fj as isize - 1;
            *v = c[fj + w - 1] + 0.5 * slopes.y(k, i, j);
        }
    });
    par::for_each_row(&mut y_plus, ny + 1, |r, row| {
        let (k, i) = (r / nx, r % nx);
        let c = g.row(k, i as isize);
        for (fj, v) in row.iter_mut().enumerate() {
            *v = c[fj + w] - 0.5 * slopes.y(k, i, fj as isize);
        }
    });
    ReconstructedFaces {
        nx,
        ny,
        n_species: n,
        x_minus,
        x_plus,
        y_minus,
        y_plus,
    }
}
