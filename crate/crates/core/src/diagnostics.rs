//! Norms, cross-resolution errors, convergence orders and run records.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::math;

/// Discrete `L¹` norms, `ΔxΔy Σ|ρᵏ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Norms {
    pub per_species: Vec<f64>,
    pub total: f64,
}

pub fn l1_norm(field: &Field, grid: &Grid) -> L1Norms {
    let per_species: Vec<f64> = (0..field.n_species())
        .map(|k| field.species(k).iter().map(|v| v.abs()).sum::<f64>() * grid.cell_area())
        .collect();
    let total = per_species.iter().sum();
    L1Norms { per_species, total }
}

/// `maxₖ max |ρᵏ|`.
pub fn linf_norm(field: &Field) -> f64 {
    field.max_abs()
}

/// Smallest value over all species and cells.
pub fn min_value(field: &Field) -> f64 {
    field.min()
}

/// Averages `factor × factor` blocks of `fine` onto the nested coarse grid.
pub fn restrict(fine: &Field, factor: usize) -> Result<Field> {
    if factor == 0 || fine.nx() % factor != 0 || fine.ny() % factor != 0 {
        return Err(Error::DimensionMismatch(format!(
            "cannot restrict a {}x{} field by {factor}",
            fine.nx(),
            fine.ny()
        )));
    }
    let (nx, ny) = (fine.nx() / factor, fine.ny() / factor);
    let scale = 1.0 / (factor * factor) as f64;
    let mut data = vec![0.0; fine.n_species() * nx * ny];
    for k in 0..fine.n_species() {
        let src = fine.species(k);
        let dst = &mut data[k * nx * ny..(k + 1) * nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                let mut acc = 0.0;
                for a in 0..factor {
                    let row = (i * factor + a) * fine.ny() + j * factor;
                    for b in 0..factor {
                        acc += src[row + b];
                    }
                }
                dst[i * ny + j] = acc * scale;
            }
        }
    }
    Field::from_vec(fine.n_species(), nx, ny, data)
}

/// `ΔxΔy Σ|aᵏ − bᵏ|` per species.
pub fn l1_distance(a: &Field, b: &Field, grid: &Grid) -> Result<Vec<f64>> {
    if !a.same_shape(b) || !a.matches(grid) {
        return Err(Error::DimensionMismatch(format!(
            "fields {}x{}x{} and {}x{}x{} on a {}x{} grid",
            a.n_species(),
            a.nx(),
            a.ny(),
            b.n_species(),
            b.nx(),
            b.ny(),
            grid.nx(),
            grid.ny()
        )));
    }
    Ok((0..a.n_species())
        .map(|k| {
            a.species(k)
                .iter()
                .zip(b.species(k))
                .map(|(x, y)| (x - y).abs())
                .sum::<f64>()
                * grid.cell_area()
        })
        .collect())
}

/// `log₂(e_coarse / e_fine)`; `None` unless both errors are positive.
pub fn eoc(e_coarse: f64, e_fine: f64) -> Option<f64> {
    if e_coarse > 0.0 && e_fine > 0.0 && e_coarse.is_finite() && e_fine.is_finite() {
        Some(math::ln(e_coarse / e_fine) / core::f64::consts::LN_2)
    } else {
        None
    }
}

/// `‖ρ₀‖∞ · exp(4M(1 + K‖ρ₀‖₁)·t)`, where `K` bounds the kernel gradients.
pub fn linf_growth_bound(rho0_linf: f64, rho0_l1: f64, growth: f64, kernel_gradient: f64, t: f64) -> f64 {
    rho0_linf * math::exp(4.0 * growth * (1.0 + kernel_gradient * rho0_l1) * t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub min: f64,
    pub l1: Vec<f64>,
    pub linf: f64,
}

impl StepRecord {
    pub fn measure(step: usize, t: f64, field: &Field, grid: &Grid) -> Self {
        Self {
            step,
            t,
            min: min_value(field),
            l1: l1_norm(field, grid).per_species,
            linf: linf_norm(field),
        }
    }
}

/// Per-step history of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    records: Vec<StepRecord>,
}

impl RunReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record; times must increase strictly.
    pub fn push(&mut self, record: StepRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if record.t.partial_cmp(&last.t) != Some(core::cmp::Ordering::Greater) {
                return Err(Error::InvalidConfig(format!(
                    "report times must increase: {} after {}",
                    record.t, last.t
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn first(&self) -> Option<&StepRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }

    pub fn min_value(&self) -> f64 {
        self.records.iter().map(|r| r.min).fold(f64::INFINITY, f64::min)
    }

    /// Largest relative deviation of the total `L¹` norm from the first record.
    pub fn max_l1_drift(&self) -> f64 {
        let Some(first) = self.records.first() else {
            return 0.0;
        };
        let m0: f64 = first.l1.iter().sum();
        self.records
            .iter()
            .map(|r| (r.l1.iter().sum::<f64>() - m0).abs() / m0)
            .fold(0.0, f64::max)
    }
}
