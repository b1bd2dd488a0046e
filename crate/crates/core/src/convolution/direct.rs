// Direct summation over the sparse stencils.
//
// Each species is copied into a zero-padded (or periodically wrapped) buffer
// so that every stencil entry becomes a fixed flat offset from the face's
// base index. Faces are reduced independently in stencil order.

use alloc::vec;
use alloc::vec::Vec;

use super::FaceConvolutions;
use crate::grid::Field;
use crate::kernels::KernelStencil;
use crate::par;

#[derive(Debug, Clone, Copy)]
struct Tap {
    offset: isize,
    weight: f64,
}

pub(crate) struct DirectPlan {
    nx: usize,
    ny: usize,
    species: usize,
    channels: usize,
    margin_x: usize,
    margin_y: usize,
    periodic: bool,
    // per channel, in stencil order; offsets include the species plane
    taps_x: Vec<Vec<Tap>>,
    taps_y: Vec<Vec<Tap>>,
}

impl DirectPlan {
    pub(crate) fn new(sx: &KernelStencil, sy: &KernelStencil, periodic: bool) -> Self {
        let (nx, ny) = sx.grid_shape();
        let lx = sx.half_widths().0.max(sy.half_widths().0);
        let ly = sx.half_widths().1.max(sy.half_widths().1);
        let (margin_x, margin_y) = (lx + 1, ly + 1);
        let pny = ny + 2 * margin_y;
        let plane = (nx + 2 * margin_x) * pny;
        let compile = |s: &KernelStencil, sx: isize, sy: isize| -> Vec<Vec<Tap>> {
            (0..s.n_channels())
                .map(|q| {
                    s.channel(q)
                        .iter()
                        .map(|e| Tap {
                            offset: (e.species * plane) as isize
                                - (e.dl as isize + sx) * pny as isize
                                - (e.dp as isize + sy),
                            weight: e.weight,
                        })
                        .collect()
                })
                .collect()
        };
        Self {
            nx,
            ny,
            species: sx.n_species(),
            channels: sx.n_channels(),
            margin_x,
            margin_y,
            periodic,
            taps_x: compile(sx, 1, 0),
            taps_y: compile(sy, 0, 1),
        }
    }

    fn padded(&self, field: &Field) -> Vec<f64> {
        let (nx, ny) = (self.nx, self.ny);
        let pnx = nx + 2 * self.margin_x;
        let pny = ny + 2 * self.margin_y;
        let mut buf = vec![0.0; self.species * pnx * pny];
        for k in 0..self.species {
            let src = field.species(k);
            let dst = &mut buf[k * pnx * pny..(k + 1) * pnx * pny];
            if self.periodic {
                for pi in 0..pnx {
                    let i = (pi as isize - self.margin_x as isize).rem_euclid(nx as isize) as usize;
                    for pj in 0..pny {
                        let j = (pj as isize - self.margin_y as isize).rem_euclid(ny as isize) as usize;
                        dst[pi * pny + pj] = src[i * ny + j];
                    }
                }
            } else {
                for i in 0..nx {
                    let s = (i + self.margin_x) * pny + self.margin_y;
                    dst[s..s + ny].copy_from_slice(&src[i * ny..(i + 1) * ny]);
                }
            }
        }
        buf
    }

    pub(crate) fn evaluate(&self, field: &Field, out: &mut FaceConvolutions) {
        let buf = self.padded(field);
        let buf = &buf[..];
        let (ny, m) = (self.ny, self.channels);
        let pny = ny + 2 * self.margin_y;
        let (mx, my) = (self.margin_x, self.margin_y);
        let (a, b) = out.parts_mut();

        par::for_each_row(a, ny * m, |fi, row| {
            for j in 0..ny {
                let base = ((fi + mx) * pny + j + my) as isize;
                for (q, taps) in self.taps_x.iter().enumerate() {
                    row[j * m + q] = reduce(buf, base, taps);
                }
            }
        });
        par::for_each_row(b, (ny + 1) * m, |i, row| {
            for fj in 0..=ny {
                let base = ((i + mx) * pny + fj + my) as isize;
                for (q, taps) in self.taps_y.iter().enumerate() {
                    row[fj * m + q] = reduce(buf, base, taps);
                }
            }
        });
    }
}

#[inline]
fn reduce(buf: &[f64], base: isize, taps: &[Tap]) -> f64 {
    let mut acc = 0.0;
    for t in taps {
        acc += t.weight * buf[(base + t.offset) as usize];
    }
    acc
}
