// Convolution by zero-padded 2D FFT.
//
// The transform size is large enough that the cyclic convolution does not
// alias onto any output face (or equals the grid size under periodic
// boundaries, where aliasing is the wrap). Two real species are packed into
// one complex transform (an unpaired one uses a real-input transform), and the x-face and y-face results of one channel
// come back from a single inverse transform as its real and imaginary parts.

use std::sync::{Arc, Mutex};
use std::vec;
use std::vec::Vec;

use realfft::{RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::FaceConvolutions;
use crate::grid::Field;
use crate::kernels::KernelStencil;
use crate::par;

type C = Complex<f64>;

const TILE: usize = 32;

pub(crate) struct FftPlan {
    nx: usize,
    ny: usize,
    species: usize,
    channels: usize,
    px: usize,
    py: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    real_y: Arc<dyn RealToComplex<f64>>,
    // distinct kernel spectra, layout (ky, kx), pre-scaled by 1/(px·py)
    spectra: Vec<Vec<C>>,
    map_x: Vec<Option<usize>>,
    map_y: Vec<Option<usize>>,
    // px·py buffers reused across evaluations; contents are stale
    pool: Mutex<Vec<Vec<C>>>,
}

/// Smallest `P ≥ n` whose prime factors are all ≤ 7.
fn smooth_size(n: usize) -> usize {
    let mut p = n.max(1);
    loop {
        let mut m = p;
        for f in [2, 3, 5, 7] {
            while m % f == 0 {
                m /= f;
            }
        }
        if m == 1 {
            return p;
        }
        p += 1;
    }
}

// Output index n in [0, n_out) reads input n − a for a in [a_min, a_max];
// indices outside [0, n_in) must land in the zero padding.
fn alias_free(n_in: usize, n_out: usize, a_min: i32, a_max: i32) -> usize {
    let n_in = n_in as i64;
    let n_out = n_out as i64;
    let need = (n_in + a_max.max(0) as i64)
        .max(n_out + (-a_min).max(0) as i64)
        .max(n_out)
        .max(n_in);
    need as usize
}

fn transform_sizes(sx: &KernelStencil, sy: &KernelStencil, periodic: bool) -> (usize, usize) {
    let (nx, ny) = sx.grid_shape();
    if periodic {
        return (nx, ny);
    }
    let (mut px, mut py) = (nx, ny);
    if let Some((l0, l1, p0, p1)) = sx.offset_bounds() {
        px = px.max(alias_free(nx, nx + 1, l0 + 1, l1 + 1));
        py = py.max(alias_free(ny, ny, p0, p1));
    }
    if let Some((l0, l1, p0, p1)) = sy.offset_bounds() {
        px = px.max(alias_free(nx, nx, l0, l1));
        py = py.max(alias_free(ny, ny + 1, p0 + 1, p1 + 1));
    }
    (smooth_size(px), smooth_size(py))
}

fn nlogn(n: usize) -> f64 {
    let n = n as f64;
    n * n.log2().max(1.0)
}

fn fft_rows(fft: &Arc<dyn Fft<f64>>, data: &mut [C], len: usize) {
    let rows = data.len() / len;
    if rows == 0 {
        return;
    }
    let per_task = rows.div_ceil(64).max(1);
    par::for_each_chunk(data, per_task * len, |_, chunk| {
        let mut scratch = vec![C::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(chunk, &mut scratch);
    });
}

/// `dst[c][r] = src[r][c]` for a `rows × cols` source, for `c < cols_out`;
/// source rows at or beyond `valid` are read as zero.
fn transpose_into(src: &[C], rows: usize, cols: usize, valid: usize, cols_out: usize, dst: &mut [C]) {
    let valid = valid.min(rows);
    par::for_each_chunk(&mut dst[..cols_out * rows], TILE * rows, |block, out| {
        let c0 = block * TILE;
        let c1 = (c0 + TILE).min(cols_out);
        for r0 in (0..valid).step_by(TILE) {
            let r1 = (r0 + TILE).min(valid);
            for c in c0..c1 {
                let o = &mut out[(c - c0) * rows..(c - c0 + 1) * rows];
                for r in r0..r1 {
                    o[r] = src[r * cols + c];
                }
            }
        }
        for c in c0..c1 {
            out[(c - c0) * rows + valid..(c - c0 + 1) * rows].fill(C::default());
        }
    });
}

#[cfg(test)]
fn transpose(src: &[C], rows: usize, cols: usize) -> Vec<C> {
    let mut dst = vec![C::default(); rows * cols];
    transpose_into(src, rows, cols, rows, cols, &mut dst);
    dst
}

impl FftPlan {
    pub(crate) fn new(sx: &KernelStencil, sy: &KernelStencil, periodic: bool) -> Self {
        let (nx, ny) = sx.grid_shape();
        let (px, py) = transform_sizes(sx, sy, periodic);
        let mut planner = FftPlanner::new();
        let mut plan = Self {
            nx,
            ny,
            species: sx.n_species(),
            channels: sx.n_channels(),
            px,
            py,
            fwd_x: planner.plan_fft_forward(px),
            fwd_y: planner.plan_fft_forward(py),
            inv_x: planner.plan_fft_inverse(px),
            inv_y: planner.plan_fft_inverse(py),
            real_y: RealFftPlanner::new().plan_fft_forward(py),
            spectra: Vec::new(),
            map_x: Vec::new(),
            map_y: Vec::new(),
            pool: Mutex::new(Vec::new()),
        };
        let mut keys: Vec<Vec<(i32, i32, u64)>> = Vec::new();
        let mut maps = [Vec::new(), Vec::new()];
        for (s, shift, map) in [(sx, (1, 0), 0), (sy, (0, 1), 1)] {
            let map = &mut maps[map];
            for q in 0..s.n_channels() {
                for k in 0..s.n_species() {
                    let key: Vec<(i32, i32, u64)> = s
                        .weights(q, k)
                        .map(|e| (e.dl + shift.0, e.dp + shift.1, e.weight.to_bits()))
                        .collect();
                    if key.is_empty() {
                        map.push(None);
                        continue;
                    }
                    let idx = match keys.iter().position(|other| *other == key) {
                        Some(idx) => idx,
                        None => {
                            let spectrum = plan.kernel_spectrum(&key);
                            plan.spectra.push(spectrum);
                            keys.push(key);
                            keys.len() - 1
                        }
                    };
                    map.push(Some(idx));
                }
            }
        }
        let [mx, my] = maps;
        plan.map_x = mx;
        plan.map_y = my;
        plan
    }

    /// Operation count comparable to one multiply-add of the direct path.
    pub(crate) fn estimated_cost(sx: &KernelStencil, sy: &KernelStencil, periodic: bool) -> f64 {
        let (nx, _) = sx.grid_shape();
        let (px, py) = transform_sizes(sx, sy, periodic);
        let pairs = sx.n_species().div_ceil(2) as f64;
        let m = sx.n_channels() as f64;
        let forward = nx as f64 * nlogn(py) + py as f64 * nlogn(px);
        let inverse = py as f64 * nlogn(px) + (nx + 1).min(px) as f64 * nlogn(py);
        let mixing = (px * py) as f64 * m * sx.n_species() as f64 * 2.0;
        3.0 * (pairs * forward + m * inverse) + mixing
    }

    fn kernel_spectrum(&self, taps: &[(i32, i32, u64)]) -> Vec<C> {
        let (px, py) = (self.px, self.py);
        let mut buf = vec![C::default(); px * py];
        for &(a, b, w) in taps {
            let i = (a as i64).rem_euclid(px as i64) as usize;
            let j = (b as i64).rem_euclid(py as i64) as usize;
            buf[i * py + j].re += f64::from_bits(w);
        }
        let mut t = vec![C::default(); px * py];
        self.forward(&mut buf, px, &mut t);
        let scale = 1.0 / (px * py) as f64;
        for v in &mut t {
            *v *= scale;
        }
        t
    }

    fn take(&self) -> Vec<C> {
        let reused = self.pool.lock().ok().and_then(|mut p| p.pop());
        reused.unwrap_or_else(|| vec![C::default(); self.px * self.py])
    }

    fn give(&self, buf: Vec<C>) {
        if let Ok(mut p) = self.pool.lock() {
            p.push(buf);
        }
    }

    // (x, y) layout in `buf`, of which only the first `rows` x-rows are
    // read (and overwritten); (ky, kx) layout out.
    fn forward(&self, buf: &mut [C], rows: usize, out: &mut [C]) {
        let (px, py) = (self.px, self.py);
        fft_rows(&self.fwd_y, &mut buf[..rows * py], py);
        transpose_into(buf, px, py, rows, py, out);
        fft_rows(&self.fwd_x, out, px);
    }

    // As `forward` for a real `nx × ny` species; the ky > py/2 half of the
    // spectrum follows from conjugate symmetry.
    fn forward_real(&self, re: &[f64], work: &mut [C], out: &mut [C]) {
        let (nx, ny, px, py) = (self.nx, self.ny, self.px, self.py);
        let h = py / 2 + 1;
        let r2c = &self.real_y;
        let per_task = nx.div_ceil(64).max(1);
        par::for_each_chunk(&mut work[..nx * py], per_task * py, |c, rows| {
            let mut input = r2c.make_input_vec();
            let mut scratch = r2c.make_scratch_vec();
            for (r, row) in rows.chunks_mut(py).enumerate() {
                let i = c * per_task + r;
                input[..ny].copy_from_slice(&re[i * ny..(i + 1) * ny]);
                input[ny..].fill(0.0);
                r2c.process_with_scratch(&mut input, &mut row[..h], &mut scratch)
                    .expect("buffer lengths match the plan");
            }
        });
        transpose_into(work, px, py, nx, h, out);
        fft_rows(&self.fwd_x, &mut out[..h * px], px);
        let (lo, hi) = out.split_at_mut(h * px);
        let lo = &*lo;
        par::for_each_chunk(hi, px, |r, row| {
            let src = &lo[(py - h - r) * px..(py - h - r + 1) * px];
            for (kx, v) in row.iter_mut().enumerate() {
                *v = src[(px - kx) % px].conj();
            }
        });
    }

    // (ky, kx) layout in `t` (overwritten), (x, y) layout out; only the
    // first `rows` x-rows of `out` are written.
    fn inverse(&self, t: &mut [C], rows: usize, out: &mut [C]) {
        let (px, py) = (self.px, self.py);
        fft_rows(&self.inv_x, t, px);
        transpose_into(t, py, px, py, rows, out);
        fft_rows(&self.inv_y, &mut out[..rows * py], py);
    }

    pub(crate) fn evaluate(&self, field: &Field, out: &mut FaceConvolutions) {
        let (nx, ny, px, py) = (self.nx, self.ny, self.px, self.py);
        let n = self.species;
        let m = self.channels;

        let mut work = self.take();
        let packed: Vec<Vec<C>> = (0..n.div_ceil(2))
            .map(|p| {
                let re = field.species(2 * p);
                let mut z = self.take();
                if 2 * p + 1 == n {
                    self.forward_real(re, &mut work, &mut z);
                    return z;
                }
                let im = field.species(2 * p + 1);
                for (i, row) in work.chunks_mut(py).take(nx).enumerate() {
                    for (j, v) in row[..ny].iter_mut().enumerate() {
                        *v = C::new(re[i * ny + j], im[i * ny + j]);
                    }
                    row[ny..].fill(C::default());
                }
                self.forward(&mut work, nx, &mut z);
                z
            })
            .collect();

        let rows = (nx + 1).min(px);
        let (a, b) = out.parts_mut();
        for q in 0..m {
            let mut g = self.take();
            par::for_each_chunk(&mut g, px, |ky, row| {
                let mky = (py - ky) % py;
                for (kx, gv) in row.iter_mut().enumerate() {
                    let idx = ky * px + kx;
                    let midx = mky * px + (px - kx) % px;
                    let mut s = C::default();
                    let mut t = C::default();
                    for k in 0..n {
                        let (ix, iy) = (self.map_x[q * n + k], self.map_y[q * n + k]);
                        if ix.is_none() && iy.is_none() {
                            continue;
                        }
                        let z = &packed[k / 2];
                        let r = if (k ^ 1) < n {
                            let (zk, zm) = (z[idx], z[midx].conj());
                            if k % 2 == 0 {
                                (zk + zm) * 0.5
                            } else {
                                (zk - zm) * C::new(0.0, -0.5)
                            }
                        } else {
                            z[idx]
                        };
                        if let Some(ix) = ix {
                            s += self.spectra[ix][idx] * r;
                        }
                        if let Some(iy) = iy {
                            t += self.spectra[iy][idx] * r;
                        }
                    }
                    *gv = C::new(s.re - t.im, s.im + t.re);
                }
            });
            self.inverse(&mut g, rows, &mut work);
            let u = &work;
            for fi in 0..=nx {
                let src = &u[(fi % px) * py..];
                for j in 0..ny {
                    a[(fi * ny + j) * m + q] = src[j].re;
                }
            }
            for i in 0..nx {
                let src = &u[i * py..(i + 1) * py];
                for fj in 0..=ny {
                    b[(i * (ny + 1) + fj) * m + q] = src[fj % py].im;
                }
            }
            self.give(g);
        }
        self.give(work);
        for z in packed {
            self.give(z);
        }
    }
}
