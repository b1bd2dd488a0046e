// Straight-line transcription of the schemes on tiny grids.
//
// Nothing here calls into the library: the kernel, the fluxes, the
// reconstruction, the quadrature of the convolutions and the update are all
// written out from the formulas, cell by cell and face by face, with plain
// nested vectors. Arrays are indexed [species][i][j].

#![allow(dead_code, clippy::needless_range_loop, clippy::type_complexity)]

use std::f64::consts::PI;

pub type Grid3 = Vec<Vec<Vec<f64>>>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Walls {
    // zero flux through the boundary faces, copied ghosts
    NoFlow,
    // copied ghosts
    Outflow,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Problem {
    Crowd { r: f64 },
    Kk { r: f64 },
    KkLocal,
}

#[derive(Clone, Copy, Debug)]
pub struct Setup {
    pub x1: f64,
    pub y1: f64,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub walls: Walls,
    pub problem: Problem,
}

impl Setup {
    fn species(&self) -> usize {
        match self.problem {
            Problem::Crowd { .. } => 1,
            _ => 2,
        }
    }

    fn xc(&self, i: f64) -> f64 {
        self.x1 + (i + 0.5) * self.dx
    }

    fn yc(&self, j: f64) -> f64 {
        self.y1 + (j + 0.5) * self.dy
    }
}

fn kernel(r: f64, x: f64, y: f64) -> f64 {
    let z = PI * r.powi(8) / 4.0;
    let s = r * r - x * x - y * y;
    if s > 0.0 {
        s * s * s / z
    } else {
        0.0
    }
}

fn v1(x: f64, y: f64) -> f64 {
    if x < 9.5 && (-1.0..=1.0).contains(&y) {
        (1.0 - y * y).powi(3) * (-1.0 / ((x - 9.5) * (x - 9.5))).exp()
    } else {
        0.0
    }
}

fn v2(y: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        -2.0 * y * (1.0 - 1.0 / (y * y)).exp()
    }
}

fn minmod3(a: f64, b: f64, c: f64) -> f64 {
    let s = a.signum();
    if a != 0.0 && b != 0.0 && c != 0.0 && b.signum() == s && c.signum() == s {
        s * a.abs().min(b.abs()).min(c.abs())
    } else {
        0.0
    }
}

// cell value with copied ghosts
fn at(rho: &Grid3, k: usize, i: isize, j: isize) -> f64 {
    let nx = rho[k].len() as isize;
    let ny = rho[k][0].len() as isize;
    rho[k][i.clamp(0, nx - 1) as usize][j.clamp(0, ny - 1) as usize]
}

// x-convolution of species `k` at the face between cells i and i+1, row j
fn conv_x(s: &Setup, r: f64, rho: &Grid3, k: usize, i: isize, j: isize) -> f64 {
    let xf = s.x1 + (i as f64 + 1.0) * s.dx;
    let yf = s.yc(j as f64);
    let mut total = 0.0;
    for l in 0..s.nx {
        for p in 0..s.ny {
            total += s.dx * s.dy * kernel(r, xf - s.xc(l as f64), yf - s.yc(p as f64)) * rho[k][l][p];
        }
    }
    total
}

fn conv_y(s: &Setup, r: f64, rho: &Grid3, k: usize, i: isize, j: isize) -> f64 {
    let xf = s.xc(i as f64);
    let yf = s.y1 + (j as f64 + 1.0) * s.dy;
    let mut total = 0.0;
    for l in 0..s.nx {
        for p in 0..s.ny {
            total += s.dx * s.dy * kernel(r, xf - s.xc(l as f64), yf - s.yc(p as f64)) * rho[k][l][p];
        }
    }
    total
}

/// `A` (x == true) or `B` of every species at the face after cell (i, j).
fn nonlocal(s: &Setup, rho: &Grid3, i: isize, j: isize, x: bool) -> Vec<f64> {
    let n = s.species();
    (0..n)
        .map(|k| match s.problem {
            Problem::Crowd { r } | Problem::Kk { r } => {
                if x {
                    conv_x(s, r, rho, k, i, j)
                } else {
                    conv_y(s, r, rho, k, i, j)
                }
            }
            Problem::KkLocal => {
                if x {
                    (at(rho, k, i, j) + at(rho, k, i + 1, j)) / 2.0
                } else {
                    (at(rho, k, i, j) + at(rho, k, i, j + 1)) / 2.0
                }
            }
        })
        .collect()
}

fn f_phys(s: &Setup, x: f64, y: f64, rho: f64, a: &[f64]) -> f64 {
    match s.problem {
        Problem::Crowd { .. } => rho * (1.0 - rho) * (1.0 - a[0]) * v1(x, y),
        _ => rho * (a[0] * a[0] + a[1] * a[1]).sin(),
    }
}

fn g_phys(s: &Setup, y: f64, rho: f64, b: &[f64]) -> f64 {
    match s.problem {
        Problem::Crowd { .. } => rho * (1.0 - rho) * (1.0 - b[0]) * v2(y),
        _ => rho * (b[0] * b[0] + b[1] * b[1]).cos(),
    }
}

/// One forward-Euler stage.
pub fn euler(s: &Setup, rho: &Grid3, dt: f64) -> Grid3 {
    let n = s.species();
    let (nx, ny) = (s.nx as isize, s.ny as isize);
    let lx = dt / s.dx;
    let ly = dt / s.dy;
    let sig_x = |k: usize, i: isize, j: isize| {
        2.0 * s.theta
            * minmod3(
                at(rho, k, i, j) - at(rho, k, i - 1, j),
                0.5 * (at(rho, k, i + 1, j) - at(rho, k, i - 1, j)),
                at(rho, k, i + 1, j) - at(rho, k, i, j),
            )
    };
    let sig_y = |k: usize, i: isize, j: isize| {
        2.0 * s.theta
            * minmod3(
                at(rho, k, i, j) - at(rho, k, i, j - 1),
                0.5 * (at(rho, k, i, j + 1) - at(rho, k, i, j - 1)),
                at(rho, k, i, j + 1) - at(rho, k, i, j),
            )
    };
    // F at face (i + 1/2, j) for i in -1..nx
    let flux_f = |k: usize, i: isize, j: isize| -> f64 {
        if s.walls == Walls::NoFlow && (i == -1 || i == nx - 1) {
            return 0.0;
        }
        let u = at(rho, k, i, j) + sig_x(k, i, j) / 2.0;
        let v = at(rho, k, i + 1, j) - sig_x(k, i + 1, j) / 2.0;
        let a = nonlocal(s, rho, i, j, true);
        let xf = s.x1 + (i as f64 + 1.0) * s.dx;
        let yf = s.yc(j as f64);
        (f_phys(s, xf, yf, u, &a) + f_phys(s, xf, yf, v, &a)) / 2.0 - s.alpha * (v - u) / (2.0 * lx)
    };
    let flux_g = |k: usize, i: isize, j: isize| -> f64 {
        if s.walls == Walls::NoFlow && (j == -1 || j == ny - 1) {
            return 0.0;
        }
        let u = at(rho, k, i, j) + sig_y(k, i, j) / 2.0;
        let v = at(rho, k, i, j + 1) - sig_y(k, i, j + 1) / 2.0;
        let b = nonlocal(s, rho, i, j, false);
        let yf = s.y1 + (j as f64 + 1.0) * s.dy;
        (g_phys(s, yf, u, &b) + g_phys(s, yf, v, &b)) / 2.0 - s.beta * (v - u) / (2.0 * ly)
    };
    let mut out = rho.clone();
    for k in 0..n {
        for i in 0..nx {
            for j in 0..ny {
                out[k][i as usize][j as usize] = rho[k][i as usize][j as usize]
                    - lx * (flux_f(k, i, j) - flux_f(k, i - 1, j))
                    - ly * (flux_g(k, i, j) - flux_g(k, i, j - 1));
            }
        }
    }
    out
}

/// `(ρ + E(E(ρ)))/2`.
pub fn rk2(s: &Setup, rho: &Grid3, dt: f64) -> Grid3 {
    let one = euler(s, rho, dt);
    let two = euler(s, &one, dt);
    let mut out = rho.clone();
    for k in 0..rho.len() {
        for i in 0..rho[k].len() {
            for j in 0..rho[k][i].len() {
                out[k][i][j] = (rho[k][i][j] + two[k][i][j]) / 2.0;
            }
        }
    }
    out
}

/// `A` at every x-face (outer index = face 0..=nx) and `B` at every y-face.
pub fn all_faces(s: &Setup, rho: &Grid3) -> (Vec<Vec<Vec<f64>>>, Vec<Vec<Vec<f64>>>) {
    let (nx, ny) = (s.nx as isize, s.ny as isize);
    let a = (-1..nx)
        .map(|i| (0..ny).map(|j| nonlocal(s, rho, i, j, true)).collect())
        .collect();
    let b = (0..nx)
        .map(|i| (-1..ny).map(|j| nonlocal(s, rho, i, j, false)).collect())
        .collect();
    (a, b)
}
