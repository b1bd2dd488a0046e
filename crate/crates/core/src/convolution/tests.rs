use super::*;
use crate::grid::{fill_ghosts, GridSpec};
use crate::kernels::KernelSpec;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(nx: usize, ny: usize) -> Grid {
    Grid::new(GridSpec::new(0.0, 1.0, -0.5, 0.5, nx, ny)).unwrap()
}

fn random_field(n: usize, nx: usize, ny: usize, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Field::from_fn(n, nx, ny, |_, _, _| rng.random_range(0.0..1.0))
}

fn stencils(m: &KernelMatrix, g: &Grid) -> (KernelStencil, KernelStencil) {
    (
        build_stencil(m, g, Orientation::XFace).unwrap(),
        build_stencil(m, g, Orientation::YFace).unwrap(),
    )
}

// A 2-channel, 3-species matrix with gaps and different radii.
fn mixed_matrix() -> KernelMatrix {
    let mut m = KernelMatrix::zeros(2, 3);
    m.set(0, 0, Some(KernelSpec::cubic(0.21).unwrap()));
    m.set(0, 2, Some(KernelSpec::new(0.13, 2).unwrap()));
    m.set(1, 1, Some(KernelSpec::cubic(0.3).unwrap()));
    m.set(1, 2, Some(KernelSpec::new(0.08, 1).unwrap()));
    m
}

/// All-pairs loop over faces and cells, evaluating the kernel at the
/// physical offsets.
fn brute_force(g: &Grid, m: &KernelMatrix, rho: &Field, periodic: bool) -> FaceConvolutions {
    let (nx, ny) = (g.nx(), g.ny());
    let (lx, ly) = (g.spec().x2 - g.spec().x1, g.spec().y2 - g.spec().y1);
    let images: Vec<(f64, f64)> = if periodic {
        let mut v = Vec::new();
        for a in -2..=2 {
            for b in -2..=2 {
                v.push((a as f64 * lx, b as f64 * ly));
            }
        }
        v
    } else {
        vec![(0.0, 0.0)]
    };
    let mut out = FaceConvolutions::zeros(nx, ny, m.channels());
    let area = g.dx() * g.dy();
    let (a, b) = out.parts_mut();
    for q in 0..m.channels() {
        for fi in 0..=nx {
            for j in 0..ny {
                let (xf, yf) = (g.x_face(fi), g.y_center(j));
                let mut acc = 0.0;
                for k in 0..m.species() {
                    let Some(kern) = m.get(q, k) else { continue };
                    for l in 0..nx {
                        for p in 0..ny {
                            for &(sx, sy) in &images {
                                let dx = xf - (g.x_center(l) + sx);
                                let dy = yf - (g.y_center(p) + sy);
                                acc += area * kern.eval(dx, dy) * rho.get(k, l, p);
                            }
                        }
                    }
                }
                a[(fi * ny + j) * m.channels() + q] = acc;
            }
        }
        for i in 0..nx {
            for fj in 0..=ny {
                let (xf, yf) = (g.x_center(i), g.y_face(fj));
                let mut acc = 0.0;
                for k in 0..m.species() {
                    let Some(kern) = m.get(q, k) else { continue };
                    for l in 0..nx {
                        for p in 0..ny {
                            for &(sx, sy) in &images {
                                let dx = xf - (g.x_center(l) + sx);
                                let dy = yf - (g.y_center(p) + sy);
                                acc += area * kern.eval(dx, dy) * rho.get(k, l, p);
                            }
                        }
                    }
                }
                b[(i * (ny + 1) + fj) * m.channels() + q] = acc;
            }
        }
    }
    out
}

fn max_diff(x: &FaceConvolutions, y: &FaceConvolutions) -> f64 {
    x.a_values()
        .iter()
        .zip(y.a_values())
        .chain(x.b_values().iter().zip(y.b_values()))
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max)
}

#[test]
fn zero_field_gives_zero() {
    let g = grid(12, 10);
    let m = mixed_matrix();
    let (sx, sy) = stencils(&m, &g);
    let out = face_convolutions(&Field::zeros(3, 12, 10), &sx, &sy).unwrap();
    assert!(out.a_values().iter().chain(out.b_values()).all(|&v| v == 0.0));
}

#[test]
fn single_cell_reproduces_the_kernel() {
    let g = grid(16, 16);
    let kern = KernelSpec::cubic(0.2).unwrap();
    let m = KernelMatrix::diagonal(kern, 1);
    let (sx, sy) = stencils(&m, &g);
    let (l, p) = (7, 9);
    let mut rho = Field::zeros(1, 16, 16);
    rho.set(0, l, p, 1.0);
    let out = face_convolutions(&rho, &sx, &sy).unwrap();
    let area = g.dx() * g.dy();
    for fi in 0..=16 {
        for j in 0..16 {
            let expect = area * kern.eval(g.x_face(fi) - g.x_center(l), g.y_center(j) - g.y_center(p));
            assert!((out.a(0, fi, j) - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        }
    }
    for i in 0..16 {
        for fj in 0..=16 {
            let expect = area * kern.eval(g.x_center(i) - g.x_center(l), g.y_face(fj) - g.y_center(p));
            assert!((out.b(0, i, fj) - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        }
    }
}

#[test]
fn translation_invariance_spot_check() {
    let g = grid(20, 20);
    let m = KernelMatrix::diagonal(KernelSpec::cubic(0.17).unwrap(), 1);
    let (sx, sy) = stencils(&m, &g);
    let mut one = Field::zeros(1, 20, 20);
    one.set(0, 6, 6, 1.0);
    let mut two = Field::zeros(1, 20, 20);
    two.set(0, 11, 9, 1.0);
    let a = face_convolutions(&one, &sx, &sy).unwrap();
    let b = face_convolutions(&two, &sx, &sy).unwrap();
    assert_eq!(a.a(0, 8, 5), b.a(0, 13, 8));
    assert_eq!(a.b(0, 5, 7), b.b(0, 10, 10));
}

#[test]
fn constant_field_interior_matches_weight_sum() {
    let g = Grid::new(GridSpec::new(0.0, 4.0, 0.0, 4.0, 80, 80)).unwrap();
    let m = KernelMatrix::diagonal(KernelSpec::cubic(0.4).unwrap(), 1);
    let (sx, sy) = stencils(&m, &g);
    let c = 0.7;
    let out = face_convolutions(&Field::constant(1, 80, 80, c), &sx, &sy).unwrap();
    let wx = sx.weight_sum(0, 0);
    let wy = sy.weight_sum(0, 0);
    assert!((wx - 1.0).abs() < 1e-3);
    for fi in 20..60 {
        for j in 20..60 {
            assert!((out.a(0, fi, j) - c * wx).abs() < 1e-14);
            assert!((out.b(0, fi, j) - c * wy).abs() < 1e-14);
        }
    }
    // near the boundary zero extension loses mass
    assert!(out.a(0, 0, 40) < 0.6 * c);
}

#[test]
fn direct_matches_brute_force() {
    for &(nx, ny) in &[(9, 7), (16, 12), (32, 32)] {
        let g = grid(nx, ny);
        let m = mixed_matrix();
        let (sx, sy) = stencils(&m, &g);
        let rho = random_field(3, nx, ny, nx as u64);
        for periodic in [false, true] {
            let bc = if periodic {
                BoundaryKind::Periodic
            } else {
                BoundaryKind::NoFlow
            };
            let fast = face_convolutions_with(&rho, &sx, &sy, bc).unwrap();
            let slow = brute_force(&g, &m, &rho, periodic);
            let err = max_diff(&fast, &slow);
            assert!(err <= 1e-14, "{nx}x{ny} periodic={periodic}: {err}");
        }
    }
}

#[cfg(feature = "fft")]
#[test]
fn fft_matches_direct() {
    for &(nx, ny, n_species) in &[(24, 18, 3), (41, 33, 1), (30, 30, 2)] {
        let g = grid(nx, ny);
        let mut m = mixed_matrix();
        if n_species != 3 {
            m = KernelMatrix::diagonal(KernelSpec::cubic(0.23).unwrap(), n_species);
        }
        let rho = random_field(n_species, nx, ny, 99);
        for bc in [BoundaryKind::Outflow, BoundaryKind::Periodic] {
            let direct = ConvolutionEngine::new(&g, &m, &m, bc, ConvolutionMethod::Direct).unwrap();
            let fft = ConvolutionEngine::new(&g, &m, &m, bc, ConvolutionMethod::Fft).unwrap();
            assert_eq!(fft.method(), ConvolutionMethod::Fft);
            let d = direct.evaluate(&rho).unwrap();
            let f = fft.evaluate(&rho).unwrap();
            let err = max_diff(&d, &f);
            assert!(err < 1e-13, "{nx}x{ny}x{n_species} {bc}: {err}");
        }
    }
}

#[cfg(feature = "fft")]
#[test]
fn fft_is_nonnegative_on_sparse_data() {
    let g = grid(64, 64);
    let m = KernelMatrix::diagonal(KernelSpec::cubic(0.1).unwrap(), 2);
    let mut rho = Field::zeros(2, 64, 64);
    rho.set(0, 10, 10, 1.0);
    rho.set(1, 50, 20, 2.0);
    let e = ConvolutionEngine::new(&g, &m, &m, BoundaryKind::Outflow, ConvolutionMethod::Fft).unwrap();
    let out = e.evaluate(&rho).unwrap();
    assert!(out.min() >= 0.0);
}

#[test]
fn auto_prefers_direct_for_small_stencils() {
    let g = grid(64, 64);
    let m = KernelMatrix::diagonal(KernelSpec::cubic(0.02).unwrap(), 1);
    let e = ConvolutionEngine::new(&g, &m, &m, BoundaryKind::Outflow, ConvolutionMethod::Auto).unwrap();
    assert_eq!(e.method(), ConvolutionMethod::Direct);
}

#[test]
fn engine_rejects_mismatched_field() {
    let g = grid(10, 10);
    let m = KernelMatrix::diagonal(KernelSpec::cubic(0.2).unwrap(), 1);
    let e = ConvolutionEngine::new(&g, &m, &m, BoundaryKind::Outflow, ConvolutionMethod::Direct).unwrap();
    assert!(e.evaluate(&Field::zeros(1, 11, 10)).is_err());
    let (sx, sy) = stencils(&m, &g);
    assert!(face_convolutions(&Field::zeros(1, 10, 12), &sx, &sy).is_err());
    assert!(face_convolutions(&Field::zeros(1, 10, 10), &sy, &sx).is_err());
}

#[test]
fn method_names_parse() {
    for m in [
        ConvolutionMethod::Auto,
        ConvolutionMethod::Direct,
        ConvolutionMethod::Fft,
    ] {
        assert_eq!(m.name().parse::<ConvolutionMethod>().unwrap(), m);
    }
    assert!("spectral".parse::<ConvolutionMethod>().is_err());
}

#[test]
fn face_averages_uniform_and_checkerboard() {
    let uniform = Field::from_fn(2, 5, 4, |k, _, _| [0.3, 1.7][k]);
    let g = fill_ghosts(&uniform, BoundaryKind::Outflow, 2).unwrap();
    let avg = face_averages(&g);
    assert!(avg.a_values().chunks(2).all(|c| c == [0.3, 1.7]));
    assert!(avg.b_values().chunks(2).all(|c| c == [0.3, 1.7]));

    let checker = Field::from_fn(1, 6, 6, |_, i, j| ((i + j) % 2) as f64);
    let g = fill_ghosts(&checker, BoundaryKind::Periodic, 2).unwrap();
    let avg = face_averages(&g);
    assert!(avg.a_values().iter().chain(avg.b_values()).all(|&v| v == 0.5));
}

#[test]
fn face_averages_match_brute_force() {
    let rho = random_field(2, 4, 4, 5);
    let g = fill_ghosts(&rho, BoundaryKind::Outflow, 2).unwrap();
    let avg = face_averages(&g);
    let at = |k: usize, i: isize, j: isize| rho.get(k, i.clamp(0, 3) as usize, j.clamp(0, 3) as usize);
    for k in 0..2 {
        for fi in 0..=4isize {
            for j in 0..4isize {
                let expect = (at(k, fi - 1, j) + at(k, fi, j)) / 2.0;
                assert_eq!(avg.a(k, fi as usize, j as usize), expect);
            }
        }
        for i in 0..4isize {
            for fj in 0..=4isize {
                let expect = (at(k, i, fj - 1) + at(k, i, fj)) / 2.0;
                assert_eq!(avg.b(k, i as usize, fj as usize), expect);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn linearity(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = grid(14, 11);
        let m = mixed_matrix();
        let (sx, sy) = stencils(&m, &g);
        let r1 = random_field(3, 14, 11, seed);
        let r2 = random_field(3, 14, 11, seed ^ 0xdead_beef);
        let mix = Field::from_fn(3, 14, 11, |k, i, j| a * r1.get(k, i, j) + b * r2.get(k, i, j));
        let c1 = face_convolutions(&r1, &sx, &sy).unwrap();
        let c2 = face_convolutions(&r2, &sx, &sy).unwrap();
        let cm = face_convolutions(&mix, &sx, &sy).unwrap();
        let lin: Vec<f64> = c1.a_values().iter().zip(c2.a_values())
            .chain(c1.b_values().iter().zip(c2.b_values()))
            .map(|(u, v)| a * u + b * v).collect();
        let got: Vec<f64> = cm.a_values().iter().chain(cm.b_values()).copied().collect();
        for (x, y) in lin.iter().zip(&got) {
            prop_assert!((x - y).abs() <= 1e-13);
        }
    }

    #[test]
    fn nonnegative_input_gives_nonnegative_output(seed in any::<u64>()) {
        let g = grid(12, 12);
        let m = mixed_matrix();
        let (sx, sy) = stencils(&m, &g);
        let out = face_convolutions(&random_field(3, 12, 12, seed), &sx, &sy).unwrap();
        prop_assert!(out.min() >= 0.0);
    }

    #[test]
    fn neighbour_face_difference_bound(seed in any::<u64>(), r in 0.05f64..0.4) {
        let g = grid(24, 24);
        let kern = KernelSpec::cubic(r).unwrap();
        let m = KernelMatrix::diagonal(kern, 1);
        let (sx, sy) = stencils(&m, &g);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = Field::from_fn(1, 24, 24, |_, _, _| rng.random_range(-1.0..1.0));
        let l1: f64 = rho.as_slice().iter().map(|v| v.abs()).sum::<f64>() * g.cell_area();
        let out = face_convolutions(&rho, &sx, &sy).unwrap();
        let lip = kern.max_gradient();
        for fi in 1..=24 {
            for j in 0..24 {
                let d = (out.a(0, fi, j) - out.a(0, fi - 1, j)).abs();
                prop_assert!(d <= g.dx() * lip * l1 * (1.0 + 1e-12) + 1e-15);
            }
        }
        for i in 0..24 {
            for fj in 1..=24 {
                let d = (out.b(0, i, fj) - out.b(0, i, fj - 1)).abs();
                prop_assert!(d <= g.dy() * lip * l1 * (1.0 + 1e-12) + 1e-15);
            }
        }
    }
}
