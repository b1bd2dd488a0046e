use nonlocal_core::diagnostics::{eoc, l1_distance, l1_norm, restrict};
use nonlocal_core::models::{crowd_model, kk_model};
use nonlocal_core::{
    BoundaryKind, ConvolutionMethod, Field, Grid, GridSpec, ModelSpec, Order, SchemeConfig, Solver,
    SolverState, Stage,
};
use proptest::prelude::*;

fn solver(model: ModelSpec, spec: GridSpec, config: SchemeConfig) -> Solver {
    let mut model = model;
    model.domain = spec;
    Solver::new(Grid::new(spec).unwrap(), model, config, ConvolutionMethod::Auto).unwrap()
}

fn field_strategy(n: usize, nx: usize, ny: usize, hi: f64) -> impl Strategy<Value = Field> {
    proptest::collection::vec(prop_oneof![Just(0.0), 0.0..hi], n * nx * ny)
        .prop_map(move |v| Field::from_vec(n, nx, ny, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn crowd_stays_nonnegative_and_conserves_mass(rho in field_strategy(1, 16, 12, 1.0)) {
        let spec = GridSpec::new(7.0, 9.4, -0.9, 0.9, 16, 12);
        let s = solver(crowd_model(), spec, SchemeConfig::second_order(BoundaryKind::NoFlow));
        let g = *s.grid();
        let m0 = l1_norm(&rho, &g).total;
        let floor = -1e-13 * rho.max_abs();
        let mut state = SolverState::new(rho);
        let mut worst = f64::INFINITY;
        for _ in 0..20 {
            s.step_observed(&mut state, s.max_dt(), &mut |_, f| worst = worst.min(f.min())).unwrap();
        }
        prop_assert!(worst >= floor, "min {worst:e}");
        let m1 = l1_norm(&state.field, &g).total;
        prop_assert!((m1 - m0).abs() <= 1e-12 * m0.max(1e-300));
    }

    #[test]
    fn kk_stays_nonnegative(rho in field_strategy(2, 12, 12, 2.0)) {
        let spec = GridSpec::new(-0.3, 0.3, -0.3, 0.3, 12, 12);
        let s = solver(kk_model(0.1).unwrap(), spec, SchemeConfig::second_order(BoundaryKind::Outflow));
        let floor = -1e-13 * rho.max_abs();
        let mut state = SolverState::new(rho);
        let mut worst = f64::INFINITY;
        for _ in 0..20 {
            s.step_observed(&mut state, s.max_dt(), &mut |_, f| worst = worst.min(f.min())).unwrap();
        }
        prop_assert!(worst >= floor, "min {worst:e}");
    }

    #[test]
    fn theta_zero_is_the_first_order_scheme(rho in field_strategy(2, 10, 9, 1.5)) {
        let spec = GridSpec::new(-0.4, 0.4, -0.3, 0.3, 10, 9);
        let mut so = SchemeConfig::second_order(BoundaryKind::Outflow);
        so.theta = 0.0;
        let fo = SchemeConfig::first_order(BoundaryKind::Outflow);
        let a = solver(kk_model(0.15).unwrap(), spec, so);
        let b = solver(kk_model(0.15).unwrap(), spec, fo);
        let dt = a.max_dt().min(b.max_dt());
        let ea = a.euler_stage(&rho, 0.0, dt).unwrap();
        let eb = b.euler_stage(&rho, 0.0, dt).unwrap();
        for (x, y) in ea.as_slice().iter().zip(eb.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-14);
        }
    }
}

#[test]
fn stages_are_reported_in_order() {
    let spec = GridSpec::new(-0.3, 0.3, -0.3, 0.3, 6, 6);
    for (order, want) in [
        (Order::First, vec![Stage::Update]),
        (Order::Second, vec![Stage::First, Stage::Second, Stage::Update]),
    ] {
        let config = SchemeConfig::second_order(BoundaryKind::Outflow).with_order(order);
        let s = solver(kk_model(0.1).unwrap(), spec, config);
        let mut state = SolverState::new(Field::constant(2, 6, 6, 0.5));
        let mut seen = Vec::new();
        s.step_observed(&mut state, s.max_dt(), &mut |st, _| seen.push(st))
            .unwrap();
        assert_eq!(seen, want);
    }
}

// Point samples of a smooth profile against its exact cell averages differ
// by O(h²); a restricted fine-level copy must carry the same rate.
#[test]
fn eoc_of_synthetic_sequence() {
    let f = |x: f64, y: f64| (3.0 * x).sin() * (2.0 * y).cos() + 2.0;
    // exact average of f over [a,b]×[c,d]
    let avg = |a: f64, b: f64, c: f64, d: f64| {
        let ix = ((3.0 * a).cos() - (3.0 * b).cos()) / 3.0;
        let iy = ((2.0 * d).sin() - (2.0 * c).sin()) / 2.0;
        ix * iy / ((b - a) * (d - c)) + 2.0
    };
    let spec = |n: usize| GridSpec::new(0.0, 1.0, 0.0, 1.0, n, n);
    let errs: Vec<f64> = [8usize, 16, 32, 64]
        .iter()
        .map(|&n| {
            let g = Grid::new(spec(n)).unwrap();
            let h = 1.0 / n as f64;
            let pts = Field::from_fn(1, n, n, |_, i, j| f(g.x_center(i), g.y_center(j)));
            let fine = Field::from_fn(1, 2 * n, 2 * n, |_, i, j| {
                let (a, c) = (i as f64 * h / 2.0, j as f64 * h / 2.0);
                avg(a, a + h / 2.0, c, c + h / 2.0)
            });
            let exact = restrict(&fine, 2).unwrap();
            l1_distance(&pts, &exact, &g).unwrap()[0]
        })
        .collect();
    for w in errs.windows(2) {
        let rate = eoc(w[0], w[1]).unwrap();
        assert!((rate - 2.0).abs() < 0.05, "rate {rate}");
    }
}
