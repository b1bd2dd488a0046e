//! EOC and singular-limit studies.

use nonlocal_core::diagnostics::{eoc, l1_distance, restrict};
use nonlocal_core::models::{kk_local_model, kk_model};
use nonlocal_core::{Field, Grid, Order};

use crate::config::{EocConfig, LimitConfig, RunConfig};
use crate::driver::prepare;
use crate::error::{CliError, Result};
use crate::table::{Cell, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct EocRow {
    pub h: f64,
    /// `‖ρ_h − R ρ_{h/2}‖₁`, summed over species.
    pub error: f64,
    /// `log₂(e_h / e_{h/2})`; absent on the last row.
    pub gamma: Option<f64>,
}

/// Pairs consecutive errors into rates.
pub fn tabulate_eoc(hs: &[f64], errors: &[f64]) -> Vec<EocRow> {
    assert_eq!(hs.len(), errors.len());
    (0..errors.len())
        .map(|l| EocRow {
            h: hs[l],
            error: errors[l],
            gamma: errors.get(l + 1).and_then(|&next| eoc(errors[l], next)),
        })
        .collect()
}

/// Final fields of `cfg` at each of `times` (ascending).
fn fields_at(cfg: &RunConfig, model: nonlocal_core::ModelSpec, times: &[f64]) -> Result<(Grid, Vec<Field>)> {
    let (solver, dt) = prepare(cfg, model)?;
    let mut state = solver.initial_state(cfg.samples)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        solver.advance_to(&mut state, t, dt, &mut |_| {})?;
        out.push(state.field.clone());
    }
    Ok((*solver.grid(), out))
}

/// Runs `levels` nested meshes (each halving `h`) to `T` with one order.
pub fn run_eoc_study(cfg: &EocConfig, order: Order) -> Result<Vec<EocRow>> {
    let mut hs = Vec::new();
    let mut errors = Vec::new();
    let mut previous: Option<(Grid, Field)> = None;
    for level in 0..cfg.levels {
        let mut run = cfg.base.clone();
        run.grid = cfg.base.grid.refined(1 << level);
        run.scheme = run.scheme.with_order(order);
        let model = run.model_spec()?;
        let (grid, mut fields) = fields_at(&run, model, &[run.t_end])?;
        let field = fields.pop().expect("one time level");
        if let Some((coarse_grid, coarse)) = previous.take() {
            if !coarse_grid.nests(&grid, 2) {
                return Err(CliError::Config("EOC levels are not nested".into()));
            }
            let e: f64 = l1_distance(&coarse, &restrict(&field, 2)?, &coarse_grid)?
                .iter()
                .sum();
            log::info!("order {order}: h = {} error {e:e}", coarse_grid.dx());
            hs.push(coarse_grid.dx());
            errors.push(e);
        }
        previous = Some((grid, field));
    }
    Ok(tabulate_eoc(&hs, &errors))
}

/// `h,error_o1,gamma_o1,error_o2,gamma_o2` for whichever orders were run.
pub fn eoc_table(columns: &[(Order, Vec<EocRow>)]) -> Table {
    let mut header = vec!["h".to_string()];
    for (o, _) in columns {
        header.push(format!("error_o{o}"));
        header.push(format!("gamma_o{o}"));
    }
    let mut t = Table::new(header);
    let rows = columns.first().map_or(0, |c| c.1.len());
    for r in 0..rows {
        let mut row = vec![Cell::from(columns[0].1[r].h)];
        for (_, col) in columns {
            row.push(col[r].error.into());
            row.push(col[r].gamma.into());
        }
        t.push(row);
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitRow {
    pub order: Order,
    pub radius: f64,
    /// `distances[time][species]`.
    pub distances: Vec<Vec<f64>>,
}

/// Local reference on `ref_nx²` with the second-order scheme, restricted to
/// the non-local grid, at every requested time.
pub fn limit_reference(cfg: &LimitConfig) -> Result<Vec<Field>> {
    let mut run = cfg.base.clone();
    run.grid = run.grid.with_cells(cfg.ref_nx, cfg.ref_nx);
    run.scheme = run.scheme.with_order(Order::Second);
    let (_, fine) = fields_at(&run, kk_local_model(), &cfg.times)?;
    let factor = cfg.ref_nx / cfg.base.grid.nx;
    fine.iter().map(|f| Ok(restrict(f, factor)?)).collect()
}

/// Distances between the non-local solutions and the restricted local
/// reference, one row per (order, radius).
pub fn run_singular_limit(cfg: &LimitConfig) -> Result<Vec<LimitRow>> {
    let reference = limit_reference(cfg)?;
    let mut rows = Vec::new();
    for &order in &cfg.orders {
        for &r in &cfg.radii {
            let mut run = cfg.base.clone();
            run.scheme = run.scheme.with_order(order);
            let (grid, fields) = fields_at(&run, kk_model(r)?, &cfg.times)?;
            let distances = fields
                .iter()
                .zip(&reference)
                .map(|(f, g)| Ok(l1_distance(f, g, &grid)?))
                .collect::<Result<Vec<_>>>()?;
            log::info!("order {order}, r = {r}: {distances:?}");
            rows.push(LimitRow {
                order,
                radius: r,
                distances,
            });
        }
    }
    Ok(rows)
}

/// `order,r,rho1_t<t>...,rho2_t<t>...`.
pub fn limit_table(times: &[f64], rows: &[LimitRow]) -> Table {
    let species = rows
        .first()
        .map_or(0, |r| r.distances.first().map_or(0, Vec::len));
    let mut header = vec!["order".to_string(), "r".to_string()];
    for k in 1..=species {
        for t in times {
            header.push(format!("rho{k}_t{t}"));
        }
    }
    let mut table = Table::new(header);
    for row in rows {
        let mut cells = vec![Cell::Int(row.order.as_u8() as usize), row.radius.into()];
        for k in 0..species {
            for d in &row.distances {
                cells.push(d[k].into());
            }
        }
        table.push(cells);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Options;

    #[test]
    fn rates_of_an_injected_decay() {
        let hs = [0.4, 0.2, 0.1, 0.05];
        for ratio in [1.5f64, 2.0, 3.0] {
            let errors: Vec<f64> = (0..4).map(|l| 0.7 / ratio.powi(l)).collect();
            let rows = tabulate_eoc(&hs, &errors);
            for row in &rows[..3] {
                assert!((row.gamma.unwrap() - ratio.log2()).abs() < 1e-14);
            }
            assert_eq!(rows[3].gamma, None);
            assert_eq!(rows[2].h, 0.1);
        }
    }

    #[test]
    fn eoc_table_layout() {
        let col = |e: f64| tabulate_eoc(&[0.05, 0.025, 0.0125], &[e, e / 2.0, e / 4.0]);
        let t = eoc_table(&[(Order::First, col(0.8)), (Order::Second, col(0.5))]);
        assert_eq!(t.header, ["h", "error_o1", "gamma_o1", "error_o2", "gamma_o2"]);
        let csv = t.to_csv();
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "0.05000000,0.8000000,1.000000,0.5000000,1.000000"
        );
        assert_eq!(csv.lines().nth(3).unwrap(), "0.01250000,0.2000000,,0.1250000,");
    }

    #[test]
    fn small_eoc_study_runs_on_nested_meshes() {
        let o = Options {
            nx: Some(25),
            ny: Some(5),
            tend: Some(0.05),
            levels: Some(3),
            samples: Some(2),
            ..Default::default()
        };
        let cfg = o.eoc_config().unwrap();
        let rows = run_eoc_study(&cfg, Order::Second).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].h, rows[1].h), (0.4, 0.2));
        assert!(rows.iter().all(|r| r.error > 0.0 && r.error.is_finite()));
        assert!(rows[0].gamma.is_some() && rows[1].gamma.is_none());
    }

    #[test]
    fn small_limit_study_shapes() {
        let o = Options {
            nx: Some(16),
            radii: Some(crate::config::FloatList(vec![0.3, 0.15])),
            times: Some(crate::config::FloatList(vec![0.02, 0.01])),
            samples: Some(1),
            ..Default::default()
        };
        let cfg = o.limit_config().unwrap();
        assert_eq!(cfg.times, vec![0.01, 0.02]);
        let rows = run_singular_limit(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows
            .iter()
            .all(|r| r.distances.len() == 2 && r.distances[0].len() == 2));
        let t = limit_table(&cfg.times, &rows);
        assert_eq!(
            t.header,
            [
                "order",
                "r",
                "rho1_t0.01",
                "rho1_t0.02",
                "rho2_t0.01",
                "rho2_t0.02"
            ]
        );
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.rows[0][0], Cell::Int(1));
    }
}
