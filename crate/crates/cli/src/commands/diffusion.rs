use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use smashline::diffusion::{
    gaussian_solution, gaussian_solution_printed, residual_rows, xi_closed_form_coefficients, xi_sector_oracle,
    DiffusionParams,
};
use smashline::matrix_realization::{assemble_h, duhamel_oracle, solve_system, SystemState};
use smashline::qcalculus::{Deformation, XiPolynomial};

use crate::config::{Format, Prefactor, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{csv_writer, pair, write_json};

/// Largest order for which `solve` also runs the semi-analytic oracle.
const ORACLE_MAX_ORDER: usize = 3;
const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Serialize)]
struct SnapshotRow {
    x: f64,
    t: f64,
    k: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct ValueRow {
    x: f64,
    t: f64,
    #[serde(rename = "value-re")]
    value_re: f64,
    #[serde(rename = "value-im")]
    value_im: f64,
    residual: f64,
}

#[derive(Serialize)]
struct SnapshotJson {
    t: f64,
    x_min: f64,
    dx: f64,
    components: Vec<Vec<[f64; 2]>>,
}

fn params(cfg: &RunConfig) -> CliResult<DiffusionParams> {
    cfg.diffusion.validate()?;
    Ok(cfg.diffusion)
}

pub fn solve(cfg: &RunConfig, output: &Path) -> CliResult<Value> {
    let p = params(cfg)?;
    let op = assemble_h(cfg.order, &p, cfg.variant, cfg.regime)?;
    let init = cfg.initial_mixtures()?;
    let start = SystemState::from_mixtures(&cfg.grid, &init)?;
    let out = solve_system(&cfg.grid, &op, &start)?;

    match cfg.format {
        Format::Csv => {
            let mut w = csv_writer(output)?;
            for s in &out.snapshots {
                for (k, comp) in s.components.iter().enumerate() {
                    for (i, v) in comp.iter().enumerate() {
                        w.serialize(SnapshotRow { x: s.x(i), t: s.time, k, re: v.re, im: v.im })?;
                    }
                }
            }
            w.flush()?;
        }
        Format::Json => {
            let snaps: Vec<SnapshotJson> = out
                .snapshots
                .iter()
                .map(|s| SnapshotJson {
                    t: s.time,
                    x_min: s.x_min,
                    dx: s.dx,
                    components: s.components.iter().map(|c| c.iter().map(|&v| pair(v)).collect()).collect(),
                })
                .collect();
            write_json(output, &snaps)?;
        }
    }

    let fin = out.final_state();
    let all_equal = fin.components.windows(2).all(|w| w[0] == w[1]);
    let masses: Vec<[f64; 2]> = (0..fin.order()).map(|k| pair(fin.mass(k))).collect();
    let mut results = json!({
        "t_end": fin.time,
        "snapshots": out.snapshots.len(),
        "all_components_equal": all_equal,
        "mass": masses,
    });
    if cfg.order <= ORACLE_MAX_ORDER {
        let oracle = duhamel_oracle(&op, &init, fin.time, &cfg.grid)?;
        let per: Vec<f64> = (0..fin.order()).map(|k| fin.relative_l2(&oracle, k)).collect();
        results["oracle_relative_l2"] = json!(per);
        results["oracle_max_relative_l2"] = json!(per.iter().copied().fold(0.0, f64::max));
    }
    Ok(results)
}

/// Pointwise residual of `∂_t u = -c1 ∂_x u + α1 ∂_x² u` by central differences.
fn pointwise_residual<F: Fn(f64, f64) -> f64>(u: &F, x: f64, t: f64, p: &DiffusionParams, h: f64, dt: f64) -> f64 {
    let ut = (u(x, t + dt) - u(x, t - dt)) / (2.0 * dt);
    let (l, c, r) = (u(x - h, t), u(x, t), u(x + h, t));
    let ux = (r - l) / (2.0 * h);
    let uxx = (r - 2.0 * c + l) / (h * h);
    (ut - (-p.c1 * ux + p.alpha1 * uxx)).abs()
}

fn kernel(prefactor: Prefactor) -> fn(f64, f64, &DiffusionParams) -> smashline::Result<f64> {
    match prefactor {
        Prefactor::Half => gaussian_solution,
        Prefactor::Printed => gaussian_solution_printed,
    }
}

fn write_value_rows(cfg: &RunConfig, output: &Path, rows: &[ValueRow]) -> CliResult<()> {
    match cfg.format {
        Format::Csv => {
            let mut w = csv_writer(output)?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => write_json(output, &rows)?,
    }
    Ok(())
}

pub fn closed_form(cfg: &RunConfig, output: &Path) -> CliResult<Value> {
    let p = params(cfg)?;
    let d = Deformation::new(cfg.order)?;
    if cfg.times.iter().any(|&t| !(t > cfg.residual.dt_fd)) {
        return Err(CliError::Validation(format!("closed-form times must exceed dt_fd = {}", cfg.residual.dt_fd)));
    }
    cfg.grid.validate(p.alpha1)?;
    let k = kernel(cfg.prefactor);
    let u = |x: f64, t: f64| k(x, t, &p).expect("positive time");
    let (h, dt) = (cfg.residual.dx, cfg.residual.dt_fd);
    let mut rows = Vec::new();
    for &t in &cfg.times {
        for i in 0..cfg.grid.points() {
            let x = cfg.grid.x(i);
            rows.push(ValueRow {
                x,
                t,
                value_re: u(x, t),
                value_im: 0.0,
                residual: pointwise_residual(&u, x, t, &p, h, dt),
            });
        }
    }
    write_value_rows(cfg, output, &rows)?;

    let top = XiPolynomial::monomial(cfg.order, cfg.order - 1, Complex64::new(1.0, 0.0));
    let oracle = xi_sector_oracle(p.t, &p, &d, cfg.variant, &top)?;
    let oracle_coeffs: Vec<[f64; 2]> = (0..cfg.order).map(|k| pair(oracle.coeff(cfg.order - 1 - k))).collect();
    let xi = match xi_closed_form_coefficients(p.t, &p, &d) {
        Ok(printed) => {
            let diff =
                (0..cfg.order).map(|k| (printed[k] - oracle.coeff(cfg.order - 1 - k)).norm()).fold(0.0, f64::max);
            json!({
                "t": p.t,
                "printed_coefficients": printed.iter().map(|&c| pair(c)).collect::<Vec<_>>(),
                "oracle_coefficients": oracle_coeffs,
                "max_abs_diff": diff,
            })
        }
        Err(e) => {
            json!({ "t": p.t, "printed_coefficients": Value::Null, "oracle_coefficients": oracle_coeffs, "note": e.to_string() })
        }
    };
    let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(json!({ "rows": rows.len(), "max_residual": worst, "xi_sector": xi }))
}

pub fn residual(cfg: &RunConfig, output: &Path) -> CliResult<Value> {
    let p = params(cfg)?;
    let g = cfg.residual;
    g.validate()?;
    if !(g.t_min > g.dt_fd) {
        return Err(CliError::Validation(format!("t_min = {} must exceed dt_fd = {}", g.t_min, g.dt_fd)));
    }
    let op = assemble_h(cfg.order, &p, cfg.variant, cfg.regime)?;
    let k = kernel(cfg.prefactor);
    let order = cfg.order;
    let rho = move |x: f64, t: f64| {
        let mut v = vec![Complex64::default(); order];
        v[0] = Complex64::new(k(x, t, &p).expect("positive time"), 0.0);
        v
    };
    let rows: Vec<ValueRow> = residual_rows(&rho, &g, &op)?
        .into_iter()
        .map(|r| ValueRow { x: r.x, t: r.t, value_re: r.value.re, value_im: r.value.im, residual: r.residual })
        .collect();
    write_value_rows(cfg, output, &rows)?;
    let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(json!({
        "rows": rows.len(),
        "max_residual": worst,
        "tolerance": RESIDUAL_TOL,
        "within_tolerance": worst < RESIDUAL_TOL,
    }))
}
