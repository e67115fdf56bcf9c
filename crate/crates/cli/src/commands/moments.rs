use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use smashline::qcalculus::Deformation;
use smashline::random_walk::{moment_oracle, moment_table, WalkSpec};
use smashline::SmashError;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{csv_writer, write_json};

const IMAGINARY_TOL: f64 = 1e-12;

#[derive(Serialize)]
struct Row {
    k: usize,
    l: usize,
    n: usize,
    re: f64,
    im: f64,
}

pub fn run(cfg: &RunConfig, output: &Path) -> CliResult<Value> {
    let d = Deformation::new(cfg.order)?;
    let w = WalkSpec::new(cfg.step, cfg.n.first().copied().unwrap_or(1), d, cfg.big_q)?;
    if cfg.n.is_empty() {
        return Err(CliError::Validation("no step counts given".into()));
    }
    let table = moment_table(&w, &cfg.n, cfg.k_max, cfg.l_max)?;
    let rows: Vec<Row> =
        table.iter().map(|r| Row { k: r.k, l: r.l, n: r.n, re: r.value.re + 0.0, im: r.value.im + 0.0 }).collect();

    match cfg.format {
        Format::Csv => {
            let mut out = csv_writer(output)?;
            for r in &rows {
                out.serialize(r)?;
            }
            out.flush()?;
        }
        Format::Json => write_json(output, &rows)?,
    }

    let residue: Vec<&Row> = rows.iter().filter(|r| r.l <= 1 && r.im.abs() > IMAGINARY_TOL).collect();
    let mut results = json!({
        "rows": rows.len(),
        "imaginary_residue": residue,
    });

    if cfg.oracle {
        let mut values = Vec::with_capacity(rows.len());
        let mut worst = 0.0f64;
        for r in &table {
            let o = moment_oracle(r.k, r.l, &w.with_steps(r.n)).map_err(|e| match e {
                SmashError::EnumerationGuard(msg) => CliError::Validation(format!("oracle guard exceeded: {msg}")),
                other => other.into(),
            })?;
            worst = worst.max((o - r.value).norm());
            values.push(Row { k: r.k, l: r.l, n: r.n, re: o.re + 0.0, im: o.im + 0.0 });
        }
        results["oracle"] = json!({ "values": values, "max_abs_deviation": worst });
    }
    Ok(results)
}
