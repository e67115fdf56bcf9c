use std::path::Path;

use serde_json::{json, Value};

use smashline::qcalculus::Deformation;
use smashline::smash_algebra::coproduct_power;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{csv_writer, write_json};

/// Expand `Δ^{parts-1}(x^k ξ^l)`. CSV columns are `x0,xi0,…,re,im`.
pub fn run(cfg: &RunConfig, output: &Path) -> CliResult<Value> {
    let d = Deformation::new(cfg.order)?;
    let c = cfg.coproduct;
    if c.parts == 0 {
        return Err(CliError::Validation("parts must be at least 1".into()));
    }
    let e = coproduct_power(c.k, c.l, c.parts, &d)?;
    match cfg.format {
        Format::Csv => {
            let mut out = csv_writer(output)?;
            let mut header: Vec<String> = (0..c.parts).flat_map(|s| [format!("x{s}"), format!("xi{s}")]).collect();
            header.extend(["re".into(), "im".into()]);
            out.write_record(&header)?;
            for (powers, coef) in e.terms() {
                let mut rec: Vec<String> = powers.iter().flat_map(|&(x, xi)| [x.to_string(), xi.to_string()]).collect();
                rec.push(coef.re.to_string());
                rec.push(coef.im.to_string());
                out.write_record(&rec)?;
            }
            out.flush()?;
        }
        Format::Json => write_json(output, &e)?,
    }
    Ok(json!({ "terms": e.len() }))
}
