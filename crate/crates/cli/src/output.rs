//! Sweep rows, CSV emission and number formatting.

use serde::Serialize;

use statedisc::bounds::CopyEvaluation;

use crate::CliError;

const PROB_SLACK: f64 = 1e-9;

/// One line of a copy-count sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub worst_case: f64,
    pub average: f64,
    pub bk_bound: f64,
    pub method: String,
}

fn clamp_prob(name: &str, n: usize, x: f64) -> Result<f64, CliError> {
    if !(x >= -PROB_SLACK && x <= 1.0 + PROB_SLACK) {
        return Err(CliError::Numerical(format!("{name} = {x} at n = {n} is not a probability")));
    }
    Ok(x.clamp(0.0, 1.0))
}

impl SweepRow {
    /// Clamps to [0, 1]. The explicit bound is often far below zero, in which
    /// case it says nothing and is recorded as 0.
    pub fn from_evaluation(e: &CopyEvaluation, method: &str) -> Result<Self, CliError> {
        Ok(Self {
            n: e.n,
            worst_case: clamp_prob("worst_case", e.n, e.worst_case)?,
            average: clamp_prob("average", e.n, e.average)?,
            bk_bound: e.bk_bound.clamp(0.0, 1.0),
            method: method.to_string(),
        })
    }
}

/// 12 significant digits, switching to exponent form for tiny or huge values.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-6..12).contains(&mag) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "worst_case", "average", "bk_bound", "method"]).map_err(CliError::io)?;
    for r in rows {
        out.write_record([
            r.n.to_string(),
            sig12(r.worst_case),
            sig12(r.average),
            sig12(r.bk_bound),
            r.method.clone(),
        ])
        .map_err(CliError::io)?;
    }
    out.flush().map_err(CliError::io)
}

pub fn csv_string(rows: &[SweepRow]) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ascii"))
}

pub fn rows_table(rows: &[SweepRow]) -> String {
    let mut s = format!("{:>4}  {:>14}  {:>14}  {:>14}  {}\n", "n", "worst_case", "average", "bk_bound", "method");
    for r in rows {
        s.push_str(&format!(
            "{:>4}  {:>14}  {:>14}  {:>14}  {}\n",
            r.n,
            sig12(r.worst_case),
            sig12(r.average),
            sig12(r.bk_bound),
            r.method
        ));
    }
    s
}
