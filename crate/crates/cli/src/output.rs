//! CSV artifacts. Numbers carry 12 significant digits; rows are sorted by
//! `(lambda1, lambda2)` within each series.

use std::fs::File;
use std::path::Path;

use anyhow::{Context, Result};
use levarray_core::entanglement::QuadratureReading;
use levarray_core::sweep::SweepRow;

pub const LANDSCAPE_HEADER: [&str; 19] = [
    "lambda1",
    "lambda2",
    "lambda3",
    "G1",
    "G2",
    "G3",
    "E_pair_12",
    "E_pair_23",
    "E_pair_31",
    "E_split_1_23",
    "E_split_2_31",
    "E_split_3_12",
    "fom_E1",
    "fom_E2",
    "fom_E3",
    "stable",
    "n_eff_1",
    "n_eff_2",
    "n_eff_3",
];

pub const SUMMARY_HEADER: [&str; 12] = [
    "series",
    "objective",
    "value",
    "lambda1",
    "lambda2",
    "lambda3",
    "G1",
    "G2",
    "G3",
    "stable",
    "oracle_value",
    "oracle_ok",
];

pub const SQUEEZING_HEADER: [&str; 10] =
    ["series", "objective", "lambda1", "lambda2", "G1", "G2", "G3", "quadrature", "variance", "squeezed"];

/// `%.12g`-style formatting: fixed notation for moderate exponents,
/// scientific otherwise, trailing zeros trimmed.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        trim_zeros(format!("{:.*}", (11 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Failed or infeasible points score zero so landscapes stay rectangular.
fn score(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x
    }
}

fn row_fields(row: &SweepRow) -> Vec<String> {
    let mut f = vec![fmt_num(row.lambda1), fmt_num(row.lambda2), fmt_num(row.lambda3)];
    let numbers = row.couplings.iter().chain(&row.dyadic).chain(&row.triadic).chain(&row.fom);
    f.extend(numbers.map(|&x| fmt_num(score(x))));
    f.push(row.stable.to_string());
    f.extend(row.occupations.iter().map(|&x| fmt_num(x)));
    f
}

pub fn sort_rows(rows: &mut [SweepRow]) {
    rows.sort_by(|a, b| a.lambda1.total_cmp(&b.lambda1).then(a.lambda2.total_cmp(&b.lambda2)));
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

pub fn write_landscape(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(LANDSCAPE_HEADER)?;
    for row in rows {
        w.write_record(row_fields(row))?;
    }
    w.flush().with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// `cuts.csv`: the landscape columns prefixed by a series label.
pub fn write_cuts(path: &Path, series: &[(String, Vec<SweepRow>)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(std::iter::once("series").chain(LANDSCAPE_HEADER))?;
    for (label, rows) in series {
        for row in rows {
            w.write_record(std::iter::once(label.clone()).chain(row_fields(row)))?;
        }
    }
    w.flush().with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub series: String,
    pub objective: String,
    pub best: SweepRow,
    /// Lattice maximum at the same lambda point, when requested.
    pub oracle: Option<f64>,
}

impl SummaryRow {
    /// The optimizer may not lose to the lattice by more than rounding.
    pub fn oracle_ok(&self) -> Option<bool> {
        self.oracle.map(|o| self.best.value >= o - 1e-6)
    }
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        let b = &r.best;
        let mut f = vec![r.series.clone(), r.objective.clone(), fmt_num(b.value)];
        f.extend([b.lambda1, b.lambda2, b.lambda3].map(fmt_num));
        f.extend(b.couplings.map(fmt_num));
        f.push(b.stable.to_string());
        f.push(r.oracle.map(fmt_num).unwrap_or_default());
        f.push(r.oracle_ok().map(|ok| ok.to_string()).unwrap_or_default());
        w.write_record(f)?;
    }
    w.flush().with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SqueezingRow {
    pub series: String,
    pub objective: String,
    pub lambda1: f64,
    pub lambda2: f64,
    pub couplings: [f64; 3],
    pub reading: QuadratureReading,
}

pub fn write_squeezing(path: &Path, rows: &[SqueezingRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SQUEEZING_HEADER)?;
    for r in rows {
        let mut f = vec![r.series.clone(), r.objective.clone(), fmt_num(r.lambda1), fmt_num(r.lambda2)];
        f.extend(r.couplings.map(fmt_num));
        f.push(r.reading.label.clone());
        f.push(fmt_num(r.reading.variance));
        f.push(r.reading.squeezed().to_string());
        w.write_record(f)?;
    }
    w.flush().with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
