//! Result rows and their CSV form.
//!
//! Every file starts with the header below. The `schema` column carries the
//! layout version on every row, and floats are written in scientific notation
//! with 17 significant digits so they parse back bit-exactly.

use std::io::Write;

use complementarity::mzi::DualityReport;
use serde::Serialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub const HEADER: [&str; 19] = [
    "schema",
    "id",
    "seed",
    "v0",
    "predictability",
    "visibility",
    "phi0",
    "delta",
    "contrast",
    "w_plus",
    "w_minus",
    "d_s",
    "d_max",
    "gamma_s",
    "lhs_thm2",
    "rhs_thm2",
    "lhs_jsve",
    "margin",
    "measurable",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub id: String,
    pub seed: u64,
    #[serde(flatten)]
    pub report: ReportFields,
    pub margin: f64,
    pub measurable: bool,
}

/// [`DualityReport`] with serde support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReportFields {
    pub v0: f64,
    pub predictability: f64,
    pub visibility: f64,
    pub phi0: f64,
    pub delta: f64,
    pub contrast: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub d_s: f64,
    pub d_max: f64,
    pub gamma_s: f64,
    pub lhs_thm2: f64,
    pub rhs_thm2: f64,
    pub lhs_jsve: f64,
}

impl From<DualityReport> for ReportFields {
    fn from(r: DualityReport) -> Self {
        Self {
            v0: r.v0,
            predictability: r.predictability,
            visibility: r.visibility,
            phi0: r.phi0,
            delta: r.delta,
            contrast: r.contrast,
            w_plus: r.w_plus,
            w_minus: r.w_minus,
            d_s: r.d_s,
            d_max: r.d_max,
            gamma_s: r.gamma_s,
            lhs_thm2: r.lhs_thm2,
            rhs_thm2: r.rhs_thm2,
            lhs_jsve: r.lhs_jsve,
        }
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl ResultRow {
    pub fn record(&self) -> Vec<String> {
        let r = &self.report;
        let mut out = vec![
            SCHEMA_VERSION.to_string(),
            self.id.clone(),
            self.seed.to_string(),
        ];
        out.extend(
            [
                r.v0,
                r.predictability,
                r.visibility,
                r.phi0,
                r.delta,
                r.contrast,
                r.w_plus,
                r.w_minus,
                r.d_s,
                r.d_max,
                r.gamma_s,
                r.lhs_thm2,
                r.rhs_thm2,
                r.lhs_jsve,
                self.margin,
            ]
            .map(format_float),
        );
        out.push(self.measurable.to_string());
        out
    }
}

pub fn write_csv<'a, W: Write>(
    out: W,
    rows: impl IntoIterator<Item = &'a ResultRow>,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}
