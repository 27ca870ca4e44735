//! Report emission: pretty JSON, one CSV row per trial, or a text summary.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::experiment::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            _ => Err(format!("format must be json, csv or text, got '{s}'")),
        }
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    trial: u64,
    stream: u64,
    valid: bool,
    theorem: &'a str,
    applicable: Option<bool>,
    certified: Option<bool>,
    empirical: Option<bool>,
    outcome: Option<&'a str>,
    rhs: Option<f64>,
    conclusion: Option<f64>,
    e_norm: Option<f64>,
    x: Option<f64>,
    r: Option<f64>,
    delta_d: Option<f64>,
    k: Option<f64>,
    measured: String,
    error: Option<&'a str>,
}

pub fn to_csv(report: &Report) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for rec in &report.records {
        let cert = rec.certificate.as_ref();
        let input = |key: &str| cert.and_then(|c| c.inputs.get(key).copied());
        let measured = rec
            .measured
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        w.serialize(CsvRow {
            trial: rec.trial,
            stream: rec.stream,
            valid: rec.valid,
            theorem: report.config.theorem.as_str(),
            applicable: cert.map(|c| c.applicable),
            certified: cert.map(|c| c.certified),
            empirical: rec.empirical,
            outcome: rec.outcome.map(|o| match o {
                stabcert_core::certify::Outcome::Certified => "certified",
                stabcert_core::certify::Outcome::NotCertifiedEmpiricallyTrue => "not_certified_true",
                stabcert_core::certify::Outcome::NotCertifiedEmpiricallyFalse => "not_certified_false",
                stabcert_core::certify::Outcome::Violation => "violation",
            }),
            rhs: cert.map(|c| c.rhs),
            conclusion: cert.map(|c| c.conclusion.value),
            e_norm: input("e_norm"),
            x: input("x"),
            r: input("r"),
            delta_d: input("delta_d"),
            k: input("k"),
            measured,
            error: rec.error.as_deref(),
        })?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn to_text(report: &Report) -> String {
    let a = &report.aggregates;
    let mut s = String::new();
    let _ = writeln!(s, "experiment      {}", report.config.name);
    let _ = writeln!(s, "theorem         {}", report.config.theorem.as_str());
    let _ = writeln!(s, "seed            {}", report.config.seed);
    let _ = writeln!(s, "trials          {} ({} valid, {} invalid)", a.trials, a.valid, a.invalid);
    let _ = writeln!(s, "applicable      {}", a.applicable);
    let _ = writeln!(s, "certified       {} (rate {:.4})", a.certified, a.certified_rate);
    let _ = writeln!(s, "empirical true  {} (rate {:.4})", a.empirically_true, a.empirical_success_rate);
    let _ = writeln!(s, "violations      {}", a.violations);
    if let (Some(mean), Some(max)) = (a.mean_tightness, a.max_tightness) {
        let _ = writeln!(s, "tightness       mean {mean:.4e}, max {max:.4e}");
    }
    for rec in report.records.iter().filter(|r| !r.valid) {
        let _ = writeln!(s, "invalid trial {}: {}", rec.trial, rec.error.as_deref().unwrap_or(""));
    }
    s
}

pub fn render(report: &Report, format: Format) -> anyhow::Result<String> {
    match format {
        Format::Json => report.to_json(),
        Format::Csv => to_csv(report),
        Format::Text => Ok(to_text(report)),
    }
}
