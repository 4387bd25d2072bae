//! CSV and JSON artifacts.
//!
//! Reals are written in scientific notation with 17 significant digits so the
//! files round-trip to the same `f64`.

use std::fmt::Write;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::otoc::{theorem_residuals, EntropySeries, OtocSeries};
use crate::relevance::{FootprintMap, Quadrature, RelevanceReport};

pub const ENTROPY_HEADER: &str = "t,S_L,S2,purity";
pub const OTOC_HEADER: &str = "label,t,C";
pub const COUNTS_HEADER: &str = "scenario,basis,t0,n_relevant,basis_size";
pub const FOOTPRINT_HEADER: &str = "coord1,coord2,rank";
pub const PARTIAL_SUMS_HEADER: &str = "t0,t,S_L,relevant,remaining,entropy_area";
pub const RESIDUALS_HEADER: &str = "scenario,basis,n,t,S_L,sum_C,residual";

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_text(path: &Path, text: &str) -> std::io::Result<()> {
    fs::write(path, text)
}

pub fn entropy_csv(entropy: &EntropySeries) -> String {
    let mut s = String::from(ENTROPY_HEADER);
    s.push('\n');
    for t in 0..entropy.s_l.len() {
        let _ = writeln!(
            s,
            "{t},{},{},{}",
            real(entropy.s_l[t]),
            real(entropy.s2[t]),
            real(entropy.purity[t])
        );
    }
    s
}

pub fn otoc_csv(series: &OtocSeries) -> String {
    let mut s = String::from(OTOC_HEADER);
    s.push('\n');
    for (label, row) in series.labels.iter().zip(series.values.rows()) {
        for (t, c) in row.iter().enumerate() {
            let _ = writeln!(s, "{label},{t},{}", real(*c));
        }
    }
    s
}

/// One row per `t` and per report: the OTOC sum restricted to the relevant
/// set, the sum over the rest, `S_L` and the entropy area used for the cut.
pub fn partial_sums_csv(series: &OtocSeries, entropy: &EntropySeries, reports: &[RelevanceReport]) -> String {
    let mut s = String::from(PARTIAL_SUMS_HEADER);
    s.push('\n');
    let total = series.sums();
    for r in reports {
        for t in 0..=series.t_max() {
            let relevant: f64 = r.relevant().iter().map(|&i| series.values[[i, t]]).sum();
            let _ = writeln!(
                s,
                "{},{t},{},{},{},{}",
                r.t0,
                real(entropy.s_l[t]),
                real(relevant),
                real(total[t] - relevant),
                real(r.entropy_area)
            );
        }
    }
    s
}

pub fn residuals_rows(
    out: &mut String,
    scenario: &str,
    basis: &str,
    n: usize,
    series: &OtocSeries,
    entropy: &EntropySeries,
) -> f64 {
    let sums = series.sums();
    let res = theorem_residuals(series, entropy);
    for (t, r) in res.iter().enumerate() {
        let _ = writeln!(
            out,
            "{scenario},{basis},{n},{t},{},{},{}",
            real(entropy.s_l[t]),
            real(sums[t]),
            real(*r)
        );
    }
    res.into_iter().fold(0.0, f64::max)
}

pub struct CountRow {
    pub scenario: String,
    pub basis: &'static str,
    pub t0: usize,
    pub n_relevant: usize,
    pub basis_size: usize,
}

pub fn counts_csv(rows: &[CountRow]) -> String {
    let mut s = String::from(COUNTS_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.scenario, r.basis, r.t0, r.n_relevant, r.basis_size
        );
    }
    s
}

pub fn footprint_csv(map: &FootprintMap) -> String {
    let mut s = String::from(FOOTPRINT_HEADER);
    s.push('\n');
    for p in &map.points {
        let _ = writeln!(s, "{},{},{}", real(p.coords[0]), real(p.coords[1]), p.rank);
    }
    s
}

#[derive(Serialize)]
pub struct RankedArea {
    pub label: String,
    pub area: f64,
}

#[derive(Serialize)]
pub struct CutJson {
    pub t0: usize,
    pub entropy_area: f64,
    pub fraction: f64,
    /// `fraction · entropy_area`, the value the relevant prefix must reach.
    pub target: f64,
    pub relevant_area: f64,
    pub n_relevant: usize,
    pub ranked: Vec<RankedArea>,
}

#[derive(Serialize)]
pub struct RelevanceJson<'a> {
    pub scenario: &'a str,
    pub basis: &'a str,
    pub n: usize,
    pub quadrature: Quadrature,
    pub basis_size: usize,
    pub reports: Vec<CutJson>,
}

pub fn relevance_json(
    scenario: &str,
    basis: &str,
    n: usize,
    series: &OtocSeries,
    reports: &[RelevanceReport],
) -> serde_json::Result<String> {
    let quadrature = reports.first().map(|r| r.quadrature).unwrap_or_default();
    let doc = RelevanceJson {
        scenario,
        basis,
        n,
        quadrature,
        basis_size: series.len(),
        reports: reports
            .iter()
            .map(|r| CutJson {
                t0: r.t0,
                entropy_area: r.entropy_area,
                fraction: r.fraction,
                target: r.fraction * r.entropy_area,
                relevant_area: r.cumulative(r.n_relevant),
                n_relevant: r.n_relevant,
                ranked: r
                    .ranked
                    .iter()
                    .map(|&i| RankedArea {
                        label: series.labels[i].to_string(),
                        area: r.areas[i],
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}
