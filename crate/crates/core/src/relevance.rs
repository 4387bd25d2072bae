//! Relevance of individual OTOCs.
//!
//! Each basis element is scored by the area under its OTOC up to `t0`. The
//! relevant set is the shortest prefix of the descending ranking whose areas
//! add up to a fraction (0.8 by default) of the area under `1 - S_L`.

use serde::Serialize;

use crate::bases::{BasisKind, BasisLabel, OperatorBasis};
use crate::maps::{unstable_direction, CatMapSpec};
use crate::otoc::{otoc_re_series, EntropySeries, OtocSeries, Scenario};
use crate::{Error, Result};

pub const DEFAULT_FRACTION: f64 = 0.8;

/// Relative slack on the cutoff target. It only absorbs summation-order
/// rounding so that `fraction = 1` terminates on the last nonzero area.
const CUT_SLACK: f64 = 1e-12;

/// How the discrete samples `t = 0..=t0` are turned into an area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    /// Plain sum over every sample, both endpoints with weight one.
    #[default]
    Unit,
    /// Trapezoid rule: endpoints carry weight one half.
    Trapezoid,
}

impl Quadrature {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "unit" | "sum" => Some(Self::Unit),
            "trapezoid" | "trapz" => Some(Self::Trapezoid),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Unit => "unit",
            Self::Trapezoid => "trapezoid",
        }
    }

    /// Integrates the first `t0 + 1` samples. The caller checks the length.
    pub fn integrate<I: IntoIterator<Item = f64>>(self, samples: I, t0: usize) -> f64 {
        let mut total = 0.0;
        for (t, v) in samples.into_iter().take(t0 + 1).enumerate() {
            let w = match self {
                Self::Trapezoid if t0 > 0 && (t == 0 || t == t0) => 0.5,
                _ => 1.0,
            };
            total += w * v;
        }
        total
    }
}

fn check_t0(t0: usize, t_max: usize) -> Result<()> {
    if t0 > t_max {
        return Err(Error::TimeOutOfRange { t: t0, t_max });
    }
    Ok(())
}

/// `Σ_{t=0}^{t0} C_M(t)` (unit-step sum over map steps, both ends included).
pub fn otoc_area(series: &OtocSeries, element: usize, t0: usize) -> Result<f64> {
    check_t0(t0, series.t_max())?;
    if element >= series.len() {
        return Err(Error::InvalidArgument(format!(
            "element {element} outside 0..{}",
            series.len()
        )));
    }
    Ok(Quadrature::Unit.integrate(series.values.row(element).iter().copied(), t0))
}

/// Areas of every element up to `t0` (unit-step sum).
pub fn otoc_areas(series: &OtocSeries, t0: usize) -> Result<Vec<f64>> {
    otoc_areas_with(series, t0, Quadrature::Unit)
}

pub fn otoc_areas_with(series: &OtocSeries, t0: usize, rule: Quadrature) -> Result<Vec<f64>> {
    check_t0(t0, series.t_max())?;
    Ok(series
        .values
        .rows()
        .into_iter()
        .map(|row| rule.integrate(row.iter().copied(), t0))
        .collect())
}

/// `Σ_{t=0}^{t0} (1 - S_L(t))`.
pub fn entropy_area(entropy: &EntropySeries, t0: usize) -> Result<f64> {
    entropy_area_with(entropy, t0, Quadrature::Unit)
}

pub fn entropy_area_with(entropy: &EntropySeries, t0: usize, rule: Quadrature) -> Result<f64> {
    if entropy.s_l.is_empty() {
        return Err(Error::InvalidArgument("empty entropy series".into()));
    }
    check_t0(t0, entropy.s_l.len() - 1)?;
    Ok(rule.integrate(entropy.s_l.iter().map(|s| 1.0 - s), t0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelevanceReport {
    pub t0: usize,
    pub areas: Vec<f64>,
    pub entropy_area: f64,
    /// Element indices by descending area; ties keep index (label) order.
    pub ranked: Vec<usize>,
    pub n_relevant: usize,
    pub fraction: f64,
    pub quadrature: Quadrature,
}

impl RelevanceReport {
    pub fn relevant(&self) -> &[usize] {
        &self.ranked[..self.n_relevant]
    }

    /// Area of the top `n` ranked elements.
    pub fn cumulative(&self, n: usize) -> f64 {
        self.ranked[..n].iter().map(|&i| self.areas[i]).sum()
    }
}

/// Ranks `areas` and finds the minimal prefix reaching `fraction · entropy_area`.
pub fn rank_and_cut(areas: &[f64], entropy_area: f64, fraction: f64) -> Result<RelevanceReport> {
    if !(entropy_area > 0.0) {
        return Err(Error::DegenerateWindow(entropy_area));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} outside (0, 1]"
        )));
    }
    if let Some(bad) = areas.iter().find(|a| !(**a >= 0.0)) {
        return Err(Error::InvalidArgument(format!("negative or NaN area {bad}")));
    }
    let mut ranked: Vec<usize> = (0..areas.len()).collect();
    // stable: equal areas stay in label order
    ranked.sort_by(|&a, &b| areas[b].total_cmp(&areas[a]));
    let target = fraction * entropy_area * (1.0 - CUT_SLACK);
    let mut cum = 0.0;
    let mut n_relevant = None;
    for (k, &idx) in ranked.iter().enumerate() {
        cum += areas[idx];
        if cum >= target {
            n_relevant = Some(k + 1);
            break;
        }
    }
    let n_relevant = n_relevant.ok_or_else(|| {
        Error::NumericalConsistency(format!(
            "total area {cum} never reaches {fraction} of {entropy_area}"
        ))
    })?;
    Ok(RelevanceReport {
        t0: 0,
        areas: areas.to_vec(),
        entropy_area,
        ranked,
        n_relevant,
        fraction,
        quadrature: Quadrature::Unit,
    })
}

/// Report for one integration time of an already computed series.
pub fn relevance_report(
    series: &OtocSeries,
    entropy: &EntropySeries,
    t0: usize,
    fraction: f64,
    rule: Quadrature,
) -> Result<RelevanceReport> {
    let areas = otoc_areas_with(series, t0, rule)?;
    let a_s = entropy_area_with(entropy, t0, rule)?;
    let mut report = rank_and_cut(&areas, a_s, fraction)?;
    report.t0 = t0;
    report.quadrature = rule;
    Ok(report)
}

/// `(t0, n_relevant)` for each requested integration time, from one series.
pub fn counts_from_series(
    series: &OtocSeries,
    entropy: &EntropySeries,
    t0_list: &[usize],
    fraction: f64,
    rule: Quadrature,
) -> Result<Vec<(usize, usize)>> {
    t0_list
        .iter()
        .map(|&t0| {
            relevance_report(series, entropy, t0, fraction, rule).map(|r| (t0, r.n_relevant))
        })
        .collect()
}

pub fn counts_vs_t0(
    scenario: &Scenario,
    basis: &OperatorBasis,
    t0_list: &[usize],
    fraction: f64,
    rule: Quadrature,
) -> Result<Vec<(usize, usize)>> {
    if let Some(&t0) = t0_list.iter().find(|&&t0| t0 > scenario.t_max) {
        return Err(Error::TimeOutOfRange {
            t: t0,
            t_max: scenario.t_max,
        });
    }
    let (series, entropy) = otoc_re_series(scenario, basis)?;
    counts_from_series(&series, &entropy, t0_list, fraction, rule)
}

/// One relevant element placed in phase space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FootprintPoint {
    /// `(position-like, momentum-like)` coordinates in `[0, 1)`.
    pub coords: [f64; 2],
    /// 1-based rank.
    pub rank: usize,
    pub label: String,
}

/// Straight line drawn over a footprint, wrapped on the torus when plotted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlayLine {
    pub origin: [f64; 2],
    pub direction: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FootprintMap {
    pub kind: BasisKind,
    pub points: Vec<FootprintPoint>,
    pub overlay: Option<OverlayLine>,
    pub warnings: Vec<String>,
}

fn inverse_of_two(n: usize) -> Option<usize> {
    (n % 2 == 1).then_some(n.div_ceil(2))
}

/// Phase-space coordinates of a label: `(s/N, r/N)` for chords, `(b/N, a/N)`
/// for centres, `(i/N, j/N)` for Kirkwood indices, `None` for Pauli strings.
///
/// With `remap_odd` and odd `N`, half-integer centres are deployed onto the
/// integer grid by multiplying the doubled index by `2⁻¹ mod N`.
pub fn label_coordinates(label: &BasisLabel, n: usize, remap_odd: bool) -> Option<[f64; 2]> {
    let nf = n as f64;
    match *label {
        BasisLabel::PauliString(_) => None,
        BasisLabel::Chord { r, s } => Some([s as f64 / nf, r as f64 / nf]),
        BasisLabel::Center { a2, b2 } => match inverse_of_two(n).filter(|_| remap_odd) {
            Some(inv) => Some([((b2 * inv) % n) as f64 / nf, ((a2 * inv) % n) as f64 / nf]),
            None => Some([b2 as f64 / (2.0 * nf), a2 as f64 / (2.0 * nf)]),
        },
        BasisLabel::KirkwoodIdx { i, j } => Some([i as f64 / nf, j as f64 / nf]),
    }
}

/// Places the relevant elements of `report` in phase space.
///
/// A non-hyperbolic `overlay_map` does not fail the call: the overlay is
/// dropped and the reason recorded in `warnings`.
pub fn footprint(
    report: &RelevanceReport,
    basis: &OperatorBasis,
    overlay_map: Option<&CatMapSpec>,
    remap_odd: bool,
) -> Result<FootprintMap> {
    let kind = basis.kind();
    if kind == BasisKind::Pauli {
        return Err(Error::InvalidArgument(
            "Pauli labels have no phase-space coordinates".into(),
        ));
    }
    if report.areas.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            got: report.areas.len(),
        });
    }
    let n = basis.space().dim();
    let points = report
        .relevant()
        .iter()
        .enumerate()
        .map(|(k, &idx)| {
            let label = basis.elements()[idx].label();
            FootprintPoint {
                coords: label_coordinates(label, n, remap_odd).expect("non-Pauli label"),
                rank: k + 1,
                label: label.to_string(),
            }
        })
        .collect();
    let mut warnings = Vec::new();
    let overlay = match (overlay_map, kind) {
        (None, _) | (Some(_), BasisKind::Kirkwood) => None,
        (Some(map), _) => match unstable_direction(&map.matrix()) {
            Ok(direction) => Some(OverlayLine {
                origin: if kind == BasisKind::Translation { [0.0, 0.0] } else { [0.5, 0.5] },
                direction,
            }),
            Err(e) => {
                log::warn!("footprint overlay omitted: {e}");
                warnings.push(e.to_string());
                None
            }
        },
    };
    Ok(FootprintMap {
        kind,
        points,
        overlay,
        warnings,
    })
}

/// Perpendicular distance from `point` to the line through `origin` along
/// `direction`, minimized over the periodic images `point + period·(m, n)`,
/// `m, n ∈ {-1, 0, 1}`.
pub fn torus_line_distance(point: [f64; 2], line: &OverlayLine, period: f64) -> f64 {
    let [dx, dy] = line.direction;
    let norm = dx.hypot(dy);
    let mut best = f64::INFINITY;
    for m in -1..=1 {
        for k in -1..=1 {
            let x = point[0] + period * m as f64 - line.origin[0];
            let y = point[1] + period * k as f64 - line.origin[1];
            best = best.min((x * dy - y * dx).abs() / norm);
        }
    }
    best
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

/// Median torus distance of `points` to `line`.
pub fn median_line_distance(points: &[[f64; 2]], line: &OverlayLine, period: f64) -> Option<f64> {
    let mut d: Vec<f64> = points.iter().map(|p| torus_line_distance(*p, line, period)).collect();
    median(&mut d)
}
