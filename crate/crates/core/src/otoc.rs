//! OTOC time series over complete bases and their phase-space readings.
//!
//! For a global pure state the OTOC of a normalized basis element `M` acting
//! on the observed subsystem factorizes as
//! `C_M(t) = Tr[M(t) ρ M†(t) ρ] = |Tr[ρ_B(t) M]|²`,
//! which is what [`otoc_re_series`] evaluates. [`otoc_direct`] keeps the
//! Heisenberg-picture definition as a dense small-N oracle.

use ndarray::{Array2, Zip};
use rayon::prelude::*;

use crate::bases::{translation_entries, BasisElement, BasisKind, BasisLabel, OperatorBasis};
use crate::maps::{quantum_propagator_2d, CatMapSpec, CoupledMapSpec, Propagator2D, DEFAULT_K, DEFAULT_KC};
use crate::torus::{
    coherent_state, fourier_kernel, product_state, purity_and_entropies, reduce, BipartiteSpace,
    PureState, ReducedDensity, StateSpace, Subsystem,
};
use crate::{Error, Result, C64};

/// Imaginary parts above this are treated as a bug rather than rounding.
pub const IMAG_REJECT: f64 = 1e-8;
/// Sum-rule residual above which a series is rejected outright.
pub const THEOREM_REJECT: f64 = 1e-6;

/// Named dynamical scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Both maps hyperbolic.
    HH,
    /// Hyperbolic ⊗ elliptic, observing the elliptic factor.
    HE,
    /// Elliptic ⊗ hyperbolic, observing the hyperbolic factor.
    EH,
    /// Both elliptic, states at the fixed point `(0.5, 0.5)`.
    EeFixed,
    /// Both elliptic, states at `(π/4, π/4)`.
    EeOffcenter,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::HH, Preset::HE, Preset::EH, Preset::EeFixed, Preset::EeOffcenter];

    pub fn name(self) -> &'static str {
        match self {
            Preset::HH => "HH",
            Preset::HE => "HE",
            Preset::EH => "EH",
            Preset::EeFixed => "EE-fixed",
            Preset::EeOffcenter => "EE-offcenter",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name().eq_ignore_ascii_case(s.trim()))
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Full description of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub coupled: CoupledMapSpec,
    pub space: BipartiteSpace,
    /// `(q0, p0)` of the coherent state on each factor.
    pub initial: [(f64, f64); 2],
    /// Factor the basis acts on.
    pub observed: Subsystem,
    pub basis_kind: BasisKind,
    pub t_max: usize,
}

impl Scenario {
    /// Preset with `K = 0.25`, `Kc = 0.5`; the basis acts on the second factor.
    pub fn preset(preset: Preset, n: usize, basis_kind: BasisKind, t_max: usize) -> Result<Self> {
        let h = CatMapSpec::hyperbolic(DEFAULT_K);
        let e = CatMapSpec::elliptic(DEFAULT_K);
        let off = std::f64::consts::FRAC_PI_4.rem_euclid(1.0);
        let (m1, m2, centre) = match preset {
            Preset::HH => (h, h, 0.5),
            Preset::HE => (h, e, 0.5),
            Preset::EH => (e, h, 0.5),
            Preset::EeFixed => (e, e, 0.5),
            Preset::EeOffcenter => (e, e, off),
        };
        Ok(Self {
            name: preset.name().to_string(),
            coupled: CoupledMapSpec::new(m1, m2, DEFAULT_KC),
            space: BipartiteSpace::symmetric(n)?,
            initial: [(centre, centre), (centre, centre)],
            observed: Subsystem::Second,
            basis_kind,
            t_max,
        })
    }

    pub fn propagator(&self) -> Result<Propagator2D> {
        quantum_propagator_2d(&self.coupled, &self.space)
    }

    /// Product of coherent states at the configured centres.
    pub fn initial_state(&self) -> Result<PureState> {
        let [(q1, p1), (q2, p2)] = self.initial;
        product_state(
            &coherent_state(&self.space.first, q1, p1),
            &coherent_state(&self.space.second, q2, p2),
        )
    }

    pub fn basis(&self) -> Result<OperatorBasis> {
        OperatorBasis::build(self.basis_kind, self.space.factor(self.observed))
    }
}

/// `U^t |ψ0>` by repeated application.
pub fn evolve_state(u: &Propagator2D, psi0: &PureState, t: usize) -> Result<PureState> {
    let mut psi = psi0.clone();
    for _ in 0..t {
        psi = u.apply(&psi)?;
    }
    if (psi.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::NumericalConsistency(format!(
            "norm drifted to {} after {t} steps",
            psi.norm()
        )));
    }
    Ok(psi)
}

fn embed(m: &BasisElement, space: &BipartiteSpace, observed: Subsystem) -> Array2<C64> {
    let n1 = space.first.dim();
    let n2 = space.second.dim();
    let d = n1 * n2;
    let mut out = Array2::zeros((d, d));
    for &(i, j, v) in m.entries() {
        match observed {
            Subsystem::Second => {
                for a in 0..n1 {
                    out[[a * n2 + i, a * n2 + j]] = v;
                }
            }
            Subsystem::First => {
                for b in 0..n2 {
                    out[[i * n2 + b, j * n2 + b]] = v;
                }
            }
        }
    }
    out
}

fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// `Tr[M(t) ρ0 M†(t) ρ0]` with `M(t) = (U†)^t M U^t` built from dense
/// products, for any density `rho0` on the full space.
///
/// Cost grows like `N⁶`; meant for `N ≤ 8`.
pub fn otoc_direct_density(
    m: &BasisElement,
    u: &Propagator2D,
    rho0: &Array2<C64>,
    t: usize,
    observed: Subsystem,
) -> Result<f64> {
    let space = *u.space();
    let d = space.dim();
    if rho0.dim() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho0.nrows(),
        });
    }
    if m.dim() != space.factor(observed).dim() {
        return Err(Error::DimensionMismatch {
            expected: space.factor(observed).dim(),
            got: m.dim(),
        });
    }
    let dense = u.to_dense();
    let mut ut = Array2::<C64>::eye(d);
    for _ in 0..t {
        ut = dense.dot(&ut);
    }
    let ut_dag = adjoint(&ut);
    let big = embed(m, &space, observed);
    let m_t = ut_dag.dot(&big).dot(&ut);
    let m_t_dag = adjoint(&m_t);
    let prod = m_t.dot(rho0).dot(&m_t_dag).dot(rho0);
    let tr: C64 = prod.diag().sum();
    if tr.im.abs() > IMAG_REJECT {
        return Err(Error::NumericalConsistency(format!(
            "OTOC has imaginary part {:e}",
            tr.im
        )));
    }
    Ok(tr.re)
}

/// Heisenberg-picture OTOC of `I ⊗ M` for the pure initial state `psi0`.
pub fn otoc_direct(m: &BasisElement, u: &Propagator2D, psi0: &PureState, t: usize) -> Result<f64> {
    let a = psi0.amplitudes();
    if a.len() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: a.len(),
        });
    }
    let rho0 = Array2::from_shape_fn((a.len(), a.len()), |(i, j)| a[i] * a[j].conj());
    otoc_direct_density(m, u, &rho0, t, Subsystem::Second)
}

/// `|Tr[ρ_B(t) M]|²`, the pure-state form of the OTOC.
pub fn otoc_fast_pure(m: &BasisElement, rho_b: &ReducedDensity) -> f64 {
    m.trace_with(rho_b.entries()).norm_sqr()
}

/// `C_M(t)` for every element and every map step `0..=t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct OtocSeries {
    pub kind: BasisKind,
    pub labels: Vec<BasisLabel>,
    /// `[element, t]`.
    pub values: Array2<f64>,
}

impl OtocSeries {
    pub fn t_max(&self) -> usize {
        self.values.ncols() - 1
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `Σ_M C_M(t)` per step.
    pub fn sums(&self) -> Vec<f64> {
        self.values.columns().into_iter().map(|c| c.sum()).collect()
    }

    /// `(min, max)` over elements at step `t`.
    pub fn spread_at(&self, t: usize) -> (f64, f64) {
        self.values
            .column(t)
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// Purity and entropies of the unobserved factor over time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EntropySeries {
    pub s_l: Vec<f64>,
    pub s2: Vec<f64>,
    pub purity: Vec<f64>,
}

/// `|1 - Σ_M C_M(t) - S_L(t)|` per step.
pub fn theorem_residuals(series: &OtocSeries, entropy: &EntropySeries) -> Vec<f64> {
    series
        .sums()
        .into_iter()
        .zip(&entropy.s_l)
        .map(|(sum, s_l)| (1.0 - sum - s_l).abs())
        .collect()
}

/// Evolves the scenario's initial state and records every OTOC of `basis`
/// together with the entropy of the complementary factor.
pub fn otoc_re_series(scenario: &Scenario, basis: &OperatorBasis) -> Result<(OtocSeries, EntropySeries)> {
    let observed_dim = scenario.space.factor(scenario.observed).dim();
    if basis.space().dim() != observed_dim {
        return Err(Error::DimensionMismatch {
            expected: observed_dim,
            got: basis.space().dim(),
        });
    }
    let prop = scenario.propagator()?;
    let mut psi = scenario.initial_state()?;
    let steps = scenario.t_max + 1;
    let mut values = Array2::<f64>::zeros((basis.len(), steps));
    let mut entropy = EntropySeries::default();
    for t in 0..steps {
        if t > 0 {
            psi = prop.apply(&psi)?;
        }
        let rho_b = reduce(&psi, scenario.observed)?;
        let rho_a = reduce(&psi, scenario.observed.other())?;
        let e = purity_and_entropies(&rho_a)?;
        let column: Vec<f64> = basis
            .elements()
            .par_iter()
            .map(|m| otoc_fast_pure(m, &rho_b))
            .collect();
        let sum: f64 = column.iter().sum();
        let resid = (1.0 - sum - e.linear).abs();
        if resid > THEOREM_REJECT {
            return Err(Error::NumericalConsistency(format!(
                "sum rule violated at t={t}: residual {resid:e}"
            )));
        }
        Zip::from(values.column_mut(t)).and(&column[..]).for_each(|v, c| *v = *c);
        entropy.s_l.push(e.linear);
        entropy.s2.push(e.renyi2);
        entropy.purity.push(e.purity);
    }
    Ok((
        OtocSeries {
            kind: basis.kind(),
            labels: basis.labels(),
            values,
        },
        entropy,
    ))
}

/// Reduced densities of the observed factor for `t = 0..=t_max`.
pub fn observed_densities(scenario: &Scenario) -> Result<Vec<ReducedDensity>> {
    let prop = scenario.propagator()?;
    let mut psi = scenario.initial_state()?;
    let mut out = Vec::with_capacity(scenario.t_max + 1);
    for t in 0..=scenario.t_max {
        if t > 0 {
            psi = prop.apply(&psi)?;
        }
        out.push(reduce(&psi, scenario.observed)?);
    }
    Ok(out)
}

fn require_kind(basis: &OperatorBasis, kind: BasisKind, rho: &ReducedDensity) -> Result<()> {
    if basis.kind() != kind {
        return Err(Error::InvalidArgument(format!(
            "{kind} basis required, got {}",
            basis.kind()
        )));
    }
    if basis.space().dim() != rho.space().dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.space().dim(),
            got: basis.space().dim(),
        });
    }
    Ok(())
}

/// Chord function `ρ_ξ = Tr[T_ξ ρ]` over `(r, s) ∈ 0..N`, unnormalized `T`.
pub fn chord_representation(rho: &ReducedDensity, basis: &OperatorBasis) -> Result<Array2<C64>> {
    require_kind(basis, BasisKind::Translation, rho)?;
    let n = rho.space().dim();
    let mut out = Array2::zeros((n, n));
    for el in basis.elements() {
        if let BasisLabel::Chord { r, s } = *el.label() {
            out[[r, s]] = el.trace_with(rho.entries()) * el.raw_norm();
        }
    }
    Ok(out)
}

/// `Tr[T_(r,s) ρ]` for any integer chord, evaluated from the operator
/// definition. Negative chords are used as given, not reduced mod N.
pub fn chord_value(rho: &ReducedDensity, r: i64, s: i64) -> C64 {
    let m = rho.entries();
    translation_entries(rho.space().dim(), r, s)
        .into_iter()
        .map(|(i, j, v)| v * m[[j, i]])
        .sum()
}

/// Wigner function on the half-integer centre grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Wigner {
    /// `W[a2, b2] = 2πħ Tr[R_(a2/2, b2/2) ρ]`.
    pub values: Array2<f64>,
    /// Largest discarded imaginary part.
    pub max_imag: f64,
}

pub fn wigner_function(rho: &ReducedDensity, basis: &OperatorBasis) -> Result<Wigner> {
    require_kind(basis, BasisKind::Reflection, rho)?;
    let n = rho.space().dim();
    let two_pi_hbar = 2.0 * std::f64::consts::PI * rho.space().hbar();
    let mut values = Array2::zeros((n, n));
    let mut max_imag = 0.0f64;
    for el in basis.elements() {
        if let BasisLabel::Center { a2, b2 } = *el.label() {
            let w = el.trace_with(rho.entries()) * el.raw_norm() * two_pi_hbar;
            max_imag = max_imag.max(w.im.abs());
            values[[a2, b2]] = w.re;
        }
    }
    if max_imag > IMAG_REJECT {
        return Err(Error::NumericalConsistency(format!(
            "Wigner function has imaginary part {max_imag:e}"
        )));
    }
    Ok(Wigner { values, max_imag })
}

/// Chord and Wigner functions of one reduced density.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceRep {
    pub chord: Array2<C64>,
    pub wigner: Array2<f64>,
    pub hbar: f64,
}

pub fn phase_space_rep(
    rho: &ReducedDensity,
    translations: &OperatorBasis,
    reflections: &OperatorBasis,
) -> Result<PhaseSpaceRep> {
    Ok(PhaseSpaceRep {
        chord: chord_representation(rho, translations)?,
        wigner: wigner_function(rho, reflections)?.values,
        hbar: rho.space().hbar(),
    })
}

/// Kirkwood distribution `K[i, j] = <p_j|ρ|q_i>`, computed as `(F ρ)ᵀ`.
pub fn kirkwood_distribution(rho: &ReducedDensity) -> Array2<C64> {
    let f = fourier_kernel(rho.space());
    f.dot(rho.entries()).reversed_axes()
}

/// Density matrix of a bipartite pure state.
pub fn density_of(psi: &PureState) -> Result<Array2<C64>> {
    match psi.space() {
        StateSpace::Bipartite(_) => {
            let a = psi.amplitudes();
            Ok(Array2::from_shape_fn((a.len(), a.len()), |(i, j)| a[i] * a[j].conj()))
        }
        StateSpace::Single(_) => Err(Error::InvalidArgument("bipartite state required".into())),
    }
}
