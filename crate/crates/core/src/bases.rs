//! Complete operator bases on one torus.
//!
//! Every element is scaled to unit Hilbert–Schmidt norm, so that each basis
//! satisfies `Σ_M M_ij conj(M_ml) = δ_im δ_jl`. All four families have exactly
//! `N` nonzero entries per element (monomial matrices for Pauli strings,
//! translations and reflections, a single nonzero row for Kirkwood operators),
//! so elements are stored as `(row, col, value)` triplets and densified on
//! demand.

use std::fmt;

use ndarray::Array2;
use serde::Serialize;

use crate::torus::{half_root_of_unity, TorusSpace};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Pauli,
    Translation,
    Reflection,
    Kirkwood,
}

impl BasisKind {
    pub const ALL: [BasisKind; 4] = [
        BasisKind::Pauli,
        BasisKind::Translation,
        BasisKind::Reflection,
        BasisKind::Kirkwood,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Pauli => "pauli",
            BasisKind::Translation => "translation",
            BasisKind::Reflection => "reflection",
            BasisKind::Kirkwood => "kirkwood",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Phase-space meaningful label of a basis element.
///
/// Reflection centres `(a, b)` are half-integers; they are stored doubled
/// (`a2 = 2a`, `b2 = 2b`, both in `0..N`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisLabel {
    /// One Pauli index `0..4` per qubit, most significant qubit first.
    PauliString(Vec<u8>),
    /// Chord `ξ = (r/N, s/N)`: `r` translates momentum, `s` position.
    Chord { r: usize, s: usize },
    /// Centre `x = (a/N, b/N)` with `a = a2/2` the momentum, `b = b2/2` the position.
    Center { a2: usize, b2: usize },
    /// `|q_i><p_j|`.
    KirkwoodIdx { i: usize, j: usize },
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn half(x: usize) -> String {
            if x % 2 == 0 {
                format!("{}", x / 2)
            } else {
                format!("{}.5", x / 2)
            }
        }
        match self {
            BasisLabel::PauliString(d) => {
                f.write_str("P:")?;
                for x in d {
                    f.write_str(["I", "X", "Y", "Z"][*x as usize])?;
                }
                Ok(())
            }
            BasisLabel::Chord { r, s } => write!(f, "T:{r}:{s}"),
            BasisLabel::Center { a2, b2 } => write!(f, "R:{}:{}", half(*a2), half(*b2)),
            BasisLabel::KirkwoodIdx { i, j } => write!(f, "K:{i}:{j}"),
        }
    }
}

/// Sparse matrix entry.
pub type Entry = (usize, usize, C64);

/// One normalized basis operator.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisElement {
    label: BasisLabel,
    dim: usize,
    entries: Vec<Entry>,
    raw_norm: f64,
}

impl BasisElement {
    fn from_raw(label: BasisLabel, dim: usize, raw: Vec<Entry>, raw_norm: f64) -> Self {
        let inv = 1.0 / raw_norm;
        let entries = raw.into_iter().map(|(i, j, v)| (i, j, v * inv)).collect();
        Self {
            label,
            dim,
            entries,
            raw_norm,
        }
    }

    pub fn label(&self) -> &BasisLabel {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nonzero entries of the normalized operator.
    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Scalar divided out of the defining operator (`√N` for translations and
    /// reflections, `2^{k/2}` for Pauli strings, 1 for Kirkwood).
    pub fn raw_norm(&self) -> f64 {
        self.raw_norm
    }

    /// Dense normalized matrix.
    pub fn matrix(&self) -> Array2<C64> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for &(i, j, v) in &self.entries {
            m[[i, j]] = v;
        }
        m
    }

    /// Dense matrix of the defining (unnormalized) operator.
    pub fn raw_matrix(&self) -> Array2<C64> {
        self.matrix().mapv(|z| z * self.raw_norm)
    }

    /// `Tr[ρ M] = Σ M_ij ρ_ji`.
    pub fn trace_with(&self, rho: &Array2<C64>) -> C64 {
        self.entries.iter().map(|&(i, j, v)| v * rho[[j, i]]).sum()
    }

    /// `Tr[M† M]`.
    pub fn hs_norm_sqr(&self) -> f64 {
        self.entries.iter().map(|e| e.2.norm_sqr()).sum()
    }
}

/// An ordered complete family of `N²` normalized operators.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBasis {
    kind: BasisKind,
    space: TorusSpace,
    elements: Vec<BasisElement>,
}

impl OperatorBasis {
    /// Builds the basis of the given kind.
    pub fn build(kind: BasisKind, space: &TorusSpace) -> Result<Self> {
        match kind {
            BasisKind::Pauli => pauli_basis(space),
            BasisKind::Translation => Ok(translation_basis(space)),
            BasisKind::Reflection => Ok(reflection_basis(space)),
            BasisKind::Kirkwood => Ok(kirkwood_basis(space)),
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn space(&self) -> &TorusSpace {
        &self.space
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn labels(&self) -> Vec<BasisLabel> {
        self.elements.iter().map(|e| e.label.clone()).collect()
    }

    /// Same basis with element `idx` dropped; only useful to exercise
    /// [`completeness_check`].
    pub fn without(&self, idx: usize) -> Self {
        let mut elements = self.elements.clone();
        elements.remove(idx);
        Self {
            kind: self.kind,
            space: self.space,
            elements,
        }
    }
}

const PAULI: [[(usize, C64); 2]; 4] = {
    const ONE: C64 = C64::new(1.0, 0.0);
    const MINUS: C64 = C64::new(-1.0, 0.0);
    const I: C64 = C64::new(0.0, 1.0);
    const MINUS_I: C64 = C64::new(0.0, -1.0);
    // row r -> (column, value)
    [
        [(0, ONE), (1, ONE)],
        [(1, ONE), (0, ONE)],
        [(1, MINUS_I), (0, I)],
        [(0, ONE), (1, MINUS)],
    ]
};

/// Tensor products of `{I, σ1, σ2, σ3}` over `k` qubits, `N = 2^k`.
///
/// Qubit 0 is the most significant bit of the position index.
pub fn pauli_basis(space: &TorusSpace) -> Result<OperatorBasis> {
    let n = space.dim();
    let k = space.qubit_count().ok_or(Error::BasisUnavailable {
        kind: "pauli",
        n,
        reason: "N is not a power of two",
    })? as usize;
    let raw_norm = (n as f64).sqrt();
    let elements = (0..n * n)
        .map(|code| {
            let digits: Vec<u8> = (0..k).map(|t| ((code >> (2 * (k - 1 - t))) & 3) as u8).collect();
            let raw = (0..n)
                .map(|row| {
                    let mut col = 0usize;
                    let mut val = C64::new(1.0, 0.0);
                    for (t, &d) in digits.iter().enumerate() {
                        let bit = (row >> (k - 1 - t)) & 1;
                        let (c, v) = PAULI[d as usize][bit];
                        col |= c << (k - 1 - t);
                        val *= v;
                    }
                    (row, col, val)
                })
                .collect();
            BasisElement::from_raw(BasisLabel::PauliString(digits), n, raw, raw_norm)
        })
        .collect();
    Ok(OperatorBasis {
        kind: BasisKind::Pauli,
        space: *space,
        elements,
    })
}

/// Entries of the translation operator for an arbitrary integer chord.
///
/// `<q_i|T|q_j> = exp(iπ r (2i + s)/N)` on `j ≡ i + s (mod N)`, which is the
/// defining product of phases with the wrap term folded in.
pub fn translation_entries(n: usize, r: i64, s: i64) -> Vec<Entry> {
    let ni = n as i64;
    (0..ni)
        .map(|i| {
            let j = (i + s).rem_euclid(ni) as usize;
            (i as usize, j, half_root_of_unity(r * (2 * i + s), ni))
        })
        .collect()
}

/// Entries of the reflection operator for doubled centre indices.
///
/// `<q_i|R|q_j> = exp(iπ a2 (b2 - 2i)/N)` on `j ≡ b2 - i (mod N)`.
pub fn reflection_entries(n: usize, a2: i64, b2: i64) -> Vec<Entry> {
    let ni = n as i64;
    (0..ni)
        .map(|i| {
            let j = (b2 - i).rem_euclid(ni) as usize;
            (i as usize, j, half_root_of_unity(a2 * (b2 - 2 * i), ni))
        })
        .collect()
}

/// `T_(r,s) / √N` for `r, s ∈ 0..N`, ordered by `(r, s)`.
pub fn translation_basis(space: &TorusSpace) -> OperatorBasis {
    let n = space.dim();
    let raw_norm = (n as f64).sqrt();
    let elements = (0..n)
        .flat_map(|r| (0..n).map(move |s| (r, s)))
        .map(|(r, s)| {
            BasisElement::from_raw(
                BasisLabel::Chord { r, s },
                n,
                translation_entries(n, r as i64, s as i64),
                raw_norm,
            )
        })
        .collect();
    OperatorBasis {
        kind: BasisKind::Translation,
        space: *space,
        elements,
    }
}

/// `R_(a,b) / √N` for half-integer `a, b ∈ {0, 1/2, …, (N-1)/2}`.
pub fn reflection_basis(space: &TorusSpace) -> OperatorBasis {
    let n = space.dim();
    let raw_norm = (n as f64).sqrt();
    let elements = (0..n)
        .flat_map(|a2| (0..n).map(move |b2| (a2, b2)))
        .map(|(a2, b2)| {
            BasisElement::from_raw(
                BasisLabel::Center { a2, b2 },
                n,
                reflection_entries(n, a2 as i64, b2 as i64),
                raw_norm,
            )
        })
        .collect();
    OperatorBasis {
        kind: BasisKind::Reflection,
        space: *space,
        elements,
    }
}

/// `|q_i><p_j|`, with `<p_j|q_n> = exp(2πi jn/N)/√N` in row `i`.
pub fn kirkwood_basis(space: &TorusSpace) -> OperatorBasis {
    let n = space.dim();
    let scale = 1.0 / (n as f64).sqrt();
    let elements = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let raw = (0..n)
                .map(|col| {
                    let v = half_root_of_unity(2 * ((j * col) % n) as i64, n as i64) * scale;
                    (i, col, v)
                })
                .collect();
            BasisElement::from_raw(BasisLabel::KirkwoodIdx { i, j }, n, raw, 1.0)
        })
        .collect();
    OperatorBasis {
        kind: BasisKind::Kirkwood,
        space: *space,
        elements,
    }
}

/// `max |S†S - I|` where row `M` of `S` is the vectorized element `M`.
///
/// Zero iff the elements resolve the identity on operator space, i.e. iff
/// `Σ_M M_ij conj(M_ml) = δ_im δ_jl`.
pub fn completeness_check(basis: &OperatorBasis) -> f64 {
    let n = basis.space.dim();
    let d = n * n;
    let mut acc = Array2::<C64>::zeros((d, d));
    for el in &basis.elements {
        for &(i, j, u) in &el.entries {
            let a = i * n + j;
            for &(k, l, v) in &el.entries {
                acc[[a, k * n + l]] += u.conj() * v;
            }
        }
    }
    acc.indexed_iter()
        .map(|((a, b), z)| (z - if a == b { 1.0 } else { 0.0 }).norm())
        .fold(0.0, f64::max)
}

/// `max |Tr[M_a† M_b] - δ_ab|` over all pairs of elements.
pub fn orthonormality_residual(basis: &OperatorBasis) -> f64 {
    let dense: Vec<Array2<C64>> = basis.elements.iter().map(|e| e.matrix()).collect();
    let mut worst = 0.0f64;
    for (a, ea) in basis.elements.iter().enumerate() {
        for (b, mb) in dense.iter().enumerate().skip(a) {
            let ip: C64 = ea.entries.iter().map(|&(i, j, v)| v.conj() * mb[[i, j]]).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((ip - target).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::fourier_kernel;

    fn space(n: usize) -> TorusSpace {
        TorusSpace::new(n).unwrap()
    }

    fn max_dev(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn scalar_multiple(a: &Array2<C64>, b: &Array2<C64>) -> Option<C64> {
        // returns λ with a = λ b if it holds to 1e-12
        let (idx, pivot) = b.indexed_iter().max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))?;
        let lambda = a[idx] / pivot;
        (max_dev(a, &b.mapv(|z| z * lambda)) < 1e-12).then_some(lambda)
    }

    #[test]
    fn pauli_counts_and_identity_first() {
        let b = pauli_basis(&space(64)).unwrap();
        assert_eq!(b.len(), 4096);
        let first = b.elements()[0].matrix();
        assert_eq!(first, Array2::from_diag_elem(64, C64::new(0.125, 0.0)));
        assert!(matches!(
            pauli_basis(&space(65)),
            Err(Error::BasisUnavailable { .. })
        ));
    }

    #[test]
    fn single_qubit_pauli_matrices() {
        let b = pauli_basis(&space(2)).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let c = |re: f64, im: f64| C64::new(re * h, im * h);
        let want = [
            [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]],
            [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
            [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]],
            [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
        ];
        for (el, w) in b.elements().iter().zip(want.iter()) {
            let m = el.matrix();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((m[[i, j]] - w[i][j]).norm() < 1e-15);
                }
            }
        }
        assert!(orthonormality_residual(&b) < 1e-15);
    }

    #[test]
    fn pauli_qubit_order_is_big_endian() {
        // label "ZI" acts on the most significant bit
        let b = pauli_basis(&space(4)).unwrap();
        let zi = b.elements().iter().find(|e| e.label() == &BasisLabel::PauliString(vec![3, 0])).unwrap();
        let m = zi.matrix();
        let diag: Vec<f64> = (0..4).map(|i| m[[i, i]].re * 2.0).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn translation_zero_chord_is_identity() {
        let b = translation_basis(&space(16));
        assert_eq!(b.len(), 256);
        assert_eq!(b.elements()[0].label(), &BasisLabel::Chord { r: 0, s: 0 });
        assert!(max_dev(&b.elements()[0].raw_matrix(), &Array2::eye(16).mapv(|x: f64| C64::new(x, 0.0))) < 1e-15);
    }

    #[test]
    fn raw_translations_are_unitary() {
        let b = translation_basis(&space(16));
        for el in b.elements() {
            assert!(crate::maps::unitarity_residual(&el.raw_matrix()) < 1e-12);
        }
    }

    #[test]
    fn translations_compose_up_to_phase() {
        let n = 16;
        let dense = |r: i64, s: i64| {
            let mut m = Array2::<C64>::zeros((n, n));
            for (i, j, v) in translation_entries(n, r, s) {
                m[[i, j]] = v;
            }
            m
        };
        for (r1, s1, r2, s2) in [(1, 0, 0, 1), (3, 5, 7, 2), (15, 15, 3, 9), (8, 8, 8, 8)] {
            let prod = dense(r1, s1).dot(&dense(r2, s2));
            let sum = dense((r1 + r2) % n as i64, (s1 + s2) % n as i64);
            let lambda = scalar_multiple(&prod, &sum).expect("composition up to a scalar");
            assert!((lambda.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reflections_square_to_identity() {
        for n in [16usize, 17] {
            let b = reflection_basis(&space(n));
            assert_eq!(b.len(), n * n);
            for el in b.elements() {
                let r = el.raw_matrix();
                assert!(crate::maps::unitarity_residual(&r) < 1e-12);
                let sq = r.dot(&r);
                let eye = Array2::eye(n).mapv(|x: f64| C64::new(x, 0.0));
                let lambda = scalar_multiple(&sq, &eye).expect("R² ∝ I");
                assert!((lambda.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reflection_origin_is_parity() {
        let n = 16;
        let b = reflection_basis(&space(n));
        let r = b.elements()[0].raw_matrix();
        for i in 0..n {
            for j in 0..n {
                let want = if (i + j) % n == 0 { 1.0 } else { 0.0 };
                assert!((r[[i, j]] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn reflection_sizes_for_odd_dimension() {
        assert_eq!(reflection_basis(&space(65)).len(), 4225);
    }

    #[test]
    fn kirkwood_rows_are_fourier_rows() {
        let s = space(8);
        let f = fourier_kernel(&s);
        let b = kirkwood_basis(&s);
        for el in b.elements() {
            let BasisLabel::KirkwoodIdx { i, j } = *el.label() else { unreachable!() };
            let m = el.matrix();
            for row in 0..8 {
                for col in 0..8 {
                    let want = if row == i { f[[j, col]] } else { C64::new(0.0, 0.0) };
                    assert!((m[[row, col]] - want).norm() < 1e-15);
                }
            }
            assert!((el.hs_norm_sqr() - 1.0).abs() < 1e-12);
        }
        assert!(orthonormality_residual(&b) < 1e-12);
    }

    #[test]
    fn completeness_small_cases() {
        assert!(completeness_check(&pauli_basis(&space(4)).unwrap()) < 1e-12);
        assert!(completeness_check(&translation_basis(&space(16))) < 1e-12);
    }

    #[test]
    fn deleting_an_element_is_detected() {
        let n = 4;
        let b = translation_basis(&space(n));
        let resid = completeness_check(&b.without(5));
        assert!(resid >= 1.0 / (n * n) as f64 - 1e-12, "{resid}");
    }

    #[test]
    fn labels_are_lexicographic() {
        for kind in BasisKind::ALL {
            let b = OperatorBasis::build(kind, &space(8)).unwrap();
            let labels = b.labels();
            assert!(labels.windows(2).all(|w| w[0] < w[1]), "{kind}");
        }
    }

    #[test]
    fn label_display() {
        assert_eq!(BasisLabel::PauliString(vec![0, 1, 2, 3]).to_string(), "P:IXYZ");
        assert_eq!(BasisLabel::Chord { r: 3, s: 12 }.to_string(), "T:3:12");
        assert_eq!(BasisLabel::Center { a2: 3, b2: 4 }.to_string(), "R:1.5:2");
        assert_eq!(BasisLabel::KirkwoodIdx { i: 0, j: 7 }.to_string(), "K:0:7");
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in BasisKind::ALL {
            assert_eq!(BasisKind::parse(kind.name()), Some(kind));
        }
        assert_eq!(BasisKind::parse("Translation"), Some(BasisKind::Translation));
        assert_eq!(BasisKind::parse("gellmann"), None);
    }
}
