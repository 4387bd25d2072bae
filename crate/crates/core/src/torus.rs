//! Kinematics of the quantized 2-torus.
//!
//! A torus with `N` grid points per axis carries an `N`-dimensional Hilbert
//! space with effective Planck constant `hbar = 1/(2πN)`. Position states sit
//! at `q = n/N`, momentum states at `p = m/N`, and the two bases are exchanged
//! by the kernel `<p_m|q_n> = exp(2πi mn/N)/√N`.
//!
//! Bipartite states use the flat index `j = j1·N2 + j2`, subsystem 1 being the
//! slow index. Every routine in the crate relies on that single convention.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView2};

use crate::{Error, Result, C64};

const STATE_NORM_TOL: f64 = 1e-12;

/// One degree of freedom on the torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusSpace {
    n: usize,
    hbar: f64,
    chi_q: f64,
    chi_p: f64,
}

impl TorusSpace {
    /// Builds the space of dimension `n` with zero Floquet angles.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        Ok(Self {
            n,
            hbar: 1.0 / (2.0 * PI * n as f64),
            chi_q: 0.0,
            chi_p: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn chi_q(&self) -> f64 {
        self.chi_q
    }

    pub fn chi_p(&self) -> f64 {
        self.chi_p
    }

    /// `Some(k)` when `N = 2^k`.
    pub fn qubit_count(&self) -> Option<u32> {
        self.n.is_power_of_two().then(|| self.n.trailing_zeros())
    }
}

/// Alias kept for readability at call sites that mirror the operation list.
pub fn make_space(n: usize) -> Result<TorusSpace> {
    TorusSpace::new(n)
}

/// Two tori composed as a tensor product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BipartiteSpace {
    pub first: TorusSpace,
    pub second: TorusSpace,
}

impl BipartiteSpace {
    pub fn new(first: TorusSpace, second: TorusSpace) -> Self {
        Self { first, second }
    }

    /// Both factors of dimension `n`.
    pub fn symmetric(n: usize) -> Result<Self> {
        let s = TorusSpace::new(n)?;
        Ok(Self::new(s, s))
    }

    pub fn dim(&self) -> usize {
        self.first.dim() * self.second.dim()
    }

    pub fn flat_index(&self, j1: usize, j2: usize) -> usize {
        j1 * self.second.dim() + j2
    }

    pub fn factor(&self, which: Subsystem) -> &TorusSpace {
        match which {
            Subsystem::First => &self.first,
            Subsystem::Second => &self.second,
        }
    }
}

/// Tensor factor selector. `First` is subsystem A, `Second` is subsystem B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    First,
    Second,
}

impl Subsystem {
    pub fn other(self) -> Self {
        match self {
            Subsystem::First => Subsystem::Second,
            Subsystem::Second => Subsystem::First,
        }
    }
}

/// Space a pure state lives on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpace {
    Single(TorusSpace),
    Bipartite(BipartiteSpace),
}

impl StateSpace {
    pub fn dim(&self) -> usize {
        match self {
            StateSpace::Single(s) => s.dim(),
            StateSpace::Bipartite(b) => b.dim(),
        }
    }
}

/// Normalized state vector in the position representation.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    space: StateSpace,
    amplitudes: Array1<C64>,
}

impl PureState {
    /// Wraps `amplitudes`, rejecting wrong lengths and non-unit norms.
    pub fn new(space: StateSpace, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: amplitudes.len(),
            });
        }
        let norm = euclidean_norm(amplitudes.iter());
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::NumericalConsistency(format!(
                "state norm {norm} differs from 1"
            )));
        }
        Ok(Self { space, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(space: StateSpace, mut amplitudes: Array1<C64>) -> Result<Self> {
        let norm = euclidean_norm(amplitudes.iter());
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NumericalConsistency(format!(
                "cannot normalize a vector of norm {norm}"
            )));
        }
        amplitudes.mapv_inplace(|a| a / norm);
        Self::new(space, amplitudes)
    }

    /// Position eigenstate `|q_n>` on a single torus.
    pub fn position(space: TorusSpace, n: usize) -> Result<Self> {
        if n >= space.dim() {
            return Err(Error::InvalidArgument(format!(
                "position index {n} outside 0..{}",
                space.dim()
            )));
        }
        let mut amps = Array1::zeros(space.dim());
        amps[n] = C64::new(1.0, 0.0);
        Self::new(StateSpace::Single(space), amps)
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        euclidean_norm(self.amplitudes.iter())
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &PureState) -> Result<C64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                got: other.amplitudes.len(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Bipartite amplitudes viewed as the `N1 × N2` coefficient matrix.
    pub fn coefficient_matrix(&self) -> Result<ArrayView2<'_, C64>> {
        match self.space {
            StateSpace::Bipartite(b) => Ok(self
                .amplitudes
                .view()
                .into_shape_with_order((b.first.dim(), b.second.dim()))
                .expect("contiguous amplitudes")),
            StateSpace::Single(_) => Err(Error::InvalidArgument(
                "coefficient matrix requested for a single-torus state".into(),
            )),
        }
    }

    pub(crate) fn from_parts_unchecked(space: StateSpace, amplitudes: Array1<C64>) -> Self {
        Self { space, amplitudes }
    }
}

fn euclidean_norm<'a>(it: impl Iterator<Item = &'a C64>) -> f64 {
    it.map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// N-periodic Kronecker delta.
pub fn periodic_delta(i: i64, j: i64, n: usize) -> u8 {
    u8::from((i - j).rem_euclid(n as i64) == 0)
}

/// `exp(iπ m / n)` with `m` reduced modulo `2n` before the float conversion.
pub(crate) fn half_root_of_unity(m: i64, n: i64) -> C64 {
    let m = m.rem_euclid(2 * n);
    C64::from_polar(1.0, PI * m as f64 / n as f64)
}

/// Kernel `F[m, n] = <p_m|q_n> = exp(2πi mn/N)/√N`.
pub fn fourier_kernel(space: &TorusSpace) -> Array2<C64> {
    let n = space.dim();
    let scale = 1.0 / (n as f64).sqrt();
    Array2::from_shape_fn((n, n), |(m, k)| {
        half_root_of_unity(2 * ((m * k) % n) as i64, n as i64) * scale
    })
}

/// Periodized Gaussian centred at `(q0, p0)`.
///
/// `ψ(n) ∝ Σ_{k=-3..3} exp[-πN(x - k)^2 + 2πiN p0 (x - k)]`, `x = n/N - q0`,
/// renormalized numerically.
pub fn coherent_state(space: &TorusSpace, q0: f64, p0: f64) -> PureState {
    let n = space.dim();
    let nf = n as f64;
    let amps = Array1::from_shape_fn(n, |idx| {
        let x = idx as f64 / nf - q0;
        (-3..=3)
            .map(|k| {
                let d = x - k as f64;
                C64::from_polar((-PI * nf * d * d).exp(), 2.0 * PI * nf * p0 * d)
            })
            .sum::<C64>()
    });
    PureState::normalized(StateSpace::Single(*space), amps)
        .expect("periodized Gaussian has positive norm")
}

/// Tensor product `a ⊗ b` with amplitude `a(j1)·b(j2)` at `j1·N2 + j2`.
pub fn product_state(a: &PureState, b: &PureState) -> Result<PureState> {
    let (sa, sb) = match (a.space, b.space) {
        (StateSpace::Single(sa), StateSpace::Single(sb)) => (sa, sb),
        _ => {
            return Err(Error::InvalidArgument(
                "product_state expects two single-torus states".into(),
            ))
        }
    };
    let space = BipartiteSpace::new(sa, sb);
    let nb = sb.dim();
    let amps = Array1::from_shape_fn(space.dim(), |j| a.amplitudes[j / nb] * b.amplitudes[j % nb]);
    PureState::normalized(StateSpace::Bipartite(space), amps)
}

/// Reduced density operator of one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensity {
    space: TorusSpace,
    entries: Array2<C64>,
}

impl ReducedDensity {
    /// Validates Hermiticity and unit trace to `1e-12`.
    pub fn new(space: TorusSpace, entries: Array2<C64>) -> Result<Self> {
        let n = space.dim();
        if entries.dim() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: entries.nrows(),
            });
        }
        let rho = Self { space, entries };
        let herm = rho.hermiticity_residual();
        if herm > 1e-12 {
            return Err(Error::NumericalConsistency(format!(
                "density is not Hermitian (residual {herm:e})"
            )));
        }
        let tr = rho.trace();
        if (tr - 1.0).norm() > 1e-12 {
            return Err(Error::NumericalConsistency(format!(
                "density trace {tr} differs from 1"
            )));
        }
        Ok(rho)
    }

    /// Maximally mixed state `I/N`.
    pub fn maximally_mixed(space: TorusSpace) -> Self {
        let n = space.dim();
        let entries = Array2::from_diag_elem(n, C64::new(1.0 / n as f64, 0.0));
        Self { space, entries }
    }

    /// `|ψ><ψ|` for a single-torus pure state.
    pub fn from_pure(state: &PureState) -> Result<Self> {
        let space = match state.space {
            StateSpace::Single(s) => s,
            StateSpace::Bipartite(_) => {
                return Err(Error::InvalidArgument(
                    "from_pure expects a single-torus state".into(),
                ))
            }
        };
        let a = &state.amplitudes;
        let entries = Array2::from_shape_fn((a.len(), a.len()), |(i, j)| a[i] * a[j].conj());
        Self::new(space, entries)
    }

    pub fn space(&self) -> &TorusSpace {
        &self.space
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.entries.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entries[[i, j]] - self.entries[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// `Tr[ρ²]` as a complex number; the imaginary part is a diagnostic.
    pub fn purity_complex(&self) -> C64 {
        let n = self.entries.nrows();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.entries[[i, j]] * self.entries[[j, i]];
            }
        }
        acc
    }
}

/// Partial trace of a bipartite pure state, keeping `keep`.
pub fn reduce(state: &PureState, keep: Subsystem) -> Result<ReducedDensity> {
    let space = match state.space {
        StateSpace::Bipartite(b) => b,
        StateSpace::Single(_) => {
            return Err(Error::InvalidArgument(
                "partial trace needs a bipartite state".into(),
            ))
        }
    };
    let psi = state.coefficient_matrix()?;
    let mut entries = match keep {
        // ρ_A = Ψ Ψ†
        Subsystem::First => {
            let n = space.first.dim();
            let mut out = Array2::<C64>::zeros((n, n));
            for i in 0..n {
                for k in i..n {
                    let v: C64 = psi
                        .row(i)
                        .iter()
                        .zip(psi.row(k).iter())
                        .map(|(a, b)| a * b.conj())
                        .sum();
                    out[[i, k]] = v;
                    out[[k, i]] = v.conj();
                }
            }
            out
        }
        // ρ_B = Ψᵀ Ψ*
        Subsystem::Second => {
            let n = space.second.dim();
            let mut out = Array2::<C64>::zeros((n, n));
            for i in 0..n {
                for k in i..n {
                    let v: C64 = psi
                        .column(i)
                        .iter()
                        .zip(psi.column(k).iter())
                        .map(|(a, b)| a * b.conj())
                        .sum();
                    out[[i, k]] = v;
                    out[[k, i]] = v.conj();
                }
            }
            out
        }
    };
    // diagonal entries are |.|² sums; drop rounding noise in the imaginary part
    for i in 0..entries.nrows() {
        entries[[i, i]].im = 0.0;
    }
    ReducedDensity::new(*space.factor(keep), entries)
}

/// Purity and the two entropies derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropies {
    pub purity: f64,
    /// Linear entropy `1 - purity`.
    pub linear: f64,
    /// Second Renyi entropy `-ln purity`.
    pub renyi2: f64,
}

pub fn purity_and_entropies(rho: &ReducedDensity) -> Result<Entropies> {
    let p = rho.purity_complex();
    if p.im.abs() > 1e-12 {
        return Err(Error::NumericalConsistency(format!(
            "purity has imaginary part {:e}",
            p.im
        )));
    }
    let purity = p.re;
    if !(purity > 0.0 && purity <= 1.0 + 1e-10) {
        return Err(Error::NumericalConsistency(format!(
            "purity {purity} outside (0, 1]"
        )));
    }
    Ok(Entropies {
        purity,
        linear: 1.0 - purity,
        renyi2: -purity.ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn space_rejects_degenerate_dimension() {
        assert_eq!(TorusSpace::new(1), Err(Error::InvalidDimension(1)));
        assert_eq!(TorusSpace::new(0), Err(Error::InvalidDimension(0)));
    }

    #[test]
    fn hbar_matches_dimension() {
        let s = TorusSpace::new(64).unwrap();
        assert!(close(s.hbar(), 1.0 / (128.0 * PI), 1e-18));
        assert!(close(s.hbar() * 2.0 * PI * 64.0, 1.0, 1e-15));
        assert_eq!((s.chi_q(), s.chi_p()), (0.0, 0.0));
        assert_eq!(s.qubit_count(), Some(6));
        assert_eq!(TorusSpace::new(65).unwrap().qubit_count(), None);
    }

    #[test]
    fn periodic_delta_wraps() {
        assert_eq!(periodic_delta(3, 67, 64), 1);
        assert_eq!(periodic_delta(0, 1, 64), 0);
        assert_eq!(periodic_delta(-1, 63, 64), 1);
        assert_eq!(periodic_delta(-130, 126, 64), 1);
    }

    #[test]
    fn fourier_kernel_small_and_unitary() {
        let f = fourier_kernel(&TorusSpace::new(2).unwrap());
        let h = 1.0 / 2f64.sqrt();
        let expected = [[h, h], [h, -h]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((f[[i, j]] - C64::new(expected[i][j], 0.0)).norm() < 1e-15);
            }
        }
        for n in [2usize, 3, 16, 64, 65] {
            let f = fourier_kernel(&TorusSpace::new(n).unwrap());
            let inv = 1.0 / (n as f64).sqrt();
            assert!(f.row(0).iter().all(|z| (z - C64::new(inv, 0.0)).norm() < 1e-15));
            let prod = f.t().mapv(|z| z.conj()).dot(&f);
            let resid = prod
                .indexed_iter()
                .map(|((i, j), z)| (z - if i == j { 1.0 } else { 0.0 }).norm())
                .fold(0.0, f64::max);
            assert!(resid < 1e-12, "N={n}: {resid}");
        }
    }

    #[test]
    fn coherent_state_at_torus_centre() {
        let s = TorusSpace::new(64).unwrap();
        let psi = coherent_state(&s, 0.5, 0.5);
        assert!(close(psi.norm(), 1.0, 1e-12));
        let argmax = psi
            .amplitudes()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap()
            .0;
        assert_eq!(argmax, 32);

        // periodic second moment about q0
        let var: f64 = psi
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(n, a)| {
                let mut x = n as f64 / 64.0 - 0.5;
                x -= x.round();
                a.norm_sqr() * x * x
            })
            .sum();
        let target = s.hbar() / 2.0;
        assert!((var - target).abs() < 0.1 * target, "{var} vs {target}");
    }

    #[test]
    fn coherent_state_off_grid_is_normalized() {
        let s = TorusSpace::new(64).unwrap();
        let c = std::f64::consts::FRAC_PI_4;
        assert!(close(coherent_state(&s, c, c).norm(), 1.0, 1e-12));
    }

    #[test]
    fn product_of_position_states() {
        let s = TorusSpace::new(8).unwrap();
        let a = PureState::position(s, 0).unwrap();
        let psi = product_state(&a, &a).unwrap();
        assert_eq!(psi.amplitudes()[0], C64::new(1.0, 0.0));
        assert!(close(psi.norm(), 1.0, 1e-12));
    }

    #[test]
    fn product_state_is_unentangled() {
        let s = TorusSpace::new(16).unwrap();
        let psi = product_state(&coherent_state(&s, 0.3, 0.7), &coherent_state(&s, 0.5, 0.5))
            .unwrap();
        for keep in [Subsystem::First, Subsystem::Second] {
            let e = purity_and_entropies(&reduce(&psi, keep).unwrap()).unwrap();
            assert!(close(e.purity, 1.0, 1e-12));
            assert!(close(e.linear, 0.0, 1e-12));
        }
    }

    #[test]
    fn bell_pair_reduces_to_half_identity() {
        let space = BipartiteSpace::symmetric(2).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let amps = ndarray::arr1(&[C64::new(h, 0.0), C64::default(), C64::default(), C64::new(h, 0.0)]);
        let psi = PureState::new(StateSpace::Bipartite(space), amps).unwrap();
        let rho = reduce(&psi, Subsystem::First).unwrap();
        assert!((rho.entries()[[0, 0]] - 0.5).norm() < 1e-15);
        assert!(rho.entries()[[0, 1]].norm() < 1e-15);
        let e = purity_and_entropies(&rho).unwrap();
        assert!(close(e.purity, 0.5, 1e-12));
    }

    #[test]
    fn maximally_mixed_entropies() {
        let rho = ReducedDensity::maximally_mixed(TorusSpace::new(64).unwrap());
        let e = purity_and_entropies(&rho).unwrap();
        assert!(close(e.purity, 1.0 / 64.0, 1e-14));
        assert!(close(e.linear, 63.0 / 64.0, 1e-14));
        assert!(close(e.renyi2, 64f64.ln(), 1e-12));
        assert!(close(e.linear, 1.0 - (-e.renyi2).exp(), 1e-14));
    }

    #[test]
    fn purity_out_of_range_is_rejected() {
        let s = TorusSpace::new(2).unwrap();
        let mut m = Array2::<C64>::zeros((2, 2));
        m[[0, 0]] = C64::new(1.5, 0.0);
        m[[1, 1]] = C64::new(-0.5, 0.0);
        let rho = ReducedDensity::new(s, m).unwrap();
        assert!(matches!(
            purity_and_entropies(&rho),
            Err(Error::NumericalConsistency(_))
        ));
    }

    #[test]
    fn reduce_rejects_single_torus() {
        let s = TorusSpace::new(4).unwrap();
        let psi = PureState::position(s, 1).unwrap();
        assert!(reduce(&psi, Subsystem::First).is_err());
    }
}
