//! Perturbed cat maps: classical dynamics and quantum propagators.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, Zip};
use rayon::prelude::*;

use crate::torus::{half_root_of_unity, BipartiteSpace, PureState, StateSpace, TorusSpace};
use crate::{Error, Result, C64};

/// Integer 2×2 map matrix acting on column vectors `(q, p)`.
pub type MapMatrix = [[i64; 2]; 2];

pub const HYPERBOLIC: MapMatrix = [[2, 1], [3, 2]];
pub const ELLIPTIC: MapMatrix = [[0, 1], [-1, 0]];

/// Default perturbation strength of each map.
pub const DEFAULT_K: f64 = 0.25;
/// Default coupling strength.
pub const DEFAULT_KC: f64 = 0.5;

/// A single perturbed cat map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatMapSpec {
    matrix: MapMatrix,
    k: f64,
}

impl CatMapSpec {
    /// Rejects matrices that are not area preserving.
    pub fn new(matrix: MapMatrix, k: f64) -> Result<Self> {
        let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
        if det != 1 {
            return Err(Error::UnsupportedMap(format!(
                "determinant {det} != 1 for {matrix:?}"
            )));
        }
        Ok(Self { matrix, k })
    }

    pub fn hyperbolic(k: f64) -> Self {
        Self { matrix: HYPERBOLIC, k }
    }

    pub fn elliptic(k: f64) -> Self {
        Self { matrix: ELLIPTIC, k }
    }

    pub fn matrix(&self) -> MapMatrix {
        self.matrix
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn trace(&self) -> i64 {
        self.matrix[0][0] + self.matrix[1][1]
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > 2
    }
}

/// Two maps coupled through a position-dependent kick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledMapSpec {
    pub map1: CatMapSpec,
    pub map2: CatMapSpec,
    pub kc: f64,
}

impl CoupledMapSpec {
    pub fn new(map1: CatMapSpec, map2: CatMapSpec, kc: f64) -> Self {
        Self { map1, map2, kc }
    }
}

/// Point on the 2-torus, coordinates kept in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub q: f64,
    pub p: f64,
}

impl ClassicalState {
    pub fn new(q: f64, p: f64) -> Self {
        Self {
            q: wrap_unit(q),
            p: wrap_unit(p),
        }
    }
}

fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Momentum kick `ε(q) = -(K/2π) sin(2πq)`.
pub fn kick(k: f64, q: f64) -> f64 {
    -(k / (2.0 * PI)) * (2.0 * PI * q).sin()
}

/// Coupling kick `κ(q1, q2) = -(Kc/2π) sin(2π(q1 + q2))`.
pub fn coupling_kick(kc: f64, q1: f64, q2: f64) -> f64 {
    -(kc / (2.0 * PI)) * (2.0 * PI * (q1 + q2)).sin()
}

fn apply_matrix(m: &MapMatrix, q: f64, p: f64) -> ClassicalState {
    ClassicalState::new(
        m[0][0] as f64 * q + m[0][1] as f64 * p,
        m[1][0] as f64 * q + m[1][1] as f64 * p,
    )
}

/// One step `(q, p) -> M (q, p + ε(q)) mod 1`.
pub fn classical_step(spec: &CatMapSpec, s: ClassicalState) -> ClassicalState {
    apply_matrix(&spec.matrix, s.q, s.p + kick(spec.k, s.q))
}

/// One step of the coupled two-degree-of-freedom map.
pub fn classical_coupled_step(spec: &CoupledMapSpec, s: [ClassicalState; 2]) -> [ClassicalState; 2] {
    let c = coupling_kick(spec.kc, s[0].q, s[1].q);
    [
        apply_matrix(&spec.map1.matrix, s[0].q, s[0].p + kick(spec.map1.k, s[0].q) + c),
        apply_matrix(&spec.map2.matrix, s[1].q, s[1].p + kick(spec.map2.k, s[1].q) + c),
    ]
}

/// Unit eigenvector of the expanding eigenvalue of a hyperbolic matrix, in
/// `(q, p)` components with a non-negative first entry.
pub fn unstable_direction(m: &MapMatrix) -> Result<[f64; 2]> {
    let tr = m[0][0] + m[1][1];
    if tr.abs() <= 2 {
        return Err(Error::NotHyperbolic(tr.abs()));
    }
    let trf = tr as f64;
    let lambda = (trf + trf.signum() * (trf * trf - 4.0).sqrt()) / 2.0;
    let (a, b, c, d) = (m[0][0] as f64, m[0][1] as f64, m[1][0] as f64, m[1][1] as f64);
    let v = if b != 0.0 {
        [b, lambda - a]
    } else {
        [lambda - d, c]
    };
    let norm = v[0].hypot(v[1]);
    let sign = if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) { -1.0 } else { 1.0 };
    Ok([sign * v[0] / norm, sign * v[1] / norm])
}

/// Single-map propagator in the position representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator1D {
    space: TorusSpace,
    u: Array2<C64>,
}

impl Propagator1D {
    pub fn space(&self) -> &TorusSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.u
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.u)
    }
}

/// `U_jk = A exp[iπ/(N M12)(M11 j² - 2jk + M22 k²) + F_j]` with
/// `A = (1/(i N M12))^{1/2}` (principal branch) and `F_j = i K N/(2π) cos(2πj/N)`.
pub fn quantum_propagator_1d(spec: &CatMapSpec, space: &TorusSpace) -> Result<Propagator1D> {
    let [[m11, m12], [_, m22]] = spec.matrix;
    if m12 == 0 {
        return Err(Error::UnsupportedMap(
            "M12 = 0 has no position-representation propagator".into(),
        ));
    }
    let n = space.dim() as i64;
    let nf = n as f64;
    let amp = C64::new(0.0, nf * m12 as f64).inv().sqrt();
    let denom = n * m12.abs();
    let sign = m12.signum();
    let kick_scale = spec.k * nf / (2.0 * PI);
    let kicks: Vec<C64> = (0..n)
        .map(|j| C64::from_polar(1.0, kick_scale * (2.0 * PI * j as f64 / nf).cos()))
        .collect();
    let u = Array2::from_shape_fn((n as usize, n as usize), |(j, k)| {
        let (j, k) = (j as i64, k as i64);
        let quad = sign * (m11 * j * j - 2 * j * k + m22 * k * k);
        amp * half_root_of_unity(quad, denom) * kicks[j as usize]
    });
    Ok(Propagator1D { space: *space, u })
}

/// Diagonal coupling phases `C(j1, j2) = exp{i N Kc/(2π) cos[2π(j1 + j2)/N]}`.
pub fn coupling_matrix(spec: &CoupledMapSpec, space: &BipartiteSpace) -> Array2<C64> {
    let n1 = space.first.dim();
    let n2 = space.second.dim();
    let nf = n1 as f64;
    let scale = nf * spec.kc / (2.0 * PI);
    Array2::from_shape_fn((n1, n2), |(j1, j2)| {
        let arg = 2.0 * PI * ((j1 + j2) % n1) as f64 / nf;
        C64::from_polar(1.0, scale * arg.cos())
    })
}

/// One step of the coupled quantum map,
/// `U[(j1 j2), (k1 k2)] = U1[j1, k1] U2[j2, k2] C(j1, j2)`.
///
/// Kept in factored form: a state `Ψ[j1, j2]` evolves as `C ⊙ (U1 Ψ U2ᵀ)`,
/// which costs `O(N³)` per step instead of `O(N⁴)`. [`Propagator2D::to_dense`]
/// materializes the full `N² × N²` matrix when needed.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator2D {
    space: BipartiteSpace,
    u1: Array2<C64>,
    u2: Array2<C64>,
    coupling: Array2<C64>,
}

pub fn quantum_propagator_2d(spec: &CoupledMapSpec, space: &BipartiteSpace) -> Result<Propagator2D> {
    if space.first.dim() != space.second.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.first.dim(),
            got: space.second.dim(),
        });
    }
    let u1 = quantum_propagator_1d(&spec.map1, &space.first)?.u;
    let u2 = quantum_propagator_1d(&spec.map2, &space.second)?.u;
    Ok(Propagator2D {
        space: *space,
        u1,
        u2,
        coupling: coupling_matrix(spec, space),
    })
}

impl Propagator2D {
    pub fn space(&self) -> &BipartiteSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn factors(&self) -> (&Array2<C64>, &Array2<C64>, &Array2<C64>) {
        (&self.u1, &self.u2, &self.coupling)
    }

    fn check_state(&self, psi: &PureState) -> Result<()> {
        match psi.space() {
            StateSpace::Bipartite(b) if *b == self.space => Ok(()),
            other => Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                got: other.dim(),
            }),
        }
    }

    /// `U |ψ>`.
    pub fn apply(&self, psi: &PureState) -> Result<PureState> {
        self.check_state(psi)?;
        let coeffs = psi.coefficient_matrix()?;
        let mut out = self.u1.dot(&coeffs).dot(&self.u2.t());
        Zip::from(&mut out).and(&self.coupling).for_each(|o, c| *o *= c);
        Ok(self.wrap(out))
    }

    /// `U† |ψ>`.
    pub fn apply_adjoint(&self, psi: &PureState) -> Result<PureState> {
        self.check_state(psi)?;
        let mut coeffs = psi.coefficient_matrix()?.to_owned();
        Zip::from(&mut coeffs).and(&self.coupling).for_each(|o, c| *o *= c.conj());
        let out = self.u1.t().mapv(|z| z.conj()).dot(&coeffs).dot(&self.u2.mapv(|z| z.conj()));
        Ok(self.wrap(out))
    }

    fn wrap(&self, coeffs: Array2<C64>) -> PureState {
        let flat = Array1::from_iter(coeffs.into_iter());
        PureState::from_parts_unchecked(StateSpace::Bipartite(self.space), flat)
    }

    /// The full `N1N2 × N1N2` matrix. About 268 MB at N = 64.
    pub fn to_dense(&self) -> Array2<C64> {
        let n1 = self.space.first.dim();
        let n2 = self.space.second.dim();
        Array2::from_shape_fn((n1 * n2, n1 * n2), |(row, col)| {
            let (j1, j2) = (row / n2, row % n2);
            let (k1, k2) = (col / n2, col % n2);
            self.u1[[j1, k1]] * self.u2[[j2, k2]] * self.coupling[[j1, j2]]
        })
    }

    /// `max |U†U - I|` evaluated exactly on the factored form.
    ///
    /// `(U†U)[(k1 k2), (l1 l2)] = Σ_j1 conj(U1[j1,k1]) U1[j1,l1] G_j1[k2, l2]` with
    /// `G_j1 = Σ_j2 |C(j1, j2)|² conj(U2[j2,·])ᵀ U2[j2,·]`, i.e. one
    /// `N² × N` by `N × N²` product, done one `k1` block at a time.
    pub fn unitarity_residual(&self) -> f64 {
        let n1 = self.space.first.dim();
        let n2 = self.space.second.dim();
        // g[j1, (k2 l2)]
        let rows: Vec<Vec<C64>> = (0..n1)
            .into_par_iter()
            .map(|j1| {
                let mut row = vec![C64::new(0.0, 0.0); n2 * n2];
                for k2 in 0..n2 {
                    for l2 in 0..n2 {
                        let mut acc = C64::new(0.0, 0.0);
                        for j2 in 0..n2 {
                            let w = self.coupling[[j1, j2]].norm_sqr();
                            acc += self.u2[[j2, k2]].conj() * self.u2[[j2, l2]] * w;
                        }
                        row[k2 * n2 + l2] = acc;
                    }
                }
                row
            })
            .collect();
        let g = Array2::from_shape_vec((n1, n2 * n2), rows.concat()).expect("g shape");
        (0..n1)
            .into_par_iter()
            .map(|k1| {
                // a[l1, j1] = conj(U1[j1, k1]) U1[j1, l1]
                let a = Array2::from_shape_fn((n1, n1), |(l1, j1)| {
                    self.u1[[j1, k1]].conj() * self.u1[[j1, l1]]
                });
                let block = a.dot(&g);
                let mut worst = 0.0f64;
                for l1 in 0..n1 {
                    for k2 in 0..n2 {
                        for l2 in 0..n2 {
                            let target = if k1 == l1 && k2 == l2 { 1.0 } else { 0.0 };
                            worst = worst.max((block[[l1, k2 * n2 + l2]] - target).norm());
                        }
                    }
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// `max |A†A - I|` for a dense square matrix.
pub fn unitarity_residual(u: &Array2<C64>) -> f64 {
    let gram = u.t().mapv(|z| z.conj()).dot(u);
    gram.indexed_iter()
        .map(|((i, j), z)| (z - if i == j { 1.0 } else { 0.0 }).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::s;

    fn dense_row(prop: &Propagator2D, j1: usize, j2: usize) -> Array1<C64> {
        let n2 = prop.space.second.dim();
        let n1 = prop.space.first.dim();
        let mut out = Array1::zeros(n1 * n2);
        for k1 in 0..n1 {
            let mut slot = out.slice_mut(s![k1 * n2..(k1 + 1) * n2]);
            for k2 in 0..n2 {
                slot[k2] = prop.u1[[j1, k1]] * prop.u2[[j2, k2]] * prop.coupling[[j1, j2]];
            }
        }
        out
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol || (1.0 - (a - b).abs()).abs() <= tol
    }

    #[test]
    fn hyperbolic_fixed_point() {
        let out = classical_step(&CatMapSpec::hyperbolic(0.25), ClassicalState::new(0.5, 0.5));
        assert!(close(out.q, 0.5, 1e-12) && close(out.p, 0.5, 1e-12), "{out:?}");
    }

    #[test]
    fn elliptic_quarter_turn() {
        let out = classical_step(&CatMapSpec::elliptic(0.0), ClassicalState::new(0.25, 0.0));
        assert!(close(out.q, 0.0, 1e-12) && close(out.p, 0.75, 1e-12), "{out:?}");
    }

    #[test]
    fn unperturbed_hyperbolic_step() {
        let out = classical_step(&CatMapSpec::hyperbolic(0.0), ClassicalState::new(0.1, 0.1));
        assert!(close(out.q, 0.3, 1e-12) && close(out.p, 0.5, 1e-12), "{out:?}");
    }

    #[test]
    fn uncoupled_step_matches_single_maps() {
        let spec = CoupledMapSpec::new(CatMapSpec::hyperbolic(0.25), CatMapSpec::elliptic(0.25), 0.0);
        let s = [ClassicalState::new(0.13, 0.71), ClassicalState::new(0.42, 0.05)];
        let out = classical_coupled_step(&spec, s);
        assert_eq!(out[0], classical_step(&spec.map1, s[0]));
        assert_eq!(out[1], classical_step(&spec.map2, s[1]));
    }

    #[test]
    fn coupled_fixed_point() {
        let spec = CoupledMapSpec::new(CatMapSpec::hyperbolic(0.25), CatMapSpec::hyperbolic(0.25), 0.5);
        let p = ClassicalState::new(0.5, 0.5);
        let out = classical_coupled_step(&spec, [p, p]);
        for o in out {
            assert!(close(o.q, 0.5, 1e-12) && close(o.p, 0.5, 1e-12));
        }
    }

    #[test]
    fn unstable_direction_of_hyperbolic_map() {
        let v = unstable_direction(&HYPERBOLIC).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-14);
        assert!((v[1] - 3f64.sqrt() / 2.0).abs() < 1e-14);
        assert!((v[0].hypot(v[1]) - 1.0).abs() < 1e-15);
        assert_eq!(unstable_direction(&ELLIPTIC), Err(Error::NotHyperbolic(0)));
    }

    #[test]
    fn rejects_non_symplectic_matrix() {
        assert!(CatMapSpec::new([[2, 1], [1, 2]], 0.0).is_err());
        assert!(CatMapSpec::new([[1, 0], [5, 1]], 0.0).is_ok());
    }

    #[test]
    fn zero_m12_has_no_propagator() {
        let spec = CatMapSpec::new([[1, 0], [1, 1]], 0.0).unwrap();
        let space = TorusSpace::new(8).unwrap();
        assert!(matches!(
            quantum_propagator_1d(&spec, &space),
            Err(Error::UnsupportedMap(_))
        ));
    }

    #[test]
    fn hyperbolic_propagator_is_flat_unitary() {
        let space = TorusSpace::new(64).unwrap();
        let u = quantum_propagator_1d(&CatMapSpec::hyperbolic(0.25), &space).unwrap();
        assert!(u.unitarity_residual() < 1e-12);
        assert!(u.matrix().iter().all(|z| (z.norm() - 0.125).abs() < 1e-12));
    }

    #[test]
    fn elliptic_fourth_power_is_scalar() {
        let space = TorusSpace::new(16).unwrap();
        let u = quantum_propagator_1d(&CatMapSpec::elliptic(0.0), &space).unwrap();
        let m = u.matrix();
        let u4 = m.dot(m).dot(m).dot(m);
        let phase = u4[[0, 0]];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        for ((i, j), z) in u4.indexed_iter() {
            let target = if i == j { phase } else { C64::new(0.0, 0.0) };
            assert!((z - target).norm() < 1e-12);
        }
    }

    #[test]
    fn coupling_phases() {
        let space = BipartiteSpace::symmetric(64).unwrap();
        let off = CoupledMapSpec::new(CatMapSpec::hyperbolic(0.25), CatMapSpec::hyperbolic(0.25), 0.0);
        assert!(coupling_matrix(&off, &space).iter().all(|c| *c == C64::new(1.0, 0.0)));
        let on = CoupledMapSpec { kc: 0.5, ..off };
        let c = coupling_matrix(&on, &space);
        assert!(c.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
        let expected = C64::from_polar(1.0, 32.0 / (2.0 * PI));
        assert!((c[[0, 0]] - expected).norm() < 1e-14);
    }

    #[test]
    fn uncoupled_2d_is_kronecker_product() {
        let space = BipartiteSpace::symmetric(4).unwrap();
        let spec = CoupledMapSpec::new(CatMapSpec::hyperbolic(0.25), CatMapSpec::elliptic(0.25), 0.0);
        let dense = quantum_propagator_2d(&spec, &space).unwrap().to_dense();
        let u1 = quantum_propagator_1d(&spec.map1, &space.first).unwrap();
        let u2 = quantum_propagator_1d(&spec.map2, &space.second).unwrap();
        for j1 in 0..4 {
            for j2 in 0..4 {
                for k1 in 0..4 {
                    for k2 in 0..4 {
                        let kron = u1.matrix()[[j1, k1]] * u2.matrix()[[j2, k2]];
                        assert!((dense[[j1 * 4 + j2, k1 * 4 + k2]] - kron).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn coupling_is_a_left_diagonal_factor() {
        let space = BipartiteSpace::symmetric(8).unwrap();
        let spec = CoupledMapSpec::new(CatMapSpec::hyperbolic(0.25), CatMapSpec::hyperbolic(0.25), 0.5);
        let prop = quantum_propagator_2d(&spec, &space).unwrap();
        let uncoupled = quantum_propagator_2d(&CoupledMapSpec { kc: 0.0, ..spec }, &space).unwrap();
        let c = coupling_matrix(&spec, &space);
        for (j1, j2) in [(0, 0), (3, 5), (7, 1)] {
            let row = dense_row(&prop, j1, j2);
            let bare = dense_row(&uncoupled, j1, j2);
            for (a, b) in row.iter().zip(bare.iter()) {
                assert!((a - b * c[[j1, j2]]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn structured_unitarity_matches_dense() {
        let space = BipartiteSpace::symmetric(16).unwrap();
        let spec = CoupledMapSpec::new(CatMapSpec::hyperbolic(0.25), CatMapSpec::hyperbolic(0.25), 0.5);
        let prop = quantum_propagator_2d(&spec, &space).unwrap();
        let dense = unitarity_residual(&prop.to_dense());
        let structured = prop.unitarity_residual();
        assert!(dense < 1e-12 && structured < 1e-12, "{dense} {structured}");
        assert!((dense - structured).abs() < 1e-13);
    }

    #[test]
    fn factored_apply_matches_dense_product() {
        let space = BipartiteSpace::symmetric(4).unwrap();
        let spec = CoupledMapSpec::new(CatMapSpec::hyperbolic(0.25), CatMapSpec::elliptic(0.25), 0.5);
        let prop = quantum_propagator_2d(&spec, &space).unwrap();
        let t = TorusSpace::new(4).unwrap();
        let psi = crate::torus::product_state(
            &crate::torus::coherent_state(&t, 0.3, 0.6),
            &crate::torus::coherent_state(&t, 0.8, 0.1),
        )
        .unwrap();
        let dense = prop.to_dense();
        let want = dense.dot(psi.amplitudes());
        let got = prop.apply(&psi).unwrap();
        for (a, b) in want.iter().zip(got.amplitudes().iter()) {
            assert!((a - b).norm() < 1e-14);
        }
        let back = prop.apply_adjoint(&got).unwrap();
        for (a, b) in back.amplitudes().iter().zip(psi.amplitudes().iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn mismatched_factors_are_rejected() {
        let space = BipartiteSpace::new(TorusSpace::new(4).unwrap(), TorusSpace::new(8).unwrap());
        let spec = CoupledMapSpec::new(CatMapSpec::hyperbolic(0.25), CatMapSpec::hyperbolic(0.25), 0.5);
        assert!(matches!(
            quantum_propagator_2d(&spec, &space),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn construction_is_deterministic() {
        let space = BipartiteSpace::symmetric(16).unwrap();
        let spec = CoupledMapSpec::new(CatMapSpec::hyperbolic(0.25), CatMapSpec::elliptic(0.25), 0.5);
        let a = quantum_propagator_2d(&spec, &space).unwrap();
        let b = quantum_propagator_2d(&spec, &space).unwrap();
        assert_eq!(a, b);
    }
}
