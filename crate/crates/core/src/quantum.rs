//! Dense pure-state simulation over a tensor product of finite-dimensional
//! local spaces.
//!
//! Amplitudes are stored with site 0 as the most significant index. Local
//! operators are small dense complex matrices; all operations return new
//! states so states can be shared freely between trials.

use std::fmt;
use std::ops::{Mul, Neg};

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::QuantumError;
use crate::graph::Graph;

pub type C64 = Complex<f64>;
pub type Matrix = DMatrix<C64>;

/// Tolerance for algebraic invariants (norms, involutions, unitarity).
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance for physical expectations.
pub const EXPECTATION_TOL: f64 = 1e-10;
/// Default qubit cap for graph-state preparation.
pub const DEFAULT_QUBIT_CAP: usize = 20;
/// Default cap on the total Hilbert-space dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 1 << 20;

const EMPTY_BRANCH_TOL: f64 = 1e-14;

/// A ±1 value: measurement outcomes, setting signs, combined outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }

    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }

    pub fn from_bool_minus(minus: bool) -> Self {
        if minus {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    /// Product of a sequence of signs.
    pub fn product<I: IntoIterator<Item = Sign>>(iter: I) -> Sign {
        iter.into_iter().fold(Sign::Plus, |a, b| a * b)
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        s.value()
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;
    fn try_from(v: i8) -> Result<Self, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("expected +1 or -1, got {other}")),
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_bool_minus(self != rhs)
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        self * Sign::Minus
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> Matrix {
    Matrix::identity(d, d)
}

pub fn pauli_x() -> Matrix {
    Matrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn pauli_z() -> Matrix {
    Matrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

pub fn hadamard() -> Matrix {
    (pauli_x() + pauli_z()) * c(std::f64::consts::FRAC_1_SQRT_2)
}

/// `(X + Z)/√2`.
pub fn d_plus() -> Matrix {
    hadamard()
}

/// `(X − Z)/√2`.
pub fn d_minus() -> Matrix {
    (pauli_x() - pauli_z()) * c(std::f64::consts::FRAC_1_SQRT_2)
}

/// `cos θ·X + sin θ·Z`: X rotated by `theta` in the X–Z plane.
pub fn rotated_x(theta: f64) -> Matrix {
    pauli_x() * c(theta.cos()) + pauli_z() * c(theta.sin())
}

fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-entry residual of `m` against being a Hermitian involution.
pub fn involution_residual(m: &Matrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let herm = max_abs(&(m - m.adjoint()));
    let square = max_abs(&(m * m - identity(m.nrows())));
    herm.max(square)
}

/// Nearest Hermitian involution to `m` (sign of the Hermitian part's
/// eigenvalues). Zero eigenvalues map to +1.
pub fn nearest_involution(m: &Matrix) -> Matrix {
    let h = (m + m.adjoint()) * c(0.5);
    let eig = h.symmetric_eigen();
    let signs = eig.eigenvalues.map(|l| if l < 0.0 { c(-1.0) } else { c(1.0) });
    let v = &eig.eigenvectors;
    v * Matrix::from_diagonal(&signs) * v.adjoint()
}

/// A ±1-valued observable acting on one site.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalObservable {
    site: usize,
    matrix: Matrix,
}

impl LocalObservable {
    pub fn new(site: usize, matrix: Matrix) -> Result<Self, QuantumError> {
        let r = involution_residual(&matrix);
        if r > ALGEBRAIC_TOL {
            return Err(QuantumError::NotAnInvolution(r));
        }
        Ok(Self { site, matrix })
    }

    pub fn site(&self) -> usize {
        self.site
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Whether the observable is `±I`, i.e. has only one eigenvalue.
    pub fn is_trivial(&self) -> bool {
        let tr = self.matrix.trace().re;
        (tr.abs() - self.dim() as f64).abs() < 1e-9
    }

    fn projector(&self, outcome: Sign) -> Matrix {
        (identity(self.dim()) + &self.matrix * c(outcome.as_f64())) * c(0.5)
    }
}

/// A signed tensor product of local observables; absent sites act as identity.
#[derive(Clone, Debug, PartialEq)]
pub struct SettingOperator {
    pub factors: Vec<LocalObservable>,
    pub sign: Sign,
}

impl SettingOperator {
    pub fn new(factors: Vec<LocalObservable>, sign: Sign) -> Result<Self, QuantumError> {
        let mut sites: Vec<usize> = factors.iter().map(|f| f.site).collect();
        sites.sort_unstable();
        if sites.windows(2).any(|w| w[0] == w[1]) {
            return Err(QuantumError::DimensionMismatch(
                "at most one factor per site".into(),
            ));
        }
        Ok(Self { factors, sign })
    }
}

/// Normalised pure state on `∏ d_v` amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

impl PureState {
    /// Validates length and normalisation (within 1e−12).
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self, QuantumError> {
        let total: usize = dims.iter().product();
        if amps.len() != total || dims.contains(&0) {
            return Err(QuantumError::DimensionMismatch(format!(
                "{} amplitudes for local dimensions {:?}",
                amps.len(),
                dims
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(Self { dims, amps })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(dims: Vec<usize>, mut amps: Vec<C64>) -> Result<Self, QuantumError> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < EMPTY_BRANCH_TOL {
            return Err(QuantumError::EmptyBranch(norm));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Self::new(dims, amps)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self, QuantumError> {
        let total: usize = dims.iter().product();
        if index >= total {
            return Err(QuantumError::DimensionMismatch(format!(
                "basis index {index} >= dimension {total}"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); total];
        amps[index] = c(1.0);
        Self::new(dims, amps)
    }

    /// Single-qubit state from two amplitudes.
    pub fn qubit(a0: C64, a1: C64) -> Result<Self, QuantumError> {
        Self::normalized(vec![2], vec![a0, a1])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn dimension(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `self ⊗ other`, with `other`'s sites appended after ours.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        PureState { dims, amps }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64, QuantumError> {
        self.check_same_shape(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `‖self − other‖` between (possibly unnormalised) vectors.
    pub fn distance(&self, other: &PureState) -> Result<f64, QuantumError> {
        self.check_same_shape(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    fn check_same_shape(&self, other: &PureState) -> Result<(), QuantumError> {
        if self.dims != other.dims {
            return Err(QuantumError::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    fn check_site(&self, site: usize, dim: usize) -> Result<(), QuantumError> {
        if site >= self.dims.len() {
            return Err(QuantumError::SiteOutOfRange { site, sites: self.dims.len() });
        }
        if self.dims[site] != dim {
            return Err(QuantumError::DimensionMismatch(format!(
                "operator of dimension {dim} on site {site} of dimension {}",
                self.dims[site]
            )));
        }
        Ok(())
    }

    fn stride(&self, site: usize) -> usize {
        self.dims[site + 1..].iter().product()
    }

    /// Applies an arbitrary local matrix; the result need not be normalised.
    pub fn apply(&self, site: usize, m: &Matrix) -> Result<PureState, QuantumError> {
        let mut out = self.clone();
        out.apply_in_place(site, m)?;
        Ok(out)
    }

    pub fn apply_in_place(&mut self, site: usize, m: &Matrix) -> Result<(), QuantumError> {
        self.check_site(site, m.nrows())?;
        if !m.is_square() {
            return Err(QuantumError::DimensionMismatch("non-square operator".into()));
        }
        self.apply_masked(site, m, |_| true);
        Ok(())
    }

    /// Applies `m` on `site` for every block whose base index satisfies `keep`.
    fn apply_masked(&mut self, site: usize, m: &Matrix, keep: impl Fn(usize) -> bool) {
        let d = self.dims[site];
        let stride = self.stride(site);
        let block = d * stride;
        let mut buf = vec![C64::new(0.0, 0.0); d];
        for outer in (0..self.amps.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                if !keep(base) {
                    continue;
                }
                for (k, b) in buf.iter_mut().enumerate() {
                    *b = self.amps[base + k * stride];
                }
                for r in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for (col, b) in buf.iter().enumerate() {
                        acc += m[(r, col)] * b;
                    }
                    self.amps[base + r * stride] = acc;
                }
            }
        }
    }

    /// Applies `obs` on its site conditioned on `control` being `|1⟩`.
    pub fn apply_controlled(
        &self,
        control: usize,
        obs: &LocalObservable,
    ) -> Result<PureState, QuantumError> {
        if control >= self.dims.len() {
            return Err(QuantumError::SiteOutOfRange { site: control, sites: self.dims.len() });
        }
        if self.dims[control] != 2 {
            return Err(QuantumError::ControlDimension(self.dims[control]));
        }
        if control == obs.site {
            return Err(QuantumError::DimensionMismatch(
                "control and target must differ".into(),
            ));
        }
        self.check_site(obs.site, obs.dim())?;
        let cstride = self.stride(control);
        let mut out = self.clone();
        out.apply_masked(obs.site, &obs.matrix, |idx| (idx / cstride) % 2 == 1);
        Ok(out)
    }

    /// Applies each factor of `op` (without its sign).
    fn apply_factors(&self, op: &SettingOperator) -> Result<PureState, QuantumError> {
        let mut out = self.clone();
        for f in &op.factors {
            out.apply_in_place(f.site, &f.matrix)?;
        }
        Ok(out)
    }

    /// `sign · ⟨ψ| ⊗ factors |ψ⟩`.
    pub fn expectation(&self, op: &SettingOperator) -> Result<f64, QuantumError> {
        let phi = self.apply_factors(op)?;
        let z = self.inner(&phi)?;
        if z.im.abs() > EXPECTATION_TOL {
            return Err(QuantumError::ImaginaryExpectation(z.im));
        }
        Ok(op.sign.as_f64() * z.re)
    }

    /// Probability of outcome +1 when measuring `obs`.
    pub fn outcome_probability(&self, obs: &LocalObservable) -> Result<f64, QuantumError> {
        self.check_site(obs.site, obs.dim())?;
        let p = self.apply(obs.site, &obs.projector(Sign::Plus))?.norm_sqr();
        Ok(p.clamp(0.0, 1.0))
    }

    /// Projects onto the `outcome` eigenspace of `obs`; returns the branch
    /// probability and the normalised post-measurement state.
    pub fn project(
        &self,
        obs: &LocalObservable,
        outcome: Sign,
    ) -> Result<(f64, PureState), QuantumError> {
        self.check_site(obs.site, obs.dim())?;
        let projected = self.apply(obs.site, &obs.projector(outcome))?;
        let p = projected.norm_sqr();
        if p.sqrt() < EMPTY_BRANCH_TOL {
            return Err(QuantumError::EmptyBranch(p.sqrt()));
        }
        let scale = 1.0 / p.sqrt();
        let amps = projected.amps.into_iter().map(|a| a * scale).collect();
        Ok((p, PureState { dims: projected.dims, amps }))
    }

    /// Projective measurement of `obs` with collapse.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        obs: &LocalObservable,
        rng: &mut R,
    ) -> Result<(Sign, PureState), QuantumError> {
        let p_plus = self.outcome_probability(obs)?;
        let outcome = if rng.gen::<f64>() < p_plus { Sign::Plus } else { Sign::Minus };
        let (_, collapsed) = self.project(obs, outcome)?;
        Ok((outcome, collapsed))
    }
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64, QuantumError> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Graph state `|G⟩` with the default qubit cap.
pub fn make_graph_state(g: &Graph) -> Result<PureState, QuantumError> {
    make_graph_state_capped(g, DEFAULT_QUBIT_CAP)
}

/// Graph state with amplitude `2^{−n/2}(−1)^{x·Ax/2}` on basis string `x`.
pub fn make_graph_state_capped(g: &Graph, cap: usize) -> Result<PureState, QuantumError> {
    let n = g.n();
    if n > cap {
        return Err(QuantumError::QubitCap { qubits: n, cap });
    }
    let amp = (0.5f64).powf(n as f64 / 2.0);
    // Vertex v is bit n-1-v of the basis index (site 0 most significant).
    let masks: Vec<(usize, usize)> = g
        .edges()
        .map(|(a, b)| (1usize << (n - 1 - a), 1usize << (n - 1 - b)))
        .collect();
    let amps = (0..1usize << n)
        .map(|x| {
            let internal = masks
                .iter()
                .filter(|&&(ma, mb)| x & ma != 0 && x & mb != 0)
                .count();
            c(if internal % 2 == 0 { amp } else { -amp })
        })
        .collect();
    PureState::new(vec![2; n], amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn obs(site: usize, m: Matrix) -> LocalObservable {
        LocalObservable::new(site, m).unwrap()
    }

    fn real_amps(s: &PureState) -> Vec<f64> {
        s.amplitudes().iter().map(|a| a.re).collect()
    }

    fn stabilizer_op(g: &Graph, v: usize) -> SettingOperator {
        let mut f = vec![obs(v, pauli_x())];
        f.extend(g.adjacency_row(v).support().map(|u| obs(u, pauli_z())));
        SettingOperator::new(f, Sign::Plus).unwrap()
    }

    #[test]
    fn graph_state_single_edge() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let s = make_graph_state(&g).unwrap();
        assert_eq!(real_amps(&s), vec![0.5, 0.5, 0.5, -0.5]);
    }

    #[test]
    fn graph_state_k3() {
        let s = make_graph_state(&Graph::complete(3)).unwrap();
        let a = (0.5f64).powf(1.5);
        let expected = [a, a, a, -a, a, -a, -a, -a];
        for (x, e) in real_amps(&s).iter().zip(expected) {
            assert!((x - e).abs() < 1e-15);
        }
    }

    #[test]
    fn graph_state_empty_graph_is_plus_plus() {
        let g = Graph::from_edges(2, &[]).unwrap();
        let s = make_graph_state(&g).unwrap();
        assert_eq!(real_amps(&s), vec![0.5; 4]);
    }

    #[test]
    fn graph_state_cap() {
        let g = Graph::from_edges(5, &[]).unwrap();
        assert!(matches!(
            make_graph_state_capped(&g, 4),
            Err(QuantumError::QubitCap { qubits: 5, cap: 4 })
        ));
    }

    #[test]
    fn stabilizer_expectations_on_k3() {
        let g = Graph::complete(3);
        let s = make_graph_state(&g).unwrap();
        for v in 0..3 {
            assert!((s.expectation(&stabilizer_op(&g, v)).unwrap() - 1.0).abs() < EXPECTATION_TOL);
        }
        // (X+Z)/√2 on v with Z on N(v)
        let mut f = vec![obs(0, d_plus())];
        f.extend([1, 2].map(|u| obs(u, pauli_z())));
        let e = s.expectation(&SettingOperator::new(f, Sign::Plus).unwrap()).unwrap();
        assert!((e - std::f64::consts::FRAC_1_SQRT_2).abs() < EXPECTATION_TOL);
    }

    #[test]
    fn zx_expectation_vanishes() {
        let s = make_graph_state(&Graph::complete(3)).unwrap();
        let zx = s.apply(0, &pauli_x()).unwrap().apply(0, &pauli_z()).unwrap();
        assert!(s.inner(&zx).unwrap().norm() < EXPECTATION_TOL);
    }

    #[test]
    fn non_involutions_rejected() {
        let s = PureState::qubit(c(1.0), C64::new(0.0, 1.0)).unwrap();
        let y = Matrix::from_row_slice(2, 2, &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)]);
        let op = SettingOperator::new(vec![obs(0, y)], Sign::Plus).unwrap();
        assert!((s.expectation(&op).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            LocalObservable::new(0, pauli_x() * pauli_z()),
            Err(QuantumError::NotAnInvolution(_))
        ));
        assert!(LocalObservable::new(0, pauli_x() * c(2.0)).is_err());
        let dup = SettingOperator::new(vec![obs(0, pauli_x()), obs(0, pauli_z())], Sign::Plus);
        assert!(dup.is_err());
    }

    #[test]
    fn measure_eigenstate() {
        let plus = PureState::qubit(c(1.0), c(1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let (o, post) = plus.measure(&obs(0, pauli_x()), &mut rng).unwrap();
            assert_eq!(o, Sign::Plus);
            assert!(fidelity(&post, &plus).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn measure_unbiased() {
        let zero = PureState::basis(vec![2], 0).unwrap();
        assert!((zero.outcome_probability(&obs(0, pauli_x())).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            zero.project(&obs(0, pauli_z()), Sign::Minus),
            Err(QuantumError::EmptyBranch(_))
        ));
    }

    #[test]
    fn sequential_x_on_k3_multiplies_to_minus_one() {
        let s = make_graph_state(&Graph::complete(3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let mut st = s.clone();
            let mut prod = Sign::Plus;
            for v in 0..3 {
                let (o, next) = st.measure(&obs(v, pauli_x()), &mut rng).unwrap();
                prod = prod * o;
                st = next;
            }
            assert_eq!(prod, Sign::Minus);
        }
    }

    #[test]
    fn controlled_examples() {
        let x = obs(1, pauli_x());
        // control |0⟩
        let s = PureState::basis(vec![2, 2], 0b00).unwrap();
        assert_eq!(s.apply_controlled(0, &x).unwrap(), s);
        // control |1⟩ ⊗ |0⟩ → |1⟩ ⊗ |1⟩
        let s = PureState::basis(vec![2, 2], 0b10).unwrap();
        assert_eq!(s.apply_controlled(0, &x).unwrap(), PureState::basis(vec![2, 2], 0b11).unwrap());
        // phase kickback: |+⟩ ⊗ |−⟩ under controlled-X → |−⟩ ⊗ |−⟩
        let plus = PureState::qubit(c(1.0), c(1.0)).unwrap();
        let minus = PureState::qubit(c(1.0), c(-1.0)).unwrap();
        let out = plus.tensor(&minus).apply_controlled(0, &x).unwrap();
        assert!(fidelity(&out, &minus.tensor(&minus)).unwrap() > 1.0 - 1e-12);
        // control must be a qubit
        let s = PureState::basis(vec![3, 2], 0).unwrap();
        assert!(matches!(s.apply_controlled(0, &x), Err(QuantumError::ControlDimension(3))));
    }

    #[test]
    fn fidelity_examples() {
        let zero = PureState::basis(vec![2], 0).unwrap();
        let one = PureState::basis(vec![2], 1).unwrap();
        let plus = PureState::qubit(c(1.0), c(1.0)).unwrap();
        assert!((fidelity(&plus, &plus).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-12);
        assert!(fidelity(&zero, &PureState::basis(vec![3], 0).unwrap()).is_err());
    }

    #[test]
    fn nearest_involution_polishes() {
        let r = std::f64::consts::FRAC_1_SQRT_2 + 3e-6;
        let rough = Matrix::from_row_slice(2, 2, &[c(r), c(r), c(r), c(-r)]);
        assert!(involution_residual(&rough) > ALGEBRAIC_TOL);
        let polished = nearest_involution(&rough);
        assert!(involution_residual(&polished) < ALGEBRAIC_TOL);
        assert!(max_abs(&(polished - d_plus())) < 1e-4);
    }

    #[test]
    fn higher_dimensional_sites() {
        // qutrit ⊗ qubit, observable diag(1, -1, 1) on the qutrit
        let m = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(-1.0), c(1.0)]));
        let o = obs(0, m);
        let s = PureState::normalized(vec![3, 2], vec![c(1.0); 6]).unwrap();
        assert!((s.outcome_probability(&o).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(!o.is_trivial());
        assert!(obs(0, identity(3)).is_trivial());
    }
}
