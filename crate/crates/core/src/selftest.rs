//! Numerical audit of self-testing identities on explicit strategies.
//!
//! Everything here is exact linear algebra on the strategy's joint state:
//! expectation deviations on the setting family, anticommutator and
//! D-observable residuals, the stabilizer derivation chain, and swap
//! extraction of one logical qubit per prover onto fresh ancillas.

use std::f64::consts::FRAC_1_SQRT_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ProtocolError, ProverError, QuantumError};
use crate::graph::{BitVector, Graph, Triangle};
use crate::protocol::{build_settings, FamilyTag, MeasurementSetting};
use crate::provers::{ProverStrategy, QuerySymbol, StrategyKind};
use crate::quantum::{self, c, PureState, Sign, C64, DEFAULT_DIMENSION_CAP};

/// Default audit tolerance for exact computations.
pub const AUDIT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingDeviation {
    pub index: usize,
    pub family: FamilyTag,
    pub measured: f64,
    pub honest: f64,
    pub deviation: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexResiduals {
    pub vertex: usize,
    pub anticommutation: f64,
    pub d_plus: f64,
    pub d_minus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DerivationOutcome {
    Residual { residual: f64 },
    Inconclusive { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleDerivation {
    pub triangle: Triangle,
    pub outcome: DerivationOutcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalAction {
    pub vertex: usize,
    pub x_fidelity: f64,
    pub z_fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExtractionOutcome {
    Extracted { fidelity: f64 },
    Inapplicable { reason: String },
}

/// Full audit of one strategy on one graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub n: usize,
    pub strategy: StrategyKind,
    pub tolerance: f64,
    pub settings: Vec<SettingDeviation>,
    pub max_deviation: f64,
    pub vertices: Vec<VertexResiduals>,
    pub derivations: Vec<TriangleDerivation>,
    pub extraction: ExtractionOutcome,
    pub logical_action: Vec<LogicalAction>,
    pub passed: bool,
}

impl AuditReport {
    pub fn is_applicable(&self) -> bool {
        matches!(self.extraction, ExtractionOutcome::Extracted { .. })
    }

    pub fn fidelity(&self) -> Option<f64> {
        match self.extraction {
            ExtractionOutcome::Extracted { fidelity } => Some(fidelity),
            ExtractionOutcome::Inapplicable { .. } => None,
        }
    }

    pub fn max_anticommutation(&self) -> f64 {
        self.vertices.iter().map(|r| r.anticommutation).fold(0.0, f64::max)
    }

    pub fn max_d_residual(&self) -> f64 {
        self.vertices.iter().map(|r| r.d_plus.max(r.d_minus)).fold(0.0, f64::max)
    }

    /// Largest conclusive derivation residual, `None` if all are inconclusive.
    pub fn max_derivation(&self) -> Option<f64> {
        self.derivations
            .iter()
            .filter_map(|d| match d.outcome {
                DerivationOutcome::Residual { residual } => Some(residual),
                DerivationOutcome::Inconclusive { .. } => None,
            })
            .reduce(f64::max)
    }
}

/// `|exact − honest|` for every setting, plus the maximum.
pub fn audit_expectations(
    strategy: &ProverStrategy,
    settings: &[MeasurementSetting],
) -> Result<(Vec<SettingDeviation>, f64), ProverError> {
    let rows: Vec<SettingDeviation> = settings
        .par_iter()
        .enumerate()
        .map(|(index, s)| {
            let measured = strategy.exact_expectation(s.symbols(), s.sign)?;
            Ok(SettingDeviation {
                index,
                family: s.family,
                measured,
                honest: s.honest_expectation,
                deviation: (measured - s.honest_expectation).abs(),
            })
        })
        .collect::<Result<_, ProverError>>()?;
    let max = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok((rows, max))
}

fn apply_symbol(
    strategy: &ProverStrategy,
    state: &PureState,
    v: usize,
    symbol: QuerySymbol,
) -> Result<PureState, ProverError> {
    match strategy.observable(v, symbol)? {
        Some(o) => Ok(state.apply(v, o.matrix())?),
        None => Ok(state.clone()),
    }
}

/// `‖Σ coeff_i · vec_i‖` over equally shaped vectors.
fn combination_norm(terms: &[(f64, &PureState)]) -> f64 {
    let len = terms[0].1.amplitudes().len();
    (0..len)
        .map(|i| {
            terms
                .iter()
                .map(|(k, s)| s.amplitudes()[i] * *k)
                .sum::<C64>()
                .norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// `‖(X′_v Z′_v + Z′_v X′_v)|ψ′⟩‖`.
pub fn check_anticommutation(strategy: &ProverStrategy, v: usize) -> Result<f64, ProverError> {
    let psi = strategy.state();
    let xz = apply_symbol(strategy, &apply_symbol(strategy, psi, v, QuerySymbol::Z)?, v, QuerySymbol::X)?;
    let zx = apply_symbol(strategy, &apply_symbol(strategy, psi, v, QuerySymbol::X)?, v, QuerySymbol::Z)?;
    Ok(combination_norm(&[(1.0, &xz), (1.0, &zx)]))
}

/// `‖(D′_± − (X′_v ± Z′_v)/√2)|ψ′⟩‖` for `+` and `−`.
pub fn check_d_observables(strategy: &ProverStrategy, v: usize) -> Result<(f64, f64), ProverError> {
    let psi = strategy.state();
    let x = apply_symbol(strategy, psi, v, QuerySymbol::X)?;
    let z = apply_symbol(strategy, psi, v, QuerySymbol::Z)?;
    let dp = apply_symbol(strategy, psi, v, QuerySymbol::Dplus)?;
    let dm = apply_symbol(strategy, psi, v, QuerySymbol::Dminus)?;
    let r = FRAC_1_SQRT_2;
    Ok((
        combination_norm(&[(1.0, &dp), (-r, &x), (-r, &z)]),
        combination_norm(&[(1.0, &dm), (-r, &x), (r, &z)]),
    ))
}

/// One local factor of an operator word.
pub type Letter = (usize, QuerySymbol);

/// `S′_v` as letters: `X′_v` then `Z′` on the neighbourhood.
pub fn generator_word(g: &Graph, v: usize) -> Vec<Letter> {
    let mut w = vec![(v, QuerySymbol::X)];
    w.extend(g.adjacency_row(v).support().map(|x| (x, QuerySymbol::Z)));
    w
}

/// `X′^τ Z′^{Aτ}` as letters (without its sign).
pub fn triangle_word(g: &Graph, tau: Triangle) -> Vec<Letter> {
    let t = BitVector::from_support(g.n(), tau);
    let mut w: Vec<Letter> = tau.iter().map(|&v| (v, QuerySymbol::X)).collect();
    w.extend(g.apply_adjacency(&t).support().map(|x| (x, QuerySymbol::Z)));
    w
}

/// `‖sign · W|ψ′⟩ − |ψ′⟩‖` where `W` is the product of `factors`, the last
/// factor acting first.
pub fn chain_residual(
    strategy: &ProverStrategy,
    factors: &[Vec<Letter>],
    sign: Sign,
) -> Result<f64, ProverError> {
    let psi = strategy.state();
    let mut phi = psi.clone();
    for word in factors.iter().rev() {
        for &(v, s) in word.iter().rev() {
            phi = apply_symbol(strategy, &phi, v, s)?;
        }
    }
    Ok(combination_norm(&[(sign.as_f64(), &phi), (-1.0, psi)]))
}

/// The chain `−X′^τ Z′^{Aτ} S′_u S′_v S′_w |ψ′⟩ = |ψ′⟩` for a cover triangle,
/// evaluated only when the strategy passes the four settings involved
/// exactly.
pub fn derive_anticommutation_from_stabilizers(
    g: &Graph,
    strategy: &ProverStrategy,
    tau: Triangle,
    tolerance: f64,
) -> Result<DerivationOutcome, ProtocolError> {
    let settings = build_settings(g)?;
    let involved = settings.iter().filter(|s| match s.family {
        FamilyTag::Generator { v } => tau.contains(&v),
        FamilyTag::Triangle { tau: t } => t == tau,
        _ => false,
    });
    let mut count = 0;
    for s in involved {
        count += 1;
        let e = strategy.exact_expectation(s.symbols(), s.sign)?;
        if (e - 1.0).abs() > tolerance {
            return Ok(DerivationOutcome::Inconclusive {
                reason: format!("setting `{s}` has expectation {e:.6}, not 1"),
            });
        }
    }
    if count != 4 {
        return Ok(DerivationOutcome::Inconclusive {
            reason: format!("{tau:?} is not a cover triangle"),
        });
    }
    let [u, v, w] = tau;
    let factors = [
        triangle_word(g, tau),
        generator_word(g, u),
        generator_word(g, v),
        generator_word(g, w),
    ];
    let residual = chain_residual(strategy, &factors, Sign::Minus)?;
    Ok(DerivationOutcome::Residual { residual })
}

/// Why swap extraction does not apply, if it does not.
pub fn extraction_precondition(strategy: &ProverStrategy) -> Option<String> {
    for v in 0..strategy.n() {
        for sym in [QuerySymbol::X, QuerySymbol::Z] {
            match strategy.observable(v, sym) {
                Ok(Some(o)) if !o.is_trivial() => {}
                _ => {
                    return Some(format!(
                        "{sym}′ of prover {v} has a single eigenvalue; no logical qubit to extract"
                    ))
                }
            }
        }
    }
    None
}

fn swap_out(
    strategy: &ProverStrategy,
    state: &PureState,
    cap: usize,
) -> Result<PureState, ProverError> {
    let n = strategy.n();
    let dim = state.dimension().saturating_mul(1usize.checked_shl(n as u32).unwrap_or(usize::MAX));
    if n >= usize::BITS as usize || dim > cap {
        return Err(QuantumError::DimensionCap { dim, cap }.into());
    }
    let h = quantum::hadamard();
    let mut joint = state.tensor(&PureState::basis(vec![2; n], 0)?);
    for v in 0..n {
        let a = n + v;
        let x = strategy.observable(v, QuerySymbol::X)?.expect("measured symbol");
        let z = strategy.observable(v, QuerySymbol::Z)?.expect("measured symbol");
        joint = joint.apply_controlled(a, x)?;
        joint.apply_in_place(a, &h)?;
        joint = joint.apply_controlled(a, z)?;
        joint.apply_in_place(a, &h)?;
        joint = joint.apply_controlled(a, x)?;
    }
    Ok(joint)
}

/// Result of swap extraction.
#[derive(Clone, Debug, PartialEq)]
pub struct Extraction {
    /// Ancilla register conditioned on the best junk state.
    pub extracted: PureState,
    /// `max_J |⟨J|⊗⟨G| Ψ⟩|²`.
    pub fidelity: f64,
    /// Joint prover-plus-ancilla state after the circuit.
    pub joint: PureState,
}

/// Ancilla-register state and fidelity with `|G⟩` after swapping every
/// prover's logical qubit onto a fresh ancilla.
pub fn extract_logical_state(g: &Graph, strategy: &ProverStrategy) -> Result<Extraction, ProtocolError> {
    extract_logical_state_capped(g, strategy, DEFAULT_DIMENSION_CAP)
}

pub fn extract_logical_state_capped(
    g: &Graph,
    strategy: &ProverStrategy,
    cap: usize,
) -> Result<Extraction, ProtocolError> {
    if let Some(reason) = extraction_precondition(strategy) {
        return Err(ProtocolError::Config(reason));
    }
    if g.n() != strategy.n() {
        return Err(ProtocolError::Config("graph and strategy sizes differ".into()));
    }
    let target = quantum::make_graph_state(g)?;
    let joint = swap_out(strategy, strategy.state(), cap)?;
    Ok(project_ancillas(joint, &target)?)
}

fn project_ancillas(joint: PureState, target: &PureState) -> Result<Extraction, QuantumError> {
    let m = target.dimension();
    let amps = joint.amplitudes();
    let junk_dim = amps.len() / m;
    let t = target.amplitudes();
    // (I ⊗ ⟨G|)Ψ, a vector on the junk register.
    let phi: Vec<C64> = (0..junk_dim)
        .map(|j| (0..m).map(|k| t[k].conj() * amps[j * m + k]).sum())
        .collect();
    let fidelity: f64 = phi.iter().map(|a| a.norm_sqr()).sum::<f64>().min(1.0);
    let junk: Vec<C64> = if fidelity > 1e-24 {
        let s = fidelity.sqrt();
        phi.iter().map(|a| a / s).collect()
    } else {
        // Any junk direction gives zero overlap; use the heaviest slice.
        let heaviest = (0..junk_dim)
            .max_by(|&a, &b| {
                let wa: f64 = (0..m).map(|k| amps[a * m + k].norm_sqr()).sum();
                let wb: f64 = (0..m).map(|k| amps[b * m + k].norm_sqr()).sum();
                wa.total_cmp(&wb)
            })
            .unwrap_or(0);
        (0..junk_dim).map(|j| c(if j == heaviest { 1.0 } else { 0.0 })).collect()
    };
    let conditioned: Vec<C64> = (0..m)
        .map(|k| (0..junk_dim).map(|j| junk[j].conj() * amps[j * m + k]).sum())
        .collect();
    let extracted = PureState::normalized(target.dims().to_vec(), conditioned)?;
    Ok(Extraction { extracted, fidelity, joint })
}

/// Overlaps `|⟨U P′_v ψ′ | P_{anc v} U ψ′⟩|²` for `P ∈ {X, Z}`, where `U` is
/// the swap circuit.
pub fn logical_action(strategy: &ProverStrategy, v: usize) -> Result<LogicalAction, ProtocolError> {
    let n = strategy.n();
    let after = swap_out(strategy, strategy.state(), DEFAULT_DIMENSION_CAP)?;
    let mut out = [0.0; 2];
    for (slot, (sym, pauli)) in
        [(QuerySymbol::X, quantum::pauli_x()), (QuerySymbol::Z, quantum::pauli_z())].into_iter().enumerate()
    {
        let before = apply_symbol(strategy, strategy.state(), v, sym)?;
        let lhs = swap_out(strategy, &before, DEFAULT_DIMENSION_CAP)?;
        let rhs = after.apply(n + v, &pauli)?;
        out[slot] = lhs.inner(&rhs)?.norm_sqr().min(1.0);
    }
    Ok(LogicalAction { vertex: v, x_fidelity: out[0], z_fidelity: out[1] })
}

/// Runs every check and decides pass/fail against `tolerance`.
pub fn audit(g: &Graph, strategy: &ProverStrategy, tolerance: f64) -> Result<AuditReport, ProtocolError> {
    let n = g.n();
    if strategy.n() != n {
        return Err(ProtocolError::Config(format!(
            "strategy has {} provers, graph has {n} vertices",
            strategy.n()
        )));
    }
    let settings = build_settings(g)?;
    let (rows, max_deviation) = audit_expectations(strategy, &settings)?;
    let vertices: Vec<VertexResiduals> = (0..n)
        .into_par_iter()
        .map(|v| {
            let (d_plus, d_minus) = check_d_observables(strategy, v)?;
            Ok(VertexResiduals { vertex: v, anticommutation: check_anticommutation(strategy, v)?, d_plus, d_minus })
        })
        .collect::<Result<_, ProverError>>()?;
    let derivations = g
        .triangle_cover()?
        .iter()
        .map(|&t| {
            Ok(TriangleDerivation {
                triangle: t,
                outcome: derive_anticommutation_from_stabilizers(g, strategy, t, tolerance)?,
            })
        })
        .collect::<Result<Vec<_>, ProtocolError>>()?;
    let (extraction, logical) = match extraction_precondition(strategy) {
        Some(reason) => (ExtractionOutcome::Inapplicable { reason }, Vec::new()),
        None => {
            let e = extract_logical_state(g, strategy)?;
            let logical = (0..n)
                .into_par_iter()
                .map(|v| logical_action(strategy, v))
                .collect::<Result<Vec<_>, _>>()?;
            (ExtractionOutcome::Extracted { fidelity: e.fidelity }, logical)
        }
    };
    let mut report = AuditReport {
        n,
        strategy: strategy.kind().clone(),
        tolerance,
        settings: rows,
        max_deviation,
        vertices,
        derivations,
        extraction,
        logical_action: logical,
        passed: false,
    };
    report.passed = report.is_applicable()
        && report.max_deviation <= tolerance
        && report.max_anticommutation() <= tolerance
        && report.max_d_residual() <= tolerance
        && report
            .derivations
            .iter()
            .all(|d| matches!(d.outcome, DerivationOutcome::Residual { residual } if residual <= tolerance))
        && report.fidelity().is_some_and(|f| f >= 1.0 - tolerance)
        && report
            .logical_action
            .iter()
            .all(|l| l.x_fidelity >= 1.0 - tolerance && l.z_fidelity >= 1.0 - tolerance);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_triangular_lattice;
    use crate::provers::{classical_strategy, honest_strategy, perturbed_strategy, ClassicalAssignment};

    fn k3() -> Graph {
        Graph::complete(3)
    }

    #[test]
    fn honest_audit_passes() {
        for g in [k3(), build_triangular_lattice(2, 3).unwrap()] {
            let r = audit(&g, &honest_strategy(&g).unwrap(), AUDIT_TOL).unwrap();
            assert!(r.passed, "{r:?}");
            assert!(r.max_deviation < 1e-10);
            assert!(r.max_anticommutation() < 1e-10);
            assert!(r.max_d_residual() < 1e-10);
            assert!(r.max_derivation().unwrap() < 1e-10);
            assert!(r.fidelity().unwrap() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn perturbed_anticommutation_is_two_sin_theta() {
        let g = k3();
        for theta in [0.05, 0.1, 0.3] {
            let s = perturbed_strategy(&g, theta).unwrap();
            let r = check_anticommutation(&s, 1).unwrap();
            assert!((r - 2.0 * f64::sin(theta)).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbed_d_residual_closed_form() {
        // ‖((1−cosθ)X − sinθ Z)/√2 ψ‖ with ⟨XZ + ZX⟩ = 0 on the graph state.
        let g = k3();
        let theta: f64 = 0.2;
        let s = perturbed_strategy(&g, theta).unwrap();
        let (p, m) = check_d_observables(&s, 0).unwrap();
        let want = (((1.0 - theta.cos()).powi(2) + theta.sin().powi(2)) / 2.0).sqrt();
        assert!((p - want).abs() < 1e-12);
        assert!((m - want).abs() < 1e-12);
    }

    #[test]
    fn equal_x_and_z_gives_residual_two() {
        let g = k3();
        let s = honest_strategy(&g)
            .unwrap()
            .with_observable(2, QuerySymbol::Z, quantum::pauli_x())
            .unwrap();
        assert!((check_anticommutation(&s, 2).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn d_plus_equal_x_residual() {
        // ‖(X − (X+Z)/√2)ψ‖² = 2 − √2 since ⟨ZX⟩ = 0 and X² = Z² = I.
        let g = k3();
        let s = honest_strategy(&g)
            .unwrap()
            .with_observable(0, QuerySymbol::Dplus, quantum::pauli_x())
            .unwrap();
        let (p, m) = check_d_observables(&s, 0).unwrap();
        assert!((p - (2.0 - 2f64.sqrt()).sqrt()).abs() < 1e-12);
        assert!(m < 1e-12);
    }

    #[test]
    fn broken_chain_has_residual() {
        let g = k3();
        let s = honest_strategy(&g).unwrap();
        let tau = [0, 1, 2];
        let full = [triangle_word(&g, tau), generator_word(&g, 0), generator_word(&g, 1), generator_word(&g, 2)];
        assert!(chain_residual(&s, &full, Sign::Minus).unwrap() < 1e-12);
        let mut broken = full.clone();
        broken[3][0].1 = QuerySymbol::Identity;
        let r = chain_residual(&s, &broken, Sign::Minus).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12, "{r}");
    }

    #[test]
    fn failing_strategy_is_inconclusive() {
        let g = k3();
        let s = perturbed_strategy(&g, 0.3).unwrap();
        let out = derive_anticommutation_from_stabilizers(&g, &s, [0, 1, 2], AUDIT_TOL).unwrap();
        assert!(matches!(out, DerivationOutcome::Inconclusive { .. }));
    }

    #[test]
    fn classical_is_inapplicable() {
        let g = k3();
        let s = classical_strategy(ClassicalAssignment::constant(3, Sign::Plus));
        assert!(extraction_precondition(&s).is_some());
        assert!(extract_logical_state(&g, &s).is_err());
        let r = audit(&g, &s, AUDIT_TOL).unwrap();
        assert!(!r.is_applicable());
        assert!(!r.passed);
        assert!(r.settings.iter().any(|d| (d.deviation - 2.0).abs() < 1e-12));
    }

    #[test]
    fn perturbed_fidelity_decreases() {
        let g = k3();
        let f = |t| extract_logical_state(&g, &perturbed_strategy(&g, t).unwrap()).unwrap().fidelity;
        let (a, b) = (f(0.1), f(0.2));
        assert!(b < a && a < 1.0);
        let r = audit(&g, &perturbed_strategy(&g, 0.3).unwrap(), AUDIT_TOL).unwrap();
        assert!(r.max_deviation > 0.01);
        assert!(!r.passed);
    }

    #[test]
    fn honest_extraction_returns_graph_state() {
        let g = k3();
        let e = extract_logical_state(&g, &honest_strategy(&g).unwrap()).unwrap();
        let target = quantum::make_graph_state(&g).unwrap();
        assert!(quantum::fidelity(&e.extracted, &target).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn logical_action_consistent() {
        let g = build_triangular_lattice(2, 2).unwrap();
        let s = honest_strategy(&g).unwrap();
        for v in 0..g.n() {
            let l = logical_action(&s, v).unwrap();
            assert!(l.x_fidelity > 1.0 - 1e-9 && l.z_fidelity > 1.0 - 1e-9);
        }
    }

    #[test]
    fn dimension_cap_enforced() {
        let g = k3();
        let s = honest_strategy(&g).unwrap();
        assert!(matches!(
            extract_logical_state_capped(&g, &s, 32),
            Err(ProtocolError::Prover(ProverError::Quantum(QuantumError::DimensionCap { .. })))
        ));
    }
}
