//! Adaptive measurement patterns: the classical program of a CALCULATE run.
//!
//! A pattern fixes a vertex order, a basis rule per vertex and a result rule.
//! Basis rules are either a constant symbol or a choice between two symbols
//! by the parity of earlier outcomes; the result is the parity of a set of
//! outcomes compared against a target. Parities are enough for the Pauli
//! byproduct bookkeeping of measurement-based computation.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::PatternError;
use crate::graph::{BitVector, Graph};
use crate::provers::{ProverSession, ProverStrategy, QueryEvent, QuerySymbol};
use crate::quantum::{PureState, Sign};

/// Largest vertex count for which [`exact_acceptance`] enumerates branches.
pub const EXACT_ENUMERATION_CAP: usize = 14;

/// How the basis for one vertex is chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasisRule {
    Fixed(QuerySymbol),
    /// `even` if the product of the listed outcomes is +1, else `odd`.
    Parity {
        of: Vec<usize>,
        even: QuerySymbol,
        odd: QuerySymbol,
    },
}

impl BasisRule {
    fn dependencies(&self) -> &[usize] {
        match self {
            BasisRule::Fixed(_) => &[],
            BasisRule::Parity { of, .. } => of,
        }
    }
}

/// ACCEPT iff the product of the listed outcomes equals `target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRule {
    pub parity: Vec<usize>,
    pub target: Sign,
}

impl ResultRule {
    pub fn evaluate(&self, outcomes: &[Sign]) -> bool {
        Sign::product(self.parity.iter().map(|&v| outcomes[v])) == self.target
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementPattern {
    name: String,
    order: Vec<usize>,
    basis: Vec<BasisRule>,
    result: ResultRule,
}

/// Outcome of executing a pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    /// Outcome per vertex index.
    pub outcomes: Vec<Sign>,
    pub transcript: Vec<QueryEvent>,
    pub accepted: bool,
}

/// Problems found by [`validate_pattern`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Diagnostic {
    MissingVertex(usize),
    DuplicateVertex(usize),
    VertexOutOfRange(usize),
    BasisCount { expected: usize, found: usize },
    IdentityBasis { vertex: usize, prefix: Vec<(usize, i8)> },
    DependsOnLater { vertex: usize, dependency: usize },
    ResultVertexOutOfRange(usize),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::MissingVertex(v) => write!(f, "vertex {v} missing from order"),
            Diagnostic::DuplicateVertex(v) => write!(f, "vertex {v} appears twice in order"),
            Diagnostic::VertexOutOfRange(v) => write!(f, "vertex {v} out of range"),
            Diagnostic::BasisCount { expected, found } => {
                write!(f, "{found} basis rules for {expected} vertices")
            }
            Diagnostic::IdentityBasis { vertex, prefix } => {
                write!(f, "vertex {vertex} gets Identity after prefix {prefix:?}")
            }
            Diagnostic::DependsOnLater { vertex, dependency } => {
                write!(f, "vertex {vertex} depends on {dependency}, which is measured later")
            }
            Diagnostic::ResultVertexOutOfRange(v) => write!(f, "result uses unknown vertex {v}"),
        }
    }
}

impl MeasurementPattern {
    /// Builds a pattern; structural problems are reported by
    /// [`validate_pattern`], not here.
    pub fn new(
        name: impl Into<String>,
        order: Vec<usize>,
        basis: Vec<BasisRule>,
        result: ResultRule,
    ) -> Self {
        Self { name: name.into(), order, basis, result }
    }

    /// Every vertex in natural order measured with the same symbol.
    pub fn uniform(name: &str, n: usize, symbol: QuerySymbol, result: ResultRule) -> Self {
        Self::new(name, (0..n).collect(), vec![BasisRule::Fixed(symbol); n], result)
    }

    /// Measures the stabilizer `X^t Z^{At}`: X on `t`, Z elsewhere, with the
    /// result checking the product on `t ∪ supp(At)` against the stabilizer
    /// sign. Fails if some vertex would need both X and Z.
    pub fn stabilizer_check(name: &str, g: &Graph, t: &BitVector) -> Result<Self, PatternError> {
        let at = g.apply_adjacency(t);
        if let Some(v) = t.support().find(|&v| at.get(v)) {
            return Err(PatternError::Invalid(format!(
                "vertex {v} carries both X and Z in this stabilizer"
            )));
        }
        let basis = (0..g.n())
            .map(|v| BasisRule::Fixed(if t.get(v) { QuerySymbol::X } else { QuerySymbol::Z }))
            .collect();
        let parity = t.xor(&at).support().collect();
        let target = Sign::try_from(crate::graph::stabilizer_sign(g, t)).expect("±1");
        Ok(Self::new(name, (0..g.n()).collect(), basis, ResultRule { parity, target }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn n(&self) -> usize {
        self.basis.len()
    }

    pub fn basis_rules(&self) -> &[BasisRule] {
        &self.basis
    }

    pub fn result(&self) -> &ResultRule {
        &self.result
    }

    /// Same pattern with the result target flipped.
    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        p.name = format!("{}-negated", self.name);
        p.result.target = -p.result.target;
        p
    }

    /// Basis for `v` given the outcomes measured so far.
    pub fn basis_for(&self, v: usize, outcomes: &[Option<Sign>]) -> Result<QuerySymbol, PatternError> {
        let rule = self
            .basis
            .get(v)
            .ok_or_else(|| PatternError::Invalid(format!("no basis rule for vertex {v}")))?;
        let symbol = match rule {
            BasisRule::Fixed(s) => *s,
            BasisRule::Parity { of, even, odd } => {
                let mut prod = Sign::Plus;
                for &d in of {
                    match outcomes.get(d).copied().flatten() {
                        Some(s) => prod = prod * s,
                        None => {
                            return Err(PatternError::UnmeasuredDependency { vertex: v, dependency: d })
                        }
                    }
                }
                if prod.is_plus() {
                    *even
                } else {
                    *odd
                }
            }
        };
        if symbol == QuerySymbol::Identity {
            let prefix = outcomes
                .iter()
                .enumerate()
                .filter_map(|(u, o)| o.map(|s| (u, s.value())))
                .collect();
            return Err(PatternError::IdentityBasis { vertex: v, prefix });
        }
        Ok(symbol)
    }

    /// Every symbol the pattern can ever send to vertex `v`.
    pub fn symbols_for(&self, v: usize) -> BTreeSet<QuerySymbol> {
        match &self.basis[v] {
            BasisRule::Fixed(s) => [*s].into(),
            BasisRule::Parity { even, odd, .. } => [*even, *odd].into(),
        }
    }

    pub fn to_spec(&self) -> PatternSpec {
        PatternSpec {
            builtin: None,
            name: Some(self.name.clone()),
            order: Some(self.order.clone()),
            default: None,
            basis: self
                .basis
                .iter()
                .enumerate()
                .map(|(v, r)| match r {
                    BasisRule::Fixed(s) => BasisEntry { vertex: v, symbol: Some(*s), ..Default::default() },
                    BasisRule::Parity { of, even, odd } => BasisEntry {
                        vertex: v,
                        symbol: None,
                        parity: Some(of.clone()),
                        even: Some(*even),
                        odd: Some(*odd),
                    },
                })
                .collect(),
            result: Some(self.result.clone()),
        }
    }
}

/// Structural check: order covers every vertex once, dependencies are
/// measured earlier, and no reachable prefix yields Identity.
pub fn validate_pattern(pattern: &MeasurementPattern, g: &Graph) -> Result<(), Vec<Diagnostic>> {
    let n = g.n();
    let mut diags = Vec::new();
    if pattern.basis.len() != n {
        diags.push(Diagnostic::BasisCount { expected: n, found: pattern.basis.len() });
    }
    let mut position = vec![None; n];
    for (i, &v) in pattern.order.iter().enumerate() {
        if v >= n {
            diags.push(Diagnostic::VertexOutOfRange(v));
        } else if position[v].is_some() {
            diags.push(Diagnostic::DuplicateVertex(v));
        } else {
            position[v] = Some(i);
        }
    }
    for (v, p) in position.iter().enumerate() {
        if p.is_none() {
            diags.push(Diagnostic::MissingVertex(v));
        }
    }
    for &v in &pattern.result.parity {
        if v >= n {
            diags.push(Diagnostic::ResultVertexOutOfRange(v));
        }
    }
    for (i, &v) in pattern.order.iter().enumerate() {
        let Some(rule) = pattern.basis.get(v) else { continue };
        if v >= n {
            continue;
        }
        let mut deps_ok = true;
        for &d in rule.dependencies() {
            let earlier = d < n && position[d].is_some_and(|p| p < i);
            if !earlier {
                diags.push(Diagnostic::DependsOnLater { vertex: v, dependency: d });
                deps_ok = false;
            }
        }
        if !deps_ok {
            continue;
        }
        // Sample one prefix per parity class: all +1, then the first
        // dependency flipped.
        let mut prefixes = vec![Vec::new()];
        if let Some(&first) = rule.dependencies().first() {
            prefixes.push(vec![first]);
        }
        for flipped in prefixes {
            let mut outcomes = vec![None; n];
            for &u in &pattern.order[..i] {
                if u < n {
                    outcomes[u] = Some(if flipped.contains(&u) { Sign::Minus } else { Sign::Plus });
                }
            }
            if let Err(PatternError::IdentityBasis { vertex, prefix }) = pattern.basis_for(v, &outcomes) {
                diags.push(Diagnostic::IdentityBasis { vertex, prefix });
            }
        }
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}

/// Runs the pattern against a fresh session, one query per prover in order.
pub fn execute(
    pattern: &MeasurementPattern,
    session: &mut ProverSession<'_>,
) -> Result<Execution, PatternError> {
    if !session.is_fresh() {
        return Err(PatternError::SessionReused);
    }
    let n = session.n();
    if pattern.n() != n || pattern.order.len() != n {
        return Err(PatternError::Invalid(format!(
            "pattern covers {} vertices, session has {n} provers",
            pattern.order.len()
        )));
    }
    let mut outcomes = vec![None; n];
    for &v in &pattern.order {
        let symbol = pattern.basis_for(v, &outcomes)?;
        outcomes[v] = Some(session.query(v, symbol)?);
    }
    let outcomes: Vec<Sign> = outcomes
        .into_iter()
        .map(|o| o.ok_or_else(|| PatternError::Invalid("order does not cover every vertex".into())))
        .collect::<Result<_, _>>()?;
    let accepted = pattern.result.evaluate(&outcomes);
    Ok(Execution { outcomes, transcript: session.log().to_vec(), accepted })
}

/// Exact ACCEPT probability by enumerating every outcome branch (including
/// response flips for noisy strategies).
pub fn exact_acceptance(
    pattern: &MeasurementPattern,
    strategy: &ProverStrategy,
) -> Result<f64, PatternError> {
    let n = strategy.n();
    if n > EXACT_ENUMERATION_CAP {
        return Err(PatternError::Invalid(format!(
            "exact enumeration limited to {EXACT_ENUMERATION_CAP} vertices"
        )));
    }
    if pattern.n() != n || pattern.order.len() != n {
        return Err(PatternError::Invalid("pattern and strategy sizes differ".into()));
    }
    let mut outcomes = vec![None; n];
    branch(pattern, strategy, 0, strategy.state(), &mut outcomes)
}

fn branch(
    pattern: &MeasurementPattern,
    strategy: &ProverStrategy,
    step: usize,
    state: &PureState,
    outcomes: &mut Vec<Option<Sign>>,
) -> Result<f64, PatternError> {
    if step == pattern.order.len() {
        let full: Vec<Sign> = outcomes.iter().map(|o| o.expect("all measured")).collect();
        return Ok(if pattern.result.evaluate(&full) { 1.0 } else { 0.0 });
    }
    let v = pattern.order[step];
    let symbol = pattern.basis_for(v, outcomes)?;
    let eps = strategy.flip_prob();
    let mut physical: Vec<(f64, Sign, Option<PureState>)> = Vec::with_capacity(2);
    match strategy.classical() {
        Some(a) => physical.push((1.0, a.response(v, symbol), None)),
        None => {
            let obs = strategy
                .observable(v, symbol)
                .map_err(PatternError::from)?
                .expect("basis_for never yields Identity");
            let p_plus = state.outcome_probability(obs).map_err(crate::error::ProverError::from)?;
            for (o, p) in [(Sign::Plus, p_plus), (Sign::Minus, 1.0 - p_plus)] {
                if p > 1e-15 {
                    let (_, post) = state.project(obs, o).map_err(crate::error::ProverError::from)?;
                    physical.push((p, o, Some(post)));
                }
            }
        }
    }
    let mut total = 0.0;
    for (p, o, post) in physical {
        let next = post.as_ref().unwrap_or(state);
        for (q, reported) in [(1.0 - eps, o), (eps, -o)] {
            if q == 0.0 {
                continue;
            }
            outcomes[v] = Some(reported);
            total += p * q * branch(pattern, strategy, step + 1, next, outcomes)?;
        }
    }
    outcomes[v] = None;
    Ok(total)
}

/// Names of the shipped patterns.
pub const BUILTIN_NAMES: [&str; 4] = ["generator-parity", "triangle-parity", "coin", "adaptive-demo"];

/// A shipped pattern by name.
pub fn builtin_pattern(g: &Graph, name: &str) -> Result<MeasurementPattern, PatternError> {
    let n = g.n();
    if n == 0 {
        return Err(PatternError::Invalid("empty graph".into()));
    }
    let first_connected = || {
        (0..n)
            .find(|&v| g.designated_neighbor(v).is_some())
            .ok_or_else(|| PatternError::Invalid(format!("`{name}` needs a vertex with a neighbour")))
    };
    match name {
        // S_0: deterministic +1 for honest provers.
        "generator-parity" => MeasurementPattern::stabilizer_check(name, g, &BitVector::unit(n, 0)),
        // −X^τ Z^{Aτ} for the first cover triangle: deterministic −1 product.
        "triangle-parity" => {
            let t = g.triangle_cover().map_err(|e| PatternError::Invalid(e.to_string()))?[0];
            MeasurementPattern::stabilizer_check(name, g, &BitVector::from_support(n, t))
        }
        // A single Z on a non-isolated vertex is an unbiased coin.
        "coin" => {
            let v = first_connected()?;
            Ok(MeasurementPattern::uniform(
                name,
                n,
                QuerySymbol::Z,
                ResultRule { parity: vec![v], target: Sign::Plus },
            ))
        }
        // Z on v0, then D± on u = u(v0) chosen by a_{v0} to undo the Z
        // byproduct, Z elsewhere; accepts with probability (1 + 1/√2)/2.
        "adaptive-demo" => {
            let v0 = first_connected()?;
            let u = g.designated_neighbor(v0).expect("connected");
            let mut order = vec![v0, u];
            order.extend((0..n).filter(|&w| w != v0 && w != u));
            let mut basis = vec![BasisRule::Fixed(QuerySymbol::Z); n];
            basis[u] = BasisRule::Parity {
                of: vec![v0],
                even: QuerySymbol::Dplus,
                odd: QuerySymbol::Dminus,
            };
            let mut parity: Vec<usize> = g.adjacency_row(u).support().collect();
            parity.push(u);
            parity.sort_unstable();
            Ok(MeasurementPattern::new(name, order, basis, ResultRule { parity, target: Sign::Plus }))
        }
        other => Err(PatternError::Spec(format!("unknown builtin pattern `{other}`"))),
    }
}

/// Every shipped pattern that applies to `g`.
pub fn builtin_patterns(g: &Graph) -> Vec<MeasurementPattern> {
    BUILTIN_NAMES
        .iter()
        .filter_map(|name| builtin_pattern(g, name).ok())
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisEntry {
    pub vertex: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<QuerySymbol>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub even: Option<QuerySymbol>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub odd: Option<QuerySymbol>,
}

/// Pattern spec file contents (TOML).
///
/// ```toml
/// name = "adaptive"
/// order = [0, 1, 2]          # defaults to 0..n
/// default = "Z"              # basis for vertices without an entry
/// [[basis]]
/// vertex = 1
/// parity = [0]               # product of these outcomes
/// even = "Dplus"             # used when the product is +1
/// odd = "Dminus"
/// [result]
/// parity = [0, 1, 2]
/// target = 1
/// ```
///
/// Alternatively `builtin = "<name>"` selects a shipped pattern.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<QuerySymbol>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub basis: Vec<BasisEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<ResultRule>,
}

impl PatternSpec {
    pub fn builtin(name: &str) -> Self {
        Self { builtin: Some(name.into()), ..Default::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self, PatternError> {
        toml::from_str(text).map_err(|e| PatternError::Spec(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("pattern spec serializes")
    }

    /// Resolves against `g` and validates the result.
    pub fn build(&self, g: &Graph) -> Result<MeasurementPattern, PatternError> {
        let pattern = match &self.builtin {
            Some(name) => builtin_pattern(g, name)?,
            None => self.build_explicit(g.n())?,
        };
        validate_pattern(&pattern, g).map_err(|d| {
            PatternError::Invalid(d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "))
        })?;
        Ok(pattern)
    }

    fn build_explicit(&self, n: usize) -> Result<MeasurementPattern, PatternError> {
        let mut basis: Vec<Option<BasisRule>> = vec![self.default.map(BasisRule::Fixed); n];
        for e in &self.basis {
            if e.vertex >= n {
                return Err(PatternError::Spec(format!("basis entry for unknown vertex {}", e.vertex)));
            }
            let rule = match (e.symbol, &e.parity, e.even, e.odd) {
                (Some(s), None, None, None) => BasisRule::Fixed(s),
                (None, Some(of), Some(even), Some(odd)) => BasisRule::Parity { of: of.clone(), even, odd },
                _ => {
                    return Err(PatternError::Spec(format!(
                        "basis entry for vertex {} needs `symbol` or `parity` + `even` + `odd`",
                        e.vertex
                    )))
                }
            };
            basis[e.vertex] = Some(rule);
        }
        let basis = basis
            .into_iter()
            .enumerate()
            .map(|(v, r)| r.ok_or_else(|| PatternError::Spec(format!("no basis for vertex {v}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let result = self
            .result
            .clone()
            .ok_or_else(|| PatternError::Spec("missing `result`".into()))?;
        Ok(MeasurementPattern::new(
            self.name.clone().unwrap_or_else(|| "custom".into()),
            self.order.clone().unwrap_or_else(|| (0..n).collect()),
            basis,
            result,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_triangular_lattice;
    use crate::provers::{honest_strategy, noisy_strategy};
    use QuerySymbol::*;

    const HALF_PLUS: f64 = 0.853_553_390_593_273_8; // (1 + 1/√2)/2

    #[test]
    fn all_x_on_k3_always_accepts() {
        let g = Graph::complete(3);
        let p = MeasurementPattern::uniform("all-x", 3, X, ResultRule { parity: vec![0, 1, 2], target: Sign::Minus });
        assert!(validate_pattern(&p, &g).is_ok());
        let s = honest_strategy(&g).unwrap();
        for seed in 0..200 {
            let run = execute(&p, &mut s.session(seed)).unwrap();
            assert!(run.accepted);
            assert_eq!(Sign::product(run.outcomes.iter().copied()), Sign::Minus);
        }
        assert!((exact_acceptance(&p, &s).unwrap() - 1.0).abs() < 1e-12);
        // triangle-parity on K3 is the same pattern
        let t = builtin_pattern(&g, "triangle-parity").unwrap();
        assert_eq!(t.basis_rules(), p.basis_rules());
        assert_eq!(t.result(), p.result());
    }

    #[test]
    fn generator_pattern_on_single_edge() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let p = builtin_pattern(&g, "generator-parity").unwrap();
        assert_eq!(p.basis_rules(), &[BasisRule::Fixed(X), BasisRule::Fixed(Z)]);
        let s = honest_strategy(&g).unwrap();
        for seed in 0..200 {
            let run = execute(&p, &mut s.session(seed)).unwrap();
            assert_eq!(run.outcomes[0] * run.outcomes[1], Sign::Plus);
            assert!(run.accepted);
        }
    }

    #[test]
    fn replay_is_identical() {
        let g = build_triangular_lattice(2, 3).unwrap();
        let s = honest_strategy(&g).unwrap();
        for p in builtin_patterns(&g) {
            let a = execute(&p, &mut s.session(77)).unwrap();
            let b = execute(&p, &mut s.session(77)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn builtin_exact_values() {
        for g in [Graph::complete(3), build_triangular_lattice(3, 3).unwrap()] {
            let honest = honest_strategy(&g).unwrap();
            let ps = builtin_patterns(&g);
            assert_eq!(ps.len(), 4);
            for p in &ps {
                assert!(validate_pattern(p, &g).is_ok(), "{}", p.name());
                let e = exact_acceptance(p, &honest).unwrap();
                let want = match p.name() {
                    "generator-parity" | "triangle-parity" => 1.0,
                    "coin" => 0.5,
                    "adaptive-demo" => HALF_PLUS,
                    _ => unreachable!(),
                };
                assert!((e - want).abs() < 1e-10, "{} gave {e}", p.name());
            }
        }
    }

    #[test]
    fn noisy_half_randomizes_result() {
        let g = Graph::complete(3);
        let p = builtin_pattern(&g, "triangle-parity").unwrap();
        let s = noisy_strategy(&g, 0.5).unwrap();
        assert!((exact_acceptance(&p, &s).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn adaptive_basis_follows_first_outcome() {
        let g = Graph::complete(3);
        let p = builtin_pattern(&g, "adaptive-demo").unwrap();
        let s = honest_strategy(&g).unwrap();
        let mut plus = 0;
        for seed in 0..400 {
            let run = execute(&p, &mut s.session(seed)).unwrap();
            let first = run.transcript[0];
            let second = run.transcript[1];
            assert_eq!(first.vertex, 0);
            assert_eq!(second.vertex, 1);
            let want = if first.outcome.is_plus() { Dplus } else { Dminus };
            assert_eq!(second.symbol, want);
            plus += first.outcome.is_plus() as usize;
        }
        assert!((150..250).contains(&plus), "{plus}");
    }

    #[test]
    fn diagnostics() {
        let g = Graph::complete(3);
        let skip = MeasurementPattern::new(
            "skip",
            vec![0, 2],
            vec![BasisRule::Fixed(X); 3],
            ResultRule { parity: vec![0], target: Sign::Plus },
        );
        assert_eq!(validate_pattern(&skip, &g), Err(vec![Diagnostic::MissingVertex(1)]));

        let idle = MeasurementPattern::new(
            "idle",
            vec![0, 1, 2],
            vec![
                BasisRule::Fixed(Z),
                BasisRule::Parity { of: vec![0], even: X, odd: Identity },
                BasisRule::Fixed(Z),
            ],
            ResultRule { parity: vec![0], target: Sign::Plus },
        );
        assert_eq!(
            validate_pattern(&idle, &g),
            Err(vec![Diagnostic::IdentityBasis { vertex: 1, prefix: vec![(0, -1)] }])
        );

        let later = MeasurementPattern::new(
            "later",
            vec![0, 1, 2],
            vec![
                BasisRule::Parity { of: vec![2], even: X, odd: Z },
                BasisRule::Fixed(Z),
                BasisRule::Fixed(Z),
            ],
            ResultRule { parity: vec![5], target: Sign::Plus },
        );
        let d = validate_pattern(&later, &g).unwrap_err();
        assert!(d.contains(&Diagnostic::DependsOnLater { vertex: 0, dependency: 2 }));
        assert!(d.contains(&Diagnostic::ResultVertexOutOfRange(5)));
    }

    #[test]
    fn execute_rejects_identity_and_reuse() {
        let g = Graph::complete(3);
        let s = honest_strategy(&g).unwrap();
        let p = MeasurementPattern::uniform("idle", 3, Identity, ResultRule { parity: vec![], target: Sign::Plus });
        assert!(matches!(
            execute(&p, &mut s.session(0)),
            Err(PatternError::IdentityBasis { vertex: 0, .. })
        ));
        let ok = builtin_pattern(&g, "coin").unwrap();
        let mut sess = s.session(0);
        sess.query(2, Z).unwrap();
        assert!(matches!(execute(&ok, &mut sess), Err(PatternError::SessionReused)));
    }

    #[test]
    fn spec_file_round_trip() {
        let g = build_triangular_lattice(2, 3).unwrap();
        for p in builtin_patterns(&g) {
            let text = p.to_spec().to_toml();
            let back = PatternSpec::from_toml(&text).unwrap().build(&g).unwrap();
            assert_eq!(back, p);
        }
        let text = r#"
            name = "adaptive"
            default = "Z"
            [[basis]]
            vertex = 1
            parity = [0]
            even = "Dplus"
            odd = "Dminus"
            [result]
            parity = [0, 1, 2]
            target = 1
        "#;
        let p = PatternSpec::from_toml(text).unwrap().build(&Graph::complete(3)).unwrap();
        assert_eq!(p.order(), &[0, 1, 2]);
        assert_eq!(p.symbols_for(1), [Dplus, Dminus].into());
        let bad = "order = [0, 1]\ndefault = \"X\"\n[result]\nparity = [0]\ntarget = 1\n";
        assert!(PatternSpec::from_toml(bad).unwrap().build(&Graph::complete(3)).is_err());
        assert!(PatternSpec::from_toml("result = 3").is_err());
    }
}
