//! Prover strategies and the single-query, non-communicating session contract.
//!
//! Every strategy is a joint pure state plus a table of local ±1 observables,
//! one per `(vertex, symbol)`. A [`ProverSession`] is the only way to obtain
//! responses: each prover answers at most once, and its answer is produced by
//! measuring its own site only.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ProverError;
use crate::graph::Graph;
use crate::protocol::MeasurementSetting;
use crate::quantum::{
    self, c, LocalObservable, Matrix, PureState, SettingOperator, Sign,
};

/// Largest number of assignment bits (`4n`) the exhaustive oracle searches.
pub const ORACLE_BIT_CAP: usize = 24;

/// A query symbol sent to one prover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuerySymbol {
    X,
    Z,
    Dplus,
    Dminus,
    #[serde(rename = "I")]
    Identity,
}

impl QuerySymbol {
    /// The four symbols an honest prover measures.
    pub const MEASURED: [QuerySymbol; 4] =
        [QuerySymbol::X, QuerySymbol::Z, QuerySymbol::Dplus, QuerySymbol::Dminus];

    /// Position in [`QuerySymbol::MEASURED`]; `None` for Identity.
    pub fn index(self) -> Option<usize> {
        match self {
            QuerySymbol::X => Some(0),
            QuerySymbol::Z => Some(1),
            QuerySymbol::Dplus => Some(2),
            QuerySymbol::Dminus => Some(3),
            QuerySymbol::Identity => None,
        }
    }

    /// The honest single-qubit observable for this symbol.
    pub fn honest_matrix(self) -> Matrix {
        match self {
            QuerySymbol::X => quantum::pauli_x(),
            QuerySymbol::Z => quantum::pauli_z(),
            QuerySymbol::Dplus => quantum::d_plus(),
            QuerySymbol::Dminus => quantum::d_minus(),
            QuerySymbol::Identity => quantum::identity(2),
        }
    }
}

impl fmt::Display for QuerySymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuerySymbol::X => "X",
            QuerySymbol::Z => "Z",
            QuerySymbol::Dplus => "D+",
            QuerySymbol::Dminus => "D-",
            QuerySymbol::Identity => "I",
        })
    }
}

/// Deterministic response table: one ±1 per prover and measured symbol.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassicalAssignment {
    values: Vec<[Sign; 4]>,
}

impl ClassicalAssignment {
    pub fn new(values: Vec<[Sign; 4]>) -> Self {
        Self { values }
    }

    pub fn constant(n: usize, value: Sign) -> Self {
        Self { values: vec![[value; 4]; n] }
    }

    /// Decodes `bits`: bit `4v + k` set means prover `v` answers −1 to the
    /// `k`-th measured symbol.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        let values = (0..n)
            .map(|v| {
                std::array::from_fn(|k| Sign::from_bool_minus(bits >> (4 * v + k) & 1 == 1))
            })
            .collect();
        Self { values }
    }

    pub fn to_bits(&self) -> u64 {
        let mut bits = 0u64;
        for (v, row) in self.values.iter().enumerate() {
            for (k, s) in row.iter().enumerate() {
                if *s == Sign::Minus {
                    bits |= 1 << (4 * v + k);
                }
            }
        }
        bits
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn rows(&self) -> &[[Sign; 4]] {
        &self.values
    }

    pub fn response(&self, v: usize, symbol: QuerySymbol) -> Sign {
        match symbol.index() {
            Some(k) => self.values[v][k],
            None => Sign::Plus,
        }
    }
}

/// Which family a strategy was built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyKind {
    Honest,
    Noisy { eps: f64 },
    Classical,
    Perturbed { theta: f64 },
    Custom,
}

/// Joint state plus a per-prover observable table.
#[derive(Clone, Debug)]
pub struct ProverStrategy {
    kind: StrategyKind,
    state: PureState,
    table: Vec<[LocalObservable; 4]>,
    classical: Option<ClassicalAssignment>,
    flip_prob: f64,
}

fn honest_table(n: usize) -> Vec<[LocalObservable; 4]> {
    (0..n)
        .map(|v| {
            QuerySymbol::MEASURED.map(|s| {
                LocalObservable::new(v, s.honest_matrix()).expect("honest observables are involutions")
            })
        })
        .collect()
}

/// Honest provers: the graph state, measured in X, Z, (X±Z)/√2.
pub fn honest_strategy(g: &Graph) -> Result<ProverStrategy, ProverError> {
    Ok(ProverStrategy {
        kind: StrategyKind::Honest,
        state: quantum::make_graph_state(g)?,
        table: honest_table(g.n()),
        classical: None,
        flip_prob: 0.0,
    })
}

/// Honest provers whose every response is flipped independently with
/// probability `eps`.
pub fn noisy_strategy(g: &Graph, eps: f64) -> Result<ProverStrategy, ProverError> {
    let mut s = honest_strategy(g)?.with_noise(eps)?;
    s.kind = StrategyKind::Noisy { eps };
    Ok(s)
}

/// Deterministic provers answering from a fixed table.
///
/// The quantum view is a trivial one-dimensional site per prover with the
/// observables `±I`, so exact expectations go through the same code path.
pub fn classical_strategy(assignment: ClassicalAssignment) -> ProverStrategy {
    let n = assignment.n();
    let state = PureState::new(vec![1; n], vec![c(1.0)]).expect("trivial state");
    let table = (0..n)
        .map(|v| {
            std::array::from_fn(|k| {
                let m = Matrix::from_element(1, 1, c(assignment.values[v][k].as_f64()));
                LocalObservable::new(v, m).expect("±1 is an involution")
            })
        })
        .collect();
    ProverStrategy {
        kind: StrategyKind::Classical,
        state,
        table,
        classical: Some(assignment),
        flip_prob: 0.0,
    }
}

/// Honest provers with every X observable replaced by `cos θ·X + sin θ·Z`.
pub fn perturbed_strategy(g: &Graph, theta: f64) -> Result<ProverStrategy, ProverError> {
    let mut s = honest_strategy(g)?;
    for v in 0..g.n() {
        s.table[v][0] = LocalObservable::new(v, quantum::rotated_x(theta))?;
    }
    s.kind = StrategyKind::Perturbed { theta };
    Ok(s)
}

impl ProverStrategy {
    /// Arbitrary joint state with one observable per `(site, measured symbol)`.
    pub fn custom(state: PureState, table: Vec<[Matrix; 4]>) -> Result<Self, ProverError> {
        if table.len() != state.num_sites() {
            return Err(ProverError::Spec(format!(
                "observable table covers {} provers, state has {} sites",
                table.len(),
                state.num_sites()
            )));
        }
        let mut rows = Vec::with_capacity(table.len());
        for (v, mats) in table.into_iter().enumerate() {
            let mut row = Vec::with_capacity(4);
            for m in mats {
                if m.nrows() != state.dims()[v] {
                    return Err(ProverError::Spec(format!(
                        "observable for prover {v} has dimension {}, site has {}",
                        m.nrows(),
                        state.dims()[v]
                    )));
                }
                row.push(LocalObservable::new(v, m)?);
            }
            rows.push(row.try_into().expect("four observables"));
        }
        Ok(Self {
            kind: StrategyKind::Custom,
            state,
            table: rows,
            classical: None,
            flip_prob: 0.0,
        })
    }

    /// Replaces one observable; the strategy becomes `Custom`.
    pub fn with_observable(
        mut self,
        v: usize,
        symbol: QuerySymbol,
        m: Matrix,
    ) -> Result<Self, ProverError> {
        let n = self.n();
        let k = symbol
            .index()
            .ok_or(ProverError::MissingObservable { vertex: v, symbol })?;
        let row = self.table.get_mut(v).ok_or(ProverError::UnknownProver { vertex: v, n })?;
        row[k] = LocalObservable::new(v, m)?;
        self.kind = StrategyKind::Custom;
        self.classical = None;
        Ok(self)
    }

    /// Adds independent response flips with probability `eps`.
    pub fn with_noise(mut self, eps: f64) -> Result<Self, ProverError> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(ProverError::InvalidNoise(eps));
        }
        self.flip_prob = eps;
        Ok(self)
    }

    pub fn kind(&self) -> &StrategyKind {
        &self.kind
    }

    pub fn n(&self) -> usize {
        self.table.len()
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub fn flip_prob(&self) -> f64 {
        self.flip_prob
    }

    pub fn classical(&self) -> Option<&ClassicalAssignment> {
        self.classical.as_ref()
    }

    /// Observable used by prover `v` for `symbol`; `None` for Identity.
    pub fn observable(
        &self,
        v: usize,
        symbol: QuerySymbol,
    ) -> Result<Option<&LocalObservable>, ProverError> {
        let row = self
            .table
            .get(v)
            .ok_or(ProverError::UnknownProver { vertex: v, n: self.n() })?;
        Ok(symbol.index().map(|k| &row[k]))
    }

    /// Exact mean of the combined outcome `sign · ∏ responses` when prover `v`
    /// is queried with `symbols[v]`, including response noise.
    pub fn exact_expectation(&self, symbols: &[QuerySymbol], sign: Sign) -> Result<f64, ProverError> {
        if symbols.len() != self.n() {
            return Err(ProverError::AssignmentSize { expected: self.n(), found: symbols.len() });
        }
        let mut factors = Vec::new();
        for (v, &s) in symbols.iter().enumerate() {
            if let Some(o) = self.observable(v, s)? {
                factors.push(o.clone());
            }
        }
        let k = factors.len() as i32;
        let op = SettingOperator::new(factors, sign)?;
        let e = self.state.expectation(&op)?;
        Ok(e * (1.0 - 2.0 * self.flip_prob).powi(k))
    }

    /// Fresh session with its own seeded stream.
    pub fn session(&self, seed: u64) -> ProverSession<'_> {
        ProverSession::new(self, ChaCha8Rng::seed_from_u64(seed))
    }
}

/// One logged query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryEvent {
    pub vertex: usize,
    pub symbol: QuerySymbol,
    pub outcome: Sign,
}

/// A single protocol run against one set of provers.
pub struct ProverSession<'a> {
    strategy: &'a ProverStrategy,
    state: PureState,
    queried: Vec<bool>,
    log: Vec<QueryEvent>,
    rng: ChaCha8Rng,
}

impl<'a> ProverSession<'a> {
    pub fn new(strategy: &'a ProverStrategy, rng: ChaCha8Rng) -> Self {
        Self {
            strategy,
            state: strategy.state.clone(),
            queried: vec![false; strategy.n()],
            log: Vec::new(),
            rng,
        }
    }

    pub fn n(&self) -> usize {
        self.queried.len()
    }

    /// No prover has been queried yet.
    pub fn is_fresh(&self) -> bool {
        self.log.is_empty()
    }

    pub fn was_queried(&self, v: usize) -> bool {
        self.queried.get(v).copied().unwrap_or(false)
    }

    pub fn log(&self) -> &[QueryEvent] {
        &self.log
    }

    /// Current joint state (collapsed by earlier queries).
    pub fn state(&self) -> &PureState {
        &self.state
    }

    /// Sends `symbol` to prover `v` and returns its ±1 response.
    ///
    /// Identity answers +1 without touching the state. Otherwise the prover
    /// measures its own observable on its own site and the shared state
    /// collapses. A second query to the same prover is a hard error.
    pub fn query(&mut self, v: usize, symbol: QuerySymbol) -> Result<Sign, ProverError> {
        let n = self.n();
        if v >= n {
            return Err(ProverError::UnknownProver { vertex: v, n });
        }
        if self.queried[v] {
            return Err(ProverError::AlreadyQueried(v));
        }
        self.queried[v] = true;
        let outcome = match symbol {
            QuerySymbol::Identity => Sign::Plus,
            _ => {
                let raw = match &self.strategy.classical {
                    Some(a) => a.response(v, symbol),
                    None => {
                        let obs = self
                            .strategy
                            .observable(v, symbol)?
                            .ok_or(ProverError::MissingObservable { vertex: v, symbol })?;
                        let (o, next) = self.state.measure(obs, &mut self.rng)?;
                        self.state = next;
                        o
                    }
                };
                let eps = self.strategy.flip_prob;
                if eps > 0.0 && self.rng.gen_bool(eps) {
                    -raw
                } else {
                    raw
                }
            }
        };
        self.log.push(QueryEvent { vertex: v, symbol, outcome });
        Ok(outcome)
    }
}

/// Exhaustive search over all deterministic assignments for `n` provers,
/// maximising `score`. Ties go to the smallest bit encoding.
pub fn search_assignments<F>(n: usize, score: F) -> Result<(f64, ClassicalAssignment), ProverError>
where
    F: Fn(u64) -> f64 + Sync,
{
    let bits = 4 * n;
    if bits > ORACLE_BIT_CAP {
        return Err(ProverError::SearchCap { bits, cap: ORACLE_BIT_CAP });
    }
    let better = |a: (f64, u64), b: (f64, u64)| {
        if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let (best, arg) = (0..1u64 << bits)
        .into_par_iter()
        .map(|a| (score(a), a))
        .reduce(|| (f64::NEG_INFINITY, u64::MAX), better);
    Ok((best, ClassicalAssignment::from_bits(n, arg)))
}

/// Bit mask and sign of a setting, for fast classical evaluation.
pub(crate) fn setting_mask(setting: &MeasurementSetting) -> (u64, bool) {
    let mut mask = 0u64;
    for (v, s) in setting.symbols().iter().enumerate() {
        if let Some(k) = s.index() {
            mask |= 1 << (4 * v + k);
        }
    }
    (mask, setting.sign == Sign::Minus)
}

/// Whether a classical assignment (bit encoded) is accepted on a setting mask.
pub(crate) fn classical_accepts(bits: u64, mask: (u64, bool)) -> bool {
    ((bits & mask.0).count_ones() % 2 == 1) == mask.1
}

/// Best acceptance over deterministic classical strategies, with uniform
/// weight on the settings, plus one maximiser. An empty list is vacuously 1.
pub fn optimal_classical_acceptance(
    g: &Graph,
    settings: &[MeasurementSetting],
) -> Result<(f64, ClassicalAssignment), ProverError> {
    let n = g.n();
    if 4 * n > ORACLE_BIT_CAP {
        return Err(ProverError::SearchCap { bits: 4 * n, cap: ORACLE_BIT_CAP });
    }
    if settings.is_empty() {
        return Ok((1.0, ClassicalAssignment::constant(n, Sign::Plus)));
    }
    let masks: Vec<(u64, bool)> = settings.iter().map(setting_mask).collect();
    let total = masks.len() as f64;
    let (count, witness) = search_assignments(n, |bits| {
        masks.iter().filter(|m| classical_accepts(bits, **m)).count() as f64
    })?;
    Ok((count / total, witness))
}
