//! The classical verifier: the setting family, TEST, CALCULATE, the one-shot
//! interactive proof and gap amplification.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PatternError, ProtocolError};
use crate::graph::{Graph, Triangle};
use crate::mbqc::{self, MeasurementPattern};
use crate::provers::{
    classical_accepts, search_assignments, setting_mask, ClassicalAssignment, ProverSession,
    ProverStrategy, QueryEvent, QuerySymbol,
};
use crate::quantum::Sign;
use crate::stats::{trial_seed, Estimate};

/// Upper bound on trial counts requested from [`hoeffding_trials`].
pub const DEFAULT_TRIAL_CAP: u64 = 100_000_000;

/// Which member of the setting family a setting is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyTag {
    Generator { v: usize },
    Triangle { tau: Triangle },
    DPlusZ { v: usize },
    DMinusZ { v: usize },
    DPlusX { v: usize, u: usize },
    DMinusX { v: usize, u: usize },
}

impl FamilyTag {
    /// Family name without the vertex labels.
    pub fn name(&self) -> &'static str {
        match self {
            FamilyTag::Generator { .. } => "generator",
            FamilyTag::Triangle { .. } => "triangle",
            FamilyTag::DPlusZ { .. } => "d_plus_z",
            FamilyTag::DMinusZ { .. } => "d_minus_z",
            FamilyTag::DPlusX { .. } => "d_plus_x",
            FamilyTag::DMinusX { .. } => "d_minus_x",
        }
    }
}

/// One TEST setting: a symbol per prover, a global sign and the honest mean
/// of the signed combined outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    symbols: Vec<QuerySymbol>,
    pub sign: Sign,
    pub family: FamilyTag,
    pub honest_expectation: f64,
}

impl MeasurementSetting {
    pub fn symbols(&self) -> &[QuerySymbol] {
        &self.symbols
    }

    pub fn symbol(&self, v: usize) -> QuerySymbol {
        self.symbols[v]
    }

    /// Honest acceptance probability `(1 + e)/2`.
    pub fn honest_acceptance(&self) -> f64 {
        (1.0 + self.honest_expectation) / 2.0
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == Sign::Minus {
            f.write_str("-")?;
        }
        let mut first = true;
        for (v, s) in self.symbols.iter().enumerate() {
            if *s != QuerySymbol::Identity {
                if !first {
                    f.write_str(" ")?;
                }
                write!(f, "{s}_{v}")?;
                first = false;
            }
        }
        Ok(())
    }
}

/// The setting family for `g`, in this order: generators `X_v Z^{N(v)}`,
/// triangle stabilizers `−X^τ Z^{Aτ}`, then per vertex `D±_v Z^{N(v)}` and
/// `±D±_v X_u Z^{N(u)∖v}` with `u` the designated neighbour.
pub fn build_settings(g: &Graph) -> Result<Vec<MeasurementSetting>, ProtocolError> {
    let n = g.n();
    let cover = g.triangle_cover()?;
    let neighbors: Vec<usize> = (0..n)
        .map(|v| {
            g.designated_neighbor(v)
                .ok_or(ProtocolError::Config(format!("vertex {v} has no designated neighbour")))
        })
        .collect::<Result<_, _>>()?;
    let blank = || vec![QuerySymbol::Identity; n];
    let mut out = Vec::with_capacity(5 * n + cover.len());

    for v in 0..n {
        let mut symbols = blank();
        symbols[v] = QuerySymbol::X;
        for w in g.adjacency_row(v).support() {
            symbols[w] = QuerySymbol::Z;
        }
        out.push(MeasurementSetting {
            symbols,
            sign: Sign::Plus,
            family: FamilyTag::Generator { v },
            honest_expectation: 1.0,
        });
    }
    for &tau in cover {
        let t = crate::graph::BitVector::from_support(n, tau);
        let at = g.apply_adjacency(&t);
        let mut symbols = blank();
        for w in at.support() {
            symbols[w] = QuerySymbol::Z;
        }
        for &w in &tau {
            symbols[w] = QuerySymbol::X;
        }
        out.push(MeasurementSetting {
            symbols,
            sign: Sign::Minus,
            family: FamilyTag::Triangle { tau },
            honest_expectation: 1.0,
        });
    }
    for v in 0..n {
        let u = neighbors[v];
        for (d, z_tag, x_tag, x_sign) in [
            (QuerySymbol::Dplus, FamilyTag::DPlusZ { v }, FamilyTag::DPlusX { v, u }, Sign::Plus),
            (QuerySymbol::Dminus, FamilyTag::DMinusZ { v }, FamilyTag::DMinusX { v, u }, Sign::Minus),
        ] {
            let mut symbols = blank();
            symbols[v] = d;
            for w in g.adjacency_row(v).support() {
                symbols[w] = QuerySymbol::Z;
            }
            out.push(MeasurementSetting {
                symbols,
                sign: Sign::Plus,
                family: z_tag,
                honest_expectation: FRAC_1_SQRT_2,
            });

            // Z on A1_u ⊕ 1_v: u's neighbourhood without v, which carries D±.
            let mut symbols = blank();
            for w in g.adjacency_row(u).support() {
                symbols[w] = QuerySymbol::Z;
            }
            symbols[v] = d;
            symbols[u] = QuerySymbol::X;
            out.push(MeasurementSetting {
                symbols,
                sign: x_sign,
                family: x_tag,
                honest_expectation: FRAC_1_SQRT_2,
            });
        }
    }
    // Group the D family as D+Z, D−Z, D+X, D−X per vertex.
    let d_start = n + cover.len();
    for chunk in out[d_start..].chunks_mut(4) {
        chunk.swap(1, 2);
    }
    Ok(out)
}

/// Closed-form honest TEST acceptance `(n + |T| + 4n(1+1/√2)/2) / (5n + |T|)`.
pub fn honest_test_acceptance(g: &Graph) -> Result<f64, ProtocolError> {
    let n = g.n() as f64;
    let t = g.triangle_cover()?.len() as f64;
    Ok((n + t + 4.0 * n * (1.0 + FRAC_1_SQRT_2) / 2.0) / (5.0 * n + t))
}

/// Exact TEST acceptance of `strategy`: mean over settings of `(1 + E)/2`.
pub fn exact_test_acceptance(
    strategy: &ProverStrategy,
    settings: &[MeasurementSetting],
) -> Result<f64, ProtocolError> {
    if settings.is_empty() {
        return Err(ProtocolError::Config("empty setting family".into()));
    }
    let mut total = 0.0;
    for s in settings {
        total += (1.0 + strategy.exact_expectation(s.symbols(), s.sign)?) / 2.0;
    }
    Ok(total / settings.len() as f64)
}

/// Smallest `N` with `2·exp(−N·gap²/2) ≤ 1 − confidence`.
pub fn hoeffding_trials(gap: f64, confidence: f64) -> Result<u64, ProtocolError> {
    hoeffding_trials_capped(gap, confidence, DEFAULT_TRIAL_CAP)
}

pub fn hoeffding_trials_capped(gap: f64, confidence: f64, cap: u64) -> Result<u64, ProtocolError> {
    if gap.is_nan() || gap <= 0.0 {
        return Err(ProtocolError::NonPositiveGap(gap));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(ProtocolError::InvalidConfidence(confidence));
    }
    let bound = |n: u64| 2.0 * (-(n as f64) * gap * gap / 2.0).exp();
    let target = 1.0 - confidence;
    let guess = (2.0 * (2.0 / target).ln() / (gap * gap)).ceil();
    if !guess.is_finite() || guess > cap as f64 {
        return Err(ProtocolError::TrialCap { cap });
    }
    let mut n = (guess as u64).max(1);
    while n > 1 && bound(n - 1) <= target {
        n -= 1;
    }
    while bound(n) > target {
        n += 1;
    }
    Ok(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Branch {
    Test,
    Calculate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Decision {
    Accept,
    Reject,
}

/// Transcript of one INTERACTIVEPROOF trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub seed: u64,
    pub branch: Branch,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setting: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyTag>,
    pub transcript: Vec<QueryEvent>,
    /// TEST: `sign · ∏ responses`. CALCULATE: product of all outcomes.
    pub combined: Sign,
    pub accepted: bool,
}

/// TEST: one uniformly chosen setting, every prover queried once in `order`
/// (unmapped provers get Identity); ACCEPT iff `sign · ∏ responses = +1`.
pub fn run_test<R: Rng + ?Sized>(
    settings: &[MeasurementSetting],
    order: &[usize],
    session: &mut ProverSession<'_>,
    rng: &mut R,
) -> Result<TrialRecord, ProtocolError> {
    if settings.is_empty() {
        return Err(ProtocolError::Config("empty setting family".into()));
    }
    if !session.is_fresh() {
        return Err(PatternError::SessionReused.into());
    }
    let idx = rng.gen_range(0..settings.len());
    let setting = &settings[idx];
    if order.len() != session.n() || setting.symbols.len() != session.n() {
        return Err(ProtocolError::Config("query order must cover every prover".into()));
    }
    let mut combined = setting.sign;
    for &v in order {
        combined = combined * session.query(v, setting.symbol(v))?;
    }
    Ok(TrialRecord {
        index: 0,
        seed: 0,
        branch: Branch::Test,
        setting: Some(idx),
        family: Some(setting.family),
        transcript: session.log().to_vec(),
        combined,
        accepted: combined == Sign::Plus,
    })
}

/// CALCULATE: execute the pattern and report `RESULT`.
pub fn run_calculate(
    pattern: &MeasurementPattern,
    session: &mut ProverSession<'_>,
) -> Result<TrialRecord, ProtocolError> {
    let run = mbqc::execute(pattern, session)?;
    Ok(TrialRecord {
        index: 0,
        seed: 0,
        branch: Branch::Calculate,
        setting: None,
        family: None,
        combined: Sign::product(run.outcomes.iter().copied()),
        transcript: run.transcript,
        accepted: run.accepted,
    })
}

/// A graph with its setting family and the CALCULATE pattern.
#[derive(Clone, Debug)]
pub struct Protocol {
    graph: Graph,
    settings: Vec<MeasurementSetting>,
    pattern: MeasurementPattern,
}

impl Protocol {
    pub fn new(graph: Graph, pattern: MeasurementPattern) -> Result<Self, ProtocolError> {
        let settings = build_settings(&graph)?;
        mbqc::validate_pattern(&pattern, &graph).map_err(|d| {
            ProtocolError::Config(d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "))
        })?;
        Ok(Self { graph, settings, pattern })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn settings(&self) -> &[MeasurementSetting] {
        &self.settings
    }

    pub fn pattern(&self) -> &MeasurementPattern {
        &self.pattern
    }

    /// Exact `P(TEST accepts)`.
    pub fn test_acceptance(&self, strategy: &ProverStrategy) -> Result<f64, ProtocolError> {
        exact_test_acceptance(strategy, &self.settings)
    }

    /// Exact `P(CALCULATE accepts)` by branch enumeration.
    pub fn calculate_acceptance(&self, strategy: &ProverStrategy) -> Result<f64, ProtocolError> {
        Ok(mbqc::exact_acceptance(&self.pattern, strategy)?)
    }

    /// Exact one-shot acceptance `q·P_calc + (1−q)·P_test`.
    pub fn acceptance(&self, strategy: &ProverStrategy, q: f64) -> Result<f64, ProtocolError> {
        let calc = if q > 0.0 { self.calculate_acceptance(strategy)? } else { 0.0 };
        let test = if q < 1.0 { self.test_acceptance(strategy)? } else { 0.0 };
        Ok(q * calc + (1.0 - q) * test)
    }

    /// Best deterministic classical strategy for the full one-shot protocol,
    /// by exhaustive search.
    pub fn best_classical(&self, q: f64) -> Result<(f64, ClassicalAssignment), ProtocolError> {
        let masks: Vec<(u64, bool)> = self.settings.iter().map(setting_mask).collect();
        let total = masks.len() as f64;
        let pattern = &self.pattern;
        let n = self.graph.n();
        let calc = |bits: u64| -> f64 {
            let a = ClassicalAssignment::from_bits(n, bits);
            let mut outcomes = vec![None; n];
            for &v in pattern.order() {
                let Ok(sym) = pattern.basis_for(v, &outcomes) else { return 0.0 };
                outcomes[v] = Some(a.response(v, sym));
            }
            let full: Vec<Sign> = outcomes.into_iter().map(|o| o.unwrap_or(Sign::Plus)).collect();
            if pattern.result().evaluate(&full) {
                1.0
            } else {
                0.0
            }
        };
        let (best, witness) = search_assignments(n, |bits| {
            let test = masks.iter().filter(|m| classical_accepts(bits, **m)).count() as f64 / total;
            let c = if q > 0.0 { calc(bits) } else { 0.0 };
            q * c + (1.0 - q) * test
        })?;
        Ok((best, witness))
    }

    /// One INTERACTIVEPROOF trial with seeds derived from `(master_seed, index)`.
    pub fn run_trial(
        &self,
        strategy: &ProverStrategy,
        q: f64,
        master_seed: u64,
        index: u64,
    ) -> Result<TrialRecord, ProtocolError> {
        let seed = trial_seed(master_seed, index);
        let mut verifier = ChaCha8Rng::seed_from_u64(seed);
        let mut provers = ChaCha8Rng::seed_from_u64(seed);
        provers.set_stream(1);
        let mut session = ProverSession::new(strategy, provers);
        let calculate = verifier.gen::<f64>() < q;
        let mut record = if calculate {
            run_calculate(&self.pattern, &mut session)?
        } else {
            run_test(&self.settings, self.pattern.order(), &mut session, &mut verifier)?
        };
        record.index = index;
        record.seed = seed;
        Ok(record)
    }

    /// Runs `trials` independent trials in parallel; records come back in
    /// index order.
    pub fn run_trials(
        &self,
        strategy: &ProverStrategy,
        q: f64,
        master_seed: u64,
        trials: u64,
    ) -> Result<Vec<TrialRecord>, ProtocolError> {
        (0..trials)
            .into_par_iter()
            .map(|i| self.run_trial(strategy, q, master_seed, i))
            .collect()
    }
}

/// Algorithm 1: draw CALCULATE with probability `q`, else TEST, on a fresh
/// session.
pub fn run_interactive_proof(
    protocol: &Protocol,
    strategy: &ProverStrategy,
    q: f64,
    master_seed: u64,
    index: u64,
) -> Result<TrialRecord, ProtocolError> {
    if !(0.0..=1.0).contains(&q) {
        return Err(ProtocolError::Config(format!("q = {q} outside [0, 1]")));
    }
    protocol.run_trial(strategy, q, master_seed, index)
}

/// How the accept-count cutoff is derived from `c_ip` and `s_ip`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdRule {
    /// `N(c_ip + s_ip)/2`.
    Midpoint,
    /// `N(c_ip − s_ip)/2`, as printed in the original algorithm.
    PaperLiteral,
}

impl ThresholdRule {
    pub fn threshold(self, trials: u64, c_ip: f64, s_ip: f64) -> f64 {
        let n = trials as f64;
        match self {
            ThresholdRule::Midpoint => n * (c_ip + s_ip) / 2.0,
            ThresholdRule::PaperLiteral => n * (c_ip - s_ip) / 2.0,
        }
    }
}

impl std::str::FromStr for ThresholdRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "midpoint" => Ok(ThresholdRule::Midpoint),
            "paper-literal" => Ok(ThresholdRule::PaperLiteral),
            other => Err(format!("unknown threshold rule `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplifyConfig {
    pub q: f64,
    pub trials: u64,
    pub rule: ThresholdRule,
    pub c_ip: f64,
    pub s_ip: f64,
    pub master_seed: u64,
}

impl AmplifyConfig {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if !(0.0..=1.0).contains(&self.q) {
            return Err(ProtocolError::Config(format!("q = {} outside [0, 1]", self.q)));
        }
        if self.trials == 0 {
            return Err(ProtocolError::Config("need at least one trial".into()));
        }
        for (name, v) in [("c_ip", self.c_ip), ("s_ip", self.s_ip)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ProtocolError::Config(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        self.rule.threshold(self.trials, self.c_ip, self.s_ip)
    }
}

/// Aggregated outcome of an amplified run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub master_seed: u64,
    pub q: f64,
    pub trials: u64,
    pub rule: ThresholdRule,
    pub c_ip: f64,
    pub s_ip: f64,
    pub threshold: f64,
    pub n: usize,
    pub strategy: crate::provers::StrategyKind,
    pub pattern: String,
    pub test_trials: u64,
    pub calculate_trials: u64,
    pub acceptance: Estimate,
    pub test: Estimate,
    pub calculate: Estimate,
    pub families: BTreeMap<String, Estimate>,
    pub accepted: u64,
    pub decision: Decision,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

/// Result of [`amplify_gap`]: the decision, its summary and every trial.
#[derive(Clone, Debug)]
pub struct AmplifyOutcome {
    pub decision: Decision,
    pub summary: RunSummary,
    pub records: Vec<TrialRecord>,
}

/// Algorithm 2: `N` independent trials, ACCEPT iff the accept count `M`
/// exceeds the threshold.
pub fn amplify_gap(
    protocol: &Protocol,
    strategy: &ProverStrategy,
    config: &AmplifyConfig,
) -> Result<AmplifyOutcome, ProtocolError> {
    config.validate()?;
    let records = protocol.run_trials(strategy, config.q, config.master_seed, config.trials)?;
    let summary = summarize(protocol, strategy, config, &records);
    Ok(AmplifyOutcome { decision: summary.decision, summary, records })
}

/// Aggregates trial records into a [`RunSummary`].
pub fn summarize(
    protocol: &Protocol,
    strategy: &ProverStrategy,
    config: &AmplifyConfig,
    records: &[TrialRecord],
) -> RunSummary {
    let count = |branch: Option<Branch>, accepted: bool| {
        records
            .iter()
            .filter(|r| branch.is_none_or(|b| r.branch == b) && (!accepted || r.accepted))
            .count() as u64
    };
    let mut fam: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for r in records {
        if let Some(f) = r.family {
            let e = fam.entry(f.name().to_string()).or_default();
            e.0 += r.accepted as u64;
            e.1 += 1;
        }
    }
    let accepted = count(None, true);
    let threshold = config.threshold();
    RunSummary {
        master_seed: config.master_seed,
        q: config.q,
        trials: records.len() as u64,
        rule: config.rule,
        c_ip: config.c_ip,
        s_ip: config.s_ip,
        threshold,
        n: protocol.graph.n(),
        strategy: strategy.kind().clone(),
        pattern: protocol.pattern.name().to_string(),
        test_trials: count(Some(Branch::Test), false),
        calculate_trials: count(Some(Branch::Calculate), false),
        acceptance: Estimate::new(accepted, records.len() as u64),
        test: Estimate::new(count(Some(Branch::Test), true), count(Some(Branch::Test), false)),
        calculate: Estimate::new(
            count(Some(Branch::Calculate), true),
            count(Some(Branch::Calculate), false),
        ),
        families: fam.into_iter().map(|(k, (s, t))| (k, Estimate::new(s, t))).collect(),
        accepted,
        decision: if accepted as f64 > threshold { Decision::Accept } else { Decision::Reject },
        wall_time_ms: None,
    }
}

/// One point of a q sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QGap {
    pub q: f64,
    pub honest: f64,
    pub adversary: f64,
    pub gap: f64,
}

/// Evaluates the honest-vs-adversary gap on a grid of `q` values from
/// per-branch acceptances `(calculate, test)`, returning the grid and the
/// point with the largest gap (first on ties).
pub fn optimize_q(grid: &[f64], honest: (f64, f64), adversary: (f64, f64)) -> (Vec<QGap>, Option<QGap>) {
    let points: Vec<QGap> = grid
        .iter()
        .map(|&q| {
            let h = q * honest.0 + (1.0 - q) * honest.1;
            let a = q * adversary.0 + (1.0 - q) * adversary.1;
            QGap { q, honest: h, adversary: a, gap: h - a }
        })
        .collect();
    let best = points
        .iter()
        .copied()
        .fold(None, |best: Option<QGap>, p| match best {
            Some(b) if b.gap >= p.gap => Some(b),
            _ => Some(p),
        });
    (points, best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_triangular_lattice;
    use crate::mbqc::builtin_pattern;
    use crate::provers::{classical_strategy, honest_strategy, noisy_strategy};

    const HONEST_K3: f64 = 0.890_165_042_944_955_3;

    fn k3() -> Protocol {
        let g = Graph::complete(3);
        let p = builtin_pattern(&g, "triangle-parity").unwrap();
        Protocol::new(g, p).unwrap()
    }

    #[test]
    fn k3_has_sixteen_settings() {
        let s = build_settings(&Graph::complete(3)).unwrap();
        assert_eq!(s.len(), 16);
        let names: Vec<_> = s.iter().map(|x| x.family.name()).collect();
        assert_eq!(&names[..4], &["generator", "generator", "generator", "triangle"]);
        assert_eq!(&names[4..8], &["d_plus_z", "d_minus_z", "d_plus_x", "d_minus_x"]);
    }

    #[test]
    fn lattice_setting_count() {
        let g = build_triangular_lattice(3, 3).unwrap();
        let t = g.triangle_cover().unwrap().len();
        assert_eq!(build_settings(&g).unwrap().len(), 5 * 9 + t);
    }

    #[test]
    fn settings_need_a_cover() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(matches!(build_settings(&g), Err(ProtocolError::Graph(_))));
    }

    #[test]
    fn setting_shapes() {
        let g = build_triangular_lattice(2, 3).unwrap();
        for s in build_settings(&g).unwrap() {
            match s.family {
                FamilyTag::DPlusX { v, u } | FamilyTag::DMinusX { v, u } => {
                    assert_eq!(s.symbol(u), QuerySymbol::X);
                    assert!(matches!(s.symbol(v), QuerySymbol::Dplus | QuerySymbol::Dminus));
                    for w in 0..g.n() {
                        if w != u && w != v {
                            let want = if g.has_edge(u, w) { QuerySymbol::Z } else { QuerySymbol::Identity };
                            assert_eq!(s.symbol(w), want);
                        }
                    }
                }
                FamilyTag::Triangle { tau } => {
                    assert_eq!(s.sign, Sign::Minus);
                    for v in tau {
                        assert_eq!(s.symbol(v), QuerySymbol::X);
                    }
                }
                _ => assert_eq!(s.sign, Sign::Plus),
            }
        }
    }

    #[test]
    fn honest_expectations_match_table() {
        for g in [Graph::complete(3), build_triangular_lattice(2, 3).unwrap(), build_triangular_lattice(3, 3).unwrap()] {
            let h = honest_strategy(&g).unwrap();
            for s in build_settings(&g).unwrap() {
                let e = h.exact_expectation(s.symbols(), s.sign).unwrap();
                assert!((e - s.honest_expectation).abs() < 1e-10, "{s}: {e}");
            }
        }
    }

    #[test]
    fn honest_test_closed_form() {
        let g = Graph::complete(3);
        let closed = honest_test_acceptance(&g).unwrap();
        assert!((closed - HONEST_K3).abs() < 1e-12);
        let exact = exact_test_acceptance(&honest_strategy(&g).unwrap(), &build_settings(&g).unwrap()).unwrap();
        assert!((closed - exact).abs() < 1e-12);
    }

    #[test]
    fn hoeffding_examples() {
        assert_eq!(hoeffding_trials(0.1, 2.0 / 3.0).unwrap(), 359);
        assert_eq!(hoeffding_trials(1.0, 0.5).unwrap(), 3);
        assert!(matches!(hoeffding_trials(0.0, 0.5), Err(ProtocolError::NonPositiveGap(_))));
        assert!(matches!(hoeffding_trials(1e-6, 0.9), Err(ProtocolError::TrialCap { .. })));
        assert!(hoeffding_trials(0.1, 1.0).is_err());
    }

    #[test]
    fn all_plus_rejected_by_triangle() {
        let p = k3();
        let s = classical_strategy(ClassicalAssignment::constant(3, Sign::Plus));
        let tri = p.settings().iter().position(|s| s.family.name() == "triangle").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let only = &p.settings()[tri..tri + 1];
        let r = run_test(only, &[0, 1, 2], &mut s.session(0), &mut rng).unwrap();
        assert!(!r.accepted);
        assert_eq!(r.combined, Sign::Minus);
    }

    #[test]
    fn test_queries_every_prover_once() {
        let p = k3();
        let s = honest_strategy(p.graph()).unwrap();
        for i in 0..200 {
            let r = p.run_trial(&s, 0.0, 5, i).unwrap();
            let mut seen: Vec<usize> = r.transcript.iter().map(|e| e.vertex).collect();
            assert_eq!(seen, vec![0, 1, 2]);
            seen.dedup();
            assert_eq!(seen.len(), 3);
        }
    }

    #[test]
    fn q_extremes_pick_branch() {
        let p = k3();
        let s = honest_strategy(p.graph()).unwrap();
        for i in 0..50 {
            assert_eq!(run_interactive_proof(&p, &s, 1.0, 3, i).unwrap().branch, Branch::Calculate);
            assert_eq!(run_interactive_proof(&p, &s, 0.0, 3, i).unwrap().branch, Branch::Test);
        }
        assert!(run_interactive_proof(&p, &s, 1.5, 3, 0).is_err());
    }

    #[test]
    fn mixture_value() {
        let p = k3();
        let s = honest_strategy(p.graph()).unwrap();
        let v = p.acceptance(&s, 0.5).unwrap();
        assert!((v - (0.5 + 0.5 * HONEST_K3)).abs() < 1e-12);
        assert!((v - 0.945_08).abs() < 1e-5);
    }

    #[test]
    fn amplify_is_reproducible_and_single_trial_reduces() {
        let p = k3();
        let s = noisy_strategy(p.graph(), 0.1).unwrap();
        let cfg = AmplifyConfig {
            q: 0.5,
            trials: 300,
            rule: ThresholdRule::Midpoint,
            c_ip: 0.9,
            s_ip: 0.5,
            master_seed: 11,
        };
        let a = amplify_gap(&p, &s, &cfg).unwrap();
        let b = amplify_gap(&p, &s, &cfg).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.summary, b.summary);
        assert_eq!(a.summary.test_trials + a.summary.calculate_trials, 300);

        let one = AmplifyConfig { trials: 1, ..cfg };
        let out = amplify_gap(&p, &s, &one).unwrap();
        let direct = run_interactive_proof(&p, &s, 0.5, 11, 0).unwrap();
        assert_eq!(out.records, vec![direct.clone()]);
        let want = if direct.accepted as u64 as f64 > one.threshold() { Decision::Accept } else { Decision::Reject };
        assert_eq!(out.decision, want);
    }

    #[test]
    fn threshold_rules() {
        assert_eq!(ThresholdRule::Midpoint.threshold(100, 0.9, 0.5), 70.0);
        assert!((ThresholdRule::PaperLiteral.threshold(100, 0.9, 0.5) - 20.0).abs() < 1e-9);
        assert_eq!("paper-literal".parse::<ThresholdRule>().unwrap(), ThresholdRule::PaperLiteral);
        assert!("median".parse::<ThresholdRule>().is_err());
    }

    #[test]
    fn optimize_q_picks_largest_gap() {
        let (pts, best) = optimize_q(&[0.0, 0.5, 1.0], (1.0, 0.89), (0.0, 0.8));
        assert_eq!(pts.len(), 3);
        assert_eq!(best.unwrap().q, 1.0);
        assert!((pts[1].gap - 0.545).abs() < 1e-12);
        assert!(optimize_q(&[], (1.0, 1.0), (0.0, 0.0)).1.is_none());
    }
}
