//! TOML configuration: strategy specs, run configs and sweep grids.
//!
//! Graph, strategy and pattern sections may be given inline or as a path to
//! a separate file, resolved relative to the config file's directory.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{GraphError, PatternError, ProtocolError, ProverError};
use crate::graph::{Graph, GraphSpec};
use crate::mbqc::PatternSpec;
use crate::protocol::{Protocol, ThresholdRule};
use crate::provers::{
    self, ClassicalAssignment, ProverStrategy, QuerySymbol,
};
use crate::quantum::{self, Matrix, PureState, Sign, C64};

/// Projection to the nearest involution is only applied within this
/// distance; anything further is rejected as a malformed observable.
pub const MATRIX_POLISH_TOL: f64 = 1e-4;

/// Inline value or a path to a file holding it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(PathBuf),
    Inline(T),
}

impl<T: DeserializeOwned + Clone> Source<T> {
    pub fn resolve(&self, base: &Path) -> Result<T, ProtocolError> {
        match self {
            Source::Inline(t) => Ok(t.clone()),
            Source::Path(p) => load_toml(&base.join(p)),
        }
    }
}

/// Reads and parses a TOML file.
pub fn load_toml<T: DeserializeOwned>(path: &Path) -> Result<T, ProtocolError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ProtocolError::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| ProtocolError::Config(format!("{}: {e}", path.display())))
}

pub fn load_graph(path: &Path) -> Result<Graph, ProtocolError> {
    let spec: GraphSpec = load_toml(path)?;
    Ok(spec.build()?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    Honest,
    Noisy,
    Classical,
    Perturbed,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableEntry {
    pub vertex: usize,
    pub symbol: QuerySymbol,
    /// Rows separated by `;`, entries by whitespace, e.g. `"0 1; 1 0"`.
    /// Entries are complex literals such as `0.5`, `-1i` or `0.7+0.7i`.
    pub matrix: String,
}

/// Strategy spec file contents (TOML).
///
/// ```toml
/// kind = "perturbed"
/// theta = 0.3
/// ```
///
/// `classical` takes `assignment = [[x, z, dplus, dminus], ...]` with ±1
/// entries, or `constant = ±1`. `custom` takes `dims`, `state` (`"graph"` or
/// whitespace-separated complex amplitudes) and `[[observables]]` overriding
/// the Pauli defaults on qubit sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub kind: StrategyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Vec<[i8; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observables: Vec<ObservableEntry>,
}

impl StrategySpec {
    pub fn of_kind(kind: StrategyName) -> Self {
        Self {
            kind,
            eps: None,
            theta: None,
            assignment: None,
            constant: None,
            dims: None,
            state: None,
            observables: Vec::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ProverError> {
        toml::from_str(text).map_err(|e| ProverError::Spec(e.to_string()))
    }

    pub fn build(&self, g: &Graph) -> Result<ProverStrategy, ProverError> {
        let spec_err = |m: &str| ProverError::Spec(m.to_string());
        let n = g.n();
        let strategy = match self.kind {
            StrategyName::Honest => provers::honest_strategy(g)?,
            StrategyName::Noisy => {
                provers::noisy_strategy(g, self.eps.ok_or_else(|| spec_err("noisy needs `eps`"))?)?
            }
            StrategyName::Perturbed => provers::perturbed_strategy(
                g,
                self.theta.ok_or_else(|| spec_err("perturbed needs `theta`"))?,
            )?,
            StrategyName::Classical => {
                let a = match (&self.assignment, self.constant) {
                    (Some(rows), None) => {
                        if rows.len() != n {
                            return Err(ProverError::AssignmentSize { expected: n, found: rows.len() });
                        }
                        let values = rows
                            .iter()
                            .map(|r| {
                                let mut out = [Sign::Plus; 4];
                                for (k, &x) in r.iter().enumerate() {
                                    out[k] = Sign::try_from(x).map_err(|_| spec_err("assignment entries must be ±1"))?;
                                }
                                Ok(out)
                            })
                            .collect::<Result<Vec<_>, ProverError>>()?;
                        ClassicalAssignment::new(values)
                    }
                    (None, Some(c)) => ClassicalAssignment::constant(
                        n,
                        Sign::try_from(c).map_err(|_| spec_err("`constant` must be ±1"))?,
                    ),
                    _ => return Err(spec_err("classical needs exactly one of `assignment` or `constant`")),
                };
                provers::classical_strategy(a)
            }
            StrategyName::Custom => self.build_custom(g)?,
        };
        match (self.kind, self.eps) {
            (StrategyName::Noisy, _) | (_, None) => Ok(strategy),
            (StrategyName::Classical, Some(_)) => Err(spec_err("classical strategies take no `eps`")),
            (_, Some(eps)) => strategy.with_noise(eps),
        }
    }

    fn build_custom(&self, g: &Graph) -> Result<ProverStrategy, ProverError> {
        let n = g.n();
        let dims = self.dims.clone().unwrap_or_else(|| vec![2; n]);
        if dims.len() != n {
            return Err(ProverError::Spec(format!("`dims` has {} entries for {n} provers", dims.len())));
        }
        let state = match self.state.as_deref() {
            None | Some("graph") => {
                if dims.iter().any(|&d| d != 2) {
                    return Err(ProverError::Spec("`state = \"graph\"` needs qubit sites".into()));
                }
                quantum::make_graph_state(g)?
            }
            Some(text) => {
                let amps = text
                    .split_whitespace()
                    .map(parse_complex)
                    .collect::<Result<Vec<_>, _>>()?;
                PureState::normalized(dims.clone(), amps)?
            }
        };
        let mut table: Vec<[Option<Matrix>; 4]> = dims
            .iter()
            .map(|&d| {
                if d == 2 {
                    QuerySymbol::MEASURED.map(|s| Some(s.honest_matrix()))
                } else {
                    [None, None, None, None]
                }
            })
            .collect();
        for e in &self.observables {
            let k = e
                .symbol
                .index()
                .ok_or_else(|| ProverError::Spec("Identity observables are fixed".into()))?;
            let row = table
                .get_mut(e.vertex)
                .ok_or(ProverError::UnknownProver { vertex: e.vertex, n })?;
            row[k] = Some(parse_observable(&e.matrix)?);
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(v, row)| {
                let mut out = Vec::with_capacity(4);
                for (k, m) in row.into_iter().enumerate() {
                    out.push(m.ok_or(ProverError::MissingObservable {
                        vertex: v,
                        symbol: QuerySymbol::MEASURED[k],
                    })?);
                }
                Ok(out.try_into().expect("four observables"))
            })
            .collect::<Result<Vec<[Matrix; 4]>, ProverError>>()?;
        ProverStrategy::custom(state, table)
    }
}

fn parse_complex(s: &str) -> Result<C64, ProverError> {
    s.parse::<C64>()
        .map_err(|_| ProverError::Spec(format!("`{s}` is not a complex number")))
}

/// Parses matrix text and snaps it to the nearest Hermitian involution when
/// it is already within [`MATRIX_POLISH_TOL`] of one.
pub fn parse_observable(text: &str) -> Result<Matrix, ProverError> {
    let rows: Vec<Vec<C64>> = text
        .split(';')
        .map(|r| {
            r.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(parse_complex)
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(ProverError::Spec(format!("matrix `{text}` is not square")));
    }
    let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
    if quantum::involution_residual(&m) <= quantum::ALGEBRAIC_TOL {
        return Ok(m);
    }
    let polished = quantum::nearest_involution(&m);
    let dist = (&polished - &m).norm();
    if dist > MATRIX_POLISH_TOL {
        return Err(ProverError::Spec(format!(
            "matrix `{text}` is {dist:.2e} away from a ±1-valued observable"
        )));
    }
    Ok(polished)
}

/// Run config file contents (TOML).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: Source<GraphSpec>,
    pub strategy: Source<StrategySpec>,
    #[serde(default = "default_pattern")]
    pub pattern: Source<PatternSpec>,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default = "default_threshold")]
    pub threshold: ThresholdRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_ip: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_ip: Option<f64>,
    /// Confidence for the default trial count.
    #[serde(default = "default_confidence")]
    pub confidence: f64,
}

fn default_pattern() -> Source<PatternSpec> {
    Source::Inline(PatternSpec::builtin("triangle-parity"))
}

fn default_q() -> f64 {
    0.5
}

fn default_threshold() -> ThresholdRule {
    ThresholdRule::Midpoint
}

fn default_confidence() -> f64 {
    2.0 / 3.0
}

/// A run config with every file resolved.
#[derive(Clone, Debug)]
pub struct LoadedRun {
    pub config: RunConfig,
    pub protocol: Protocol,
    pub strategy: ProverStrategy,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<LoadedRun, ProtocolError> {
        let config: RunConfig = load_toml(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve(base)
    }

    pub fn resolve(self, base: &Path) -> Result<LoadedRun, ProtocolError> {
        let (graph, pattern) = resolve_graph_pattern(&self.graph, &self.pattern, base)?;
        let strategy = self.strategy.resolve(base)?.build(&graph)?;
        let protocol = Protocol::new(graph, pattern)?;
        Ok(LoadedRun { config: self, protocol, strategy })
    }
}

fn resolve_graph_pattern(
    graph: &Source<GraphSpec>,
    pattern: &Source<PatternSpec>,
    base: &Path,
) -> Result<(Graph, crate::mbqc::MeasurementPattern), ProtocolError> {
    let graph = graph.resolve(base)?.build().map_err(|e| match e {
        GraphError::Spec(m) => ProtocolError::Config(m),
        other => other.into(),
    })?;
    let pattern = pattern.resolve(base)?.build(&graph).map_err(|e| match e {
        PatternError::Spec(m) => ProtocolError::Config(m),
        other => other.into(),
    })?;
    Ok((graph, pattern))
}

/// Sweep config file contents (TOML).
///
/// Every `(q, eps, theta)` cell runs the honest strategy with rotation
/// `theta` and response noise `eps`. Each `q` additionally compares honest
/// provers against `adversary` (default: the best classical strategy).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub graph: Source<GraphSpec>,
    #[serde(default = "default_pattern")]
    pub pattern: Source<PatternSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary: Option<Source<StrategySpec>>,
    pub q: Vec<f64>,
    #[serde(default = "zero_grid")]
    pub eps: Vec<f64>,
    #[serde(default = "zero_grid")]
    pub theta: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sweep_trials")]
    pub trials: u64,
}

fn zero_grid() -> Vec<f64> {
    vec![0.0]
}

fn default_sweep_trials() -> u64 {
    1000
}

#[derive(Clone, Debug)]
pub struct LoadedSweep {
    pub config: SweepConfig,
    pub protocol: Protocol,
    pub adversary: Option<ProverStrategy>,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<LoadedSweep, ProtocolError> {
        let config: SweepConfig = load_toml(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve(base)
    }

    pub fn resolve(self, base: &Path) -> Result<LoadedSweep, ProtocolError> {
        for (name, grid) in [("q", &self.q), ("eps", &self.eps), ("theta", &self.theta)] {
            if grid.is_empty() {
                return Err(ProtocolError::Config(format!("`{name}` grid is empty")));
            }
        }
        if self.q.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(ProtocolError::Config("`q` values must lie in [0, 1]".into()));
        }
        if self.eps.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(ProtocolError::Config("`eps` values must lie in [0, 1]".into()));
        }
        if self.trials == 0 {
            return Err(ProtocolError::Config("need at least one trial per cell".into()));
        }
        let (graph, pattern) = resolve_graph_pattern(&self.graph, &self.pattern, base)?;
        let adversary = match &self.adversary {
            Some(s) => Some(s.resolve(base)?.build(&graph)?),
            None => None,
        };
        let protocol = Protocol::new(graph, pattern)?;
        Ok(LoadedSweep { config: self, protocol, adversary })
    }
}
