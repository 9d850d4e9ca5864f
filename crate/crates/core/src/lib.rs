//! Many-prover interactive proofs built from self-tested graph states.
//!
//! The verifier is classical: it draws either an honesty TEST (one setting
//! from the stabilizer-derived family, each prover queried once) or a
//! CALCULATE run (an adaptive measurement pattern on the graph state), and
//! amplifies the one-shot gap by thresholding repeated trials. Provers are
//! simulated exactly on a dense state vector and can only interact with the
//! verifier through a single-query session.

pub mod cli;
pub mod config;
pub mod error;
pub mod graph;
pub mod mbqc;
pub mod protocol;
pub mod provers;
pub mod quantum;
pub mod selftest;
pub mod stats;

pub use error::{GraphError, PatternError, ProtocolError, ProverError, QuantumError};
pub use graph::{build_triangular_lattice, BitVector, Graph, GraphSpec, Triangle};
pub use mbqc::{builtin_pattern, MeasurementPattern, PatternSpec};
pub use protocol::{
    amplify_gap, build_settings, hoeffding_trials, AmplifyConfig, Decision, MeasurementSetting, Protocol,
    ThresholdRule,
};
pub use provers::{
    classical_strategy, honest_strategy, noisy_strategy, optimal_classical_acceptance, perturbed_strategy,
    ClassicalAssignment, ProverStrategy, QuerySymbol,
};
pub use quantum::{make_graph_state, PureState, Sign};
pub use stats::Estimate;
