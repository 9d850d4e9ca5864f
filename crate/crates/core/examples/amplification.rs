//! Gap amplification: repeat the one-shot protocol and threshold the count.
//!
//! ```bash
//! cargo run --release --example amplification
//! ```

use graphproof::protocol::ThresholdRule;
use graphproof::{amplify_gap, builtin_pattern, classical_strategy, hoeffding_trials, honest_strategy};
use graphproof::{AmplifyConfig, Graph, Protocol};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = Graph::complete(3);
    let protocol = Protocol::new(g.clone(), builtin_pattern(&g, "triangle-parity")?)?;
    let q = 0.5;
    let honest = honest_strategy(&g)?;
    let c_ip = protocol.acceptance(&honest, q)?;
    let (s_ip, witness) = protocol.best_classical(q)?;
    let trials = hoeffding_trials(c_ip - s_ip, 2.0 / 3.0)?;
    println!("c_ip {c_ip:.6}, s_ip {s_ip:.6}, N = {trials}");

    let adversary = classical_strategy(witness);
    for (name, s) in [("honest", &honest), ("best classical", &adversary)] {
        let cfg = AmplifyConfig { q, trials, rule: ThresholdRule::Midpoint, c_ip, s_ip, master_seed: 1 };
        let out = amplify_gap(&protocol, s, &cfg)?;
        println!(
            "{name:>15}: M = {} / {} vs threshold {:.1} -> {:?}",
            out.summary.accepted, trials, out.summary.threshold, out.decision
        );
    }
    Ok(())
}
