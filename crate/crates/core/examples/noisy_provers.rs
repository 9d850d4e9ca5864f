//! Response noise: acceptance falls with the flip probability.
//!
//! ```bash
//! cargo run --release --example noisy_provers
//! ```

use graphproof::{builtin_pattern, noisy_strategy, Estimate, Graph, Protocol};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = Graph::complete(3);
    let protocol = Protocol::new(g.clone(), builtin_pattern(&g, "triangle-parity")?)?;
    let trials = 10_000;
    println!("{:>5} {:>10} {:>10} {:>22}", "eps", "exact", "sampled", "95% CI");
    for eps in [0.0, 0.02, 0.05, 0.1, 0.2] {
        let s = noisy_strategy(&g, eps)?;
        let exact = protocol.acceptance(&s, 0.5)?;
        let r = protocol.run_trials(&s, 0.5, 3, trials)?;
        let e = Estimate::new(r.iter().filter(|t| t.accepted).count() as u64, trials);
        println!("{eps:>5} {exact:>10.6} {:>10.4} [{:.4}, {:.4}]", e.mean, e.ci_low, e.ci_high);
    }
    Ok(())
}
