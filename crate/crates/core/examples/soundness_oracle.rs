//! Exhaustive search over deterministic classical provers.
//!
//! ```bash
//! cargo run --release --example soundness_oracle
//! ```

use graphproof::protocol::honest_test_acceptance;
use graphproof::{build_settings, builtin_pattern, optimal_classical_acceptance, Graph, Protocol};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graphs = [
        ("K3", Graph::complete(3)),
        ("two triangles", Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)])?),
    ];
    for (name, g) in graphs {
        let settings = build_settings(&g)?;
        let start = std::time::Instant::now();
        let (best, witness) = optimal_classical_acceptance(&g, &settings)?;
        let honest = honest_test_acceptance(&g)?;
        println!(
            "{name}: {} settings, classical {best:.6} vs honest {honest:.6}, gap {:.6} ({:.2?})",
            settings.len(),
            honest - best,
            start.elapsed()
        );
        println!("  witness rows [X, Z, D+, D-]: {:?}", witness.rows());
    }

    // Mixed with CALCULATE at q, the classical optimum shifts.
    let g = Graph::complete(3);
    let protocol = Protocol::new(g.clone(), builtin_pattern(&g, "triangle-parity")?)?;
    for q in [0.0, 0.25, 0.5] {
        let (s, _) = protocol.best_classical(q)?;
        println!("q = {q}: best classical one-shot acceptance {s:.6}");
    }
    Ok(())
}
