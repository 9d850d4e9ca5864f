//! A hand-written strategy file: prover 1 answers Z with an X measurement.
//!
//! ```bash
//! cargo run --example custom_strategy
//! ```

use graphproof::config::StrategySpec;
use graphproof::protocol::exact_test_acceptance;
use graphproof::selftest::{audit, AUDIT_TOL};
use graphproof::{build_settings, Graph};

const STRATEGY: &str = r#"
kind = "custom"

[[observables]]
vertex = 1
symbol = "Z"
matrix = "0 1; 1 0"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = Graph::complete(3);
    let s = StrategySpec::from_toml(STRATEGY)?.build(&g)?;
    println!("TEST acceptance {:.6}", exact_test_acceptance(&s, &build_settings(&g)?)?);

    let r = audit(&g, &s, AUDIT_TOL)?;
    for row in r.settings.iter().filter(|d| d.deviation > AUDIT_TOL) {
        println!("  {:<10} measured {:+.4} honest {:+.4}", row.family.name(), row.measured, row.honest);
    }
    for v in &r.vertices {
        println!("  vertex {} anticommutation residual {:.4}", v.vertex, v.anticommutation);
    }
    println!("passed = {}", r.passed);
    Ok(())
}
