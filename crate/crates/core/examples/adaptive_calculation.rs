//! CALCULATE with feed-forward: a later basis depends on earlier outcomes.
//!
//! ```bash
//! cargo run --example adaptive_calculation
//! ```

use graphproof::mbqc::{execute, exact_acceptance, validate_pattern};
use graphproof::{builtin_pattern, honest_strategy, Graph, PatternSpec};

const PATTERN: &str = r#"
name = "adaptive"
order = [0, 1, 2]
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

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = Graph::complete(3);
    let honest = honest_strategy(&g)?;

    let pattern = PatternSpec::from_toml(PATTERN)?.build(&g)?;
    if let Err(diags) = validate_pattern(&pattern, &g) {
        for d in diags {
            eprintln!("{d}");
        }
        return Err("invalid pattern".into());
    }

    for seed in 0..4 {
        let mut session = honest.session(seed);
        let run = execute(&pattern, &mut session)?;
        let line: Vec<String> = run
            .transcript
            .iter()
            .map(|e| format!("{}@{}={:+}", e.symbol, e.vertex, e.outcome.value()))
            .collect();
        println!("seed {seed}: {}  -> {}", line.join(" "), if run.accepted { "ACCEPT" } else { "REJECT" });
    }
    println!("exact ACCEPT probability {:.9}", exact_acceptance(&pattern, &honest)?);

    let demo = builtin_pattern(&g, "adaptive-demo")?;
    println!("builtin adaptive-demo    {:.9}", exact_acceptance(&demo, &honest)?);
    let check = builtin_pattern(&g, "triangle-parity")?;
    println!("builtin triangle-parity  {:.9}", exact_acceptance(&check, &honest)?);
    Ok(())
}
