//! Self-test audit: residuals and swap-extraction fidelity under perturbation.
//!
//! ```bash
//! cargo run --release --example self_test_audit
//! ```

use graphproof::selftest::{audit, AUDIT_TOL};
use graphproof::{honest_strategy, perturbed_strategy, Graph};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = Graph::complete(3);
    let honest = audit(&g, &honest_strategy(&g)?, AUDIT_TOL)?;
    println!("honest: passed = {}, fidelity = {:.12}", honest.passed, honest.fidelity().unwrap_or(0.0));

    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "theta", "max dev", "anticomm", "D resid", "fidelity");
    for theta in [0.05, 0.1, 0.2, 0.4] {
        let r = audit(&g, &perturbed_strategy(&g, theta)?, AUDIT_TOL)?;
        println!(
            "{theta:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.9}",
            r.max_deviation,
            r.max_anticommutation(),
            r.max_d_residual(),
            r.fidelity().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
