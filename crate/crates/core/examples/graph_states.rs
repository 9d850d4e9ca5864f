//! Graph states on triangular lattices and their stabilizers.
//!
//! ```bash
//! cargo run --example graph_states
//! ```

use graphproof::graph::stabilizer_sign;
use graphproof::protocol::FamilyTag;
use graphproof::{build_settings, build_triangular_lattice, honest_strategy, make_graph_state, BitVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = build_triangular_lattice(2, 3)?;
    println!("2x3 lattice: {} vertices, {} edges", g.n(), g.edge_count());
    println!("triangle cover: {:?}", g.triangle_cover()?);

    let psi = make_graph_state(&g)?;
    println!("|G> has {} amplitudes, norm^2 = {:.12}", psi.dimension(), psi.norm_sqr());

    // Every generator and every cover triangle stabilizes |G>.
    let honest = honest_strategy(&g)?;
    for s in build_settings(&g)? {
        if matches!(s.family, FamilyTag::Generator { .. } | FamilyTag::Triangle { .. }) {
            let e = honest.exact_expectation(s.symbols(), s.sign)?;
            println!("  <{s}> = {e:+.12}");
        }
    }

    for tau in g.triangle_cover()? {
        let t = BitVector::from_support(g.n(), *tau);
        println!("sign of X^tau Z^(A tau) for {tau:?}: {}", stabilizer_sign(&g, &t));
    }
    Ok(())
}
