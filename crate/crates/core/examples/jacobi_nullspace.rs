// The [X, N_a, N_b] Jacobi constraints are linear in the entries of one
// structure matrix. Their solutions are exactly the slot form plus what a
// shift X -> X + N can produce.

use std::error::Error;

use trilie::jacobi::{lemma1_plus_mu_span, xnn_system};
use trilie::linalg::rank_of;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for n in 3..=5 {
        let sys = xnn_system(n)?;
        let null = sys.nullspace();
        println!(
            "n = {n}: {} unknowns, {} equations, nullspace dim {}",
            sys.num_unknowns(),
            sys.num_equations(),
            null.len()
        );
        if n == 4 {
            for row in sys.rows().take(4) {
                println!("  {}", sys.format_row(row));
            }
        }
        if n >= 4 {
            let span = lemma1_plus_mu_span(n)?;
            let both: Vec<_> = null.iter().chain(&span).cloned().collect();
            // equal spans: the union has the rank of each part
            assert_eq!(rank_of(&span), null.len());
            assert_eq!(rank_of(&both), null.len());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("jacobi_nullspace");
}
