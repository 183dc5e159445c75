// Builds T(n), lists its brackets and checks the central series against
// the closed form.

use std::error::Error;

use trilie::liecore::{central_series, check_jacobi, derived_series};
use trilie::triangular::{build_tn, tn_central_series_formula};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let t = build_tn(4)?;
    let alg = t.algebra();
    println!("T(4): dim {}", alg.dim());
    for (x, y, z, c) in alg.canonical_constants() {
        let names = alg.basis_names();
        println!("  [{}, {}] = {c} {}", names[x], names[y], names[z]);
    }
    assert!(check_jacobi(alg).is_ok());

    for n in 3..=7 {
        let t = build_tn(n)?;
        let cs = central_series(t.algebra());
        assert_eq!(cs, tn_central_series_formula(n));
        println!("n = {n}: central series {cs:?}, derived series {:?}", derived_series(t.algebra()));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("construct_tn");
}
