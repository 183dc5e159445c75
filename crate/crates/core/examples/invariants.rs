// Invariant signatures of assembled table entries.

use std::collections::BTreeMap;
use std::error::Error;

use trilie::catalog::{assemble, invariant_signature, table_entries};
use trilie::family::FieldFlag;
use trilie::scalar::int;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for f in 1..=3 {
        for e in table_entries(4, f, FieldFlag::Real)? {
            let values: BTreeMap<String, _> = e.params().iter().map(|p| (p.name.clone(), int(2))).collect();
            let alg = assemble(&e, &values)?;
            let sig = invariant_signature(&alg);
            assert!(sig.nilradical_bound_holds());
            println!(
                "{:<9} dim {} derived {:?} center {} diagonal rank {}",
                e.name, sig.dim, sig.derived_series, sig.center_dim, sig.diagonal_rank
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("invariants");
}
