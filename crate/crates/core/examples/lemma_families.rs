// General n: the slot form of a single structure matrix, the unique
// L(n, n-1), and the enumerated L(n,1) list.

use std::error::Error;

use trilie::catalog::{enumerate_ln1, lnn1_family};
use trilie::family::FieldFlag;
use trilie::jacobi::{check_family, lemma1_family};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let general = lemma1_family(5, 1)?;
    let m = &general.matrices[0];
    println!("slot form for n = 5: {} parameters, {} off-diagonal slots", general.variables().len(), m.off_diagonal().len());
    assert!(check_family(&general, 3, 1)?.passed());

    for n in 4..=6 {
        let e = lnn1_family(n)?;
        assert!(check_family(&e.family, 1, 1)?.passed());
        println!("{}: {} commuting diagonal matrices", e.name, e.family.f());
    }
    for n in 5..=6 {
        for field in [FieldFlag::Complex, FieldFlag::Real] {
            let list = enumerate_ln1(n, field)?;
            let most = list.iter().map(|e| e.family.matrices[0].off_diagonal().len()).max().unwrap_or(0);
            println!("L({n},1) over {field}: {} branches, at most {most} off-diagonal entries", list.len());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("lemma_families");
}
