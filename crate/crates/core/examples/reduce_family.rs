// Disguises a table entry by random equivalences and reduces it back.
// Also shows the one entry whose class depends on the field.

use std::collections::BTreeMap;
use std::error::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trilie::canonical::{reduce_to_canonical, scramble};
use trilie::catalog::{identify, table_entries};
use trilie::family::{FieldFlag, DEFAULT_SEED};
use trilie::scalar::ratio;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let k25 = table_entries(4, 2, FieldFlag::Real)?.into_iter().find(|e| e.name == "K_{2,5}").unwrap();
    let point = k25.family.bind(&BTreeMap::from([("a".to_string(), ratio(3, 2))]))?;
    let disguised = scramble(&point, &mut rng)?;
    println!("disguised A1 has {} off-diagonal entries", disguised.matrices[0].off_diagonal().len());

    let red = reduce_to_canonical(&disguised, FieldFlag::Real)?;
    for step in &red.log {
        println!("  {step}");
    }
    let id = identify(&red.family, FieldFlag::Real)?.expect("a table entry");
    println!("identified {} with a = {}", id.name, id.values["a"]);
    assert_eq!(id.name, "K_{2,5}");

    let r113 = table_entries(4, 1, FieldFlag::Real)?.pop().unwrap();
    for field in [FieldFlag::Real, FieldFlag::Complex] {
        let canon = reduce_to_canonical(&r113.family, field)?.family;
        let name = identify(&canon, field)?.map(|i| i.name).unwrap_or_default();
        println!("{} over {field} -> {name}", r113.name);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("reduce_family");
}
