// Lists L(4,f) for both fields and regenerates each list from the
// resonance case split.

use std::error::Error;

use trilie::catalog::{enumerate_l4, table_entries};
use trilie::family::FieldFlag;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for field in [FieldFlag::Complex, FieldFlag::Real] {
        for f in 1..=3 {
            let table = table_entries(4, f, field)?;
            let names: Vec<&str> = table.iter().map(|e| e.name.as_str()).collect();
            println!("L(4,{f}) over {field}: {} [{}]", table.len(), names.join(" "));
        }
    }
    for e in enumerate_l4(1, FieldFlag::Real)? {
        println!("  {:<44} -> {}", e.branch, e.name);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("classify_l4");
}
