// Writes a family to the JSON interchange format, reads it back and runs
// the CLI checks on it.

use std::error::Error;

use trilie::catalog::table_entries;
use trilie::cli;
use trilie::document::AlgebraDocument;
use trilie::family::FieldFlag;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let k22 = &table_entries(4, 2, FieldFlag::Complex)?[1];
    let doc = AlgebraDocument::from_family(&k22.family, Some(&k22.name));
    let text = doc.to_json();
    println!("{text}");
    let back = AlgebraDocument::parse(&text)?;
    assert_eq!(back.to_family()?, k22.family);

    let dir = std::env::temp_dir().join(format!("trilie-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("k22.json");
    std::fs::write(&path, &text)?;
    let out = cli::run(["trilie", "verify", path.to_str().unwrap()]);
    print!("{}", out.stdout);
    assert_eq!(out.code, 0);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("file_format");
}
