//! Rewrites `fixtures/synthetic_3regime.csv` from its seeded generator.

use epochscope::synthetic::three_regime_fixture;

fn main() -> std::io::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/synthetic_3regime.csv");
    std::fs::write(path, three_regime_fixture().to_csv())?;
    println!("wrote {path}");
    Ok(())
}
