//! Load a design file and evaluate it, as the command-line tool does.

use std::path::Path;

use tsize::config::Study;
use tsize::kernel::Rounding;

fn main() -> tsize::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/table5_margin3.toml");
    let study = Study::load(&path)?;
    for r in study.sizes(Rounding::Nearest)? {
        println!("{:<18} {:>8.2} {:?}", r.method, r.fractional, r.groups);
    }
    for r in study.powers(24.0)? {
        println!("{:<18} {:>7.2}%", r.method, 100.0 * r.estimate.value);
    }
    Ok(())
}
