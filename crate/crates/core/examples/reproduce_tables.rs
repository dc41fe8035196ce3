//! Write the deterministic columns of the six worked tables as CSV.
//!
//! `cargo run --release --example reproduce_tables [table]`

fn main() -> tsize::Result<()> {
    let which: Vec<u8> = match std::env::args().nth(1) {
        Some(t) => vec![t.parse().map_err(|_| tsize::Error::Config(format!("bad table `{t}`")))?],
        None => (1..=6).collect(),
    };
    let stdout = std::io::stdout();
    for t in which {
        tsize::tables::write_csv(&tsize::tables::reproduce(t)?, stdout.lock())?;
    }
    Ok(())
}
