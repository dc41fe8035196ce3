//! Equivalence with the effect off-centre: size bounds plus the inverted exact power.

use tsize::designs::{two_sample_kernel, TwoSampleSpec};
use tsize::equivalence::{equiv_power_exact, equiv_size_bounds, Margins};
use tsize::kernel::size_invert;

fn main() -> tsize::Result<()> {
    let s = TwoSampleSpec::equal(0.0, 0.1, 1.0, 0.5);
    let k = two_sample_kernel(&s, 0.0)?;
    let m = Margins::equivalence(-0.5, 0.5)?;
    let b = equiv_size_bounds(&k, &m, 0.05, 0.8)?;
    println!("g1 in [{:.2}, {:.2}]", b.g1_lower.fractional, b.g1_upper.fractional);
    println!("g2 in [{:.2}, {:.2}]", b.g2_lower.fractional, b.g2_upper.fractional);
    let n = size_invert(|n| Ok(equiv_power_exact(&k, &m, n, 0.05)?.value), 0.8, b.g2_upper.fractional, k.min_n)?;
    println!("inversion {n:.2}");
    Ok(())
}
