//! Two-sample superiority sizes, pooled and Welch, over a grid of effects.

use tsize::designs::{two_sample_kernel, TwoSampleSpec};
use tsize::kernel::{size_g1, size_g2, size_normal, size_two_step};
use tsize::tables::two_sample_exact_size;

fn main() -> tsize::Result<()> {
    let (alpha, p) = (0.05, 0.8);
    println!("{:>8} {:>8} {:>8} {:>8} {:>8} {:>8}", "effect", "exact", "normal", "2-step", "g1", "g2");
    for (label, var1) in [("equal variances", 1.0), ("variances 1 and 4", 4.0)] {
        println!("{label}");
        for d in [0.5, 1.0, 1.5, 2.0] {
            let s = if var1 == 1.0 {
                TwoSampleSpec::equal(0.0, d, 1.0, 0.5)
            } else {
                TwoSampleSpec::unequal(0.0, d, 1.0, var1, 0.5)
            };
            let k = two_sample_kernel(&s, 0.0)?;
            println!(
                "{d:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>8.2}",
                two_sample_exact_size(&s, alpha, p)?,
                size_normal(&k, alpha, p)?.fractional,
                size_two_step(&k, alpha, p)?.fractional,
                size_g1(&k, alpha, p)?.fractional,
                size_g2(&k, alpha, p)?.fractional,
            );
        }
    }
    Ok(())
}
