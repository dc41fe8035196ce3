//! One-sample t test: every size method and the power at the rounded size.

use tsize::designs::one_sample_kernel;
use tsize::kernel::{power_two_sided, size_chain, Rounding};

fn main() -> tsize::Result<()> {
    // mean change 0.6 against 0, unit variance
    let k = one_sample_kernel(0.6, 0.0, 1.0)?;
    let (alpha, target) = (0.05, 0.9);

    for est in size_chain(&k, alpha, target)? {
        let est = est.rounded(&k.allocation, Rounding::Up);
        println!("{:<10} {:>8.2}  -> {}", est.method.label(), est.fractional, est.rounded_total);
    }

    for n in [28.0, 30.0, 32.0] {
        println!("power at n = {n}: {:.2}%", 100.0 * power_two_sided(&k, n, alpha)?.value);
    }
    Ok(())
}
