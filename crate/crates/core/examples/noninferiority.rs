//! Noninferiority: the kernel tested one-tailed against a margin.

use tsize::designs::{moser_one_sided_power, two_sample_kernel, TwoSampleSpec};
use tsize::kernel::{apply_ni_margin, power, size_chain};

fn main() -> tsize::Result<()> {
    // new treatment assumed equal to control, margin -0.4
    let s = TwoSampleSpec::equal(0.0, 0.0, 1.0, 0.5);
    let k = apply_ni_margin(&two_sample_kernel(&s, 0.0)?, -0.4)?;
    for est in size_chain(&k, 0.05, 0.8)? {
        println!("{:<10} {:>8.2}", est.method.label(), est.fractional);
    }
    println!("one-sided power at n = 200: {:.2}%", 100.0 * power(&k, 200.0, 0.05)?.value);

    let w = TwoSampleSpec::unequal(0.0, 0.0, 1.0, 2.0, 0.5);
    let p = moser_one_sided_power(&w, -0.4, 300.0, 0.05)?;
    println!("Welch, variances 1 and 2, n = 300: {:.2}%", 100.0 * p.value);
    Ok(())
}
