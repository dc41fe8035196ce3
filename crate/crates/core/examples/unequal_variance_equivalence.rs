//! Equivalence of two means with unequal variances, analysed by Welch CIs.

use tsize::designs::{two_sample_kernel, TwoSampleSpec};
use tsize::equivalence::{equiv_size_symmetric, ts_unequal_equiv_power, Margins};
use tsize::kernel::SizeMethod;

fn main() -> tsize::Result<()> {
    let s = TwoSampleSpec::unequal(0.0, 0.0, 1.0, 4.0, 0.5);
    let k = two_sample_kernel(&s, 0.0)?;
    for mu in [0.5, 1.0, 1.5] {
        let m = Margins::symmetric(mu)?;
        let g2 = equiv_size_symmetric(&k, &m, 0.05, 0.8, SizeMethod::G2)?.fractional;
        println!("margins ±{mu}: g2 size {g2:.2}");
        for per_arm in [(g2 / 2.0).round(), (g2 / 4.0).round()] {
            let n = 2.0 * per_arm;
            let exact = ts_unequal_equiv_power(&s, &m, n, 0.05, true)?;
            let approx = ts_unequal_equiv_power(&s, &m, n, 0.05, false)?;
            println!("  {per_arm} per arm: exact {:.2}%  approx {:.2}%", 100.0 * exact.value, 100.0 * approx.value);
        }
    }
    Ok(())
}
