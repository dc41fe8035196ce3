//! Average bioequivalence in a 2×2 crossover on the log scale.

use tsize::designs::CrossoverSpec;
use tsize::equivalence::{be_adapter, equiv_power_approx, equiv_power_exact, equiv_size_symmetric, BeDesign};
use tsize::kernel::SizeMethod;

fn main() -> tsize::Result<()> {
    for sigma_sq in [0.0125, 0.05] {
        let c = CrossoverSpec {
            mu_star_a: 0.0,
            mu_star_b: 0.0,
            sigma_d_sq: 4.0 * sigma_sq,
            gamma0: 0.5,
            period_effect_in_analysis: true,
        };
        let be = be_adapter(&BeDesign::Crossover(c))?;
        println!("sigma^2 = {sigma_sq}, limits ({:.4}, {:.4}), alpha {}", be.margins.lower, be.margins.upper, be.alpha);
        for m in SizeMethod::ALL {
            let est = equiv_size_symmetric(&be.kernel, &be.margins, be.alpha, 0.8, m)?;
            println!("  {:<10} {:>7.2}", m.label(), est.fractional);
        }
        let n = 2.0 * (equiv_size_symmetric(&be.kernel, &be.margins, be.alpha, 0.8, SizeMethod::Inversion)?.fractional / 2.0).round();
        println!(
            "  power at {n} subjects: exact {:.2}%  approx {:.2}%",
            100.0 * equiv_power_exact(&be.kernel, &be.margins, n, be.alpha)?.value,
            100.0 * equiv_power_approx(&be.kernel, &be.margins, n, be.alpha)?.value,
        );
    }
    Ok(())
}
