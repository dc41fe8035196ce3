//! Seeded Monte Carlo check of a formula power.

use tsize::designs::{moser_exact_power, TwoSampleSpec};
use tsize::simulate::{simulate_power, Generator, Objective, ScenarioSpec};

fn main() -> tsize::Result<()> {
    let s = TwoSampleSpec::unequal(0.0, 1.0, 1.0, 4.0, 0.5);
    let formula = moser_exact_power(&s, 0.0, 82.0, 0.05)?.value;
    let sc = ScenarioSpec {
        generator: Generator::TwoSample { mu0: 0.0, mu1: 1.0, sigma0_sq: 1.0, sigma1_sq: 4.0, welch: true },
        replicates: 100_000,
        seed: 7,
    };
    let r = simulate_power(&sc, [41, 41], 0.05, Objective::TwoSided { tau0: 0.0 })?;
    println!("formula   {:.2}%", 100.0 * formula);
    println!("simulated {:.2}% ± {:.2} over {} replicates in {:.2?}", 100.0 * r.power_hat, 100.0 * r.std_error, r.replicates, r.wall_time);
    println!("|z| = {:.2}", r.z_score(formula));
    Ok(())
}
