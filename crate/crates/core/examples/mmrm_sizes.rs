//! MMRM under monotone dropout: sizes and powers for four covariance structures.

use tsize::mmrm::{mmrm_power, mmrm_power_approx, mmrm_size_chain, MmrmDesign};
use tsize::tables::{hamd_retention, hamd_structures};

fn main() -> tsize::Result<()> {
    let (alpha, p) = (0.05, 0.9);
    println!("{:<6}{:>10}{:>10}{:>10}{:>10}{:>6}{:>9}{:>9}", "", "inversion", "normal", "g1", "g2", "n", "KR", "asym");
    for (name, sigma) in hamd_structures() {
        let d = MmrmDesign::new(sigma, hamd_retention(), 0.5, 1, -8.0, 0.0)?;
        let c = mmrm_size_chain(&d, alpha, p)?;
        let n = c.g2.ceil();
        println!(
            "{name:<6}{:>10.2}{:>10.2}{:>10.2}{:>10.2}{n:>6}{:>8.2}%{:>8.2}%",
            c.inversion,
            c.n_a,
            c.g1,
            c.g2,
            100.0 * mmrm_power(&d, n, alpha)?.value,
            100.0 * mmrm_power_approx(&d, n, alpha)?.value,
        );
    }
    Ok(())
}
