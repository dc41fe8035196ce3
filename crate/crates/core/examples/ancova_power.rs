//! ANCOVA with normal covariates: size procedure and the three powers.

use tsize::ancova::{ancova_power_approx, ancova_power_asymptotic_t, ancova_power_exact, ancova_size_chain, AncovaSpec};

fn main() -> tsize::Result<()> {
    let (alpha, p) = (0.05, 0.8);
    for q in [1, 3] {
        let s = AncovaSpec::new(1.5, 0.0, 1.0, 0.5, q)?;
        let c = ancova_size_chain(&s, alpha, p)?;
        println!("q = {q}");
        println!("  inversion {:.2}  normal {:.2}  inflated {:.2}", c.inversion, c.n_asy, c.n_tilde);
        println!("  two-step {:.2}  g1 {:.2}  g2 {:.2}", c.two_step, c.g1, c.g2);
        let n = 2.0 * (c.inversion / 2.0).ceil();
        println!(
            "  power at n = {n}: exact {:.2}%  approx {:.2}%  asymptotic t {:.2}%",
            100.0 * ancova_power_exact(&s, n, alpha)?.value,
            100.0 * ancova_power_approx(&s, n, alpha)?.value,
            100.0 * ancova_power_asymptotic_t(&s, n, alpha)?.value,
        );
    }
    Ok(())
}
