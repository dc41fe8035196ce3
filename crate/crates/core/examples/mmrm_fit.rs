//! Draw one MMRM trial and fit it with sequential per-visit regressions.

use tsize::simulate::{analyze_mmrm, replicate_dataset, Generator, ScenarioSpec};
use tsize::tables::{hamd_retention, hamd_unstructured};

fn main() -> tsize::Result<()> {
    let sc = ScenarioSpec {
        generator: Generator::Mmrm {
            sigma: hamd_unstructured(),
            retention: hamd_retention(),
            mu: vec![3.3, 2.7, 2.9, 1.0],
            alpha: vec![0.72, 0.69, 0.61, 0.67],
            tau: vec![0.1, -1.5, -2.3, -8.0],
            strata: None,
        },
        replicates: 1,
        seed: 3,
    };
    let data = replicate_dataset(&sc, [60, 60], 0)?;
    let completers = data.observed.iter().filter(|&&v| v == 4).count();
    println!("{} subjects, {completers} complete", data.len());

    let fit = analyze_mmrm(&data)?;
    println!("effect at the last visit {:.3} (se {:.3}, df {:.1})", fit.tau_hat_p, fit.se(), fit.satterthwaite_df);
    for (j, s) in fit.sigma_hat_sq.iter().enumerate() {
        println!("visit {} innovation variance {s:.2}", j + 1);
    }
    Ok(())
}
