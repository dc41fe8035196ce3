//! Seeded Monte Carlo verification of the power formulas.
//!
//! Each replicate draws from its own ChaCha8 stream (`seed`, stream =
//! replicate index), so a report depends only on the seed and the scenario,
//! never on the number of worker threads.

mod fit;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::designs::satterthwaite_df;
use crate::dist::{t_sf, Dof, Noncentrality};
use crate::equivalence::Margins;
use crate::error::{domain, Error, Result};
use crate::mmrm::{ldl_decompose, Matrix};

pub use fit::{analyze_ancova, analyze_mmrm, AncovaFit, Dataset, MmrmFit};

/// Categorical prognostic factor: level intercept shifts and probabilities.
/// Enters the analysis as `levels − 1` indicators (the last level is the
/// reference).
#[derive(Debug, Clone, PartialEq)]
pub struct Strata {
    pub eta: Vec<f64>,
    pub probs: Vec<f64>,
}

impl Strata {
    fn validate(&self) -> Result<()> {
        if self.eta.len() != self.probs.len() || self.eta.len() < 2 {
            return domain("strata need matching eta and probs with at least two levels");
        }
        if self.probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (self.probs.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return domain("strata probabilities must lie in [0, 1] and sum to 1");
        }
        Ok(())
    }

    fn indicators(&self) -> usize {
        self.eta.len() - 1
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (s, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return s;
            }
        }
        self.probs.len() - 1
    }
}

/// Data-generating model for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// `y ~ N(mu, σ²)` for all `n0 + n1` subjects; one-sample t test.
    OneSample { mu: f64, sigma_sq: f64 },
    /// `y_g ~ N(mu_g, σ_g²)`; pooled t test, or Welch when `welch`.
    TwoSample { mu0: f64, mu1: f64, sigma0_sq: f64, sigma1_sq: f64, welch: bool },
    /// 2×2 crossover generated as period differences
    /// `d_1 ~ N(τ − δ, σ_d²)`, `d_0 ~ N(τ + δ, σ_d²)`.
    Crossover { tau: f64, sigma_d_sq: f64, period_delta: f64, period_effect_in_analysis: bool },
    /// `y ~ N(intercept + η_s + τg + βx, σ²)` with `x ~ N(0, 1)`.
    Ancova { tau: f64, sigma_sq: f64, intercept: f64, beta: f64, strata: Option<Strata> },
    /// Visit means `mu_j + alpha_j·y0 + tau_j·g (+ η_s)`, errors `N(0, Σ)`,
    /// baseline `y0 ~ N(0, 1)` and monotone dropout with the given
    /// retention. The analysis adjusts for `y0` and the strata indicators.
    Mmrm {
        sigma: Matrix,
        retention: [Vec<f64>; 2],
        mu: Vec<f64>,
        alpha: Vec<f64>,
        tau: Vec<f64>,
        strata: Option<Strata>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub generator: Generator,
    pub replicates: u64,
    pub seed: u64,
}

pub const DEFAULT_REPS_T: u64 = 100_000;
pub const DEFAULT_REPS_MMRM: u64 = 40_000;
/// Largest tolerated share of failed fits.
pub const MAX_FAILURE_SHARE: f64 = 1e-4;

/// What a replicate must show.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// Reject `τ = τ0` two-sided at level α.
    TwoSided { tau0: f64 },
    /// The whole `1 − α` CI lies inside the margins (one end may be infinite).
    Inside(Margins),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub rejections: u64,
    /// Replicates entering the rate (requested minus failures).
    pub replicates: u64,
    pub failures: u64,
    pub power_hat: f64,
    pub std_error: f64,
    pub seed: u64,
    pub wall_time: Duration,
}

impl SimReport {
    /// `|p − p̂| / SE`.
    pub fn z_score(&self, p: f64) -> f64 {
        let se = self.std_error.max(1e-12);
        (p - self.power_hat).abs() / se
    }
}

/// Estimate, its standard error and d.f. from one replicate.
#[derive(Debug, Clone, Copy)]
struct Inference {
    est: f64,
    se: f64,
    df: f64,
}

impl Objective {
    /// Decisions compare tail probabilities with α, avoiding a quantile per replicate.
    fn decide(&self, inf: Inference, alpha: f64) -> Result<bool> {
        let df = Dof::new(inf.df)?;
        let central = Noncentrality::new(0.0)?;
        match *self {
            Objective::TwoSided { tau0 } => {
                let t = ((inf.est - tau0) / inf.se).abs();
                Ok(2.0 * t_sf(t, df, central) < alpha)
            }
            Objective::Inside(m) => {
                let lower_ok = !m.lower.is_finite() || t_sf((inf.est - m.lower) / inf.se, df, central) < alpha / 2.0;
                let upper_ok = !m.upper.is_finite() || t_sf((m.upper - inf.est) / inf.se, df, central) < alpha / 2.0;
                Ok(lower_ok && upper_ok)
            }
        }
    }
}

impl Generator {
    fn validate(&self, n: [usize; 2]) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                domain(format!("{name} must be positive, got {v}"))
            }
        };
        match self {
            Generator::OneSample { sigma_sq, .. } => {
                positive("sigma_sq", *sigma_sq)?;
                if n[0] + n[1] < 2 {
                    return domain("one-sample test needs at least two subjects");
                }
            }
            Generator::TwoSample { sigma0_sq, sigma1_sq, .. } => {
                positive("sigma0_sq", *sigma0_sq)?;
                positive("sigma1_sq", *sigma1_sq)?;
                if n[0] < 2 || n[1] < 2 {
                    return domain("two-sample test needs at least two subjects per group");
                }
            }
            Generator::Crossover { sigma_d_sq, .. } => {
                positive("sigma_d_sq", *sigma_d_sq)?;
                if n[0] < 2 || n[1] < 2 {
                    return domain("crossover needs at least two subjects per sequence");
                }
            }
            Generator::Ancova { sigma_sq, strata, .. } => {
                positive("sigma_sq", *sigma_sq)?;
                if let Some(s) = strata {
                    s.validate()?;
                }
                if n[0] == 0 || n[1] == 0 {
                    return domain("both arms need subjects");
                }
            }
            Generator::Mmrm { sigma, retention, mu, alpha, tau, strata } => {
                let p = sigma.len();
                ldl_decompose(sigma)?;
                if mu.len() != p || alpha.len() != p || tau.len() != p {
                    return domain(format!("mu, alpha and tau need one entry per visit ({p})"));
                }
                for r in retention {
                    if r.len() != p {
                        return domain(format!("retention needs one rate per visit ({p})"));
                    }
                    if r.iter().any(|&x| !(x > 0.0 && x <= 1.0)) || r.windows(2).any(|w| w[1] > w[0]) {
                        return domain("retention rates must lie in (0, 1] and be nonincreasing");
                    }
                }
                if let Some(s) = strata {
                    s.validate()?;
                }
                if n[0] == 0 || n[1] == 0 {
                    return domain("both arms need subjects");
                }
            }
        }
        Ok(())
    }
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample::<f64, _>(StandardNormal)
}

/// Draws subjects' last observed visit: `Pr[last = j] = π_j − π_{j+1}`.
fn draw_last_visit<R: Rng>(rng: &mut R, retention: &[f64]) -> usize {
    let u: f64 = rng.random();
    // last ≥ j with probability π_j
    retention.iter().take_while(|&&r| u < r).count()
}

struct Prepared<'a> {
    gen: &'a Generator,
    /// `L·diag(√λ)` for MMRM errors.
    root: Matrix,
}

impl<'a> Prepared<'a> {
    fn new(gen: &'a Generator) -> Result<Self> {
        let root = match gen {
            Generator::Mmrm { sigma, .. } => {
                let f = ldl_decompose(sigma)?;
                let p = sigma.len();
                (0..p).map(|i| (0..p).map(|j| f.l[i][j] * f.lambda[j].sqrt()).collect()).collect()
            }
            _ => Vec::new(),
        };
        Ok(Prepared { gen, root })
    }

    /// Fills `d` with one trial. One- and two-sample designs (and crossover
    /// period differences) use `q = 0`, `p = 1`.
    fn generate<R: Rng>(&self, rng: &mut R, n: [usize; 2], d: &mut Dataset) {
        d.clear();
        match self.gen {
            Generator::OneSample { mu, sigma_sq } => {
                reshape(d, 0, 1);
                let sd = sigma_sq.sqrt();
                for _ in 0..n[0] + n[1] {
                    d.push(0, &[], &[mu + sd * normal(rng)], 1);
                }
            }
            Generator::TwoSample { mu0, mu1, sigma0_sq, sigma1_sq, .. } => {
                reshape(d, 0, 1);
                for (g, (&ng, (m, v))) in n.iter().zip([(mu0, sigma0_sq), (mu1, sigma1_sq)]).enumerate() {
                    let sd = v.sqrt();
                    for _ in 0..ng {
                        d.push(g as u8, &[], &[m + sd * normal(rng)], 1);
                    }
                }
            }
            Generator::Crossover { tau, sigma_d_sq, period_delta, .. } => {
                reshape(d, 0, 1);
                let sd = sigma_d_sq.sqrt();
                // sequence A/B (g = 1) carries −δ, B/A (g = 0) carries +δ
                for (g, &ng) in n.iter().enumerate() {
                    let shift = if g == 1 { -period_delta } else { *period_delta };
                    for _ in 0..ng {
                        d.push(g as u8, &[], &[tau + shift + sd * normal(rng)], 1);
                    }
                }
            }
            Generator::Ancova { tau, sigma_sq, intercept, beta, strata } => {
                let ind = strata.as_ref().map_or(0, Strata::indicators);
                reshape(d, 1 + ind, 1);
                let sd = sigma_sq.sqrt();
                let mut x = vec![0.0; 1 + ind];
                for (g, &ng) in n.iter().enumerate() {
                    for _ in 0..ng {
                        let shift = draw_covariates(rng, strata.as_ref(), &mut x);
                        let y = intercept + shift + tau * g as f64 + beta * x[0] + sd * normal(rng);
                        d.push(g as u8, &x, &[y], 1);
                    }
                }
            }
            Generator::Mmrm { retention, mu, alpha, tau, strata, .. } => {
                let p = mu.len();
                let ind = strata.as_ref().map_or(0, Strata::indicators);
                reshape(d, 1 + ind, p);
                let mut x = vec![0.0; 1 + ind];
                let mut e = vec![0.0; p];
                let mut y = vec![0.0; p];
                for (g, &ng) in n.iter().enumerate() {
                    for _ in 0..ng {
                        let shift = draw_covariates(rng, strata.as_ref(), &mut x);
                        for ej in e.iter_mut() {
                            *ej = normal(rng);
                        }
                        for j in 0..p {
                            let noise: f64 = (0..=j).map(|t| self.root[j][t] * e[t]).sum();
                            y[j] = mu[j] + alpha[j] * x[0] + tau[j] * g as f64 + shift + noise;
                        }
                        let last = draw_last_visit(rng, &retention[g]);
                        if last > 0 {
                            d.push(g as u8, &x, &y, last);
                        }
                    }
                }
            }
        }
    }

    fn analyze(&self, d: &Dataset) -> Result<Inference> {
        match self.gen {
            Generator::OneSample { .. } => {
                let (m, v, n) = group_stats(d, None);
                Ok(Inference { est: m, se: (v / n).sqrt(), df: n - 1.0 })
            }
            Generator::TwoSample { welch, .. } => {
                let (m0, v0, n0) = group_stats(d, Some(0));
                let (m1, v1, n1) = group_stats(d, Some(1));
                Ok(if *welch {
                    Inference { est: m1 - m0, se: (v0 / n0 + v1 / n1).sqrt(), df: satterthwaite_df(v0, v1, n0, n1) }
                } else {
                    let pooled = ((n0 - 1.0) * v0 + (n1 - 1.0) * v1) / (n0 + n1 - 2.0);
                    Inference { est: m1 - m0, se: (pooled * (1.0 / n0 + 1.0 / n1)).sqrt(), df: n0 + n1 - 2.0 }
                })
            }
            Generator::Crossover { period_effect_in_analysis, .. } => {
                if *period_effect_in_analysis {
                    let (m0, v0, n0) = group_stats(d, Some(0));
                    let (m1, v1, n1) = group_stats(d, Some(1));
                    let nn = n0 + n1;
                    let pooled = ((n0 - 1.0) * v0 + (n1 - 1.0) * v1) / (nn - 2.0);
                    Ok(Inference { est: (m0 + m1) / 2.0, se: (nn * pooled / (4.0 * n0 * n1)).sqrt(), df: nn - 2.0 })
                } else {
                    let (m, v, n) = group_stats(d, None);
                    Ok(Inference { est: m, se: (v / n).sqrt(), df: n - 1.0 })
                }
            }
            Generator::Ancova { .. } => {
                let f = analyze_ancova(d)?;
                Ok(Inference { est: f.tau_hat, se: f.se(), df: f.df })
            }
            Generator::Mmrm { .. } => {
                let f = analyze_mmrm(d)?;
                Ok(Inference { est: f.tau_hat_p, se: f.se(), df: f.satterthwaite_df })
            }
        }
    }
}

/// Baseline `x[0] ~ N(0, 1)` plus stratum indicators; returns the stratum shift.
fn draw_covariates<R: Rng>(rng: &mut R, strata: Option<&Strata>, x: &mut [f64]) -> f64 {
    x[0] = normal(rng);
    match strata {
        None => 0.0,
        Some(s) => {
            let lvl = s.draw(rng);
            for (k, xk) in x[1..].iter_mut().enumerate() {
                *xk = (lvl == k) as u8 as f64;
            }
            s.eta[lvl]
        }
    }
}

fn reshape(d: &mut Dataset, q: usize, p: usize) {
    d.q = q;
    d.p = p;
}

/// Mean, sample variance and size of the first outcome, optionally for one group.
fn group_stats(d: &Dataset, group: Option<u8>) -> (f64, f64, f64) {
    let pick = |i: &usize| group.is_none_or(|g| d.group[*i] == g);
    let idx = (0..d.len()).filter(pick);
    let (mut n, mut sum) = (0.0, 0.0);
    for i in idx.clone() {
        n += 1.0;
        sum += d.y[i * d.p];
    }
    let m = sum / n;
    let ss: f64 = idx.map(|i| (d.y[i * d.p] - m).powi(2)).sum();
    (m, ss / (n - 1.0), n)
}

fn stream(seed: u64, r: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r);
    rng
}

/// The dataset of replicate `r`, exactly as [`simulate_power`] analyzes it.
pub fn replicate_dataset(sc: &ScenarioSpec, n: [usize; 2], r: u64) -> Result<Dataset> {
    sc.generator.validate(n)?;
    let prepared = Prepared::new(&sc.generator)?;
    let mut d = Dataset::default();
    prepared.generate(&mut stream(sc.seed, r), n, &mut d);
    Ok(d)
}

enum Outcome {
    Hit,
    Miss,
    Failed(Error),
}

/// Empirical rate at which `objective` holds, over `sc.replicates` trials
/// with `n = [n0, n1]` subjects per group (per sequence for crossovers).
pub fn simulate_power(sc: &ScenarioSpec, n: [usize; 2], alpha: f64, objective: Objective) -> Result<SimReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if sc.replicates == 0 {
        return domain("replicate count must be at least 1");
    }
    sc.generator.validate(n)?;
    let prepared = Prepared::new(&sc.generator)?;
    let start = Instant::now();
    let run = |r: u64, d: &mut Dataset| -> Outcome {
        prepared.generate(&mut stream(sc.seed, r), n, d);
        match prepared.analyze(d).and_then(|inf| objective.decide(inf, alpha)) {
            Ok(true) => Outcome::Hit,
            Ok(false) => Outcome::Miss,
            Err(e) => Outcome::Failed(e),
        }
    };
    let (hits, fails, first_err) = (0..sc.replicates)
        .into_par_iter()
        .map_init(Dataset::default, |d, r| run(r, d))
        .fold(
            || (0u64, 0u64, None::<String>),
            |(h, f, e), o| match o {
                Outcome::Hit => (h + 1, f, e),
                Outcome::Miss => (h, f, e),
                Outcome::Failed(err) => (h, f + 1, e.or_else(|| Some(err.to_string()))),
            },
        )
        .reduce(|| (0, 0, None), |a, b| (a.0 + b.0, a.1 + b.1, a.2.or(b.2)));
    if fails as f64 > MAX_FAILURE_SHARE * sc.replicates as f64 {
        let msg = first_err.unwrap_or_default();
        return Err(Error::Simulation(format!(
            "{fails} of {} replicates failed to fit (limit {:.2}%); first failure: {msg}",
            sc.replicates,
            100.0 * MAX_FAILURE_SHARE
        )));
    }
    let used = sc.replicates - fails;
    if used == 0 {
        return Err(Error::Simulation("no replicate could be analyzed".into()));
    }
    let p = hits as f64 / used as f64;
    Ok(SimReport {
        rejections: hits,
        replicates: used,
        failures: fails,
        power_hat: p,
        std_error: (p * (1.0 - p) / used as f64).sqrt(),
        seed: sc.seed,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_sample(reps: u64) -> ScenarioSpec {
        ScenarioSpec {
            generator: Generator::TwoSample { mu0: 0.0, mu1: 0.0, sigma0_sq: 1.0, sigma1_sq: 1.0, welch: false },
            replicates: reps,
            seed: 7,
        }
    }

    #[test]
    fn same_seed_same_report() {
        let sc = two_sample(2000);
        let a = simulate_power(&sc, [10, 10], 0.05, Objective::TwoSided { tau0: 0.0 }).unwrap();
        let b = simulate_power(&sc, [10, 10], 0.05, Objective::TwoSided { tau0: 0.0 }).unwrap();
        assert_eq!(a.rejections, b.rejections);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let c = pool.install(|| simulate_power(&sc, [10, 10], 0.05, Objective::TwoSided { tau0: 0.0 }).unwrap());
        assert_eq!(a.rejections, c.rejections);
    }

    #[test]
    fn dropout_matches_retention_in_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ret = [1.0, 0.9, 0.7, 0.4];
        let mut counts = [0usize; 5];
        for _ in 0..200_000 {
            counts[draw_last_visit(&mut rng, &ret)] += 1;
        }
        for (j, &r) in ret.iter().enumerate() {
            let at_least: usize = counts[j + 1..].iter().sum();
            assert!((at_least as f64 / 200_000.0 - r).abs() < 0.005);
        }
        assert_eq!(counts[0], 0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let sc = two_sample(0);
        assert!(simulate_power(&sc, [10, 10], 0.05, Objective::TwoSided { tau0: 0.0 }).is_err());
        let sc = two_sample(10);
        assert!(simulate_power(&sc, [1, 10], 0.05, Objective::TwoSided { tau0: 0.0 }).is_err());
    }
}
