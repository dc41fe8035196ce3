//! Classical designs lowered to [`TestKernel`]s, and the exact power of
//! the unequal-variance (Welch) t test.

use std::sync::Arc;

use crate::dist::{t_cdf_mix, t_quantile, t_sf_mix, Dof, Mixture, NumericSettings};
use crate::error::{domain, Result};
use crate::kernel::{PowerEstimate, PowerMethod, TestKernel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSampleSpec {
    pub mu0: f64,
    pub mu1: f64,
    pub sigma0_sq: f64,
    pub sigma1_sq: f64,
    pub gamma0: f64,
    pub equal_variance: bool,
}

impl TwoSampleSpec {
    pub fn equal(mu0: f64, mu1: f64, sigma_sq: f64, gamma0: f64) -> Self {
        TwoSampleSpec { mu0, mu1, sigma0_sq: sigma_sq, sigma1_sq: sigma_sq, gamma0, equal_variance: true }
    }

    pub fn unequal(mu0: f64, mu1: f64, sigma0_sq: f64, sigma1_sq: f64, gamma0: f64) -> Self {
        TwoSampleSpec { mu0, mu1, sigma0_sq, sigma1_sq, gamma0, equal_variance: false }
    }

    pub fn gamma1(&self) -> f64 {
        1.0 - self.gamma0
    }

    pub fn allocation(&self) -> Vec<f64> {
        vec![self.gamma0, self.gamma1()]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0 > 0.0 && self.gamma0 < 1.0) {
            return domain(format!("gamma0 must lie in (0, 1), got {}", self.gamma0));
        }
        if !(self.sigma0_sq > 0.0 && self.sigma1_sq > 0.0) {
            return domain("group variances must be positive");
        }
        if self.equal_variance && self.sigma0_sq != self.sigma1_sq {
            return domain("equal-variance spec carries two different variances");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverSpec {
    pub mu_star_a: f64,
    pub mu_star_b: f64,
    /// Variance of the within-subject period difference.
    pub sigma_d_sq: f64,
    pub gamma0: f64,
    pub period_effect_in_analysis: bool,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be positive, got {x}"))
    }
}

pub fn one_sample_kernel(mu: f64, tau0: f64, sigma_sq: f64) -> Result<TestKernel> {
    positive("sigma_sq", sigma_sq)?;
    TestKernel::new(tau0, mu, sigma_sq, Arc::new(|_| 1.0), Arc::new(|n| n - 1.0), 2.0, vec![1.0])
}

pub fn two_sample_equal_kernel(s: &TwoSampleSpec, tau0: f64) -> Result<TestKernel> {
    s.validate()?;
    let v = s.sigma0_sq / (s.gamma0 * s.gamma1());
    TestKernel::new(tau0, s.mu1 - s.mu0, v, Arc::new(|_| 1.0), Arc::new(|n| n - 2.0), 3.0, s.allocation())
}

/// Satterthwaite d.f. for the Welch test with (possibly fractional) group sizes.
pub fn satterthwaite_df(sigma0_sq: f64, sigma1_sq: f64, n0: f64, n1: f64) -> f64 {
    let a = sigma0_sq / n0;
    let b = sigma1_sq / n1;
    (a + b).powi(2) / (a * a / (n0 - 1.0) + b * b / (n1 - 1.0))
}

pub fn two_sample_unequal_kernel(s: &TwoSampleSpec, tau0: f64) -> Result<TestKernel> {
    s.validate()?;
    let (g0, g1) = (s.gamma0, s.gamma1());
    let (v0, v1) = (s.sigma0_sq, s.sigma1_sq);
    let v = v0 / g0 + v1 / g1;
    let rho = v * v / (v0 * v0 / g0.powi(3) + v1 * v1 / g1.powi(3));
    let min_n = (1.0 / g0).max(1.0 / g1) + 1.0;
    TestKernel::new(
        tau0,
        s.mu1 - s.mu0,
        v,
        Arc::new(move |_| rho),
        Arc::new(move |n| satterthwaite_df(v0, v1, g0 * n, g1 * n)),
        min_n,
        s.allocation(),
    )
}

/// Kernel for the design's own analysis (pooled or Welch).
pub fn two_sample_kernel(s: &TwoSampleSpec, tau0: f64) -> Result<TestKernel> {
    if s.equal_variance {
        two_sample_equal_kernel(s, tau0)
    } else {
        two_sample_unequal_kernel(s, tau0)
    }
}

/// 2×2 crossover: one-sample mapping without a period term, two-sample
/// mapping on the period differences with one.
pub fn crossover_kernel(s: &CrossoverSpec) -> Result<TestKernel> {
    positive("sigma_d_sq", s.sigma_d_sq)?;
    let tau1 = s.mu_star_b - s.mu_star_a;
    if s.period_effect_in_analysis {
        let two = TwoSampleSpec::equal(0.0, tau1, s.sigma_d_sq / 4.0, s.gamma0);
        two_sample_equal_kernel(&two, 0.0)
    } else {
        let mut k = one_sample_kernel(tau1, 0.0, s.sigma_d_sq)?;
        k.allocation = vec![s.gamma0, 1.0 - s.gamma0];
        Ok(k)
    }
}

/// Welch-test quantities conditional on `u = s1²σ0²/(s0²σ1²) ~ F(n1−1, n0−1)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WelchLaw {
    pub s0: f64,
    pub s1: f64,
    pub n0: f64,
    pub n1: f64,
}

impl WelchLaw {
    pub fn new(s: &TwoSampleSpec, n0: f64, n1: f64) -> Result<Self> {
        s.validate()?;
        if !(n0 > 1.0 && n1 > 1.0) {
            return domain(format!("Welch test needs more than one subject per group, got {n0} and {n1}"));
        }
        Ok(WelchLaw { s0: s.sigma0_sq, s1: s.sigma1_sq, n0, n1 })
    }

    /// `σ1²/n1 + σ0²/n0`, the true variance of the mean difference.
    pub fn se2(&self) -> f64 {
        self.s1 / self.n1 + self.s0 / self.n0
    }

    /// `s1²/n1 + s0²/n0 = ξ·V(u)` with `ξ ~ χ²_{n−2}/(n−2)`.
    pub fn v_of_u(&self, u: f64) -> f64 {
        let n = self.n0 + self.n1;
        (n - 2.0) / ((self.n1 - 1.0) * u + (self.n0 - 1.0)) * (u * self.s1 / self.n1 + self.s0 / self.n0)
    }

    /// Satterthwaite d.f. evaluated at the sample variances implied by `u`.
    pub fn f_of_u(&self, u: f64) -> f64 {
        let a = u * self.s1 / self.n1;
        let b = self.s0 / self.n0;
        (a + b).powi(2) / (a * a / (self.n1 - 1.0) + b * b / (self.n0 - 1.0))
    }

    pub fn pooled_df(&self) -> Dof {
        Dof(self.n0 + self.n1 - 2.0)
    }

    pub fn u_law(&self) -> Mixture {
        Mixture::fisher(Dof(self.n1 - 1.0), Dof(self.n0 - 1.0), NumericSettings::DEFAULT.outer_tail_mass)
    }

    /// `t_{f(u),1−α/2}` and `h(u) = t·sqrt(V(u)/se²)`.
    pub fn critical(&self, u: f64, alpha: f64) -> Result<(f64, f64)> {
        let t = t_quantile(1.0 - alpha / 2.0, Dof::new(self.f_of_u(u))?)?;
        Ok((t, t * (self.v_of_u(u) / self.se2()).sqrt()))
    }
}

/// Which rejection tails enter a Welch power integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tails {
    Both,
    Upper,
}

/// Exact power of the Welch test at explicit group sizes.
pub fn welch_power_groups(s: &TwoSampleSpec, tau0: f64, n0: f64, n1: f64, alpha: f64, tails: Tails) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let w = WelchLaw::new(s, n0, n1)?;
    let lambda = ((s.mu1 - s.mu0) - tau0).abs() / w.se2().sqrt();
    let xi = Mixture::scaled_chi_square(w.pooled_df());
    let mut err = None;
    let p = w.u_law().expect(
        |u| match w.critical(u, alpha) {
            Ok((_, h)) => {
                let upper = t_sf_mix(&xi, h, lambda);
                match tails {
                    Tails::Upper => upper,
                    Tails::Both => upper + t_cdf_mix(&xi, -h, lambda),
                }
            }
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        f64::INFINITY,
        NumericSettings::DEFAULT.single_tol,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(p.clamp(0.0, 1.0)),
    }
}

/// Exact two-sided Welch power at total size `n` (groups `γ_g·n`, fractional).
pub fn moser_exact_power(s: &TwoSampleSpec, tau0: f64, n: f64, alpha: f64) -> Result<PowerEstimate> {
    let p = welch_power_groups(s, tau0, s.gamma0 * n, s.gamma1() * n, alpha, Tails::Both)?;
    Ok(PowerEstimate::new(p, PowerMethod::IntegralExact, n))
}

/// One-tailed exact Welch power, for noninferiority use.
pub fn moser_one_sided_power(s: &TwoSampleSpec, tau0: f64, n: f64, alpha: f64) -> Result<PowerEstimate> {
    let p = welch_power_groups(s, tau0, s.gamma0 * n, s.gamma1() * n, alpha, Tails::Upper)?;
    Ok(PowerEstimate::new(p, PowerMethod::IntegralExact, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_kernel_variance_algebra() {
        let k = two_sample_equal_kernel(&TwoSampleSpec::equal(0.0, 1.0, 1.0, 0.5), 0.0).unwrap();
        assert_eq!(k.v, 4.0);
        let k = two_sample_equal_kernel(&TwoSampleSpec::equal(0.0, 1.0, 2.0, 0.25), 0.0).unwrap();
        assert!((k.v - 2.0 / (0.25 * 0.75)).abs() < 1e-12);
    }

    #[test]
    fn satterthwaite_equal_case_is_pooled_df() {
        assert!((satterthwaite_df(3.0, 3.0, 12.0, 12.0) - 22.0).abs() < 1e-12);
        let f = satterthwaite_df(1.0, 4.0, 10.0, 30.0);
        assert!(f <= 38.0 && f >= 9.0);
    }

    #[test]
    fn crossover_kernels_share_variance_at_balance() {
        let mk = |period| CrossoverSpec {
            mu_star_a: 0.0,
            mu_star_b: 0.1,
            sigma_d_sq: 0.05,
            gamma0: 0.5,
            period_effect_in_analysis: period,
        };
        let a = crossover_kernel(&mk(false)).unwrap();
        let b = crossover_kernel(&mk(true)).unwrap();
        assert!((a.v - 0.05).abs() < 1e-15 && (b.v - 0.05).abs() < 1e-15);
        assert_eq!(a.df_at(10.0).unwrap().value() - b.df_at(10.0).unwrap().value(), 1.0);
    }
}
