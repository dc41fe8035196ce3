//! ANCOVA power and sample size with `q` baseline covariates.
//!
//! The exact power integrates over `Ῡ ~ F(q, n−q−1)`, which holds when the
//! covariates are normal; the other powers replace `Ῡ` by a constant.

use crate::dist::{t_cdf_mix, t_quantile, t_sf_mix, Dof, Mixture, NumericSettings};
use crate::error::{domain, Error, Result};
use crate::kernel::{
    g1_from, g2_from, size_invert, t_sum_sq, two_tailed_t_power, z_sum_sq, PowerEstimate, PowerMethod,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AncovaSpec {
    pub tau1: f64,
    pub tau0: f64,
    /// Residual variance given the covariates.
    pub sigma_sq: f64,
    pub gamma0: f64,
    pub q: u32,
}

impl AncovaSpec {
    pub fn new(tau1: f64, tau0: f64, sigma_sq: f64, gamma0: f64, q: u32) -> Result<Self> {
        let s = AncovaSpec { tau1, tau0, sigma_sq, gamma0, q };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_sq > 0.0 && self.sigma_sq.is_finite()) {
            return domain(format!("sigma_sq must be positive, got {}", self.sigma_sq));
        }
        if !(self.gamma0 > 0.0 && self.gamma0 < 1.0) {
            return domain(format!("gamma0 must lie in (0, 1), got {}", self.gamma0));
        }
        Ok(())
    }

    pub fn q_star(&self) -> f64 {
        self.q as f64 + 2.0
    }

    pub fn gg(&self) -> f64 {
        self.gamma0 * (1.0 - self.gamma0)
    }

    pub fn effect(&self) -> f64 {
        self.tau1 - self.tau0
    }

    pub fn allocation(&self) -> Vec<f64> {
        vec![self.gamma0, 1.0 - self.gamma0]
    }

    /// Error d.f. `n − q*`.
    pub fn df(&self, n: f64) -> Result<Dof> {
        self.require_n(n)?;
        Dof::new(n - self.q_star())
    }

    fn require_n(&self, n: f64) -> Result<()> {
        let q = self.q as f64;
        if n <= q + 3.0 {
            return domain(format!("total size {n} must exceed q + 3 = {}", q + 3.0));
        }
        Ok(())
    }

    /// `V_x(Ῡ) = (1 + qῩ/(n−q−1))/(nγ0γ1)`.
    pub fn v_x(&self, n: f64, upsilon: f64) -> f64 {
        let q = self.q as f64;
        (1.0 + q * upsilon / (n - q - 1.0)) / (n * self.gg())
    }

    /// Law of `Ῡ`; `None` when there are no covariates.
    pub fn upsilon_law(&self, n: f64) -> Option<Mixture> {
        if self.q == 0 {
            return None;
        }
        let q = self.q as f64;
        Some(Mixture::fisher(Dof(q), Dof(n - q - 1.0), NumericSettings::DEFAULT.outer_tail_mass))
    }

    /// `E[g(Ῡ)]`, or `g(0)` when `q = 0`.
    pub(crate) fn expect_over_upsilon<G>(&self, n: f64, tol: f64, mut g: G) -> Result<f64>
    where
        G: FnMut(f64) -> Result<f64>,
    {
        match self.upsilon_law(n) {
            None => g(0.0),
            Some(law) => {
                let mut err = None;
                let v = law.expect(
                    |u| match g(u) {
                        Ok(x) => x,
                        Err(e) => {
                            err.get_or_insert(e);
                            0.0
                        }
                    },
                    f64::INFINITY,
                    tol,
                );
                match err {
                    Some(e) => Err(e),
                    None => Ok(v),
                }
            }
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        domain(format!("alpha must lie in (0, 1), got {alpha}"))
    }
}

/// Exact power for normal covariates: mixture over `Ῡ`.
pub fn ancova_power_exact(s: &AncovaSpec, n: f64, alpha: f64) -> Result<PowerEstimate> {
    check_alpha(alpha)?;
    let df = s.df(n)?;
    let c = t_quantile(1.0 - alpha / 2.0, df)?;
    let xi = Mixture::scaled_chi_square(df);
    let d = s.effect().abs();
    let p = s.expect_over_upsilon(n, NumericSettings::DEFAULT.single_tol, |u| {
        let lambda = d / (s.sigma_sq * s.v_x(n, u)).sqrt();
        Ok(t_sf_mix(&xi, c, lambda) + t_cdf_mix(&xi, -c, lambda))
    })?;
    Ok(PowerEstimate::new(p.clamp(0.0, 1.0), PowerMethod::IntegralExact, n))
}

/// `Ῡ` replaced by its approximate mean: variance inflation `1 + q/(n−q−3)`.
pub fn ancova_power_approx(s: &AncovaSpec, n: f64, alpha: f64) -> Result<PowerEstimate> {
    check_alpha(alpha)?;
    let df = s.df(n)?;
    let q = s.q as f64;
    let lambda2 = n * s.gg() * s.effect().powi(2) / (s.sigma_sq * (1.0 + q / (n - q - 3.0)));
    let p = two_tailed_t_power(lambda2.sqrt(), df, alpha)?;
    Ok(PowerEstimate::new(p, PowerMethod::Approx, n))
}

/// t distribution with the asymptotic variance `σ²/(nγ0γ1)`.
pub fn ancova_power_asymptotic_t(s: &AncovaSpec, n: f64, alpha: f64) -> Result<PowerEstimate> {
    check_alpha(alpha)?;
    if n <= s.q_star() {
        return domain(format!("total size {n} must exceed q* = {}", s.q_star()));
    }
    let df = Dof::new(n - s.q_star())?;
    let lambda2 = n * s.gg() * s.effect().powi(2) / s.sigma_sq;
    let p = two_tailed_t_power(lambda2.sqrt(), df, alpha)?;
    Ok(PowerEstimate::new(p, PowerMethod::Approx, n))
}

/// `ñ` solving `ñ = n_asy[1 + q/(ñ − q − 3)]` (the larger root).
pub fn quadratic_root(n_asy: f64, q: f64) -> f64 {
    let b = n_asy + q + 3.0;
    let disc = b * b - 12.0 * n_asy;
    debug_assert!(disc > 0.0);
    (b + disc.sqrt()) / 2.0
}

/// Fractional sizes of the ANCOVA procedure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AncovaSizes {
    /// Normal approximation with the asymptotic variance.
    pub n_asy: f64,
    /// Exact root of the normal size with the inflated variance.
    pub n_tilde_quadratic: f64,
    /// `n_asy[1 + q/(n_asy − 2)]`.
    pub n_tilde: f64,
    pub g1: f64,
    pub g2: f64,
    pub two_step: f64,
    /// Inversion of the exact power.
    pub inversion: f64,
    /// Inversion of the asymptotic-variance t power.
    pub inversion_asymptotic: f64,
}

fn nonzero(d: f64) -> Result<f64> {
    if d == 0.0 {
        return domain("tau1 equals tau0: no finite sample size reaches the target power");
    }
    Ok(d)
}

/// Inflate an asymptotic size by `1 + q/(n − 2)`.
fn inflate(n: f64, q: f64) -> f64 {
    n * (1.0 + q / (n - 2.0))
}

/// Every size of the procedure except the two inversions (set to NaN).
pub fn ancova_noniterative_sizes(s: &AncovaSpec, alpha: f64, power: f64) -> Result<AncovaSizes> {
    let d = nonzero(s.effect())?;
    let q = s.q as f64;
    let n_asy = z_sum_sq(alpha, power)? * s.sigma_sq / (s.gg() * d * d);
    let n_tilde = inflate(n_asy, q);
    let df = Dof::new(n_tilde - s.q_star())
        .map_err(|_| Error::Domain(format!("size {n_tilde:.3} leaves no error degrees of freedom")))?;
    let n_u_asy = t_sum_sq(df, alpha, power)? * s.sigma_sq / (s.gg() * d * d);
    Ok(AncovaSizes {
        n_asy,
        n_tilde_quadratic: quadratic_root(n_asy, q),
        n_tilde,
        g1: g1_from(n_tilde, alpha, 1.0)?,
        g2: g2_from(n_tilde, alpha, 1.0)?,
        two_step: inflate(n_u_asy, q),
        inversion: f64::NAN,
        inversion_asymptotic: f64::NAN,
    })
}

pub fn ancova_size_exact(s: &AncovaSpec, alpha: f64, power: f64, hint: f64) -> Result<f64> {
    size_invert(|n| Ok(ancova_power_exact(s, n, alpha)?.value), power, hint, s.q as f64 + 3.0)
}

pub fn ancova_size_asymptotic_t(s: &AncovaSpec, alpha: f64, power: f64, hint: f64) -> Result<f64> {
    size_invert(|n| Ok(ancova_power_asymptotic_t(s, n, alpha)?.value), power, hint, s.q_star())
}

/// The full size chain including both inversions.
pub fn ancova_size_chain(s: &AncovaSpec, alpha: f64, power: f64) -> Result<AncovaSizes> {
    let mut out = ancova_noniterative_sizes(s, alpha, power)?;
    out.inversion = ancova_size_exact(s, alpha, power, out.g2)?;
    out.inversion_asymptotic = ancova_size_asymptotic_t(s, alpha, power, out.n_asy)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_root_solves_the_fixed_point() {
        for &(n_asy, q) in &[(31.4, 1.0), (7.85, 3.0), (1000.0, 10.0)] {
            let n = quadratic_root(n_asy, q);
            assert!((n - n_asy * (1.0 + q / (n - q - 3.0))).abs() < 1e-9 * n);
        }
    }

    #[test]
    fn no_covariates_exact_equals_approx() {
        let s = AncovaSpec::new(1.0, 0.0, 1.0, 0.5, 0).unwrap();
        let a = ancova_power_exact(&s, 30.0, 0.05).unwrap().value;
        let b = ancova_power_approx(&s, 30.0, 0.05).unwrap().value;
        let c = ancova_power_asymptotic_t(&s, 30.0, 0.05).unwrap().value;
        assert!((a - b).abs() < 1e-12 && (b - c).abs() < 1e-12);
    }
}
