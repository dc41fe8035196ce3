//! Equivalence and bioequivalence power and sample size.
//!
//! Equivalence is declared when the whole `1 − α` confidence interval lies
//! inside `(lower, upper)`, which is the same decision as two one-sided
//! tests at level `α/2` each.

use crate::ancova::AncovaSpec;
use crate::designs::{crossover_kernel, two_sample_kernel, CrossoverSpec, TwoSampleSpec, WelchLaw};
use crate::dist::{normal_cdf, t_cdf, t_cdf_mix, t_quantile, Dof, Mixture, Noncentrality, NumericSettings};
use crate::error::{domain, Error, Result};
use crate::kernel::{
    g1_from, g2_from, size_g1, size_g2, size_invert, size_normal, size_two_step, z_sum_sq, PowerEstimate,
    PowerMethod, SizeEstimate, SizeMethod, TestKernel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginKind {
    Equivalence,
    Noninferiority,
    Superiority,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margins {
    pub lower: f64,
    pub upper: f64,
    pub kind: MarginKind,
}

impl Margins {
    pub fn equivalence(lower: f64, upper: f64) -> Result<Margins> {
        if !(lower.is_finite() && upper.is_finite()) {
            return domain("equivalence margins must be finite");
        }
        if !(lower < 0.0 && 0.0 < upper) {
            return domain(format!("equivalence margins need lower < 0 < upper, got ({lower}, {upper})"));
        }
        Ok(Margins { lower, upper, kind: MarginKind::Equivalence })
    }

    pub fn symmetric(m: f64) -> Result<Margins> {
        Margins::equivalence(-m, m)
    }

    /// One-sided region `(lower, upper)` with one infinite end.
    pub fn one_sided(lower: f64, upper: f64, kind: MarginKind) -> Result<Margins> {
        if !(lower < upper) || (lower.is_finite() == upper.is_finite()) {
            return domain("one-sided margins need exactly one infinite end and lower < upper");
        }
        Ok(Margins { lower, upper, kind })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    fn contains(&self, tau: f64) -> Result<()> {
        if self.lower < tau && tau < self.upper {
            Ok(())
        } else {
            domain(format!("effect {tau} must lie strictly inside the margins ({}, {})", self.lower, self.upper))
        }
    }

    fn is_symmetric_about(&self, tau: f64) -> bool {
        let (a, b) = (self.upper - tau, tau - self.lower);
        a.is_finite() && (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
    }
}

/// Bioequivalence limits on the ratio scale. `log_margin` is the usual
/// four-place figure; [`BeLimits::margins`] uses the unrounded logs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeLimits {
    pub ratio_lower: f64,
    pub ratio_upper: f64,
    pub log_margin: f64,
}

impl BeLimits {
    pub const STANDARD: BeLimits = BeLimits { ratio_lower: 0.80, ratio_upper: 1.25, log_margin: 0.2231 };
    pub const ALPHA: f64 = 0.1;

    pub fn margins(&self) -> Margins {
        Margins { lower: self.ratio_lower.ln(), upper: self.ratio_upper.ln(), kind: MarginKind::Equivalence }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        domain(format!("alpha must lie in (0, 1), got {alpha}"))
    }
}

/// `∫_0^{cut} [Φ(a − t√ξ) − Φ(b + t√ξ)] g(ξ) dξ` with `a = (M_u−τ)/se`,
/// `b = (M_l−τ)/se` and `cut = (M_u−M_l)²/(4 se² t²)`.
fn ci_inside_prob(xi: &Mixture, m: &Margins, tau: f64, se: f64, t: f64, tol: f64) -> f64 {
    let a = (m.upper - tau) / se;
    let b = (m.lower - tau) / se;
    let cut = if m.width().is_finite() { (m.width() / (2.0 * se * t)).powi(2) } else { f64::INFINITY };
    xi.expect(
        |x| {
            let r = t * x.sqrt();
            normal_cdf(a - r) - normal_cdf(b + r)
        },
        cut,
        tol,
    )
}

/// Probability that `t(f, λ)` falls below `c`; zero for an infinite `λ`.
fn t_below(c: f64, df: Dof, lambda: f64) -> Result<f64> {
    if lambda == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(t_cdf(c, df, Noncentrality::new(lambda)?))
}

/// Exact equivalence power: integral over `ξ = V̂/V ~ χ²_f/f`.
pub fn equiv_power_exact(k: &TestKernel, m: &Margins, n: f64, alpha: f64) -> Result<PowerEstimate> {
    check_alpha(alpha)?;
    m.contains(k.tau1)?;
    let df = k.df_at(n)?;
    let t = t_quantile(1.0 - alpha / 2.0, df)?;
    let se = (k.v / n).sqrt();
    let xi = Mixture::scaled_chi_square(df);
    let p = ci_inside_prob(&xi, m, k.tau1, se, t, NumericSettings::DEFAULT.single_tol);
    Ok(PowerEstimate::new(p.clamp(0.0, 1.0), PowerMethod::IntegralExact, n))
}

/// Two noncentral-t terms, no integration. Can fall below zero at small
/// `n`; the value is returned as computed with `invalid` set.
pub fn equiv_power_approx(k: &TestKernel, m: &Margins, n: f64, alpha: f64) -> Result<PowerEstimate> {
    check_alpha(alpha)?;
    m.contains(k.tau1)?;
    let df = k.df_at(n)?;
    let t = t_quantile(1.0 - alpha / 2.0, df)?;
    let se = (k.v / n).sqrt();
    let p = 1.0 - t_below(t, df, (m.upper - k.tau1) / se)? - t_below(t, df, (k.tau1 - m.lower) / se)?;
    Ok(PowerEstimate::new(p, PowerMethod::Approx, n))
}

/// Kernel with `τ1 − τ0` replaced by the half-width of symmetric margins.
fn symmetric_substitute(k: &TestKernel, m: &Margins) -> Result<TestKernel> {
    m.contains(k.tau1)?;
    if !m.is_symmetric_about(k.tau1) {
        return domain("noniterative equivalence sizes need margins symmetric about tau1; use equiv_size_bounds");
    }
    Ok(k.with_effect(0.0, m.width() / 2.0))
}

/// Symmetric-margin size through the superiority formulas with
/// `z_P → z_{(1+P)/2}` and `τ1 − τ0 → (M_u − M_l)/2`; `Inversion` inverts
/// the exact equivalence power.
pub fn equiv_size_symmetric(
    k: &TestKernel,
    m: &Margins,
    alpha: f64,
    power: f64,
    method: SizeMethod,
) -> Result<SizeEstimate> {
    let sub = symmetric_substitute(k, m)?;
    let p2 = (1.0 + power) / 2.0;
    let mut est = match method {
        SizeMethod::Normal => size_normal(&sub, alpha, p2)?,
        SizeMethod::G1 => size_g1(&sub, alpha, p2)?,
        SizeMethod::G2 => size_g2(&sub, alpha, p2)?,
        SizeMethod::TwoStep => size_two_step(&sub, alpha, p2)?,
        SizeMethod::Inversion => {
            let hint = size_g2(&sub, alpha, p2)?.fractional;
            let n = size_invert(|n| Ok(equiv_power_exact(k, m, n, alpha)?.value), power, hint, k.min_n)?;
            SizeEstimate::new(n, SizeMethod::Inversion, &k.allocation, power, alpha)
        }
    };
    est.target_power = power;
    Ok(est)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivBounds {
    pub g1_lower: SizeEstimate,
    pub g1_upper: SizeEstimate,
    pub g2_lower: SizeEstimate,
    pub g2_upper: SizeEstimate,
}

/// Size bounds from the larger (`Δ_max`) and smaller (`Δ_min`) distance
/// between the effect and the margins.
pub fn equiv_size_bounds(k: &TestKernel, m: &Margins, alpha: f64, power: f64) -> Result<EquivBounds> {
    m.contains(k.tau1)?;
    let (a, b) = (m.upper - k.tau1, k.tau1 - m.lower);
    if !(a.is_finite() && b.is_finite()) {
        return domain("size bounds need finite margins");
    }
    let (d_min, d_max) = (a.min(b), a.max(b));
    let z2 = z_sum_sq(alpha, (1.0 + power) / 2.0)?;
    let est = |delta: f64, g2: bool, method| -> Result<SizeEstimate> {
        let n_tilde = z2 * k.v / (delta * delta);
        let rho = k.rho_at(n_tilde);
        let n = if g2 { g2_from(n_tilde, alpha, rho)? } else { g1_from(n_tilde, alpha, rho)? };
        Ok(SizeEstimate::new(n, method, &k.allocation, power, alpha))
    };
    Ok(EquivBounds {
        g1_lower: est(d_max, false, SizeMethod::G1)?,
        g1_upper: est(d_min, false, SizeMethod::G1)?,
        g2_lower: est(d_max, true, SizeMethod::G2)?,
        g2_upper: est(d_min, true, SizeMethod::G2)?,
    })
}

/// ANCOVA equivalence power. `exact` integrates over both `Ῡ` and `ξ`;
/// otherwise the inner `ξ` integral is replaced by noncentral-t terms.
pub fn ancova_equiv_power(s: &AncovaSpec, m: &Margins, n: f64, alpha: f64, exact: bool) -> Result<PowerEstimate> {
    check_alpha(alpha)?;
    m.contains(s.tau1)?;
    let df = s.df(n)?;
    let t = t_quantile(1.0 - alpha / 2.0, df)?;
    let xi = Mixture::scaled_chi_square(df);
    let settings = NumericSettings::DEFAULT;
    let p = if exact {
        let inner_tol = settings.nested_tol * 0.1;
        s.expect_over_upsilon(n, settings.nested_tol, |u| {
            let se = (s.sigma_sq * s.v_x(n, u)).sqrt();
            Ok(ci_inside_prob(&xi, m, s.tau1, se, t, inner_tol))
        })?
    } else {
        s.expect_over_upsilon(n, settings.single_tol, |u| {
            let se = (s.sigma_sq * s.v_x(n, u)).sqrt();
            let hi = if m.upper.is_finite() { t_cdf_mix(&xi, t, (m.upper - s.tau1) / se) } else { 0.0 };
            let lo = if m.lower.is_finite() { t_cdf_mix(&xi, t, (s.tau1 - m.lower) / se) } else { 0.0 };
            Ok(hi + lo)
        })
        .map(|x| 1.0 - x)?
    };
    let method = if exact { PowerMethod::IntegralExact } else { PowerMethod::Approx };
    let p = if exact { p.clamp(0.0, 1.0) } else { p };
    Ok(PowerEstimate::new(p, method, n))
}

/// Welch-test equivalence power at explicit group sizes. `exact` integrates
/// over `u ~ F(n1−1, n0−1)` and `ξ ~ χ²_{n−2}/(n−2)`; otherwise the inner
/// integral is replaced by noncentral-t terms.
pub fn ts_unequal_equiv_power_groups(
    s: &TwoSampleSpec,
    m: &Margins,
    n0: f64,
    n1: f64,
    alpha: f64,
    exact: bool,
) -> Result<f64> {
    check_alpha(alpha)?;
    let tau = s.mu1 - s.mu0;
    m.contains(tau)?;
    let w = WelchLaw::new(s, n0, n1)?;
    let se = w.se2().sqrt();
    let xi = Mixture::scaled_chi_square(w.pooled_df());
    let settings = NumericSettings::DEFAULT;
    let mut err: Option<Error> = None;
    let a = (m.upper - tau) / se;
    let b = (tau - m.lower) / se;
    let value = if exact {
        let inner_tol = settings.nested_tol * 0.1;
        w.u_law().expect(
            |u| match w.critical(u, alpha) {
                Ok((_, h)) => {
                    // the CI half-width is h·se·√ξ
                    ci_inside_prob(&xi, m, tau, se, h, inner_tol)
                }
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            f64::INFINITY,
            settings.nested_tol,
        )
    } else {
        1.0 - w.u_law().expect(
            |u| match w.critical(u, alpha) {
                Ok((_, h)) => {
                    let hi = if a.is_finite() { t_cdf_mix(&xi, h, a) } else { 0.0 };
                    let lo = if b.is_finite() { t_cdf_mix(&xi, h, b) } else { 0.0 };
                    hi + lo
                }
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            f64::INFINITY,
            settings.single_tol,
        )
    };
    match err {
        Some(e) => Err(e),
        None => Ok(if exact { value.clamp(0.0, 1.0) } else { value }),
    }
}

/// [`ts_unequal_equiv_power_groups`] at total size `n`, groups `γ_g·n`.
pub fn ts_unequal_equiv_power(s: &TwoSampleSpec, m: &Margins, n: f64, alpha: f64, exact: bool) -> Result<PowerEstimate> {
    let p = ts_unequal_equiv_power_groups(s, m, s.gamma0 * n, s.gamma1() * n, alpha, exact)?;
    let method = if exact { PowerMethod::IntegralExact } else { PowerMethod::Approx };
    Ok(PowerEstimate::new(p, method, n))
}

/// The parameters a bioequivalence study hands to the generic procedure.
#[derive(Debug, Clone)]
pub struct BeSetup {
    pub kernel: TestKernel,
    pub margins: Margins,
    pub alpha: f64,
}

pub enum BeDesign {
    Crossover(CrossoverSpec),
    Parallel(TwoSampleSpec),
}

/// Log-scale BE study mapped to a kernel with margins `ln 0.8`, `ln 1.25` at α = 0.1.
pub fn be_adapter(design: &BeDesign) -> Result<BeSetup> {
    let kernel = match design {
        BeDesign::Crossover(c) => crossover_kernel(c)?,
        BeDesign::Parallel(p) => two_sample_kernel(p, 0.0)?,
    };
    Ok(BeSetup { kernel, margins: BeLimits::STANDARD.margins(), alpha: BeLimits::ALPHA })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn be_margin_is_log_ratio_to_four_places() {
        let m = BeLimits::STANDARD.log_margin;
        assert_eq!((1.25f64.ln() * 1e4).round() / 1e4, m);
        assert_eq!((-(0.8f64.ln()) * 1e4).round() / 1e4, m);
    }

    #[test]
    fn margins_validate() {
        assert!(Margins::equivalence(0.1, 0.5).is_err());
        assert!(Margins::equivalence(-0.5, f64::INFINITY).is_err());
        assert!(Margins::one_sided(0.0, f64::INFINITY, MarginKind::Superiority).is_ok());
    }
}
