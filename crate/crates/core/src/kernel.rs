//! Generic power and sample-size procedure over an abstract test kernel.
//!
//! A kernel describes a test whose estimate `τ̂` has variance `V/n` and
//! whose variance estimate is `χ²_f/f` distributed. Every design family
//! lowers to one.

use std::fmt;
use std::sync::Arc;

use crate::dist::{find_root, normal_quantile, t_cdf, t_quantile, t_sf, Dof, Noncentrality, NumericSettings};
use crate::error::{domain, Error, Result};

/// A real function of the total sample size.
pub type Rule = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Largest total size considered by [`size_invert`].
pub const SIZE_CAP: f64 = 1e7;

#[derive(Clone)]
pub struct TestKernel {
    pub tau0: f64,
    pub tau1: f64,
    /// Variance parameter: `var(τ̂) = V/n`.
    pub v: f64,
    rho: Rule,
    df: Rule,
    /// Smallest admissible total size; `f(n) > 0` beyond it.
    pub min_n: f64,
    /// Group allocation fractions, used to split rounded sizes.
    pub allocation: Vec<f64>,
    /// Set by [`apply_ni_margin`]: a one-tailed test at actual level `α/2`.
    pub one_tailed: bool,
}

impl fmt::Debug for TestKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestKernel")
            .field("tau0", &self.tau0)
            .field("tau1", &self.tau1)
            .field("v", &self.v)
            .field("min_n", &self.min_n)
            .field("allocation", &self.allocation)
            .field("one_tailed", &self.one_tailed)
            .finish_non_exhaustive()
    }
}

impl TestKernel {
    pub fn new(tau0: f64, tau1: f64, v: f64, rho: Rule, df: Rule, min_n: f64, allocation: Vec<f64>) -> Result<Self> {
        if !(v > 0.0 && v.is_finite()) {
            return domain(format!("variance parameter must be positive, got {v}"));
        }
        if !tau0.is_finite() || !tau1.is_finite() {
            return domain("effect sizes must be finite");
        }
        Ok(TestKernel { tau0, tau1, v, rho, df, min_n, allocation, one_tailed: false })
    }

    /// ρ ≈ f/n evaluated at `n`.
    pub fn rho_at(&self, n: f64) -> f64 {
        (self.rho)(n)
    }

    pub fn df_at(&self, n: f64) -> Result<Dof> {
        if n <= self.min_n {
            return domain(format!("total size {n} must exceed {}", self.min_n));
        }
        Dof::new((self.df)(n))
    }

    pub fn effect(&self) -> f64 {
        self.tau1 - self.tau0
    }

    /// Same kernel with a different alternative effect.
    pub fn with_effect(&self, tau0: f64, tau1: f64) -> TestKernel {
        TestKernel { tau0, tau1, ..self.clone() }
    }

    /// Same kernel with another variance parameter.
    pub fn with_variance(&self, v: f64) -> Result<TestKernel> {
        if !(v > 0.0 && v.is_finite()) {
            return domain(format!("variance parameter must be positive, got {v}"));
        }
        Ok(TestKernel { v, ..self.clone() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PowerMethod {
    ExactTwoSided,
    OneSidedApprox,
    IntegralExact,
    Approx,
}

impl PowerMethod {
    pub fn label(self) -> &'static str {
        match self {
            PowerMethod::ExactTwoSided => "exact_two_sided",
            PowerMethod::OneSidedApprox => "one_sided_approx",
            PowerMethod::IntegralExact => "integral_exact",
            PowerMethod::Approx => "approx",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    pub value: f64,
    pub method: PowerMethod,
    pub n_used: f64,
    /// Set when an approximation left `[0, 1]`; the value is kept as computed.
    pub invalid: bool,
}

impl PowerEstimate {
    pub fn new(value: f64, method: PowerMethod, n_used: f64) -> Self {
        PowerEstimate { value, method, n_used, invalid: !(0.0..=1.0).contains(&value) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SizeMethod {
    Normal,
    G1,
    G2,
    TwoStep,
    Inversion,
}

impl SizeMethod {
    pub const ALL: [SizeMethod; 5] =
        [SizeMethod::Normal, SizeMethod::G1, SizeMethod::G2, SizeMethod::TwoStep, SizeMethod::Inversion];

    pub fn label(self) -> &'static str {
        match self {
            SizeMethod::Normal => "normal",
            SizeMethod::G1 => "g1",
            SizeMethod::G2 => "g2",
            SizeMethod::TwoStep => "two_step",
            SizeMethod::Inversion => "inversion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    /// Ceiling on the total, split by allocation, remainder to the first group.
    #[default]
    Up,
    /// Each group rounded to its nearest integer.
    Nearest,
    /// Fractional only; the rounded fields still hold the ceiling split.
    None,
}

impl std::str::FromStr for Rounding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Rounding> {
        match s {
            "up" => Ok(Rounding::Up),
            "nearest" => Ok(Rounding::Nearest),
            "none" => Ok(Rounding::None),
            _ => Err(Error::Config(format!("unknown rounding policy `{s}` (expected up, nearest or none)"))),
        }
    }
}

/// Integer group sizes for a fractional total.
pub fn split_total(fractional: f64, allocation: &[f64], rounding: Rounding) -> Vec<u64> {
    match rounding {
        Rounding::Nearest => allocation.iter().map(|g| (g * fractional).round().max(1.0) as u64).collect(),
        Rounding::Up | Rounding::None => {
            let total = fractional.ceil().max(allocation.len() as f64) as u64;
            let mut parts: Vec<u64> = allocation.iter().map(|g| (g * total as f64 + 1e-9).floor() as u64).collect();
            let mut left = total - parts.iter().sum::<u64>();
            let mut i = 0;
            while left > 0 {
                parts[i % allocation.len()] += 1;
                left -= 1;
                i += 1;
            }
            parts
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeEstimate {
    pub fractional: f64,
    pub rounded_total: u64,
    pub per_group: Vec<u64>,
    pub method: SizeMethod,
    pub target_power: f64,
    pub alpha: f64,
}

impl SizeEstimate {
    pub fn new(fractional: f64, method: SizeMethod, allocation: &[f64], target_power: f64, alpha: f64) -> Self {
        let per_group = split_total(fractional, allocation, Rounding::Up);
        SizeEstimate {
            fractional,
            rounded_total: per_group.iter().sum(),
            per_group,
            method,
            target_power,
            alpha,
        }
    }

    pub fn rounded(mut self, allocation: &[f64], rounding: Rounding) -> Self {
        self.per_group = split_total(self.fractional, allocation, rounding);
        self.rounded_total = self.per_group.iter().sum();
        self
    }
}

fn check_levels(alpha: f64, power: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if !(power > 0.0 && power < 1.0) {
        return domain(format!("target power must lie in (0, 1), got {power}"));
    }
    Ok(())
}

/// `Pr[t(f, λ) > c] + Pr[t(f, λ) < −c]` with `c = t_{f,1−α/2}`.
pub fn two_tailed_t_power(ncp: f64, df: Dof, alpha: f64) -> Result<f64> {
    let c = t_quantile(1.0 - alpha / 2.0, df)?;
    let ncp = Noncentrality::new(ncp.abs())?;
    Ok((t_sf(c, df, ncp) + t_cdf(-c, df, ncp)).clamp(0.0, 1.0))
}

/// `Pr[t(f, |λ|) > t_{f,1−α/2}]`.
pub fn upper_tail_t_power(ncp: f64, df: Dof, alpha: f64) -> Result<f64> {
    let c = t_quantile(1.0 - alpha / 2.0, df)?;
    Ok(t_sf(c, df, Noncentrality::new(ncp.abs())?))
}

fn noncentrality(k: &TestKernel, n: f64) -> f64 {
    k.effect() * (n / k.v).sqrt()
}

fn check_alpha_n(k: &TestKernel, n: f64, alpha: f64) -> Result<Dof> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    k.df_at(n)
}

/// Power of the two-sided test, `Pr[F(1, f, nΔ²/V) > t²_{f,1−α/2}]`.
pub fn power_two_sided(k: &TestKernel, n: f64, alpha: f64) -> Result<PowerEstimate> {
    let df = check_alpha_n(k, n, alpha)?;
    let p = two_tailed_t_power(noncentrality(k, n), df, alpha)?;
    Ok(PowerEstimate::new(p, PowerMethod::ExactTwoSided, n))
}

/// Upper-tail approximation of the two-sided power.
pub fn power_one_sided_approx(k: &TestKernel, n: f64, alpha: f64) -> Result<PowerEstimate> {
    let df = check_alpha_n(k, n, alpha)?;
    let p = upper_tail_t_power(noncentrality(k, n), df, alpha)?;
    Ok(PowerEstimate::new(p, PowerMethod::OneSidedApprox, n))
}

/// The power that matches the kernel's test: one tail for noninferiority.
pub fn power(k: &TestKernel, n: f64, alpha: f64) -> Result<PowerEstimate> {
    if k.one_tailed {
        power_one_sided_approx(k, n, alpha)
    } else {
        power_two_sided(k, n, alpha)
    }
}

fn nonzero_effect(k: &TestKernel) -> Result<f64> {
    let d = k.effect();
    if d == 0.0 {
        return domain("tau1 equals tau0: no finite sample size reaches the target power");
    }
    Ok(d)
}

/// `(z_{1−α/2} + z_P)²`.
pub fn z_sum_sq(alpha: f64, power: f64) -> Result<f64> {
    check_levels(alpha, power)?;
    let s = normal_quantile(1.0 - alpha / 2.0)? + normal_quantile(power)?;
    Ok(s * s)
}

/// Guenther correction `z²_{1−α/2}/(2ρ)`.
pub fn guenther_term(alpha: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return domain(format!("rho must be positive, got {rho}"));
    }
    let z = normal_quantile(1.0 - alpha / 2.0)?;
    Ok(z * z / (2.0 * rho))
}

/// `n_g1 = ñ + z²/(2ρ)`.
pub fn g1_from(n_tilde: f64, alpha: f64, rho: f64) -> Result<f64> {
    Ok(n_tilde + guenther_term(alpha, rho)?)
}

/// `n_g2 = n_g1 + [z²/(2ρ)]²/n_g1`.
pub fn g2_from(n_tilde: f64, alpha: f64, rho: f64) -> Result<f64> {
    let c = guenther_term(alpha, rho)?;
    let g1 = n_tilde + c;
    Ok(g1 + c * c / g1)
}

/// `(t_{f,1−α/2} + t_{f,P})²`.
pub fn t_sum_sq(df: Dof, alpha: f64, power: f64) -> Result<f64> {
    check_levels(alpha, power)?;
    let s = t_quantile(1.0 - alpha / 2.0, df)? + t_quantile(power, df)?;
    Ok(s * s)
}

pub fn size_normal(k: &TestKernel, alpha: f64, power: f64) -> Result<SizeEstimate> {
    let d = nonzero_effect(k)?;
    let n = z_sum_sq(alpha, power)? * k.v / (d * d);
    Ok(SizeEstimate::new(n, SizeMethod::Normal, &k.allocation, power, alpha))
}

pub fn size_g1(k: &TestKernel, alpha: f64, power: f64) -> Result<SizeEstimate> {
    let n_tilde = size_normal(k, alpha, power)?.fractional;
    let n = g1_from(n_tilde, alpha, k.rho_at(n_tilde))?;
    Ok(SizeEstimate::new(n, SizeMethod::G1, &k.allocation, power, alpha))
}

pub fn size_g2(k: &TestKernel, alpha: f64, power: f64) -> Result<SizeEstimate> {
    let n_tilde = size_normal(k, alpha, power)?.fractional;
    let n = g2_from(n_tilde, alpha, k.rho_at(n_tilde))?;
    Ok(SizeEstimate::new(n, SizeMethod::G2, &k.allocation, power, alpha))
}

/// Two-step size: t quantiles at the d.f. implied by the normal size.
pub fn size_two_step(k: &TestKernel, alpha: f64, power: f64) -> Result<SizeEstimate> {
    let d = nonzero_effect(k)?;
    let n_tilde = size_normal(k, alpha, power)?.fractional;
    let df = k.df_at(n_tilde).map_err(|_| {
        Error::Domain(format!("normal-approximation size {n_tilde:.3} leaves no error degrees of freedom"))
    })?;
    let n = t_sum_sq(df, alpha, power)? * k.v / (d * d);
    Ok(SizeEstimate::new(n, SizeMethod::TwoStep, &k.allocation, power, alpha))
}

/// Smallest real `n > min_n` with `power_fn(n) = target`.
///
/// The search starts on `[min_n + 0.5, max(10·hint, 1e3)]` and widens
/// geometrically up to [`SIZE_CAP`].
pub fn size_invert<F>(mut power_fn: F, target: f64, hint: f64, min_n: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(target > 0.0 && target < 1.0) {
        return domain(format!("target power must lie in (0, 1), got {target}"));
    }
    let mut lo = min_n + 0.5;
    let mut p_lo = power_fn(lo)?;
    if p_lo >= target {
        // target already met close to the boundary
        lo = min_n + 1e-6;
        p_lo = power_fn(lo)?;
        if p_lo >= target {
            return Err(Error::Bracket { lo, hi: min_n + 0.5 });
        }
    }
    let mut hi = (10.0 * hint).max(1e3).max(lo + 1.0).min(SIZE_CAP);
    loop {
        let p_hi = power_fn(hi)?;
        if p_hi >= target {
            break;
        }
        if hi >= SIZE_CAP {
            return Err(Error::Bracket { lo, hi });
        }
        lo = hi;
        hi = (hi * 10.0).min(SIZE_CAP);
    }
    let mut err = None;
    let tol = NumericSettings::DEFAULT.root_tol;
    let root = find_root(
        |n| match power_fn(n) {
            Ok(p) => p - target,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        tol * hi.max(1.0),
    );
    if let Some(e) = err {
        return Err(e);
    }
    root
}

/// Size by inverting the kernel's own power function.
pub fn size_inversion(k: &TestKernel, alpha: f64, power_target: f64) -> Result<SizeEstimate> {
    check_levels(alpha, power_target)?;
    let hint = size_normal(k, alpha, power_target)?.fractional;
    let n = size_invert(|n| Ok(power(k, n, alpha)?.value), power_target, hint, k.min_n)?;
    Ok(SizeEstimate::new(n, SizeMethod::Inversion, &k.allocation, power_target, alpha))
}

/// All five sizes of the procedure, in [`SizeMethod::ALL`] order.
pub fn size_chain(k: &TestKernel, alpha: f64, power: f64) -> Result<Vec<SizeEstimate>> {
    Ok(vec![
        size_normal(k, alpha, power)?,
        size_g1(k, alpha, power)?,
        size_g2(k, alpha, power)?,
        size_two_step(k, alpha, power)?,
        size_inversion(k, alpha, power)?,
    ])
}

/// Noninferiority: test against the margin `m0` one-tailed.
pub fn apply_ni_margin(k: &TestKernel, m0: f64) -> Result<TestKernel> {
    if !m0.is_finite() {
        return domain("noninferiority margin must be finite");
    }
    if k.tau1 == m0 {
        return domain("tau1 equals the noninferiority margin");
    }
    let mut out = k.with_effect(m0, k.tau1);
    out.one_tailed = true;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equal_kernel(delta: f64) -> TestKernel {
        TestKernel::new(0.0, delta, 4.0, Arc::new(|_| 1.0), Arc::new(|n| n - 2.0), 2.0, vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn split_keeps_remainder_in_first_group() {
        assert_eq!(split_total(20.03, &[0.5, 0.5], Rounding::Up), vec![11, 10]);
        assert_eq!(split_total(127.53, &[0.5, 0.5], Rounding::Up), vec![64, 64]);
        assert_eq!(split_total(18.72, &[0.5, 0.5], Rounding::Nearest), vec![9, 9]);
        assert_eq!(split_total(10.0, &[0.3, 0.7], Rounding::Up), vec![3, 7]);
    }

    #[test]
    fn null_effect_gives_alpha() {
        let k = equal_kernel(0.0);
        let p = power_two_sided(&k, 30.0, 0.05).unwrap().value;
        assert!((p - 0.05).abs() < 1e-9);
        assert!(size_normal(&k, 0.05, 0.8).is_err());
    }

    #[test]
    fn g1_with_unit_rho_adds_half_z_squared() {
        let k = equal_kernel(0.5);
        let n = size_normal(&k, 0.05, 0.8).unwrap().fractional;
        let g1 = size_g1(&k, 0.05, 0.8).unwrap().fractional;
        assert!((g1 - n - 1.920729410347062).abs() < 1e-12);
    }

    #[test]
    fn degenerate_target_is_a_bracket_error() {
        let k = equal_kernel(0.0);
        let r = size_invert(|n| Ok(power_two_sided(&k, n, 0.05)?.value), 0.05, 10.0, k.min_n);
        assert!(matches!(r, Err(Error::Bracket { .. })));
    }

    #[test]
    fn ni_margin_replaces_tau0() {
        let k = apply_ni_margin(&equal_kernel(0.0), 1.0).unwrap();
        assert_eq!(k.tau0, 1.0);
        assert!(k.one_tailed);
        assert!(apply_ni_margin(&equal_kernel(1.0), 1.0).is_err());
    }
}
