//! Design-stage MMRM: LDL factors of Σ, retention-adjusted variance terms,
//! the expected Kenward-Roger variance and its Satterthwaite d.f., power
//! and the sample-size chain under monotone dropout.

use crate::dist::Dof;
use crate::error::{domain, Error, Result};
use crate::kernel::{
    g1_from, g2_from, size_invert, t_sum_sq, two_tailed_t_power, z_sum_sq, PowerEstimate, PowerMethod,
};
use crate::dist::{t_cdf, t_quantile, Noncentrality};

pub type Matrix = Vec<Vec<f64>>;

/// `Σ = L·diag(λ)·Lᵀ` with unit lower-triangular `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdlFactors {
    pub l: Matrix,
    /// Innovation variances `σ_j²`.
    pub lambda: Vec<f64>,
    /// `beta[j][t]`: coefficient of visit `t` in the regression of visit `j`
    /// on the earlier visits (`t < j`); the rows of `U = L⁻¹` negated.
    pub beta: Matrix,
}

impl LdlFactors {
    pub fn reconstruct(&self) -> Matrix {
        let p = self.lambda.len();
        let mut out = vec![vec![0.0; p]; p];
        for i in 0..p {
            for j in 0..p {
                out[i][j] = (0..p).map(|k| self.l[i][k] * self.lambda[k] * self.l[j][k]).sum();
            }
        }
        out
    }
}

fn check_square(sigma: &[Vec<f64>]) -> Result<usize> {
    let p = sigma.len();
    if p == 0 {
        return domain("covariance matrix is empty");
    }
    for (i, row) in sigma.iter().enumerate() {
        if row.len() != p {
            return domain(format!("covariance row {} has {} entries, expected {p}", i + 1, row.len()));
        }
        for (j, &x) in row.iter().enumerate() {
            if !x.is_finite() {
                return domain(format!("covariance entry ({}, {}) is not finite", i + 1, j + 1));
            }
            let scale = x.abs().max(sigma[j][i].abs()).max(1.0);
            if (x - sigma[j][i]).abs() > 1e-12 * scale {
                return domain(format!("covariance matrix is not symmetric at ({}, {})", i + 1, j + 1));
            }
        }
    }
    Ok(p)
}

pub fn ldl_decompose(sigma: &[Vec<f64>]) -> Result<LdlFactors> {
    let p = check_square(sigma)?;
    let mut l = vec![vec![0.0; p]; p];
    let mut d = vec![0.0; p];
    for j in 0..p {
        let dj = sigma[j][j] - (0..j).map(|k| l[j][k] * l[j][k] * d[k]).sum::<f64>();
        if !(dj > 1e-14 * sigma[j][j].abs().max(f64::MIN_POSITIVE)) {
            return Err(Error::NotPositiveDefinite { minor: j + 1 });
        }
        d[j] = dj;
        l[j][j] = 1.0;
        for i in j + 1..p {
            l[i][j] = (sigma[i][j] - (0..j).map(|k| l[i][k] * l[j][k] * d[k]).sum::<f64>()) / dj;
        }
    }
    // U = L⁻¹ by forward substitution, column by column
    let mut u = vec![vec![0.0; p]; p];
    for c in 0..p {
        u[c][c] = 1.0;
        for i in c + 1..p {
            u[i][c] = -(c..i).map(|k| l[i][k] * u[k][c]).sum::<f64>();
        }
    }
    let beta = (0..p).map(|j| (0..j).map(|t| -u[j][t]).collect()).collect();
    Ok(LdlFactors { l, lambda: d, beta })
}

/// Compound symmetry: `diag` on the diagonal, `off` elsewhere.
pub fn compound_symmetry(p: usize, diag: f64, off: f64) -> Matrix {
    (0..p).map(|i| (0..p).map(|j| if i == j { diag } else { off }).collect()).collect()
}

/// `Σ_jk = variance·ρ^|j−k|`.
pub fn ar1(p: usize, variance: f64, rho: f64) -> Matrix {
    (0..p).map(|i| (0..p).map(|j| variance * rho.powi((i as i32 - j as i32).abs())).collect()).collect()
}

/// `Σ_jk = bands[|j−k|]`.
pub fn toeplitz(bands: &[f64]) -> Matrix {
    let p = bands.len();
    (0..p).map(|i| (0..p).map(|j| bands[i.abs_diff(j)]).collect()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmrmDesign {
    pub sigma: Matrix,
    /// `retention[g][j]`, nonincreasing in `j`.
    pub retention: [Vec<f64>; 2],
    pub gamma0: f64,
    pub q: u32,
    pub tau_p1: f64,
    pub tau_p0: f64,
    ldl: LdlFactors,
}

impl MmrmDesign {
    pub fn new(sigma: Matrix, retention: [Vec<f64>; 2], gamma0: f64, q: u32, tau_p1: f64, tau_p0: f64) -> Result<Self> {
        let ldl = ldl_decompose(&sigma)?;
        let p = sigma.len();
        if !(gamma0 > 0.0 && gamma0 < 1.0) {
            return domain(format!("gamma0 must lie in (0, 1), got {gamma0}"));
        }
        for (g, r) in retention.iter().enumerate() {
            if r.len() != p {
                return domain(format!("arm {g} has {} retention rates for {p} visits", r.len()));
            }
            for (j, &x) in r.iter().enumerate() {
                if !(x > 0.0 && x <= 1.0) {
                    return domain(format!("arm {g} retention at visit {} must lie in (0, 1], got {x}", j + 1));
                }
                if j > 0 && x > r[j - 1] {
                    return domain(format!("arm {g} retention increases at visit {}: dropout must be monotone", j + 1));
                }
            }
        }
        if !tau_p1.is_finite() || !tau_p0.is_finite() {
            return domain("visit-p effects must be finite");
        }
        Ok(MmrmDesign { sigma, retention, gamma0, q, tau_p1, tau_p0, ldl })
    }

    pub fn visits(&self) -> usize {
        self.sigma.len()
    }

    pub fn ldl(&self) -> &LdlFactors {
        &self.ldl
    }

    pub fn q_star(&self) -> f64 {
        self.q as f64 + 2.0
    }

    pub fn gammas(&self) -> [f64; 2] {
        [self.gamma0, 1.0 - self.gamma0]
    }

    pub fn allocation(&self) -> Vec<f64> {
        self.gammas().to_vec()
    }

    pub fn with_effect(&self, tau_p1: f64, tau_p0: f64) -> MmrmDesign {
        MmrmDesign { tau_p1, tau_p0, ..self.clone() }
    }

    /// Pooled retention `π̄_j`.
    pub fn pi_bar(&self) -> Vec<f64> {
        let [g0, g1] = self.gammas();
        (0..self.visits()).map(|j| g0 * self.retention[0][j] + g1 * self.retention[1][j]).collect()
    }

    /// `ϖ_j = Σ_g (γ_g π_gj)⁻¹`.
    pub fn varpi(&self) -> Vec<f64> {
        let [g0, g1] = self.gammas();
        (0..self.visits()).map(|j| 1.0 / (g0 * self.retention[0][j]) + 1.0 / (g1 * self.retention[1][j])).collect()
    }

    /// `l_pj² σ_j²` for each visit.
    pub fn weights(&self) -> Vec<f64> {
        let p = self.visits();
        (0..p).map(|j| self.ldl.l[p - 1][j].powi(2) * self.ldl.lambda[j]).collect()
    }

    /// Smallest total size at which all design-stage denominators are positive.
    pub fn min_n(&self) -> f64 {
        let pi = self.pi_bar();
        (0..self.visits()).map(|j| (self.q_star() + (j + 1) as f64) / pi[j]).fold(0.0, f64::max)
    }

    /// Asymptotic variance numerator `Σ_j l_pj²σ_j²ϖ_j`.
    pub fn asymptotic_numerator(&self) -> f64 {
        self.weights().iter().zip(self.varpi()).map(|(w, v)| w * v).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmrmDerived {
    pub n: f64,
    pub m: Vec<f64>,
    pub c: Vec<f64>,
    pub v_tilde_x: Vec<f64>,
    pub varpi: Vec<f64>,
    pub v_tau: f64,
    pub v_tau_star: f64,
    pub f: Dof,
    pub f_o: Dof,
    pub rho_o: f64,
    /// `omega[j][t] = σ_j²/[(m_j − q* − j)σ_t²]` for `t < j`.
    pub omega: Matrix,
}

pub fn mmrm_derived(d: &MmrmDesign, n: f64) -> Result<MmrmDerived> {
    let p = d.visits();
    let qs = d.q_star();
    let q = d.q as f64;
    let pi = d.pi_bar();
    let varpi = d.varpi();
    let lam = &d.ldl.lambda;
    let w = d.weights();
    let m: Vec<f64> = pi.iter().map(|x| n * x).collect();
    for j in 0..p {
        let visit = j + 1;
        if m[j] - qs - visit as f64 <= 0.0 {
            return domain(format!(
                "total size {n} leaves {:.3} subjects at visit {visit}, need more than q* + {visit} = {}",
                m[j],
                qs + visit as f64
            ));
        }
    }
    let vx: Vec<f64> = (0..p).map(|j| varpi[j] / n * (1.0 + q / (m[j] - q - 3.0))).collect();
    // m_j − q* − j with one-based j
    let dj = |j: usize| m[j] - qs - (j + 1) as f64;
    let mut v_tau: f64 = (0..p).map(|j| w[j] * vx[j]).sum();
    for j in 1..p {
        let s: f64 = (0..j).map(|t| vx[j] - vx[t]).sum();
        v_tau += w[j] / dj(j) * s;
    }
    let c: Vec<f64> = (0..p)
        .map(|j| {
            let tail: f64 = (j + 1..p).map(|k| w[k] / dj(k)).sum();
            (1.0 - j as f64 / (m[j] - qs)) * (w[j] + tail)
        })
        .collect();
    let main: f64 = (0..p).map(|j| c[j] * vx[j]).sum();
    let mut v_star = main;
    let mut denom: f64 = (0..p).map(|j| c[j] * c[j] * vx[j] * vx[j] / (m[j] - qs)).sum();
    for j in 1..p {
        let s: f64 = (0..j).map(|t| vx[j] - vx[t]).sum();
        v_star += 2.0 * c[j] * s / (m[j] - qs);
        let a: f64 = (0..j).map(|t| c[t] * vx[t] * vx[t]).sum();
        denom += 2.0 * c[j] * a / dj(j);
    }
    // information fractions from the retention-only terms ϖ_j; the covariate
    // inflation factors are left out of ρ_o
    let wsum: f64 = w.iter().sum();
    let rho_o = wsum * varpi[0] / (0..p).map(|j| w[j] * varpi[j]).sum::<f64>();
    let omega = (0..p).map(|j| (0..j).map(|t| lam[j] / (dj(j) * lam[t])).collect()).collect();
    Ok(MmrmDerived {
        n,
        c,
        v_tilde_x: vx,
        varpi,
        v_tau,
        v_tau_star: v_star,
        f: Dof::new(main * main / denom)?,
        f_o: Dof::new((m[0] - qs) * rho_o)?,
        rho_o,
        omega,
        m,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        domain(format!("alpha must lie in (0, 1), got {alpha}"))
    }
}

/// Wald-test power with the expected KR variance and its d.f.
pub fn mmrm_power(d: &MmrmDesign, n: f64, alpha: f64) -> Result<PowerEstimate> {
    check_alpha(alpha)?;
    let x = mmrm_derived(d, n)?;
    let p = two_tailed_t_power((d.tau_p1 - d.tau_p0) / x.v_tau_star.sqrt(), x.f, alpha)?;
    Ok(PowerEstimate::new(p, PowerMethod::ExactTwoSided, n))
}

/// Simpler approximation with `V_τ` and `f_o`.
pub fn mmrm_power_approx(d: &MmrmDesign, n: f64, alpha: f64) -> Result<PowerEstimate> {
    check_alpha(alpha)?;
    let x = mmrm_derived(d, n)?;
    let p = two_tailed_t_power((d.tau_p1 - d.tau_p0) / x.v_tau.sqrt(), x.f_o, alpha)?;
    Ok(PowerEstimate::new(p, PowerMethod::Approx, n))
}

/// Equivalence power at visit `p` for margins `(lower, upper)`.
pub fn mmrm_equiv_power(d: &MmrmDesign, margins: (f64, f64), n: f64, alpha: f64) -> Result<PowerEstimate> {
    check_alpha(alpha)?;
    let (lo, hi) = margins;
    if !(lo < d.tau_p1 && d.tau_p1 < hi) {
        return domain(format!("effect {} must lie strictly inside the margins ({lo}, {hi})", d.tau_p1));
    }
    let x = mmrm_derived(d, n)?;
    let se = x.v_tau_star.sqrt();
    let t = t_quantile(1.0 - alpha / 2.0, x.f)?;
    let tail = |lambda: f64| -> Result<f64> {
        if lambda.is_infinite() {
            return Ok(0.0);
        }
        Ok(t_cdf(t, x.f, Noncentrality::new(lambda)?))
    };
    let p = 1.0 - tail((hi - d.tau_p1) / se)? - tail((d.tau_p1 - lo) / se)?;
    Ok(PowerEstimate::new(p, PowerMethod::Approx, n))
}

/// Fractional sizes of the MMRM procedure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmrmSizes {
    /// Normal approximation with the asymptotic variance.
    pub n_a: f64,
    /// Normal approximation with `V_τ`.
    pub n_tilde: f64,
    pub g1: f64,
    pub g2: f64,
    pub two_step: f64,
    /// Inversion of the power (or equivalence power) equation.
    pub inversion: f64,
    /// ρ used by the Guenther terms.
    pub rho: f64,
}

// n·Σ_j b_j[d_j + Σ_{t≤j}(d_j − ϖ_t d_t/ϖ_j)/(nπ̄_j − j + 1)]
fn retention_inflated(d: &MmrmDesign, n: f64) -> f64 {
    let q = d.q as f64;
    let pi = d.pi_bar();
    let varpi = d.varpi();
    let w = d.weights();
    let total: f64 = w.iter().zip(&varpi).map(|(a, b)| a * b).sum();
    let dd: Vec<f64> = pi.iter().map(|x| 1.0 + q / (n * x - 2.0)).collect();
    let mut acc = 0.0;
    for j in 0..w.len() {
        let b = w[j] * varpi[j] / total;
        let e: f64 = (0..=j).map(|t| dd[j] - varpi[t] * dd[t] / varpi[j]).sum();
        acc += b * (dd[j] + e / (n * pi[j] - j as f64));
    }
    n * acc
}

/// Noniterative sizes for target `power` at effect `effect`, given the
/// `(z_{1−α/2} + z_P)²` factor already substituted by the caller.
fn noniterative(d: &MmrmDesign, effect: f64, alpha: f64, power: f64) -> Result<MmrmSizes> {
    if effect == 0.0 {
        return domain("effect is zero: no finite sample size reaches the target power");
    }
    let num = d.asymptotic_numerator();
    let n_a = z_sum_sq(alpha, power)? * num / (effect * effect);
    let n_tilde = retention_inflated(d, n_a);
    let x = mmrm_derived(d, n_tilde).map_err(|e| match e {
        Error::Domain(m) => Error::Domain(format!("normal-approximation size {n_tilde:.3} is too small: {m}")),
        other => other,
    })?;
    let qs = d.q_star();
    let rho = x.f.value() / (n_tilde * d.pi_bar()[0] - qs);
    let f_l = Dof::new((n_tilde - qs) * rho)?;
    let n_ua = t_sum_sq(f_l, alpha, power)? * num / (effect * effect);
    Ok(MmrmSizes {
        n_a,
        n_tilde,
        g1: g1_from(n_tilde, alpha, rho)?,
        g2: g2_from(n_tilde, alpha, rho)?,
        two_step: retention_inflated(d, n_ua),
        inversion: f64::NAN,
        rho,
    })
}

/// Superiority size chain for the design's visit-p effect.
pub fn mmrm_size_chain(d: &MmrmDesign, alpha: f64, power: f64) -> Result<MmrmSizes> {
    let mut s = noniterative(d, d.tau_p1 - d.tau_p0, alpha, power)?;
    s.inversion = size_invert(|n| Ok(mmrm_power(d, n, alpha)?.value), power, s.g2, d.min_n())?;
    Ok(s)
}

/// Equivalence size chain for symmetric margins around `tau_p1`.
pub fn mmrm_equiv_size_chain(d: &MmrmDesign, margins: (f64, f64), alpha: f64, power: f64) -> Result<MmrmSizes> {
    let (lo, hi) = margins;
    if ((hi - d.tau_p1) - (d.tau_p1 - lo)).abs() > 1e-12 * (hi - lo).abs() {
        return domain("noniterative equivalence sizes need margins symmetric about the effect");
    }
    let mut s = noniterative(d, (hi - lo) / 2.0, alpha, (1.0 + power) / 2.0)?;
    s.inversion = size_invert(|n| Ok(mmrm_equiv_power(d, margins, n, alpha)?.value), power, s.g2, d.min_n())?;
    Ok(s)
}
