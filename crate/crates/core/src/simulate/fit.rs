//! Least-squares fits used by the simulator: ANCOVA and the factored
//! (sequential-regression) MMRM with the Kenward-Roger variance.

use crate::error::{Error, Result};

/// One trial's data. Rows are subjects; `y` is row-major `n × p` and only the
/// first `observed[i]` visits of subject `i` are meaningful (monotone
/// dropout).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub q: usize,
    pub p: usize,
    pub group: Vec<u8>,
    /// Row-major `n × q` covariates.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub observed: Vec<usize>,
}

impl Dataset {
    pub fn with_capacity(n: usize, q: usize, p: usize) -> Dataset {
        Dataset {
            q,
            p,
            group: Vec::with_capacity(n),
            x: Vec::with_capacity(n * q),
            y: Vec::with_capacity(n * p),
            observed: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.group.len()
    }

    pub fn is_empty(&self) -> bool {
        self.group.is_empty()
    }

    pub fn clear(&mut self) {
        self.group.clear();
        self.x.clear();
        self.y.clear();
        self.observed.clear();
    }

    /// Appends a subject; `y` must have `p` entries (unobserved ones ignored).
    pub fn push(&mut self, group: u8, x: &[f64], y: &[f64], observed: usize) {
        debug_assert!(x.len() == self.q && y.len() == self.p && observed <= self.p);
        self.group.push(group);
        self.x.extend_from_slice(x);
        self.y.extend_from_slice(y);
        self.observed.push(observed);
    }

    fn xi(&self, i: usize) -> &[f64] {
        &self.x[i * self.q..(i + 1) * self.q]
    }

    fn yi(&self, i: usize) -> &[f64] {
        &self.y[i * self.p..(i + 1) * self.p]
    }
}

/// Symmetric sweep on a cross-product matrix. After sweeping a set `S`,
/// the `S` block holds `−(Z_S'Z_S)⁻¹`, the cross block the coefficients and
/// the rest the residual cross-products. Near-zero pivots are aliased
/// columns: zeroed out and skipped.
struct Sweep {
    k: usize,
    m: Vec<f64>,
    diag0: Vec<f64>,
}

const ALIAS_TOL: f64 = 1e-9;

impl Sweep {
    fn new(k: usize) -> Sweep {
        Sweep { k, m: vec![0.0; k * k], diag0: Vec::new() }
    }

    fn reset(&mut self, k: usize) {
        self.k = k;
        self.m.clear();
        self.m.resize(k * k, 0.0);
    }

    /// Adds `z zᵀ` (upper triangle only).
    fn accumulate(&mut self, z: &[f64]) {
        let k = self.k;
        for i in 0..k {
            let zi = z[i];
            if zi == 0.0 {
                continue;
            }
            let row = &mut self.m[i * k..(i + 1) * k];
            for j in i..k {
                row[j] += zi * z[j];
            }
        }
    }

    fn symmetrize(&mut self) {
        let k = self.k;
        for i in 0..k {
            for j in 0..i {
                self.m[i * k + j] = self.m[j * k + i];
            }
        }
        self.diag0 = (0..k).map(|i| self.m[i * k + i]).collect();
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.m[i * self.k + j]
    }

    /// Returns `false` when column `c` is aliased with the swept set.
    fn sweep(&mut self, c: usize) -> bool {
        let k = self.k;
        let d = self.m[c * k + c];
        if !(d > ALIAS_TOL * self.diag0[c].max(f64::MIN_POSITIVE)) {
            for i in 0..k {
                self.m[i * k + c] = 0.0;
                self.m[c * k + i] = 0.0;
            }
            return false;
        }
        let col: Vec<f64> = (0..k).map(|i| self.m[i * k + c]).collect();
        for i in 0..k {
            if i == c {
                continue;
            }
            let f = col[i] / d;
            if f == 0.0 {
                continue;
            }
            for j in 0..k {
                if j != c {
                    self.m[i * k + j] -= f * col[j];
                }
            }
        }
        for i in 0..k {
            self.m[i * k + c] = col[i] / d;
            self.m[c * k + i] = col[i] / d;
        }
        self.m[c * k + c] = -1.0 / d;
        true
    }
}

/// Sweeps intercept, covariates and treatment; returns the non-aliased count.
fn sweep_design(s: &mut Sweep, q: usize) -> Result<usize> {
    if !s.sweep(0) {
        return Err(Error::Singular("intercept column is zero".into()));
    }
    let mut rank = 1;
    for c in 1..=q {
        rank += s.sweep(c) as usize;
    }
    if !s.sweep(q + 1) {
        return Err(Error::Singular("treatment indicator is aliased".into()));
    }
    Ok(rank + 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AncovaFit {
    pub tau_hat: f64,
    pub sigma_sq_hat: f64,
    /// `1/n1 + 1/n0 + Δ_x' S_xx⁻¹ Δ_x`.
    pub v_x: f64,
    pub df: f64,
}

impl AncovaFit {
    pub fn se(&self) -> f64 {
        (self.sigma_sq_hat * self.v_x).sqrt()
    }
}

/// OLS of the first outcome on intercept, covariates and treatment.
/// Aliased covariates are dropped and the d.f. use the fitted rank.
pub fn analyze_ancova(d: &Dataset) -> Result<AncovaFit> {
    let q = d.q;
    let n = d.len();
    let k = q + 3;
    let mut s = Sweep::new(k);
    let mut z = vec![0.0; k];
    for i in 0..n {
        z[0] = 1.0;
        z[1..=q].copy_from_slice(d.xi(i));
        z[q + 1] = d.group[i] as f64;
        z[q + 2] = d.yi(i)[0];
        s.accumulate(&z);
    }
    s.symmetrize();
    let rank = sweep_design(&mut s, q)?;
    let df = n as f64 - rank as f64;
    if df < 1.0 {
        return Err(Error::InsufficientData { visit: 1, detail: format!("{n} subjects for {rank} parameters") });
    }
    let g = q + 1;
    Ok(AncovaFit {
        tau_hat: s.at(g, k - 1),
        sigma_sq_hat: s.at(k - 1, k - 1) / df,
        v_x: -s.at(g, g),
        df,
    })
}

/// Factored MMRM fit.
#[derive(Debug, Clone, PartialEq)]
pub struct MmrmFit {
    /// Per visit: `(μ, α', τ, β')` in the order of `z = (1, x', g, y_1..y_{j−1})`.
    pub theta_hat: Vec<Vec<f64>>,
    pub sigma_hat_sq: Vec<f64>,
    /// `L̂`, unit lower triangular.
    pub l_hat: Vec<Vec<f64>>,
    pub tau_hat_p: f64,
    pub kr_variance: f64,
    pub satterthwaite_df: f64,
    pub v_x: Vec<f64>,
    /// Retained subjects per visit.
    pub m: Vec<usize>,
    /// Fitted design rank (`q*` less aliased covariates) per visit.
    pub q_star: Vec<usize>,
    /// `a_j = l̂_pj σ̂_j² V_xj`.
    pub a: Vec<f64>,
    /// `A_j` of the d.f. formula (zero at the first visit).
    pub big_a: Vec<f64>,
}

impl MmrmFit {
    pub fn se(&self) -> f64 {
        self.kr_variance.sqrt()
    }
}

/// Sequential least squares for visits `1..=p` on the retained subjects.
pub fn analyze_mmrm(d: &Dataset) -> Result<MmrmFit> {
    let (q, p, n) = (d.q, d.p, d.len());
    let g = q + 1;
    let mut theta_hat = Vec::with_capacity(p);
    let mut sigma_hat_sq = Vec::with_capacity(p);
    let mut v_x = Vec::with_capacity(p);
    let mut m = Vec::with_capacity(p);
    let mut q_star = Vec::with_capacity(p);
    let mut beta: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut tau_under = Vec::with_capacity(p);
    // (Y_j'Q_jY_j)⁻¹ per visit, row-major (j−1)²
    let mut yqy_inv: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut s = Sweep::new(1);
    let mut z = Vec::with_capacity(q + 2 + p);
    for j in 0..p {
        let k = q + 3 + j;
        s.reset(k);
        let mut mj = 0usize;
        for i in 0..n {
            if d.observed[i] <= j {
                continue;
            }
            mj += 1;
            let yi = d.yi(i);
            z.clear();
            z.push(1.0);
            z.extend_from_slice(d.xi(i));
            z.push(d.group[i] as f64);
            z.extend_from_slice(&yi[..=j]);
            s.accumulate(&z);
        }
        s.symmetrize();
        let rank = sweep_design(&mut s, q).map_err(|_| Error::InsufficientData {
            visit: j + 1,
            detail: "intercept or treatment column is aliased among retained subjects".into(),
        })?;
        if mj <= rank + j {
            return Err(Error::InsufficientData {
                visit: j + 1,
                detail: format!("{mj} retained subjects for {} regression parameters", rank + j),
            });
        }
        v_x.push(-s.at(g, g));
        for t in 0..j {
            if !s.sweep(q + 2 + t) {
                return Err(Error::Singular(format!("earlier outcomes are collinear at visit {}", j + 1)));
            }
        }
        let last = k - 1;
        let mut inv = vec![0.0; j * j];
        for a in 0..j {
            for b in 0..j {
                inv[a * j + b] = -s.at(q + 2 + a, q + 2 + b);
            }
        }
        yqy_inv.push(inv);
        let th: Vec<f64> = (0..last).map(|c| s.at(c, last)).collect();
        tau_under.push(th[g]);
        beta.push(th[q + 2..].to_vec());
        theta_hat.push(th);
        sigma_hat_sq.push(s.at(last, last) / (mj - rank) as f64);
        m.push(mj);
        q_star.push(rank);
    }

    // L̂ = Û⁻¹ with Û = I − B̂
    let mut l_hat = vec![vec![0.0; p]; p];
    for j in 0..p {
        l_hat[j][j] = 1.0;
        for t in 0..j {
            l_hat[j][t] = (t..j).map(|s_| beta[j][s_] * l_hat[s_][t]).sum();
        }
    }
    let lp = &l_hat[p - 1];
    let tau_hat_p: f64 = (0..p).map(|j| lp[j] * tau_under[j]).sum();
    let dfree: Vec<f64> = (0..p).map(|j| (m[j] - q_star[j]) as f64).collect();

    let lead: f64 = (0..p).map(|j| lp[j] * lp[j] * sigma_hat_sq[j] * v_x[j]).sum();
    let mut correction = 0.0;
    for j in 1..p {
        let spread: f64 = (0..j).map(|t| v_x[j] - v_x[t]).sum();
        correction += lp[j] * lp[j] * sigma_hat_sq[j] * spread / dfree[j];
    }
    let kr_variance = lead + 2.0 * correction;

    let a: Vec<f64> = (0..p).map(|j| lp[j] * sigma_hat_sq[j] * v_x[j]).collect();
    let mut big_a = vec![0.0; p];
    for j in 1..p {
        // w = L̂_{j−1} a_{1..j−1}
        let w: Vec<f64> = (0..j).map(|s_| (0..=s_).map(|t| l_hat[s_][t] * a[t]).sum()).collect();
        let inv = &yqy_inv[j];
        let mut quad = 0.0;
        for r in 0..j {
            for c in 0..j {
                quad += w[r] * inv[r * j + c] * w[c];
            }
        }
        big_a[j] = lp[j] * lp[j] * sigma_hat_sq[j] * quad;
    }
    let denom: f64 = 2.0 * big_a.iter().sum::<f64>() + (0..p).map(|j| lp[j] * lp[j] * a[j] * a[j] / dfree[j]).sum::<f64>();
    let satterthwaite_df = lead * lead / denom;
    if !(kr_variance > 0.0 && satterthwaite_df > 0.0) {
        return Err(Error::Singular(format!("variance {kr_variance:.3e} or d.f. {satterthwaite_df:.3e} not positive")));
    }
    Ok(MmrmFit {
        theta_hat,
        sigma_hat_sq,
        l_hat,
        tau_hat_p,
        kr_variance,
        satterthwaite_df,
        v_x,
        m,
        q_star,
        a,
        big_a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eight_rows() -> Dataset {
        let rows = [
            (0, 0.3, 1.2),
            (0, -1.1, 0.1),
            (0, 0.7, 1.9),
            (0, 1.5, 2.0),
            (1, -0.4, 1.4),
            (1, 0.9, 3.1),
            (1, -1.3, 0.8),
            (1, 0.2, 2.2),
        ];
        let mut d = Dataset::with_capacity(8, 1, 1);
        for &(g, x, y) in &rows {
            d.push(g, &[x], &[y], 1);
        }
        d
    }

    /// Normal equations solved by explicit 3×3 Gauss-Jordan elimination.
    fn normal_equations(d: &Dataset) -> ([f64; 3], f64, f64) {
        let mut a = [[0.0; 4]; 3];
        let mut inv = [[0.0; 3]; 3];
        for i in 0..d.len() {
            let z = [1.0, d.x[i], d.group[i] as f64];
            for r in 0..3 {
                for c in 0..3 {
                    a[r][c] += z[r] * z[c];
                }
                a[r][3] += z[r] * d.y[i];
            }
        }
        for r in 0..3 {
            inv[r][r] = 1.0;
        }
        for c in 0..3 {
            let piv = a[c][c];
            for j in 0..4 {
                a[c][j] /= piv;
            }
            for j in 0..3 {
                inv[c][j] /= piv;
            }
            for r in 0..3 {
                if r != c {
                    let f = a[r][c];
                    for j in 0..4 {
                        a[r][j] -= f * a[c][j];
                    }
                    for j in 0..3 {
                        inv[r][j] -= f * inv[c][j];
                    }
                }
            }
        }
        let b = [a[0][3], a[1][3], a[2][3]];
        let rss: f64 = (0..d.len()).map(|i| (d.y[i] - b[0] - b[1] * d.x[i] - b[2] * d.group[i] as f64).powi(2)).sum();
        (b, rss, inv[2][2])
    }

    #[test]
    fn ancova_matches_normal_equations() {
        let d = eight_rows();
        let fit = analyze_ancova(&d).unwrap();
        let (b, rss, v) = normal_equations(&d);
        assert!((fit.tau_hat - b[2]).abs() < 1e-12);
        assert!((fit.sigma_sq_hat - rss / 5.0).abs() < 1e-12);
        assert!((fit.v_x - v).abs() < 1e-12);
        assert_eq!(fit.df, 5.0);
    }

    #[test]
    fn single_visit_mmrm_is_ancova() {
        let d = eight_rows();
        let a = analyze_ancova(&d).unwrap();
        let m = analyze_mmrm(&d).unwrap();
        assert!((a.tau_hat - m.tau_hat_p).abs() < 1e-12);
        assert!((a.sigma_sq_hat * a.v_x - m.kr_variance).abs() < 1e-12);
        assert!((m.satterthwaite_df - a.df).abs() < 1e-10);
    }

    #[test]
    fn aliased_covariate_is_dropped() {
        let mut d = Dataset::with_capacity(6, 2, 1);
        for (i, &g) in [0u8, 0, 0, 1, 1, 1].iter().enumerate() {
            let x = i as f64 * 0.5 - 1.0;
            // second covariate duplicates the first
            d.push(g, &[x, 2.0 * x], &[x + g as f64 + 0.1 * (i % 2) as f64], 1);
        }
        let fit = analyze_ancova(&d).unwrap();
        assert_eq!(fit.df, 3.0);
    }

    #[test]
    fn too_few_retained_subjects_names_the_visit() {
        let mut d = Dataset::with_capacity(5, 0, 2);
        for (i, &g) in [0u8, 0, 1, 1, 1].iter().enumerate() {
            let obs = if i < 2 || i == 4 { 2 } else { 1 };
            d.push(g, &[], &[i as f64, 0.5 * i as f64 + 0.1 * (i * i) as f64], obs);
        }
        match analyze_mmrm(&d) {
            Err(Error::InsufficientData { visit, .. }) => assert_eq!(visit, 2),
            other => panic!("expected insufficient data, got {other:?}"),
        }
    }
}
