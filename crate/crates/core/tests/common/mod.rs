//! Shared integration-test support: the property checks and a dense
//! matrix oracle that shares no code with the library's fitting routines.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use tsize::ancova::{ancova_power_approx, ancova_power_exact, quadratic_root, AncovaSpec};
use tsize::designs::{moser_one_sided_power, one_sample_kernel, two_sample_kernel, TwoSampleSpec};
use tsize::dist::{f_sf, normal_cdf, NumericSettings, normal_quantile, t_cdf, t_quantile, t_sf, Dof, Noncentrality};
use tsize::equivalence::{
    ancova_equiv_power, equiv_power_approx, equiv_power_exact, ts_unequal_equiv_power, MarginKind, Margins,
};
use tsize::kernel::{power_two_sided, size_g1, size_g2, size_normal, TestKernel};
use tsize::mmrm::{ldl_decompose, mmrm_power, MmrmDesign};
use tsize::simulate::{analyze_ancova, analyze_mmrm, Dataset};

pub type Mat = Vec<Vec<f64>>;

pub fn transpose(a: &Mat) -> Mat {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .map(|r| (0..b[0].len()).map(|j| r.iter().zip(b).map(|(x, row)| x * row[j]).sum()).collect())
        .collect()
}

/// Gauss-Jordan with partial pivoting.
pub fn inverse(a: &Mat) -> Mat {
    let n = a.len();
    let mut m: Mat = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, piv);
        let d = m[c][c];
        assert!(d.abs() > 1e-14, "singular oracle matrix");
        for v in m[c].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let pivot_row = m[c].clone();
                for (v, p) in m[r].iter_mut().zip(pivot_row) {
                    *v -= f * p;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Direct evaluation of the factored MMRM estimator, its Kenward-Roger
/// variance and Satterthwaite d.f. from explicit matrices.
pub struct MmrmOracle {
    pub tau_hat_p: f64,
    pub kr_variance: f64,
    pub df: f64,
    pub sigma_sq: Vec<f64>,
    pub v_x: Vec<f64>,
}

pub fn mmrm_oracle(d: &Dataset) -> MmrmOracle {
    let (q, p) = (d.q, d.p);
    let qs = q + 2;
    let mut sigma_sq = vec![];
    let mut v_x = vec![];
    let mut m = vec![];
    let mut beta: Vec<Vec<f64>> = vec![];
    let mut tau_under = vec![];
    let mut yqy_inv: Vec<Mat> = vec![];
    for j in 0..p {
        let rows: Vec<usize> = (0..d.len()).filter(|&i| d.observed[i] > j).collect();
        let xrow = |i: usize| {
            let mut r = vec![1.0];
            r.extend_from_slice(&d.x[i * q..(i + 1) * q]);
            r.push(d.group[i] as f64);
            r
        };
        let yv = |i: usize, t: usize| d.y[i * p + t];
        let z: Mat = rows
            .iter()
            .map(|&i| {
                let mut r = xrow(i);
                r.extend((0..j).map(|t| yv(i, t)));
                r
            })
            .collect();
        let y: Mat = rows.iter().map(|&i| vec![yv(i, j)]).collect();
        let zt = transpose(&z);
        let theta = matmul(&inverse(&matmul(&zt, &z)), &matmul(&zt, &y));
        let rss: f64 = z
            .iter()
            .zip(&y)
            .map(|(r, yy)| (yy[0] - r.iter().zip(&theta).map(|(a, b)| a * b[0]).sum::<f64>()).powi(2))
            .sum();
        let mj = rows.len();
        sigma_sq.push(rss / (mj - qs) as f64);
        tau_under.push(theta[q + 1][0]);
        beta.push((0..j).map(|t| theta[qs + t][0]).collect());
        m.push(mj);

        // V_x from group means and the pooled within-group scatter
        let (n0, n1) = rows.iter().fold((0.0, 0.0), |(a, b), &i| if d.group[i] == 0 { (a + 1.0, b) } else { (a, b + 1.0) });
        let mut vx = 1.0 / n0 + 1.0 / n1;
        if q > 0 {
            let mean = |g: u8| -> Vec<f64> {
                let members: Vec<usize> = rows.iter().copied().filter(|&i| d.group[i] == g).collect();
                (0..q).map(|k| members.iter().map(|&i| d.x[i * q + k]).sum::<f64>() / members.len() as f64).collect()
            };
            let (m0, m1) = (mean(0), mean(1));
            let delta: Mat = (0..q).map(|k| vec![m1[k] - m0[k]]).collect();
            let mut s = vec![vec![0.0; q]; q];
            for &i in &rows {
                let mg = if d.group[i] == 0 { &m0 } else { &m1 };
                for a in 0..q {
                    for b in 0..q {
                        s[a][b] += (d.x[i * q + a] - mg[a]) * (d.x[i * q + b] - mg[b]);
                    }
                }
            }
            vx += matmul(&transpose(&delta), &matmul(&inverse(&s), &delta))[0][0];
        }
        v_x.push(vx);

        if j > 0 {
            let x: Mat = rows.iter().map(|&i| xrow(i)).collect();
            let yj: Mat = rows.iter().map(|&i| (0..j).map(|t| yv(i, t)).collect()).collect();
            let xt = transpose(&x);
            let hat = matmul(&x, &matmul(&inverse(&matmul(&xt, &x)), &xt));
            let qm: Mat = (0..mj).map(|a| (0..mj).map(|b| if a == b { 1.0 } else { 0.0 } - hat[a][b]).collect()).collect();
            yqy_inv.push(inverse(&matmul(&transpose(&yj), &matmul(&qm, &yj))));
        } else {
            yqy_inv.push(vec![]);
        }
    }
    // U = I − B, L = U⁻¹
    let u: Mat = (0..p)
        .map(|j| (0..p).map(|t| if t == j { 1.0 } else if t < j { -beta[j][t] } else { 0.0 }).collect())
        .collect();
    let l = inverse(&u);
    let lp = &l[p - 1];
    let tau_hat_p = (0..p).map(|j| lp[j] * tau_under[j]).sum();
    let dfree: Vec<f64> = m.iter().map(|&mj| (mj - qs) as f64).collect();
    let lead: f64 = (0..p).map(|j| lp[j] * lp[j] * sigma_sq[j] * v_x[j]).sum();
    let corr: f64 = (1..p)
        .map(|j| lp[j] * lp[j] * sigma_sq[j] * (0..j).map(|t| v_x[j] - v_x[t]).sum::<f64>() / dfree[j])
        .sum();
    let a: Vec<f64> = (0..p).map(|j| lp[j] * sigma_sq[j] * v_x[j]).collect();
    let mut big_a = 0.0;
    for j in 1..p {
        let lj: Mat = (0..j).map(|r| (0..j).map(|c| l[r][c]).collect()).collect();
        let aj: Mat = (0..j).map(|t| vec![a[t]]).collect();
        let w = matmul(&lj, &aj);
        big_a += lp[j] * lp[j] * sigma_sq[j] * matmul(&transpose(&w), &matmul(&yqy_inv[j], &w))[0][0];
    }
    let denom = 2.0 * big_a + (0..p).map(|j| lp[j] * lp[j] * a[j] * a[j] / dfree[j]).sum::<f64>();
    MmrmOracle { tau_hat_p, kr_variance: lead + 2.0 * corr, df: lead * lead / denom, sigma_sq, v_x }
}

/// Six subjects, two visits, one covariate; the last control subject
/// leaves after the first visit.
pub fn six_subjects() -> Dataset {
    let rows: [(u8, f64, [f64; 2], usize); 6] = [
        (0, 0.4, [1.1, 2.0], 2),
        (0, -0.9, [0.2, 0.3], 2),
        (0, 1.3, [2.4, 2.1], 1),
        (1, -0.2, [1.9, 3.3], 2),
        (1, 0.8, [2.6, 4.1], 2),
        (1, -1.4, [0.9, 1.2], 2),
    ];
    let mut d = Dataset::with_capacity(6, 1, 2);
    for (g, x, y, obs) in rows {
        d.push(g, &[x], &y, obs);
    }
    d
}

// ---------------------------------------------------------------------
// property checks

fn dof(f: f64) -> Dof {
    Dof::new(f).unwrap()
}

fn ncp(l: f64) -> Noncentrality {
    Noncentrality::new(l).unwrap()
}

/// Runs `test` over `strategy` for `cases` cases; the error carries the
/// shrunk counterexample.
pub fn check<S, F>(cases: u32, strategy: S, test: F) -> Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn close(a: f64, b: f64, tol: f64, what: &str) -> Result<(), TestCaseError> {
    if (a - b).abs() <= tol {
        Ok(())
    } else {
        Err(TestCaseError::fail(format!("{what}: {a} vs {b} (tolerance {tol:e})")))
    }
}

pub fn t_f_identity(cases: u32) -> Result<(), String> {
    check(cases, (0.2f64..4.0, 1.5f64..80.0, -4.0f64..4.0), |(c, f, l)| {
        let via_f = f_sf(c * c, dof(1.0), dof(f), Noncentrality::for_f(l * l).unwrap());
        let via_t = t_sf(c, dof(f), ncp(l)) + t_cdf(-c, dof(f), ncp(l));
        close(via_f, via_t, 1e-9, "F(1, f) tail vs two t tails")
    })
}

pub fn quantile_round_trips(cases: u32) -> Result<(), String> {
    check(cases, (0.001f64..0.999, 0.8f64..500.0), |(p, f)| {
        let t = t_quantile(p, dof(f)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        close(t_cdf(t, dof(f), Noncentrality::ZERO), p, 1e-9, "t quantile")?;
        let z = normal_quantile(p).map_err(|e| TestCaseError::fail(e.to_string()))?;
        close(normal_cdf(z), p, 1e-12, "normal quantile")
    })
}

fn kernel_strategy() -> impl Strategy<Value = (u8, f64, f64, f64, f64)> {
    // (design, effect, second variance, allocation, target power)
    (0u8..3, 0.2f64..2.5, 0.3f64..5.0, 0.3f64..0.7, 0.6f64..0.95)
}

fn make_kernel(kind: u8, d: f64, v1: f64, g: f64) -> TestKernel {
    match kind {
        0 => one_sample_kernel(d, 0.0, 1.0).unwrap(),
        1 => two_sample_kernel(&TwoSampleSpec::equal(0.0, d, 1.0, g), 0.0).unwrap(),
        _ => two_sample_kernel(&TwoSampleSpec::unequal(0.0, d, 1.0, v1, g), 0.0).unwrap(),
    }
}

pub fn size_ordering(cases: u32) -> Result<(), String> {
    check(cases, (kernel_strategy(), prop_oneof![Just(0.01), Just(0.05), Just(0.1)]), |((kind, d, v1, g, p), a)| {
        let k = make_kernel(kind, d, v1, g);
        let err = |e: tsize::Error| TestCaseError::fail(e.to_string());
        let n = size_normal(&k, a, p).map_err(err)?.fractional;
        let g1 = size_g1(&k, a, p).map_err(err)?.fractional;
        let g2 = size_g2(&k, a, p).map_err(err)?.fractional;
        if n < g1 && g1 < g2 {
            Ok(())
        } else {
            Err(TestCaseError::fail(format!("normal {n}, g1 {g1}, g2 {g2}")))
        }
    })
}

pub fn quadratic_root_bounds(cases: u32) -> Result<(), String> {
    check(cases, (2.0f64..2000.0, 1u32..12), |(n_asy, q)| {
        let q = q as f64;
        let root = quadratic_root(n_asy, q);
        if n_asy + q < root && root < n_asy + q + 3.0 {
            Ok(())
        } else {
            Err(TestCaseError::fail(format!("root {root} outside ({}, {})", n_asy + q, n_asy + q + 3.0)))
        }
    })
}

pub fn ldl_reconstruction(cases: u32) -> Result<(), String> {
    let entries = prop::collection::vec(-3.0f64..3.0, 36);
    check(cases, (2usize..=6, entries, 0.05f64..2.0), |(p, e, ridge)| {
        let b: Mat = (0..p).map(|i| (0..p).map(|j| e[i * 6 + j]).collect()).collect();
        let mut sigma = matmul(&b, &transpose(&b));
        for (i, row) in sigma.iter_mut().enumerate() {
            row[i] += ridge;
        }
        let f = ldl_decompose(&sigma).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let r = f.reconstruct();
        let scale = sigma.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..p {
            for j in 0..p {
                close(r[i][j], sigma[i][j], 1e-10 * scale, "LDL reconstruction")?;
            }
        }
        Ok(())
    })
}

/// ANCOVA without covariates is the pooled two-sample t test, for the
/// power formula and for the fitted statistic.
pub fn ancova_without_covariates(cases: u32) -> Result<(), String> {
    let ys = prop::collection::vec(-3.0f64..3.0, 24);
    check(cases, (0.1f64..2.0, 0.3f64..0.7, 8.0f64..120.0, ys, 3usize..12), |(d, g, n, ys, n0)| {
        let s = AncovaSpec::new(d, 0.0, 1.0, g, 0).unwrap();
        let k = two_sample_kernel(&TwoSampleSpec::equal(0.0, d, 1.0, g), 0.0).unwrap();
        let a = ancova_power_exact(&s, n, 0.05).unwrap().value;
        let b = power_two_sided(&k, n, 0.05).unwrap().value;
        close(a, b, 1e-8, "ANCOVA q = 0 power vs t test")?;

        let n1 = 24 - n0;
        let mut data = Dataset::with_capacity(24, 0, 1);
        for (i, &y) in ys.iter().enumerate() {
            data.push((i >= n0) as u8, &[], &[y], 1);
        }
        let fit = analyze_ancova(&data).unwrap();
        let (m0, m1) = (ys[..n0].iter().sum::<f64>() / n0 as f64, ys[n0..].iter().sum::<f64>() / n1 as f64);
        let ss: f64 = ys[..n0].iter().map(|y| (y - m0).powi(2)).sum::<f64>() + ys[n0..].iter().map(|y| (y - m1).powi(2)).sum::<f64>();
        let pooled = ss / (24 - 2) as f64;
        close(fit.tau_hat, m1 - m0, 1e-10, "estimate")?;
        close(fit.se(), (pooled * (1.0 / n0 as f64 + 1.0 / n1 as f64)).sqrt(), 1e-10, "standard error")?;
        close(fit.df, 22.0, 0.0, "d.f.")
    })
}

/// One visit with full retention: the MMRM power and fit are the ANCOVA ones.
pub fn mmrm_single_visit(cases: u32) -> Result<(), String> {
    let cells = prop::collection::vec((-2.0f64..2.0, -3.0f64..3.0), 16);
    check(cases, (0.5f64..6.0, 0.5f64..10.0, 1u32..4, 0.3f64..0.7, 12.0f64..150.0, cells), |(d, v, q, g, n, cells)| {
        let design = MmrmDesign::new(vec![vec![v]], [vec![1.0], vec![1.0]], g, q, d, 0.0).unwrap();
        let s = AncovaSpec::new(d, 0.0, v, g, q).unwrap();
        let a = mmrm_power(&design, n, 0.05).unwrap().value;
        let b = ancova_power_approx(&s, n, 0.05).unwrap().value;
        close(a, b, 1e-8, "single-visit MMRM power vs ANCOVA")?;

        let mut data = Dataset::with_capacity(16, 1, 1);
        for (i, &(x, y)) in cells.iter().enumerate() {
            data.push((i % 2) as u8, &[x], &[y + x * x], 1);
        }
        let (mm, an) = (analyze_mmrm(&data).unwrap(), analyze_ancova(&data).unwrap());
        close(mm.tau_hat_p, an.tau_hat, 1e-10, "estimate")?;
        close(mm.kr_variance, an.se().powi(2), 1e-10, "variance")?;
        close(mm.satterthwaite_df, an.df, 1e-8, "d.f.")
    })
}

/// Welch equivalence power with one infinite margin is the one-tailed
/// Welch superiority power.
pub fn welch_one_sided_reduction(cases: u32) -> Result<(), String> {
    check(cases, (0.2f64..1.5, 0.3f64..5.0, 0.3f64..0.7, 10.0f64..120.0), |(d, v1, g, n)| {
        let s = TwoSampleSpec::unequal(0.0, d, 1.0, v1, g);
        let m = Margins::one_sided(0.0, f64::INFINITY, MarginKind::Superiority).unwrap();
        let eq = ts_unequal_equiv_power(&s, &m, n, 0.05, false).unwrap().value;
        let moser = moser_one_sided_power(&s, 0.0, n, 0.05).unwrap().value;
        close(eq, moser, 1e-8, "one-sided Welch equivalence vs one-tailed Welch power")
    })
}

pub fn equivalence_exact_dominates(cases: u32) -> Result<(), String> {
    check(cases, (0u8..3, 0.2f64..2.0, 0.3f64..5.0, 0.1f64..0.9, 5.0f64..200.0), |(kind, w, v1, shift, n)| {
        let k = make_kernel(kind, 0.0, v1, 0.5);
        let centre = (shift - 0.5) * w;
        let k = k.with_effect(0.0, centre);
        let m = Margins::equivalence(-w, w).unwrap();
        if n <= k.min_n + 1.0 {
            return Ok(());
        }
        let exact = equiv_power_exact(&k, &m, n, 0.1).unwrap().value;
        let approx = equiv_power_approx(&k, &m, n, 0.1).unwrap().value;
        // the exact power carries the single-integral quadrature tolerance
        if approx <= exact + NumericSettings::DEFAULT.single_tol {
            Ok(())
        } else {
            Err(TestCaseError::fail(format!(
                "kind {kind} margin {w} v1 {v1} centre {centre} n {n}: approx {approx} above exact {exact}"
            )))
        }
    })
}

pub fn ancova_equivalence_exact_dominates(cases: u32) -> Result<(), String> {
    check(cases, (1u32..4, 0.3f64..2.0, -0.5f64..0.5, 10.0f64..120.0), |(q, w, shift, n)| {
        let s = AncovaSpec::new(shift * w, 0.0, 1.0, 0.5, q).unwrap();
        let m = Margins::equivalence(-w, w).unwrap();
        let exact = ancova_equiv_power(&s, &m, n, 0.05, true).unwrap().value;
        let approx = ancova_equiv_power(&s, &m, n, 0.05, false).unwrap().value;
        if approx <= exact + 1e-7 {
            Ok(())
        } else {
            Err(TestCaseError::fail(format!("q {q} margin {w} shift {shift} n {n}: approx {approx} above exact {exact}")))
        }
    })
}
