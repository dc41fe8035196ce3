//! Worked fixtures: the six study tables, their deterministic columns and
//! the matching Monte Carlo scenarios.
//!
//! Every table is emitted in long format: one record per (row, quantity,
//! method). Sizes are totals; powers are percentages.

use std::io::Write;

use crate::ancova::{ancova_power_approx, ancova_power_exact, ancova_size_chain, AncovaSpec};
use crate::designs::{crossover_kernel, moser_exact_power, two_sample_kernel, CrossoverSpec, TwoSampleSpec};
use crate::equivalence::{
    be_adapter, equiv_power_approx, equiv_power_exact, equiv_size_symmetric, ts_unequal_equiv_power, BeDesign,
    BeLimits, Margins,
};
use crate::error::{domain, Error, Result};
use crate::kernel::{power, size_g1, size_g2, size_invert, size_normal, size_two_step, SizeMethod};
use crate::mmrm::{
    ar1, compound_symmetry, mmrm_equiv_power, mmrm_equiv_size_chain, mmrm_power, mmrm_power_approx,
    mmrm_size_chain, toeplitz, Matrix, MmrmDesign,
};
use crate::simulate::{Generator, Objective, ScenarioSpec, Strata, DEFAULT_REPS_MMRM, DEFAULT_REPS_T};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Size,
    Power,
}

impl Quantity {
    pub fn label(self) -> &'static str {
        match self {
            Quantity::Size => "size",
            Quantity::Power => "power",
        }
    }
}

/// One cell of a reproduced table.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub table: u8,
    /// Zero-based row within the table.
    pub row: usize,
    /// Row-identifying columns, e.g. `("variance", "equal")`.
    pub keys: Vec<(&'static str, String)>,
    pub quantity: Quantity,
    pub method: &'static str,
    /// Total size at which a power was evaluated.
    pub n: Option<f64>,
    pub value: f64,
}

struct Builder {
    table: u8,
    out: Vec<Record>,
}

impl Builder {
    fn size(&mut self, row: usize, keys: &[(&'static str, String)], method: &'static str, v: f64) {
        self.push(row, keys, Quantity::Size, method, None, v);
    }

    fn power(&mut self, row: usize, keys: &[(&'static str, String)], method: &'static str, n: f64, p: f64) {
        self.push(row, keys, Quantity::Power, method, Some(n), 100.0 * p);
    }

    fn push(&mut self, row: usize, keys: &[(&'static str, String)], q: Quantity, m: &'static str, n: Option<f64>, v: f64) {
        self.out.push(Record { table: self.table, row, keys: keys.to_vec(), quantity: q, method: m, n, value: v });
    }
}

/// Ceil of half the total, doubled: the per-arm rounding of the t-test tables.
fn per_arm_up(total: f64) -> f64 {
    2.0 * (total / 2.0).ceil()
}

pub const TABLE1_EFFECTS: [f64; 8] = [0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25];

/// Two-sample superiority designs: eight equal-variance rows then eight
/// with `(σ0², σ1²) = (1, 4)`.
pub fn table1_designs() -> Vec<TwoSampleSpec> {
    let mut v: Vec<TwoSampleSpec> = TABLE1_EFFECTS.iter().map(|&d| TwoSampleSpec::equal(0.0, d, 1.0, 0.5)).collect();
    v.extend(TABLE1_EFFECTS.iter().map(|&d| TwoSampleSpec::unequal(0.0, d, 1.0, 4.0, 0.5)));
    v
}

fn two_sample_exact_power(s: &TwoSampleSpec, n: f64, alpha: f64) -> Result<f64> {
    if s.equal_variance {
        Ok(power(&two_sample_kernel(s, 0.0)?, n, alpha)?.value)
    } else {
        Ok(moser_exact_power(s, 0.0, n, alpha)?.value)
    }
}

/// Exact size: inversion of the exact power (pooled t or Welch).
pub fn two_sample_exact_size(s: &TwoSampleSpec, alpha: f64, p: f64) -> Result<f64> {
    let k = two_sample_kernel(s, 0.0)?;
    let hint = size_g2(&k, alpha, p)?.fractional;
    size_invert(|n| two_sample_exact_power(s, n, alpha), p, hint, k.min_n)
}

fn table1(alpha: f64, p: f64) -> Result<Vec<Record>> {
    let mut b = Builder { table: 1, out: Vec::new() };
    for (row, s) in table1_designs().iter().enumerate() {
        let keys = [
            ("variance", if s.equal_variance { "equal" } else { "unequal" }.to_string()),
            ("mu1_minus_mu0", format!("{:.2}", s.mu1 - s.mu0)),
        ];
        let k = two_sample_kernel(s, 0.0)?;
        let exact = two_sample_exact_size(s, alpha, p)?;
        b.size(row, &keys, "exact", exact);
        b.size(row, &keys, "normal", size_normal(&k, alpha, p)?.fractional);
        b.size(row, &keys, "two_step", size_two_step(&k, alpha, p)?.fractional);
        b.size(row, &keys, "g1", size_g1(&k, alpha, p)?.fractional);
        b.size(row, &keys, "g2", size_g2(&k, alpha, p)?.fractional);
        let n = per_arm_up(exact);
        b.power(row, &keys, "exact", n, two_sample_exact_power(s, n, alpha)?);
    }
    Ok(b.out)
}

pub const TABLE2_EFFECTS: [f64; 5] = [1.0, 1.25, 1.5, 1.75, 2.0];

/// ANCOVA designs: five rows with one covariate, five with three.
pub fn table2_designs() -> Vec<AncovaSpec> {
    [1u32, 3]
        .iter()
        .flat_map(|&q| TABLE2_EFFECTS.iter().map(move |&t| AncovaSpec { tau1: t, tau0: 0.0, sigma_sq: 1.0, gamma0: 0.5, q }))
        .collect()
}

fn table2(alpha: f64, p: f64) -> Result<Vec<Record>> {
    let mut b = Builder { table: 2, out: Vec::new() };
    for (row, s) in table2_designs().iter().enumerate() {
        let keys = [("q", s.q.to_string()), ("tau", format!("{:.2}", s.tau1))];
        let c = ancova_size_chain(s, alpha, p)?;
        b.size(row, &keys, "inversion_exact", c.inversion);
        b.size(row, &keys, "normal_asymptotic", c.n_asy);
        b.size(row, &keys, "normal_inflated", c.n_tilde);
        b.size(row, &keys, "inversion_asymptotic_t", c.inversion_asymptotic);
        b.size(row, &keys, "two_step", c.two_step);
        b.size(row, &keys, "g1", c.g1);
        b.size(row, &keys, "g2", c.g2);
        let n = per_arm_up(c.inversion);
        b.power(row, &keys, "exact", n, ancova_power_exact(s, n, alpha)?.value);
        b.power(row, &keys, "approx", n, ancova_power_approx(s, n, alpha)?.value);
    }
    Ok(b.out)
}

/// Covariance of the four post-baseline visits in the depression example.
pub fn hamd_unstructured() -> Matrix {
    vec![
        vec![19.68, 16.45, 15.39, 16.36],
        vec![16.45, 34.0, 25.34, 26.13],
        vec![15.39, 25.34, 38.44, 33.91],
        vec![16.36, 26.13, 33.91, 45.28],
    ]
}

pub fn hamd_structures() -> Vec<(&'static str, Matrix)> {
    vec![
        ("UN", hamd_unstructured()),
        ("CS", compound_symmetry(4, 45.0, 15.0)),
        ("AR", ar1(4, 45.0, 0.8)),
        ("TOEP", toeplitz(&[40.0, 34.0, 28.0, 22.0])),
    ]
}

pub fn hamd_retention() -> [Vec<f64>; 2] {
    [vec![1.0, 0.92, 0.86, 0.74], vec![1.0, 0.93, 0.87, 0.76]]
}

/// `(structure, q, effect at the last visit)` for the superiority MMRM table.
pub fn table3_rows() -> Vec<(&'static str, Matrix, u32, f64)> {
    let mut v = Vec::new();
    for q in [1u32, 3] {
        for (name, sigma) in hamd_structures() {
            for tau in [-12.0, -8.0, -4.0] {
                v.push((name, sigma.clone(), q, tau));
            }
        }
    }
    v
}

fn table3(alpha: f64, p: f64) -> Result<Vec<Record>> {
    let mut b = Builder { table: 3, out: Vec::new() };
    for (row, (name, sigma, q, tau)) in table3_rows().into_iter().enumerate() {
        let keys = [("q", q.to_string()), ("structure", name.to_string()), ("tau4", format!("{tau}"))];
        let d = MmrmDesign::new(sigma, hamd_retention(), 0.5, q, tau, 0.0)?;
        let c = mmrm_size_chain(&d, alpha, p)?;
        mmrm_size_records(&mut b, row, &keys, &c);
        let n = c.g2.ceil();
        b.power(row, &keys, "kenward_roger", n, mmrm_power(&d, n, alpha)?.value);
        b.power(row, &keys, "asymptotic_df", n, mmrm_power_approx(&d, n, alpha)?.value);
    }
    Ok(b.out)
}

fn mmrm_size_records(b: &mut Builder, row: usize, keys: &[(&'static str, String)], c: &crate::mmrm::MmrmSizes) {
    b.size(row, keys, "inversion", c.inversion);
    b.size(row, keys, "normal_asymptotic", c.n_a);
    b.size(row, keys, "normal_inflated", c.n_tilde);
    b.size(row, keys, "two_step", c.two_step);
    b.size(row, keys, "g1", c.g1);
    b.size(row, keys, "g2", c.g2);
}

/// Per-sequence sizes used for the half-size stress rows of the BE table.
pub const TABLE4_HALF: [f64; 6] = [3.0, 5.0, 7.0, 9.0, 12.0, 14.0];

pub fn table4_designs() -> Vec<CrossoverSpec> {
    (1..=6)
        .map(|k| CrossoverSpec {
            mu_star_a: 0.0,
            mu_star_b: 0.0,
            sigma_d_sq: 4.0 * 0.0125 * k as f64,
            gamma0: 0.5,
            period_effect_in_analysis: true,
        })
        .collect()
}

fn table4(p: f64) -> Result<Vec<Record>> {
    let mut b = Builder { table: 4, out: Vec::new() };
    for (row, c) in table4_designs().iter().enumerate() {
        let keys = [("sigma_sq", format!("{:.4}", c.sigma_d_sq / 4.0))];
        let be = be_adapter(&BeDesign::Crossover(*c))?;
        let (k, m, a) = (&be.kernel, &be.margins, be.alpha);
        let exact = equiv_size_symmetric(k, m, a, p, SizeMethod::Inversion)?.fractional;
        b.size(row, &keys, "exact", exact);
        for (label, method) in [
            ("normal", SizeMethod::Normal),
            ("two_step", SizeMethod::TwoStep),
            ("g1", SizeMethod::G1),
            ("g2", SizeMethod::G2),
        ] {
            b.size(row, &keys, label, equiv_size_symmetric(k, m, a, p, method)?.fractional);
        }
        let full = 2.0 * (exact / 2.0).round();
        let half = 2.0 * TABLE4_HALF[row];
        for (halved, n) in [(false, full), (true, half)] {
            b.power(row, &keys, label(halved, "exact"), n, equiv_power_exact(k, m, n, a)?.value);
            b.power(row, &keys, label(halved, "approx"), n, equiv_power_approx(k, m, n, a)?.value);
        }
        let one = crossover_kernel(&CrossoverSpec { period_effect_in_analysis: false, ..*c })?;
        b.power(row, &keys, "one_sample_exact", full, equiv_power_exact(&one, m, full, a)?.value);
    }
    Ok(b.out)
}

/// Method label, prefixed for the half-size rows.
fn label(halved: bool, method: &'static str) -> &'static str {
    if !halved {
        return method;
    }
    match method {
        "exact" => "half_exact",
        "approx" => "half_approx",
        "welch_exact" => "half_welch_exact",
        "welch_approx" => "half_welch_approx",
        _ => unreachable!("no half-size label for {method}"),
    }
}

pub const TABLE5_MARGINS: [f64; 3] = [0.5, 1.0, 1.5];
/// Per-treatment sizes for the half-size rows.
pub const TABLE5_HALF: [f64; 3] = [106.0, 27.0, 12.0];

pub fn table5_design() -> TwoSampleSpec {
    TwoSampleSpec::unequal(0.0, 0.0, 1.0, 4.0, 0.5)
}

fn table5(alpha: f64, p: f64) -> Result<Vec<Record>> {
    let mut b = Builder { table: 5, out: Vec::new() };
    let s = table5_design();
    let k = two_sample_kernel(&s, 0.0)?;
    for (row, &mu) in TABLE5_MARGINS.iter().enumerate() {
        let keys = [("margin", format!("{mu:.1}"))];
        let m = Margins::symmetric(mu)?;
        let hint = equiv_size_symmetric(&k, &m, alpha, p, SizeMethod::G2)?.fractional;
        let exact = size_invert(|n| Ok(ts_unequal_equiv_power(&s, &m, n, alpha, true)?.value), p, hint, k.min_n)?;
        b.size(row, &keys, "exact", exact);
        for (label, method) in [
            ("normal", SizeMethod::Normal),
            ("two_step", SizeMethod::TwoStep),
            ("g1", SizeMethod::G1),
            ("g2", SizeMethod::G2),
        ] {
            b.size(row, &keys, label, equiv_size_symmetric(&k, &m, alpha, p, method)?.fractional);
        }
        let full = 2.0 * (exact / 2.0).round();
        let half = 2.0 * TABLE5_HALF[row];
        for (halved, n) in [(false, full), (true, half)] {
            b.power(row, &keys, label(halved, "welch_exact"), n, ts_unequal_equiv_power(&s, &m, n, alpha, true)?.value);
            b.power(row, &keys, label(halved, "welch_approx"), n, ts_unequal_equiv_power(&s, &m, n, alpha, false)?.value);
            b.power(row, &keys, label(halved, "exact"), n, equiv_power_exact(&k, &m, n, alpha)?.value);
            b.power(row, &keys, label(halved, "approx"), n, equiv_power_approx(&k, &m, n, alpha)?.value);
        }
    }
    Ok(b.out)
}

/// `(structure, q, symmetric margin)` for the MMRM equivalence table.
pub fn table6_rows() -> Vec<(&'static str, Matrix, u32, f64)> {
    let mut v = Vec::new();
    for q in [1u32, 3] {
        for (name, sigma) in hamd_structures() {
            for m in [8.0, 4.0] {
                v.push((name, sigma.clone(), q, m));
            }
        }
    }
    v
}

fn table6(alpha: f64, p: f64) -> Result<Vec<Record>> {
    let mut b = Builder { table: 6, out: Vec::new() };
    for (row, (name, sigma, q, m)) in table6_rows().into_iter().enumerate() {
        let keys = [("q", q.to_string()), ("structure", name.to_string()), ("margin", format!("{m}"))];
        let d = MmrmDesign::new(sigma, hamd_retention(), 0.5, q, 0.0, 0.0)?;
        let c = mmrm_equiv_size_chain(&d, (-m, m), alpha, p)?;
        mmrm_size_records(&mut b, row, &keys, &c);
        let n = c.g2.ceil();
        b.power(row, &keys, "equivalence", n, mmrm_equiv_power(&d, (-m, m), n, alpha)?.value);
    }
    Ok(b.out)
}

/// Significance level and target power each table was built with.
pub fn table_levels(table: u8) -> Result<(f64, f64)> {
    match table {
        1 | 2 => Ok((0.05, 0.8)),
        3 | 6 => Ok((0.05, 0.9)),
        4 => Ok((BeLimits::ALPHA, 0.8)),
        5 => Ok((0.05, 0.8)),
        _ => domain(format!("no table {table}; tables are numbered 1 to 6")),
    }
}

/// Deterministic columns of table `table` at its own α and target power.
pub fn reproduce(table: u8) -> Result<Vec<Record>> {
    let (a, p) = table_levels(table)?;
    reproduce_at(table, a, p)
}

/// As [`reproduce`], overriding α and the target power. The BE table keeps
/// its regulatory α = 0.1 and ignores `alpha`.
pub fn reproduce_at(table: u8, alpha: f64, p: f64) -> Result<Vec<Record>> {
    match table {
        1 => table1(alpha, p),
        2 => table2(alpha, p),
        3 => table3(alpha, p),
        4 => table4(p),
        5 => table5(alpha, p),
        6 => table6(alpha, p),
        _ => domain(format!("no table {table}; tables are numbered 1 to 6")),
    }
}

/// Long-format CSV; values with two decimals.
pub fn write_csv<W: Write>(records: &[Record], w: W) -> Result<()> {
    let io = |e: csv::Error| Error::Config(format!("writing CSV: {e}"));
    let mut out = csv::Writer::from_writer(w);
    let key_names: Vec<&str> = records.first().map(|r| r.keys.iter().map(|k| k.0).collect()).unwrap_or_default();
    let mut header = vec!["table", "row"];
    header.extend(&key_names);
    header.extend(["quantity", "method", "n", "value"]);
    out.write_record(&header).map_err(io)?;
    for r in records {
        let mut line = vec![r.table.to_string(), (r.row + 1).to_string()];
        line.extend(r.keys.iter().map(|k| k.1.clone()));
        line.push(r.quantity.label().to_string());
        line.push(r.method.to_string());
        line.push(r.n.map(|n| format!("{n:.0}")).unwrap_or_default());
        line.push(format!("{:.2}", r.value));
        out.write_record(&line).map_err(io)?;
    }
    out.flush().map_err(|e| Error::Config(format!("writing CSV: {e}")))?;
    Ok(())
}

/// A formula prediction paired with the scenario that checks it.
#[derive(Debug, Clone)]
pub struct SimFixture {
    pub table: u8,
    pub label: String,
    pub scenario: ScenarioSpec,
    pub n: [usize; 2],
    pub alpha: f64,
    pub objective: Objective,
    /// Predicted rejection rate, as a probability.
    pub predicted: f64,
}

fn split(total: f64) -> [usize; 2] {
    let t = total as usize;
    [t - t / 2, t / 2]
}

fn hamd_generator(sigma: Matrix, q: u32, tau4: f64) -> Generator {
    let tau = if tau4 == 0.0 { vec![0.0; 4] } else { vec![0.1, -1.5, -2.3, tau4] };
    Generator::Mmrm {
        sigma,
        retention: hamd_retention(),
        mu: vec![3.3, 2.7, 2.9, 1.0],
        alpha: vec![0.72, 0.69, 0.61, 0.67],
        tau,
        strata: (q == 3).then(|| Strata { eta: vec![0.0, -0.5, 0.5], probs: vec![0.3, 0.4, 0.3] }),
    }
}

fn ancova_generator(s: &AncovaSpec) -> Generator {
    let strata = (s.q == 3).then(|| Strata { eta: vec![0.5, 0.0, 1.0], probs: vec![0.4, 0.4, 0.2] });
    Generator::Ancova { tau: s.tau1, sigma_sq: s.sigma_sq, intercept: if s.q == 3 { 0.0 } else { 0.5 }, beta: 0.5, strata }
}

/// Simulation counterparts of every exact power column, plus null and
/// margin configurations whose rejection rate should equal the nominal level.
pub fn sim_fixtures(seed: u64) -> Result<Vec<SimFixture>> {
    let mut out = Vec::new();
    let mut push = |table, label: String, generator, n, alpha, objective, predicted, reps| {
        let scenario = ScenarioSpec { generator, replicates: reps, seed: seed.wrapping_add(out.len() as u64) };
        out.push(SimFixture { table, label, scenario, n, alpha, objective, predicted });
    };
    let sup = Objective::TwoSided { tau0: 0.0 };

    for rec in table1(0.05, 0.8)?.iter().filter(|r| r.quantity == Quantity::Power) {
        let s = table1_designs()[rec.row];
        let g = Generator::TwoSample {
            mu0: s.mu0,
            mu1: s.mu1,
            sigma0_sq: s.sigma0_sq,
            sigma1_sq: s.sigma1_sq,
            welch: !s.equal_variance,
        };
        let n = rec.n.unwrap_or_default();
        push(1, format!("row {}", rec.row + 1), g, split(n), 0.05, sup, rec.value / 100.0, DEFAULT_REPS_T);
    }
    for rec in table2(0.05, 0.8)?.iter().filter(|r| r.method == "exact") {
        let s = table2_designs()[rec.row];
        let n = rec.n.unwrap_or_default();
        push(2, format!("row {}", rec.row + 1), ancova_generator(&s), split(n), 0.05, sup, rec.value / 100.0, DEFAULT_REPS_T);
    }
    for rec in table3(0.05, 0.9)?.iter().filter(|r| r.method == "kenward_roger") {
        let (name, sigma, q, tau) = table3_rows().swap_remove(rec.row);
        let n = rec.n.unwrap_or_default();
        let label = format!("{name} q={q} tau4={tau}");
        push(3, label, hamd_generator(sigma, q, tau), split(n), 0.05, sup, rec.value / 100.0, DEFAULT_REPS_MMRM);
    }
    let be = BeLimits::STANDARD.margins();
    for rec in table4(0.8)?.iter().filter(|r| r.quantity == Quantity::Power && (r.method == "exact" || r.method == "half_exact")) {
        let c = table4_designs()[rec.row];
        let g = Generator::Crossover { tau: 0.0, sigma_d_sq: c.sigma_d_sq, period_delta: 0.0, period_effect_in_analysis: true };
        let n = rec.n.unwrap_or_default();
        let label = format!("row {} {}", rec.row + 1, rec.method);
        push(4, label, g, split(n), BeLimits::ALPHA, Objective::Inside(be), rec.value / 100.0, DEFAULT_REPS_T);
    }
    let s5 = table5_design();
    for rec in table5(0.05, 0.8)?.iter().filter(|r| r.method == "welch_exact" || r.method == "half_welch_exact") {
        let m = Margins::symmetric(TABLE5_MARGINS[rec.row])?;
        let g = Generator::TwoSample { mu0: 0.0, mu1: 0.0, sigma0_sq: s5.sigma0_sq, sigma1_sq: s5.sigma1_sq, welch: true };
        let n = rec.n.unwrap_or_default();
        let label = format!("row {} {}", rec.row + 1, rec.method);
        push(5, label, g, split(n), 0.05, Objective::Inside(m), rec.value / 100.0, DEFAULT_REPS_T);
    }
    for rec in table6(0.05, 0.9)?.iter().filter(|r| r.quantity == Quantity::Power) {
        let (name, sigma, q, m) = table6_rows().swap_remove(rec.row);
        let n = rec.n.unwrap_or_default();
        let label = format!("{name} q={q} margin={m}");
        let obj = Objective::Inside(Margins::symmetric(m)?);
        push(6, label, hamd_generator(sigma, q, 0.0), split(n), 0.05, obj, rec.value / 100.0, DEFAULT_REPS_MMRM);
    }

    // nominal-level configurations (table 0)
    let null_t = Generator::TwoSample { mu0: 0.0, mu1: 0.0, sigma0_sq: 1.0, sigma1_sq: 1.0, welch: false };
    push(0, "pooled t, null".into(), null_t, [12, 12], 0.05, sup, 0.05, DEFAULT_REPS_T);
    let null_w = Generator::TwoSample { mu0: 0.0, mu1: 0.0, sigma0_sq: 1.0, sigma1_sq: 4.0, welch: true };
    push(0, "Welch, null".into(), null_w, [10, 10], 0.05, sup, 0.05, DEFAULT_REPS_T);
    let null_a = ancova_generator(&AncovaSpec { tau1: 0.0, tau0: 0.0, sigma_sq: 1.0, gamma0: 0.5, q: 3 });
    push(0, "ANCOVA q=3, null".into(), null_a, [10, 10], 0.05, sup, 0.05, DEFAULT_REPS_T);
    push(0, "MMRM UN q=1, null".into(), hamd_generator(hamd_unstructured(), 1, 0.0), [20, 20], 0.05, sup, 0.05, DEFAULT_REPS_MMRM);
    let ni = Margins::one_sided(-0.5, f64::INFINITY, crate::equivalence::MarginKind::Noninferiority)?;
    let at_margin = Generator::TwoSample { mu0: 0.0, mu1: -0.5, sigma0_sq: 1.0, sigma1_sq: 4.0, welch: true };
    push(0, "Welch NI, effect on the margin".into(), at_margin, [25, 25], 0.05, Objective::Inside(ni), 0.025, DEFAULT_REPS_T);
    let tost = Generator::Crossover { tau: be.upper, sigma_d_sq: 0.05, period_delta: 0.0, period_effect_in_analysis: true };
    push(0, "BE crossover, effect on the upper limit".into(), tost, [10, 10], BeLimits::ALPHA, Objective::Inside(be), 0.05, DEFAULT_REPS_T);
    Ok(out)
}
