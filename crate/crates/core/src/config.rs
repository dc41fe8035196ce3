//! Design files: one TOML document per scenario.
//!
//! ```toml
//! [design]
//! kind = "two-sample"      # one-sample | two-sample | crossover | ancova | mmrm
//! mu0 = 0.0
//! mu1 = 0.5
//! sigma_sq = 1.0           # or sigma0_sq / sigma1_sq for a Welch analysis
//! allocation = 0.5         # share of subjects in the reference group
//!
//! [objective]
//! kind = "superiority"     # superiority (tau0) | noninferiority (margin) | equivalence (lower, upper)
//! tau0 = 0.0
//!
//! [levels]
//! alpha = 0.05
//! power = 0.8
//! n = 128                  # total, or [n0, n1]
//!
//! [simulation]
//! replicates = 100000
//! seed = 1
//! ```
//!
//! Generator settings that only matter for simulation (intercepts, slopes,
//! strata, period effect, visit means) live in `[simulation]`.

use std::path::Path;

use serde::Deserialize;

use crate::ancova::{
    ancova_power_approx, ancova_power_asymptotic_t, ancova_power_exact, ancova_size_chain, AncovaSpec,
};
use crate::designs::{
    crossover_kernel, moser_exact_power, moser_one_sided_power, one_sample_kernel, two_sample_kernel, CrossoverSpec,
    TwoSampleSpec,
};
use crate::equivalence::{
    ancova_equiv_power, equiv_power_approx, equiv_power_exact, equiv_size_bounds, equiv_size_symmetric,
    ts_unequal_equiv_power, MarginKind, Margins,
};
use crate::error::{Error, Result};
use crate::kernel::{
    apply_ni_margin, power, power_one_sided_approx, power_two_sided, size_chain, size_g2, size_invert, split_total,
    PowerEstimate, Rounding, SizeMethod, TestKernel,
};
use crate::mmrm::{
    ar1, compound_symmetry, mmrm_equiv_power, mmrm_equiv_size_chain, mmrm_power, mmrm_power_approx,
    mmrm_size_chain, toeplitz, Matrix, MmrmDesign, MmrmSizes,
};
use crate::simulate::{Generator, Objective, ScenarioSpec, Strata, DEFAULT_REPS_MMRM, DEFAULT_REPS_T};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    pub design: DesignConfig,
    #[serde(default)]
    pub objective: ObjectiveConfig,
    #[serde(default)]
    pub levels: Levels,
    #[serde(default)]
    pub simulation: SimulationConfig,
}

fn half() -> f64 {
    0.5
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DesignConfig {
    OneSample {
        mu: f64,
        sigma_sq: f64,
    },
    TwoSample {
        mu0: f64,
        mu1: f64,
        sigma_sq: Option<f64>,
        sigma0_sq: Option<f64>,
        sigma1_sq: Option<f64>,
        #[serde(default = "half")]
        allocation: f64,
    },
    /// 2×2 crossover; `effect` is the treatment difference on the analysis scale.
    Crossover {
        effect: f64,
        sigma_d_sq: f64,
        #[serde(default = "half")]
        allocation: f64,
        #[serde(default = "yes")]
        period_effect: bool,
    },
    Ancova {
        effect: f64,
        sigma_sq: f64,
        covariates: u32,
        #[serde(default = "half")]
        allocation: f64,
    },
    Mmrm {
        covariance: CovarianceConfig,
        retention: [Vec<f64>; 2],
        covariates: u32,
        /// Effect at the last visit.
        effect: f64,
        #[serde(default = "half")]
        allocation: f64,
    },
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "structure", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CovarianceConfig {
    Unstructured { matrix: Matrix },
    CompoundSymmetry { visits: usize, variance: f64, covariance: f64 },
    Ar1 { visits: usize, variance: f64, rho: f64 },
    Toeplitz { bands: Vec<f64> },
}

impl CovarianceConfig {
    pub fn matrix(&self) -> Matrix {
        match self {
            CovarianceConfig::Unstructured { matrix } => matrix.clone(),
            CovarianceConfig::CompoundSymmetry { visits, variance, covariance } => {
                compound_symmetry(*visits, *variance, *covariance)
            }
            CovarianceConfig::Ar1 { visits, variance, rho } => ar1(*visits, *variance, *rho),
            CovarianceConfig::Toeplitz { bands } => toeplitz(bands),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObjectiveConfig {
    Superiority {
        #[serde(default)]
        tau0: f64,
    },
    Noninferiority {
        margin: f64,
    },
    Equivalence {
        lower: f64,
        upper: f64,
    },
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        ObjectiveConfig::Superiority { tau0: 0.0 }
    }
}

/// A total or explicit group sizes.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SampleSize {
    Total(f64),
    Groups([usize; 2]),
}

impl SampleSize {
    pub fn total(&self) -> f64 {
        match self {
            SampleSize::Total(n) => *n,
            SampleSize::Groups([a, b]) => (a + b) as f64,
        }
    }
}

impl std::str::FromStr for SampleSize {
    type Err = Error;
    fn from_str(s: &str) -> Result<SampleSize> {
        let bad = || Error::Config(format!("cannot read sample size `{s}` (expected N or N0,N1)"));
        match s.split_once(',') {
            Some((a, b)) => {
                Ok(SampleSize::Groups([a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?]))
            }
            None => Ok(SampleSize::Total(s.trim().parse().map_err(|_| bad())?)),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Levels {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_power")]
    pub power: f64,
    pub n: Option<SampleSize>,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_power() -> f64 {
    0.8
}

impl Default for Levels {
    fn default() -> Self {
        Levels { alpha: default_alpha(), power: default_power(), n: None }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StrataConfig {
    pub eta: Vec<f64>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub replicates: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    /// Two-sample: analyse with the Welch test. Defaults to unequal variances.
    pub welch: Option<bool>,
    /// ANCOVA outcome intercept.
    #[serde(default)]
    pub intercept: f64,
    /// ANCOVA slope on the normal covariate.
    pub beta: Option<f64>,
    pub strata: Option<StrataConfig>,
    /// Crossover period effect (half the period difference).
    #[serde(default)]
    pub period_delta: f64,
    /// MMRM visit intercepts.
    pub visit_means: Option<Vec<f64>>,
    /// MMRM baseline slopes per visit.
    pub baseline_slopes: Option<Vec<f64>>,
    /// MMRM treatment effects per visit; defaults to zero before the last visit.
    pub visit_effects: Option<Vec<f64>>,
}

impl DesignFile {
    pub fn from_toml(text: &str) -> Result<DesignFile> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<DesignFile> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        DesignFile::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

/// One fractional size with its integer allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeRow {
    pub method: &'static str,
    pub fractional: f64,
    pub groups: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerRow {
    pub method: &'static str,
    pub estimate: PowerEstimate,
}

#[derive(Debug, Clone)]
enum Model {
    Kernel { kernel: TestKernel, welch: Option<TwoSampleSpec> },
    Ancova(AncovaSpec),
    Mmrm(MmrmDesign),
}

/// A validated design with its objective, ready to evaluate.
#[derive(Debug, Clone)]
pub struct Study {
    pub file: DesignFile,
    model: Model,
}

fn margins_of(o: &ObjectiveConfig, effect: f64) -> Result<Option<Margins>> {
    match *o {
        ObjectiveConfig::Superiority { .. } => Ok(None),
        ObjectiveConfig::Noninferiority { margin } => {
            let m = if effect > margin {
                Margins::one_sided(margin, f64::INFINITY, MarginKind::Noninferiority)?
            } else {
                Margins::one_sided(f64::NEG_INFINITY, margin, MarginKind::Noninferiority)?
            };
            Ok(Some(m))
        }
        ObjectiveConfig::Equivalence { lower, upper } => Ok(Some(Margins::equivalence(lower, upper)?)),
    }
}

fn unsupported<T>(what: &str) -> Result<T> {
    Err(Error::Config(format!("{what} is not available for this design")))
}

impl Study {
    pub fn new(file: DesignFile) -> Result<Study> {
        let tau0 = match file.objective {
            ObjectiveConfig::Superiority { tau0 } => tau0,
            _ => 0.0,
        };
        let model = match &file.design {
            DesignConfig::OneSample { mu, sigma_sq } => {
                Model::Kernel { kernel: ni(one_sample_kernel(*mu, tau0, *sigma_sq)?, &file.objective)?, welch: None }
            }
            DesignConfig::TwoSample { .. } => {
                let s = two_sample_spec(&file.design)?;
                let kernel = ni(two_sample_kernel(&s, tau0)?, &file.objective)?;
                Model::Kernel { kernel, welch: (!s.equal_variance).then_some(s) }
            }
            DesignConfig::Crossover { effect, sigma_d_sq, allocation, period_effect } => {
                let c = CrossoverSpec {
                    mu_star_a: 0.0,
                    mu_star_b: *effect,
                    sigma_d_sq: *sigma_d_sq,
                    gamma0: *allocation,
                    period_effect_in_analysis: *period_effect,
                };
                let mut k = crossover_kernel(&c)?;
                if tau0 != 0.0 {
                    k = k.with_effect(tau0, k.tau1);
                }
                Model::Kernel { kernel: ni(k, &file.objective)?, welch: None }
            }
            DesignConfig::Ancova { effect, sigma_sq, covariates, allocation } => {
                if matches!(file.objective, ObjectiveConfig::Noninferiority { .. }) {
                    return unsupported("noninferiority");
                }
                Model::Ancova(AncovaSpec::new(*effect, tau0, *sigma_sq, *allocation, *covariates)?)
            }
            DesignConfig::Mmrm { covariance, retention, covariates, effect, allocation } => {
                if matches!(file.objective, ObjectiveConfig::Noninferiority { .. }) {
                    return unsupported("noninferiority");
                }
                let d = MmrmDesign::new(covariance.matrix(), retention.clone(), *allocation, *covariates, *effect, tau0)?;
                Model::Mmrm(d)
            }
        };
        let study = Study { file, model };
        if let Some(m) = study.margins()? {
            if m.kind == MarginKind::Equivalence && !(m.lower < study.effect() && study.effect() < m.upper) {
                return Err(Error::Config(format!(
                    "effect {} must lie strictly inside the margins ({}, {})",
                    study.effect(),
                    m.lower,
                    m.upper
                )));
            }
        }
        Ok(study)
    }

    pub fn load(path: &Path) -> Result<Study> {
        Study::new(DesignFile::load(path)?)
    }

    pub fn alpha(&self) -> f64 {
        self.file.levels.alpha
    }

    pub fn target_power(&self) -> f64 {
        self.file.levels.power
    }

    /// Effect on the analysis scale (treated minus reference).
    pub fn effect(&self) -> f64 {
        match &self.model {
            Model::Kernel { kernel, .. } => kernel.tau1,
            Model::Ancova(s) => s.tau1,
            Model::Mmrm(d) => d.tau_p1,
        }
    }

    pub fn allocation(&self) -> Vec<f64> {
        match &self.model {
            Model::Kernel { kernel, .. } => kernel.allocation.clone(),
            Model::Ancova(s) => s.allocation(),
            Model::Mmrm(d) => d.allocation(),
        }
    }

    pub fn margins(&self) -> Result<Option<Margins>> {
        margins_of(&self.file.objective, self.effect())
    }

    fn min_n(&self) -> f64 {
        match &self.model {
            Model::Kernel { kernel, .. } => kernel.min_n,
            Model::Ancova(s) => s.q as f64 + 3.0,
            Model::Mmrm(d) => d.min_n(),
        }
    }

    fn row(&self, method: &'static str, n: f64, rounding: Rounding) -> SizeRow {
        SizeRow { method, fractional: n, groups: split_total(n, &self.allocation(), rounding) }
    }

    /// Every applicable size method, fractional and rounded.
    pub fn sizes(&self, rounding: Rounding) -> Result<Vec<SizeRow>> {
        let (a, p) = (self.alpha(), self.target_power());
        let equivalence = self.margins()?.filter(|m| m.kind == MarginKind::Equivalence);
        let mut out = Vec::new();
        match (&self.model, equivalence) {
            (Model::Kernel { kernel, welch }, None) => {
                for est in size_chain(kernel, a, p)? {
                    out.push(self.row(est.method.label(), est.fractional, rounding));
                }
                if let Some(s) = welch {
                    let hint = size_g2(kernel, a, p)?.fractional;
                    let one_tailed = kernel.one_tailed;
                    let n = size_invert(
                        |n| {
                            let e = if one_tailed {
                                moser_one_sided_power(s, kernel.tau0, n, a)?
                            } else {
                                moser_exact_power(s, kernel.tau0, n, a)?
                            };
                            Ok(e.value)
                        },
                        p,
                        hint,
                        kernel.min_n,
                    )?;
                    out.push(self.row("welch_inversion", n, rounding));
                }
            }
            (Model::Kernel { kernel, welch }, Some(m)) => {
                let sym = (m.upper - kernel.tau1 - (kernel.tau1 - m.lower)).abs() <= 1e-12 * m.width();
                if sym {
                    for method in SizeMethod::ALL {
                        let est = equiv_size_symmetric(kernel, &m, a, p, method)?;
                        out.push(self.row(method.label(), est.fractional, rounding));
                    }
                } else {
                    let b = equiv_size_bounds(kernel, &m, a, p)?;
                    out.push(self.row("g1_lower", b.g1_lower.fractional, rounding));
                    out.push(self.row("g1_upper", b.g1_upper.fractional, rounding));
                    out.push(self.row("g2_lower", b.g2_lower.fractional, rounding));
                    out.push(self.row("g2_upper", b.g2_upper.fractional, rounding));
                    let n = size_invert(
                        |n| Ok(equiv_power_exact(kernel, &m, n, a)?.value),
                        p,
                        b.g2_upper.fractional,
                        kernel.min_n,
                    )?;
                    out.push(self.row("inversion", n, rounding));
                }
                if let Some(s) = welch {
                    let hint = out.last().map(|r| r.fractional).unwrap_or(kernel.min_n + 1.0);
                    let n = size_invert(|n| Ok(ts_unequal_equiv_power(s, &m, n, a, true)?.value), p, hint, kernel.min_n)?;
                    out.push(self.row("welch_inversion", n, rounding));
                }
            }
            (Model::Ancova(s), None) => {
                let c = ancova_size_chain(s, a, p)?;
                self.ancova_rows(&mut out, &c, rounding);
                out.push(self.row("inversion", c.inversion, rounding));
                out.push(self.row("inversion_asymptotic_t", c.inversion_asymptotic, rounding));
            }
            (Model::Ancova(s), Some(m)) => {
                let sym = (m.upper - s.tau1 - (s.tau1 - m.lower)).abs() <= 1e-12 * m.width();
                let hint = if sym {
                    let sub = AncovaSpec { tau1: m.width() / 2.0, tau0: 0.0, ..*s };
                    let c = ancova_size_chain(&sub, a, (1.0 + p) / 2.0)?;
                    self.ancova_rows(&mut out, &c, rounding);
                    c.g2
                } else {
                    let sub = AncovaSpec { tau1: (m.upper - s.tau1).min(s.tau1 - m.lower), tau0: 0.0, ..*s };
                    ancova_size_chain(&sub, a, (1.0 + p) / 2.0)?.g2
                };
                let n = size_invert(|n| Ok(ancova_equiv_power(s, &m, n, a, true)?.value), p, hint, self.min_n())?;
                out.push(self.row("inversion", n, rounding));
            }
            (Model::Mmrm(d), m) => {
                let c = match m {
                    None => mmrm_size_chain(d, a, p)?,
                    Some(m) => mmrm_equiv_size_chain(d, (m.lower, m.upper), a, p)?,
                };
                self.mmrm_rows(&mut out, &c, rounding);
            }
        }
        Ok(out)
    }

    fn ancova_rows(&self, out: &mut Vec<SizeRow>, c: &crate::ancova::AncovaSizes, r: Rounding) {
        out.push(self.row("normal", c.n_asy, r));
        out.push(self.row("normal_inflated", c.n_tilde, r));
        out.push(self.row("g1", c.g1, r));
        out.push(self.row("g2", c.g2, r));
        out.push(self.row("two_step", c.two_step, r));
    }

    fn mmrm_rows(&self, out: &mut Vec<SizeRow>, c: &MmrmSizes, r: Rounding) {
        out.push(self.row("normal", c.n_a, r));
        out.push(self.row("normal_inflated", c.n_tilde, r));
        out.push(self.row("g1", c.g1, r));
        out.push(self.row("g2", c.g2, r));
        out.push(self.row("two_step", c.two_step, r));
        out.push(self.row("inversion", c.inversion, r));
    }

    /// Every applicable power at total size `n`.
    pub fn powers(&self, n: f64) -> Result<Vec<PowerRow>> {
        let a = self.alpha();
        let equivalence = self.margins()?.filter(|m| m.kind == MarginKind::Equivalence);
        let row = |method, estimate| PowerRow { method, estimate };
        let mut out = Vec::new();
        match (&self.model, equivalence) {
            (Model::Kernel { kernel, welch }, Some(m)) => {
                out.push(row("exact", equiv_power_exact(kernel, &m, n, a)?));
                out.push(row("approx", equiv_power_approx(kernel, &m, n, a)?));
                if let Some(s) = welch {
                    out.push(row("welch_exact", ts_unequal_equiv_power(s, &m, n, a, true)?));
                    out.push(row("welch_approx", ts_unequal_equiv_power(s, &m, n, a, false)?));
                }
            }
            (Model::Kernel { kernel, welch }, None) => {
                if kernel.one_tailed {
                    out.push(row("one_sided", power(kernel, n, a)?));
                } else {
                    out.push(row("exact_two_sided", power_two_sided(kernel, n, a)?));
                    out.push(row("one_sided_approx", power_one_sided_approx(kernel, n, a)?));
                }
                if let Some(s) = welch {
                    let e = if kernel.one_tailed {
                        moser_one_sided_power(s, kernel.tau0, n, a)?
                    } else {
                        moser_exact_power(s, kernel.tau0, n, a)?
                    };
                    out.push(row("welch_exact", e));
                }
            }
            (Model::Ancova(s), None) => {
                out.push(row("exact", ancova_power_exact(s, n, a)?));
                out.push(row("approx", ancova_power_approx(s, n, a)?));
                out.push(row("asymptotic_t", ancova_power_asymptotic_t(s, n, a)?));
            }
            (Model::Ancova(s), Some(m)) => {
                out.push(row("exact", ancova_equiv_power(s, &m, n, a, true)?));
                out.push(row("approx", ancova_equiv_power(s, &m, n, a, false)?));
            }
            (Model::Mmrm(d), None) => {
                out.push(row("kenward_roger", mmrm_power(d, n, a)?));
                out.push(row("asymptotic_df", mmrm_power_approx(d, n, a)?));
            }
            (Model::Mmrm(d), Some(m)) => {
                out.push(row("equivalence", mmrm_equiv_power(d, (m.lower, m.upper), n, a)?));
            }
        }
        Ok(out)
    }

    /// Per-group sizes for simulation: the configured size, else the g2
    /// size rounded up.
    pub fn simulation_groups(&self) -> Result<[usize; 2]> {
        let total = match self.file.levels.n {
            Some(SampleSize::Groups(g)) => return Ok(g),
            Some(SampleSize::Total(n)) => n,
            None => {
                let sizes = self.sizes(Rounding::Up)?;
                sizes.iter().find(|r| r.method == "g2").map(|r| r.fractional).unwrap_or(sizes[0].fractional)
            }
        };
        let g = split_total(total, &self.allocation(), Rounding::Up);
        Ok([g[0] as usize, g[1] as usize])
    }

    pub fn objective(&self) -> Result<Objective> {
        Ok(match self.margins()? {
            Some(m) => Objective::Inside(m),
            None => Objective::TwoSided { tau0: self.kernel_tau0() },
        })
    }

    fn kernel_tau0(&self) -> f64 {
        match self.file.objective {
            ObjectiveConfig::Superiority { tau0 } => tau0,
            _ => 0.0,
        }
    }

    /// The Monte Carlo scenario matching this design.
    pub fn scenario(&self) -> Result<ScenarioSpec> {
        let sim = &self.file.simulation;
        let strata = sim.strata.as_ref().map(|s| Strata { eta: s.eta.clone(), probs: s.probs.clone() });
        let extra = strata.as_ref().map_or(0, |s| s.eta.len() as u32 - 1);
        let check_q = |q: u32| {
            if q != 1 + extra {
                return Err(Error::Config(format!(
                    "design has {q} covariates but the simulation generates {} (one normal covariate plus strata indicators)",
                    1 + extra
                )));
            }
            Ok(())
        };
        let (generator, default_reps) = match &self.file.design {
            DesignConfig::OneSample { mu, sigma_sq } => (Generator::OneSample { mu: *mu, sigma_sq: *sigma_sq }, DEFAULT_REPS_T),
            DesignConfig::TwoSample { .. } => {
                let s = two_sample_spec(&self.file.design)?;
                let welch = sim.welch.unwrap_or(!s.equal_variance);
                let g = Generator::TwoSample { mu0: s.mu0, mu1: s.mu1, sigma0_sq: s.sigma0_sq, sigma1_sq: s.sigma1_sq, welch };
                (g, DEFAULT_REPS_T)
            }
            DesignConfig::Crossover { effect, sigma_d_sq, period_effect, .. } => {
                let g = Generator::Crossover {
                    tau: *effect,
                    sigma_d_sq: *sigma_d_sq,
                    period_delta: sim.period_delta,
                    period_effect_in_analysis: *period_effect,
                };
                (g, DEFAULT_REPS_T)
            }
            DesignConfig::Ancova { effect, sigma_sq, covariates, .. } => {
                check_q(*covariates)?;
                let beta = sim.beta.ok_or_else(|| Error::Config("simulation.beta is required for ANCOVA".into()))?;
                let g = Generator::Ancova { tau: *effect, sigma_sq: *sigma_sq, intercept: sim.intercept, beta, strata };
                (g, DEFAULT_REPS_T)
            }
            DesignConfig::Mmrm { covariance, retention, covariates, effect, .. } => {
                check_q(*covariates)?;
                let sigma = covariance.matrix();
                let p = sigma.len();
                let need = |v: &Option<Vec<f64>>, name: &str| {
                    v.clone().ok_or_else(|| Error::Config(format!("simulation.{name} is required for MMRM")))
                };
                let tau = match &sim.visit_effects {
                    Some(t) => t.clone(),
                    None => (0..p).map(|j| if j + 1 == p { *effect } else { 0.0 }).collect(),
                };
                if tau.last() != Some(effect) {
                    return Err(Error::Config("simulation.visit_effects must end with design.effect".into()));
                }
                let g = Generator::Mmrm {
                    sigma,
                    retention: retention.clone(),
                    mu: need(&sim.visit_means, "visit_means")?,
                    alpha: need(&sim.baseline_slopes, "baseline_slopes")?,
                    tau,
                    strata,
                };
                (g, DEFAULT_REPS_MMRM)
            }
        };
        Ok(ScenarioSpec { generator, replicates: sim.replicates.unwrap_or(default_reps), seed: sim.seed })
    }
}

fn ni(k: TestKernel, o: &ObjectiveConfig) -> Result<TestKernel> {
    match *o {
        ObjectiveConfig::Noninferiority { margin } => apply_ni_margin(&k, margin),
        _ => Ok(k),
    }
}

fn two_sample_spec(d: &DesignConfig) -> Result<TwoSampleSpec> {
    let DesignConfig::TwoSample { mu0, mu1, sigma_sq, sigma0_sq, sigma1_sq, allocation } = d else {
        unreachable!("caller matched a two-sample design")
    };
    let s = match (sigma_sq, sigma0_sq, sigma1_sq) {
        (Some(v), None, None) => TwoSampleSpec::equal(*mu0, *mu1, *v, *allocation),
        (None, Some(v0), Some(v1)) => TwoSampleSpec::unequal(*mu0, *mu1, *v0, *v1, *allocation),
        _ => {
            return Err(Error::Config(
                "two-sample design needs either sigma_sq or both sigma0_sq and sigma1_sq".into(),
            ))
        }
    };
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = r#"
[design]
kind = "two-sample"
mu0 = 0.0
mu1 = 0.5
sigma_sq = 1.0
"#;

    #[test]
    fn defaults_fill_in() {
        let f = DesignFile::from_toml(TWO).unwrap();
        assert_eq!(f.levels.alpha, 0.05);
        assert_eq!(f.objective, ObjectiveConfig::Superiority { tau0: 0.0 });
        let s = Study::new(f).unwrap();
        let sizes = s.sizes(Rounding::Up).unwrap();
        let g2 = sizes.iter().find(|r| r.method == "g2").unwrap();
        assert!((g2.fractional - 127.53).abs() < 0.005);
        assert_eq!(g2.groups, vec![64, 64]);
    }

    #[test]
    fn unknown_field_names_the_field() {
        let e = DesignFile::from_toml(&format!("{TWO}sigma = 2\n")).unwrap_err();
        assert!(e.to_string().contains("sigma"), "{e}");
    }

    #[test]
    fn ambiguous_variances_rejected() {
        let text = TWO.replace("sigma_sq = 1.0", "sigma_sq = 1.0\nsigma1_sq = 4.0");
        assert!(matches!(Study::new(DesignFile::from_toml(&text).unwrap()), Err(Error::Config(_))));
    }

    #[test]
    fn effect_outside_margins_rejected() {
        let text = format!("{TWO}[objective]\nkind = \"equivalence\"\nlower = -0.2\nupper = 0.2\n");
        assert!(Study::new(DesignFile::from_toml(&text).unwrap()).is_err());
    }

    #[test]
    fn sample_size_parses_both_forms() {
        assert_eq!("40".parse::<SampleSize>().unwrap(), SampleSize::Total(40.0));
        assert_eq!("20, 21".parse::<SampleSize>().unwrap(), SampleSize::Groups([20, 21]));
        assert!("x".parse::<SampleSize>().is_err());
    }

    #[test]
    fn ancova_covariate_count_must_match_generator() {
        let text = r#"
[design]
kind = "ancova"
effect = 1.0
sigma_sq = 1.0
covariates = 3

[simulation]
beta = 0.5
"#;
        let s = Study::new(DesignFile::from_toml(text).unwrap()).unwrap();
        assert!(matches!(s.scenario(), Err(Error::Config(_))));
    }
}
