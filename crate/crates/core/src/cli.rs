//! Command runner behind the `tsize` binary.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::config::{DesignFile, ObjectiveConfig, SampleSize, Study};
use crate::error::{Error, Result};
use crate::kernel::Rounding;
use crate::simulate::{simulate_power, SimReport};
use crate::tables;

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Power { design: PathBuf },
    Size { design: PathBuf },
    Simulate { design: PathBuf },
    ReproduceTable { table: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Format> {
        match s {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Config(format!("unknown format `{s}` (expected text or csv)"))),
        }
    }
}

/// Values that replace the design file's own.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub power: Option<f64>,
    pub margins: Option<(f64, f64)>,
    pub n: Option<SampleSize>,
    pub seed: Option<u64>,
    pub replicates: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub overrides: Overrides,
    pub format: Format,
    pub rounding: Rounding,
}

/// `LO,HI`; either end may be `inf` or `-inf`.
pub fn parse_margins(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config(format!("cannot read margins `{s}` (expected LO,HI)"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo < hi) {
        return Err(Error::Config(format!("margins need LO < HI, got `{s}`")));
    }
    Ok((lo, hi))
}

fn load(path: &PathBuf, o: &Overrides) -> Result<Study> {
    let mut f = DesignFile::load(path)?;
    if let Some(a) = o.alpha {
        f.levels.alpha = a;
    }
    if let Some(p) = o.power {
        f.levels.power = p;
    }
    if let Some(n) = o.n {
        f.levels.n = Some(n);
    }
    if let Some(s) = o.seed {
        f.simulation.seed = s;
    }
    if let Some(r) = o.replicates {
        f.simulation.replicates = Some(r);
    }
    if let Some((lo, hi)) = o.margins {
        f.objective = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => ObjectiveConfig::Equivalence { lower: lo, upper: hi },
            (true, false) => ObjectiveConfig::Noninferiority { margin: lo },
            (false, true) => ObjectiveConfig::Noninferiority { margin: hi },
            (false, false) => return Err(Error::Config("at least one margin must be finite".into())),
        };
    }
    Study::new(f)
}

/// Runs one command and returns its rendered output.
pub fn run(cfg: &RunConfig) -> Result<String> {
    let mut out = String::new();
    let csv = cfg.format == Format::Csv;
    match &cfg.command {
        Command::Size { design } => {
            let study = load(design, &cfg.overrides)?;
            let rows = study.sizes(cfg.rounding)?;
            if csv {
                out.push_str("method,size,rounded_total,n0,n1\n");
            } else {
                let _ = writeln!(out, "alpha {}  target power {}", study.alpha(), study.target_power());
            }
            for r in rows {
                let total: u64 = r.groups.iter().sum();
                let (a, b) = (r.groups[0], r.groups[1]);
                if csv {
                    if cfg.rounding == Rounding::None {
                        let _ = writeln!(out, "{},{:.2},,,", r.method, r.fractional);
                    } else {
                        let _ = writeln!(out, "{},{:.2},{total},{a},{b}", r.method, r.fractional);
                    }
                } else if cfg.rounding == Rounding::None {
                    let _ = writeln!(out, "{:<24}{:>10.2}", r.method, r.fractional);
                } else {
                    let _ = writeln!(out, "{:<24}{:>10.2}   n = {total} ({a} + {b})", r.method, r.fractional);
                }
            }
        }
        Command::Power { design } => {
            let study = load(design, &cfg.overrides)?;
            let n = study
                .file
                .levels
                .n
                .ok_or_else(|| Error::Config("power needs a sample size: set levels.n or pass --n".into()))?
                .total();
            if csv {
                out.push_str("method,n,power\n");
            } else {
                let _ = writeln!(out, "alpha {}  n {n}", study.alpha());
            }
            for r in study.powers(n)? {
                let flag = if r.estimate.invalid { " (approximation outside [0, 1])" } else { "" };
                if csv {
                    let _ = writeln!(out, "{},{n},{:.2}", r.method, 100.0 * r.estimate.value);
                } else {
                    let _ = writeln!(out, "{:<24}{:>8.2}%{flag}", r.method, 100.0 * r.estimate.value);
                }
            }
        }
        Command::Simulate { design } => {
            let study = load(design, &cfg.overrides)?;
            let groups = study.simulation_groups()?;
            let report = simulate_power(&study.scenario()?, groups, study.alpha(), study.objective()?)?;
            render_report(&mut out, &report, groups, csv);
        }
        Command::ReproduceTable { table } => {
            let mut alpha_power = tables::table_levels(*table)?;
            if let Some(a) = cfg.overrides.alpha {
                alpha_power.0 = a;
            }
            if let Some(p) = cfg.overrides.power {
                alpha_power.1 = p;
            }
            let records = tables::reproduce_at(*table, alpha_power.0, alpha_power.1)?;
            let mut buf = Vec::new();
            tables::write_csv(&records, &mut buf)?;
            out.push_str(&String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))?);
        }
    }
    Ok(out)
}

fn render_report(out: &mut String, r: &SimReport, n: [usize; 2], csv: bool) {
    if csv {
        out.push_str("n0,n1,replicates,failures,rejections,power,std_error,seed,wall_time_s\n");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.2},{:.2},{},{:.3}",
            n[0],
            n[1],
            r.replicates,
            r.failures,
            r.rejections,
            100.0 * r.power_hat,
            100.0 * r.std_error,
            r.seed,
            r.wall_time.as_secs_f64()
        );
    } else {
        let _ = writeln!(out, "groups        {} + {}", n[0], n[1]);
        let _ = writeln!(out, "replicates    {} ({} failed fits excluded)", r.replicates, r.failures);
        let _ = writeln!(out, "power         {:.2}% (se {:.2})", 100.0 * r.power_hat, 100.0 * r.std_error);
        let _ = writeln!(out, "seed          {}", r.seed);
        let _ = writeln!(out, "wall time     {:.2} s", r.wall_time.as_secs_f64());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_parse() {
        assert_eq!(parse_margins("-0.2231,0.2231").unwrap(), (-0.2231, 0.2231));
        assert_eq!(parse_margins("-1,inf").unwrap(), (-1.0, f64::INFINITY));
        assert!(parse_margins("1,-1").is_err());
        assert!(parse_margins("1").is_err());
    }

    #[test]
    fn reproduce_rejects_unknown_table() {
        let cfg = RunConfig {
            command: Command::ReproduceTable { table: 9 },
            overrides: Overrides::default(),
            format: Format::Csv,
            rounding: Rounding::Up,
        };
        assert!(run(&cfg).is_err());
    }
}
