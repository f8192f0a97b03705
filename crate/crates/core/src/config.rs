//! Run configuration: flat `key = value` text with dotted keys.
//!
//! ```text
//! # unit-square lattice, eps = 2
//! lattice.tau1 = 1
//! lattice.tau2 = 1.5
//! lattice.a = 0.1
//! lattice.eps = 2
//! sweep.q = 0.02, 0.04, 0.06
//! sweep.theta = 0, 45deg, 90deg
//! oracle.cutoff = 12
//! ```
//!
//! Angles are radians unless suffixed with `deg`. Later assignments win, so
//! command-line `key=value` pairs override the file.

use std::path::PathBuf;

use crate::error::{EmhError, Result};
use crate::lattice::LatticeSpec;
use crate::oracle::planewave::MIN_CUTOFF;
use crate::oracle::quadrature::DEFAULT_RESOLUTION;
use crate::oracle::{Factorization, OracleSettings, DEFAULT_Q_LIST};
use crate::validate::ValidationSettings;

/// Every accepted key, in documentation order.
pub const KEYS: [&str; 16] = [
    "lattice.tau1",
    "lattice.tau2",
    "lattice.a",
    "lattice.eps",
    "sweep.a",
    "sweep.q",
    "sweep.theta",
    "oracle.cutoff",
    "oracle.factorization",
    "oracle.normal_grid",
    "oracle.q_list",
    "oracle.resolution",
    "output.dir",
    "validate.seed",
    "validate.cutoff",
    "validate.order_cutoff",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lattice: LatticeSpec,
    /// Radii swept by `coeffs`, `tensor`, `dispersion` and `oracle`.
    pub sweep_a: Vec<f64>,
    pub sweep_q: Vec<f64>,
    pub sweep_theta: Vec<f64>,
    pub oracle: OracleSettings,
    pub q_list: Vec<f64>,
    pub quadrature_resolution: usize,
    pub output_dir: PathBuf,
    pub validation: ValidationSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_pairs(&[]).expect("defaults are valid")
    }
}

/// Where an assignment came from, for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub origin: String,
    pub key: String,
    pub value: String,
}

/// Splits config text into assignments; blank lines and `#` comments are skipped.
pub fn parse_text(source: &str, text: &str) -> Result<Vec<Assignment>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        out.push(parse_assignment(&format!("{source}:{}", n + 1), line)?);
    }
    Ok(out)
}

/// Parses one `key=value` pair.
pub fn parse_assignment(origin: &str, text: &str) -> Result<Assignment> {
    let Some((key, value)) = text.split_once('=') else {
        return Err(EmhError::Config(format!("{origin}: expected key = value, got `{text}`")));
    };
    let key = key.trim();
    if !KEYS.contains(&key) {
        return Err(EmhError::Config(format!("{origin}: unknown key `{key}`")));
    }
    Ok(Assignment {
        origin: origin.into(),
        key: key.into(),
        value: value.trim().into(),
    })
}

fn bad(a: &Assignment, why: &str) -> EmhError {
    EmhError::Config(format!("{}: {} = `{}`: {why}", a.origin, a.key, a.value))
}

fn number(a: &Assignment, text: &str) -> Result<f64> {
    let v: f64 = text.trim().parse().map_err(|_| bad(a, "not a number"))?;
    if !v.is_finite() {
        return Err(bad(a, "not finite"));
    }
    Ok(v)
}

fn angle(a: &Assignment, text: &str) -> Result<f64> {
    let t = text.trim();
    match t.strip_suffix("deg") {
        Some(deg) => Ok(number(a, deg)?.to_radians()),
        None => number(a, t),
    }
}

fn list(a: &Assignment, parse: fn(&Assignment, &str) -> Result<f64>) -> Result<Vec<f64>> {
    if a.value.is_empty() {
        return Err(bad(a, "list must be non-empty"));
    }
    a.value.split(',').map(|t| parse(a, t)).collect()
}

fn count(a: &Assignment) -> Result<usize> {
    a.value.parse().map_err(|_| bad(a, "not a non-negative integer"))
}

struct Draft {
    tau1: f64,
    tau2: f64,
    a: f64,
    eps: f64,
    sweep_a: Option<Vec<f64>>,
    sweep_q: Vec<f64>,
    sweep_theta: Vec<f64>,
    oracle: OracleSettings,
    q_list: Vec<f64>,
    resolution: usize,
    output_dir: PathBuf,
    validation: ValidationSettings,
    validation_cutoff: Option<usize>,
}

impl RunConfig {
    /// Builds a config from defaults, an optional file, then overrides.
    pub fn load(file: Option<(&str, &str)>, overrides: &[String]) -> Result<Self> {
        let mut pairs = match file {
            Some((name, text)) => parse_text(name, text)?,
            None => Vec::new(),
        };
        for (i, o) in overrides.iter().enumerate() {
            pairs.push(parse_assignment(&format!("argument {}", i + 1), o)?);
        }
        Self::from_pairs(&pairs)
    }

    fn from_pairs(pairs: &[Assignment]) -> Result<Self> {
        let mut d = Draft {
            tau1: 1.0,
            tau2: 1.0,
            a: 0.1,
            eps: 2.0,
            sweep_a: None,
            sweep_q: vec![0.05, 0.1, 0.15, 0.2],
            sweep_theta: vec![0.0],
            oracle: OracleSettings::default(),
            q_list: DEFAULT_Q_LIST.to_vec(),
            resolution: DEFAULT_RESOLUTION,
            output_dir: PathBuf::from("."),
            validation: ValidationSettings::default(),
            validation_cutoff: None,
        };
        for p in pairs {
            d.apply(p)?;
        }
        d.finish()
    }
}

impl Draft {
    fn apply(&mut self, p: &Assignment) -> Result<()> {
        match p.key.as_str() {
            "lattice.tau1" => self.tau1 = number(p, &p.value)?,
            "lattice.tau2" => self.tau2 = number(p, &p.value)?,
            "lattice.a" => self.a = number(p, &p.value)?,
            "lattice.eps" => self.eps = number(p, &p.value)?,
            "sweep.a" => self.sweep_a = Some(list(p, number)?),
            "sweep.q" => self.sweep_q = list(p, number)?,
            "sweep.theta" => self.sweep_theta = list(p, angle)?,
            "oracle.cutoff" => {
                let n = count(p)?;
                if n < MIN_CUTOFF {
                    return Err(bad(p, &format!("cutoff must be at least {MIN_CUTOFF}")));
                }
                self.oracle.cutoff = n;
            }
            "oracle.factorization" => {
                self.oracle.factorization = match p.value.as_str() {
                    "laurent" => Factorization::Laurent,
                    "nvf" | "normal_vector" => Factorization::NormalVector,
                    _ => return Err(bad(p, "expected `laurent` or `nvf`")),
                }
            }
            "oracle.normal_grid" => self.oracle.normal_grid = count(p)?,
            "oracle.q_list" => {
                let qs = list(p, number)?;
                if qs.len() < 3 || qs.iter().any(|&q| !(q > 0.0 && q <= 0.1)) {
                    return Err(bad(p, "need at least 3 values in (0, 0.1]"));
                }
                self.q_list = qs;
            }
            "oracle.resolution" => {
                let n = count(p)?;
                if n < 2 {
                    return Err(bad(p, "resolution must be at least 2"));
                }
                self.resolution = n;
            }
            "output.dir" => self.output_dir = PathBuf::from(&p.value),
            "validate.seed" => {
                self.validation.seed = p.value.parse().map_err(|_| bad(p, "not a u64"))?
            }
            "validate.cutoff" => self.validation_cutoff = Some(count(p)?),
            "validate.order_cutoff" => self.validation.order_cutoff = count(p)?,
            _ => unreachable!("keys are checked when parsed"),
        }
        Ok(())
    }

    fn finish(self) -> Result<RunConfig> {
        let lattice = LatticeSpec::new(self.tau1, self.tau2, self.a, self.eps)
            .map_err(|e| EmhError::Config(format!("lattice: {e}")))?;
        let sweep_a = self.sweep_a.unwrap_or_else(|| vec![self.a]);
        for &a in &sweep_a {
            lattice
                .with_inclusion(a, self.eps)
                .map_err(|e| EmhError::Config(format!("sweep.a = {a}: {e}")))?;
        }
        if self.sweep_q.iter().any(|&q| q < 0.0) {
            return Err(EmhError::Config("sweep.q: values must be non-negative".into()));
        }
        let oracle = self.oracle;
        if oracle.factorization == Factorization::NormalVector
            && oracle.normal_grid <= 4 * oracle.cutoff
        {
            return Err(EmhError::Config(format!(
                "oracle.normal_grid = {} must exceed 4 x oracle.cutoff = {}",
                oracle.normal_grid,
                4 * oracle.cutoff
            )));
        }
        let mut validation = self.validation;
        validation.cutoff = self.validation_cutoff.unwrap_or(oracle.cutoff);
        validation.factorization = oracle.factorization;
        validation.normal_grid = oracle.normal_grid;
        validation.q_list = self.q_list.clone();
        validation.quadrature_resolution = self.resolution;
        for n in [validation.cutoff, validation.order_cutoff] {
            if n < MIN_CUTOFF
                || (oracle.factorization == Factorization::NormalVector
                    && oracle.normal_grid <= 4 * n)
            {
                return Err(EmhError::Config(format!(
                    "validation cutoff {n} must be at least {MIN_CUTOFF} and below oracle.normal_grid / 4"
                )));
            }
        }
        Ok(RunConfig {
            lattice,
            sweep_a,
            sweep_q: self.sweep_q,
            sweep_theta: self.sweep_theta,
            oracle,
            q_list: self.q_list,
            quadrature_resolution: self.resolution,
            output_dir: self.output_dir,
            validation,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, overrides: &[&str]) -> Result<RunConfig> {
        let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        RunConfig::load(Some(("run.cfg", text)), &o)
    }

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert!(c.lattice.is_square());
        assert_eq!(c.sweep_a, vec![0.1]);
        assert_eq!(c.oracle.cutoff, 12);
        assert_eq!(c.validation, ValidationSettings::default());
    }

    #[test]
    fn file_then_flags() {
        let c = load(
            "# comment\nlattice.tau2 = 1.5\n\nsweep.theta = 0, 90deg # trailing\noracle.cutoff=8\n",
            &["oracle.cutoff=6", "sweep.a=0.05,0.1"],
        )
        .unwrap();
        assert_eq!(c.lattice.tau2(), 1.5);
        assert_eq!(c.sweep_theta, vec![0.0, std::f64::consts::FRAC_PI_2]);
        assert_eq!(c.oracle.cutoff, 6);
        assert_eq!(c.validation.cutoff, 6);
        assert_eq!(c.sweep_a, vec![0.05, 0.1]);
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let e = load("lattice.tau1 = 1\nlattice.eps = two\n", &[]).unwrap_err();
        assert!(e.to_string().contains("run.cfg:2"), "{e}");
        assert!(e.to_string().contains("lattice.eps"), "{e}");
        let e = load("colour = red\n", &[]).unwrap_err();
        assert!(e.to_string().contains("unknown key `colour`"), "{e}");
        let e = load("", &["sweep.q"]).unwrap_err();
        assert!(e.to_string().contains("argument 1"), "{e}");
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(load("lattice.tau1 = 1.2\nlattice.tau2 = 1.5\n", &[]).is_err());
        assert!(load("lattice.a = 0.6\n", &[]).is_err());
        assert!(load("sweep.a = 0.1, 0.7\n", &[]).is_err());
        assert!(load("oracle.cutoff = 3\n", &[]).is_err());
        assert!(load("sweep.theta =\n", &[]).is_err());
        assert!(load("oracle.q_list = 0.02, 0.2, 0.04\n", &[]).is_err());
        assert!(load("oracle.factorization = fft\n", &[]).is_err());
        assert!(matches!(load("lattice.a = 0.6\n", &[]), Err(EmhError::Config(_))));
    }
}
