//! Study configuration: a flat `key = value` file, overridable from the CLI.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pml::PmlParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StudyKind {
    Convergence,
    FixedKh,
    Infsup,
    Truncation,
    Stability,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Convergence => "convergence",
            StudyKind::FixedKh => "fixed_kh",
            StudyKind::Infsup => "infsup",
            StudyKind::Truncation => "truncation",
            StudyKind::Stability => "stability",
        }
    }
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "convergence" => Ok(StudyKind::Convergence),
            "fixed_kh" | "fixedkh" => Ok(StudyKind::FixedKh),
            "infsup" | "inf_sup" => Ok(StudyKind::Infsup),
            "truncation" => Ok(StudyKind::Truncation),
            "stability" => Ok(StudyKind::Stability),
            other => Err(Error::Config(format!(
                "unknown study '{other}' (expected convergence, fixed_kh, infsup, truncation, stability)"
            ))),
        }
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Penalty used for the CIP rows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PenaltyMode {
    /// Plain FEM only.
    Zero,
    /// `gamma = penalty_gamma(k h)` per study point.
    Dispersion,
    Custom(Complex64),
}

impl FromStr for PenaltyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "zero" | "none" | "fem" => return Ok(PenaltyMode::Zero),
            "dispersion" => return Ok(PenaltyMode::Dispersion),
            _ => {}
        }
        let parts: Vec<&str> = s.split(',').collect();
        let parse = |p: &str| parse_number(p).map_err(|_| Error::Config(format!("bad penalty '{s}' (zero, dispersion or re,im)")));
        match parts.as_slice() {
            [re] => Ok(PenaltyMode::Custom(Complex64::new(parse(re)?, 0.0))),
            [re, im] => Ok(PenaltyMode::Custom(Complex64::new(parse(re)?, parse(im)?))),
            _ => Err(Error::Config(format!("bad penalty '{s}' (zero, dispersion or re,im)"))),
        }
    }
}

impl fmt::Display for PenaltyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PenaltyMode::Zero => f.write_str("zero"),
            PenaltyMode::Dispersion => f.write_str("dispersion"),
            PenaltyMode::Custom(g) => write!(f, "{},{}", g.re, g.im),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub kind: StudyKind,
    pub k_list: Vec<f64>,
    pub h_list: Vec<f64>,
    pub kh_list: Vec<f64>,
    pub sigma0: f64,
    /// Absorption sweep of the truncation study.
    pub sigma0_list: Vec<f64>,
    pub r_inner: f64,
    pub r_outer: f64,
    pub penalty: PenaltyMode,
    pub out_dir: PathBuf,
    /// Triangle rule degree for assembly.
    pub quad_degree: u32,
    /// Triangle rule degree for error integrals.
    pub error_quad_degree: u32,
    pub threads: usize,
    /// Cells of the radial reference solver.
    pub radial_cells: usize,
    /// Mesh size of the inf-sup study.
    pub infsup_h: f64,
    pub validate_mesh: bool,
    pub export_matrix: bool,
    /// Lifts the k and unknown-count caps of the 2D studies.
    pub allow_large: bool,
}

/// Upper limit on 2D FEM unknowns.
pub const MAX_DOFS: usize = 500_000;
/// Upper limit on the dense inf-sup size.
pub const MAX_INFSUP_DOFS: usize = 2500;

impl StudyConfig {
    /// Defaults of a study kind: the sweeps of the reproduced figures and
    /// theorem checks.
    pub fn defaults(kind: StudyKind) -> Self {
        let mut cfg = Self {
            kind,
            k_list: vec![5.0, 25.0],
            h_list: vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0],
            kh_list: vec![1.0, 0.5],
            sigma0: 5.0,
            sigma0_list: vec![0.5, 1.0, 1.5, 2.0, 2.5],
            r_inner: 1.0,
            r_outer: 2.0,
            penalty: PenaltyMode::Dispersion,
            out_dir: PathBuf::from(format!("out/{}", kind.name())),
            quad_degree: 4,
            error_quad_degree: 6,
            threads: 1,
            radial_cells: 20_000,
            infsup_h: 0.115,
            validate_mesh: false,
            export_matrix: false,
            allow_large: false,
        };
        match kind {
            StudyKind::Convergence => {}
            StudyKind::FixedKh => cfg.k_list = vec![8.0, 16.0, 32.0, 64.0],
            StudyKind::Infsup => cfg.k_list = vec![2.0, 4.0, 8.0],
            StudyKind::Truncation => cfg.k_list = vec![8.0],
            StudyKind::Stability => cfg.k_list = vec![4.0, 8.0, 16.0, 32.0],
        }
        cfg
    }

    pub fn params(&self, k: f64) -> Result<PmlParams> {
        PmlParams::new(k, self.r_inner, self.r_outer, self.sigma0)
    }

    /// Reads a config file; the `study` key picks the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config file '{}': {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            pairs.push((lineno + 1, key.trim().to_string(), value.trim().to_string()));
        }
        let kind = pairs
            .iter()
            .find(|(_, k, _)| k == "study")
            .map(|(_, _, v)| v.parse())
            .transpose()?
            .ok_or_else(|| Error::Config("missing 'study' key".into()))?;
        let mut cfg = Self::defaults(kind);
        for (lineno, key, value) in &pairs {
            cfg.set(key, value).map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("line {lineno}: {msg}")),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key; unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "study" => self.kind = value.parse()?,
            "k" | "k_list" => self.k_list = parse_list(value)?,
            "h" | "h_list" => self.h_list = parse_list(value)?,
            "kh" | "kh_target" | "kh_list" => self.kh_list = parse_list(value)?,
            "sigma0" => self.sigma0 = parse_number(value)?,
            "sigma0_list" => self.sigma0_list = parse_list(value)?,
            "r_inner" | "R" => self.r_inner = parse_number(value)?,
            "r_outer" | "R_hat" => self.r_outer = parse_number(value)?,
            "penalty" => self.penalty = value.parse()?,
            "out" | "out_dir" => self.out_dir = PathBuf::from(value),
            "quad_degree" => self.quad_degree = parse_int(value)?,
            "error_quad_degree" => self.error_quad_degree = parse_int(value)?,
            "threads" => self.threads = parse_int(value)?,
            "radial_cells" => self.radial_cells = parse_int(value)?,
            "infsup_h" => self.infsup_h = parse_number(value)?,
            "validate_mesh" => self.validate_mesh = parse_bool(value)?,
            "export_matrix" => self.export_matrix = parse_bool(value)?,
            "allow_large" => self.allow_large = parse_bool(value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: &[f64]| -> Result<()> {
            if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::Config(format!("'{name}' needs positive values")));
            }
            Ok(())
        };
        positive("k", &self.k_list)?;
        match self.kind {
            StudyKind::Convergence => positive("h", &self.h_list)?,
            StudyKind::FixedKh => positive("kh", &self.kh_list)?,
            StudyKind::Infsup => positive("infsup_h", &[self.infsup_h])?,
            StudyKind::Truncation => {
                if self.sigma0_list.is_empty() || self.sigma0_list.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                    return Err(Error::Config("'sigma0_list' needs non-negative values".into()));
                }
            }
            StudyKind::Stability => {}
        }
        for &k in &self.k_list {
            self.params(k)?;
        }
        for (name, d) in [("quad_degree", self.quad_degree), ("error_quad_degree", self.error_quad_degree)] {
            if crate::quadrature::TriangleRule::by_degree(d).is_none() {
                return Err(Error::Config(format!("'{name}' must be 4, 6 or 8 (got {d})")));
            }
        }
        if self.threads == 0 {
            return Err(Error::Config("'threads' must be at least 1".into()));
        }
        if self.radial_cells < crate::oracle::RADIAL_MIN_CELLS {
            return Err(Error::Config(format!(
                "'radial_cells' must be at least {}",
                crate::oracle::RADIAL_MIN_CELLS
            )));
        }
        Ok(())
    }

    /// Plain-text echo in the config format, readable by [`StudyConfig::parse`].
    pub fn echo(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("study", self.kind.to_string());
        kv("k", list(&self.k_list));
        kv("h", list(&self.h_list));
        kv("kh", list(&self.kh_list));
        kv("sigma0", format!("{}", self.sigma0));
        kv("sigma0_list", list(&self.sigma0_list));
        kv("r_inner", format!("{}", self.r_inner));
        kv("r_outer", format!("{}", self.r_outer));
        kv("penalty", self.penalty.to_string());
        kv("out", self.out_dir.display().to_string());
        kv("quad_degree", self.quad_degree.to_string());
        kv("error_quad_degree", self.error_quad_degree.to_string());
        kv("threads", self.threads.to_string());
        kv("radial_cells", self.radial_cells.to_string());
        kv("infsup_h", format!("{}", self.infsup_h));
        kv("validate_mesh", self.validate_mesh.to_string());
        kv("export_matrix", self.export_matrix.to_string());
        kv("allow_large", self.allow_large.to_string());
        s
    }
}

/// Number or `a/b` fraction.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Config(format!("bad number '{s}'"));
    let v = match s.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().map_err(|_| bad())? / b.trim().parse::<f64>().map_err(|_| bad())?,
        None => s.parse::<f64>().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(parse_number).collect()
}

fn parse_int<T: FromStr>(s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Config(format!("bad integer '{s}'")))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean '{s}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_echoes() {
        let cfg = StudyConfig::parse("study = convergence\nk = 5, 25 # comment\nh = 1/8,1/16\npenalty = -0.07,-0.01\n").unwrap();
        assert_eq!(cfg.k_list, vec![5.0, 25.0]);
        assert_eq!(cfg.h_list, vec![0.125, 0.0625]);
        assert_eq!(cfg.penalty, PenaltyMode::Custom(Complex64::new(-0.07, -0.01)));
        let again = StudyConfig::parse(&cfg.echo()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(StudyConfig::parse("k = 5").is_err());
        assert!(StudyConfig::parse("study = convergence\ncolour = red").is_err());
        assert!(StudyConfig::parse("study = convergence\nk = -1").is_err());
        assert!(StudyConfig::parse("study = nope").is_err());
        assert!(StudyConfig::parse("study = infsup\nthreads = 0").is_err());
        assert!(StudyConfig::parse("study = convergence\nh 3").is_err());
    }

    #[test]
    fn penalty_modes() {
        assert_eq!("zero".parse::<PenaltyMode>().unwrap(), PenaltyMode::Zero);
        assert_eq!("dispersion".parse::<PenaltyMode>().unwrap(), PenaltyMode::Dispersion);
        assert_eq!("-0.1".parse::<PenaltyMode>().unwrap(), PenaltyMode::Custom(Complex64::new(-0.1, 0.0)));
        assert!("1,2,3".parse::<PenaltyMode>().is_err());
    }
}
