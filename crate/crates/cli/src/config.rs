//! Command-line options and their validation.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use spectralset::bounds::OmegaChoice;
use spectralset::geometry::{DEFAULT_DEGREE, DEFAULT_NODES};
use spectralset::ranges::QParameter;
use spectralset::{Error, Result, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Boundary nodes; a power of two, at least 16.
    #[arg(long = "grid", default_value_t = DEFAULT_NODES)]
    pub grid_n: usize,
    /// Fourier degree of fitted support functions; below grid/2. Defaults to
    /// 64, capped at grid/2 − 1.
    #[arg(long)]
    pub fourier_k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance override `name=value`, e.g. `quad_tol=1e-10`. Repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
}

/// Validated settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid_n: usize,
    pub fourier_k: usize,
    pub q_abs: Option<f64>,
    pub degree: usize,
    pub restarts: usize,
    pub seed: u64,
    pub tol: Tolerances,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn from_common(common: &CommonArgs) -> Result<Self> {
        let cfg = Self {
            grid_n: common.grid_n,
            fourier_k: common
                .fourier_k
                .unwrap_or_else(|| DEFAULT_DEGREE.min((common.grid_n / 2).saturating_sub(1))),
            q_abs: None,
            degree: 4,
            restarts: 32,
            seed: common.seed,
            tol: parse_tolerances(&common.tol)?,
            out: None,
            format: Format::Json,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 16 || !self.grid_n.is_power_of_two() {
            return Err(Error::input(format!(
                "--grid must be a power of two and at least 16, got {}",
                self.grid_n
            )));
        }
        if self.fourier_k == 0 || 2 * self.fourier_k >= self.grid_n {
            return Err(Error::input(format!(
                "--fourier-k must lie in [1, grid/2) = [1, {}), got {}",
                self.grid_n / 2,
                self.fourier_k
            )));
        }
        if self.restarts == 0 {
            return Err(Error::input("--restarts must be at least 1"));
        }
        if let Some(q) = self.q_abs {
            QParameter::from_abs(q)?;
        }
        self.tol.validate()
    }

    pub fn q(&self) -> Result<Option<QParameter>> {
        self.q_abs.map(QParameter::from_abs).transpose()
    }
}

/// Applies `name=value` overrides to the default tolerances.
pub fn parse_tolerances(overrides: &[String]) -> Result<Tolerances> {
    let mut tol = Tolerances::default();
    for item in overrides {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Error::input(format!("--tol expects NAME=VALUE, got {item:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::input(format!("--tol {name}: {value:?} is not a number")))?;
        let slot = match name.trim() {
            "eig_tol" => &mut tol.eig_tol,
            "quad_tol" => &mut tol.quad_tol,
            "psd_tol" => &mut tol.psd_tol,
            "curvature_tol" => &mut tol.curvature_tol,
            "eig_gap_tol" => &mut tol.eig_gap_tol,
            "cond_cap" => &mut tol.cond_cap,
            other => {
                return Err(Error::input(format!(
                    "unknown tolerance {other:?} (expected eig_tol, quad_tol, psd_tol, curvature_tol, eig_gap_tol or cond_cap)"
                )))
            }
        };
        *slot = value;
    }
    tol.validate()?;
    Ok(tol)
}

/// `--omega` value: `wrange`, `qrange`, `disk:cx,cy,r` or `disk:c,r` with a
/// real centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaArg(pub OmegaChoice);

impl FromStr for OmegaArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "wrange" | "numerical_range" => return Ok(OmegaArg(OmegaChoice::NumericalRange)),
            "qrange" => return Ok(OmegaArg(OmegaChoice::QRange)),
            _ => {}
        }
        let body = s.strip_prefix("disk:").ok_or_else(|| {
            Error::input(format!("--omega must be wrange, qrange or disk:cx,cy,r; got {s:?}"))
        })?;
        let nums = body
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|_| Error::input(format!("--omega disk: cannot parse {body:?} as numbers")))?;
        let (center, radius) = match nums[..] {
            [cx, cy, r] => (Complex64::new(cx, cy), r),
            [cx, r] => (Complex64::new(cx, 0.0), r),
            _ => return Err(Error::input(format!("--omega disk: expects cx,cy,r or c,r; got {body:?}"))),
        };
        if !(radius > 0.0 && radius.is_finite() && center.re.is_finite() && center.im.is_finite()) {
            return Err(Error::input(format!("--omega disk: needs a finite centre and positive radius, got {body:?}")));
        }
        Ok(OmegaArg(OmegaChoice::Disk { center, radius }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common(grid_n: usize, fourier_k: Option<usize>) -> CommonArgs {
        CommonArgs {
            grid_n,
            fourier_k,
            seed: 0,
            tol: vec![],
        }
    }

    #[test]
    fn grid_must_be_power_of_two() {
        assert!(RunConfig::from_common(&common(512, None)).is_ok());
        assert!(RunConfig::from_common(&common(16, None)).is_ok());
        assert!(RunConfig::from_common(&common(8, None)).is_err());
        assert!(RunConfig::from_common(&common(500, None)).is_err());
    }

    #[test]
    fn fourier_degree_default_follows_grid() {
        assert_eq!(RunConfig::from_common(&common(512, None)).unwrap().fourier_k, 64);
        assert_eq!(RunConfig::from_common(&common(16, None)).unwrap().fourier_k, 7);
        assert!(RunConfig::from_common(&common(64, Some(32))).is_err());
        assert!(RunConfig::from_common(&common(64, Some(31))).is_ok());
    }

    #[test]
    fn tolerance_overrides() {
        let tol = parse_tolerances(&["quad_tol=1e-10".into(), "cond_cap = 1e9".into()]).unwrap();
        assert_eq!(tol.quad_tol, 1e-10);
        assert_eq!(tol.cond_cap, 1e9);
        assert!(parse_tolerances(&["bogus=1".into()]).is_err());
        assert!(parse_tolerances(&["quad_tol=-1".into()]).is_err());
        assert!(parse_tolerances(&["quad_tol".into()]).is_err());
    }

    #[test]
    fn omega_forms() {
        assert_eq!("qrange".parse::<OmegaArg>().unwrap().0, OmegaChoice::QRange);
        assert_eq!("wrange".parse::<OmegaArg>().unwrap().0, OmegaChoice::NumericalRange);
        assert_eq!(
            "disk:0.5,-1,2".parse::<OmegaArg>().unwrap().0,
            OmegaChoice::Disk { center: Complex64::new(0.5, -1.0), radius: 2.0 }
        );
        assert_eq!(
            "disk:0,1".parse::<OmegaArg>().unwrap().0,
            OmegaChoice::Disk { center: Complex64::new(0.0, 0.0), radius: 1.0 }
        );
        assert!("disk:0,0,-1".parse::<OmegaArg>().is_err());
        assert!("disk:1".parse::<OmegaArg>().is_err());
        assert!("square".parse::<OmegaArg>().is_err());
    }
}
