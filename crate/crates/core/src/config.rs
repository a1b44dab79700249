//! Run configuration: defaults, a flat `key = value` file, and command-line overrides.
//!
//! Later sources win: command line over file over defaults.

use std::path::{Path, PathBuf};

use crate::discretization::SchemeConfig;
use crate::error::{Error, Result};
use crate::field::RampTestProblem;
use crate::quadrature::QuadratureConfig;

/// Time step rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CflMode {
    /// `κ` from the stability formula with this `ε`.
    Theorem(f64),
    /// Fixed `κ`.
    Manual(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub gamma_deg: f64,
    pub x0: f64,
    pub n: usize,
    pub n_list: Vec<usize>,
    pub cfl: CflMode,
    pub tau: f64,
    pub t_final: f64,
    pub quad: QuadratureConfig,
    pub out: PathBuf,
    pub seed: u64,
    /// Random fields per mesh in verification sweeps.
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            gamma_deg: 25.0,
            x0: 0.2001,
            n: 64,
            n_list: vec![16, 32, 64, 128, 256],
            cfl: CflMode::Theorem(1.0 / 14.0),
            tau: 1.0,
            t_final: 0.5,
            quad: QuadratureConfig::default(),
            out: PathBuf::from("."),
            seed: 20240501,
            samples: 100,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("cannot parse {key} = {value:?}")))
}

/// Parses a comma- or whitespace-separated list of cell counts.
pub fn parse_n_list(value: &str) -> Result<Vec<usize>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse("n_list", s))
        .collect()
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "problem.kind" => {
                if value.trim() != "ramp_paper" {
                    return Err(Error::InvalidConfig(format!(
                        "unknown problem.kind {value:?} (only \"ramp_paper\" is available)"
                    )));
                }
            }
            "problem.gamma_deg" => self.gamma_deg = parse(key, value)?,
            "problem.x0" => self.x0 = parse(key, value)?,
            "problem.t_final" => self.t_final = parse(key, value)?,
            "quad.face_order" => self.quad.face_order = parse(key, value)?,
            "quad.cell_degree" => self.quad.cell_degree = parse(key, value)?,
            "scheme.tau" => self.tau = parse(key, value)?,
            "cfl.epsilon" => self.cfl = CflMode::Theorem(parse(key, value)?),
            "cfl.kappa" => self.cfl = CflMode::Manual(parse(key, value)?),
            "run.n" => self.n = parse(key, value)?,
            "run.n_list" => self.n_list = parse_n_list(value)?,
            "run.seed" => self.seed = parse(key, value)?,
            "run.samples" => self.samples = parse(key, value)?,
            "output.dir" => self.out = PathBuf::from(value.trim()),
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "unknown configuration key {key:?}"
                )))
            }
        }
        Ok(())
    }

    /// Applies every line of a flat config text. Blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "line {}: expected key = value, got {raw:?}",
                    lineno + 1
                ))
            })?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_deg > 0.0 && self.gamma_deg < 90.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma must lie in (0°, 90°), got {}°",
                self.gamma_deg
            )));
        }
        if self.n < 4 {
            return Err(Error::InvalidConfig(format!(
                "n must be at least 4, got {}",
                self.n
            )));
        }
        if self.n_list.is_empty() {
            return Err(Error::InvalidConfig("n-list is empty".into()));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "n-list must be strictly increasing, got {:?}",
                self.n_list
            )));
        }
        if self.n_list[0] < 4 {
            return Err(Error::InvalidConfig(
                "every n in the n-list must be at least 4".into(),
            ));
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be positive".into()));
        }
        self.scheme().validate()?;
        self.problem().map(|_| ())
    }

    pub fn scheme(&self) -> SchemeConfig {
        let (epsilon, cfl_factor) = match self.cfl {
            CflMode::Theorem(e) => (e, None),
            CflMode::Manual(k) => (SchemeConfig::default().epsilon, Some(k)),
        };
        SchemeConfig {
            tau: self.tau,
            epsilon,
            cfl_factor,
            t_final: self.t_final,
            quad: self.quad,
        }
    }

    pub fn problem(&self) -> Result<RampTestProblem> {
        RampTestProblem::new(self.gamma_deg.to_radians(), self.x0, self.t_final)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults() {
        let mut c = RunConfig::default();
        c.apply_text(
            "# study\nproblem.kind = ramp_paper\nproblem.gamma_deg = 45\nquad.face_order=6 # more\nrun.n_list = 8, 16 32\ncfl.kappa = 0.5\n",
        )
        .unwrap();
        assert_eq!(c.gamma_deg, 45.0);
        assert_eq!(c.quad.face_order, 6);
        assert_eq!(c.n_list, vec![8, 16, 32]);
        assert_eq!(c.cfl, CflMode::Manual(0.5));
        assert_eq!(c.scheme().cfl_factor, Some(0.5));
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = RunConfig::default();
        assert!(c.apply_text("nonsense").is_err());
        assert!(c.set("problem.kind", "circle").is_err());
        assert!(c.set("problem.unknown", "1").is_err());
        assert!(c.set("problem.x0", "abc").is_err());
        c.n_list = vec![32, 16];
        assert!(c.validate().is_err());
        let c = RunConfig {
            gamma_deg: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = RunConfig {
            cfl: CflMode::Theorem(0.6),
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
