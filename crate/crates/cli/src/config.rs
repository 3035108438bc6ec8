//! Run configuration: a TOML file of `key = value` pairs, overridden by flags.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crysect_core::witt::{is_prime, least_nonresidue, WittRing};
use crysect_core::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsSetting {
    Value(u64),
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub p: u64,
    pub eps: EpsSetting,
    /// `p`-adic precision `N` of `W_N`.
    pub precision: u32,
    /// Total-degree bound `D`; defaults to `p² + p + 2`.
    pub degree_bound: Option<u32>,
    /// Largest `t`-precision the adaptive commands may reach.
    pub t_precision: usize,
    /// Cap on enumerated points in density computations.
    pub point_budget: u64,
    /// Wall-clock cap for one command, in seconds.
    pub wall_clock_secs: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 3,
            eps: EpsSetting::Named("auto".into()),
            precision: 3,
            degree_bound: None,
            t_precision: 4000,
            point_budget: crysect_core::qlattice::density::DEFAULT_BUDGET as u64,
            wall_clock_secs: 600.0,
            seed: 20_241_016,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Partial {
            p: Option<u64>,
            eps: Option<EpsSetting>,
            precision: Option<u32>,
            degree_bound: Option<u32>,
            t_precision: Option<usize>,
            point_budget: Option<u64>,
            wall_clock_secs: Option<f64>,
            seed: Option<u64>,
        }
        let p: Partial = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let d = RunConfig::default();
        Ok(RunConfig {
            p: p.p.unwrap_or(d.p),
            eps: p.eps.unwrap_or(d.eps),
            precision: p.precision.unwrap_or(d.precision),
            degree_bound: p.degree_bound.or(d.degree_bound),
            t_precision: p.t_precision.unwrap_or(d.t_precision),
            point_budget: p.point_budget.unwrap_or(d.point_budget),
            wall_clock_secs: p.wall_clock_secs.unwrap_or(d.wall_clock_secs),
            seed: p.seed.unwrap_or(d.seed),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain fields")
    }

    /// `ε` as a residue: `auto` is the least quadratic nonresidue mod `p`.
    pub fn eps_residue(&self) -> Result<u64> {
        match &self.eps {
            EpsSetting::Named(s) if s == "auto" => Ok(least_nonresidue(self.p)),
            EpsSetting::Named(s) => s.parse::<u64>().map_err(|_| Error::Config(format!("eps must be a number or \"auto\", got {s:?}"))),
            EpsSetting::Value(v) => Ok(*v),
        }
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound.unwrap_or((self.p * self.p + self.p + 2) as u32)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 3 || !is_prime(self.p) {
            return Err(Error::Config(format!("p must be an odd prime, got {}", self.p)));
        }
        if self.precision < 3 {
            return Err(Error::Config(format!("precision N must be at least 3, got {}", self.precision)));
        }
        let min_d = (self.p * self.p + self.p + 2) as u32;
        if self.degree_bound() < min_d {
            return Err(Error::Config(format!("degree bound must be at least p² + p + 2 = {min_d}")));
        }
        if self.t_precision < 8 {
            return Err(Error::Config("t precision must be at least 8".into()));
        }
        if !(self.wall_clock_secs > 0.0) {
            return Err(Error::Config("wall-clock cap must be positive".into()));
        }
        self.ring().map(|_| ())
    }

    pub fn ring(&self) -> Result<WittRing> {
        WittRing::new(self.p, self.precision, self.eps_residue()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_eps() {
        let c = RunConfig::default();
        assert_eq!(c.eps_residue().unwrap(), 2);
        let c5 = RunConfig { p: 5, ..RunConfig::default() };
        assert_eq!(c5.eps_residue().unwrap(), 2);
        let c7 = RunConfig { p: 7, ..RunConfig::default() };
        assert_eq!(c7.eps_residue().unwrap(), 3);
        assert_eq!(c.degree_bound(), 14);
    }

    #[test]
    fn toml_round_trip() {
        let c = RunConfig::parse("p = 5\neps = \"auto\"\nseed = 9\n").unwrap();
        assert_eq!(c.p, 5);
        assert_eq!(c.seed, 9);
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
        assert!(RunConfig::parse("q = 1").is_err());
    }

    #[test]
    fn validation() {
        assert!(RunConfig { p: 9, ..RunConfig::default() }.validate().is_err());
        assert!(RunConfig { precision: 2, ..RunConfig::default() }.validate().is_err());
        assert!(RunConfig { degree_bound: Some(13), ..RunConfig::default() }.validate().is_err());
        assert!(RunConfig { eps: EpsSetting::Value(1), ..RunConfig::default() }.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }
}
