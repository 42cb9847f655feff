use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algo {
    #[serde(rename = "RG")]
    Rg,
    #[serde(rename = "RG_A")]
    RgA,
    #[serde(rename = "TR_G")]
    TrG,
    #[serde(rename = "TR_H")]
    TrH,
    #[serde(rename = "RN")]
    Rn,
    #[serde(rename = "RN_A")]
    RnA,
}

impl Algo {
    pub const ALL: [Algo; 6] = [Algo::Rg, Algo::RgA, Algo::TrG, Algo::TrH, Algo::Rn, Algo::RnA];

    pub fn name(&self) -> &'static str {
        match self {
            Algo::Rg => "RG",
            Algo::RgA => "RG_A",
            Algo::TrG => "TR_G",
            Algo::TrH => "TR_H",
            Algo::Rn => "RN",
            Algo::RnA => "RN_A",
        }
    }

    /// Uses Hessian information in its step.
    pub fn is_second_order(&self) -> bool {
        !matches!(self, Algo::Rg | Algo::RgA)
    }

    /// Has an acceptance test and an adaptive parameter `nu`.
    pub fn is_adaptive(&self) -> bool {
        !matches!(self, Algo::Rg | Algo::Rn)
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// Choice of `nu` after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuResetRule {
    /// Clamp the current value into `[nu_min, nu_max]`.
    #[default]
    Clamp,
    /// Reset to `nu_min`.
    Min,
}

impl FromStr for NuResetRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "clamp" => Ok(Self::Clamp),
            "min" => Ok(Self::Min),
            _ => Err(Error::Config(format!("unknown nu reset rule `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Termination {
    pub eps_f: Option<f64>,
    pub eps_1: Option<f64>,
    pub eps_2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoConfig {
    pub algo: Algo,
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub eta: f64,
    pub psi: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    /// Initial `nu`; `nu_min` when absent.
    pub nu0: Option<f64>,
    pub nu_reset_rule: NuResetRule,
    pub max_iters: usize,
    pub termination: Termination,
    pub divergence_floor: Option<f64>,
}

/// Floor used when the objective has no known infimum and none is set.
pub const DEFAULT_DIVERGENCE_FLOOR: f64 = -1e6;

impl AlgoConfig {
    pub fn new(algo: Algo) -> Self {
        Self {
            algo,
            l1: None,
            l2: None,
            eta: 0.1,
            psi: 2.0,
            nu_min: 1e-3,
            nu_max: 1e3,
            nu0: None,
            nu_reset_rule: NuResetRule::Clamp,
            max_iters: 10_000,
            termination: Termination::default(),
            divergence_floor: None,
        }
    }

    pub fn with_l1(mut self, l1: f64) -> Self {
        self.l1 = Some(l1);
        self
    }

    pub fn with_l2(mut self, l2: f64) -> Self {
        self.l2 = Some(l2);
        self
    }

    pub fn with_eps_f(mut self, eps: f64) -> Self {
        self.termination.eps_f = Some(eps);
        self
    }

    pub fn with_eps_1(mut self, eps: f64) -> Self {
        self.termination.eps_1 = Some(eps);
        self
    }

    pub fn with_eps_2(mut self, eps: f64) -> Self {
        self.termination.eps_2 = Some(eps);
        self
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_nu0(mut self, nu0: f64) -> Self {
        self.nu0 = Some(nu0);
        self
    }

    pub fn initial_nu(&self) -> f64 {
        self.nu0.unwrap_or(self.nu_min)
    }

    /// Fills missing `l1`/`l2` from the objective's known constants: twice
    /// `L1` for RG and `L2` for RN.
    pub fn fill_from_constants(mut self, obj: &Objective) -> Self {
        if self.l1.is_none() {
            self.l1 = obj.constants.l1.filter(|c| *c > 0.0).map(|c| 2.0 * c);
        }
        if self.l2.is_none() {
            self.l2 = obj.constants.l2.map(|c| c.max(1e-3));
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad(format!("eta = {} must lie in (0, 1)", self.eta));
        }
        if !(self.psi > 1.0) {
            return bad(format!("psi = {} must exceed 1", self.psi));
        }
        if !(self.nu_min > 0.0 && self.nu_min <= self.nu_max) || !self.nu_max.is_finite() {
            return bad(format!("need 0 < nu_min <= nu_max, got [{}, {}]", self.nu_min, self.nu_max));
        }
        if !(self.initial_nu() > 0.0) {
            return bad("nu0 must be positive".into());
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive".into());
        }
        for (name, v) in [
            ("eps_f", self.termination.eps_f),
            ("eps_1", self.termination.eps_1),
            ("eps_2", self.termination.eps_2),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return bad(format!("{name} = {v} must be positive"));
                }
            }
        }
        match self.algo {
            Algo::Rg => match self.l1 {
                Some(l) if l > 0.0 => {}
                _ => return bad("RG needs a positive l1".into()),
            },
            Algo::Rn => match self.l2 {
                Some(l) if l > 0.0 => {}
                _ => return bad("RN needs a positive l2".into()),
            },
            _ => {}
        }
        Ok(())
    }

    /// Validation plus the checks against the objective's known constants.
    pub fn validate_for(&self, obj: &Objective) -> Result<()> {
        self.validate()?;
        if self.algo == Algo::Rg {
            if let (Some(l), Some(c)) = (self.l1, obj.constants.l1) {
                if l <= c {
                    return Err(Error::Config(format!("l1 = {l} must exceed L1 = {c}")));
                }
            }
        }
        if self.algo == Algo::Rn {
            if let (Some(l), Some(c)) = (self.l2, obj.constants.l2) {
                if l <= c / 2.0 {
                    return Err(Error::Config(format!("l2 = {l} must exceed L2/2 = {}", c / 2.0)));
                }
            }
        }
        if self.algo.is_second_order() {
            obj.require_order(2)?;
        }
        Ok(())
    }
}
