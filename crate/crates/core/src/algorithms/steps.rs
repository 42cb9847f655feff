//! Single-step rules of the six methods.

use nalgebra::{DMatrix, DVector};

use super::config::{Algo, AlgoConfig, NuResetRule};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::subproblems::{cubic::solve_cubic_in, trust_region::solve_tr_in, Spectrum, DENSE_LIMIT};

/// Cached derivative information at an iterate.
#[derive(Debug, Clone)]
pub struct Point {
    pub x: DVector<f64>,
    pub f: f64,
    pub g: DVector<f64>,
    pub h: Option<DMatrix<f64>>,
    pub(crate) spectrum: Option<Spectrum>,
}

impl Point {
    /// Evaluates `f`, `g` and, when `with_hessian`, `H` and its spectrum.
    pub fn evaluate(obj: &Objective, x: DVector<f64>, with_hessian: bool) -> Result<Self> {
        let e = obj.evaluate(&x, if with_hessian { 2 } else { 1 })?;
        let spectrum = match &e.h {
            Some(h) if e.f.is_finite() && h.iter().all(|v| v.is_finite()) => Some(Spectrum::new(h, DENSE_LIMIT)?),
            _ => None,
        };
        Ok(Self {
            x,
            f: e.f,
            g: e.g.unwrap(),
            h: e.h,
            spectrum,
        })
    }

    pub fn grad_norm(&self) -> f64 {
        self.g.norm()
    }

    /// `max(0, -lambda_min(H))`, when the Hessian was evaluated.
    pub fn lambda_minus(&self) -> Option<f64> {
        self.spectrum.as_ref().map(|s| (-s.min()).max(0.0))
    }

    fn second_order(&self) -> Result<(&DMatrix<f64>, &Spectrum)> {
        match (&self.h, &self.spectrum) {
            (Some(h), Some(s)) => Ok((h, s)),
            _ => Err(Error::HessianRequired),
        }
    }
}

/// Result of one step rule.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub s: DVector<f64>,
    pub accepted: bool,
    /// Decrease predicted by the method's model (the quantity scaled by
    /// `eta` in the acceptance test).
    pub model_decrease: f64,
    /// `f(x + s)`; absent for a zero step.
    pub trial_f: Option<f64>,
    /// Trust-region radius, for the TR methods.
    pub delta: Option<f64>,
    /// Adaptive parameter used for this step.
    pub nu: Option<f64>,
    /// Adaptive parameter for the next iteration.
    pub nu_next: Option<f64>,
}

impl StepOutcome {
    pub fn is_zero(&self) -> bool {
        self.s.iter().all(|v| *v == 0.0)
    }

    pub fn actual_decrease(&self, f: f64) -> Option<f64> {
        self.trial_f.map(|t| f - t)
    }
}

fn next_nu(nu: f64, accepted: bool, config: &AlgoConfig) -> f64 {
    if !accepted {
        config.psi * nu
    } else {
        match config.nu_reset_rule {
            NuResetRule::Clamp => nu.clamp(config.nu_min, config.nu_max),
            NuResetRule::Min => config.nu_min,
        }
    }
}

/// Evaluates the trial point and applies the acceptance rule. Non-adaptive
/// methods accept unconditionally.
fn conclude(
    obj: &Objective,
    p: &Point,
    s: DVector<f64>,
    model_decrease: f64,
    delta: Option<f64>,
    nu: Option<f64>,
    config: &AlgoConfig,
) -> Result<StepOutcome> {
    if s.iter().all(|v| *v == 0.0) {
        return Ok(StepOutcome {
            s,
            accepted: false,
            model_decrease: 0.0,
            trial_f: None,
            delta,
            nu,
            nu_next: nu,
        });
    }
    let trial = &p.x + &s;
    let trial_f = obj.value(&trial)?;
    let accepted = match nu {
        Some(_) => p.f - trial_f >= config.eta * model_decrease,
        None => true,
    };
    Ok(StepOutcome {
        s,
        accepted,
        model_decrease,
        trial_f: Some(trial_f),
        delta,
        nu,
        nu_next: nu.map(|v| next_nu(v, accepted, config)),
    })
}

pub(crate) fn step_at(obj: &Objective, p: &Point, nu: f64, config: &AlgoConfig) -> Result<StepOutcome> {
    let gnorm = p.grad_norm();
    match config.algo {
        Algo::Rg => {
            let l1 = config.l1.ok_or_else(|| Error::Config("RG needs l1".into()))?;
            let s = -&p.g / l1;
            conclude(obj, p, s, gnorm * gnorm / (2.0 * l1), None, None, config)
        }
        Algo::RgA => {
            let s = -&p.g / nu;
            conclude(obj, p, s, gnorm * gnorm / (2.0 * nu), None, Some(nu), config)
        }
        Algo::TrG | Algo::TrH => {
            let (h, sp) = p.second_order()?;
            let lm = (-sp.min()).max(0.0);
            let delta = if config.algo == Algo::TrG || gnorm * gnorm >= lm * lm * lm {
                gnorm / nu
            } else {
                lm / nu
            };
            if !(delta > 0.0) || !delta.is_finite() {
                let s = DVector::zeros(p.x.len());
                return conclude(obj, p, s, 0.0, Some(delta), Some(nu), config);
            }
            let sol = solve_tr_in(sp, &p.g, h, delta);
            conclude(obj, p, sol.s, sol.model_decrease, Some(delta), Some(nu), config)
        }
        Algo::Rn => {
            let (h, sp) = p.second_order()?;
            let l2 = config.l2.ok_or_else(|| Error::Config("RN needs l2".into()))?;
            let sol = solve_cubic_in(sp, &p.g, h, l2)?;
            conclude(obj, p, sol.s, sol.model_decrease, None, None, config)
        }
        Algo::RnA => {
            let (h, sp) = p.second_order()?;
            let sol = solve_cubic_in(sp, &p.g, h, nu)?;
            conclude(obj, p, sol.s, sol.model_decrease, None, Some(nu), config)
        }
    }
}

fn checked(config: &AlgoConfig, algo: Algo) -> Result<AlgoConfig> {
    let mut c = config.clone();
    c.algo = algo;
    c.validate()?;
    Ok(c)
}

fn point(obj: &Objective, x: &DVector<f64>, algo: Algo) -> Result<Point> {
    if algo.is_second_order() {
        obj.require_order(2)?;
    }
    Point::evaluate(obj, x.clone(), algo.is_second_order())
}

fn positive(nu: f64) -> Result<f64> {
    if nu > 0.0 && nu.is_finite() {
        Ok(nu)
    } else {
        Err(Error::InvalidArgument(format!("nu = {nu} must be positive")))
    }
}

/// `s = -g / l1`, always accepted.
pub fn step_rg(obj: &Objective, x: &DVector<f64>, config: &AlgoConfig) -> Result<StepOutcome> {
    let c = checked(config, Algo::Rg)?;
    step_at(obj, &point(obj, x, Algo::Rg)?, 0.0, &c)
}

/// `s = -g / nu`, accepted on sufficient decrease relative to
/// `||g||^2 / (2 nu)`.
pub fn step_rga(obj: &Objective, x: &DVector<f64>, nu: f64, config: &AlgoConfig) -> Result<StepOutcome> {
    let c = checked(config, Algo::RgA)?;
    step_at(obj, &point(obj, x, Algo::RgA)?, positive(nu)?, &c)
}

/// Trust-region step with radius `||g|| / nu`.
pub fn step_trg(obj: &Objective, x: &DVector<f64>, nu: f64, config: &AlgoConfig) -> Result<StepOutcome> {
    let c = checked(config, Algo::TrG)?;
    step_at(obj, &point(obj, x, Algo::TrG)?, positive(nu)?, &c)
}

/// Trust-region step whose radius switches to `lambda_- / nu` when negative
/// curvature dominates the gradient.
pub fn step_trh(obj: &Objective, x: &DVector<f64>, nu: f64, config: &AlgoConfig) -> Result<StepOutcome> {
    let c = checked(config, Algo::TrH)?;
    step_at(obj, &point(obj, x, Algo::TrH)?, positive(nu)?, &c)
}

/// Cubic-regularized Newton step with weight `l2`, always accepted.
pub fn step_rn(obj: &Objective, x: &DVector<f64>, config: &AlgoConfig) -> Result<StepOutcome> {
    let c = checked(config, Algo::Rn)?;
    step_at(obj, &point(obj, x, Algo::Rn)?, 0.0, &c)
}

/// Cubic-regularized Newton step with weight `nu` and an acceptance test.
pub fn step_rna(obj: &Objective, x: &DVector<f64>, nu: f64, config: &AlgoConfig) -> Result<StepOutcome> {
    let c = checked(config, Algo::RnA)?;
    step_at(obj, &point(obj, x, Algo::RnA)?, positive(nu)?, &c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{quad_sc_spectrum, saddle2d};

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    #[test]
    fn rg_on_half_square() {
        let obj = quad_sc_spectrum(&[1.0]).unwrap().objective;
        let cfg = AlgoConfig::new(Algo::Rg).with_l1(2.0);
        let out = step_rg(&obj, &v(&[1.0]), &cfg).unwrap();
        assert_eq!(out.s[0], -0.5);
        assert!(out.accepted);
        assert_eq!(out.actual_decrease(0.5), Some(0.375));
    }

    #[test]
    fn rga_accept_and_reject() {
        let mut cfg = AlgoConfig::new(Algo::RgA);
        cfg.eta = 0.5;
        let obj = quad_sc_spectrum(&[1.0]).unwrap().objective;
        let out = step_rga(&obj, &v(&[1.0]), 1.0, &cfg).unwrap();
        assert!(out.accepted);
        assert_eq!(out.s[0], -1.0);
        let stiff = quad_sc_spectrum(&[100.0]).unwrap().objective;
        let out = step_rga(&stiff, &v(&[1.0]), 1.0, &cfg).unwrap();
        assert!(!out.accepted);
        assert_eq!(out.nu_next, Some(cfg.psi));
    }

    #[test]
    fn saddle_steps() {
        let obj = saddle2d().objective;
        let origin = v(&[0.0, 0.0]);
        let cfg = AlgoConfig::new(Algo::TrG);
        let out = step_trg(&obj, &origin, 1.0, &cfg).unwrap();
        assert!(out.is_zero());
        let out = step_trh(&obj, &origin, 1.0, &AlgoConfig::new(Algo::TrH)).unwrap();
        assert!(out.accepted);
        assert_eq!(out.delta, Some(2.0));
        assert_eq!(out.actual_decrease(10.0), Some(4.0));
        let out = step_rn(&obj, &origin, &AlgoConfig::new(Algo::Rn).with_l2(1.0)).unwrap();
        assert_eq!(out.s.norm(), 2.0);
        assert!((out.model_decrease - 8.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn trh_boundary_newton_step() {
        let obj = quad_sc_spectrum(&[1.0, 1.0]).unwrap().objective;
        let out = step_trh(&obj, &v(&[1.0, 0.0]), 1.0, &AlgoConfig::new(Algo::TrH)).unwrap();
        assert_eq!(out.delta, Some(1.0));
        assert!((&out.s - v(&[-1.0, 0.0])).norm() < 1e-12);
        assert!(out.accepted);
    }

    #[test]
    fn rn_on_quadratic_matches_golden_ratio_root() {
        let obj = quad_sc_spectrum(&[1.0]).unwrap().objective;
        let out = step_rn(&obj, &v(&[1.0]), &AlgoConfig::new(Algo::Rn).with_l2(1.0)).unwrap();
        assert!((out.s[0] + (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-14);
    }
}
