use log::{debug, warn};
use nalgebra::DVector;

use super::config::{AlgoConfig, DEFAULT_DIVERGENCE_FLOOR};
use super::steps::{step_at, Point};
use super::trajectory::{EvalCounts, IterateRecord, TerminationReason, Trajectory, TRAJECTORY_SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::regions::{label_from_witness, RegionParams, Witness};

/// Above this value `nu` is treated as having blown up.
const NU_CEILING: f64 = 1e300;

struct Runner<'a> {
    obj: &'a Objective,
    config: &'a AlgoConfig,
    params: &'a RegionParams,
    counts: EvalCounts,
    with_hessian: bool,
}

impl Runner<'_> {
    fn point(&mut self, x: DVector<f64>) -> Result<Point> {
        self.counts.f += 1;
        self.counts.g += 1;
        if self.with_hessian {
            self.counts.h += 1;
        }
        Point::evaluate(self.obj, x, self.with_hessian)
    }

    fn record(&self, k: usize, p: &Point, nu: Option<f64>) -> IterateRecord {
        let witness = Witness {
            delta_f: p.f - self.params.f_ref,
            grad_norm: p.grad_norm(),
            lambda_minus: p.lambda_minus(),
        };
        IterateRecord {
            k,
            x: p.x.iter().copied().collect(),
            f: p.f,
            grad_norm: witness.grad_norm,
            lambda_minus: witness.lambda_minus,
            nu,
            delta: None,
            step_norm: 0.0,
            accepted: false,
            model_decrease: 0.0,
            region: label_from_witness(&witness, self.params),
            delta_f: witness.delta_f,
        }
    }

    fn floor(&self) -> Option<f64> {
        self.config
            .divergence_floor
            .or(if self.obj.f_inf.is_none() { Some(DEFAULT_DIVERGENCE_FLOOR) } else { None })
    }

    fn terminated(&self, p: &Point, k: usize) -> Option<TerminationReason> {
        if !p.f.is_finite() || !p.grad_norm().is_finite() || self.floor().is_some_and(|fl| p.f < fl) {
            return Some(TerminationReason::Diverged);
        }
        let t = &self.config.termination;
        if let (Some(eps), Some(f_inf)) = (t.eps_f, self.obj.f_inf) {
            if p.f - f_inf <= eps {
                return Some(TerminationReason::EpsFMet);
            }
        } else if let Some(eps1) = t.eps_1 {
            if p.grad_norm() <= eps1 {
                if !self.config.algo.is_second_order() {
                    return Some(TerminationReason::FirstOrderMet);
                }
                match t.eps_2 {
                    None => return Some(TerminationReason::FirstOrderMet),
                    Some(eps2) => {
                        if p.lambda_minus().unwrap_or(0.0) <= eps2 {
                            return Some(TerminationReason::SecondOrderMet);
                        }
                    }
                }
            }
        }
        if k >= self.config.max_iters {
            return Some(TerminationReason::MaxIters);
        }
        None
    }

    fn zero_step_reason(&self, p: &Point) -> TerminationReason {
        match p.lambda_minus() {
            Some(l) if l > 0.0 => TerminationReason::Stalled,
            _ if self.config.algo.is_second_order() => TerminationReason::SecondOrderMet,
            _ => TerminationReason::FirstOrderMet,
        }
    }
}

/// Runs the configured method from `x0` until a termination rule fires.
pub fn run(obj: &Objective, config: &AlgoConfig, params: &RegionParams, x0: &DVector<f64>) -> Result<Trajectory> {
    config.validate_for(obj)?;
    params.validate()?;
    if x0.len() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            actual: x0.len(),
        });
    }
    if config.termination.eps_f.is_some() && obj.f_inf.is_none() {
        warn!("{}: eps_f ignored because f_inf is unknown", obj.id());
    }
    let mut runner = Runner {
        obj,
        config,
        params,
        counts: EvalCounts::default(),
        with_hessian: true,
    };
    let adaptive = config.algo.is_adaptive();
    let mut nu = config.initial_nu();
    let mut p = runner.point(x0.clone())?;
    let mut records = Vec::new();
    let reason = loop {
        let k = records.len();
        let nu_rec = adaptive.then_some(nu);
        if let Some(reason) = runner.terminated(&p, k) {
            records.push(runner.record(k, &p, nu_rec));
            break reason;
        }
        if adaptive && nu > NU_CEILING {
            records.push(runner.record(k, &p, nu_rec));
            break TerminationReason::Stalled;
        }
        let out = step_at(obj, &p, nu, config)?;
        let mut rec = runner.record(k, &p, nu_rec);
        rec.delta = out.delta.filter(|d| *d > 0.0);
        if out.is_zero() {
            records.push(rec);
            break runner.zero_step_reason(&p);
        }
        runner.counts.f += 1;
        rec.step_norm = out.s.norm();
        rec.accepted = out.accepted;
        rec.model_decrease = out.model_decrease;
        records.push(rec);
        if let Some(next) = out.nu_next {
            nu = next;
        }
        if out.accepted {
            let x_next = &p.x + &out.s;
            if x_next == p.x {
                let k = records.len();
                records.push(runner.record(k, &p, adaptive.then_some(nu)));
                break TerminationReason::Stalled;
            }
            p = runner.point(x_next)?;
        }
    };
    debug!("{} on {}: {} after {} records", config.algo, obj.id(), reason, records.len());
    Ok(Trajectory {
        schema_version: TRAJECTORY_SCHEMA_VERSION,
        objective_id: obj.id().to_string(),
        config: config.clone(),
        region_params: *params,
        x0: x0.iter().copied().collect(),
        f_inf: obj.f_inf,
        records,
        termination_reason: reason,
        evaluations: runner.counts,
    })
}
