//! Classification of points into the gradient region `R1`, the
//! negative-curvature region `R2`, and their subregions.
//!
//! With `c = kappa (f(x) - f_ref)`, a point lies in `R1` when
//! `||g||^tau >= c` for some `tau in [1, 2]`, and in `R2` (outside `R1`) when
//! `lambda_-^tau >= c` for some `tau in [1, 3]`. Because `t -> a^t` is
//! monotone, the existence of `tau` reduces to a test at the endpoints of the
//! exponent range. Subregions take the largest integer exponent that works.

use std::fmt;
use std::str::FromStr;

use log::warn;
use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::subproblems::leftmost_eig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionParams {
    pub kappa: f64,
    pub f_ref: f64,
}

impl RegionParams {
    pub fn new(kappa: f64, f_ref: f64) -> Self {
        Self { kappa, f_ref }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidArgument(format!("kappa = {} must be positive", self.kappa)));
        }
        if !self.f_ref.is_finite() {
            return Err(Error::InvalidArgument("f_ref must be finite".into()));
        }
        Ok(())
    }

    /// Logs when `kappa` exceeds the known Lipschitz constants.
    pub fn check_caps(&self, obj: &Objective) {
        for (name, c) in [("L1", obj.constants.l1), ("L2", obj.constants.l2)] {
            if let Some(c) = c {
                if self.kappa > c {
                    warn!("{}: kappa = {} exceeds {} = {}", obj.id(), self.kappa, name, c);
                }
            }
        }
    }
}

#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    R1_1,
    R1_2,
    R2_1,
    R2_2,
    R2_3,
    Outside,
    BelowRef,
    /// Not in `R1`; curvature information was not used.
    Unknown,
}

impl Region {
    pub const ALL: [Region; 8] = [
        Region::R1_1,
        Region::R1_2,
        Region::R2_1,
        Region::R2_2,
        Region::R2_3,
        Region::Outside,
        Region::BelowRef,
        Region::Unknown,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Region::R1_1 => "R1_1",
            Region::R1_2 => "R1_2",
            Region::R2_1 => "R2_1",
            Region::R2_2 => "R2_2",
            Region::R2_3 => "R2_3",
            Region::Outside => "Outside",
            Region::BelowRef => "BelowRef",
            Region::Unknown => "Unknown",
        }
    }

    pub fn in_r1(&self) -> bool {
        matches!(self, Region::R1_1 | Region::R1_2)
    }

    pub fn in_r2(&self) -> bool {
        matches!(self, Region::R2_1 | Region::R2_2 | Region::R2_3)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Region::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown region label `{s}`")))
    }
}

/// The quantities a label is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub delta_f: f64,
    pub grad_norm: f64,
    pub lambda_minus: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub region: Region,
    pub witness: Witness,
}

/// Label implied by a witness. Without `lambda_minus`, points outside `R1`
/// are `Unknown`.
pub fn label_from_witness(w: &Witness, params: &RegionParams) -> Region {
    if w.delta_f < 0.0 {
        return Region::BelowRef;
    }
    let c = params.kappa * w.delta_f;
    let g = w.grad_norm;
    let g2 = g * g;
    if g.max(g2) >= c {
        return if g2 >= c { Region::R1_2 } else { Region::R1_1 };
    }
    let Some(l) = w.lambda_minus else {
        return Region::Unknown;
    };
    let l3 = l * l * l;
    if l.max(l3) >= c {
        if l3 >= c {
            Region::R2_3
        } else if l * l >= c {
            Region::R2_2
        } else {
            Region::R2_1
        }
    } else {
        Region::Outside
    }
}

/// Negative part of the leftmost eigenvalue of `H(x)`.
pub fn lambda_minus(obj: &Objective, x: &DVector<f64>) -> Result<f64> {
    let e = obj.evaluate(x, 2).map_err(|_| Error::HessianRequired)?;
    let h = e.h.ok_or(Error::HessianRequired)?;
    Ok((-leftmost_eig(&h)?.lambda).max(0.0))
}

/// Full classification into `R1`/`R2` subregions.
pub fn classify(obj: &Objective, x: &DVector<f64>, params: &RegionParams) -> Result<RegionLabel> {
    let first = classify_first_order(obj, x, params)?;
    if first.region != Region::Unknown {
        return Ok(first);
    }
    let mut witness = first.witness;
    witness.lambda_minus = Some(lambda_minus(obj, x)?);
    Ok(RegionLabel {
        region: label_from_witness(&witness, params),
        witness,
    })
}

/// Gradient-only classification: `R1_1`, `R1_2`, `BelowRef` or `Unknown`.
pub fn classify_first_order(obj: &Objective, x: &DVector<f64>, params: &RegionParams) -> Result<RegionLabel> {
    let e = obj.evaluate(x, 1)?;
    let witness = Witness {
        delta_f: e.f - params.f_ref,
        grad_norm: e.g.as_ref().map_or(0.0, |g| g.norm()),
        lambda_minus: None,
    };
    Ok(RegionLabel {
        region: label_from_witness(&witness, params),
        witness,
    })
}

/// `Delta_1 = ||g||^2`, `Delta_2 = lambda_-^3`.
pub fn delta_p(obj: &Objective, x: &DVector<f64>, p: u8) -> Result<f64> {
    match p {
        1 => {
            let e = obj.evaluate(x, 1)?;
            Ok(e.g.unwrap().norm_squared())
        }
        2 => Ok(lambda_minus(obj, x)?.powi(3)),
        _ => Err(Error::UnsupportedOrder(p)),
    }
}

/// Label in the generalized hierarchy `R_1, R_2, ...` defined through
/// `Delta_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PLabel {
    pub p: u8,
    /// Largest `q` in `{p+1, ..., 1}` with `Delta_p^q >= kappa * delta_f`.
    pub q: Option<u8>,
    /// Lowest order `j < p` whose region already contains the point.
    pub excluded_by: Option<u8>,
    pub delta_p: f64,
    pub delta_f: f64,
}

impl PLabel {
    pub fn below_ref(&self) -> bool {
        self.delta_f < 0.0
    }

    /// Member of `R_p` proper.
    pub fn in_region(&self) -> bool {
        !self.below_ref() && self.q.is_some() && self.excluded_by.is_none()
    }
}

/// Exponent index for measure value `d` against `c = kappa * delta_f`.
pub fn generalized_index(d: f64, c: f64, p: u8) -> Option<u8> {
    if c < 0.0 {
        return None;
    }
    (1..=p + 1).rev().find(|&q| d.powi(q as i32) >= c)
}

pub fn classify_p(obj: &Objective, x: &DVector<f64>, p: u8, params: &RegionParams) -> Result<PLabel> {
    if !(1..=2).contains(&p) {
        return Err(Error::UnsupportedOrder(p));
    }
    let f = obj.value(x)?;
    let delta_f = f - params.f_ref;
    let c = params.kappa * delta_f;
    let mut excluded_by = None;
    for j in 1..p {
        if generalized_index(delta_p(obj, x, j)?, c, j).is_some() {
            excluded_by = Some(j);
            break;
        }
    }
    let d = delta_p(obj, x, p)?;
    Ok(PLabel {
        p,
        q: generalized_index(d, c, p),
        excluded_by,
        delta_p: d,
        delta_f,
    })
}

/// Labels on a uniform grid over the scan domain.
#[derive(Debug, Clone)]
pub struct RegionMap {
    pub params: RegionParams,
    pub resolution: usize,
    pub points: Vec<DVector<f64>>,
    pub labels: Vec<RegionLabel>,
}

pub fn region_scan(obj: &Objective, resolution: usize, params: &RegionParams) -> Result<RegionMap> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid resolution {resolution} must be at least 2"
        )));
    }
    params.validate()?;
    let points = obj.scan_domain.grid(resolution);
    let labels = points
        .par_iter()
        .map(|x| classify(obj, x, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionMap {
        params: *params,
        resolution,
        points,
        labels,
    })
}

impl RegionMap {
    /// Count per label, in [`Region::ALL`] order, omitting zeros.
    pub fn histogram(&self) -> Vec<(Region, usize)> {
        Region::ALL
            .into_iter()
            .map(|r| (r, self.labels.iter().filter(|l| l.region == r).count()))
            .filter(|(_, c)| *c > 0)
            .collect()
    }

    /// CSV with columns `x_0..x_{n-1},label,delta_f,grad_norm,lambda_minus`.
    pub fn to_csv(&self) -> String {
        let n = self.points.first().map_or(0, |p| p.len());
        let mut out = String::new();
        for i in 0..n {
            out.push_str(&format!("x_{i},"));
        }
        out.push_str("label,delta_f,grad_norm,lambda_minus\n");
        for (x, l) in self.points.iter().zip(&self.labels) {
            for xi in x.iter() {
                out.push_str(&format!("{xi:.16e},"));
            }
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{}\n",
                l.region,
                l.witness.delta_f,
                l.witness.grad_norm,
                l.witness.lambda_minus.map(|v| format!("{v:.16e}")).unwrap_or_default()
            ));
        }
        out
    }
}
