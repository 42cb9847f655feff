use nalgebra::{DMatrix, DVector};

use super::eigen::{Spectrum, DENSE_LIMIT};
use super::{secular_root, HARD_CASE_TOL};
use crate::error::{Error, Result};

/// Global minimizer of `g^T s + 0.5 s^T H s` subject to `||s|| <= delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrSolution {
    pub s: DVector<f64>,
    pub multiplier: f64,
    pub kkt_residual: f64,
    pub hard_case: bool,
    pub model_decrease: f64,
}

/// Exact trust-region step via the eigendecomposition of `H`.
pub fn solve_tr(g: &DVector<f64>, h: &DMatrix<f64>, delta: f64) -> Result<TrSolution> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("trust-region radius {delta} must be positive")));
    }
    if h.nrows() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: g.len(),
            actual: h.nrows(),
        });
    }
    let sp = Spectrum::new(h, DENSE_LIMIT)?;
    Ok(solve_tr_in(&sp, g, h, delta))
}

pub(crate) fn solve_tr_in(sp: &Spectrum, g: &DVector<f64>, h: &DMatrix<f64>, delta: f64) -> TrSolution {
    let n = g.len();
    let gamma = sp.vectors.tr_mul(g);
    let gnorm = g.norm();
    let lam = &sp.values;
    let l1 = sp.min();
    let mult = sp.leftmost_multiplicity();
    let left_component = gamma.rows(0, mult).norm();
    let hard = left_component <= HARD_CASE_TOL * gnorm;

    // coordinates of s(mu) in the eigenbasis, leftmost block optionally dropped
    let coords = |mu: f64, skip: usize| -> DVector<f64> {
        DVector::from_iterator(
            n,
            (0..n).map(|i| if i < skip { 0.0 } else { -gamma[i] / (lam[i] + mu) }),
        )
    };
    let finish = |y: DVector<f64>, mu: f64, hard_case: bool| -> TrSolution {
        let s = &sp.vectors * y;
        make_solution(g, h, s, mu, delta, hard_case)
    };

    if gnorm == 0.0 {
        if l1 >= 0.0 {
            return finish(DVector::zeros(n), 0.0, false);
        }
        let mut y = DVector::zeros(n);
        y[0] = delta;
        return finish(y, -l1, true);
    }

    if l1 > 0.0 {
        let y = coords(0.0, 0);
        if y.norm() <= delta {
            return finish(y, 0.0, false);
        }
    } else if hard {
        let skip = mult;
        let mu = -l1;
        let y = coords(mu, skip);
        let ny = y.norm();
        if ny <= delta {
            let mut y = y;
            if l1 < 0.0 {
                y[0] = (delta * delta - ny * ny).max(0.0).sqrt();
                return finish(y, mu, true);
            }
            return finish(y, 0.0, false);
        }
    }

    let skip = if hard { mult } else { 0 };
    let lo = (-l1).max(0.0);
    let hi = gnorm / delta - l1;
    let phi = |mu: f64| -> Option<(f64, f64)> {
        let mut ss = 0.0;
        let mut d = 0.0;
        for i in skip..n {
            let den = lam[i] + mu;
            if den <= 0.0 {
                return None;
            }
            let c = gamma[i] / den;
            ss += c * c;
            d += c * c / den;
        }
        if ss == 0.0 {
            return None;
        }
        let norm = ss.sqrt();
        Some((1.0 / norm - 1.0 / delta, d / (norm * ss)))
    };
    let mu = secular_root(lo, hi, phi).unwrap_or(hi);
    finish(coords(mu, skip), mu, false)
}

fn make_solution(
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    s: DVector<f64>,
    mu: f64,
    delta: f64,
    hard_case: bool,
) -> TrSolution {
    let hs = h * &s;
    let model_decrease = -(g.dot(&s) + 0.5 * s.dot(&hs));
    let stationarity = (hs + &s * mu + g).norm();
    let complementarity = mu * (delta - s.norm()).abs();
    TrSolution {
        kkt_residual: stationarity.max(complementarity),
        s,
        multiplier: mu,
        hard_case,
        model_decrease,
    }
}
