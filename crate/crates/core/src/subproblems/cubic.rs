use nalgebra::{DMatrix, DVector};

use super::eigen::{Spectrum, DENSE_LIMIT};
use super::{secular_root, HARD_CASE_TOL};
use crate::error::{Error, Result};

/// Minimum-norm global minimizer of `g^T s + 0.5 s^T H s + (sigma/3)||s||^3`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSolution {
    pub s: DVector<f64>,
    /// `sigma * ||s||`.
    pub shift: f64,
    pub kkt_residual: f64,
    pub model_decrease: f64,
}

/// Exact cubic-regularized step via the eigendecomposition of `H`.
pub fn solve_cubic(g: &DVector<f64>, h: &DMatrix<f64>, sigma: f64) -> Result<CubicSolution> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("regularization weight {sigma} must be positive")));
    }
    if h.nrows() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: g.len(),
            actual: h.nrows(),
        });
    }
    let sp = Spectrum::new(h, DENSE_LIMIT)?;
    solve_cubic_in(&sp, g, h, sigma)
}

pub(crate) fn solve_cubic_in(
    sp: &Spectrum,
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    sigma: f64,
) -> Result<CubicSolution> {
    let n = g.len();
    let gamma = sp.vectors.tr_mul(g);
    let gnorm = g.norm();
    let lam = &sp.values;
    let l1 = sp.min();
    let mult = sp.leftmost_multiplicity();
    let hard = gamma.rows(0, mult).norm() <= HARD_CASE_TOL * gnorm;

    let coords = |mu: f64, skip: usize| -> DVector<f64> {
        DVector::from_iterator(
            n,
            (0..n).map(|i| if i < skip { 0.0 } else { -gamma[i] / (lam[i] + mu) }),
        )
    };
    let finish = |y: DVector<f64>| -> CubicSolution {
        let s = &sp.vectors * y;
        make_solution(g, h, s, sigma)
    };

    if gnorm == 0.0 {
        if l1 >= 0.0 {
            return Ok(finish(DVector::zeros(n)));
        }
        let mut y = DVector::zeros(n);
        y[0] = -l1 / sigma;
        return Ok(finish(y));
    }

    let skip = if hard && l1 < 0.0 { mult } else { 0 };
    if skip > 0 {
        let mu = -l1;
        let mut y = coords(mu, skip);
        let ny = y.norm();
        let target = mu / sigma;
        if ny <= target {
            y[0] = (target * target - ny * ny).max(0.0).sqrt();
            return Ok(finish(y));
        }
    }

    let lo = (-l1).max(0.0);
    let hi = lo + (sigma * gnorm).sqrt();
    let phi = |mu: f64| -> Option<(f64, f64)> {
        if mu <= 0.0 {
            return None;
        }
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
        Some((1.0 / norm - sigma / mu, d / (norm * ss) + sigma / (mu * mu)))
    };
    let mu = secular_root(lo, hi, phi).ok_or(Error::NonConvergence("cubic secular equation"))?;
    Ok(finish(coords(mu, skip)))
}

fn make_solution(g: &DVector<f64>, h: &DMatrix<f64>, s: DVector<f64>, sigma: f64) -> CubicSolution {
    let hs = h * &s;
    let ns = s.norm();
    let shift = sigma * ns;
    let model_decrease = -(g.dot(&s) + 0.5 * s.dot(&hs) + sigma / 3.0 * ns * ns * ns);
    let kkt_residual = (hs + &s * shift + g).norm();
    CubicSolution {
        s,
        shift,
        kkt_residual,
        model_decrease,
    }
}
