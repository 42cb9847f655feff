//! Objective functions with analytic derivative oracles.
//!
//! An [`Objective`] wraps a [`SmoothFunction`] together with the metadata the
//! rest of the crate needs: the known infimum (when there is one), Lipschitz
//! and boundedness constants, a box used for region scans, and the highest
//! order of continuous derivatives.

use std::fmt;
use std::sync::Arc;

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value, gradient and Hessian oracle of a function `R^n -> R`.
pub trait SmoothFunction: Send + Sync {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;

    /// True at points where the second derivative is discontinuous. The
    /// Hessian returned there is the right limit.
    fn hessian_kink(&self, _x: &DVector<f64>) -> bool {
        false
    }
}

/// Lipschitz (`l1`, `l2`) and bound (`m1`, `m2`) constants of the gradient
/// and Hessian over the scan domain, when known.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KnownConstants {
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
}

/// Axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ScanDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        assert!(lower.iter().zip(&upper).all(|(l, u)| l < u));
        Self { lower, upper }
    }

    /// The cube `[lo, hi]^n`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Self {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(xi, (l, u))| *l <= *xi && *xi <= *u)
    }

    /// Node `i` of a uniform 1-D grid with `resolution` nodes along `axis`.
    pub fn node(&self, axis: usize, i: usize, resolution: usize) -> f64 {
        let (lo, hi) = (self.lower[axis], self.upper[axis]);
        if i + 1 == resolution {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (resolution - 1) as f64
        }
    }

    /// Uniform tensor grid with `resolution` nodes per axis, endpoints
    /// included. The last coordinate varies fastest.
    pub fn grid(&self, resolution: usize) -> Vec<DVector<f64>> {
        assert!(resolution >= 2);
        let n = self.dim();
        let total = resolution.pow(n as u32);
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; n];
        for _ in 0..total {
            out.push(DVector::from_iterator(
                n,
                (0..n).map(|a| self.node(a, idx[a], resolution)),
            ));
            for a in (0..n).rev() {
                idx[a] += 1;
                if idx[a] < resolution {
                    break;
                }
                idx[a] = 0;
            }
        }
        out
    }
}

/// Result of [`Objective::evaluate`]. Derivatives are present up to the
/// requested order.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub f: f64,
    pub g: Option<DVector<f64>>,
    pub h: Option<DMatrix<f64>>,
    /// Set when the Hessian was requested at a point where it is only
    /// one-sided (the right limit is returned).
    pub one_sided_hessian: bool,
}

/// Max-norm discrepancies between analytic derivatives and central
/// differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdResiduals {
    pub grad_residual: f64,
    pub hess_residual: f64,
}

/// A test objective: function oracle plus metadata.
#[derive(Clone)]
pub struct Objective {
    id: String,
    n: usize,
    function: Arc<dyn SmoothFunction>,
    pub f_inf: Option<f64>,
    pub constants: KnownConstants,
    pub scan_domain: ScanDomain,
    pub smoothness_order: u8,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("id", &self.id)
            .field("n", &self.n)
            .field("f_inf", &self.f_inf)
            .field("constants", &self.constants)
            .field("scan_domain", &self.scan_domain)
            .field("smoothness_order", &self.smoothness_order)
            .finish()
    }
}

impl Objective {
    pub fn new(
        id: impl Into<String>,
        n: usize,
        function: impl SmoothFunction + 'static,
        scan_domain: ScanDomain,
        smoothness_order: u8,
    ) -> Self {
        assert!(n > 0);
        assert_eq!(scan_domain.dim(), n);
        assert!(smoothness_order == 1 || smoothness_order == 2);
        Self {
            id: id.into(),
            n,
            function: Arc::new(function),
            f_inf: None,
            constants: KnownConstants::default(),
            scan_domain,
            smoothness_order,
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_infimum(mut self, f_inf: f64) -> Self {
        self.f_inf = Some(f_inf);
        self
    }

    pub fn with_constants(mut self, constants: KnownConstants) -> Self {
        self.constants = constants;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Errors unless derivatives of `order` are continuous everywhere.
    /// Second-order methods call this before running.
    pub fn require_order(&self, order: u8) -> Result<()> {
        if order > self.smoothness_order {
            return Err(Error::OrderUnavailable {
                id: self.id.clone(),
                smoothness: self.smoothness_order,
                requested: order,
            });
        }
        Ok(())
    }

    /// Evaluates `f` and derivatives up to `order` (0, 1 or 2) at `x`.
    ///
    /// For a C^1 objective the Hessian is available away from its kinks; at
    /// a kink the right limit is returned and `one_sided_hessian` is set.
    pub fn evaluate(&self, x: &DVector<f64>, order: u8) -> Result<Evaluation> {
        self.check_dim(x)?;
        if order > 2 {
            return Err(Error::OrderUnavailable {
                id: self.id.clone(),
                smoothness: self.smoothness_order,
                requested: order,
            });
        }
        let f = self.function.value(x);
        let g = (order >= 1).then(|| self.function.gradient(x));
        let mut one_sided_hessian = false;
        let h = (order >= 2).then(|| {
            if self.smoothness_order < 2 && self.function.hessian_kink(x) {
                warn!(
                    "{}: Hessian is discontinuous at {:?}; returning the right limit",
                    self.id,
                    x.as_slice()
                );
                one_sided_hessian = true;
            }
            self.function.hessian(x)
        });
        Ok(Evaluation {
            f,
            g,
            h,
            one_sided_hessian,
        })
    }

    pub fn value(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.function.value(x))
    }

    /// Compares analytic derivatives against central differences with
    /// spacing `h`: the gradient against differences of `f`, the Hessian
    /// against differences of the analytic gradient.
    pub fn fd_check(&self, x: &DVector<f64>, h: f64) -> Result<FdResiduals> {
        self.check_dim(x)?;
        if !(h > 0.0) {
            return Err(Error::InvalidArgument(format!("step h = {h} must be positive")));
        }
        let g = self.function.gradient(x);
        let hess = self.function.hessian(x);
        let mut grad_residual = 0.0f64;
        let mut hess_residual = 0.0f64;
        let mut xp = x.clone();
        let mut xm = x.clone();
        for j in 0..self.n {
            xp[j] = x[j] + h;
            xm[j] = x[j] - h;
            let dj = (self.function.value(&xp) - self.function.value(&xm)) / (2.0 * h);
            grad_residual = grad_residual.max((dj - g[j]).abs());
            let gp = self.function.gradient(&xp);
            let gm = self.function.gradient(&xm);
            for i in 0..self.n {
                let hij = (gp[i] - gm[i]) / (2.0 * h);
                hess_residual = hess_residual.max((hij - hess[(i, j)]).abs());
            }
            xp[j] = x[j];
            xm[j] = x[j];
        }
        Ok(FdResiduals {
            grad_residual,
            hess_residual,
        })
    }

    /// Largest `kappa` such that `||g(x)||^tau >= kappa (f(x) - f_ref)` on
    /// every grid point with `f(x) > f_ref`.
    pub fn estimate_kappa(&self, f_ref: f64, tau: f64, grid: &[DVector<f64>]) -> Result<f64> {
        if grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let mut best: Option<f64> = None;
        for x in grid {
            let e = self.evaluate(x, 1)?;
            let gap = e.f - f_ref;
            if gap <= 0.0 {
                continue;
            }
            let ratio = e.g.as_ref().unwrap().norm().powf(tau) / gap;
            best = Some(best.map_or(ratio, |b| b.min(ratio)));
        }
        best.ok_or(Error::NoPointsAboveReference)
    }

    /// Estimates the gradient/Hessian constants on a uniform grid over the
    /// scan domain: `m1 = max ||g||`, `m2 = l1 = max ||H||`, and (for C^2
    /// objectives) `l2` from Hessian differences between grid neighbours.
    pub fn sample_constants(&self, resolution: usize) -> KnownConstants {
        let grid = self.scan_domain.grid(resolution);
        let n = self.n;
        let mut m1 = 0.0f64;
        let mut m2 = 0.0f64;
        let hessians: Vec<DMatrix<f64>> = grid.iter().map(|x| self.function.hessian(x)).collect();
        for (x, hx) in grid.iter().zip(&hessians) {
            m1 = m1.max(self.function.gradient(x).norm());
            m2 = m2.max(spectral_norm(hx));
        }
        let mut l2 = 0.0f64;
        if self.smoothness_order >= 2 {
            // Neighbour along axis a is `stride(a)` entries ahead.
            for a in 0..n {
                let stride = resolution.pow((n - 1 - a) as u32);
                for (i, x) in grid.iter().enumerate() {
                    let pos = (i / stride) % resolution;
                    if pos + 1 == resolution {
                        continue;
                    }
                    let j = i + stride;
                    let dist = (&grid[j] - x).norm();
                    l2 = l2.max(spectral_norm(&(&hessians[j] - &hessians[i])) / dist);
                }
            }
        }
        KnownConstants {
            l1: Some(m2),
            l2: (self.smoothness_order >= 2).then_some(l2),
            m1: Some(m1),
            m2: Some(m2),
        }
    }
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub(crate) fn spectral_norm(h: &DMatrix<f64>) -> f64 {
    h.symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
}
