use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest dimension accepted by the dense solvers.
pub const DENSE_LIMIT: usize = 500;

const SYMMETRY_TOL: f64 = 1e-10;

/// Smallest eigenvalue of a symmetric matrix with a unit eigenvector whose
/// first nonzero component is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct LeftmostEig {
    pub lambda: f64,
    pub v: DVector<f64>,
}

/// Full eigendecomposition with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub(crate) struct Spectrum {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn new(h: &DMatrix<f64>, limit: usize) -> Result<Self> {
        let n = h.nrows();
        if h.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: h.ncols(),
            });
        }
        if n > limit {
            return Err(Error::TooLarge(n, limit));
        }
        let asym = (h - h.transpose()).amax();
        if !(asym <= SYMMETRY_TOL * (1.0 + h.amax())) {
            return Err(Error::NotSymmetric(asym));
        }
        if n == 0 {
            return Ok(Self {
                values: DVector::zeros(0),
                vectors: DMatrix::zeros(0, 0),
            });
        }
        let sym = (h + h.transpose()) * 0.5;
        let eig = sym
            .try_symmetric_eigen(f64::EPSILON, 10_000)
            .ok_or(Error::NonConvergence("symmetric eigensolver"))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
        let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = DMatrix::zeros(n, n);
        for (c, &i) in order.iter().enumerate() {
            let mut col = eig.eigenvectors.column(i).into_owned();
            normalize_sign(&mut col);
            vectors.set_column(c, &col);
        }
        Ok(Self { values, vectors })
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// Largest absolute eigenvalue.
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Number of eigenvalues equal to the smallest one up to a relative
    /// tolerance.
    pub fn leftmost_multiplicity(&self) -> usize {
        let tol = 1e-12 * (1.0 + self.norm());
        let lo = self.min();
        self.values.iter().take_while(|&&v| v - lo <= tol).count()
    }
}

fn normalize_sign(v: &mut DVector<f64>) {
    let scale = v.amax();
    if let Some(first) = v.iter().find(|c| c.abs() > 1e-12 * scale).copied() {
        if first < 0.0 {
            v.neg_mut();
        }
    }
}

/// Leftmost eigenpair of a symmetric matrix of dimension at most
/// [`DENSE_LIMIT`].
pub fn leftmost_eig(h: &DMatrix<f64>) -> Result<LeftmostEig> {
    leftmost_eig_with_limit(h, DENSE_LIMIT)
}

pub fn leftmost_eig_with_limit(h: &DMatrix<f64>, limit: usize) -> Result<LeftmostEig> {
    if h.nrows() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let sp = Spectrum::new(h, limit)?;
    Ok(LeftmostEig {
        lambda: sp.min(),
        v: sp.vectors.column(0).into_owned(),
    })
}
