//! Test-objective corpus.
//!
//! Every entry is addressable by a string id. `quad_sc` accepts an optional
//! spectrum suffix, e.g. `quad_sc:1,2` for `A = diag(1, 2)`.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{KnownConstants, Objective, ScanDomain, SmoothFunction};
use crate::regions::RegionParams;

/// Ids accepted by [`get`].
pub const IDS: [&str; 7] = [
    "fig1",
    "saddle2d",
    "cubic2d",
    "quad_sc",
    "pl_noncvx",
    "conv_deg1",
    "rosenbrock",
];

/// Function classes an entry is known to belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassTag {
    #[serde(rename = "PL")]
    Pl,
    #[serde(rename = "gradient-dominated-1")]
    GradientDominated1,
    #[serde(rename = "gradient-dominated-2")]
    GradientDominated2,
    #[serde(rename = "gH-dominated-(2,3)")]
    GhDominated23,
    #[serde(rename = "saddle")]
    Saddle,
    #[serde(rename = "unbounded-below")]
    UnboundedBelow,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub objective: Objective,
    pub recommended: RegionParams,
    pub class_tags: BTreeSet<ClassTag>,
    /// Starting point used when none is given.
    pub default_x0: Vec<f64>,
}

/// One row of the machine-readable corpus manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub dimension: usize,
    pub tags: Vec<ClassTag>,
    pub recommended_params: RegionParams,
    pub f_inf: Option<f64>,
    pub smoothness_order: u8,
    pub scan_domain: ScanDomain,
    pub constants: KnownConstants,
    pub default_x0: Vec<f64>,
}

impl CorpusEntry {
    pub fn manifest_entry(&self) -> ManifestEntry {
        let o = &self.objective;
        ManifestEntry {
            id: o.id().to_string(),
            dimension: o.dim(),
            tags: self.class_tags.iter().copied().collect(),
            recommended_params: self.recommended,
            f_inf: o.f_inf,
            smoothness_order: o.smoothness_order,
            scan_domain: o.scan_domain.clone(),
            constants: o.constants,
            default_x0: self.default_x0.clone(),
        }
    }
}

/// Looks up a corpus entry by id.
pub fn get(id: &str) -> Result<CorpusEntry> {
    let (base, suffix) = match id.split_once(':') {
        Some((b, s)) => (b, Some(s)),
        None => (id, None),
    };
    if suffix.is_some() && base != "quad_sc" {
        return Err(Error::UnknownObjective(id.to_string()));
    }
    match base {
        "fig1" => Ok(fig1()),
        "saddle2d" => Ok(saddle2d()),
        "cubic2d" => Ok(cubic2d()),
        "quad_sc" => match suffix {
            None => quad_sc_spectrum(&[1.0, 1.0]),
            Some(s) => {
                let spectrum = s
                    .split(',')
                    .map(|t| t.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::UnknownObjective(id.to_string()))?;
                let mut e = quad_sc_spectrum(&spectrum)?;
                e.objective = e.objective.with_id(id);
                Ok(e)
            }
        },
        "pl_noncvx" => Ok(pl_noncvx()),
        "conv_deg1" => Ok(conv_deg1(2)),
        "rosenbrock" => Ok(rosenbrock()),
        _ => Err(Error::UnknownObjective(id.to_string())),
    }
}

/// All default entries, in [`IDS`] order.
pub fn all() -> Vec<CorpusEntry> {
    IDS.iter().map(|id| get(id).expect("corpus ids are valid")).collect()
}

pub fn manifest() -> Vec<ManifestEntry> {
    all().iter().map(CorpusEntry::manifest_entry).collect()
}

fn tags(list: &[ClassTag]) -> BTreeSet<ClassTag> {
    list.iter().copied().collect()
}

// ---------------------------------------------------------------------------

/// `f(x) = 1.5 x^2 - 0.5` for `x <= 1`, `(x - 2)^3 + 2` otherwise.
/// C^1 with a jump in `f''` at `x = 1`.
#[derive(Debug, Clone, Copy)]
pub struct Fig1;

impl SmoothFunction for Fig1 {
    fn value(&self, x: &DVector<f64>) -> f64 {
        let t = x[0];
        if t <= 1.0 {
            1.5 * t * t - 0.5
        } else {
            (t - 2.0).powi(3) + 2.0
        }
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let t = x[0];
        DVector::from_element(1, if t <= 1.0 { 3.0 * t } else { 3.0 * (t - 2.0).powi(2) })
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let t = x[0];
        // right limit at the kink
        DMatrix::from_element(1, 1, if t < 1.0 { 3.0 } else { 6.0 * (t - 2.0) })
    }

    fn hessian_kink(&self, x: &DVector<f64>) -> bool {
        x[0] == 1.0
    }
}

pub fn fig1() -> CorpusEntry {
    let objective = Objective::new("fig1", 1, Fig1, ScanDomain::cube(1, -2.0, 4.0), 1)
        .with_infimum(-0.5)
        .with_constants(KnownConstants {
            l1: Some(12.0),
            l2: None,
            m1: Some(12.0),
            m2: Some(12.0),
        });
    CorpusEntry {
        objective,
        recommended: RegionParams::new(0.05, -0.5),
        class_tags: BTreeSet::new(),
        default_x0: vec![3.5],
    }
}

/// `f(x, y) = x^2 - y^2 + 10`.
#[derive(Debug, Clone, Copy)]
pub struct Saddle2d;

impl SmoothFunction for Saddle2d {
    fn value(&self, x: &DVector<f64>) -> f64 {
        x[0] * x[0] - x[1] * x[1] + 10.0
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(vec![2.0 * x[0], -2.0 * x[1]])
    }
    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -2.0]))
    }
}

pub fn saddle2d() -> CorpusEntry {
    let objective = Objective::new("saddle2d", 2, Saddle2d, ScanDomain::cube(2, -3.0, 3.0), 2)
        .with_constants(KnownConstants {
            l1: Some(2.0),
            l2: Some(0.0),
            m1: Some(2.0 * 18f64.sqrt()),
            m2: Some(2.0),
        });
    CorpusEntry {
        objective,
        recommended: RegionParams::new(0.5, 0.0),
        class_tags: tags(&[ClassTag::Saddle, ClassTag::UnboundedBelow]),
        default_x0: vec![1.0, 0.01],
    }
}

/// `f(x, y) = x^3 - y^3 + 22`.
#[derive(Debug, Clone, Copy)]
pub struct Cubic2d;

impl SmoothFunction for Cubic2d {
    fn value(&self, x: &DVector<f64>) -> f64 {
        x[0].powi(3) - x[1].powi(3) + 22.0
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(vec![3.0 * x[0] * x[0], -3.0 * x[1] * x[1]])
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(vec![6.0 * x[0], -6.0 * x[1]]))
    }
}

pub fn cubic2d() -> CorpusEntry {
    let objective = Objective::new("cubic2d", 2, Cubic2d, ScanDomain::cube(2, -3.0, 3.0), 2)
        .with_constants(KnownConstants {
            l1: Some(18.0),
            l2: Some(6.0),
            m1: Some(27.0 * 2f64.sqrt()),
            m2: Some(18.0),
        });
    CorpusEntry {
        objective,
        recommended: RegionParams::new(0.5, 0.0),
        class_tags: tags(&[ClassTag::Saddle, ClassTag::UnboundedBelow]),
        default_x0: vec![1.0, 0.5],
    }
}

/// `f(x) = 0.5 x^T A x`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    a: DMatrix<f64>,
}

impl Quadratic {
    pub fn new(a: DMatrix<f64>) -> Self {
        assert!(a.is_square());
        Self { a }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }
}

impl SmoothFunction for Quadratic {
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.a * x))
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x
    }
    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.a.clone()
    }
}

/// Strongly convex quadratic with `A = diag(spectrum)`.
pub fn quad_sc_spectrum(spectrum: &[f64]) -> Result<CorpusEntry> {
    let d = DVector::from_row_slice(spectrum);
    quad_sc(DMatrix::from_diagonal(&d))
}

/// Strongly convex quadratic `0.5 x^T A x` for a symmetric positive definite
/// `A`. PL with `kappa = 2 lambda_min(A)`.
pub fn quad_sc(a: DMatrix<f64>) -> Result<CorpusEntry> {
    let n = a.nrows();
    if n == 0 || !a.is_square() {
        return Err(Error::InvalidArgument("quad_sc needs a nonempty square matrix".into()));
    }
    if (&a - a.transpose()).amax() > 1e-12 * (1.0 + a.amax()) {
        return Err(Error::NotSymmetric((&a - a.transpose()).amax()));
    }
    let eig = a.symmetric_eigenvalues();
    let lmin = eig.min();
    let lmax = eig.max();
    if !(lmin > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "quad_sc needs a positive definite matrix (lambda_min = {lmin})"
        )));
    }
    let objective = Objective::new("quad_sc", n, Quadratic::new(a), ScanDomain::cube(n, -2.0, 2.0), 2)
        .with_infimum(0.0)
        .with_constants(KnownConstants {
            l1: Some(lmax),
            l2: None,
            m1: Some(lmax * 2.0 * (n as f64).sqrt()),
            m2: Some(lmax),
        });
    Ok(CorpusEntry {
        objective,
        recommended: RegionParams::new(2.0 * lmin, 0.0),
        class_tags: tags(&[ClassTag::Pl, ClassTag::GradientDominated2]),
        default_x0: vec![1.0; n],
    })
}

/// `f(x) = x^2 + 3 sin^2(x)`: nonconvex, PL, unique minimizer at 0.
#[derive(Debug, Clone, Copy)]
pub struct PlNonconvex;

impl SmoothFunction for PlNonconvex {
    fn value(&self, x: &DVector<f64>) -> f64 {
        let t = x[0];
        t * t + 3.0 * t.sin().powi(2)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let t = x[0];
        DVector::from_element(1, 2.0 * t + 3.0 * (2.0 * t).sin())
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let t = x[0];
        DMatrix::from_element(1, 1, 2.0 + 6.0 * (2.0 * t).cos())
    }
}

/// Grid estimate of the degree-2 domination constant of `pl_noncvx` on
/// 10^4 uniform nodes of `[-10, 10]`.
pub const PL_NONCVX_KAPPA_HAT: f64 = 0.351_062_592_822_967_4;

pub fn pl_noncvx() -> CorpusEntry {
    let objective = Objective::new("pl_noncvx", 1, PlNonconvex, ScanDomain::cube(1, -10.0, 10.0), 2)
        .with_infimum(0.0)
        .with_constants(KnownConstants {
            l1: Some(8.0),
            l2: Some(12.0),
            m1: Some(23.0),
            m2: Some(8.0),
        });
    CorpusEntry {
        objective,
        recommended: RegionParams::new(0.35, 0.0),
        class_tags: tags(&[ClassTag::Pl, ClassTag::GradientDominated2]),
        default_x0: vec![3.0],
    }
}

/// `f(x) = 0.25 ||x||^4`: convex, degree-1 gradient dominated on balls
/// around the origin.
#[derive(Debug, Clone, Copy)]
pub struct QuarticNorm;

impl SmoothFunction for QuarticNorm {
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.25 * x.norm_squared().powi(2)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x * x.norm_squared()
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = x.len();
        DMatrix::identity(n, n) * x.norm_squared() + (x * x.transpose()) * 2.0
    }
}

pub fn conv_deg1(n: usize) -> CorpusEntry {
    let objective = Objective::new("conv_deg1", n, QuarticNorm, ScanDomain::cube(n, -1.0, 1.0), 2)
        .with_infimum(0.0);
    let constants = objective.sample_constants(if n <= 2 { 41 } else { 9 });
    CorpusEntry {
        objective: objective.with_constants(constants),
        recommended: RegionParams::new(1.0, 0.0),
        class_tags: tags(&[ClassTag::GradientDominated1]),
        default_x0: vec![0.5; n],
    }
}

/// Classical Rosenbrock function `100 (y - x^2)^2 + (1 - x)^2`.
#[derive(Debug, Clone, Copy)]
pub struct Rosenbrock;

impl SmoothFunction for Rosenbrock {
    fn value(&self, x: &DVector<f64>) -> f64 {
        let (a, b) = (x[0], x[1]);
        100.0 * (b - a * a).powi(2) + (1.0 - a).powi(2)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let (a, b) = (x[0], x[1]);
        DVector::from_vec(vec![
            -400.0 * a * (b - a * a) - 2.0 * (1.0 - a),
            200.0 * (b - a * a),
        ])
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let (a, b) = (x[0], x[1]);
        DMatrix::from_row_slice(
            2,
            2,
            &[1200.0 * a * a - 400.0 * b + 2.0, -400.0 * a, -400.0 * a, 200.0],
        )
    }
}

pub fn rosenbrock() -> CorpusEntry {
    let objective = Objective::new(
        "rosenbrock",
        2,
        Rosenbrock,
        ScanDomain::new(vec![-2.0, -1.0], vec![2.0, 3.0]),
        2,
    )
    .with_infimum(0.0);
    let constants = objective.sample_constants(41);
    CorpusEntry {
        objective: objective.with_constants(constants),
        recommended: RegionParams::new(0.01, 0.0),
        class_tags: BTreeSet::new(),
        default_x0: vec![-1.2, 1.0],
    }
}
