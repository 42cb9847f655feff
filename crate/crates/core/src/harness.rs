//! Verification of observed trajectories against the rate templates.
//!
//! Checks are made on windows of `m` raw iterations: for every `k` with
//! `k + m` inside the trajectory and `Delta f_k > 0`, the observed ratio
//! `Delta f_{k+m} / Delta f_k` is compared with the template for the region
//! of `x_k` (of `x_{k+m}` for the Newton class).


use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{Algo, IterateRecord, Trajectory};
use crate::bounds::{
    contemporary_bound, linear_phase_iterations, linear_xi, rate_template, rg_explicit_k1_bound, AlgoClass,
    ContemporaryBound, RateBound, RateContext,
};
use crate::corpus;
use crate::error::{Error, Result};
use crate::regions::{label_from_witness, Region, RegionParams, Witness};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Tolerance on ratio and decrease comparisons.
pub const CHECK_TOL: f64 = 1e-10;

/// `|{k : f_k - f_inf > eps_f}|` over the recorded iterates.
pub fn count_kf_with(traj: &Trajectory, eps_f: f64, f_inf: f64) -> usize {
    traj.records.iter().filter(|r| r.f - f_inf > eps_f).count()
}

/// [`count_kf_with`] using the trajectory's own infimum.
pub fn count_kf(traj: &Trajectory, eps_f: f64) -> Result<usize> {
    match traj.f_inf {
        Some(f) if f.is_finite() => Ok(count_kf_with(traj, eps_f, f)),
        _ => Err(Error::UnknownInfimum),
    }
}

/// `|{k : ||g_k|| > eps_1}|`.
pub fn count_k1(traj: &Trajectory, eps_1: f64) -> usize {
    traj.records.iter().filter(|r| r.grad_norm > eps_1).count()
}

/// `|{k : lambda(H_k) < -eps_2}|`.
pub fn count_k2(traj: &Trajectory, eps_2: f64) -> usize {
    traj.records
        .iter()
        .filter(|r| r.lambda_minus.is_some_and(|l| l > eps_2))
        .count()
}

/// Longest run of consecutive rejected steps.
pub fn max_rejection_run(traj: &Trajectory) -> usize {
    let mut best = 0;
    let mut cur = 0;
    for r in &traj.records {
        if r.accepted {
            cur = 0;
        } else if r.step_norm > 0.0 {
            cur += 1;
            best = best.max(cur);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub zeta_hat: f64,
    pub m_hat: usize,
    /// Number of windows where the class inequality applies.
    pub applicable: usize,
    /// Windows skipped because `f` did not decrease.
    pub nonpositive_decrease: Vec<usize>,
}

fn measure(class: AlgoClass, recs: &[IterateRecord], labels: &[Region], k: usize, m: usize) -> Option<f64> {
    match class {
        AlgoClass::Grad => labels[k].in_r1().then(|| recs[k].grad_norm.powi(2)),
        AlgoClass::Newton => labels[k + m].in_r1().then(|| recs[k + m].grad_norm.powf(1.5)),
        AlgoClass::Curvature => {
            if labels[k].in_r2() {
                recs[k].lambda_minus.map(|l| l.powi(3))
            } else {
                None
            }
        }
        AlgoClass::P(_) => None,
    }
}

/// Label used to pick the template for window `k`.
fn window_label(class: AlgoClass, labels: &[Region], k: usize, m: usize) -> Region {
    if class == AlgoClass::Newton {
        labels[k + m]
    } else {
        labels[k]
    }
}

fn calibrate_labels(
    traj: &Trajectory,
    labels: &[Region],
    class: AlgoClass,
    m: usize,
) -> Result<(f64, usize, Vec<usize>)> {
    if let AlgoClass::P(_) = class {
        return Err(Error::Calibration("order-p classes are not calibrated".into()));
    }
    let recs = &traj.records;
    let mut zeta: f64 = 0.0;
    let mut applicable = 0;
    let mut skipped = Vec::new();
    for k in 0..recs.len().saturating_sub(m) {
        let Some(meas) = measure(class, recs, labels, k, m) else {
            continue;
        };
        let dec = recs[k].f - recs[k + m].f;
        if !(dec > 0.0) {
            if meas > 0.0 {
                skipped.push(k);
            }
            continue;
        }
        applicable += 1;
        zeta = zeta.max(meas / dec);
    }
    if applicable == 0 || !(zeta > 0.0) {
        return Err(Error::Calibration(format!("no window with positive decrease for the {class} class")));
    }
    Ok((zeta, applicable, skipped))
}

/// Smallest `zeta` (and the window length `m`) for which the class
/// inequality holds at every applicable window of the trajectory, using the
/// recorded region labels.
pub fn calibrate_zeta_m(traj: &Trajectory, class: AlgoClass) -> Result<Calibration> {
    if traj.accepted_steps() == 0 {
        return Err(Error::Calibration("trajectory has no accepted steps".into()));
    }
    let m = 1 + max_rejection_run(traj);
    let labels: Vec<Region> = traj.records.iter().map(|r| r.region).collect();
    let (zeta_hat, applicable, nonpositive_decrease) = calibrate_labels(traj, &labels, class, m)?;
    Ok(Calibration {
        zeta_hat,
        m_hat: m,
        applicable,
        nonpositive_decrease,
    })
}

/// Where `kappa` comes from when verifying.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaSource {
    /// Largest `kappa` placing every recorded iterate in `R1` or `R2`.
    Derived,
    /// The parameters stored with the trajectory.
    Recorded,
    /// The corpus entry's recommended parameters.
    Recommended,
    Explicit(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub kappa: KappaSource,
    pub f_ref: Option<f64>,
    /// Replaces every class constant `zeta`.
    pub zeta: Option<f64>,
    /// Replaces the window length.
    pub m: Option<usize>,
    pub eps_f: Vec<f64>,
    pub eps_1: Option<f64>,
    pub eps_2: Option<f64>,
    /// Tolerance at which the region-based count is set against the
    /// contemporary bound.
    pub rc_eps_f: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            kappa: KappaSource::Derived,
            f_ref: None,
            zeta: None,
            m: None,
            eps_f: vec![1e-2, 1e-4, 1e-6, 1e-8],
            eps_1: None,
            eps_2: None,
            rc_eps_f: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantSource {
    Analytic,
    Calibrated,
    Override,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassConstants {
    pub class: AlgoClass,
    pub zeta: f64,
    pub m: usize,
    pub source: ConstantSource,
    pub calibration: Option<Calibration>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationCheck {
    pub k: usize,
    pub class: AlgoClass,
    pub region: Region,
    pub predicted: RateBound,
    pub observed_ratio: f64,
    /// `None` when no template applies.
    pub satisfied: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecreaseCheck {
    pub k: usize,
    pub class: AlgoClass,
    pub measure: f64,
    pub decrease: f64,
    pub zeta: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KfCount {
    pub eps_f: f64,
    pub observed: usize,
    /// Linear-phase count with hidden constants set to 1.
    pub predicted: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContemporaryComparison {
    pub eps_1: f64,
    pub eps_2: f64,
    pub delta_f0: f64,
    pub k1_observed: usize,
    pub k2_observed: usize,
    /// Order values with constant 1.
    pub bound: ContemporaryBound,
    /// `2 l1 delta_f0 / eps_1^2` for RG.
    pub rg_explicit_k1: Option<f64>,
    pub rc_eps_f: f64,
    /// Region-based linear-phase count at `rc_eps_f`.
    pub rc_bound: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: String,
    pub k: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub windows: usize,
    pub applicable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedSummary {
    pub zeta_hat: f64,
    pub m_hat: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub trajectory_id: String,
    pub objective_id: String,
    pub algo: Algo,
    pub region_params: RegionParams,
    pub kappa_source: KappaSource,
    pub constants: Vec<ClassConstants>,
    /// Calibration of the class used on `R1`, when one was run.
    pub calibrated: Option<CalibratedSummary>,
    pub per_iteration_checks: Vec<IterationCheck>,
    pub decrease_checks: Vec<DecreaseCheck>,
    pub kf_counts: Vec<KfCount>,
    pub contemporary: ContemporaryComparison,
    pub coverage: Coverage,
    pub notes: Vec<String>,
    pub violations: Vec<Violation>,
}

/// Largest `kappa` with every iterate above the reference in `R1` or `R2`.
pub fn derived_kappa(records: &[IterateRecord], f_ref: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for r in records {
        let d = r.f - f_ref;
        if !(d > 0.0) {
            continue;
        }
        let g = r.grad_norm;
        let l = r.lambda_minus.unwrap_or(0.0);
        let top = g.max(g * g).max(l).max(l * l * l);
        let v = top / d;
        best = Some(best.map_or(v, |b| b.min(v)));
    }
    best.filter(|k| *k > 0.0 && k.is_finite())
}

struct Setup {
    params: RegionParams,
    labels: Vec<Region>,
    m: usize,
    constants: Vec<ClassConstants>,
    delta_fs: Vec<f64>,
    notes: Vec<String>,
}

impl Setup {
    fn constants_for(&self, class: AlgoClass) -> Option<&ClassConstants> {
        self.constants.iter().find(|c| c.class == class)
    }

    fn ctx(&self, c: &ClassConstants) -> RateContext {
        RateContext {
            algo_class: c.class,
            kappa: self.params.kappa,
            zeta: c.zeta,
            m: c.m,
            f0_gap: self.delta_fs[0],
        }
    }
}

fn resolve(traj: &Trajectory, opts: &VerifyOptions, f_ref_override: Option<f64>) -> Result<Setup> {
    traj.validate()?;
    let recs = &traj.records;
    if recs
        .iter()
        .any(|r| r.region == Region::Unknown && r.lambda_minus.is_none() && r.delta_f >= 0.0)
    {
        return Err(Error::MissingRegions);
    }
    let mut notes = Vec::new();
    let f_ref = f_ref_override.or(opts.f_ref).unwrap_or(traj.region_params.f_ref);
    let kappa = match opts.kappa {
        KappaSource::Explicit(k) => k,
        KappaSource::Recorded => traj.region_params.kappa,
        KappaSource::Recommended => corpus::get(&traj.objective_id)?.recommended.kappa,
        KappaSource::Derived => match derived_kappa(recs, f_ref) {
            Some(k) => k,
            None => {
                notes.push("derived kappa unavailable; using the recorded kappa".into());
                traj.region_params.kappa
            }
        },
    };
    let params = RegionParams::new(kappa, f_ref);
    params.validate()?;
    let labels: Vec<Region> = recs
        .iter()
        .map(|r| {
            let w = Witness {
                delta_f: r.f - f_ref,
                grad_norm: r.grad_norm,
                lambda_minus: r.lambda_minus,
            };
            label_from_witness(&w, &params)
        })
        .collect();

    let algo = traj.config.algo;
    let m_hat = 1 + max_rejection_run(traj);
    let m = opts.m.unwrap_or(m_hat);
    let mut constants = Vec::new();
    for class in AlgoClass::for_algo(algo) {
        let (zeta, source, calibration) = if let Some(z) = opts.zeta {
            (z, ConstantSource::Override, None)
        } else if algo == Algo::Rg && class == AlgoClass::Grad && opts.m.is_none_or(|v| v == 1) {
            let l1 = traj
                .config
                .l1
                .ok_or_else(|| Error::Config("RG trajectory without l1".into()))?;
            (2.0 * l1, ConstantSource::Analytic, None)
        } else if traj.accepted_steps() == 0 {
            notes.push(format!("{class}: no accepted steps, class not checked"));
            continue;
        } else {
            match calibrate_labels(traj, &labels, class, m) {
                Ok((z, applicable, nonpositive_decrease)) => (
                    z,
                    ConstantSource::Calibrated,
                    Some(Calibration {
                        zeta_hat: z,
                        m_hat: m,
                        applicable,
                        nonpositive_decrease,
                    }),
                ),
                Err(e) => {
                    notes.push(format!("{class}: {e}; class not checked"));
                    continue;
                }
            }
        };
        let mut zeta = zeta;
        if matches!(class, AlgoClass::Grad | AlgoClass::Curvature) && zeta < kappa {
            notes.push(format!("{class}: zeta = {zeta:e} raised to kappa = {kappa:e}"));
            zeta = kappa;
        }
        constants.push(ClassConstants {
            class,
            zeta,
            m,
            source,
            calibration,
        });
    }
    Ok(Setup {
        params,
        labels,
        m,
        constants,
        delta_fs: recs.iter().map(|r| r.f - f_ref).collect(),
        notes,
    })
}

/// Applicable template bounds for window `k`, one per class with constants.
fn window_bounds(setup: &Setup, k: usize) -> Vec<(AlgoClass, Region, RateBound)> {
    let d = setup.labels.len();
    let mut out = Vec::new();
    for c in &setup.constants {
        if k + c.m >= d {
            continue;
        }
        let label = window_label(c.class, &setup.labels, k, c.m);
        out.push((c.class, label, rate_template(label, &setup.ctx(c), setup.delta_fs[k])));
    }
    out
}

fn trajectory_id(traj: &Trajectory) -> String {
    format!("{}/{}", traj.objective_id, traj.config.algo.name())
}

/// Checks every window of the trajectory against the rate templates.
pub fn verify_run(traj: &Trajectory, opts: &VerifyOptions) -> Result<VerificationReport> {
    let mut setup = resolve(traj, opts, None)?;
    let recs = &traj.records;
    let algo = traj.config.algo;
    let m = setup.m;
    let mut checks = Vec::new();
    let mut violations = Vec::new();
    let mut windows = 0;
    for k in 0..recs.len().saturating_sub(m) {
        let dk = setup.delta_fs[k];
        if !(dk > 0.0) {
            continue;
        }
        windows += 1;
        let observed = setup.delta_fs[k + m] / dk;
        let bounds = window_bounds(&setup, k);
        let mut emitted = false;
        for (class, region, b) in &bounds {
            if !b.applicable {
                continue;
            }
            emitted = true;
            let ok = observed <= b.ratio_bound + CHECK_TOL;
            if !ok {
                violations.push(Violation {
                    kind: "ratio".into(),
                    k,
                    detail: format!(
                        "{class} in {region}: observed {observed:e} > bound {:e}",
                        b.ratio_bound
                    ),
                });
            }
            checks.push(IterationCheck {
                k,
                class: *class,
                region: *region,
                predicted: b.clone(),
                observed_ratio: observed,
                satisfied: Some(ok),
            });
        }
        if !emitted {
            let class = AlgoClass::first_order_class(algo);
            let (region, predicted) = match bounds.into_iter().next() {
                Some((_, r, b)) => (r, b),
                None => (
                    setup.labels[k],
                    RateBound::inapplicable(format!("no constants for the {class} class")),
                ),
            };
            checks.push(IterationCheck {
                k,
                class,
                region,
                predicted,
                observed_ratio: observed,
                satisfied: None,
            });
        }
    }
    let applicable = checks.iter().filter(|c| c.satisfied.is_some()).count();
    if applicable == 0 {
        setup.notes.push("zero coverage: no window falls in a region with a template".into());
    }

    let mut decrease_checks = Vec::new();
    for c in &setup.constants {
        for k in 0..recs.len().saturating_sub(c.m) {
            let Some(meas) = measure(c.class, recs, &setup.labels, k, c.m) else {
                continue;
            };
            let dec = recs[k].f - recs[k + c.m].f;
            let ok = dec >= meas / c.zeta - CHECK_TOL;
            if !ok {
                violations.push(Violation {
                    kind: "decrease".into(),
                    k,
                    detail: format!("{}: decrease {dec:e} < {meas:e}/{:e}", c.class, c.zeta),
                });
            }
            decrease_checks.push(DecreaseCheck {
                k,
                class: c.class,
                measure: meas,
                decrease: dec,
                zeta: c.zeta,
                satisfied: ok,
            });
        }
    }

    for k in 1..recs.len() {
        let (a, b) = (recs[k - 1].f, recs[k].f);
        if b > a + 1e-14 * a.abs().max(1.0) {
            violations.push(Violation {
                kind: "monotonicity".into(),
                k,
                detail: format!("f increased from {a:e} to {b:e}"),
            });
        }
    }

    let primary = setup.constants_for(AlgoClass::first_order_class(algo)).cloned();
    let calibrated = primary.as_ref().and_then(|c| {
        c.calibration.as_ref().map(|cal| CalibratedSummary {
            zeta_hat: cal.zeta_hat,
            m_hat: cal.m_hat,
        })
    });
    let xi = primary
        .as_ref()
        .map(|c| linear_xi(algo, setup.params.kappa, c.zeta, setup.delta_fs[0]));

    let mut kf_counts = Vec::new();
    let f_inf = traj.f_inf.filter(|f| f.is_finite());
    let gap0 = f_inf.map(|fi| recs[0].f - fi);
    if let Some(fi) = f_inf {
        let mut eps_list = opts.eps_f.clone();
        eps_list.sort_by(|a, b| b.total_cmp(a));
        for eps in eps_list {
            kf_counts.push(KfCount {
                eps_f: eps,
                observed: count_kf_with(traj, eps, fi),
                predicted: xi.map(|x| linear_phase_iterations(m, x, gap0.unwrap(), eps)),
            });
        }
    } else {
        setup.notes.push("f_inf unknown: K_f counts skipped".into());
    }

    let term = &traj.config.termination;
    let eps_1 = opts.eps_1.or(term.eps_1).unwrap_or(1e-4);
    let eps_2 = opts.eps_2.or(term.eps_2).unwrap_or(1e-4);
    let delta_f0 = gap0.unwrap_or(setup.delta_fs[0]).max(0.0);
    let contemporary = ContemporaryComparison {
        eps_1,
        eps_2,
        delta_f0,
        k1_observed: count_k1(traj, eps_1),
        k2_observed: count_k2(traj, eps_2),
        bound: contemporary_bound(algo, eps_1, eps_2, delta_f0),
        rg_explicit_k1: (algo == Algo::Rg)
            .then_some(traj.config.l1)
            .flatten()
            .map(|l1| rg_explicit_k1_bound(l1, delta_f0, eps_1)),
        rc_eps_f: opts.rc_eps_f,
        rc_bound: xi.map(|x| linear_phase_iterations(m, x, delta_f0, opts.rc_eps_f)),
    };

    for c in &setup.constants {
        if c.source == ConstantSource::Calibrated {
            setup
                .notes
                .push(format!("{}: zeta is empirical (calibrated on this trajectory)", c.class));
        }
    }

    Ok(VerificationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        trajectory_id: trajectory_id(traj),
        objective_id: traj.objective_id.clone(),
        algo,
        region_params: setup.params,
        kappa_source: opts.kappa,
        constants: setup.constants,
        calibrated,
        per_iteration_checks: checks,
        decrease_checks,
        kf_counts,
        contemporary,
        coverage: Coverage { windows, applicable },
        notes: setup.notes,
        violations,
    })
}

/// Verifies many trajectories in parallel, preserving order.
pub fn verify_batch(trajs: &[Trajectory], opts: &VerifyOptions) -> Vec<Result<VerificationReport>> {
    trajs.par_iter().map(|t| verify_run(t, opts)).collect()
}

pub const SUMMARY_CSV_HEADER: &str =
    "trajectory_id,algo,kappa,f_ref,m,zeta,windows,applicable,violations,k1_observed,k2_observed";

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(s)?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported report schema version {}",
                r.schema_version
            )));
        }
        Ok(r)
    }

    /// One CSV row (without header); `zeta` lists `class=value` pairs.
    pub fn summary_row(&self) -> String {
        let m = self.constants.first().map_or(String::new(), |c| c.m.to_string());
        let zeta = self
            .constants
            .iter()
            .map(|c| format!("{}={:e}", c.class, c.zeta))
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "{},{},{:.16e},{:.16e},{},{},{},{},{},{},{}",
            csv_field(&self.trajectory_id),
            self.algo.name(),
            self.region_params.kappa,
            self.region_params.f_ref,
            m,
            zeta,
            self.coverage.windows,
            self.coverage.applicable,
            self.violations.len(),
            self.contemporary.k1_observed,
            self.contemporary.k2_observed,
        )
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn summary_csv(reports: &[VerificationReport]) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.summary_row());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub k: usize,
    pub delta_f_observed: f64,
    pub delta_f_envelope: f64,
}

/// Envelope `Delta f^env` advanced by the tightest applicable template at
/// every multiple of `m`, with `f_ref = f_inf`.
pub fn envelope_compare(traj: &Trajectory, opts: &VerifyOptions) -> Result<Vec<EnvelopePoint>> {
    let f_inf = traj.f_inf.filter(|f| f.is_finite()).ok_or(Error::UnknownInfimum)?;
    let setup = resolve(traj, opts, Some(f_inf))?;
    let recs = &traj.records;
    let m = setup.m;
    let mut env = vec![0.0; recs.len()];
    env[0] = setup.delta_fs[0];
    let mut k = 0;
    while k < recs.len() {
        let next = (k + m).min(recs.len() - 1);
        let mut factor = 1.0f64;
        let moved = recs[k..next].iter().any(|r| r.accepted && r.step_norm > 0.0);
        if next == k + m && moved && setup.delta_fs[k] > 0.0 {
            for (_, _, b) in window_bounds(&setup, k) {
                if b.applicable {
                    factor = factor.min(b.ratio_bound);
                }
            }
        }
        for j in k + 1..=next {
            env[j] = env[k];
        }
        if next == k {
            break;
        }
        env[next] = env[k] * factor;
        k = next;
    }
    Ok(recs
        .iter()
        .zip(env)
        .zip(&setup.delta_fs)
        .map(|((r, e), d)| EnvelopePoint {
            k: r.k,
            delta_f_observed: *d,
            delta_f_envelope: e,
        })
        .collect())
}
