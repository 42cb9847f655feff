//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use rca_core::algorithms::{run, Algo, AlgoConfig, TerminationReason, Trajectory};
use rca_core::bounds::{linear_phase_iterations, newton_threshold, superlinear_tail_iterations, AlgoClass};
use rca_core::corpus::{self, CorpusEntry};
use rca_core::harness::{self, count_kf, envelope_compare, verify_run, KappaSource, VerifyOptions};
use rca_core::objective::{Objective, ScanDomain, SmoothFunction};
use rca_core::regions::{classify, delta_p, region_scan, Region, RegionParams};
use rca_core::subproblems::{solve_cubic, solve_tr};
use rca_testkit as tk;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// `f(x) = x^T A x / 2 + sum x_i^4 / 4 + b^T x`.
struct QuarticPlusQuadratic {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl SmoothFunction for QuarticPlusQuadratic {
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.a * x)) + x.iter().map(|t| t.powi(4)).sum::<f64>() / 4.0 + self.b.dot(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x + x.map(|t| t.powi(3)) + &self.b
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        &self.a + DMatrix::from_diagonal(&x.map(|t| 3.0 * t * t))
    }
}

fn c1_delta_p_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = tk::rng::seeded(101);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = 1 + i % 4;
        let a = tk::random_symmetric(&mut rng, n, 1.0);
        let b = tk::random_vector(&mut rng, n, 0.5);
        let x = tk::random_vector(&mut rng, n, 0.7);
        // independent derivatives for the oracle side
        let g = &a * &x + x.map(|t| t.powi(3)) + &b;
        let h = &a + DMatrix::from_diagonal(&x.map(|t| 3.0 * t * t));
        let obj = Objective::new("qpq", n, QuarticPlusQuadratic { a, b }, ScanDomain::cube(n, -1.0, 1.0), 2);
        let d1 = delta_p(&obj, &x, 1).map_err(|e| e.to_string())?;
        let d2 = delta_p(&obj, &x, 2).map_err(|e| e.to_string())?;
        let o1 = 2.0 * (0.0 - tk::v1_min(&mut rng, &g));
        let o2 = 6.0 * (0.0 - tk::v2_min(&mut rng, &h));
        let err = (d1 - o1).abs().max((d2 - o2).abs());
        worst = worst.max(err);
        ensure!(err <= 1e-6, "point {i}: delta_1 {d1} vs {o1}, delta_2 {d2} vs {o2}");
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "runtime {secs:.1}s exceeds 60s");
    Ok(format!("max abs error {worst:.2e}, {secs:.2}s"))
}

/// Quadratic with eigenvalues in [1, 2] under a fixed random rotation.
fn rotated_quad() -> CorpusEntry {
    let mut rng = tk::rng::seeded(202);
    let q = tk::random_orthogonal(&mut rng, 4);
    corpus::quad_sc(tk::with_spectrum(&q, &[1.0, 1.3, 1.7, 2.0])).expect("spd")
}

fn rg_run(entry: &CorpusEntry) -> Result<(Trajectory, f64), String> {
    let obj = &entry.objective;
    let l1 = 2.0 * obj.constants.l1.unwrap();
    let cfg = AlgoConfig::new(Algo::Rg).with_l1(l1).with_max_iters(200).with_eps_f(1e-300);
    let x0 = DVector::from_element(obj.dim(), 1.0);
    let traj = run(obj, &cfg, &entry.recommended, &x0).map_err(|e| e.to_string())?;
    let pts: Vec<DVector<f64>> = traj.records.iter().map(|r| DVector::from_vec(r.x.clone())).collect();
    let kappa = obj.estimate_kappa(0.0, 2.0, &pts).map_err(|e| e.to_string())?;
    Ok((traj, kappa))
}

fn c2_rg_exactness() -> Outcome {
    let entry = rotated_quad();
    let (traj, kappa) = rg_run(&entry)?;
    ensure!(traj.records.len() == 201, "expected 200 iterations, got {}", traj.records.len() - 1);
    let opts = VerifyOptions {
        kappa: KappaSource::Explicit(kappa),
        ..VerifyOptions::default()
    };
    let rep = verify_run(&traj, &opts).map_err(|e| e.to_string())?;
    let l1 = traj.config.l1.unwrap();
    let c = &rep.constants[0];
    ensure!(c.class == AlgoClass::Grad && c.zeta == 2.0 * l1 && c.m == 1, "unexpected constants {c:?}");
    ensure!(
        rep.per_iteration_checks.iter().all(|c| c.region == Region::R1_2 && c.satisfied == Some(true)),
        "a ratio check failed or left R1_2"
    );
    ensure!(rep.decrease_checks.len() == 200, "decrease checks: {}", rep.decrease_checks.len());
    ensure!(rep.violations.is_empty(), "violations: {:?}", rep.violations);
    let worst = rep
        .per_iteration_checks
        .iter()
        .map(|c| c.observed_ratio / c.predicted.ratio_bound)
        .fold(0.0, f64::max);
    Ok(format!(
        "kappa {kappa:.4}, zeta {:.1}, {} ratio and {} decrease checks, worst observed/bound {worst:.3}",
        c.zeta,
        rep.per_iteration_checks.len(),
        rep.decrease_checks.len()
    ))
}

fn c3_complexity_count() -> Outcome {
    let entry = rotated_quad();
    let (traj, kappa) = rg_run(&entry)?;
    let zeta = 2.0 * traj.config.l1.unwrap();
    let xi = 1.0 - kappa / zeta;
    let df0 = traj.records[0].f;
    let bound = linear_phase_iterations(1, xi, df0, 1e-8);
    let oracle = ((df0 / 1e-8).ln() / -xi.ln()).ceil() as u64;
    ensure!(bound == oracle, "bound helper {bound} vs direct {oracle}");
    let observed = count_kf(&traj, 1e-8).map_err(|e| e.to_string())?;
    ensure!(observed as u64 <= bound, "|K_f| = {observed} > {bound}");
    Ok(format!("|K_f(1e-8)| = {observed} <= {bound}"))
}

fn tr_instance<R: Rng>(rng: &mut R, i: usize) -> (DVector<f64>, DMatrix<f64>, f64, bool) {
    let n = 1 + i % 5;
    let delta = rng.random_range(0.1..3.0);
    if i % 4 == 1 && n > 1 {
        // hard case: g orthogonal to the leftmost eigenvector, shifted step inside
        let q = tk::random_orthogonal(rng, n);
        let mut eigs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..2.0)).collect();
        eigs[0] = -1.5 - rng.random::<f64>();
        let mut c = DVector::<f64>::zeros(n);
        for j in 1..n {
            c[j] = rng.random_range(-1.0..1.0);
        }
        let shift: Vec<f64> = (1..n).map(|j| eigs[j] - eigs[0]).collect();
        let low = (1..n).map(|j| (c[j] / shift[j - 1]).powi(2)).sum::<f64>().sqrt();
        if low > 0.0 {
            c *= 0.5 * delta / low;
        }
        let h = tk::with_spectrum(&q, &eigs);
        (&q * c, h, delta, true)
    } else {
        let h = tk::random_symmetric(rng, n, 1.0);
        let scale = [1e-3, 0.1, 1.0, 10.0][i % 4];
        (tk::random_vector(rng, n, scale), h, delta, false)
    }
}

fn c4_tr_solver() -> Outcome {
    let start = Instant::now();
    let mut rng = tk::rng::seeded(404);
    let mut hard = 0;
    let mut flagged = 0;
    let mut worst_kkt: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for i in 0..1000 {
        let (g, h, delta, constructed) = tr_instance(&mut rng, i);
        hard += constructed as usize;
        let sol = solve_tr(&g, &h, delta).map_err(|e| format!("instance {i}: {e}"))?;
        flagged += (constructed && sol.hard_case) as usize;
        let mu = sol.multiplier;
        let shifted = &h + DMatrix::identity(g.len(), g.len()) * mu;
        let kkt = (&shifted * &sol.s + &g).norm().max(mu * (delta - sol.s.norm()).abs());
        ensure!(kkt <= 1e-8, "instance {i}: KKT residual {kkt:e}");
        ensure!(sol.s.norm() <= delta * (1.0 + 1e-10), "instance {i}: step outside the ball");
        ensure!(tk::bisection_min_eigenvalue(&shifted) >= -1e-8, "instance {i}: H + mu I indefinite");
        let value = tk::quadratic_model(&g, &h, &sol.s);
        let oracle = tk::tr_dual_value(&g, &h, delta);
        let gap = (value - oracle).abs();
        ensure!(gap <= 1e-6, "instance {i}: model {value} vs oracle {oracle}");
        worst_kkt = worst_kkt.max(kkt);
        worst_gap = worst_gap.max(gap);
    }
    ensure!(hard >= 50, "only {hard} hard-case instances");
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 120.0, "runtime {secs:.1}s exceeds 120s");
    Ok(format!(
        "{hard} constructed hard cases ({flagged} flagged), max KKT {worst_kkt:.1e}, max value gap {worst_gap:.1e}, {secs:.2}s"
    ))
}

fn c5_cubic_solver() -> Outcome {
    let mut rng = tk::rng::seeded(505);
    let mut worst_kkt: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for i in 0..1000 {
        let n = 1 + i % 5;
        let h = tk::random_symmetric(&mut rng, n, 1.0);
        let sigma = rng.random_range(0.1..3.0);
        let g = match i % 7 {
            0 => DVector::zeros(n),
            1 => {
                // exactly orthogonal to the leftmost eigenvector
                let (_, vecs) = tk::jacobi_eigen(&h);
                let v = vecs.column(0).clone_owned();
                let r = tk::random_vector(&mut rng, n, 1e-2);
                &r - &v * v.dot(&r)
            }
            k => tk::random_vector(&mut rng, n, [1e-3, 0.1, 1.0, 5.0, 20.0][k - 2]),
        };
        let sol = solve_cubic(&g, &h, sigma).map_err(|e| format!("instance {i}: {e}"))?;
        let shift = sigma * sol.s.norm();
        let kkt = (&h * &sol.s + &sol.s * shift + &g).norm();
        ensure!(kkt <= 1e-8, "instance {i}: residual {kkt:e}");
        let curv = tk::bisection_min_eigenvalue(&h) + shift;
        ensure!(curv >= -1e-10, "instance {i}: lambda(H) + sigma||s|| = {curv:e}");
        let value = tk::cubic_model(&g, &h, sigma, &sol.s);
        let oracle = tk::cubic_multistart_min(&mut rng, &g, &h, sigma);
        let gap = (value - oracle).abs();
        ensure!(gap <= 1e-6, "instance {i}: model {value} vs oracle {oracle}");
        worst_kkt = worst_kkt.max(kkt);
        worst_gap = worst_gap.max(gap);
    }
    Ok(format!("max residual {worst_kkt:.1e}, max value gap {worst_gap:.1e}"))
}

/// Label from a scan over the exponent grid `1, 1.001, ..., top`.
fn brute_force_label(delta_f: f64, grad_norm: f64, lambda_minus: f64, kappa: f64) -> Region {
    if delta_f < 0.0 {
        return Region::BelowRef;
    }
    let c = kappa * delta_f;
    let holds = |base: f64, top: u32| (0..=(top as usize - 1) * 1000).any(|i| base.powf(1.0 + i as f64 * 1e-3) >= c);
    if holds(grad_norm, 2) {
        return if grad_norm.powi(2) >= c { Region::R1_2 } else { Region::R1_1 };
    }
    if holds(lambda_minus, 3) {
        return if lambda_minus.powi(3) >= c {
            Region::R2_3
        } else if lambda_minus.powi(2) >= c {
            Region::R2_2
        } else {
            Region::R2_1
        };
    }
    Region::Outside
}

fn c6_region_classifier() -> Outcome {
    let mut rng = tk::rng::seeded(606);
    let mut summary = Vec::new();
    for entry in corpus::all() {
        let obj = &entry.objective;
        let params = entry.recommended;
        let dom = &obj.scan_domain;
        let mut seen = std::collections::BTreeSet::new();
        for i in 0..1000 {
            let x = DVector::from_fn(obj.dim(), |j, _| rng.random_range(dom.lower[j]..=dom.upper[j]));
            let e = obj.evaluate(&x, 2).map_err(|e| e.to_string())?;
            let lm = (-tk::bisection_min_eigenvalue(e.h.as_ref().unwrap())).max(0.0);
            let expect = brute_force_label(e.f - params.f_ref, e.g.as_ref().unwrap().norm(), lm, params.kappa);
            let got = classify(obj, &x, &params).map_err(|e| e.to_string())?.region;
            ensure!(got == expect, "{} point {i} {x:?}: classifier {got}, brute force {expect}", obj.id());
            seen.insert(got);
        }
        let res = if obj.dim() == 1 { 601 } else { 41 };
        let map = region_scan(obj, res, &params).map_err(|e| e.to_string())?;
        for lab in &map.labels {
            let w = &lab.witness;
            let c = params.kappa * w.delta_f;
            let in_r1 = w.delta_f >= 0.0 && w.grad_norm.max(w.grad_norm.powi(2)) >= c;
            ensure!(lab.region.in_r1() == in_r1, "{}: R1 membership mismatch", obj.id());
            ensure!(!(lab.region.in_r1() && lab.region.in_r2()), "{}: overlapping labels", obj.id());
            if lab.region.in_r2() {
                ensure!(!in_r1, "{}: R2 point satisfies the R1 test", obj.id());
            }
        }
        summary.push(format!("{}:{}", obj.id(), seen.len()));
    }
    Ok(format!("labels seen per entry {}", summary.join(" ")))
}

fn c7_figure() -> Outcome {
    let entry = corpus::fig1();
    let obj = &entry.objective;
    let params = RegionParams::new(0.05, -0.5);
    ensure!(obj.scan_domain.lower[0] == -2.0 && obj.scan_domain.upper[0] == 4.0, "scan domain");
    let map = region_scan(obj, 601, &params).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = map.points.iter().map(|p| p[0]).collect();
    let outside: Vec<usize> = (0..xs.len()).filter(|&i| map.labels[i].region == Region::Outside).collect();
    ensure!(!outside.is_empty(), "no Outside points");
    ensure!(
        outside.windows(2).all(|w| w[1] == w[0] + 1),
        "Outside set is not a single interval"
    );
    let (lo, hi) = (xs[outside[0]], xs[*outside.last().unwrap()]);
    ensure!(lo > 1.0 && hi < 4.0, "Outside interval [{lo}, {hi}] not inside (1, 4)");
    let at2 = xs.iter().position(|x| (x - 2.0).abs() < 1e-12).unwrap();
    ensure!(map.labels[at2].region == Region::Outside, "x = 2 is {}", map.labels[at2].region);
    for x in [-1.0, 0.0, 0.5, 3.5] {
        let r = classify(obj, &DVector::from_element(1, x), &params)
            .map_err(|e| e.to_string())?
            .region;
        ensure!(r.in_r1(), "x = {x} is {r}");
    }
    Ok(format!("Outside = [{lo:.3}, {hi:.3}] ({} nodes)", outside.len()))
}

fn c8_saddle() -> Outcome {
    let entry = corpus::saddle2d();
    let obj = &entry.objective;
    let x0 = DVector::zeros(2);
    let p = entry.recommended;
    let trg = run(obj, &AlgoConfig::new(Algo::TrG).with_nu0(1.0), &p, &x0).map_err(|e| e.to_string())?;
    ensure!(
        trg.termination_reason == TerminationReason::Stalled && trg.records.len() == 1,
        "TR-G: {} after {} records",
        trg.termination_reason,
        trg.records.len()
    );
    ensure!(trg.records[0].step_norm == 0.0, "TR-G step norm {}", trg.records[0].step_norm);
    let mut out = vec!["TR-G stalled at k = 0".to_string()];
    let cases = [
        (AlgoConfig::new(Algo::TrH).with_nu0(1.0), 4.0, 4.0),
        (AlgoConfig::new(Algo::Rn).with_l2(1.0), 4.0, 8.0 / 6.0),
        (AlgoConfig::new(Algo::RnA).with_nu0(1.0), 4.0, 8.0 / 6.0),
    ];
    for (cfg, f_drop, model) in cases {
        let t = run(obj, &cfg.clone().with_max_iters(1), &p, &x0).map_err(|e| e.to_string())?;
        let r0 = &t.records[0];
        ensure!(r0.accepted, "{}: first step rejected", cfg.algo);
        let drop = r0.f - t.records[1].f;
        ensure!(drop >= 1.0 - 1e-8, "{}: decrease {drop}", cfg.algo);
        ensure!((drop - f_drop).abs() <= 1e-8, "{}: decrease {drop} vs {f_drop}", cfg.algo);
        ensure!(
            (r0.model_decrease - model).abs() <= 1e-8,
            "{}: model decrease {} vs {model}",
            cfg.algo,
            r0.model_decrease
        );
        out.push(format!("{} drop {drop}", cfg.algo));
    }
    Ok(out.join(", "))
}

/// Config for `algo` on `obj`, or `None` when the pairing is inadmissible.
fn admissible_config(algo: Algo, obj: &Objective) -> Option<AlgoConfig> {
    let mut cfg = AlgoConfig::new(algo).fill_from_constants(obj);
    if cfg.l2.is_none() {
        cfg.l2 = Some(1.0);
    }
    cfg.validate_for(obj).ok()?;
    Some(cfg)
}

fn c9_envelope() -> Outcome {
    let mut out = Vec::new();
    for id in ["pl_noncvx", "quad_sc:1,2"] {
        let entry = corpus::get(id).map_err(|e| e.to_string())?;
        let obj = &entry.objective;
        let x0 = DVector::from_vec(entry.default_x0.clone());
        for algo in Algo::ALL {
            let Some(cfg) = admissible_config(algo, obj) else {
                continue;
            };
            let cfg = cfg.with_eps_f(1e-10);
            let traj = run(obj, &cfg, &entry.recommended, &x0).map_err(|e| e.to_string())?;
            let opts = VerifyOptions::default();
            let rep = verify_run(&traj, &opts).map_err(|e| e.to_string())?;
            ensure!(rep.violations.is_empty(), "{id} {algo}: {:?}", rep.violations);
            let env = envelope_compare(&traj, &opts).map_err(|e| e.to_string())?;
            let m = rep.constants.first().map_or(1, |c| c.m);
            for p in env.iter().filter(|p| p.k % m == 0) {
                ensure!(
                    p.delta_f_observed <= p.delta_f_envelope + 1e-10,
                    "{id} {algo} k = {}: observed {} above envelope {}",
                    p.k,
                    p.delta_f_observed,
                    p.delta_f_envelope
                );
            }
            out.push(format!("{id}/{algo}: m={m} checks={}", rep.coverage.applicable));
        }
    }
    Ok(out.join(", "))
}

/// Decrease constant of cubic regularization on a quadratic: the model
/// minimizer gives `f_k - f_{k+1} >= l2 ||s||^3 / 2` and
/// `||g_{k+1}|| = l2 ||s||^2`, so `zeta = 2 sqrt(l2)`.
fn rn_quadratic_zeta(l2: f64) -> f64 {
    2.0 * l2.sqrt()
}

fn c10_superlinear() -> Outcome {
    let entry = corpus::get("quad_sc:1,2").map_err(|e| e.to_string())?;
    let obj = &entry.objective;
    let l2 = 10.0;
    let cfg = AlgoConfig::new(Algo::Rn).with_l2(l2).with_eps_f(1e-12);
    let x0 = DVector::from_vec(entry.default_x0.clone());
    let traj = run(obj, &cfg, &entry.recommended, &x0).map_err(|e| e.to_string())?;
    ensure!(traj.termination_reason == TerminationReason::EpsFMet, "terminated {}", traj.termination_reason);
    let cal = harness::calibrate_zeta_m(&traj, AlgoClass::Newton).map_err(|e| e.to_string())?;
    let doc = rn_quadratic_zeta(l2);
    ensure!(cal.zeta_hat <= doc * (1.0 + 1e-9), "zeta_hat {} exceeds {doc}", cal.zeta_hat);
    let kappa = entry.recommended.kappa;
    let omega = newton_threshold(kappa, cal.zeta_hat);
    let df: Vec<f64> = traj.records.iter().map(|r| r.f).collect();
    let first = df.iter().position(|d| *d < omega).ok_or("never entered the superlinear regime")?;
    let ratios: Vec<f64> = (first..df.len() - 1).filter(|&k| df[k] > 0.0).map(|k| df[k + 1] / df[k]).collect();
    ensure!(ratios.len() >= 2, "tail too short: {} ratios", ratios.len());
    ensure!(ratios.windows(2).all(|w| w[1] < w[0]), "ratios not decreasing: {ratios:?}");
    let eps = 1e-12;
    let tail = df[first..].iter().filter(|d| **d > eps).count() as u64;
    let bound = superlinear_tail_iterations(cal.m_hat, omega, df[first], eps);
    ensure!(tail <= bound, "tail count {tail} > bound {bound}");
    let opts = VerifyOptions {
        kappa: KappaSource::Recommended,
        ..VerifyOptions::default()
    };
    let rep = verify_run(&traj, &opts).map_err(|e| e.to_string())?;
    ensure!(rep.violations.is_empty(), "violations: {:?}", rep.violations);
    Ok(format!(
        "zeta_hat {:.3} <= {doc:.3}, omega {omega:.2e}, ratios {ratios:?}, tail {tail} <= {bound}",
        cal.zeta_hat
    ))
}

fn c11_contemporary() -> Outcome {
    let entry = rotated_quad();
    let (traj, kappa) = rg_run(&entry)?;
    let eps_1 = 1e-4;
    let opts = VerifyOptions {
        kappa: KappaSource::Explicit(kappa),
        eps_1: Some(eps_1),
        ..VerifyOptions::default()
    };
    let rep = verify_run(&traj, &opts).map_err(|e| e.to_string())?;
    let c = &rep.contemporary;
    let l1 = traj.config.l1.unwrap();
    let explicit = 2.0 * l1 * c.delta_f0 / (eps_1 * eps_1);
    ensure!(c.rg_explicit_k1 == Some(explicit), "explicit bound {:?} vs {explicit}", c.rg_explicit_k1);
    ensure!((c.k1_observed as f64) <= explicit, "|K_1| = {} > {explicit}", c.k1_observed);
    let in_kf = traj
        .records
        .iter()
        .filter(|r| r.grad_norm > eps_1)
        .all(|r| r.f - 0.0 > eps_1 * eps_1 / (2.0 * l1));
    ensure!(in_kf, "K_1(eps_1) not inside K_f(eps_1^2 / (2 l1))");
    let rc = c.rc_bound.ok_or("no region-based bound in the report")?;
    let zeta = 2.0 * l1;
    let direct = linear_phase_iterations(1, 1.0 - kappa / zeta, c.delta_f0, 1e-8);
    ensure!(rc == direct, "report rc bound {rc} vs criterion-3 bound {direct}");
    ensure!((rc as f64) < explicit, "rc bound {rc} not below {explicit}");
    Ok(format!("|K_1| = {} <= {explicit:.3e}; rc bound {rc}", c.k1_observed))
}

fn c12_determinism() -> Outcome {
    let mut specs = Vec::new();
    for entry in corpus::all() {
        for algo in Algo::ALL {
            if let Some(cfg) = admissible_config(algo, &entry.objective) {
                specs.push((entry.clone(), cfg.with_max_iters(300)));
            }
        }
    }
    let once = |(entry, cfg): &(CorpusEntry, AlgoConfig)| -> Result<String, String> {
        let x0 = DVector::from_vec(entry.default_x0.clone());
        run(&entry.objective, cfg, &entry.recommended, &x0)
            .map(|t| t.to_csv())
            .map_err(|e| format!("{} {}: {e}", entry.objective.id(), cfg.algo))
    };
    let sequential: Vec<String> = specs.iter().map(once).collect::<Result<_, _>>()?;
    let parallel: Vec<String> = specs.par_iter().map(once).collect::<Result<_, _>>()?;
    for (i, (a, b)) in sequential.iter().zip(&parallel).enumerate() {
        ensure!(a.as_bytes() == b.as_bytes(), "run spec {i} differs between executions");
    }
    Ok(format!("{} run specs byte-identical", specs.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("closed-form Delta_p vs multi-start model oracle", c1_delta_p_oracle),
        ("RG decrease and linear rate with zeta = 2 l1", c2_rg_exactness),
        ("RG |K_f(1e-8)| within the linear-phase count", c3_complexity_count),
        ("trust-region solver optimality", c4_tr_solver),
        ("cubic solver optimality", c5_cubic_solver),
        ("region classifier vs exponent-grid brute force", c6_region_classifier),
        ("fig1 region scan", c7_figure),
        ("behaviour at the saddle of saddle2d", c8_saddle),
        ("calibrated verification and envelope", c9_envelope),
        ("superlinear regime of RN", c10_superlinear),
        ("contemporary bound comparison", c11_contemporary),
        ("determinism of trajectory CSVs", c12_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS criterion {:>2}: {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name} ({why})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
