//! Independent numerical oracles for the test suites.
//!
//! Nothing here calls into `rca-core`. Eigenvalues come from Householder
//! tridiagonalization with Sturm-sequence bisection or from cyclic Jacobi
//! rotations, and model minima from duality, grids or multi-start BFGS.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub mod rng {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub fn seeded(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }
}

/// Standard normal sample (Box-Muller).
pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| scale * normal(rng))
}

/// Haar-ish random orthogonal matrix from Gram-Schmidt on Gaussian columns.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let mut q = DMatrix::<f64>::zeros(n, n);
    let mut j = 0;
    while j < n {
        let mut v = random_vector(rng, n, 1.0);
        for i in 0..j {
            let qi = q.column(i).clone_owned();
            v -= &qi * qi.dot(&v);
        }
        let nv = v.norm();
        if nv < 1e-8 {
            continue;
        }
        q.set_column(j, &(v / nv));
        j += 1;
    }
    q
}

/// `Q diag(eigs) Q^T`, symmetrized exactly.
pub fn with_spectrum(q: &DMatrix<f64>, eigs: &[f64]) -> DMatrix<f64> {
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(eigs));
    let h = q * d * q.transpose();
    (&h + h.transpose()) * 0.5
}

pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize, scale: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| scale * normal(rng));
    (&a + a.transpose()) * 0.5
}

/// Symmetric positive definite matrix with eigenvalues drawn from `[lo, hi]`.
pub fn random_spd<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let eigs: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    with_spectrum(&random_orthogonal(rng, n), &eigs)
}

fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Householder reduction to tridiagonal form; returns (diagonal, off-diagonal).
pub fn tridiagonalize(h: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = h.nrows();
    let mut a = h.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let alpha = -sign(x[0]) * x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = x.clone();
        v[0] -= alpha;
        let vn2: f64 = v.iter().map(|t| t * t).sum();
        if vn2 < 1e-300 {
            continue;
        }
        let m = n - k - 1;
        let mut p = DMatrix::<f64>::identity(n, n);
        for i in 0..m {
            for j in 0..m {
                p[(k + 1 + i, k + 1 + j)] -= 2.0 * v[i] * v[j] / vn2;
            }
        }
        a = &p * a * &p;
    }
    let d = (0..n).map(|i| a[(i, i)]).collect();
    let e = (0..n.saturating_sub(1)).map(|i| a[(i + 1, i)]).collect();
    (d, e)
}

/// Number of eigenvalues of the tridiagonal matrix below `mu`.
pub fn sturm_count(d: &[f64], e: &[f64], mu: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        q = d[i] - mu - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = -1e-300;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `j`-th smallest eigenvalue (0-based) by Sturm bisection.
pub fn bisection_eigenvalue(h: &DMatrix<f64>, j: usize) -> f64 {
    let (d, e) = tridiagonalize(h);
    let r: f64 = h.iter().map(|v| v.abs()).sum::<f64>() + 1.0;
    let (mut lo, mut hi) = (-r, r);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(&d, &e, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn bisection_min_eigenvalue(h: &DMatrix<f64>) -> f64 {
    bisection_eigenvalue(h, 0)
}

/// Cyclic Jacobi eigendecomposition; eigenvalues ascending with matching
/// eigenvector columns.
pub fn jacobi_eigen(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = h.nrows();
    let mut a = h.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-30 * (1.0 + a.norm_squared()) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = sign(theta) / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let vals = idx.iter().map(|&i| a[(i, i)]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| v[(r, idx[c])]);
    (vals, vecs)
}

pub fn quadratic_model(g: &DVector<f64>, h: &DMatrix<f64>, s: &DVector<f64>) -> f64 {
    g.dot(s) + 0.5 * s.dot(&(h * s))
}

pub fn cubic_model(g: &DVector<f64>, h: &DMatrix<f64>, sigma: f64, s: &DVector<f64>) -> f64 {
    quadratic_model(g, h, s) + sigma / 3.0 * s.norm().powi(3)
}

/// Maximizes a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..iters {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        }
    }
    let mut best = (lo, f(lo));
    for (x, v) in [(a, fa), (b, fb), (hi, f(hi))] {
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Optimal value of `min g^T s + s^T H s / 2` over `||s|| <= delta`, from
/// the concave dual `max_{mu >= max(0, -lambda_1)} -sum c_i^2/(2(lambda_i + mu)) - mu delta^2/2`
/// evaluated in a Jacobi eigenbasis.
pub fn tr_dual_value(g: &DVector<f64>, h: &DMatrix<f64>, delta: f64) -> f64 {
    let (vals, vecs) = jacobi_eigen(h);
    let c = vecs.transpose() * g;
    let lo = (-vals[0]).max(0.0);
    let dual = |mu: f64| {
        let mut s = 0.0;
        for (ci, li) in c.iter().zip(&vals) {
            let den = li + mu;
            if ci * ci == 0.0 {
                continue;
            }
            if den <= 0.0 {
                return f64::NEG_INFINITY;
            }
            s += ci * ci / den;
        }
        -0.5 * s - 0.5 * mu * delta * delta
    };
    let hi = lo + g.norm() / delta + 1.0;
    golden_max(dual, lo, hi, 300).1
}

/// Minimum of the quadratic model over a polar grid of the 2-D disk.
pub fn disk_grid_min(g: &DVector<f64>, h: &DMatrix<f64>, delta: f64, radial: usize, angular: usize) -> f64 {
    assert_eq!(g.len(), 2);
    let mut best = 0.0f64;
    for i in 1..=radial {
        let r = delta * i as f64 / radial as f64;
        for j in 0..angular {
            let t = std::f64::consts::TAU * j as f64 / angular as f64;
            let s = DVector::from_vec(vec![r * t.cos(), r * t.sin()]);
            best = best.min(quadratic_model(g, h, &s));
        }
    }
    best
}

/// BFGS with Armijo backtracking from `x0`.
pub fn bfgs(
    f: &dyn Fn(&DVector<f64>) -> f64,
    grad: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    x0: &DVector<f64>,
    max_iters: usize,
) -> (DVector<f64>, f64) {
    let n = x0.len();
    let mut x = x0.clone();
    let mut fx = f(&x);
    let mut g = grad(&x);
    let mut hinv = DMatrix::<f64>::identity(n, n);
    for _ in 0..max_iters {
        if g.norm() < 1e-13 {
            break;
        }
        let mut d = -(&hinv * &g);
        if d.dot(&g) >= 0.0 {
            hinv = DMatrix::identity(n, n);
            d = -g.clone();
        }
        let mut t = 1.0;
        let slope = d.dot(&g);
        let mut xn;
        let mut fxn;
        loop {
            xn = &x + &d * t;
            fxn = f(&xn);
            if fxn <= fx + 1e-4 * t * slope || t < 1e-20 {
                break;
            }
            t *= 0.5;
        }
        let gn = grad(&xn);
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        if sy > 1e-18 {
            let rho = 1.0 / sy;
            let i = DMatrix::<f64>::identity(n, n);
            let a = &i - &s * y.transpose() * rho;
            let b = &i - &y * s.transpose() * rho;
            hinv = &a * &hinv * &b + &s * s.transpose() * rho;
        }
        let done = (fx - fxn).abs() <= 1e-16 * (1.0 + fx.abs()) && s.norm() < 1e-14;
        x = xn;
        fx = fxn;
        g = gn;
        if done {
            break;
        }
    }
    (x, fx)
}

/// Best local minimum found by BFGS from every start.
pub fn multistart_min(
    f: &dyn Fn(&DVector<f64>) -> f64,
    grad: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    starts: &[DVector<f64>],
) -> (DVector<f64>, f64) {
    let mut best: Option<(DVector<f64>, f64)> = None;
    for s in starts {
        let (x, v) = bfgs(f, grad, s, 2000);
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((x, v));
        }
    }
    best.expect("at least one start")
}

/// Starts along +-coordinate axes at several radii plus random points.
pub fn standard_starts<R: Rng>(rng: &mut R, n: usize, radius: f64, random: usize) -> Vec<DVector<f64>> {
    let mut out = Vec::new();
    for scale in [0.25, 1.0, 2.0] {
        for i in 0..n {
            for sign in [-1.0, 1.0] {
                let mut e = DVector::zeros(n);
                e[i] = sign * scale * radius;
                out.push(e);
            }
        }
    }
    for _ in 0..random {
        out.push(random_vector(rng, n, radius));
    }
    out
}

/// Global minimum of the cubic model by multi-start BFGS.
pub fn cubic_multistart_min<R: Rng>(rng: &mut R, g: &DVector<f64>, h: &DMatrix<f64>, sigma: f64) -> f64 {
    let f = |s: &DVector<f64>| cubic_model(g, h, sigma, s);
    let grad = |s: &DVector<f64>| g + h * s + s * (sigma * s.norm());
    let hnorm: f64 = h.iter().map(|v| v.abs()).sum();
    let radius = (hnorm / sigma + (g.norm() / sigma).sqrt()).max(1e-3);
    let starts = standard_starts(rng, g.len(), radius, 12);
    multistart_min(&f, &grad, &starts).1.min(0.0)
}

/// `min_s v_1(s) = g^T s + ||s||^2 / 2` by multi-start BFGS.
pub fn v1_min<R: Rng>(rng: &mut R, g: &DVector<f64>) -> f64 {
    let f = |s: &DVector<f64>| g.dot(s) + 0.5 * s.norm_squared();
    let grad = |s: &DVector<f64>| g + s;
    let starts = standard_starts(rng, g.len(), g.norm().max(1.0), 4);
    multistart_min(&f, &grad, &starts).1.min(0.0)
}

/// `min_s v_2(s) = s^T H s / 2 + ||s||^3 / 3` by multi-start BFGS.
pub fn v2_min<R: Rng>(rng: &mut R, h: &DMatrix<f64>) -> f64 {
    let g = DVector::zeros(h.nrows());
    cubic_multistart_min(rng, &g, h, 1.0)
}

/// Root of a sign-changing function on `[lo, hi]` by bisection.
pub fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "root not bracketed");
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
