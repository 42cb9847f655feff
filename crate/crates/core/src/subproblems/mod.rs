//! Dense subproblem solvers.

pub(crate) mod cubic;
mod eigen;
pub(crate) mod trust_region;

pub use cubic::{solve_cubic, CubicSolution};
pub use eigen::{leftmost_eig, leftmost_eig_with_limit, LeftmostEig, DENSE_LIMIT};
pub use trust_region::{solve_tr, TrSolution};

pub(crate) use eigen::Spectrum;

/// Relative threshold below which the gradient component on the leftmost
/// eigenspace counts as zero.
pub const HARD_CASE_TOL: f64 = 1e-12;

pub(crate) const MAX_SECULAR_ITERS: usize = 100;

/// Safeguarded Newton iteration for the root of an increasing concave
/// function on `(lo, hi]`, with `phi(hi) >= 0`. `eval` returns
/// `(phi, phi')`, or `None` when `mu` is at or below the pole.
pub(crate) fn secular_root<F>(lo: f64, hi: f64, eval: F) -> Option<f64>
where
    F: Fn(f64) -> Option<(f64, f64)>,
{
    let (mut a, mut b) = (lo, hi);
    let mut mu = hi;
    for _ in 0..MAX_SECULAR_ITERS {
        let Some((phi, dphi)) = eval(mu) else {
            a = a.max(mu);
            mu = 0.5 * (a + b);
            continue;
        };
        if phi == 0.0 {
            return Some(mu);
        }
        if phi < 0.0 {
            a = mu;
        } else {
            b = mu;
        }
        if b - a <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
            return Some(b);
        }
        let next = mu - phi / dphi;
        mu = if dphi > 0.0 && next > a && next < b {
            if (next - mu).abs() <= 2.0 * f64::EPSILON * mu.abs().max(1e-300) {
                return Some(next);
            }
            next
        } else {
            0.5 * (a + b)
        };
    }
    None
}
