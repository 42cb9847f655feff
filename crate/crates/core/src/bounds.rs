//! Per-iteration rate templates and iteration-complexity bounds.
//!
//! A rate template bounds `Delta f_{k+m} / Delta f_k` given the region of the
//! iterate, the class of decrease inequality the method satisfies, and the
//! constants `kappa`, `zeta` and `m`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algorithms::Algo;
use crate::error::{Error, Result};
use crate::regions::Region;

/// Decrease inequality a method satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgoClass {
    /// `f_k - f_{k+m} >= ||g_k||^2 / zeta` on `R1`.
    Grad,
    /// `f_k - f_{k+m} >= ||g_{k+m}||^{3/2} / zeta` when `x_{k+m}` is in `R1`.
    Newton,
    /// `f_k - f_{k+m} >= lambda_-(H_k)^3 / zeta` on `R2`.
    Curvature,
    /// Order-`p` generalization.
    P(u8),
}

impl AlgoClass {
    /// Classes whose inequality the method is known to satisfy.
    pub fn for_algo(algo: Algo) -> Vec<AlgoClass> {
        match algo {
            Algo::Rg | Algo::RgA | Algo::TrG => vec![AlgoClass::Grad],
            Algo::TrH => vec![AlgoClass::Grad, AlgoClass::Curvature],
            Algo::Rn | Algo::RnA => vec![AlgoClass::Newton, AlgoClass::Curvature],
        }
    }

    /// The class used on `R1` iterates.
    pub fn first_order_class(algo: Algo) -> AlgoClass {
        match algo {
            Algo::Rn | Algo::RnA => AlgoClass::Newton,
            _ => AlgoClass::Grad,
        }
    }
}

impl fmt::Display for AlgoClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgoClass::Grad => f.write_str("grad"),
            AlgoClass::Newton => f.write_str("newton"),
            AlgoClass::Curvature => f.write_str("curvature"),
            AlgoClass::P(p) => write!(f, "p{p}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateContext {
    pub algo_class: AlgoClass,
    pub kappa: f64,
    pub zeta: f64,
    pub m: usize,
    /// `f_0 - f_ref`.
    pub f0_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Linear,
    Sublinear,
    Superlinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    pub ratio_bound: f64,
    pub regime: Option<Regime>,
    pub applicable: bool,
    pub reason: Option<String>,
    pub note: Option<String>,
}

impl RateBound {
    fn ok(ratio_bound: f64, regime: Regime) -> Self {
        let mut b = Self {
            ratio_bound: if ratio_bound > -1e-12 { ratio_bound.max(0.0) } else { ratio_bound },
            regime: Some(regime),
            applicable: true,
            reason: None,
            note: None,
        };
        if !(b.ratio_bound >= 0.0 && ratio_bound <= 1.0) {
            b.applicable = false;
            b.reason = Some(format!("ratio {ratio_bound} outside [0, 1]; inputs inconsistent with the region"));
        }
        b
    }

    pub fn inapplicable(reason: impl Into<String>) -> Self {
        Self {
            ratio_bound: 1.0,
            regime: None,
            applicable: false,
            reason: Some(reason.into()),
            note: None,
        }
    }
}

/// Region argument of [`rate_template`]: a label from the `R1`/`R2`
/// classifier or a generalized `(p, q)` index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateRegion {
    Label(Region),
    Indexed { p: u8, q: u8 },
}

impl From<Region> for RateRegion {
    fn from(r: Region) -> Self {
        RateRegion::Label(r)
    }
}

/// `kappa^3 / zeta^4`, below which the Newton-class rate on `R1_2` is
/// superlinear.
pub fn newton_threshold(kappa: f64, zeta: f64) -> f64 {
    kappa.powi(3) / zeta.powi(4)
}

fn newton_linear_factor(kappa: f64, zeta: f64, f0_gap: f64) -> f64 {
    let r = f0_gap.powf(0.25);
    r / (kappa.powf(0.75) / zeta + r)
}

/// Linear contraction constant `xi` for a method on the gradient-dominated
/// (degree 2) part of the domain.
pub fn linear_xi(algo: Algo, kappa: f64, zeta: f64, f0_gap: f64) -> f64 {
    let base = 1.0 - kappa / zeta;
    match algo {
        Algo::Rn | Algo::RnA => base.max(newton_linear_factor(kappa, zeta, f0_gap)),
        _ => base,
    }
}

pub fn rate_template(region: impl Into<RateRegion>, ctx: &RateContext, delta_f_k: f64) -> RateBound {
    let region = region.into();
    let (k, z, d) = (ctx.kappa, ctx.zeta, delta_f_k);
    if !(k > 0.0 && z > 0.0) || ctx.m == 0 {
        return RateBound::inapplicable("kappa, zeta and m must be positive");
    }
    if !(d >= 0.0) {
        return RateBound::inapplicable("delta_f_k must be nonnegative");
    }
    if matches!(ctx.algo_class, AlgoClass::Grad | AlgoClass::Curvature) && z < k {
        return RateBound::inapplicable("zeta < kappa");
    }
    match (ctx.algo_class, region) {
        (AlgoClass::Grad, RateRegion::Label(r)) => match r {
            Region::R1_2 => RateBound::ok(1.0 - k / z, Regime::Linear),
            Region::R1_1 => RateBound::ok(1.0 - k * k * d / z, Regime::Sublinear),
            r if r.in_r2() => {
                RateBound::inapplicable("gradient-based decrease gives no guarantee in the curvature region")
            }
            r => RateBound::inapplicable(format!("no template for {r}")),
        },
        (AlgoClass::Newton, RateRegion::Label(r)) => match r {
            Region::R1_2 => newton_r1_2(k, z, d, ctx.f0_gap),
            Region::R1_1 => newton_r1_1(k, z, d),
            r if r.in_r2() => RateBound::inapplicable("the Newton-class template covers R1 only"),
            r => RateBound::inapplicable(format!("no template for {r}")),
        },
        (AlgoClass::Curvature, RateRegion::Label(r)) => match r {
            Region::R2_3 => curvature(3, k, z, d),
            Region::R2_2 => curvature(2, k, z, d),
            Region::R2_1 => curvature(1, k, z, d),
            r if r.in_r1() => RateBound::inapplicable("the curvature template covers R2 only"),
            r => RateBound::inapplicable(format!("no template for {r}")),
        },
        (AlgoClass::Curvature, RateRegion::Indexed { p: 2, q }) if (1..=3).contains(&q) => curvature(q, k, z, d),
        (AlgoClass::P(p), RateRegion::Indexed { p: rp, q }) => {
            if p != rp || q == 0 || q > p + 1 {
                return RateBound::inapplicable(format!("index (p = {rp}, q = {q}) does not match order {p}"));
            }
            let mut b = pclass_indexed(p, q, k, z, d);
            if p == 1 {
                b.note = Some(
                    "order-1 measure is ||g||^2, so the hypothesis uses ||g||^4 rather than the ||g||^2 of the \
                     gradient-class inequality; value reported literally"
                        .into(),
                );
                b.reason = Some("order-1 generalized template does not coincide with the gradient class".into());
                b.applicable = false;
            }
            b
        }
        (AlgoClass::P(p), RateRegion::Label(r)) if r.in_r1() => {
            if p < 2 {
                return RateBound::inapplicable("the order-p R1 templates need p >= 2");
            }
            pclass_r1(p, r, k, z, d, ctx.f0_gap)
        }
        (c, r) => RateBound::inapplicable(format!("no template for class {c} on {r:?}")),
    }
}

fn newton_r1_2(k: f64, z: f64, d: f64, f0_gap: f64) -> RateBound {
    if d >= newton_threshold(k, z) {
        RateBound::ok(newton_linear_factor(k, z, f0_gap), Regime::Linear)
    } else {
        RateBound::ok((z.powi(4) * d / k.powi(3)).cbrt(), Regime::Superlinear)
    }
}

fn newton_r1_1(k: f64, z: f64, d: f64) -> RateBound {
    if d >= z * z / k.powi(3) {
        RateBound::ok((z * z / (k.powi(3) * d)).cbrt(), Regime::Superlinear)
    } else {
        let c = k.powf(1.5) / z * ((2f64.sqrt() - 1.0) / 2f64.sqrt());
        RateBound::ok((1.0 / (1.0 + c * d.sqrt())).powi(2), Regime::Sublinear)
    }
}

fn curvature(q: u8, k: f64, z: f64, d: f64) -> RateBound {
    match q {
        3 => RateBound::ok(1.0 - k / z, Regime::Linear),
        2 => RateBound::ok(1.0 - k.powf(1.5) * d.sqrt() / z, Regime::Sublinear),
        _ => RateBound::ok(1.0 - k.powi(3) * d * d / z, Regime::Sublinear),
    }
}

fn pclass_indexed(p: u8, q: u8, k: f64, z: f64, d: f64) -> RateBound {
    if q == p + 1 {
        return RateBound::ok(1.0 - k / z, Regime::Linear);
    }
    let (p1, qf) = (f64::from(p) + 1.0, f64::from(q));
    RateBound::ok(1.0 - k.powf(p1 / qf) * d.powf((p1 - qf) / qf) / z, Regime::Sublinear)
}

fn pclass_r1(p: u8, r: Region, k: f64, z: f64, d: f64, f0_gap: f64) -> RateBound {
    let pf = f64::from(p);
    if r == Region::R1_2 {
        let omega = (k.powf(pf + 1.0) / z.powf(2.0 * pf)).powf(1.0 / (pf - 1.0));
        if d >= omega {
            let a = f0_gap.powf((pf - 1.0) / (2.0 * pf));
            RateBound::ok(a / (k.powf((pf + 1.0) / (2.0 * pf)) / z + a), Regime::Linear)
        } else {
            RateBound::ok((d / omega).powf((pf - 1.0) / (pf + 1.0)), Regime::Superlinear)
        }
    } else {
        let t = z.powf(pf) / k.powf(pf + 1.0);
        if d >= t {
            RateBound::ok((t / d).powf(1.0 / (pf + 1.0)), Regime::Superlinear)
        } else {
            let r = 2f64.powf(1.0 / pf);
            let c = k.powf((pf + 1.0) / pf) / z * ((r - 1.0) / r);
            RateBound::ok((1.0 / (1.0 + c * d.powf(1.0 / pf))).powf(pf), Regime::Sublinear)
        }
    }
}

/// Function classes with complete complexity results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionClass {
    /// (g,H)-dominated of degree (2,3).
    #[serde(rename = "gH_23")]
    GH23,
    /// (g,H)-dominated of degree (1,1).
    #[serde(rename = "gH_11")]
    GH11,
    /// Gradient-dominated of degree 2.
    #[serde(rename = "gd_2")]
    Gd2,
    /// Gradient-dominated of degree 1.
    #[serde(rename = "gd_1")]
    Gd1,
}

impl std::str::FromStr for FunctionClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gH_23" => Ok(Self::GH23),
            "gH_11" => Ok(Self::GH11),
            "gd_2" => Ok(Self::Gd2),
            "gd_1" => Ok(Self::Gd1),
            _ => Err(Error::InvalidArgument(format!("unknown function class `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub regime: Regime,
    /// Optimality gap at the start of the phase.
    pub from_gap: f64,
    /// Gap guaranteed at the end of the phase.
    pub to_gap: f64,
    pub iterations: u64,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityBound {
    pub function_class: FunctionClass,
    pub algo: Algo,
    /// Explicit count with hidden constants set to 1 and `m` multiplied in.
    pub iteration_bound: u64,
    /// The corresponding order expression.
    pub order_expression: String,
    pub phases: Vec<Phase>,
    pub form: String,
}

/// `ceil(m log(from/to) / -log(xi))`, zero when `from <= to`.
pub fn linear_phase_iterations(m: usize, xi: f64, from: f64, to: f64) -> u64 {
    if from <= to {
        return 0;
    }
    if xi <= 0.0 {
        return m as u64;
    }
    ceil_u64(m as f64 * (from / to).ln() / -xi.ln())
}

/// Double-log count for the superlinear phase: blocks of `m` iterations
/// needed to go from gap `start < omega` to `eps`.
pub fn superlinear_tail_iterations(m: usize, omega: f64, start: f64, eps: f64) -> u64 {
    if start <= eps {
        return 0;
    }
    let ratio = (omega / eps).ln() / (omega / start).ln();
    if ratio <= 1.0 {
        return 0;
    }
    ceil_u64(m as f64 * ratio.ln() / (4.0f64 / 3.0).ln())
}

fn ceil_u64(v: f64) -> u64 {
    if v.is_nan() || v <= 0.0 {
        0
    } else if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v.ceil() as u64
    }
}

pub fn complexity_bound(
    function_class: FunctionClass,
    algo: Algo,
    ctx: &RateContext,
    delta_f0: f64,
    eps_f: f64,
) -> Result<ComplexityBound> {
    let (k, z, m) = (ctx.kappa, ctx.zeta, ctx.m);
    if !(k > 0.0 && z > 0.0 && m > 0) {
        return Err(Error::InvalidArgument("kappa, zeta and m must be positive".into()));
    }
    if !(eps_f > 0.0) || !(delta_f0 >= 0.0) {
        return Err(Error::InvalidArgument("need eps_f > 0 and delta_f0 >= 0".into()));
    }
    let gh = matches!(function_class, FunctionClass::GH23 | FunctionClass::GH11);
    if gh && !matches!(algo, Algo::TrH | Algo::Rn | Algo::RnA) {
        return Err(Error::Inadmissible(format!(
            "{algo} can take zero-norm steps at saddle points, so no bound holds on {function_class:?}"
        )));
    }
    let newton = matches!(algo, Algo::Rn | Algo::RnA);
    let xi = linear_xi(algo, k, z, delta_f0);
    let mut phases = Vec::new();
    let linear = |from: f64, to: f64, phases: &mut Vec<Phase>| {
        let it = linear_phase_iterations(m, xi, from, to);
        phases.push(Phase {
            regime: Regime::Linear,
            from_gap: from,
            to_gap: to.min(from),
            iterations: it,
            formula: format!("ceil(m log(from/to) / -log(xi)), xi = {xi}"),
        });
        it
    };
    let order_expression;
    let total = match function_class {
        FunctionClass::GH23 | FunctionClass::Gd2 => {
            let omega = newton_threshold(k, z);
            if newton && eps_f < omega {
                order_expression = "O(log(delta_f0 / (kappa^3/zeta^4))) + O(log(log((kappa^3/zeta^4) / eps_f)))".into();
                let (lin, start) = if delta_f0 < omega {
                    (0, delta_f0)
                } else {
                    let target = xi * omega;
                    (linear(delta_f0, target, &mut phases), target)
                };
                let tail = superlinear_tail_iterations(m, omega, start, eps_f);
                phases.push(Phase {
                    regime: Regime::Superlinear,
                    from_gap: start,
                    to_gap: eps_f,
                    iterations: tail,
                    formula: "ceil(m log(log(omega/eps_f) / log(omega/start)) / log(4/3)), omega = kappa^3/zeta^4"
                        .into(),
                });
                lin + tail
            } else {
                order_expression = "O(log(delta_f0 / eps_f))".into();
                linear(delta_f0, eps_f, &mut phases)
            }
        }
        FunctionClass::GH11 | FunctionClass::Gd1 => {
            let switch = 1.0 / k;
            let lin = linear(delta_f0, switch.max(eps_f), &mut phases);
            if eps_f >= switch {
                order_expression = "O(log(delta_f0 / eps_f))".into();
                lin
            } else {
                let s = delta_f0.min(switch);
                let (tail, formula, order) = if function_class == FunctionClass::GH11 {
                    let v = z / k * (1.0 / (k * eps_f).powi(2) - 1.0 / (k * s).powi(2));
                    (v, "m ceil((zeta/kappa)(1/(kappa eps_f)^2 - 1/(kappa s)^2))", "O((1/kappa) / eps_f^2)")
                } else if newton {
                    let c = (2f64.sqrt() - 1.0) / 2f64.sqrt();
                    let v = z / k.powf(1.5) * (1.0 / eps_f.sqrt() - 1.0 / s.sqrt()) / c;
                    (
                        v,
                        "m ceil((zeta/kappa^1.5)(1/sqrt(eps_f) - 1/sqrt(s)) / ((sqrt2-1)/sqrt2))",
                        "O((1/kappa) / sqrt(eps_f))",
                    )
                } else {
                    let v = z / k * (1.0 / (k * eps_f) - 1.0 / (k * s));
                    (v, "m ceil((zeta/kappa)(1/(kappa eps_f) - 1/(kappa s)))", "O((1/kappa) / eps_f)")
                };
                let tail = (m as u64).saturating_mul(ceil_u64(tail));
                phases.push(Phase {
                    regime: Regime::Sublinear,
                    from_gap: s,
                    to_gap: eps_f,
                    iterations: tail,
                    formula: format!("{formula}, s = min(delta_f0, 1/kappa)"),
                });
                order_expression = format!("O(log(delta_f0 / (1/kappa))) + {order}");
                lin.saturating_add(tail)
            }
        }
    };
    Ok(ComplexityBound {
        function_class,
        algo,
        iteration_bound: total,
        order_expression,
        phases,
        form: "explicit, hidden constants = 1".into(),
    })
}

/// Bound value that may be infinite; infinite values serialize as the
/// string `"unbounded"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    Unbounded,
}

impl Bound {
    pub fn value(&self) -> f64 {
        match self {
            Bound::Finite(v) => *v,
            Bound::Unbounded => f64::INFINITY,
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bound::Finite(v) => s.serialize_f64(*v),
            Bound::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Bound::Finite(v)),
            Repr::Text(t) if t == "unbounded" => Ok(Bound::Unbounded),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("invalid bound `{t}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContemporaryBound {
    pub k1_bound: Bound,
    pub k2_bound: Bound,
}

/// Order-constant-free first- and second-order complexity bounds from the
/// nonconvex literature.
pub fn contemporary_bound(algo: Algo, eps_1: f64, eps_2: f64, delta_f0: f64) -> ContemporaryBound {
    let k1 = match algo {
        Algo::Rn | Algo::RnA => delta_f0 / eps_1.powf(1.5),
        _ => delta_f0 / (eps_1 * eps_1),
    };
    let k2 = match algo {
        Algo::Rg | Algo::RgA | Algo::TrG => Bound::Unbounded,
        _ => Bound::Finite(delta_f0 / eps_2.powi(3)),
    };
    ContemporaryBound {
        k1_bound: Bound::Finite(k1),
        k2_bound: k2,
    }
}

/// Explicit first-order bound for RG: `2 l1 delta_f0 / eps_1^2`.
pub fn rg_explicit_k1_bound(l1: f64, delta_f0: f64, eps_1: f64) -> f64 {
    2.0 * l1 * delta_f0 / (eps_1 * eps_1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(class: AlgoClass, kappa: f64, zeta: f64) -> RateContext {
        RateContext {
            algo_class: class,
            kappa,
            zeta,
            m: 1,
            f0_gap: 1.0,
        }
    }

    #[test]
    fn grad_linear() {
        let b = rate_template(Region::R1_2, &ctx(AlgoClass::Grad, 1.0, 2.0), 0.3);
        assert_eq!(b.ratio_bound, 0.5);
        assert_eq!(b.regime, Some(Regime::Linear));
        assert!(b.applicable);
    }

    #[test]
    fn newton_superlinear() {
        let b = rate_template(Region::R1_2, &ctx(AlgoClass::Newton, 1.0, 1.0), 0.001);
        assert!((b.ratio_bound - 0.1).abs() < 1e-15);
        assert_eq!(b.regime, Some(Regime::Superlinear));
    }

    #[test]
    fn curvature_sublinear() {
        let b = rate_template(Region::R2_2, &ctx(AlgoClass::Curvature, 1.0, 4.0), 0.25);
        assert_eq!(b.ratio_bound, 0.875);
        assert_eq!(b.regime, Some(Regime::Sublinear));
    }

    #[test]
    fn inapplicable_pairs() {
        assert!(!rate_template(Region::R2_3, &ctx(AlgoClass::Grad, 1.0, 2.0), 1.0).applicable);
        assert!(!rate_template(Region::R1_2, &ctx(AlgoClass::Curvature, 1.0, 2.0), 1.0).applicable);
        assert!(!rate_template(Region::Outside, &ctx(AlgoClass::Newton, 1.0, 2.0), 1.0).applicable);
        let b = rate_template(RateRegion::Indexed { p: 1, q: 1 }, &ctx(AlgoClass::P(1), 1.0, 2.0), 0.5);
        assert!(!b.applicable);
        assert!(b.note.is_some());
        assert_eq!(b.ratio_bound, 0.75);
    }

    #[test]
    fn linear_phase_example() {
        let c = ctx(AlgoClass::Grad, 1.0, 2.0);
        let b = complexity_bound(FunctionClass::Gd2, Algo::Rg, &c, 1.0, 1e-3).unwrap();
        assert_eq!(b.iteration_bound, 10);
    }

    #[test]
    fn gh_classes_exclude_first_order_methods() {
        let c = ctx(AlgoClass::Grad, 1.0, 2.0);
        for a in [Algo::Rg, Algo::RgA, Algo::TrG] {
            assert!(matches!(
                complexity_bound(FunctionClass::GH23, a, &c, 1.0, 1e-3),
                Err(Error::Inadmissible(_))
            ));
        }
    }

    #[test]
    fn contemporary_values() {
        let b = contemporary_bound(Algo::Rg, 0.1, 0.1, 1.0);
        assert!((b.k1_bound.value() - 100.0).abs() < 1e-9);
        let b = contemporary_bound(Algo::Rn, 0.01, 0.1, 1.0);
        assert!((b.k1_bound.value() - 1000.0).abs() < 1e-9);
        assert_eq!(contemporary_bound(Algo::TrG, 0.1, 0.5, 1.0).k2_bound, Bound::Unbounded);
        assert_eq!(serde_json::to_string(&Bound::Unbounded).unwrap(), "\"unbounded\"");
    }
}
