//! Convex functions with proximal-point oracles.
//!
//! A proximal map is the resolvent of the subdifferential, so every oracle
//! here is firmly nonexpansive and plugs into the operator machinery
//! unchanged. Indicator functions route to the projection of the underlying
//! set; there is exactly one implementation per set.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::convex_sets::{DynSet, Smooth1d};
use crate::operators::{DynMap, PointMap};
use crate::roots;
use crate::sampling::{sample_box, SampleBox};
use crate::{Error, Result, Vector};

/// Residual target for smooth 1-D proximal solves.
pub const PROX_ROOT_RESID: f64 = 1e-11;

/// Extended-real-valued convex function.
pub trait ConvexFunction: Send + Sync {
    fn dim(&self) -> usize;

    /// May return `+inf` outside the domain.
    fn eval(&self, x: &Vector) -> f64;

    /// A subgradient at `x`, when one is cheaply available.
    fn subgradient_hint(&self, _x: &Vector) -> Option<Vector> {
        None
    }

    fn descriptor(&self) -> String;

    /// Region where the function is worth sampling.
    fn domain_box(&self) -> SampleBox {
        SampleBox::cube(self.dim(), 10.0)
    }
}

pub type DynFunction = Arc<dyn ConvexFunction>;

// ---------------------------------------------------------------------------
// Built-in functions
// ---------------------------------------------------------------------------

/// (a/2) ||u||^2 + <b, u>, with a >= 0.
#[derive(Clone, Debug)]
pub struct QuadraticFunction {
    pub a: f64,
    pub b: Vector,
}

impl ConvexFunction for QuadraticFunction {
    fn dim(&self) -> usize {
        self.b.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        0.5 * self.a * x.norm_sq() + self.b.dot(x)
    }
    fn subgradient_hint(&self, x: &Vector) -> Option<Vector> {
        Some(x.scale(self.a).axpy(1.0, &self.b))
    }
    fn descriptor(&self) -> String {
        format!("quadratic a={} b={:?}", self.a, self.b.coords())
    }
}

/// The l1 norm.
#[derive(Clone, Debug)]
pub struct OneNorm {
    pub dim: usize,
}

impl ConvexFunction for OneNorm {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &Vector) -> f64 {
        x.coords().iter().map(|c| c.abs()).sum()
    }
    fn descriptor(&self) -> String {
        "l1 norm".into()
    }
}

/// Indicator of a convex set: 0 inside, +inf outside.
#[derive(Clone)]
pub struct IndicatorFunction {
    set: DynSet,
}

impl IndicatorFunction {
    pub fn new(set: DynSet) -> Self {
        Self { set }
    }
}

impl ConvexFunction for IndicatorFunction {
    fn dim(&self) -> usize {
        self.set.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        if self.set.contains(x, crate::convex_sets::MEMBERSHIP_TOL) {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn descriptor(&self) -> String {
        format!("indicator of {}", self.set.descriptor())
    }
    fn domain_box(&self) -> SampleBox {
        self.set.hint_box()
    }
}

/// Differentiable convex scalar function lifted to dimension one.
#[derive(Clone)]
pub struct Smooth1dFunction {
    f: Arc<dyn Smooth1d>,
}

impl Smooth1dFunction {
    pub fn new(f: Arc<dyn Smooth1d>) -> Self {
        Self { f }
    }
}

impl ConvexFunction for Smooth1dFunction {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, x: &Vector) -> f64 {
        self.f.eval(x[0])
    }
    fn subgradient_hint(&self, x: &Vector) -> Option<Vector> {
        Some(Vector::from_raw(vec![self.f.deriv(x[0])]))
    }
    fn descriptor(&self) -> String {
        self.f.label()
    }
}

// ---------------------------------------------------------------------------
// Proximal point operations
// ---------------------------------------------------------------------------

/// Minimizer of `1/2 ||u-x||^2 + (a/2) ||u||^2 + <b, u>`, in closed form.
pub fn prox_quadratic(a: f64, b: &Vector, x: &Vector) -> Result<Vector> {
    if !(a >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "quadratic coefficient must be nonnegative, got {a}"
        )));
    }
    x.expect_dim(b.dim())?;
    Ok((x - b).scale(1.0 / (1.0 + a)))
}

/// Componentwise soft threshold at 1 (prox of the l1 norm).
pub fn prox_abs(x: &Vector) -> Vector {
    Vector::from_raw(
        x.coords()
            .iter()
            .map(|&c| c.signum() * (c.abs() - 1.0).max(0.0))
            .collect(),
    )
}

/// Proximal point of a differentiable convex scalar function: the root of
/// `u + f'(u) = x`.
pub fn prox_smooth_1d(f: &dyn Smooth1d, x: f64) -> Result<f64> {
    let g = |u: f64| u + f.deriv(u) - x;
    let dg = |u: f64| {
        let h = 1e-6 * (1.0 + u.abs());
        1.0 + (f.deriv(u + h) - f.deriv(u - h)) / (2.0 * h)
    };
    let u = roots::solve_increasing(g, dg, x, PROX_ROOT_RESID * 0.1)?;
    let residual = g(u).abs();
    if residual > PROX_ROOT_RESID {
        return Err(Error::RootResidual(format!(
            "prox residual {residual} at u = {u}"
        )));
    }
    Ok(u)
}

// ---------------------------------------------------------------------------
// Prox oracle
// ---------------------------------------------------------------------------

/// A proximal map bundled with the function it came from (when known).
#[derive(Clone)]
pub struct ProxOracle {
    map: DynMap,
    source: Option<DynFunction>,
}

impl ProxOracle {
    pub fn from_parts(map: DynMap, source: Option<DynFunction>) -> Self {
        Self { map, source }
    }

    pub fn quadratic(a: f64, b: Vector) -> Result<Self> {
        if !(a >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quadratic coefficient must be nonnegative, got {a}"
            )));
        }
        let f = QuadraticFunction { a, b: b.clone() };
        Ok(Self {
            map: Arc::new(QuadraticProx { a, b }),
            source: Some(Arc::new(f)),
        })
    }

    pub fn abs(dim: usize) -> Self {
        Self {
            map: Arc::new(SoftThreshold { dim }),
            source: Some(Arc::new(OneNorm { dim })),
        }
    }

    pub fn smooth_1d(f: Arc<dyn Smooth1d>) -> Self {
        Self {
            map: Arc::new(SmoothProx { f: f.clone() }),
            source: Some(Arc::new(Smooth1dFunction::new(f))),
        }
    }

    /// Indicator functions reuse the set's projection. One canonical
    /// implementation per set.
    pub fn indicator(set: DynSet) -> Self {
        Self {
            map: Arc::new(crate::operators::Projection::new(set.clone())),
            source: Some(Arc::new(IndicatorFunction::new(set))),
        }
    }

    pub fn prox(&self, x: &Vector) -> Vector {
        self.map.apply(x)
    }

    pub fn map(&self) -> &DynMap {
        &self.map
    }

    pub fn source(&self) -> Option<&DynFunction> {
        self.source.as_ref()
    }
}

impl PointMap for ProxOracle {
    fn dim(&self) -> usize {
        self.map.dim()
    }
    fn apply(&self, x: &Vector) -> Vector {
        self.map.apply(x)
    }
    fn descriptor(&self) -> String {
        match &self.source {
            Some(f) => format!("prox of {}", f.descriptor()),
            None => format!("prox ({})", self.map.descriptor()),
        }
    }
}

struct QuadraticProx {
    a: f64,
    b: Vector,
}

impl PointMap for QuadraticProx {
    fn dim(&self) -> usize {
        self.b.dim()
    }
    fn apply(&self, x: &Vector) -> Vector {
        (x - &self.b).scale(1.0 / (1.0 + self.a))
    }
    fn descriptor(&self) -> String {
        format!("prox of quadratic a={}", self.a)
    }
}

struct SoftThreshold {
    dim: usize,
}

impl PointMap for SoftThreshold {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &Vector) -> Vector {
        prox_abs(x)
    }
    fn descriptor(&self) -> String {
        "soft threshold at 1".into()
    }
}

struct SmoothProx {
    f: Arc<dyn Smooth1d>,
}

impl PointMap for SmoothProx {
    fn dim(&self) -> usize {
        1
    }
    fn apply(&self, x: &Vector) -> Vector {
        let u = prox_smooth_1d(self.f.as_ref(), x[0]).expect("smooth prox solve failed");
        Vector::from_raw(vec![u])
    }
    fn descriptor(&self) -> String {
        format!("prox of {}", self.f.label())
    }
}

/// Worst midpoint-convexity violation over random in-domain triples;
/// nonpositive for convex functions.
pub fn check_midpoint_convexity(
    f: &dyn ConvexFunction,
    trials: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let region = f.domain_box().truncated(10.0);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let x = sample_box(rng, &region);
        let y = sample_box(rng, &region);
        let t: f64 = rng.gen_range(0.0..=1.0);
        let mid = x.scale(t).axpy(1.0 - t, &y);
        let fx = f.eval(&x);
        let fy = f.eval(&y);
        let fm = f.eval(&mid);
        if fx.is_finite() && fy.is_finite() && fm.is_finite() {
            worst = worst.max(fm - (t * fx + (1.0 - t) * fy));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_sets::{BoxSet, ExpFn, LinearFn};
    use crate::operators::check_firmly_nonexpansive;
    use crate::sampling::rng;

    fn v(coords: &[f64]) -> Vector {
        Vector::from_raw(coords.to_vec())
    }

    // Brute-force 1-D prox oracle: grid scan then golden-section polish.
    fn prox_oracle_1d(f: impl Fn(f64) -> f64, x: f64, lo: f64, hi: f64) -> f64 {
        let obj = |u: f64| 0.5 * (u - x) * (u - x) + f(u);
        let mut best = lo;
        let mut best_v = obj(lo);
        for k in 0..=400_000 {
            let u = lo + (hi - lo) * (k as f64) / 400_000.0;
            let val = obj(u);
            if val < best_v {
                best_v = val;
                best = u;
            }
        }
        best
    }

    #[test]
    fn prox_quadratic_scaling() {
        let u = prox_quadratic(1.0, &Vector::zeros(1), &v(&[2.0])).unwrap();
        assert_eq!(u.coords(), &[1.0]);
    }

    #[test]
    fn prox_of_zero_function_is_identity() {
        let x = v(&[3.0, -1.0]);
        let u = prox_quadratic(0.0, &Vector::zeros(2), &x).unwrap();
        assert_eq!(u.coords(), x.coords());
    }

    #[test]
    fn prox_quadratic_matches_grid_oracle() {
        let u = prox_quadratic(3.0, &v(&[1.0]), &v(&[5.0])).unwrap();
        assert!((u[0] - 1.0).abs() < 1e-12);
        let oracle = prox_oracle_1d(|t| 1.5 * t * t + t, 5.0, -10.0, 10.0);
        assert!((u[0] - oracle).abs() < 1e-4);
    }

    #[test]
    fn prox_quadratic_rejects_negative_a() {
        assert!(prox_quadratic(-0.5, &Vector::zeros(1), &v(&[0.0])).is_err());
    }

    #[test]
    fn prox_abs_inside_threshold() {
        assert_eq!(prox_abs(&v(&[0.5])).coords(), &[0.0]);
    }

    #[test]
    fn prox_abs_shifts_toward_zero() {
        assert_eq!(prox_abs(&v(&[-3.0])).coords(), &[-2.0]);
    }

    #[test]
    fn prox_abs_matches_componentwise_oracle() {
        let u = prox_abs(&v(&[2.0, -0.2]));
        assert_eq!(u.coords(), &[1.0, 0.0]);
        for (xi, ui) in [(2.0, 1.0), (-0.2, 0.0)] {
            let oracle = prox_oracle_1d(|t| t.abs(), xi, -5.0, 5.0);
            assert!((ui - oracle).abs() < 1e-4);
        }
    }

    #[test]
    fn prox_smooth_exp_hits_omega() {
        // Root of u + e^u = 0, frozen from the bisection oracle in roots.rs.
        let u = prox_smooth_1d(&ExpFn, 0.0).unwrap();
        assert!((u - (-0.567_143_290_409_783_8)).abs() < 1e-10);
    }

    #[test]
    fn prox_smooth_linear_is_translation() {
        let f = LinearFn { slope: 1.0 };
        for x in [-4.0, 0.0, 7.5] {
            let u = prox_smooth_1d(&f, x).unwrap();
            assert!((u - (x - 1.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn prox_smooth_zero_function_is_identity() {
        let f = LinearFn { slope: 0.0 };
        let u = prox_smooth_1d(&f, 2.25).unwrap();
        assert!((u - 2.25).abs() < 1e-11);
    }

    #[test]
    fn oracles_are_firmly_nonexpansive() {
        let oracles: Vec<ProxOracle> = vec![
            ProxOracle::quadratic(1.0, Vector::zeros(2)).unwrap(),
            ProxOracle::quadratic(0.0, v(&[0.3, -0.7])).unwrap(),
            ProxOracle::abs(2),
            ProxOracle::smooth_1d(Arc::new(ExpFn)),
            ProxOracle::indicator(Arc::new(BoxSet::interval(0.0, 1.0).unwrap())),
        ];
        for (k, oracle) in oracles.iter().enumerate() {
            let region = SampleBox::cube(oracle.dim(), 5.0);
            let mut r = rng(100 + k as u64);
            let report = check_firmly_nonexpansive(oracle, &region, 10_000, &mut r);
            assert!(
                report.pass(),
                "{} worst violation {}",
                oracle.descriptor(),
                report.worst()
            );
        }
    }

    #[test]
    fn oracle_optimality_sampled() {
        let oracle = ProxOracle::quadratic(2.0, v(&[1.0, -1.0])).unwrap();
        let f = oracle.source().unwrap().clone();
        let region = SampleBox::cube(2, 5.0);
        let mut r = rng(31);
        for _ in 0..200 {
            let x = sample_box(&mut r, &region);
            let u = oracle.prox(&x);
            let fu = 0.5 * (&u - &x).norm_sq() + f.eval(&u);
            for _ in 0..50 {
                let c = sample_box(&mut r, &region);
                let fc = 0.5 * (&c - &x).norm_sq() + f.eval(&c);
                assert!(fu <= fc + 1e-8);
            }
        }
    }

    #[test]
    fn moreau_complement_consistency() {
        // prox_f(x) + J_{(df)^{-1}}(x) = x with the second term computed as
        // x - prox_f(x).
        let oracle = ProxOracle::abs(3);
        let view =
            crate::operators::MonotoneOperatorView::from_resolvent(oracle.map().clone());
        let mut r = rng(32);
        let region = SampleBox::cube(3, 5.0);
        for _ in 0..1000 {
            let x = sample_box(&mut r, &region);
            let p = oracle.prox(&x);
            let q = view.inverse_resolvent(&x);
            for i in 0..3 {
                assert_eq!(p[i] + q[i], p[i] + (x[i] - p[i]));
            }
        }
    }

    #[test]
    fn reflected_map_is_nonexpansive_for_oracles() {
        // 2T - Id nonexpansive, checked explicitly on the abs prox.
        let oracle = ProxOracle::abs(1);
        let mut r = rng(33);
        let region = SampleBox::cube(1, 5.0);
        for _ in 0..10_000 {
            let x = sample_box(&mut r, &region);
            let y = sample_box(&mut r, &region);
            let rx = &oracle.prox(&x).scale(2.0) - &x;
            let ry = &oracle.prox(&y).scale(2.0) - &y;
            assert!(rx.distance(&ry) <= x.distance(&y) + 1e-9);
        }
    }

    #[test]
    fn builtin_functions_are_midpoint_convex() {
        let funcs: Vec<DynFunction> = vec![
            Arc::new(QuadraticFunction { a: 2.0, b: v(&[1.0, 0.0]) }),
            Arc::new(OneNorm { dim: 2 }),
            Arc::new(Smooth1dFunction::new(Arc::new(ExpFn))),
        ];
        for f in funcs {
            let mut r = rng(34);
            let worst = check_midpoint_convexity(f.as_ref(), 2000, &mut r);
            assert!(worst <= 1e-10, "{}: worst {worst}", f.descriptor());
        }
    }
}
