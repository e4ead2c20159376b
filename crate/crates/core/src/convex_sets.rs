//! Primitive convex sets with projection oracles.
//!
//! Each set exposes an exact (or safeguarded-numeric) nearest-point map,
//! a membership test, and a bounding-box hint used by samplers. Projections
//! are firmly nonexpansive; the property tests sample that contract rather
//! than trusting it.

use std::sync::Arc;

use crate::roots;
use crate::sampling::SampleBox;
use crate::{Error, Result, Vector};

/// Default membership tolerance, consistent with projection accuracy.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// Nonempty closed convex set with a projection oracle.
pub trait ConvexSet: Send + Sync {
    fn dim(&self) -> usize;

    /// Nearest point of the set. `x` must have the set's dimension.
    fn project(&self, x: &Vector) -> Vector;

    fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.dim() == self.dim() && x.distance(&self.project(x)) <= tol
    }

    /// Axis-aligned bounding box; entries may be `±inf`.
    fn hint_box(&self) -> SampleBox;

    fn descriptor(&self) -> String;
}

pub type DynSet = Arc<dyn ConvexSet>;

// ---------------------------------------------------------------------------
// Box
// ---------------------------------------------------------------------------

/// Axis-aligned box; `±inf` bounds mark unbounded axes.
#[derive(Clone, Debug)]
pub struct BoxSet {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxSet {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        for i in 0..lo.len() {
            if lo[i].is_nan() || hi[i].is_nan() {
                return Err(Error::InvalidParameter(format!(
                    "NaN box bound on axis {i}"
                )));
            }
            if lo[i] > hi[i] {
                return Err(Error::InvalidParameter(format!(
                    "box bounds out of order on axis {i}: {} > {}",
                    lo[i], hi[i]
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }
}

impl ConvexSet for BoxSet {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn project(&self, x: &Vector) -> Vector {
        assert_eq!(x.dim(), self.dim());
        Vector::from_raw(
            x.coords()
                .iter()
                .enumerate()
                .map(|(i, &c)| c.clamp(self.lo[i], self.hi[i]))
                .collect(),
        )
    }

    fn hint_box(&self) -> SampleBox {
        SampleBox::new(self.lo.clone(), self.hi.clone())
    }

    fn descriptor(&self) -> String {
        format!("box {:?} x {:?}", self.lo, self.hi)
    }
}

/// Componentwise clamp of `x` into `[lo, hi]`.
pub fn project_box(x: &Vector, lo: &[f64], hi: &[f64]) -> Result<Vector> {
    let set = BoxSet::new(lo.to_vec(), hi.to_vec())?;
    x.expect_dim(set.dim())?;
    Ok(set.project(x))
}

// ---------------------------------------------------------------------------
// Ball
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct BallSet {
    center: Vector,
    radius: f64,
}

impl BallSet {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            center: Vector::zeros(dim),
            radius: 1.0,
        }
    }
}

impl ConvexSet for BallSet {
    fn dim(&self) -> usize {
        self.center.dim()
    }

    fn project(&self, x: &Vector) -> Vector {
        assert_eq!(x.dim(), self.dim());
        let offset = x - &self.center;
        let dist = offset.norm();
        if dist <= self.radius {
            x.clone()
        } else {
            self.center.axpy(self.radius / dist, &offset)
        }
    }

    fn hint_box(&self) -> SampleBox {
        let lo = self.center.coords().iter().map(|c| c - self.radius).collect();
        let hi = self.center.coords().iter().map(|c| c + self.radius).collect();
        SampleBox::new(lo, hi)
    }

    fn descriptor(&self) -> String {
        format!("ball r={} at {:?}", self.radius, self.center.coords())
    }
}

/// Radial projection onto the ball of the given center and radius.
pub fn project_ball(x: &Vector, center: &Vector, radius: f64) -> Result<Vector> {
    let set = BallSet::new(center.clone(), radius)?;
    x.expect_dim(set.dim())?;
    Ok(set.project(x))
}

// ---------------------------------------------------------------------------
// Affine flat
// ---------------------------------------------------------------------------

/// Affine set `point + span(basis)` given by an orthonormal basis.
#[derive(Clone, Debug)]
pub struct AffineSet {
    point: Vector,
    basis: Vec<Vector>,
}

/// Orthonormality tolerance for affine bases.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

impl AffineSet {
    pub fn new(point: Vector, basis: Vec<Vector>) -> Result<Self> {
        for b in &basis {
            b.expect_dim(point.dim())?;
        }
        for i in 0..basis.len() {
            for j in i..basis.len() {
                let expected = if i == j { 1.0 } else { 0.0 };
                let got = basis[i].dot(&basis[j]);
                if (got - expected).abs() > ORTHONORMAL_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "basis not orthonormal: <b{i}, b{j}> = {got}"
                    )));
                }
            }
        }
        Ok(Self { point, basis })
    }

    /// The line `R x {c}` in the plane.
    pub fn horizontal_line(height: f64) -> Self {
        Self {
            point: Vector::from_raw(vec![0.0, height]),
            basis: vec![Vector::from_raw(vec![1.0, 0.0])],
        }
    }
}

impl ConvexSet for AffineSet {
    fn dim(&self) -> usize {
        self.point.dim()
    }

    fn project(&self, x: &Vector) -> Vector {
        assert_eq!(x.dim(), self.dim());
        let offset = x - &self.point;
        let mut out = self.point.clone();
        for b in &self.basis {
            out = out.axpy(offset.dot(b), b);
        }
        out
    }

    fn hint_box(&self) -> SampleBox {
        // Unbounded along spanned axes; pinned where the flat is thin.
        let dim = self.dim();
        let mut lo = Vec::with_capacity(dim);
        let mut hi = Vec::with_capacity(dim);
        for axis in 0..dim {
            let spanned = self.basis.iter().any(|b| b[axis].abs() > 1e-14);
            if spanned {
                lo.push(f64::NEG_INFINITY);
                hi.push(f64::INFINITY);
            } else {
                lo.push(self.point[axis]);
                hi.push(self.point[axis]);
            }
        }
        SampleBox::new(lo, hi)
    }

    fn descriptor(&self) -> String {
        format!(
            "affine flat dim {} through {:?}",
            self.basis.len(),
            self.point.coords()
        )
    }
}

/// Orthogonal projection onto `point + span(basis)`.
pub fn project_affine(x: &Vector, point: &Vector, basis: &[Vector]) -> Result<Vector> {
    let set = AffineSet::new(point.clone(), basis.to_vec())?;
    x.expect_dim(set.dim())?;
    Ok(set.project(x))
}

// ---------------------------------------------------------------------------
// Epigraph of a smooth convex scalar function
// ---------------------------------------------------------------------------

/// Smooth convex scalar function with derivative, for epigraphs and smooth
/// proximal maps.
pub trait Smooth1d: Send + Sync {
    fn eval(&self, x: f64) -> f64;
    fn deriv(&self, x: f64) -> f64;
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn label(&self) -> String;
}

#[derive(Clone, Debug)]
pub struct ExpFn;

impl Smooth1d for ExpFn {
    fn eval(&self, x: f64) -> f64 {
        x.exp()
    }
    fn deriv(&self, x: f64) -> f64 {
        x.exp()
    }
    fn label(&self) -> String {
        "exp".into()
    }
}

/// f(x) = slope * x.
#[derive(Clone, Debug)]
pub struct LinearFn {
    pub slope: f64,
}

impl Smooth1d for LinearFn {
    fn eval(&self, x: f64) -> f64 {
        self.slope * x
    }
    fn deriv(&self, _x: f64) -> f64 {
        self.slope
    }
    fn label(&self) -> String {
        format!("linear slope {}", self.slope)
    }
}

/// f(x) = (a/2) x^2 + b x.
#[derive(Clone, Debug)]
pub struct QuadraticFn1d {
    pub a: f64,
    pub b: f64,
}

impl Smooth1d for QuadraticFn1d {
    fn eval(&self, x: f64) -> f64 {
        0.5 * self.a * x * x + self.b * x
    }
    fn deriv(&self, x: f64) -> f64 {
        self.a * x + self.b
    }
    fn label(&self) -> String {
        format!("quadratic a={} b={}", self.a, self.b)
    }
}

/// Convex, twice differentiable scalar function together with the interval
/// it is defined on; used to build epigraph sets.
#[derive(Clone)]
pub struct EpigraphSpec {
    f: Arc<dyn Smooth1d>,
}

/// Midpoint-convexity slack allowed when validating an epigraph function.
pub const CONVEXITY_SPOT_TOL: f64 = 1e-10;

impl EpigraphSpec {
    /// Wraps a scalar function after spot-checking midpoint convexity on a
    /// deterministic set of triples inside (a truncation of) its domain.
    pub fn new(f: Arc<dyn Smooth1d>) -> Result<Self> {
        let (lo, hi) = f.domain();
        let lo = lo.max(-10.0);
        let hi = hi.min(10.0);
        let mut r = crate::sampling::rng(0xE16);
        use rand::Rng;
        for _ in 0..64 {
            let x = r.gen_range(lo..hi);
            let y = r.gen_range(lo..hi);
            let mid = 0.5 * (x + y);
            let gap = f.eval(mid) - 0.5 * (f.eval(x) + f.eval(y));
            if gap > CONVEXITY_SPOT_TOL {
                return Err(Error::InvalidParameter(format!(
                    "function '{}' failed midpoint convexity at x={x}, y={y}: gap {gap}",
                    f.label()
                )));
            }
        }
        Ok(Self { f })
    }

    pub fn exp() -> Self {
        // exp is convex; the spot check cannot fail.
        Self { f: Arc::new(ExpFn) }
    }

    pub fn f(&self) -> &dyn Smooth1d {
        self.f.as_ref()
    }
}

/// Stationarity target for the epigraph projection root solve.
pub const EPIGRAPH_ROOT_TARGET: f64 = 1e-12;

/// The planar set `{(x, t) : t >= f(x)}`.
#[derive(Clone)]
pub struct EpigraphSet {
    spec: EpigraphSpec,
}

impl EpigraphSet {
    pub fn new(spec: EpigraphSpec) -> Self {
        Self { spec }
    }

    pub fn exp() -> Self {
        Self { spec: EpigraphSpec::exp() }
    }

    /// Nearest point with a diagnosable error channel.
    pub fn try_project(&self, x0: f64, t0: f64) -> Result<Vector> {
        let f = self.spec.f();
        if t0 >= f.eval(x0) {
            return Ok(Vector::from_raw(vec![x0, t0]));
        }
        // Nearest point lies on the graph; its abscissa solves the
        // stationarity equation (x - x0) + f'(x) (f(x) - t0) = 0, which is
        // increasing wherever f(x) >= t0 (the region containing the root).
        let g = |x: f64| (x - x0) + f.deriv(x) * (f.eval(x) - t0);
        // Second derivative enters dg; a symmetric difference of f' avoids
        // requiring f'' from implementors.
        let dg = |x: f64| {
            let h = 1e-6 * (1.0 + x.abs());
            let fpp = (f.deriv(x + h) - f.deriv(x - h)) / (2.0 * h);
            1.0 + fpp * (f.eval(x) - t0) + f.deriv(x) * f.deriv(x)
        };
        let x = roots::solve_increasing(g, dg, x0, EPIGRAPH_ROOT_TARGET)?;
        let residual = g(x).abs();
        if residual > 1e-10 {
            return Err(Error::RootResidual(format!(
                "epigraph projection stationarity residual {residual} at x = {x}"
            )));
        }
        Ok(Vector::from_raw(vec![x, f.eval(x)]))
    }
}

impl ConvexSet for EpigraphSet {
    fn dim(&self) -> usize {
        2
    }

    fn project(&self, x: &Vector) -> Vector {
        assert_eq!(x.dim(), 2);
        self.try_project(x[0], x[1])
            .expect("epigraph projection failed")
    }

    fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.dim() == 2 && x[1] >= self.spec.f().eval(x[0]) - tol
    }

    fn hint_box(&self) -> SampleBox {
        SampleBox::new(
            vec![f64::NEG_INFINITY, f64::NEG_INFINITY],
            vec![f64::INFINITY, f64::INFINITY],
        )
    }

    fn descriptor(&self) -> String {
        format!("epigraph of {}", self.spec.f().label())
    }
}

/// Projection of `(x0, t0)` onto the epigraph of `spec`.
pub fn project_epigraph(spec: &EpigraphSpec, p: (f64, f64)) -> Result<Vector> {
    EpigraphSet::new(spec.clone()).try_project(p.0, p.1)
}
