//! Firmly nonexpansive maps as the computational face of maximally monotone
//! operators.
//!
//! Operators are always represented through their resolvents: a resolvent is
//! total and single-valued, so the set-valued operator itself never has to
//! be materialized. Graph information comes from the Minty parametrization
//! `x -> (J x, x - J x)`, and firm nonexpansiveness is a sampled certificate
//! rather than a type-level promise.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;

use crate::convex_sets::DynSet;
use crate::sampling::{sample_box, sphere_directions, SampleBox};
use crate::{Error, Result, Vector};

/// Tolerance for the sampled firm-nonexpansiveness certificate.
pub const FIRMNESS_TOL: f64 = 1e-9;

/// Single-valued map on Euclidean space.
///
/// Firm nonexpansiveness (`<x-y, Tx-Ty> >= ||Tx-Ty||^2`) is the contract
/// most implementors satisfy; [`check_firmly_nonexpansive`] samples it.
pub trait PointMap: Send + Sync {
    fn dim(&self) -> usize;

    /// Applies the map. `x` must match `dim()`.
    fn apply(&self, x: &Vector) -> Vector;

    fn descriptor(&self) -> String;
}

pub type DynMap = Arc<dyn PointMap>;

// ---------------------------------------------------------------------------
// Map zoo
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Identity {
    pub dim: usize,
}

impl PointMap for Identity {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &Vector) -> Vector {
        assert_eq!(x.dim(), self.dim);
        x.clone()
    }
    fn descriptor(&self) -> String {
        "identity".into()
    }
}

/// x -> x + v.
#[derive(Clone, Debug)]
pub struct Translation {
    pub v: Vector,
}

impl PointMap for Translation {
    fn dim(&self) -> usize {
        self.v.dim()
    }
    fn apply(&self, x: &Vector) -> Vector {
        assert_eq!(x.dim(), self.dim());
        x + &self.v
    }
    fn descriptor(&self) -> String {
        format!("translation by {:?}", self.v.coords())
    }
}

/// Dense linear map x -> M x (not necessarily firmly nonexpansive).
#[derive(Clone, Debug)]
pub struct LinearMap {
    m: DMatrix<f64>,
}

impl LinearMap {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidParameter(format!(
                "linear map must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self { m })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }
}

impl PointMap for LinearMap {
    fn dim(&self) -> usize {
        self.m.nrows()
    }
    fn apply(&self, x: &Vector) -> Vector {
        assert_eq!(x.dim(), self.dim());
        let out = &self.m * DVector::from_column_slice(x.coords());
        Vector::from_raw(out.iter().copied().collect())
    }
    fn descriptor(&self) -> String {
        format!("linear map {}x{}", self.m.nrows(), self.m.ncols())
    }
}

/// Projection onto a convex set, as a map.
#[derive(Clone)]
pub struct Projection {
    set: DynSet,
}

impl Projection {
    pub fn new(set: DynSet) -> Self {
        Self { set }
    }

    pub fn set(&self) -> &DynSet {
        &self.set
    }
}

impl PointMap for Projection {
    fn dim(&self) -> usize {
        self.set.dim()
    }
    fn apply(&self, x: &Vector) -> Vector {
        self.set.project(x)
    }
    fn descriptor(&self) -> String {
        format!("projection onto {}", self.set.descriptor())
    }
}

/// Composition outer ∘ inner. Nonexpansive when both factors are, but not
/// firmly nonexpansive in general.
#[derive(Clone)]
pub struct Composition {
    outer: DynMap,
    inner: DynMap,
}

impl Composition {
    pub fn new(outer: DynMap, inner: DynMap) -> Result<Self> {
        if outer.dim() != inner.dim() {
            return Err(Error::DimensionMismatch {
                expected: inner.dim(),
                got: outer.dim(),
            });
        }
        Ok(Self { outer, inner })
    }
}

impl PointMap for Composition {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply(&self, x: &Vector) -> Vector {
        self.outer.apply(&self.inner.apply(x))
    }
    fn descriptor(&self) -> String {
        format!("({}) o ({})", self.outer.descriptor(), self.inner.descriptor())
    }
}

/// x -> x - T x, the complement of a map.
#[derive(Clone)]
pub struct Complement {
    inner: DynMap,
}

impl Complement {
    pub fn new(inner: DynMap) -> Self {
        Self { inner }
    }
}

impl PointMap for Complement {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply(&self, x: &Vector) -> Vector {
        x - &self.inner.apply(x)
    }
    fn descriptor(&self) -> String {
        format!("id - ({})", self.inner.descriptor())
    }
}

// ---------------------------------------------------------------------------
// Linear monotone operators and their resolvents
// ---------------------------------------------------------------------------

/// Monotonicity slack for the symmetric-part eigenvalue test.
pub const MONOTONE_EIG_TOL: f64 = 1e-10;

/// Square matrix with positive semidefinite symmetric part.
#[derive(Clone, Debug)]
pub struct LinearMonotoneOperator {
    m: DMatrix<f64>,
}

impl LinearMonotoneOperator {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidParameter(format!(
                "operator matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let sym = (&m + m.transpose()) * 0.5;
        let eigs = sym.symmetric_eigen().eigenvalues;
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -MONOTONE_EIG_TOL {
            return Err(Error::InvalidParameter(format!(
                "matrix is not monotone: min symmetric eigenvalue {min_eig}"
            )));
        }
        Ok(Self { m })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::InvalidParameter("ragged matrix rows".into()));
            }
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(n, n, &flat))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        let out = &self.m * DVector::from_column_slice(x.coords());
        Vector::from_raw(out.iter().copied().collect())
    }

    /// Pre-factorized resolvent `(I + M)^{-1}`.
    pub fn resolvent_map(&self) -> Result<LinearResolvent> {
        LinearResolvent::new(self.clone())
    }

    /// Unit eigenvectors of the symmetric part, in both orientations.
    pub fn symmetric_eigenvector_directions(&self) -> Vec<Vector> {
        let sym = (&self.m + self.m.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let mut out = Vec::new();
        for col in eig.eigenvectors.column_iter() {
            let v: Vec<f64> = col.iter().copied().collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 1e-12 {
                let unit: Vec<f64> = v.iter().map(|c| c / norm).collect();
                out.push(Vector::from_raw(unit.clone()));
                out.push(Vector::from_raw(unit.iter().map(|c| -c).collect()));
            }
        }
        out
    }
}

/// Resolvent of a linear monotone operator, solved by LU factorization.
#[derive(Clone)]
pub struct LinearResolvent {
    source: LinearMonotoneOperator,
    lu: Arc<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl LinearResolvent {
    pub fn new(source: LinearMonotoneOperator) -> Result<Self> {
        let n = source.dim();
        let system = DMatrix::identity(n, n) + source.matrix();
        let lu = system.lu();
        // I + M is nonsingular for monotone M; guarded anyway.
        if lu.determinant().abs() < 1e-300 {
            return Err(Error::Numerical(
                "I + M is numerically singular".into(),
            ));
        }
        Ok(Self { source, lu: Arc::new(lu) })
    }

    pub fn source(&self) -> &LinearMonotoneOperator {
        &self.source
    }

    /// Solves `(I + M) u = x`, verifying the residual.
    pub fn solve(&self, x: &Vector) -> Result<Vector> {
        x.expect_dim(self.source.dim())?;
        let rhs = DVector::from_column_slice(x.coords());
        let u = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("resolvent solve failed".into()))?;
        let n = self.source.dim();
        let system = DMatrix::identity(n, n) + self.source.matrix();
        let residual = (&system * &u - &rhs).norm();
        if residual > 1e-10 * (1.0 + x.norm()) {
            return Err(Error::Numerical(format!(
                "resolvent solve residual {residual} too large"
            )));
        }
        Ok(Vector::from_raw(u.iter().copied().collect()))
    }
}

impl PointMap for LinearResolvent {
    fn dim(&self) -> usize {
        self.source.dim()
    }
    fn apply(&self, x: &Vector) -> Vector {
        self.solve(x).expect("linear resolvent solve failed")
    }
    fn descriptor(&self) -> String {
        format!("resolvent of linear operator dim {}", self.dim())
    }
}

/// Evaluates `(I + M)^{-1} x` for a monotone matrix `M`.
pub fn resolvent_of_linear(m: &LinearMonotoneOperator, x: &Vector) -> Result<Vector> {
    m.resolvent_map()?.solve(x)
}

// ---------------------------------------------------------------------------
// Monotone operator views and Minty graph samples
// ---------------------------------------------------------------------------

/// Maximally monotone operator represented by its resolvent.
#[derive(Clone)]
pub struct MonotoneOperatorView {
    resolvent: DynMap,
}

impl MonotoneOperatorView {
    /// Wraps a firmly nonexpansive map as the resolvent of an operator.
    pub fn from_resolvent(resolvent: DynMap) -> Self {
        Self { resolvent }
    }

    pub fn dim(&self) -> usize {
        self.resolvent.dim()
    }

    pub fn resolvent_map(&self) -> &DynMap {
        &self.resolvent
    }

    pub fn resolvent(&self, x: &Vector) -> Vector {
        self.resolvent.apply(x)
    }

    /// `x - J x`, the resolvent of the inverse operator.
    pub fn inverse_resolvent(&self, x: &Vector) -> Vector {
        x - &self.resolvent.apply(x)
    }

    /// Graph points `(J x, x - J x)` for each probe.
    pub fn minty_sample(&self, probes: &[Vector]) -> Result<GraphSample> {
        let mut pairs = Vec::with_capacity(probes.len());
        for p in probes {
            p.expect_dim(self.dim())?;
            let j = self.resolvent.apply(p);
            let w = p - &j;
            pairs.push((j, w));
        }
        GraphSample::new(pairs)
    }
}

/// Monotonicity slack for sampled graphs.
pub const GRAPH_MONOTONE_TOL: f64 = 1e-9;

/// Finite sample of an operator graph: points paired with operator values.
#[derive(Clone, Debug)]
pub struct GraphSample {
    pairs: Vec<(Vector, Vector)>,
}

impl GraphSample {
    /// Validates pairwise monotonicity before accepting the sample.
    pub fn new(pairs: Vec<(Vector, Vector)>) -> Result<Self> {
        for i in 0..pairs.len() {
            for j in (i + 1)..pairs.len() {
                let dx = &pairs[i].0 - &pairs[j].0;
                let dv = &pairs[i].1 - &pairs[j].1;
                let inner = dx.dot(&dv);
                if inner < -GRAPH_MONOTONE_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "graph sample not monotone: <dx, dv> = {inner} for pair ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(Vector, Vector)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn push_checked(&mut self, point: Vector, value: Vector) -> Result<()> {
        for (x, v) in &self.pairs {
            let inner = (&point - x).dot(&(&value - v));
            if inner < -GRAPH_MONOTONE_TOL {
                return Err(Error::InvalidParameter(format!(
                    "new pair breaks monotonicity: <dx, dv> = {inner}"
                )));
            }
        }
        self.pairs.push((point, value));
        Ok(())
    }
}

/// Graph sample of an operator view at the given probes.
pub fn minty_graph_sample(view: &MonotoneOperatorView, probes: &[Vector]) -> Result<GraphSample> {
    view.minty_sample(probes)
}

// ---------------------------------------------------------------------------
// Fitzpatrick lower bounds
// ---------------------------------------------------------------------------

/// Certified lower bound of the Fitzpatrick function at `(x, xstar)`:
/// the sup of `<x, a*> + <a, x*> - <a, a*>` restricted to the sampled graph.
pub fn fitzpatrick_estimate(g: &GraphSample, x: &Vector, xstar: &Vector) -> Result<f64> {
    if g.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut best = f64::NEG_INFINITY;
    for (a, astar) in g.pairs() {
        let term = x.dot(astar) + a.dot(xstar) - a.dot(astar);
        if term > best {
            best = term;
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Rectangularity certificates for linear operators
// ---------------------------------------------------------------------------

/// Directions with `||M x||` below this carry no Rayleigh-type constraint.
pub const GAMMA_KERNEL_CUTOFF: f64 = 1e-12;

/// Estimates `gamma = inf <x, Mx> / ||Mx||^2` over unit directions.
///
/// Samples deterministic sphere directions plus the eigenvector directions
/// of the symmetric part. Returns `+inf` when `M` vanishes on every sample
/// (trivially rectangular). A value near zero signals non-rectangularity.
pub fn rectangularity_gamma_estimate(m: &LinearMonotoneOperator, n_samples: usize) -> Result<f64> {
    if n_samples < 1 {
        return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
    }
    let mut dirs = sphere_directions(m.dim(), n_samples);
    dirs.extend(m.symmetric_eigenvector_directions());

    let mut best = f64::INFINITY;
    for x in &dirs {
        let mx = m.apply(x);
        let denom = mx.norm_sq();
        if denom.sqrt() <= GAMMA_KERNEL_CUTOFF {
            continue;
        }
        let quot = x.dot(&mx) / denom;
        if quot < best {
            best = quot;
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Sampled firm-nonexpansiveness certificate
// ---------------------------------------------------------------------------

/// Worst sampled violations of the three equivalent firm-nonexpansiveness
/// inequalities.
#[derive(Clone, Debug)]
pub struct FirmnessReport {
    /// `||Tx-Ty||^2 - <x-y, Tx-Ty>`, positive when violated.
    pub worst_direct: f64,
    /// Same inequality for the complement `Id - T`.
    pub worst_complement: f64,
    /// `||(2T-Id)x - (2T-Id)y|| - ||x-y||`, positive when violated.
    pub worst_reflected: f64,
    pub samples: usize,
    pub tolerance: f64,
}

impl FirmnessReport {
    pub fn worst(&self) -> f64 {
        self.worst_direct
            .max(self.worst_complement)
            .max(self.worst_reflected)
    }

    pub fn pass(&self) -> bool {
        self.worst() <= self.tolerance
    }
}

/// Samples `pairs` random pairs in `region` and reports the worst violation
/// of each firm-nonexpansiveness characterization.
pub fn check_firmly_nonexpansive(
    map: &dyn PointMap,
    region: &SampleBox,
    pairs: usize,
    rng: &mut ChaCha8Rng,
) -> FirmnessReport {
    assert_eq!(region.dim(), map.dim());
    let mut report = FirmnessReport {
        worst_direct: f64::NEG_INFINITY,
        worst_complement: f64::NEG_INFINITY,
        worst_reflected: f64::NEG_INFINITY,
        samples: pairs,
        tolerance: FIRMNESS_TOL,
    };
    for _ in 0..pairs {
        let x = sample_box(rng, region);
        let y = sample_box(rng, region);
        let tx = map.apply(&x);
        let ty = map.apply(&y);
        let dxy = &x - &y;
        let dt = &tx - &ty;

        let direct = dt.norm_sq() - dxy.dot(&dt);
        let dc = &dxy - &dt; // (Id-T)x - (Id-T)y
        let complement = dc.norm_sq() - dxy.dot(&dc);
        let reflected = (&dt.scale(2.0) - &dxy).norm() - dxy.norm();

        report.worst_direct = report.worst_direct.max(direct);
        report.worst_complement = report.worst_complement.max(complement);
        report.worst_reflected = report.worst_reflected.max(reflected);
    }
    report
}
