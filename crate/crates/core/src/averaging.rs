//! Convex combinations of firmly nonexpansive maps and the resolvent
//! average.
//!
//! The averaged operator behind a resolvent average is set-valued in
//! general, so it is never materialized as a function; everything is
//! expressed through the averaged resolvent and its Minty samples.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::operators::{DynMap, MonotoneOperatorView, PointMap};
use crate::prox_calculus::ProxOracle;
use crate::{Error, Result, Vector};

/// Weight-sum slack for convex combinations.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Positive weights summing to one, attached to maps of a common dimension.
#[derive(Clone)]
pub struct WeightedFamily {
    members: Vec<DynMap>,
    weights: Vec<f64>,
}

impl WeightedFamily {
    pub fn new(members: Vec<DynMap>, weights: Vec<f64>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidParameter("empty family".into()));
        }
        if members.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: members.len(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "weights must be strictly positive, got {weights:?}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "weights must sum to one, got {sum}"
            )));
        }
        let dim = members[0].dim();
        for m in &members[1..] {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.dim(),
                });
            }
        }
        Ok(Self { members, weights })
    }

    pub fn pair(a: DynMap, b: DynMap) -> Result<Self> {
        Self::new(vec![a, b], vec![0.5, 0.5])
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn members(&self) -> &[DynMap] {
        &self.members
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Pointwise convex combination of the family members.
#[derive(Clone)]
pub struct AveragedMap {
    family: WeightedFamily,
}

impl PointMap for AveragedMap {
    fn dim(&self) -> usize {
        self.family.dim()
    }

    fn apply(&self, x: &Vector) -> Vector {
        let mut out = Vector::zeros(self.dim());
        for (m, &w) in self.family.members.iter().zip(&self.family.weights) {
            out = out.axpy(w, &m.apply(x));
        }
        out
    }

    fn descriptor(&self) -> String {
        let parts: Vec<String> = self
            .family
            .members
            .iter()
            .zip(&self.family.weights)
            .map(|(m, w)| format!("{w} * ({})", m.descriptor()))
            .collect();
        format!("average: {}", parts.join(" + "))
    }
}

/// `x -> sum_i w_i T_i(x)`; firmly nonexpansive whenever the members are.
pub fn average_maps(family: &WeightedFamily) -> AveragedMap {
    AveragedMap { family: family.clone() }
}

/// Operator whose resolvent is the weighted average of the members'
/// resolvents. Domain and range are reachable through Minty samples of the
/// view: `ran J_A` samples `dom A` and `ran (Id - J_A)` samples `ran A`.
pub fn resolvent_average(family: &WeightedFamily) -> MonotoneOperatorView {
    MonotoneOperatorView::from_resolvent(Arc::new(average_maps(family)))
}

/// PSD tolerance on inputs of the matrix resolvent average.
pub const PSD_INPUT_TOL: f64 = 1e-10;
/// PSD tolerance on its output.
pub const PSD_OUTPUT_TOL: f64 = 1e-9;

fn check_psd(m: &DMatrix<f64>, tol: f64, role: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidParameter(format!(
            "{role} matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let asym = (m - m.transpose()).norm();
    if asym > tol * (1.0 + m.norm()) {
        return Err(Error::InvalidParameter(format!(
            "{role} matrix not symmetric: asymmetry {asym}"
        )));
    }
    let sym = (m + m.transpose()) * 0.5;
    let min_eig = sym
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -tol {
        return Err(Error::InvalidParameter(format!(
            "{role} matrix not PSD: min eigenvalue {min_eig}"
        )));
    }
    Ok(())
}

/// Resolvent average of symmetric PSD matrices:
/// `(sum_i w_i (I + A_i)^{-1})^{-1} - I`.
pub fn matrix_resolvent_average(
    mats: &[DMatrix<f64>],
    weights: &[f64],
) -> Result<DMatrix<f64>> {
    if mats.is_empty() {
        return Err(Error::InvalidParameter("empty matrix family".into()));
    }
    if mats.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: mats.len(),
            got: weights.len(),
        });
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidParameter("weights must be positive".into()));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidParameter(format!(
            "weights must sum to one, got {sum}"
        )));
    }
    let n = mats[0].nrows();
    let mut mixed = DMatrix::<f64>::zeros(n, n);
    for (m, &w) in mats.iter().zip(weights) {
        check_psd(m, PSD_INPUT_TOL, "input")?;
        if m.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: m.nrows(),
            });
        }
        let resolvent = (DMatrix::identity(n, n) + m)
            .try_inverse()
            .ok_or_else(|| Error::Numerical("I + A is singular".into()))?;
        mixed += resolvent * w;
    }
    let averaged = mixed
        .try_inverse()
        .ok_or_else(|| Error::Numerical("averaged resolvent is singular".into()))?
        - DMatrix::identity(n, n);
    // Symmetrize away the inversion roundoff, then certify.
    let out = (&averaged + averaged.transpose()) * 0.5;
    check_psd(&out, PSD_OUTPUT_TOL, "output")?;
    Ok(out)
}

/// Prox of the proximal average: the weighted average of the member proxes.
/// The averaged function itself is never evaluated.
pub fn prox_of_proximal_average(
    members: &[ProxOracle],
    weights: &[f64],
) -> Result<ProxOracle> {
    let maps: Vec<DynMap> = members.iter().map(|o| o.map().clone()).collect();
    let family = WeightedFamily::new(maps, weights.to_vec())?;
    Ok(ProxOracle::from_parts(Arc::new(average_maps(&family)), None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_sets::BoxSet;
    use crate::operators::{
        check_firmly_nonexpansive, Identity, LinearMonotoneOperator, Projection,
    };
    use crate::sampling::{rng, sample_box, SampleBox};

    fn v(coords: &[f64]) -> Vector {
        Vector::from_raw(coords.to_vec())
    }

    fn interval_map(lo: f64, hi: f64) -> DynMap {
        Arc::new(Projection::new(Arc::new(BoxSet::interval(lo, hi).unwrap())))
    }

    #[test]
    fn family_validation() {
        let id: DynMap = Arc::new(Identity { dim: 1 });
        assert!(WeightedFamily::new(vec![id.clone()], vec![0.5]).is_err());
        assert!(WeightedFamily::new(vec![id.clone(), id.clone()], vec![0.5, -0.5]).is_err());
        assert!(WeightedFamily::new(vec![id.clone(), id.clone()], vec![0.7, 0.3]).is_ok());
        let id2: DynMap = Arc::new(Identity { dim: 2 });
        assert!(WeightedFamily::new(vec![id, id2], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn average_of_identities_is_identity() {
        let id: DynMap = Arc::new(Identity { dim: 2 });
        let fam = WeightedFamily::pair(id.clone(), id).unwrap();
        let t = average_maps(&fam);
        let x = v(&[0.25, -3.0]);
        assert_eq!(t.apply(&x).coords(), x.coords());
    }

    #[test]
    fn interval_average_values() {
        // T = 1/2 P_[0,1] + 1/2 P_[2,3]; values checked against the
        // distances minimized by each projection separately.
        let fam = WeightedFamily::pair(interval_map(0.0, 1.0), interval_map(2.0, 3.0)).unwrap();
        let t = average_maps(&fam);
        assert_eq!(t.apply(&v(&[0.0]))[0], 1.0);
        assert_eq!(t.apply(&v(&[5.0]))[0], 2.0);
        // Brute-force distance minimizers at x = 0: p1 = 0, p2 = 2.
        let scan = |lo: f64, hi: f64, x: f64| {
            let mut best = lo;
            let mut bd = f64::INFINITY;
            for k in 0..=10_000 {
                let u = lo + (hi - lo) * (k as f64) / 10_000.0;
                if (u - x).abs() < bd {
                    bd = (u - x).abs();
                    best = u;
                }
            }
            best
        };
        assert_eq!(0.5 * scan(0.0, 1.0, 0.0) + 0.5 * scan(2.0, 3.0, 0.0), 1.0);
        assert_eq!(0.5 * scan(0.0, 1.0, 5.0) + 0.5 * scan(2.0, 3.0, 5.0), 2.0);
    }

    #[test]
    fn averages_stay_firmly_nonexpansive() {
        let fams = [
            WeightedFamily::pair(interval_map(0.0, 1.0), interval_map(2.0, 3.0)).unwrap(),
            WeightedFamily::new(
                vec![
                    interval_map(-1.0, 0.0),
                    interval_map(0.5, 2.0),
                    Arc::new(Identity { dim: 1 }),
                ],
                vec![0.2, 0.5, 0.3],
            )
            .unwrap(),
        ];
        for (k, fam) in fams.iter().enumerate() {
            let t = average_maps(fam);
            let mut r = rng(200 + k as u64);
            let report =
                check_firmly_nonexpansive(&t, &SampleBox::cube(1, 5.0), 10_000, &mut r);
            assert!(report.pass(), "worst {}", report.worst());
        }
    }

    #[test]
    fn resolvent_average_of_equal_members_reproduces_graph() {
        let j = interval_map(0.0, 1.0);
        let fam = WeightedFamily::new(vec![j.clone(), j.clone()], vec![0.25, 0.75]).unwrap();
        let avg = resolvent_average(&fam);
        let base = MonotoneOperatorView::from_resolvent(j);
        let probes: Vec<Vector> = (-10..=10).map(|k| v(&[k as f64 * 0.7])).collect();
        let ga = avg.minty_sample(&probes).unwrap();
        let gb = base.minty_sample(&probes).unwrap();
        for (pa, pb) in ga.pairs().iter().zip(gb.pairs()) {
            assert!(pa.0.distance(&pb.0) <= 1e-12);
            assert!(pa.1.distance(&pb.1) <= 1e-12);
        }
    }

    #[test]
    fn resolvent_average_of_zero_and_identity_matrices() {
        // A1 = 0, A2 = I: J_A = 3/4 Id and the recovered operator is Id/3.
        let zero = LinearMonotoneOperator::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let eye = LinearMonotoneOperator::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let fam = WeightedFamily::pair(
            Arc::new(zero.resolvent_map().unwrap()),
            Arc::new(eye.resolvent_map().unwrap()),
        )
        .unwrap();
        let avg = resolvent_average(&fam);
        let x = v(&[2.0, -4.0]);
        let jx = avg.resolvent(&x);
        assert!(jx.distance(&x.scale(0.75)) < 1e-12);
        let g = avg.minty_sample(&[x.clone()]).unwrap();
        let (point, value) = &g.pairs()[0];
        // (3/4 x, 1/4 x) with 1/4 x = (1/3) * (3/4 x).
        assert!(point.distance(&x.scale(0.75)) < 1e-12);
        assert!(value.distance(&x.scale(0.25)) < 1e-12);
        assert!(value.distance(&point.scale(1.0 / 3.0)) < 1e-12);
    }

    #[test]
    fn resolvent_average_of_normal_cones_spans_the_middle_interval() {
        let fam =
            WeightedFamily::pair(interval_map(0.0, 1.0), interval_map(2.0, 3.0)).unwrap();
        let avg = resolvent_average(&fam);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..=10_000 {
            let x = -50.0 + 100.0 * (k as f64) / 10_000.0;
            let jx = avg.resolvent(&v(&[x]))[0];
            assert!((1.0 - 1e-12..=2.0 + 1e-12).contains(&jx));
            lo = lo.min(jx);
            hi = hi.max(jx);
        }
        // Endpoints are attained at the sweep extremes.
        assert!(lo <= 1.0 + 1e-9 && hi >= 2.0 - 1e-9);
    }

    #[test]
    fn matrix_average_idempotent_on_equal_arguments() {
        let a = DMatrix::from_row_slice(2, 2, &[1.5, 0.25, 0.25, 0.75]);
        let out = matrix_resolvent_average(&[a.clone(), a.clone()], &[0.5, 0.5]).unwrap();
        assert!((out - a).norm() < 1e-12);
    }

    #[test]
    fn matrix_average_zero_and_identity_gives_third() {
        let zero = DMatrix::zeros(2, 2);
        let eye = DMatrix::identity(2, 2);
        let out = matrix_resolvent_average(&[zero, eye.clone()], &[0.5, 0.5]).unwrap();
        assert!((out - eye * (1.0 / 3.0)).norm() < 1e-12);
    }

    #[test]
    fn matrix_average_coordinatewise_diag() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let out = matrix_resolvent_average(&[a, b], &[0.5, 0.5]).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0 / 3.0, 0.0, 0.0, 1.0 / 3.0]);
        assert!((out - expected).norm() < 1e-12);
    }

    #[test]
    fn matrix_average_rejects_non_psd() {
        let bad = DMatrix::from_row_slice(1, 1, &[-1.0]);
        let eye = DMatrix::identity(1, 1);
        assert!(matrix_resolvent_average(&[bad, eye], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn matrix_average_output_is_psd() {
        let mut r = rng(41);
        for _ in 0..25 {
            let q = DMatrix::from_fn(3, 3, |_, _| {
                sample_box(&mut r, &SampleBox::cube(1, 1.0))[0]
            });
            let a = &q * q.transpose();
            let q2 = DMatrix::from_fn(3, 3, |_, _| {
                sample_box(&mut r, &SampleBox::cube(1, 1.0))[0]
            });
            let b = &q2 * q2.transpose();
            let out = matrix_resolvent_average(&[a, b], &[0.3, 0.7]).unwrap();
            let min_eig = out
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(min_eig >= -PSD_OUTPUT_TOL);
        }
    }

    #[test]
    fn prox_average_of_single_member_is_that_prox() {
        let p = ProxOracle::abs(2);
        let avg = prox_of_proximal_average(std::slice::from_ref(&p), &[1.0]).unwrap();
        let x = v(&[3.0, -0.4]);
        assert_eq!(avg.prox(&x).coords(), p.prox(&x).coords());
    }

    #[test]
    fn prox_average_of_quadratics() {
        let p1 = ProxOracle::quadratic(1.0, Vector::zeros(1)).unwrap();
        let p2 = ProxOracle::quadratic(0.0, Vector::zeros(1)).unwrap();
        let avg = prox_of_proximal_average(&[p1, p2], &[0.5, 0.5]).unwrap();
        for x in [-2.0, 0.0, 1.0, 8.0] {
            let u = avg.prox(&v(&[x]));
            assert!((u[0] - 0.75 * x).abs() < 1e-14);
        }
    }

    #[test]
    fn prox_average_of_indicators_matches_projection_average() {
        let p1 = ProxOracle::indicator(Arc::new(BoxSet::interval(0.0, 1.0).unwrap()));
        let p2 = ProxOracle::indicator(Arc::new(BoxSet::interval(2.0, 3.0).unwrap()));
        let avg = prox_of_proximal_average(&[p1, p2], &[0.5, 0.5]).unwrap();
        let fam =
            WeightedFamily::pair(interval_map(0.0, 1.0), interval_map(2.0, 3.0)).unwrap();
        let t = average_maps(&fam);
        for x in [-1.0, 0.0, 0.5, 1.5, 5.0] {
            assert_eq!(avg.prox(&v(&[x])).coords(), t.apply(&v(&[x])).coords());
        }
        // Firm nonexpansiveness of the averaged prox.
        let mut r = rng(50);
        let report =
            check_firmly_nonexpansive(&avg, &SampleBox::cube(1, 5.0), 10_000, &mut r);
        assert!(report.pass());
    }

    #[test]
    fn surjectivity_propagates_from_identity_member() {
        // T = 1/2 Id + 1/2 P_[0,1] is surjective; solve T x = y per target.
        let fam = WeightedFamily::pair(
            Arc::new(Identity { dim: 1 }),
            interval_map(0.0, 1.0),
        )
        .unwrap();
        let t = average_maps(&fam);
        for k in 0..=100 {
            let y = -5.0 + 10.0 * (k as f64) / 100.0;
            // Piecewise inverse of T.
            let x = if y < 0.0 {
                2.0 * y
            } else if y <= 1.0 {
                y
            } else {
                2.0 * y - 1.0
            };
            assert!((t.apply(&v(&[x]))[0] - y).abs() < 1e-12);
        }
    }
}
