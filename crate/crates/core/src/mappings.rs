//! Families `(T_n)` of nonexpansive mappings over the shipped models, with a
//! common fixed point and sampled checks of the properties the rates rely on.

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::geometry::{AxiomReport, GeodesicSpace, GeometryError, ModelKind, Point, SampleSpec, SpaceModel, ViolationTracker};
use crate::rates::ChiT;
use crate::scalar::Scalar;
use crate::schedules::Sequence;

/// Default tolerance of the inner resolvent solve.
pub const RESOLVENT_TOL: f64 = 1e-12;
/// Default iteration budget of the inner resolvent solve.
pub const RESOLVENT_MAX_ITER: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MappingError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("resolvent solve did not converge after {iterations} iterations (residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// A single nonexpansive map.
#[derive(Debug, Clone, PartialEq)]
pub enum SingleMap<T> {
    Identity,
    /// Isometry fixing the model origin. In Euclidean space it rotates the
    /// first coordinate plane, in the disk it is `z ↦ e^{iθ} z`, and on the
    /// tripod it cycles the legs by `round(3θ / 2π)` steps.
    Rotation { angle: T },
    /// Metric projection onto the closed ball `B(center, radius)`.
    BallProjection { center: Point<T>, radius: T },
}

/// Proper convex lower semicontinuous functions with closed-form proximal maps.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexFunction<T> {
    /// `y ↦ ½ d²(y, center)`
    HalfSquaredNorm { center: Point<T> },
    /// Indicator function of `B(center, radius)`.
    IndicatorOfBall { center: Point<T>, radius: T },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MappingFamily<T> {
    Identity,
    /// `T_n = T` for all `n`.
    Constant(SingleMap<T>),
    Rotation { angle: T },
    MetricProjection { center: Point<T>, radius: T },
    /// `T_n = prox_{γ_n f}`.
    Proximal { function: ConvexFunction<T>, gamma: Sequence },
    /// `T_n = J_{γ_n}`, the resolvent of the base map: the unique `z` with
    /// `z = comb(x, T z, γ_n / (1 + γ_n))`.
    Resolvent { base: SingleMap<T>, gamma: Sequence, inner_tol: T, max_iter: usize },
}

impl<T: Scalar> SingleMap<T> {
    pub fn apply(&self, space: &SpaceModel<T>, x: &Point<T>) -> Result<Point<T>, MappingError> {
        space.validate(x)?;
        match self {
            SingleMap::Identity => Ok(x.clone()),
            SingleMap::Rotation { angle } => rotate(space, *angle, x),
            SingleMap::BallProjection { center, radius } => project_onto_ball(space, center, *radius, x),
        }
    }

    pub fn fixed_point(&self, space: &SpaceModel<T>) -> Point<T> {
        match self {
            SingleMap::Identity | SingleMap::Rotation { .. } => space.origin(),
            SingleMap::BallProjection { center, .. } => center.clone(),
        }
    }

    fn validate(&self, space: &SpaceModel<T>) -> Result<(), MappingError> {
        match self {
            SingleMap::Identity => Ok(()),
            SingleMap::Rotation { angle } => {
                if !angle.is_finite() {
                    return Err(MappingError::InvalidInput(format!("rotation angle {angle} is not finite")));
                }
                if let ModelKind::Euclidean(d) = space.kind() {
                    if d < 2 {
                        return Err(MappingError::InvalidInput("rotations need a Euclidean dimension of at least 2".into()));
                    }
                }
                Ok(())
            }
            SingleMap::BallProjection { center, radius } => {
                space.validate(center)?;
                check_radius(*radius)
            }
        }
    }
}

fn check_radius<T: Scalar>(radius: T) -> Result<(), MappingError> {
    if radius > T::zero() && radius.is_finite() {
        Ok(())
    } else {
        Err(MappingError::InvalidInput(format!("ball radius {radius} must be positive")))
    }
}

fn rotate<T: Scalar>(space: &SpaceModel<T>, angle: T, x: &Point<T>) -> Result<Point<T>, MappingError> {
    let (s, c) = angle.sin_cos();
    match x {
        Point::Euclidean(v) if v.len() >= 2 => {
            let mut out = v.clone();
            out[0] = c * v[0] - s * v[1];
            out[1] = s * v[0] + c * v[1];
            Ok(Point::Euclidean(out))
        }
        Point::Disk { a, b } => Ok(Point::Disk { a: c * *a - s * *b, b: s * *a + c * *b }),
        Point::Tripod { leg, len } => {
            let steps = (angle * T::lit(3.0) / T::TAU()).round().to_i64().unwrap_or(0).rem_euclid(3) as u8;
            Ok(Point::tripod((*leg + steps) % 3, *len)?)
        }
        _ => Err(MappingError::InvalidInput(format!("cannot rotate in {}", space.label()))),
    }
}

// The projection onto a closed ball is the point at distance `radius` from the
// center on the geodesic towards `x`.
fn project_onto_ball<T: Scalar>(space: &SpaceModel<T>, center: &Point<T>, radius: T, x: &Point<T>) -> Result<Point<T>, MappingError> {
    let d = space.dist(center, x)?;
    if d <= radius {
        Ok(x.clone())
    } else {
        Ok(space.comb(center, x, radius / d)?)
    }
}

fn gamma_at<T: Scalar>(gamma: &Sequence, n: u64) -> Result<T, MappingError> {
    let g: T = gamma.value(n);
    if g > T::zero() && g.is_finite() {
        Ok(g)
    } else {
        Err(MappingError::InvalidInput(format!("γ_{n} = {g} must be positive")))
    }
}

impl<T: Scalar> MappingFamily<T> {
    /// Checks parameters against the model.
    pub fn validate(&self, space: &SpaceModel<T>) -> Result<(), MappingError> {
        match self {
            MappingFamily::Identity => Ok(()),
            MappingFamily::Constant(map) => map.validate(space),
            MappingFamily::Rotation { angle } => SingleMap::Rotation { angle: *angle }.validate(space),
            MappingFamily::MetricProjection { center, radius } => {
                SingleMap::BallProjection { center: center.clone(), radius: *radius }.validate(space)
            }
            MappingFamily::Proximal { function, .. } => match function {
                ConvexFunction::HalfSquaredNorm { center } => Ok(space.validate(center)?),
                ConvexFunction::IndicatorOfBall { center, radius } => {
                    space.validate(center)?;
                    check_radius(*radius)
                }
            },
            MappingFamily::Resolvent { base, inner_tol, max_iter, .. } => {
                if !(*inner_tol > T::zero()) || *max_iter == 0 {
                    return Err(MappingError::InvalidInput("resolvent needs a positive tolerance and iteration budget".into()));
                }
                base.validate(space)
            }
        }
    }

    /// `T_n(x)`.
    pub fn apply(&self, space: &SpaceModel<T>, n: u64, x: &Point<T>) -> Result<Point<T>, MappingError> {
        match self {
            MappingFamily::Identity => {
                space.validate(x)?;
                Ok(x.clone())
            }
            MappingFamily::Constant(map) => map.apply(space, x),
            MappingFamily::Rotation { angle } => SingleMap::Rotation { angle: *angle }.apply(space, x),
            MappingFamily::MetricProjection { center, radius } => {
                SingleMap::BallProjection { center: center.clone(), radius: *radius }.apply(space, x)
            }
            MappingFamily::Proximal { function, gamma } => match function {
                ConvexFunction::HalfSquaredNorm { center } => {
                    let g: T = gamma_at(gamma, n)?;
                    Ok(space.comb(x, center, g / (T::one() + g))?)
                }
                ConvexFunction::IndicatorOfBall { center, radius } => {
                    space.validate(x)?;
                    project_onto_ball(space, center, *radius, x)
                }
            },
            MappingFamily::Resolvent { base, gamma, inner_tol, max_iter } => {
                let g: T = gamma_at(gamma, n)?;
                solve_resolvent(space, base, g, x, *inner_tol, *max_iter)
            }
        }
    }

    /// A common fixed point of all `T_n`.
    pub fn fixed_point(&self, space: &SpaceModel<T>) -> Point<T> {
        match self {
            MappingFamily::Identity | MappingFamily::Rotation { .. } => space.origin(),
            MappingFamily::Constant(map) => map.fixed_point(space),
            MappingFamily::MetricProjection { center, .. } => center.clone(),
            MappingFamily::Proximal { function, .. } => match function {
                ConvexFunction::HalfSquaredNorm { center } | ConvexFunction::IndicatorOfBall { center, .. } => center.clone(),
            },
            MappingFamily::Resolvent { base, .. } => base.fixed_point(space),
        }
    }

    /// Whether `T_n` actually varies with `n`.
    pub fn depends_on_n(&self) -> bool {
        matches!(
            self,
            MappingFamily::Proximal { function: ConvexFunction::HalfSquaredNorm { .. }, .. } | MappingFamily::Resolvent { .. }
        )
    }

    /// The γ-sequence the maps are parametrized by, if any.
    pub fn gamma(&self) -> Option<&Sequence> {
        match self {
            MappingFamily::Proximal { gamma, .. } | MappingFamily::Resolvent { gamma, .. } => Some(gamma),
            _ => None,
        }
    }

    /// How `χ_T` is obtained: zero for `n`-independent families, from the
    /// modulus of `(γ_n)` for families satisfying Condition (C1).
    pub fn chi_t(&self) -> ChiT {
        if self.depends_on_n() {
            ChiT::FromGamma
        } else {
            ChiT::Zero
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            MappingFamily::Identity => "identity",
            MappingFamily::Constant(_) => "constant",
            MappingFamily::Rotation { .. } => "rotation",
            MappingFamily::MetricProjection { .. } => "projection",
            MappingFamily::Proximal { .. } => "proximal",
            MappingFamily::Resolvent { .. } => "resolvent",
        }
    }
}

/// Banach iteration of the contraction `z ↦ comb(x, T z, γ/(1+γ))`, started
/// at `x`; returns a `z` whose residual `d(z, comb(x, T z, γ/(1+γ)))` is at
/// most the tolerance (floored at the scalar's resolution).
fn solve_resolvent<T: Scalar>(
    space: &SpaceModel<T>,
    base: &SingleMap<T>,
    gamma: T,
    x: &Point<T>,
    tol: T,
    max_iter: usize,
) -> Result<Point<T>, MappingError> {
    let t = gamma / (T::one() + gamma);
    let tol = tol.max(T::point_eq_tol());
    let step = |z: &Point<T>| -> Result<Point<T>, MappingError> { Ok(space.comb(x, &base.apply(space, z)?, t)?) };
    let mut z = x.clone();
    let mut residual = T::infinity();
    for _ in 0..=max_iter {
        let next = step(&z)?;
        residual = space.dist(&z, &next)?;
        if residual <= tol {
            return Ok(z);
        }
        z = next;
    }
    Err(MappingError::SolverFailure { iterations: max_iter, residual: residual.to_f64_lossy() })
}

/// Outcome of a sampled mapping check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingReport {
    #[serde(flatten)]
    pub report: AxiomReport,
    pub family: String,
    pub n_max: u64,
    /// Largest observed `d(T_n x, T_n y) / d(x, y)` (nonexpansiveness checks only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_lipschitz_ratio: Option<f64>,
}

impl MappingReport {
    pub fn pass(&self) -> bool {
        self.report.pass
    }
}

fn indices<T: Scalar>(family: &MappingFamily<T>, n_max: u64) -> u64 {
    if family.depends_on_n() {
        n_max
    } else {
        0
    }
}

/// Samples pairs `(x, y)` and checks `d(T_n x, T_n y) ≤ d(x, y) + tol` for all `n ≤ n_max`.
pub fn check_nonexpansive<T: Scalar>(
    family: &MappingFamily<T>,
    space: &SpaceModel<T>,
    n_max: u64,
    spec: &SampleSpec,
    tol: f64,
) -> Result<MappingReport, MappingError> {
    family.validate(space)?;
    let mut sampler = spec.sampler("nonexpansive");
    let radius = T::lit(spec.radius);
    let mut tracker = ViolationTracker::new("nonexpansive", tol);
    let mut ratio = 0.0f64;
    for _ in 0..spec.count {
        let x = space.sample_point(&mut sampler, radius);
        let y = space.sample_point(&mut sampler, radius);
        let dxy = space.dist(&x, &y)?.to_f64_lossy();
        for n in 0..=indices(family, n_max) {
            let (tx, ty) = (family.apply(space, n, &x)?, family.apply(space, n, &y)?);
            let dt = space.dist(&tx, &ty)?.to_f64_lossy();
            if dxy > 1e-9 {
                ratio = ratio.max(dt / dxy);
            }
            tracker.observe(dt - dxy, || json!({ "n": n, "x": x.to_json(), "y": y.to_json() }));
        }
    }
    Ok(MappingReport { report: tracker.finish(), family: family.label().into(), n_max, max_lipschitz_ratio: Some(ratio) })
}

/// Samples `x` and checks `d(T_n x, T_m x) ≤ (|γ_m − γ_n| / γ_n)·d(T_n x, x) + tol` for all `n, m ≤ n_max`.
pub fn check_condition_c1<T: Scalar>(
    family: &MappingFamily<T>,
    space: &SpaceModel<T>,
    gammas: &Sequence,
    n_max: u64,
    spec: &SampleSpec,
    tol: f64,
) -> Result<MappingReport, MappingError> {
    family.validate(space)?;
    let gamma: Vec<f64> = (0..=n_max).map(|n| gamma_at::<f64>(gammas, n)).collect::<Result<_, _>>()?;
    let mut sampler = spec.sampler("condition_c1");
    let radius = T::lit(spec.radius);
    let mut tracker = ViolationTracker::new("condition_c1", tol);
    for _ in 0..spec.count {
        let x = space.sample_point(&mut sampler, radius);
        let images: Vec<Point<T>> = (0..=n_max).map(|n| family.apply(space, n, &x)).collect::<Result<_, _>>()?;
        let moves: Vec<f64> = images.iter().map(|tx| space.dist(tx, &x).map(|d| d.to_f64_lossy())).collect::<Result<_, _>>()?;
        for n in 0..=n_max as usize {
            for m in 0..=n_max as usize {
                let lhs = space.dist(&images[n], &images[m])?.to_f64_lossy();
                let rhs = (gamma[m] - gamma[n]).abs() / gamma[n] * moves[n];
                tracker.observe(lhs - rhs, || json!({ "n": n, "m": m, "x": x.to_json() }));
            }
        }
    }
    Ok(MappingReport { report: tracker.finish(), family: family.label().into(), n_max, max_lipschitz_ratio: None })
}

/// Finite-horizon membership in the approximate fixed points inside a ball:
/// `d(x, T_n x) ≤ 1/k` for all `n ≤ n_max` and `d(x, p) ≤ K`.
pub fn check_afp_membership<T: Scalar>(
    family: &MappingFamily<T>,
    space: &SpaceModel<T>,
    x: &Point<T>,
    p: &Point<T>,
    k_bound: u64,
    k: u64,
    n_max: u64,
) -> Result<bool, MappingError> {
    if k == 0 {
        return Err(MappingError::InvalidInput("k must be at least 1".into()));
    }
    if space.dist(x, p)?.to_f64_lossy() > k_bound as f64 + 1e-9 {
        return Ok(false);
    }
    let bound = 1.0 / k as f64;
    for n in 0..=indices(family, n_max) {
        if space.dist(x, &family.apply(space, n, x)?)?.to_f64_lossy() > bound {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn harmonic_gamma() -> Sequence {
        "ratio:1,2,1,1".parse().unwrap()
    }

    fn e2(x: f64, y: f64) -> Point<f64> {
        Point::euclidean(vec![x, y])
    }

    fn spaces() -> Vec<SpaceModel<f64>> {
        vec![SpaceModel::euclidean(2).unwrap(), SpaceModel::poincare_disk(), SpaceModel::tripod()]
    }

    fn centers(space: &SpaceModel<f64>) -> Point<f64> {
        match space.kind() {
            ModelKind::Euclidean(_) => e2(0.2, 0.1),
            ModelKind::PoincareDisk => Point::disk(0.1, 0.05).unwrap(),
            ModelKind::Tripod => Point::tripod(2, 0.4).unwrap(),
        }
    }

    fn shipped(space: &SpaceModel<f64>) -> Vec<MappingFamily<f64>> {
        let c = centers(space);
        vec![
            MappingFamily::Identity,
            MappingFamily::Rotation { angle: 2.0 * std::f64::consts::FRAC_PI_3 },
            MappingFamily::MetricProjection { center: c.clone(), radius: 0.3 },
            MappingFamily::Constant(SingleMap::BallProjection { center: c.clone(), radius: 0.5 }),
            MappingFamily::Proximal { function: ConvexFunction::HalfSquaredNorm { center: c.clone() }, gamma: harmonic_gamma() },
            MappingFamily::Proximal { function: ConvexFunction::IndicatorOfBall { center: c.clone(), radius: 0.3 }, gamma: harmonic_gamma() },
            MappingFamily::Resolvent {
                base: SingleMap::BallProjection { center: c, radius: 0.3 },
                gamma: harmonic_gamma(),
                inner_tol: RESOLVENT_TOL,
                max_iter: RESOLVENT_MAX_ITER,
            },
            MappingFamily::Resolvent {
                base: SingleMap::Rotation { angle: 2.0 * std::f64::consts::FRAC_PI_3 },
                gamma: harmonic_gamma(),
                inner_tol: RESOLVENT_TOL,
                max_iter: RESOLVENT_MAX_ITER,
            },
        ]
    }

    fn close(a: &Point<f64>, b: &Point<f64>) -> bool {
        a.coords_f64().iter().zip(b.coords_f64()).all(|(x, y)| (x - y).abs() < 1e-9)
    }

    #[test]
    fn apply_examples() {
        let e = SpaceModel::euclidean(2).unwrap();
        assert_eq!(MappingFamily::Identity.apply(&e, 7, &e2(3.0, 4.0)).unwrap(), e2(3.0, 4.0));
        let prox = MappingFamily::Proximal {
            function: ConvexFunction::HalfSquaredNorm { center: e2(0.0, 0.0) },
            gamma: Sequence::constant(1, 1).unwrap(),
        };
        assert!(close(&prox.apply(&e, 0, &e2(2.0, 0.0)).unwrap(), &e2(1.0, 0.0)));
        let rot = MappingFamily::Rotation { angle: FRAC_PI_2 };
        assert!(close(&rot.apply(&e, 0, &e2(1.0, 0.0)).unwrap(), &e2(0.0, 1.0)));
        let proj = MappingFamily::MetricProjection { center: e2(0.0, 0.0), radius: 1.0 };
        assert!(close(&proj.apply(&e, 0, &e2(3.0, 4.0)).unwrap(), &e2(0.6, 0.8)));
    }

    #[test]
    fn tripod_rotation_cycles_legs() {
        let t = SpaceModel::tripod();
        let rot = MappingFamily::Rotation { angle: 2.0 * std::f64::consts::FRAC_PI_3 };
        let x = Point::tripod(0, 1.5).unwrap();
        assert_eq!(rot.apply(&t, 0, &x).unwrap(), Point::tripod(1, 1.5).unwrap());
        let rot_back = MappingFamily::Rotation { angle: -2.0 * std::f64::consts::FRAC_PI_3 };
        assert_eq!(rot_back.apply(&t, 0, &x).unwrap(), Point::tripod(2, 1.5).unwrap());
    }

    #[test]
    fn hilbert_resolvent_of_rotation_matches_closed_form() {
        // J_γ for A = I − R solves (1+γ)z − γRz = x; compare with a 2×2 solve.
        let e = SpaceModel::euclidean(2).unwrap();
        let theta: f64 = 0.7;
        let fam = MappingFamily::Resolvent {
            base: SingleMap::Rotation { angle: theta },
            gamma: Sequence::constant(3, 2).unwrap(),
            inner_tol: RESOLVENT_TOL,
            max_iter: RESOLVENT_MAX_ITER,
        };
        let (x0, x1) = (0.9, -1.3);
        let g = 1.5;
        let (c, s) = (theta.cos(), theta.sin());
        let (a, b, cc, d) = (1.0 + g - g * c, g * s, -g * s, 1.0 + g - g * c);
        let det = a * d - b * cc;
        let want = e2((d * x0 - b * x1) / det, (a * x1 - cc * x0) / det);
        assert!(close(&fam.apply(&e, 0, &e2(x0, x1)).unwrap(), &want));
    }

    #[test]
    fn resolvent_residual_is_within_tolerance() {
        for space in spaces() {
            for fam in shipped(&space).into_iter().filter(|f| matches!(f, MappingFamily::Resolvent { .. })) {
                let MappingFamily::Resolvent { base, gamma, .. } = &fam else { unreachable!() };
                let mut sampler = SampleSpec::new(3, 1, 2.0).unwrap().sampler("resolvent");
                for n in 0..20 {
                    let x = space.sample_point(&mut sampler, 2.0);
                    let z = fam.apply(&space, n, &x).unwrap();
                    let g: f64 = gamma.value(n);
                    let again = space.comb(&x, &base.apply(&space, &z).unwrap(), g / (1.0 + g)).unwrap();
                    assert!(space.dist(&z, &again).unwrap() <= RESOLVENT_TOL, "{}", space.label());
                }
            }
        }
    }

    #[test]
    fn resolvent_reports_solver_failure() {
        let e = SpaceModel::euclidean(2).unwrap();
        let fam = MappingFamily::Resolvent {
            base: SingleMap::Rotation { angle: 1.0 },
            gamma: Sequence::constant(1, 1).unwrap(),
            inner_tol: 1e-12,
            max_iter: 3,
        };
        match fam.apply(&e, 0, &e2(5.0, 5.0)) {
            Err(MappingError::SolverFailure { iterations: 3, residual }) => assert!(residual > 1e-12),
            other => panic!("expected solver failure, got {other:?}"),
        }
    }

    #[test]
    fn fixed_points_are_common() {
        for space in spaces() {
            for fam in shipped(&space) {
                let p = fam.fixed_point(&space);
                for n in 0..=1000 {
                    let tp = fam.apply(&space, n, &p).unwrap();
                    assert!(space.dist(&tp, &p).unwrap() <= 1e-9, "{} {}", space.label(), fam.label());
                }
            }
        }
    }

    #[test]
    fn shipped_families_are_nonexpansive() {
        let spec = SampleSpec::new(11, 300, 3.0).unwrap();
        for space in spaces() {
            for fam in shipped(&space) {
                let r = check_nonexpansive(&fam, &space, 20, &spec, 1e-9).unwrap();
                assert!(r.pass(), "{} {}: {r:?}", space.label(), fam.label());
            }
        }
    }

    #[test]
    fn rotation_is_an_isometry_and_prox_contracts() {
        let e = SpaceModel::euclidean(2).unwrap();
        let spec = SampleSpec::new(5, 1000, 3.0).unwrap();
        let rot = check_nonexpansive(&MappingFamily::Rotation { angle: 1.234 }, &e, 0, &spec, 1e-9).unwrap();
        assert!(rot.report.max_violation.abs() < 1e-12);
        let prox = MappingFamily::Proximal { function: ConvexFunction::HalfSquaredNorm { center: e2(0.0, 0.0) }, gamma: harmonic_gamma() };
        let r = check_nonexpansive(&prox, &e, 30, &spec, 1e-9).unwrap();
        assert!(r.pass());
        // 1/(1+γ_n) with γ_n > 1
        assert!(r.max_lipschitz_ratio.unwrap() <= 0.5 + 1e-12);
    }

    #[test]
    fn shipped_families_satisfy_condition_c1() {
        let spec = SampleSpec::new(7, 200, 3.0).unwrap();
        for space in spaces() {
            for fam in shipped(&space) {
                let r = check_condition_c1(&fam, &space, &harmonic_gamma(), 30, &spec, 1e-9).unwrap();
                assert!(r.pass(), "{} {}: {r:?}", space.label(), fam.label());
            }
        }
        let e = SpaceModel::euclidean(2).unwrap();
        let prox = MappingFamily::Proximal { function: ConvexFunction::HalfSquaredNorm { center: e2(0.0, 0.0) }, gamma: harmonic_gamma() };
        let big = SampleSpec::new(9, 1000, 3.0).unwrap();
        assert!(check_condition_c1(&prox, &e, &harmonic_gamma(), 50, &big, 1e-9).unwrap().pass());
    }

    #[test]
    fn condition_c1_rejects_nonpositive_gamma_and_catches_mismatch() {
        let e = SpaceModel::euclidean(2).unwrap();
        let spec = SampleSpec::new(1, 50, 2.0).unwrap();
        let err = check_condition_c1(&MappingFamily::Identity, &e, &Sequence::constant(0, 1).unwrap(), 5, &spec, 1e-9);
        assert!(matches!(err, Err(MappingError::InvalidInput(_))));
        // Maps driven by a different sequence than the one claimed violate the inequality.
        let prox = MappingFamily::Proximal {
            function: ConvexFunction::HalfSquaredNorm { center: e2(0.0, 0.0) },
            gamma: "ratio:5,1,0,1".parse().unwrap(),
        };
        assert!(!check_condition_c1(&prox, &e, &harmonic_gamma(), 5, &spec, 1e-9).unwrap().pass());
    }

    #[test]
    fn afp_membership_examples() {
        let e = SpaceModel::euclidean(2).unwrap();
        let origin = e2(0.0, 0.0);
        for space in spaces() {
            for fam in shipped(&space) {
                let p = fam.fixed_point(&space);
                assert!(check_afp_membership(&fam, &space, &p, &p, 1, 5, 50).unwrap());
            }
        }
        assert!(check_afp_membership(&MappingFamily::Identity, &e, &e2(1.0, 1.0), &origin, 2, 100, 10).unwrap());
        assert!(!check_afp_membership(&MappingFamily::Identity, &e, &e2(3.0, 0.0), &origin, 2, 100, 10).unwrap());
        let rot = MappingFamily::Rotation { angle: FRAC_PI_2 };
        assert!(!check_afp_membership(&rot, &e, &e2(1.0, 0.0), &origin, 2, 1, 10).unwrap());
        assert!(check_afp_membership(&rot, &e, &e2(1.0, 0.0), &origin, 2, 0, 10).is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let e1 = SpaceModel::euclidean(1).unwrap();
        assert!(MappingFamily::Rotation { angle: 1.0 }.validate(&e1).is_err());
        let e = SpaceModel::euclidean(2).unwrap();
        assert!(MappingFamily::MetricProjection { center: e2(0.0, 0.0), radius: 0.0 }.validate(&e).is_err());
        let disk_center = Point::disk(0.1, 0.1).unwrap();
        assert!(MappingFamily::MetricProjection { center: disk_center, radius: 1.0 }.validate(&e).is_err());
    }

    #[test]
    fn chi_t_selection() {
        let e = SpaceModel::euclidean(2).unwrap();
        for fam in shipped(&e) {
            let want = if fam.depends_on_n() { ChiT::FromGamma } else { ChiT::Zero };
            assert_eq!(fam.chi_t(), want);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let e = SpaceModel::<f32>::euclidean(2).unwrap();
        let fam = MappingFamily::Resolvent {
            base: SingleMap::Rotation { angle: 0.5f32 },
            gamma: harmonic_gamma(),
            inner_tol: 1e-12,
            max_iter: RESOLVENT_MAX_ITER,
        };
        let z = fam.apply(&e, 3, &Point::euclidean(vec![1.0f32, 2.0])).unwrap();
        assert!(z.coords_f64().iter().all(|c| c.is_finite()));
    }
}
