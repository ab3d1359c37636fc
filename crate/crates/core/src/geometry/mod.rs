//! Concrete CAT(0) models: Euclidean space, the Poincaré disk and the tripod
//! (three half-lines glued at a common origin).
//!
//! Every model provides a metric and a geodesic convex combination
//! `comb(x, y, λ)`, the point on the geodesic from `x` to `y` at distance
//! `λ·d(x, y)` from `x`.

mod axioms;
pub mod fixtures;
mod sampling;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use axioms::{
    check_cn, check_quasilin_axioms, check_uniform_convexity, check_w_axioms, AxiomReport,
    ViolationTracker,
};
pub use sampling::{SampleSpec, Sampler};

/// Squared distance to the disk boundary below which points are rejected.
pub const DISK_MARGIN: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point {point} does not belong to model {model}")]
    ModelMismatch { model: String, point: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// A point of one of the shipped models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point<T> {
    Euclidean(Vec<T>),
    Disk { a: T, b: T },
    /// Position on leg `leg` at distance `len` from the branch point.
    Tripod { leg: u8, len: T },
}

impl<T: Scalar> Point<T> {
    pub fn euclidean(coords: impl Into<Vec<T>>) -> Self {
        Point::Euclidean(coords.into())
    }

    pub fn disk(a: T, b: T) -> Result<Self, GeometryError> {
        if !(a * a + b * b < T::one() - T::lit(DISK_MARGIN)) {
            return Err(GeometryError::InvalidInput(format!(
                "disk point ({a}, {b}) is not strictly inside the unit disk"
            )));
        }
        Ok(Point::Disk { a, b })
    }

    pub fn tripod(leg: u8, len: T) -> Result<Self, GeometryError> {
        if leg > 2 {
            return Err(GeometryError::InvalidInput(format!("tripod leg {leg} not in 0..=2")));
        }
        if !(len >= T::zero()) || !len.is_finite() {
            return Err(GeometryError::InvalidInput(format!("tripod arm length {len} must be finite and >= 0")));
        }
        Ok(Self::tripod_unchecked(leg, len))
    }

    // Length zero is the branch point; its leg is normalized to 0.
    fn tripod_unchecked(leg: u8, len: T) -> Self {
        if len == T::zero() {
            Point::Tripod { leg: 0, len }
        } else {
            Point::Tripod { leg, len }
        }
    }

    /// Coordinates as plain floats, in the column order used by CSV output.
    pub fn coords_f64(&self) -> Vec<f64> {
        match self {
            Point::Euclidean(v) => v.iter().map(|c| c.to_f64_lossy()).collect(),
            Point::Disk { a, b } => vec![a.to_f64_lossy(), b.to_f64_lossy()],
            Point::Tripod { leg, len } => vec![f64::from(*leg), len.to_f64_lossy()],
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Euclidean(usize),
    PoincareDisk,
    Tripod,
}

/// Metric plus geodesic convex combination. The axiom checkers are written
/// against this trait so that deliberately broken models can be plugged in.
pub trait GeodesicSpace<T: Scalar>: Sync {
    fn dist(&self, x: &Point<T>, y: &Point<T>) -> Result<T, GeometryError>;

    fn comb(&self, x: &Point<T>, y: &Point<T>, lambda: T) -> Result<Point<T>, GeometryError>;

    /// Berg-Nikolaev quasilinearization `⟨xy, uv⟩`.
    fn quasilin(&self, x: &Point<T>, y: &Point<T>, u: &Point<T>, v: &Point<T>) -> Result<T, GeometryError> {
        quasilin_from_distances(self, x, y, u, v)
    }

    /// Base point the samplers draw balls around.
    fn origin(&self) -> Point<T>;

    /// Draws a point at distance at most `radius` from [`GeodesicSpace::origin`].
    fn sample_point(&self, sampler: &mut Sampler, radius: T) -> Point<T>;

    /// True when the model is a Hilbert space, where CN⁻ holds with equality.
    fn is_hilbert(&self) -> bool {
        false
    }

    fn label(&self) -> String;
}

/// `½(d²(x,v) + d²(y,u) − d²(x,u) − d²(y,v))`, computed from distances only.
pub fn quasilin_from_distances<T: Scalar, S: GeodesicSpace<T> + ?Sized>(
    space: &S,
    x: &Point<T>,
    y: &Point<T>,
    u: &Point<T>,
    v: &Point<T>,
) -> Result<T, GeometryError> {
    let sq = |a: &Point<T>, b: &Point<T>| space.dist(a, b).map(|d| d * d);
    let half = T::lit(0.5);
    Ok(half * (sq(x, v)? + sq(y, u)? - sq(x, u)? - sq(y, v)?))
}

/// One of the three shipped CAT(0) models. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceModel<T> {
    kind: ModelKind,
    tol: T,
}

impl<T: Scalar> SpaceModel<T> {
    pub fn new(kind: ModelKind) -> Result<Self, GeometryError> {
        if let ModelKind::Euclidean(0) = kind {
            return Err(GeometryError::InvalidInput("Euclidean dimension must be >= 1".into()));
        }
        Ok(Self { kind, tol: T::point_eq_tol() })
    }

    pub fn euclidean(dim: usize) -> Result<Self, GeometryError> {
        Self::new(ModelKind::Euclidean(dim))
    }

    pub fn poincare_disk() -> Self {
        Self { kind: ModelKind::PoincareDisk, tol: T::point_eq_tol() }
    }

    pub fn tripod() -> Self {
        Self { kind: ModelKind::Tripod, tol: T::point_eq_tol() }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Distance below which two points are considered equal.
    pub fn tol(&self) -> T {
        self.tol
    }

    pub fn points_equal(&self, x: &Point<T>, y: &Point<T>) -> Result<bool, GeometryError> {
        Ok(self.dist(x, y)? <= self.tol)
    }

    /// Checks that `x` is a valid point of this model.
    pub fn validate(&self, x: &Point<T>) -> Result<(), GeometryError> {
        match (self.kind, x) {
            (ModelKind::Euclidean(d), Point::Euclidean(v)) if v.len() == d => Ok(()),
            (ModelKind::PoincareDisk, Point::Disk { a, b }) => Point::disk(*a, *b).map(|_| ()),
            (ModelKind::Tripod, Point::Tripod { leg, len }) => Point::tripod(*leg, *len).map(|_| ()),
            _ => Err(self.mismatch(x)),
        }
    }

    fn mismatch(&self, x: &Point<T>) -> GeometryError {
        GeometryError::ModelMismatch { model: self.label(), point: format!("{x:?}") }
    }

    fn euclid_pair<'a>(&self, x: &'a Point<T>, y: &'a Point<T>) -> Result<(&'a [T], &'a [T]), GeometryError> {
        let ModelKind::Euclidean(d) = self.kind else { unreachable!() };
        match (x, y) {
            (Point::Euclidean(a), Point::Euclidean(b)) if a.len() == d && b.len() == d => Ok((a, b)),
            (Point::Euclidean(a), _) if a.len() == d => Err(self.mismatch(y)),
            _ => Err(self.mismatch(x)),
        }
    }

    fn disk_coords(&self, x: &Point<T>) -> Result<Complex<T>, GeometryError> {
        match x {
            Point::Disk { a, b } => Ok(Complex::new(*a, *b)),
            _ => Err(self.mismatch(x)),
        }
    }

    fn tripod_coords(&self, x: &Point<T>) -> Result<(u8, T), GeometryError> {
        match x {
            Point::Tripod { leg, len } => Ok((*leg, *len)),
            _ => Err(self.mismatch(x)),
        }
    }
}

// Möbius automorphism of the disk sending `a` to the origin.
fn mobius_to_origin<T: Scalar>(a: Complex<T>, z: Complex<T>) -> Complex<T> {
    (z - a) / (Complex::new(T::one(), T::zero()) - a.conj() * z)
}

fn mobius_from_origin<T: Scalar>(a: Complex<T>, w: Complex<T>) -> Complex<T> {
    (w + a) / (Complex::new(T::one(), T::zero()) + a.conj() * w)
}

fn one_minus_norm_sqr<T: Scalar>(z: Complex<T>) -> T {
    let r = z.norm();
    (T::one() - r) * (T::one() + r)
}

fn check_lambda<T: Scalar>(lambda: T) -> Result<(), GeometryError> {
    if lambda >= T::zero() && lambda <= T::one() {
        Ok(())
    } else {
        Err(GeometryError::InvalidInput(format!("combination parameter {lambda} outside [0, 1]")))
    }
}

impl<T: Scalar> GeodesicSpace<T> for SpaceModel<T> {
    fn dist(&self, x: &Point<T>, y: &Point<T>) -> Result<T, GeometryError> {
        match self.kind {
            ModelKind::Euclidean(_) => {
                let (a, b) = self.euclid_pair(x, y)?;
                let sq = a.iter().zip(b).fold(T::zero(), |acc, (p, q)| acc + (*p - *q) * (*p - *q));
                Ok(sq.sqrt())
            }
            ModelKind::PoincareDisk => {
                let (z, w) = (self.disk_coords(x)?, self.disk_coords(y)?);
                // cosh d = 1 + 2 sinh²(d/2) with sinh(d/2) = |z−w| / sqrt((1−|z|²)(1−|w|²))
                let s = (z - w).norm() / (one_minus_norm_sqr(z) * one_minus_norm_sqr(w)).sqrt();
                Ok(T::lit(2.0) * s.asinh())
            }
            ModelKind::Tripod => {
                let ((i, s), (j, t)) = (self.tripod_coords(x)?, self.tripod_coords(y)?);
                if i == j || s == T::zero() || t == T::zero() {
                    Ok((s - t).abs())
                } else {
                    Ok(s + t)
                }
            }
        }
    }

    fn comb(&self, x: &Point<T>, y: &Point<T>, lambda: T) -> Result<Point<T>, GeometryError> {
        check_lambda(lambda)?;
        match self.kind {
            ModelKind::Euclidean(_) => {
                let (a, b) = self.euclid_pair(x, y)?;
                let mu = T::one() - lambda;
                Ok(Point::Euclidean(a.iter().zip(b).map(|(p, q)| mu * *p + lambda * *q).collect()))
            }
            ModelKind::PoincareDisk => {
                let (z, w) = (self.disk_coords(x)?, self.disk_coords(y)?);
                if lambda == T::zero() {
                    return Ok(x.clone());
                }
                if lambda == T::one() {
                    return Ok(y.clone());
                }
                let moved = mobius_to_origin(z, w);
                let rho = moved.norm();
                if rho == T::zero() {
                    return Ok(x.clone());
                }
                // Along the diameter through `moved`, hyperbolic distance 2·artanh(r) from 0.
                let r = (lambda * rho.atanh()).tanh();
                let target = mobius_from_origin(z, moved * (r / rho));
                Ok(Point::Disk { a: target.re, b: target.im })
            }
            ModelKind::Tripod => {
                let ((i, s), (j, t)) = (self.tripod_coords(x)?, self.tripod_coords(y)?);
                if i == j || s == T::zero() || t == T::zero() {
                    let leg = if s == T::zero() { j } else { i };
                    let len = (T::one() - lambda) * s + lambda * t;
                    return Ok(Point::tripod_unchecked(leg, len.max(T::zero())));
                }
                let travelled = lambda * (s + t);
                if travelled <= s {
                    Ok(Point::tripod_unchecked(i, s - travelled))
                } else {
                    Ok(Point::tripod_unchecked(j, travelled - s))
                }
            }
        }
    }

    fn quasilin(&self, x: &Point<T>, y: &Point<T>, u: &Point<T>, v: &Point<T>) -> Result<T, GeometryError> {
        match self.kind {
            ModelKind::Euclidean(_) => {
                let (xs, ys) = self.euclid_pair(x, y)?;
                let (us, vs) = self.euclid_pair(u, v)?;
                let dot = (0..xs.len())
                    .fold(T::zero(), |acc, i| acc + (ys[i] - xs[i]) * (vs[i] - us[i]));
                Ok(dot)
            }
            _ => quasilin_from_distances(self, x, y, u, v),
        }
    }

    fn origin(&self) -> Point<T> {
        match self.kind {
            ModelKind::Euclidean(d) => Point::Euclidean(vec![T::zero(); d]),
            ModelKind::PoincareDisk => Point::Disk { a: T::zero(), b: T::zero() },
            ModelKind::Tripod => Point::Tripod { leg: 0, len: T::zero() },
        }
    }

    fn sample_point(&self, sampler: &mut Sampler, radius: T) -> Point<T> {
        match self.kind {
            ModelKind::Euclidean(d) => {
                let half_side = radius / T::from_usize(d).unwrap().sqrt();
                Point::Euclidean((0..d).map(|_| half_side * T::lit(sampler.uniform(-1.0, 1.0))).collect())
            }
            ModelKind::PoincareDisk => {
                let hyperbolic = T::lit(sampler.uniform(0.0, 1.0)) * radius;
                let r = (hyperbolic / T::lit(2.0)).tanh();
                let angle = T::lit(sampler.uniform(0.0, std::f64::consts::TAU));
                Point::Disk { a: r * angle.cos(), b: r * angle.sin() }
            }
            ModelKind::Tripod => {
                let leg = sampler.index(3) as u8;
                // Hit the branch point exactly now and then.
                let len = if sampler.chance(0.05) { T::zero() } else { T::lit(sampler.uniform(0.0, 1.0)) * radius };
                Point::tripod_unchecked(leg, len)
            }
        }
    }

    fn is_hilbert(&self) -> bool {
        matches!(self.kind, ModelKind::Euclidean(_))
    }

    fn label(&self) -> String {
        match self.kind {
            ModelKind::Euclidean(d) => format!("euclidean({d})"),
            ModelKind::PoincareDisk => "poincare_disk".into(),
            ModelKind::Tripod => "tripod".into(),
        }
    }
}

#[cfg(test)]
mod tests;
