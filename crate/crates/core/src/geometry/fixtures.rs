//! Deliberately broken models used to exercise the failure paths of the checkers.

use super::{GeodesicSpace, GeometryError, Point, Sampler, SpaceModel};
use crate::scalar::Scalar;

/// Euclidean metric with a non-geodesic combination `(1 − λ²)x + λ²y`.
/// Violates (W2) and (W3).
#[derive(Debug, Clone)]
pub struct BrokenCombination<T> {
    inner: SpaceModel<T>,
}

impl<T: Scalar> BrokenCombination<T> {
    pub fn new(dim: usize) -> Result<Self, GeometryError> {
        Ok(Self { inner: SpaceModel::euclidean(dim)? })
    }
}

impl<T: Scalar> GeodesicSpace<T> for BrokenCombination<T> {
    fn dist(&self, x: &Point<T>, y: &Point<T>) -> Result<T, GeometryError> {
        self.inner.dist(x, y)
    }

    fn comb(&self, x: &Point<T>, y: &Point<T>, lambda: T) -> Result<Point<T>, GeometryError> {
        self.inner.comb(x, y, lambda * lambda)
    }

    fn origin(&self) -> Point<T> {
        self.inner.origin()
    }

    fn sample_point(&self, sampler: &mut Sampler, radius: T) -> Point<T> {
        self.inner.sample_point(sampler, radius)
    }

    fn is_hilbert(&self) -> bool {
        true
    }

    fn label(&self) -> String {
        format!("broken_{}", self.inner.label())
    }
}
