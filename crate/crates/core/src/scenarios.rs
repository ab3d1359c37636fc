//! Ready-made scenarios: a model, a family, a schedule bundle, the anchor `u`
//! and the starting point `x₀`.

use sha2::{Digest, Sha256};

use crate::engine::{run, RunFailure, Trajectory};
use crate::geometry::{GeodesicSpace, GeometryError, Point, SpaceModel};
use crate::mappings::{ConvexFunction, MappingFamily};
use crate::rates::{Cap, RateContext, RateError, ScenarioBounds};
use crate::scalar::Scalar;
use crate::schedules::{preset, ScheduleBundle};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub name: String,
    pub space: SpaceModel<T>,
    pub family: MappingFamily<T>,
    pub bundle: ScheduleBundle,
    pub anchor: Point<T>,
    pub x0: Point<T>,
}

impl<T: Scalar> Scenario<T> {
    /// The common fixed point the bounds are taken around.
    pub fn fixed_point(&self) -> Point<T> {
        self.family.fixed_point(&self.space)
    }

    /// `M = max{d(x₀, p), d(u, p)}` and the least admissible `K`.
    pub fn bounds(&self) -> Result<ScenarioBounds, GeometryError> {
        let p = self.fixed_point();
        let m = self.space.dist(&self.x0, &p)?.max(self.space.dist(&self.anchor, &p)?);
        ScenarioBounds::from_radius(m.to_f64_lossy()).map_err(|e| GeometryError::InvalidInput(e.to_string()))
    }

    pub fn rate_context(&self, cap: Cap) -> Result<RateContext, RateError> {
        let k = self.bounds().map_err(|e| RateError::InvalidBound(e.to_string()))?.k;
        RateContext::new(self.bundle.clone(), k, self.family.chi_t(), cap)
    }

    pub fn run(&self, steps: u64) -> Result<Trajectory<T>, Box<RunFailure<T>>> {
        run(&self.space, &self.family, &self.bundle, &self.anchor, &self.x0, steps)
    }

    /// Short content hash identifying the scenario in reports.
    pub fn hash(&self) -> String {
        let text = format!(
            "{}|{:?}|{:?}|{:?}|{:?}|{:?}",
            self.name,
            self.space.kind(),
            self.family,
            self.bundle.spec(),
            self.anchor,
            self.x0
        );
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Identity family on the real line from `x₀ = 1` towards `u = 0`: `x_n = 1/(n+1)`.
pub fn identity_line() -> Scenario<f64> {
    Scenario {
        name: "identity-line".into(),
        space: SpaceModel::euclidean(1).expect("dimension 1"),
        family: MappingFamily::Identity,
        bundle: preset("harmonic").expect("shipped preset"),
        anchor: Point::euclidean(vec![0.0]),
        x0: Point::euclidean(vec![1.0]),
    }
}

pub const MODEL_NAMES: [&str; 3] = ["euclidean", "disk", "tripod"];
pub const FAMILY_NAMES: [&str; 4] = ["identity", "rotation", "projection", "proximal"];

struct ModelSetup {
    space: SpaceModel<f64>,
    anchor: Point<f64>,
    x0: Point<f64>,
    center: Point<f64>,
    radius: f64,
}

fn model_setup(model: &str) -> Option<ModelSetup> {
    let setup = match model {
        "euclidean" => ModelSetup {
            space: SpaceModel::euclidean(2).ok()?,
            anchor: Point::euclidean(vec![0.6, -0.3]),
            x0: Point::euclidean(vec![1.5, 2.0]),
            center: Point::euclidean(vec![0.2, 0.1]),
            radius: 0.5,
        },
        "disk" => ModelSetup {
            space: SpaceModel::poincare_disk(),
            anchor: Point::disk(0.3, -0.2).ok()?,
            x0: Point::disk(-0.5, 0.4).ok()?,
            center: Point::disk(0.1, 0.05).ok()?,
            radius: 0.3,
        },
        "tripod" => ModelSetup {
            space: SpaceModel::tripod(),
            anchor: Point::tripod(0, 0.7).ok()?,
            x0: Point::tripod(1, 2.0).ok()?,
            center: Point::tripod(2, 0.4).ok()?,
            radius: 0.3,
        },
        _ => return None,
    };
    Some(setup)
}

/// One cell of the shipped matrix, e.g. `("disk", "proximal")`.
pub fn matrix_scenario(model: &str, family: &str) -> Option<Scenario<f64>> {
    let m = model_setup(model)?;
    let bundle = preset("harmonic").ok()?;
    let family = match family {
        "identity" => MappingFamily::Identity,
        "rotation" => MappingFamily::Rotation { angle: 2.0 * std::f64::consts::FRAC_PI_3 },
        "projection" => MappingFamily::MetricProjection { center: m.center.clone(), radius: m.radius },
        "proximal" => MappingFamily::Proximal {
            function: ConvexFunction::HalfSquaredNorm { center: m.center.clone() },
            gamma: bundle.gamma_sequence().clone(),
        },
        _ => return None,
    };
    Some(Scenario { name: format!("{model}-{}", family.label()), space: m.space, family, bundle, anchor: m.anchor, x0: m.x0 })
}

/// All model × family combinations.
pub fn matrix() -> Vec<Scenario<f64>> {
    MODEL_NAMES
        .iter()
        .flat_map(|m| FAMILY_NAMES.iter().filter_map(move |f| matrix_scenario(m, f)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_is_complete_and_valid() {
        let all = matrix();
        assert_eq!(all.len(), 12);
        for s in &all {
            s.family.validate(&s.space).unwrap();
            let b = s.bounds().unwrap();
            assert!(b.k as f64 >= b.m && b.k >= 1);
        }
        let hashes: std::collections::BTreeSet<_> = all.iter().map(Scenario::hash).collect();
        assert_eq!(hashes.len(), 12);
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(identity_line().hash(), identity_line().hash());
        assert_eq!(identity_line().hash().len(), 16);
    }

    #[test]
    fn identity_line_bounds() {
        let b = identity_line().bounds().unwrap();
        assert_eq!((b.k, b.m), (1, 1.0));
    }
}
