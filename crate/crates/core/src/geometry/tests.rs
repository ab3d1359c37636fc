use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use super::fixtures::BrokenCombination;
use super::*;

fn e2() -> SpaceModel<f64> {
    SpaceModel::euclidean(2).unwrap()
}

fn disk(a: f64, b: f64) -> Point<f64> {
    Point::disk(a, b).unwrap()
}

fn tri(leg: u8, len: f64) -> Point<f64> {
    Point::tripod(leg, len).unwrap()
}

#[test]
fn euclidean_distance_is_pythagorean() {
    let d = e2().dist(&Point::euclidean([0.0, 0.0]), &Point::euclidean([3.0, 4.0])).unwrap();
    assert_abs_diff_eq!(d, 5.0, epsilon = 1e-15);
}

// d(0, z) = 2 artanh|z|; cross-checked against midpoint-rule integration of
// the conformal factor 2/(1 − r²) along the radius.
#[test]
fn disk_distance_from_origin() {
    let space = SpaceModel::<f64>::poincare_disk();
    let d = space.dist(&disk(0.0, 0.0), &disk(0.5, 0.0)).unwrap();
    assert_abs_diff_eq!(d, 2.0 * 0.5f64.atanh(), epsilon = 1e-14);
    assert_abs_diff_eq!(d, 1.0986123, epsilon = 1e-7);
    let steps = 200_000;
    let h = 0.5 / steps as f64;
    let integral: f64 = (0..steps).map(|i| (i as f64 + 0.5) * h).map(|r| 2.0 / (1.0 - r * r) * h).sum();
    assert_abs_diff_eq!(d, integral, epsilon = 1e-9);
}

#[test]
fn tripod_distance_goes_through_center() {
    let space = SpaceModel::<f64>::tripod();
    assert_eq!(space.dist(&tri(0, 1.0), &tri(1, 2.0)).unwrap(), 3.0);
    assert_eq!(space.dist(&tri(2, 1.0), &tri(2, 2.5)).unwrap(), 1.5);
    assert_eq!(space.dist(&tri(0, 0.0), &tri(1, 2.0)).unwrap(), 2.0);
}

#[test]
fn model_mismatch_is_rejected() {
    let err = e2().dist(&Point::euclidean([0.0, 0.0]), &disk(0.1, 0.1)).unwrap_err();
    assert!(matches!(err, GeometryError::ModelMismatch { .. }));
    let err = e2().dist(&Point::euclidean([0.0, 0.0]), &Point::euclidean([0.0, 0.0, 1.0])).unwrap_err();
    assert!(matches!(err, GeometryError::ModelMismatch { .. }));
}

#[test]
fn combination_examples() {
    let p = e2().comb(&Point::euclidean([0.0, 0.0]), &Point::euclidean([2.0, 0.0]), 0.25).unwrap();
    assert_eq!(p, Point::euclidean([0.5, 0.0]));

    let space = SpaceModel::<f64>::poincare_disk();
    let Point::Disk { a, b } = space.comb(&disk(0.0, 0.0), &disk(0.5, 0.0), 0.5).unwrap() else { panic!() };
    assert_abs_diff_eq!(a, (0.5f64.atanh() / 2.0).tanh(), epsilon = 1e-15);
    assert_abs_diff_eq!(a, 0.2679492, epsilon = 1e-7);
    assert_abs_diff_eq!(b, 0.0, epsilon = 1e-15);

    let space = SpaceModel::<f64>::tripod();
    assert_eq!(space.comb(&tri(0, 1.0), &tri(1, 2.0), 0.5).unwrap(), tri(1, 0.5));
}

#[test]
fn combination_rejects_lambda_outside_unit_interval() {
    let x = Point::euclidean([0.0, 0.0]);
    assert!(matches!(e2().comb(&x, &x, 1.5), Err(GeometryError::InvalidInput(_))));
    assert!(matches!(e2().comb(&x, &x, -0.1), Err(GeometryError::InvalidInput(_))));
}

#[test]
fn quasilin_examples() {
    let s = e2();
    let (x, y, u, v) = (
        Point::euclidean([0.0, 0.0]),
        Point::euclidean([1.0, 0.0]),
        Point::euclidean([0.0, 0.0]),
        Point::euclidean([0.0, 1.0]),
    );
    assert_abs_diff_eq!(s.quasilin(&x, &y, &u, &v).unwrap(), 0.0, epsilon = 1e-15);
    for space in [SpaceModel::<f64>::poincare_disk(), SpaceModel::tripod()] {
        let mut rng = Sampler::new(1, "q");
        let x = space.sample_point(&mut rng, 3.0);
        let y = space.sample_point(&mut rng, 3.0);
        let u = space.sample_point(&mut rng, 3.0);
        let v = space.sample_point(&mut rng, 3.0);
        assert_abs_diff_eq!(space.quasilin(&x, &x, &u, &v).unwrap(), 0.0, epsilon = 1e-12);
        let d = space.dist(&x, &y).unwrap();
        assert_abs_diff_eq!(space.quasilin(&x, &y, &x, &y).unwrap(), d * d, epsilon = 1e-12);
    }
}

#[test]
fn point_validation() {
    assert!(Point::disk(0.6, 0.8).is_err());
    assert!(Point::disk(0.99, 0.0).is_ok());
    assert!(Point::<f64>::tripod(3, 1.0).is_err());
    assert!(Point::tripod(1, -1.0).is_err());
    assert!(Point::tripod(1, f64::INFINITY).is_err());
    // The branch point is shared by all legs.
    assert_eq!(tri(2, 0.0), tri(0, 0.0));
    assert!(SpaceModel::<f64>::euclidean(0).is_err());
}

fn all_models() -> Vec<SpaceModel<f64>> {
    vec![SpaceModel::euclidean(3).unwrap(), SpaceModel::poincare_disk(), SpaceModel::tripod()]
}

#[test]
fn every_model_passes_every_axiom_check() {
    let spec = SampleSpec::new(7, 2_000, 4.0).unwrap();
    for space in all_models() {
        let mut reports = check_w_axioms(&space, &spec, 1e-9).unwrap();
        reports.extend(check_cn(&space, &spec, 1e-9).unwrap());
        reports.extend(check_uniform_convexity(&space, &spec, 1e-9).unwrap());
        reports.extend(check_quasilin_axioms(&space, &spec, 1e-9).unwrap());
        for r in &reports {
            assert!(r.pass, "{} failed {}: {:?}", space.label(), r.axiom, r);
            assert!(r.samples > 0);
        }
        let has_equality = reports.iter().any(|r| r.axiom == "CN-_equality");
        assert_eq!(has_equality, space.is_hilbert());
    }
}

#[test]
fn broken_combination_fails_w2() {
    let spec = SampleSpec::new(3, 200, 2.0).unwrap();
    let broken = BrokenCombination::<f64>::new(2).unwrap();
    let reports = check_w_axioms(&broken, &spec, 1e-9).unwrap();
    let w2 = reports.iter().find(|r| r.axiom == "W2").unwrap();
    assert!(!w2.pass);
    assert!(w2.worst_case_inputs.get("lambda").is_some());
}

#[test]
fn report_serializes_with_expected_fields() {
    let spec = SampleSpec::new(1, 10, 1.0).unwrap();
    let r = &check_uniform_convexity(&e2(), &spec, 1e-9).unwrap()[0];
    let v = serde_json::to_value(r).unwrap();
    for key in ["axiom", "samples", "max_violation", "worst_case_inputs", "pass"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn sample_spec_validation() {
    assert!(SampleSpec::new(0, 0, 1.0).is_err());
    assert!(SampleSpec::new(0, 1, 0.0).is_err());
}

#[test]
fn f32_models_are_usable() {
    let space = SpaceModel::<f32>::poincare_disk();
    let x = Point::disk(0.1f32, 0.2).unwrap();
    let y = Point::disk(-0.3f32, 0.1).unwrap();
    let m = space.comb(&x, &y, 0.5).unwrap();
    let d = space.dist(&x, &y).unwrap();
    assert!((space.dist(&x, &m).unwrap() - d / 2.0).abs() < 1e-5);
    let spec = SampleSpec::new(2, 500, 2.0).unwrap();
    assert!(check_w_axioms(&space, &spec, 1e-4).unwrap().iter().all(|r| r.pass));
}

fn coord() -> impl Strategy<Value = f64> {
    -3.0..3.0f64
}

proptest! {
    #[test]
    fn w2_and_w3_hold_in_the_disk(a in -0.6..0.6f64, b in -0.6..0.6f64, c in -0.6..0.6f64, d in -0.6..0.6f64,
                                 l in 0.0..=1.0f64, t in 0.0..=1.0f64) {
        let space = SpaceModel::<f64>::poincare_disk();
        let (x, y) = (disk(a, b), disk(c, d));
        let (m, n) = (space.comb(&x, &y, l).unwrap(), space.comb(&x, &y, t).unwrap());
        let dxy = space.dist(&x, &y).unwrap();
        prop_assert!((space.dist(&m, &n).unwrap() - (l - t).abs() * dxy).abs() <= 1e-9);
        let swapped = space.comb(&y, &x, 1.0 - l).unwrap();
        prop_assert!(space.dist(&m, &swapped).unwrap() <= 1e-9);
    }

    #[test]
    fn cn_plus_holds_on_tripod(s in 0.0..4.0f64, t in 0.0..4.0f64, r in 0.0..4.0f64,
                               i in 0u8..3, j in 0u8..3, k in 0u8..3, l in 0.0..=1.0f64) {
        let space = SpaceModel::<f64>::tripod();
        let (x, y, z) = (tri(i, s), tri(j, t), tri(k, r));
        let m = space.comb(&x, &y, l).unwrap();
        let d2 = |a: &Point<f64>, b: &Point<f64>| space.dist(a, b).unwrap().powi(2);
        let rhs = (1.0 - l) * d2(&z, &x) + l * d2(&z, &y) - l * (1.0 - l) * d2(&x, &y);
        prop_assert!(d2(&z, &m) <= rhs + 1e-9);
    }

    #[test]
    fn euclidean_quasilin_is_dot_product(x in prop::array::uniform2(coord()), y in prop::array::uniform2(coord()),
                                         u in prop::array::uniform2(coord()), v in prop::array::uniform2(coord())) {
        let s = e2();
        let (px, py, pu, pv) = (Point::euclidean(x), Point::euclidean(y), Point::euclidean(u), Point::euclidean(v));
        let fast = s.quasilin(&px, &py, &pu, &pv).unwrap();
        let slow = quasilin_from_distances(&s, &px, &py, &pu, &pv).unwrap();
        let dot = (y[0] - x[0]) * (v[0] - u[0]) + (y[1] - x[1]) * (v[1] - u[1]);
        prop_assert!((fast - dot).abs() <= 1e-9);
        prop_assert!((fast - slow).abs() <= 1e-9);
    }
}
