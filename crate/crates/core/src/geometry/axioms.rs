//! Sampled checks of the metric axioms a CAT(0) model has to satisfy.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{GeodesicSpace, GeometryError, Point, SampleSpec};
use crate::scalar::Scalar;

/// Outcome of checking one inequality or identity on a batch of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: String,
    pub samples: usize,
    /// Largest observed `lhs − rhs` (positive means violated). NaN counts as infinite.
    pub max_violation: f64,
    pub worst_case_inputs: Value,
    pub pass: bool,
}

/// Accumulates the worst violation of one axiom.
#[derive(Debug, Clone)]
pub struct ViolationTracker {
    axiom: String,
    tol: f64,
    samples: usize,
    max: f64,
    worst: Value,
}

impl ViolationTracker {
    pub fn new(axiom: impl Into<String>, tol: f64) -> Self {
        Self { axiom: axiom.into(), tol, samples: 0, max: f64::NEG_INFINITY, worst: Value::Null }
    }

    /// Records one sample; `inputs` is only evaluated when the sample becomes the worst one.
    pub fn observe(&mut self, violation: f64, inputs: impl FnOnce() -> Value) {
        self.samples += 1;
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        if v > self.max {
            self.max = v;
            self.worst = inputs();
        }
    }

    pub fn max_violation(&self) -> f64 {
        self.max
    }

    pub fn finish(self) -> AxiomReport {
        let max = if self.samples == 0 { 0.0 } else { self.max };
        AxiomReport {
            axiom: self.axiom,
            samples: self.samples,
            max_violation: max,
            worst_case_inputs: self.worst,
            pass: max <= self.tol,
        }
    }
}

fn pts<T: Scalar>(named: &[(&str, &Point<T>)]) -> Value {
    Value::Object(named.iter().map(|(k, p)| (k.to_string(), p.to_json())).collect())
}

fn with_params(mut v: Value, params: &[(&str, f64)]) -> Value {
    if let Value::Object(map) = &mut v {
        for (k, x) in params {
            map.insert(k.to_string(), json!(x));
        }
    }
    v
}

fn sq<T: Scalar>(d: T) -> f64 {
    let d = d.to_f64_lossy();
    d * d
}

/// Samples (W1)–(W4) on `spec.count` random tuples `(x, y, z, w, λ, θ)`.
pub fn check_w_axioms<T: Scalar, S: GeodesicSpace<T>>(
    space: &S,
    spec: &SampleSpec,
    tol: f64,
) -> Result<Vec<AxiomReport>, GeometryError> {
    let mut rng = spec.sampler("w-axioms");
    let radius = T::lit(spec.radius);
    let mut w1 = ViolationTracker::new("W1", tol);
    let mut w2 = ViolationTracker::new("W2", tol);
    let mut w3 = ViolationTracker::new("W3", tol);
    let mut w4 = ViolationTracker::new("W4", tol);
    for _ in 0..spec.count {
        let [x, y, z, w] = [(); 4].map(|_| space.sample_point(&mut rng, radius));
        let (lf, tf) = (rng.unit(), rng.unit());
        let (lambda, theta) = (T::lit(lf), T::lit(tf));
        let inputs = || with_params(pts(&[("x", &x), ("y", &y), ("z", &z), ("w", &w)]), &[("lambda", lf), ("theta", tf)]);

        let m = space.comb(&x, &y, lambda)?;
        let lhs = space.dist(&z, &m)?;
        let rhs = (T::one() - lambda) * space.dist(&z, &x)? + lambda * space.dist(&z, &y)?;
        w1.observe((lhs - rhs).to_f64_lossy(), inputs);

        let m_theta = space.comb(&x, &y, theta)?;
        let gap = space.dist(&m, &m_theta)? - (lambda - theta).abs() * space.dist(&x, &y)?;
        w2.observe(gap.abs().to_f64_lossy(), inputs);

        let swapped = space.comb(&y, &x, T::one() - lambda)?;
        w3.observe(space.dist(&m, &swapped)?.to_f64_lossy(), inputs);

        let a = space.comb(&x, &z, lambda)?;
        let b = space.comb(&y, &w, lambda)?;
        let lhs = space.dist(&a, &b)?;
        let rhs = (T::one() - lambda) * space.dist(&x, &y)? + lambda * space.dist(&z, &w)?;
        w4.observe((lhs - rhs).to_f64_lossy(), inputs);
    }
    Ok(vec![w1.finish(), w2.finish(), w3.finish(), w4.finish()])
}

/// CN⁻ on midpoints and CN⁺ on random λ. Hilbert models additionally get a
/// `CN-_equality` report measuring `|lhs − rhs|` of CN⁻.
pub fn check_cn<T: Scalar, S: GeodesicSpace<T>>(
    space: &S,
    spec: &SampleSpec,
    tol: f64,
) -> Result<Vec<AxiomReport>, GeometryError> {
    let mut rng = spec.sampler("cn");
    let radius = T::lit(spec.radius);
    let mut minus = ViolationTracker::new("CN-", tol);
    let mut plus = ViolationTracker::new("CN+", tol);
    let mut equality = ViolationTracker::new("CN-_equality", tol);
    let half = T::lit(0.5);
    for _ in 0..spec.count {
        let [x, y, z] = [(); 3].map(|_| space.sample_point(&mut rng, radius));
        let lf = rng.unit();
        let inputs = || with_params(pts(&[("x", &x), ("y", &y), ("z", &z)]), &[("lambda", lf)]);
        let (dzx, dzy, dxy) = (sq(space.dist(&z, &x)?), sq(space.dist(&z, &y)?), sq(space.dist(&x, &y)?));

        let mid = space.comb(&x, &y, half)?;
        let lhs = sq(space.dist(&z, &mid)?);
        let rhs = 0.5 * dzx + 0.5 * dzy - 0.25 * dxy;
        minus.observe(lhs - rhs, inputs);
        if space.is_hilbert() {
            equality.observe((lhs - rhs).abs(), inputs);
        }

        let m = space.comb(&x, &y, T::lit(lf))?;
        let lhs = sq(space.dist(&z, &m)?);
        let rhs = (1.0 - lf) * dzx + lf * dzy - lf * (1.0 - lf) * dxy;
        plus.observe(lhs - rhs, inputs);
    }
    let mut out = vec![minus.finish(), plus.finish()];
    if space.is_hilbert() {
        out.push(equality.finish());
    }
    Ok(out)
}

/// Uniform convexity with modulus ε²/8. Each sample `(a, x, y)` is tested at
/// the tightest admissible parameters `r = max(d(a,x), d(a,y))`, `ε = d(x,y)/r`.
pub fn check_uniform_convexity<T: Scalar, S: GeodesicSpace<T>>(
    space: &S,
    spec: &SampleSpec,
    tol: f64,
) -> Result<Vec<AxiomReport>, GeometryError> {
    let mut rng = spec.sampler("uniform-convexity");
    let radius = T::lit(spec.radius);
    let mut tracker = ViolationTracker::new("uniform_convexity", tol);
    for i in 0..spec.count {
        let a = space.sample_point(&mut rng, radius);
        let x = space.sample_point(&mut rng, radius);
        // Every 50th sample is degenerate (x = y, so ε = 0).
        let y = if i % 50 == 0 { x.clone() } else { space.sample_point(&mut rng, radius) };
        let r = space.dist(&a, &x)?.max(space.dist(&a, &y)?).to_f64_lossy();
        if r == 0.0 {
            continue;
        }
        let eps = (space.dist(&x, &y)?.to_f64_lossy() / r).min(2.0);
        let mid = space.comb(&x, &y, T::lit(0.5))?;
        let lhs = space.dist(&a, &mid)?.to_f64_lossy();
        let rhs = (1.0 - eps * eps / 8.0) * r;
        tracker.observe(lhs - rhs, || with_params(pts(&[("a", &a), ("x", &x), ("y", &y)]), &[("r", r), ("epsilon", eps)]));
    }
    Ok(vec![tracker.finish()])
}

/// Quasilinearization properties (1)–(4) and the Cauchy-Schwarz inequality.
pub fn check_quasilin_axioms<T: Scalar, S: GeodesicSpace<T>>(
    space: &S,
    spec: &SampleSpec,
    tol: f64,
) -> Result<Vec<AxiomReport>, GeometryError> {
    let mut rng = spec.sampler("quasilin");
    let radius = T::lit(spec.radius);
    let mut p1 = ViolationTracker::new("quasilin_self", tol);
    let mut p2 = ViolationTracker::new("quasilin_symmetry", tol);
    let mut p3 = ViolationTracker::new("quasilin_antisymmetry", tol);
    let mut p4 = ViolationTracker::new("quasilin_additivity", tol);
    let mut cs = ViolationTracker::new("cauchy_schwarz", tol);
    let q = |a: &Point<T>, b: &Point<T>, c: &Point<T>, d: &Point<T>| space.quasilin(a, b, c, d).map(|v| v.to_f64_lossy());
    for _ in 0..spec.count {
        let [x, y, u, v, w] = [(); 5].map(|_| space.sample_point(&mut rng, radius));
        let inputs = || pts(&[("x", &x), ("y", &y), ("u", &u), ("v", &v), ("w", &w)]);
        let xyuv = q(&x, &y, &u, &v)?;
        p1.observe((q(&x, &y, &x, &y)? - sq(space.dist(&x, &y)?)).abs(), inputs);
        p2.observe((xyuv - q(&u, &v, &x, &y)?).abs(), inputs);
        p3.observe((xyuv + q(&y, &x, &u, &v)?).abs(), inputs);
        p4.observe((xyuv + q(&x, &y, &v, &w)? - q(&x, &y, &u, &w)?).abs(), inputs);
        let bound = (space.dist(&x, &y)? * space.dist(&u, &v)?).to_f64_lossy();
        cs.observe(xyuv - bound, inputs);
    }
    Ok(vec![p1.finish(), p2.finish(), p3.finish(), p4.finish(), cs.finish()])
}
