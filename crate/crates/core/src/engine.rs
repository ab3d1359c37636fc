//! Tikhonov-Mann trajectories
//! `u_n = comb(u, x_n, β_n)`, `x_{n+1} = comb(u_n, T_n u_n, λ_n)`.

use std::io::Write;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::geometry::{AxiomReport, GeodesicSpace, GeometryError, ModelKind, Point, SpaceModel};
use crate::mappings::{MappingError, MappingFamily};
use crate::scalar::Scalar;
use crate::schedules::ScheduleBundle;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Current iterate `x_n`, the last anchor combination `u_{n−1}` (none before
/// the first step), the anchor `u` and the starting point `x₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState<T> {
    pub n: u64,
    pub x: Point<T>,
    pub u_prev: Option<Point<T>>,
    pub anchor: Point<T>,
    pub x0: Point<T>,
}

impl<T: Scalar> IterationState<T> {
    pub fn new(anchor: Point<T>, x0: Point<T>) -> Self {
        Self { n: 0, x: x0.clone(), u_prev: None, anchor, x0 }
    }
}

/// `u_n = comb(u, x_n, β_n)`
pub fn anchor_combination<T: Scalar>(
    space: &SpaceModel<T>,
    bundle: &ScheduleBundle,
    anchor: &Point<T>,
    x: &Point<T>,
    n: u64,
) -> Result<Point<T>, EngineError> {
    Ok(space.comb(anchor, x, bundle.beta(n))?)
}

/// One iteration; the returned state carries `x_{n+1}` and `u_n`.
pub fn step<T: Scalar>(
    state: &IterationState<T>,
    family: &MappingFamily<T>,
    bundle: &ScheduleBundle,
    space: &SpaceModel<T>,
) -> Result<IterationState<T>, EngineError> {
    let n = state.n;
    let u_n = anchor_combination(space, bundle, &state.anchor, &state.x, n)?;
    let t_u = family.apply(space, n, &u_n)?;
    let x_next = space.comb(&u_n, &t_u, bundle.lambda(n))?;
    Ok(IterationState { n: n + 1, x: x_next, u_prev: Some(u_n), anchor: state.anchor.clone(), x0: state.x0.clone() })
}

/// One row of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record<T> {
    pub n: u64,
    pub x: Point<T>,
    pub u: Point<T>,
    /// `d(x_n, x_{n+1})`
    pub d_step: f64,
    /// `d(x_n, T_n x_n)`
    pub d_tn: f64,
    /// `d(x_n, p)`
    pub d_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<T> {
    pub model: String,
    pub family: String,
    pub anchor: Point<T>,
    pub p: Point<T>,
    pub records: Vec<Record<T>>,
}

/// A run that stopped early; `partial` holds every completed record.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("run stopped at n = {at}: {error}")]
pub struct RunFailure<T: std::fmt::Debug> {
    pub at: u64,
    pub error: EngineError,
    pub partial: Trajectory<T>,
}

/// Records `n = 0..=steps`. One extra step is computed so that the last
/// record's `d_step` is defined.
pub fn run<T: Scalar>(
    space: &SpaceModel<T>,
    family: &MappingFamily<T>,
    bundle: &ScheduleBundle,
    u: &Point<T>,
    x0: &Point<T>,
    steps: u64,
) -> Result<Trajectory<T>, Box<RunFailure<T>>> {
    let mut traj = Trajectory {
        model: space.label(),
        family: family.label().into(),
        anchor: u.clone(),
        p: family.fixed_point(space),
        records: Vec::with_capacity(steps as usize + 1),
    };
    let fail = |traj: &Trajectory<T>, at: u64, error: EngineError| Box::new(RunFailure { at, error, partial: traj.clone() });
    if steps == 0 {
        return Err(fail(&traj, 0, EngineError::InvalidInput("steps must be at least 1".into())));
    }
    let checked = space.validate(u).and_then(|_| space.validate(x0)).map_err(EngineError::from).and_then(|_| Ok(family.validate(space)?));
    if let Err(e) = checked {
        return Err(fail(&traj, 0, e));
    }
    let mut state = IterationState::new(u.clone(), x0.clone());
    for n in 0..=steps {
        let record = (|| -> Result<(Record<T>, IterationState<T>), EngineError> {
            let next = step(&state, family, bundle, space)?;
            let tx = family.apply(space, n, &state.x)?;
            let record = Record {
                n,
                x: state.x.clone(),
                u: next.u_prev.clone().expect("step sets u_n"),
                d_step: space.dist(&state.x, &next.x)?.to_f64_lossy(),
                d_tn: space.dist(&state.x, &tx)?.to_f64_lossy(),
                d_p: space.dist(&state.x, &traj.p)?.to_f64_lossy(),
            };
            Ok((record, next))
        })();
        match record {
            Ok((record, next)) => {
                traj.records.push(record);
                state = next;
            }
            Err(e) => return Err(fail(&traj, n, e)),
        }
    }
    Ok(traj)
}

fn coordinate_names(kind: ModelKind) -> Vec<String> {
    match kind {
        ModelKind::Euclidean(d) => (0..d).map(|i| format!("x{i}")).collect(),
        ModelKind::PoincareDisk => vec!["a".into(), "b".into()],
        ModelKind::Tripod => vec!["leg".into(), "len".into()],
    }
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `M = max{d(x₀, p), d(u, p)}`
    pub fn radius(&self, space: &SpaceModel<T>) -> Result<f64, GeometryError> {
        let x0 = self.records.first().map(|r| r.d_p).unwrap_or(0.0);
        Ok(x0.max(space.dist(&self.anchor, &self.p)?.to_f64_lossy()))
    }

    /// CSV with a leading `# model=… scenario=…` comment line, then columns
    /// `n, <coordinates>, d_step, d_Tn, d_p`; floats carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, kind: ModelKind, scenario_hash: &str, mut out: W) -> Result<(), csv::Error> {
        writeln!(out, "# model={} family={} scenario={}", self.model, self.family, scenario_hash)?;
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["n".to_string()];
        header.extend(coordinate_names(kind));
        header.extend(["d_step", "d_Tn", "d_p"].map(String::from));
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![r.n.to_string()];
            row.extend(r.x.coords_f64().iter().map(|c| format!("{c:.16e}")));
            row.extend([r.d_step, r.d_tn, r.d_p].iter().map(|c| format!("{c:.16e}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the anchored iteration with `u = 0` next to the Hilbert-space form
/// `y_{n+1} = (1 − λ_n) β_n y_n + λ_n T_n(β_n y_n)` in plain vector arithmetic
/// and reports the largest deviation; passes when `|x_n − y_n| ≤ tol·(1 + n)`.
pub fn check_hilbert_special_case<T: Scalar>(
    space: &SpaceModel<T>,
    family: &MappingFamily<T>,
    bundle: &ScheduleBundle,
    x0: &Point<T>,
    steps: u64,
    tol: f64,
) -> Result<AxiomReport, EngineError> {
    if !matches!(space.kind(), ModelKind::Euclidean(_)) {
        return Err(EngineError::InvalidInput(format!("the Hilbert form needs a Euclidean model, not {}", space.label())));
    }
    space.validate(x0)?;
    let coords = |p: &Point<T>| -> Vec<T> {
        match p {
            Point::Euclidean(v) => v.clone(),
            _ => unreachable!("validated Euclidean point"),
        }
    };
    let origin = space.origin();
    let mut state = IterationState::new(origin, x0.clone());
    let mut y = coords(x0);
    let (mut worst, mut worst_n, mut pass) = (0.0f64, 0u64, true);
    for n in 0..=steps {
        let dev = coords(&state.x).iter().zip(&y).map(|(a, b)| (*a - *b).to_f64_lossy().powi(2)).sum::<f64>().sqrt();
        if dev > worst || dev.is_nan() {
            worst = if dev.is_nan() { f64::INFINITY } else { dev };
            worst_n = n;
        }
        if !(dev <= tol * (1.0 + n as f64)) {
            pass = false;
        }
        if n == steps {
            break;
        }
        let (beta, lambda): (T, T) = (bundle.beta(n), bundle.lambda(n));
        let by: Vec<T> = y.iter().map(|c| beta * *c).collect();
        let tby = coords(&family.apply(space, n, &Point::Euclidean(by.clone()))?);
        y = by.iter().zip(&tby).map(|(a, b)| (T::one() - lambda) * *a + lambda * *b).collect();
        state = step(&state, family, bundle, space)?;
    }
    Ok(AxiomReport {
        axiom: "hilbert_special_case".into(),
        samples: steps as usize + 1,
        max_violation: worst,
        worst_case_inputs: json!({ "n": worst_n, "family": family.label() }),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SampleSpec;
    use crate::mappings::{ConvexFunction, SingleMap, RESOLVENT_MAX_ITER, RESOLVENT_TOL};
    use crate::schedules::{preset, Sequence};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn harmonic() -> ScheduleBundle {
        preset("harmonic").unwrap()
    }

    fn e(v: &[f64]) -> Point<f64> {
        Point::euclidean(v.to_vec())
    }

    fn x_coord(p: &Point<f64>) -> f64 {
        p.coords_f64()[0]
    }

    fn prox_at_origin() -> MappingFamily<f64> {
        MappingFamily::Proximal { function: ConvexFunction::HalfSquaredNorm { center: e(&[0.0, 0.0]) }, gamma: "ratio:1,2,1,1".parse().unwrap() }
    }

    #[test]
    fn identity_family_closed_form() {
        let space = SpaceModel::euclidean(1).unwrap();
        let s0 = IterationState::new(e(&[0.0]), e(&[1.0]));
        let s1 = step(&s0, &MappingFamily::Identity, &harmonic(), &space).unwrap();
        assert_eq!(x_coord(&s1.x), 0.5);
        assert_eq!(x_coord(s1.u_prev.as_ref().unwrap()), 0.5);
        let traj = run(&space, &MappingFamily::Identity, &harmonic(), &e(&[0.0]), &e(&[1.0]), 200).unwrap();
        assert_eq!(traj.len(), 201);
        for r in &traj.records {
            assert!((x_coord(&r.x) - 1.0 / (r.n as f64 + 1.0)).abs() < 1e-14);
        }
        let first: Vec<f64> = traj.records[..4].iter().map(|r| x_coord(&r.x)).collect();
        for (got, want) in first.iter().zip([1.0, 0.5, 1.0 / 3.0, 0.25]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn rotation_first_step_by_hand() {
        let space = SpaceModel::euclidean(2).unwrap();
        let s0 = IterationState::new(e(&[0.0, 0.0]), e(&[1.0, 0.0]));
        let s1 = step(&s0, &MappingFamily::Rotation { angle: FRAC_PI_2 }, &harmonic(), &space).unwrap();
        let u0 = s1.u_prev.unwrap().coords_f64();
        let x1 = s1.x.coords_f64();
        assert!((u0[0] - 0.5).abs() < 1e-15 && u0[1].abs() < 1e-15);
        assert!((x1[0] - 0.25).abs() < 1e-15 && (x1[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn single_step_run_has_two_records() {
        let space = SpaceModel::poincare_disk();
        let u = Point::disk(0.3, -0.2).unwrap();
        let x0 = Point::disk(-0.5, 0.4).unwrap();
        let traj = run(&space, &MappingFamily::Rotation { angle: 1.0 }, &harmonic(), &u, &x0, 1).unwrap();
        assert_eq!(traj.records.iter().map(|r| r.n).collect::<Vec<_>>(), vec![0, 1]);
        assert!(run(&space, &MappingFamily::Identity, &harmonic(), &u, &x0, 0).is_err());
    }

    #[test]
    fn anchor_combination_is_recomputable() {
        let space = SpaceModel::euclidean(2).unwrap();
        let u = e(&[0.6, -0.3]);
        let traj = run(&space, &prox_at_origin(), &harmonic(), &u, &e(&[1.5, 2.0]), 100).unwrap();
        for r in &traj.records {
            let again = anchor_combination(&space, &harmonic(), &u, &r.x, r.n).unwrap();
            assert!(space.dist(&again, &r.u).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn proximal_distances_to_fixed_point_do_not_increase() {
        let space = SpaceModel::euclidean(2).unwrap();
        let traj = run(&space, &prox_at_origin(), &harmonic(), &e(&[0.0, 0.0]), &e(&[1.0, 0.0]), 1000).unwrap();
        for w in traj.records.windows(2) {
            assert!(w[1].d_p <= w[0].d_p + 1e-12);
        }
    }

    #[test]
    fn runs_stay_in_the_ball_of_radius_m() {
        let resolvent = |c: Point<f64>| MappingFamily::Resolvent {
            base: SingleMap::BallProjection { center: c, radius: 0.3 },
            gamma: harmonic().gamma_sequence().clone(),
            inner_tol: RESOLVENT_TOL,
            max_iter: RESOLVENT_MAX_ITER,
        };
        let cases: Vec<(SpaceModel<f64>, MappingFamily<f64>, Point<f64>, Point<f64>)> = vec![
            (SpaceModel::euclidean(2).unwrap(), MappingFamily::Rotation { angle: 1.0 }, e(&[0.6, -0.3]), e(&[1.5, 2.0])),
            (SpaceModel::euclidean(2).unwrap(), resolvent(e(&[0.2, 0.1])), e(&[0.6, -0.3]), e(&[1.5, 2.0])),
            (
                SpaceModel::poincare_disk(),
                MappingFamily::MetricProjection { center: Point::disk(0.1, 0.05).unwrap(), radius: 0.3 },
                Point::disk(0.3, -0.2).unwrap(),
                Point::disk(-0.5, 0.4).unwrap(),
            ),
            (
                SpaceModel::tripod(),
                MappingFamily::Proximal { function: ConvexFunction::HalfSquaredNorm { center: Point::tripod(2, 0.4).unwrap() }, gamma: harmonic().gamma_sequence().clone() },
                Point::tripod(0, 0.7).unwrap(),
                Point::tripod(1, 2.0).unwrap(),
            ),
        ];
        for (space, fam, u, x0) in cases {
            let traj = run(&space, &fam, &harmonic(), &u, &x0, 10_000).unwrap();
            let m = traj.radius(&space).unwrap();
            for r in &traj.records {
                assert!(r.d_p <= m + 1e-9, "{} n={}", space.label(), r.n);
                assert!(space.dist(&r.u, &traj.p).unwrap() <= m + 1e-9);
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let space = SpaceModel::tripod();
        let fam = MappingFamily::Rotation { angle: 2.0 * FRAC_PI_3 };
        let (u, x0) = (Point::tripod(0, 0.7).unwrap(), Point::tripod(1, 2.0).unwrap());
        assert_eq!(run(&space, &fam, &harmonic(), &u, &x0, 500).unwrap(), run(&space, &fam, &harmonic(), &u, &x0, 500).unwrap());
    }

    #[test]
    fn solver_failure_keeps_partial_trajectory() {
        let space = SpaceModel::euclidean(2).unwrap();
        let fam = MappingFamily::Resolvent {
            base: SingleMap::Rotation { angle: 1.0 },
            gamma: Sequence::constant(1, 1).unwrap(),
            inner_tol: 1e-12,
            max_iter: 3,
        };
        let err = run(&space, &fam, &harmonic(), &e(&[0.0, 0.0]), &e(&[5.0, 5.0]), 10).unwrap_err();
        assert!(matches!(err.error, EngineError::Mapping(MappingError::SolverFailure { .. })));
        assert_eq!(err.partial.len() as u64, err.at);
    }

    #[test]
    fn hilbert_form_agrees() {
        let space = SpaceModel::euclidean(2).unwrap();
        let x0 = e(&[1.5, 2.0]);
        let id = check_hilbert_special_case(&space, &MappingFamily::Identity, &harmonic(), &x0, 100, 1e-10).unwrap();
        assert!(id.pass && id.max_violation == 0.0);
        let rot = check_hilbert_special_case(&space, &MappingFamily::Rotation { angle: FRAC_PI_3 }, &harmonic(), &x0, 100, 1e-10).unwrap();
        assert!(rot.pass && rot.max_violation <= 1e-10);
        assert!(check_hilbert_special_case(&space, &prox_at_origin(), &harmonic(), &x0, 100, 1e-10).unwrap().pass);
        assert!(check_hilbert_special_case(&SpaceModel::tripod(), &MappingFamily::Identity, &harmonic(), &Point::tripod(0, 1.0).unwrap(), 5, 1e-10).is_err());
    }

    #[test]
    fn csv_layout() {
        let space = SpaceModel::euclidean(2).unwrap();
        let traj = run(&space, &MappingFamily::Identity, &harmonic(), &e(&[0.0, 0.0]), &e(&[1.0, 0.0]), 2).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(space.kind(), "abc123", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# model=euclidean(2) family=identity scenario=abc123");
        assert_eq!(lines[1], "n,x0,x1,d_step,d_Tn,d_p");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("0,1.0000000000000000e0,0.0000000000000000e0,"));
        // 17 significant digits round-trip every value
        let x2: f64 = lines[4].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(x2, traj.records[2].x.coords_f64()[0]);
    }

    #[test]
    fn sampled_starting_points_in_single_precision() {
        let space = SpaceModel::<f32>::poincare_disk();
        let mut s = SampleSpec::new(1, 1, 1.0).unwrap().sampler("engine");
        let (u, x0) = (space.sample_point(&mut s, 1.0), space.sample_point(&mut s, 1.0));
        let traj = run(&space, &MappingFamily::Rotation { angle: 0.5f32 }, &harmonic(), &u, &x0, 50).unwrap();
        assert!(traj.records.iter().all(|r| r.d_p.is_finite()));
    }
}
