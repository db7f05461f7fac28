use matscale::generate as gen;
use matscale::newton::{box_newton_minimize, solve_balancing, solve_scaling, DriverConfig, NewtonConfig, StopReason};
use matscale::objective::{balancing_error, BalancingObjective, ScalingObjective, SorObjective};
use matscale::sdd::{ChainOracle, ExactBoxOracle, KOracle, PreparedOracle, SddMatrix};
use matscale::{Error, Result, SparseMatrix};

#[test]
fn exact_and_chain_oracles_reach_the_same_minimum() {
    let mut rng = gen::rng(21);
    for n in [3, 5, 7] {
        let a = gen::strongly_connected(&mut rng, n, 3 * n, 1.0);
        let obj = BalancingObjective::new(a).regularize(1e-3, 2.0).unwrap();
        let cfg = NewtonConfig {
            max_iterations: 400,
            target_error: Some(1e-10),
            ..Default::default()
        };
        let exact = box_newton_minimize(&obj, &ExactBoxOracle, &vec![0.0; n], &cfg).unwrap();
        let chain = box_newton_minimize(&obj, &ChainOracle::default(), &vec![0.0; n], &cfg).unwrap();
        assert!((exact.value - chain.value).abs() < 1e-9 * exact.value);
        // The unit-k oracle never needs more iterations than a larger k.
        assert!(exact.iterations <= chain.iterations);
    }
}

#[test]
fn iterates_never_increase_the_objective() {
    let mut rng = gen::rng(22);
    let a = gen::with_matching(&mut rng, 12, 40, 2.0);
    let (r, c) = gen::feasible_targets(&mut rng, &a, 1.0);
    let obj = ScalingObjective::new(a, r, c).unwrap().regularize(1e-3, 4.0);
    let cfg = NewtonConfig {
        max_iterations: 300,
        keep_iterates: true,
        step_extension: true,
        ..Default::default()
    };
    let out = box_newton_minimize(&obj, &ChainOracle::accelerated(), &vec![0.0; 24], &cfg).unwrap();
    let v: Vec<f64> = out.trace.records.iter().map(|r| r.value).collect();
    assert!(v.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));
    assert_eq!(out.trace.iterates.len(), v.len());
    assert!(out.trace.r_inf.is_finite());
    assert!(obj.error_metric(&out.x).unwrap() < 1e-6);
}

/// Returns a step longer than its declared `k`.
struct TooLong;
struct TooLongPrepared(usize);

impl KOracle for TooLong {
    fn prepare(&self, h: &SddMatrix) -> Result<Box<dyn PreparedOracle>> {
        Ok(Box::new(TooLongPrepared(h.n())))
    }
}

impl PreparedOracle for TooLongPrepared {
    fn k(&self) -> f64 {
        1.0
    }
    fn solve(&self, _scale: f64, b: &[f64]) -> Result<Vec<f64>> {
        Ok(b.iter().map(|v| -3.0 * v.signum()).collect::<Vec<_>>()[..self.0].to_vec())
    }
}

/// Returns an ascent direction.
struct Uphill;
struct UphillPrepared;

impl KOracle for Uphill {
    fn prepare(&self, _h: &SddMatrix) -> Result<Box<dyn PreparedOracle>> {
        Ok(Box::new(UphillPrepared))
    }
}

impl PreparedOracle for UphillPrepared {
    fn k(&self) -> f64 {
        1.0
    }
    fn solve(&self, _scale: f64, b: &[f64]) -> Result<Vec<f64>> {
        Ok(b.iter().map(|v| v.signum()).collect())
    }
}

#[test]
fn broken_oracles_are_detected() {
    let a = SparseMatrix::from_dense(&[vec![0.0, 4.0], vec![1.0, 0.0]]).unwrap();
    let obj = BalancingObjective::new(a);
    let cfg = NewtonConfig::default();
    for oracle in [&TooLong as &dyn KOracle, &Uphill] {
        let err = box_newton_minimize(&obj, oracle, &[0.0, 0.0], &cfg).unwrap_err();
        assert!(matches!(err, Error::OracleViolation(_)), "{err}");
    }
}

#[test]
fn drivers_reach_tight_targets() {
    let mut rng = gen::rng(23);
    let cfg = DriverConfig::default();
    for n in [4, 16, 64] {
        let a = gen::strongly_connected(&mut rng, n, 4 * n, 3.0);
        let res = solve_balancing(&a, 1e-10, &cfg).unwrap();
        assert!(res.converged && res.error <= 1e-10);
        let check = balancing_error(&a.apply_balancing(&res.factors.x).unwrap()).unwrap();
        assert!((check - res.error).abs() <= 1e-12);

        let a = gen::with_matching(&mut rng, n, 4 * n, 3.0);
        let (r, c) = gen::feasible_targets(&mut rng, &a, 2.0);
        // Targets above one are rescaled internally.
        let (r, c): (Vec<f64>, Vec<f64>) = (r.iter().map(|v| 3.0 * v).collect(), c.iter().map(|v| 3.0 * v).collect());
        let res = solve_scaling(&a, &r, &c, 1e-10, &cfg).unwrap();
        assert!(res.converged && res.error <= 1e-10, "{}", res.error);
        assert!(res.notes.iter().any(|s| s.contains("rescaled")));
    }
}

#[test]
fn reducible_balancing_suppresses_cross_entries() {
    // Two strongly connected blocks {0, 1} -> {2, 3}.
    let a = SparseMatrix::from_dense(&[
        vec![0.0, 1.0, 5.0, 0.0],
        vec![2.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 3.0],
        vec![0.0, 0.0, 1.0, 0.0],
    ])
    .unwrap();
    let res = solve_balancing(&a, 1e-8, &DriverConfig::default()).unwrap();
    assert!(res.converged, "{:?}", res.notes);
    assert!(res.error <= 1e-8);
    assert!(!res.notes.is_empty());
}

#[test]
fn infeasible_scaling_is_reported() {
    let a = SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
    // Column 0 needs 0.9 but only row 0 reaches it while row 0 supplies 0.1.
    let err = solve_scaling(&a, &[0.1, 0.9], &[0.9, 0.1], 1e-6, &DriverConfig::default()).unwrap_err();
    assert!(matches!(err, Error::Infeasible(_)));
}

#[test]
fn almost_scalable_pattern_converges_with_growing_factors() {
    // Upper triangular with full diagonal: only the diagonal has total support.
    let a = SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
    let res = solve_scaling(&a, &[1.0, 1.0], &[1.0, 1.0], 1e-8, &DriverConfig::default()).unwrap();
    assert!(res.converged && res.error <= 1e-8);
    assert!(res.kappa > 10.0);
}

#[test]
fn stop_reasons() {
    let a = SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let obj = BalancingObjective::new(a);
    let out = box_newton_minimize(&obj, &ChainOracle::default(), &[0.0, 0.0], &NewtonConfig::default()).unwrap();
    assert_eq!(out.stop, StopReason::Stationary);
    assert_eq!(out.iterations, 0);
}
