use matscale::baseline::{brute_force_oracle, osborne, sinkhorn, BaselineConfig, SweepOrder};
use matscale::generate as gen;
use matscale::objective::balancing_error;
use matscale::sdd::SddMatrix;
use matscale::SparseMatrix;

#[test]
fn sinkhorn_scales_positive_matrices() {
    let mut rng = gen::rng(31);
    let cfg = BaselineConfig {
        target_error: 1e-10,
        ..Default::default()
    };
    for n in [2, 5, 20] {
        let a = gen::positive(&mut rng, n, 2.0);
        let (r, c) = gen::feasible_targets(&mut rng, &a, 1.0);
        let res = sinkhorn(&a, &r, &c, &cfg).unwrap();
        assert!(res.converged && res.error <= 1e-10);
    }
}

#[test]
fn osborne_orders_agree() {
    let mut rng = gen::rng(32);
    let a = gen::strongly_connected(&mut rng, 15, 60, 2.0);
    let mut errs = Vec::new();
    for order in [SweepOrder::Cyclic, SweepOrder::Greedy] {
        let cfg = BaselineConfig {
            target_error: 1e-8,
            order,
            ..Default::default()
        };
        let res = osborne(&a, &cfg).unwrap();
        assert!(res.converged);
        errs.push(balancing_error(&a.apply_balancing(&res.factors.x).unwrap()).unwrap());
    }
    assert!(errs.iter().all(|e| *e <= 1e-8));
}

#[test]
fn sweep_cap_reports_not_converged() {
    let a = SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
    let cfg = BaselineConfig {
        max_sweeps: 10,
        target_error: 1e-12,
        ..Default::default()
    };
    let res = sinkhorn(&a, &[1.0, 1.0], &[1.0, 1.0], &cfg).unwrap();
    assert!(!res.converged);
    assert!(res.error > 1e-12);
}

#[test]
fn brute_force_oracle_matches_a_grid_search() {
    let mut rng = gen::rng(33);
    for _ in 0..20 {
        let m = gen::sdd(&mut rng, 2, 1.0, 0.5, 1.0);
        let b = gen::vector(&mut rng, 2, 3.0);
        let (z, v) = brute_force_oracle(&m, &b, 1.0).unwrap();
        assert!((m.model_value(&z, &b) - v).abs() < 1e-12);
        let mut best = f64::INFINITY;
        for i in 0..=200 {
            for j in 0..=200 {
                let p = [-1.0 + i as f64 / 100.0, -1.0 + j as f64 / 100.0];
                best = best.min(m.model_value(&p, &b));
            }
        }
        assert!(v <= best + 1e-12);
        assert!(v >= best - 0.05);
    }
}

#[test]
fn brute_force_oracle_handles_singular_blocks() {
    // Laplacian of one edge: singular, with a flat direction.
    let m = SddMatrix::from_weights(vec![1.0, 1.0], &[(0, 1, 1.0)]).unwrap();
    let (z, v) = brute_force_oracle(&m, &[1.0, 1.0], 1.0).unwrap();
    assert!((v + 2.0).abs() < 1e-12, "{z:?} {v}");
}
