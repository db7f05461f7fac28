use matscale::generate as gen;
use matscale::objective::{balancing_error, scaling_error, BalancingObjective, ScalingObjective, SorObjective};
use matscale::SparseMatrix;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(p, q)| (p - q).abs() <= tol * (1.0 + q.abs()))
}

#[test]
fn scaling_gradient_is_the_margin_residual() {
    let mut rng = gen::rng(1);
    for n in 2..10 {
        let a = gen::with_matching(&mut rng, n, 3 * n, 1.0);
        let (r, c) = gen::feasible_targets(&mut rng, &a, 1.0);
        let obj = ScalingObjective::new(a.clone(), r.clone(), c.clone()).unwrap();
        let (x, y) = (gen::vector(&mut rng, n, 1.0), gen::vector(&mut rng, n, 1.0));
        let ev = obj.eval(&x, &y, true).unwrap();
        let m = a.apply_scaling(&x, &y).unwrap();
        let gx: Vec<f64> = m.row_sums().iter().zip(&r).map(|(p, q)| p - q).collect();
        let gy: Vec<f64> = m.col_sums().iter().zip(&c).map(|(p, q)| p - q).collect();
        assert!(close(&ev.gradient[..n], &gx, 1e-12));
        assert!(close(&ev.gradient[n..], &gy, 1e-12));
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p * q).sum::<f64>();
        assert!((ev.value - (m.entry_sum() - dot(&r, &x) - dot(&c, &y))).abs() < 1e-12 * ev.value.abs().max(1.0));
        // In the (x, -y) frame the Hessian is SDD.
        assert!(ev.hessian.unwrap().is_sdd(1e-12));
    }
}

#[test]
fn balancing_gradient_and_hessian() {
    let mut rng = gen::rng(2);
    for n in 2..10 {
        let a = gen::strongly_connected(&mut rng, n, 3 * n, 1.0);
        let obj = BalancingObjective::new(a.clone());
        let x = gen::vector(&mut rng, n, 1.0);
        let ev = obj.eval(&x, true).unwrap();
        let m = a.apply_balancing(&x).unwrap();
        let g: Vec<f64> = m.row_sums().iter().zip(m.col_sums()).map(|(p, q)| p - q).collect();
        assert!(close(&ev.gradient, &g, 1e-12));
        assert!((ev.value - m.entry_sum()).abs() < 1e-12 * ev.value);
        let h = ev.hessian.unwrap();
        assert!(h.is_sdd(1e-12));
        // The all-ones vector is in the kernel of the unregularized Hessian.
        let ones = vec![1.0; n];
        assert!(h.matvec(&ones).iter().all(|v| v.abs() < 1e-10 * ev.value));
    }
}

#[test]
fn regularizer_weights_and_terms() {
    let a = SparseMatrix::from_dense(&[vec![0.0, 2.0], vec![0.5, 0.0]]).unwrap();
    let w = BalancingObjective::regularization_weight(2, 0.5, 0.1, 3.0);
    assert!((w - 0.01 * 0.5 / (96.0 * 3f64.exp())).abs() < 1e-18);
    let reg = BalancingObjective::new(a.clone()).regularize(0.1, 3.0).unwrap();
    assert_eq!(reg.lambda, w);
    let x = [0.3, -0.2];
    let plain = BalancingObjective::new(a.clone()).value(&x).unwrap();
    let extra: f64 = x.iter().map(|v: &f64| v.exp() + (-v).exp()).sum::<f64>() * w;
    assert!((reg.value(&x).unwrap() - plain - extra).abs() < 1e-14);

    let w = ScalingObjective::regularization_weight(4, 0.2, 1.0);
    assert!((w - 0.04 / (36.0 * 16.0 * 1f64.exp())).abs() < 1e-18);
}

#[test]
fn best_shift_minimizes_along_ones() {
    let mut rng = gen::rng(3);
    let a = gen::strongly_connected(&mut rng, 6, 15, 1.0);
    let obj = BalancingObjective::new(a).regularize(0.5, 1.0).unwrap();
    let mut x = gen::vector(&mut rng, 6, 2.0);
    let f0 = obj.value(&x).unwrap();
    obj.recenter(&mut x);
    let f1 = obj.value(&x).unwrap();
    assert!(f1 <= f0);
    for d in [-1e-3, 1e-3] {
        let y: Vec<f64> = x.iter().map(|v| v + d).collect();
        assert!(obj.value(&y).unwrap() >= f1);
    }
}

#[test]
fn error_metrics() {
    let a = SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    assert_eq!(scaling_error(&a, &[2.0, 2.0], &[2.0, 2.0]), 0.0);
    assert!((scaling_error(&a, &[1.0, 1.0], &[2.0, 2.0]) - 2.0).abs() < 1e-15);
    assert_eq!(balancing_error(&a).unwrap(), 0.0);
    let b = SparseMatrix::from_dense(&[vec![0.0, 4.0], vec![1.0, 0.0]]).unwrap();
    // r - c = (3, -3), sum 5.
    assert!((balancing_error(&b).unwrap() - 18f64.sqrt() / 5.0).abs() < 1e-15);
}

#[test]
fn scaling_objective_rejects_bad_targets() {
    let a = SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    assert!(ScalingObjective::new(a.clone(), vec![1.0, 1.0], vec![1.0, 0.5]).is_err());
    assert!(ScalingObjective::new(a.clone(), vec![2.0, 0.0], vec![1.0, 1.0]).is_err());
    assert!(ScalingObjective::new(a, vec![-0.5, 1.0], vec![0.25, 0.25]).is_err());
}
