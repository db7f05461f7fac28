use matscale::generate as gen;
use matscale::ipm::{
    gap_bound, ipm_balance, ipm_scale, ipm_solve, path_follow, pcg, ConeProgram, IpmConfig, IpmDriverConfig,
    Schedule, SolveBackend, Task,
};
use matscale::objective::balancing_error;
use matscale::{Error, SparseMatrix};

#[test]
fn start_point_is_interior_and_nu_counts_constraints() {
    let mut rng = gen::rng(41);
    let a = gen::strongly_connected(&mut rng, 6, 14, 1.0);
    let prog = ConeProgram::new(a.clone(), vec![0.1; 6], 2.0).unwrap();
    let (t, x) = prog.start();
    assert!(prog.is_interior(&t, &x));
    assert_eq!(prog.nu(), (3 * a.nnz() + 12) as f64);
    assert!((prog.u - (a.entry_sum() + 0.6 * 2.0)).abs() < 1e-12);
    let mut bad = x.clone();
    bad[0] = 2.0;
    assert!(matches!(prog.eval(&t, &bad, 1.0), Err(Error::NotInterior(_))));
}

#[test]
fn path_following_certifies_its_gap() {
    let mut rng = gen::rng(42);
    for k in 0..6 {
        let n = 3 + k;
        let a = gen::strongly_connected(&mut rng, n, 3 * n, 1.0);
        let d = gen::vector(&mut rng, n, 0.2);
        let prog = ConeProgram::new(a, d, 2.0).unwrap();
        for schedule in [Schedule::ShortStep, Schedule::LongStep] {
            let cfg = IpmConfig {
                schedule,
                ..Default::default()
            };
            let out = path_follow(&prog, 1e-6, &cfg, &mut |_| false).unwrap();
            assert!(!out.stopped_early);
            assert!(out.gap_bound <= 1e-6);
            assert!(out.decrement <= 0.125);
            assert!(prog.is_interior(&out.t, &out.x));
            // Each t sits near its lower bound at the end.
            for e in 0..prog.m() {
                assert!(out.t[e].ln() - prog.log_entry(e, &out.x) < 1e-3);
            }
        }
    }
}

#[test]
fn long_step_uses_fewer_newton_steps() {
    let mut rng = gen::rng(43);
    let a = gen::strongly_connected(&mut rng, 10, 30, 1.0);
    let prog = ConeProgram::new(a, vec![0.0; 10], 2.0).unwrap();
    let short = path_follow(&prog, 1e-8, &IpmConfig::default(), &mut |_| false).unwrap();
    let long = path_follow(
        &prog,
        1e-8,
        &IpmConfig {
            schedule: Schedule::LongStep,
            ..Default::default()
        },
        &mut |_| false,
    )
    .unwrap();
    assert!(long.newton_steps < short.newton_steps);
}

#[test]
fn gap_bound_formula() {
    assert_eq!(gap_bound(4.0, 0.0, 2.0), 2.0);
    assert!(gap_bound(4.0, 0.1, 1.0) > 4.0);
}

#[test]
fn pcg_solves_sdd_systems() {
    let mut rng = gen::rng(44);
    let m = gen::sdd(&mut rng, 30, 0.2, 1.0, 2.0);
    let b = gen::vector(&mut rng, 30, 1.0);
    let x = pcg(&m, &b, 1e-12, 1000).unwrap();
    let r: f64 = m.matvec(&x).iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    assert!(r <= 1e-11 * b.iter().map(|v| v * v).sum::<f64>().sqrt());
}

#[test]
fn large_programs_use_the_iterative_solver() {
    let mut rng = gen::rng(45);
    let a = gen::strongly_connected(&mut rng, 150, 600, 1.0);
    let res = ipm_balance(&a, 1e-4, &IpmDriverConfig::default()).unwrap();
    assert!(res.converged && res.error <= 1e-4);
    let dense = IpmDriverConfig {
        ipm: IpmConfig {
            backend: SolveBackend::Dense,
            ..Default::default()
        },
        ..Default::default()
    };
    let small = gen::strongly_connected(&mut rng, 8, 20, 1.0);
    let res = ipm_balance(&small, 1e-6, &dense).unwrap();
    assert!(res.error <= 1e-6);
}

#[test]
fn ipm_balances_and_scales() {
    let a = SparseMatrix::from_dense(&[vec![0.0, 4.0], vec![1.0, 0.0]]).unwrap();
    let res = ipm_solve(&a, Task::Balance, 1e-8, &IpmDriverConfig::default()).unwrap();
    assert!(res.error <= 1e-8);
    let x = &res.factors.x;
    assert!(((x[0] - x[1]) - 0.5 * 0.25f64.ln()).abs() < 1e-6);
    assert!(balancing_error(&a.apply_balancing(x).unwrap()).unwrap() <= 1e-8);

    let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    let res = ipm_scale(&a, &[1.0, 1.0], &[1.0, 1.0], 1e-10, &IpmDriverConfig::default()).unwrap();
    assert!(res.error <= 1e-10);
    let m = a.apply_scaling(&res.factors.x, res.factors.y.as_ref().unwrap()).unwrap();
    let t = 2.0 / (2.0 + 6f64.sqrt());
    assert!((m.get(0, 0) - t).abs() < 1e-4);
}

#[test]
fn ipm_rejects_infeasible_targets() {
    let a = SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
    let err = ipm_scale(&a, &[0.1, 0.9], &[0.9, 0.1], 1e-6, &IpmDriverConfig::default()).unwrap_err();
    assert!(matches!(err, Error::Infeasible(_)));
}
