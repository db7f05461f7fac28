use matscale::matrix::{check_scalable, read_matrix_market, scc_decompose, write_matrix_market, Scalability};
use matscale::{Error, SparseMatrix};
use proptest::prelude::*;

fn pattern(n: usize) -> impl Strategy<Value = SparseMatrix> {
    prop::collection::vec(prop::bool::weighted(0.35), n * n).prop_filter_map("empty", move |bits| {
        let t: Vec<_> = (0..n * n).filter(|&k| bits[k]).map(|k| (k / n, k % n, 1.0 + (k % 7) as f64)).collect();
        SparseMatrix::from_triplets(n, &t).ok().filter(|a| a.nnz() > 0)
    })
}

fn reach(a: &SparseMatrix) -> Vec<Vec<bool>> {
    let n = a.n();
    let mut r = vec![vec![false; n]; n];
    for i in 0..n {
        r[i][i] = true;
    }
    for (i, j, _) in a.iter() {
        r[i][j] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

proptest! {
    #[test]
    fn scc_matches_mutual_reachability(a in (1usize..=6).prop_flat_map(pattern)) {
        let s = scc_decompose(&a);
        let r = reach(&a);
        let n = a.n();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(s.component_id[i] == s.component_id[j], r[i][j] && r[j][i]);
            }
        }
        for (i, j, _) in a.iter() {
            prop_assert!(s.component_id[i] <= s.component_id[j]);
        }
        prop_assert_eq!(s.is_strongly_connected, s.components.len() == 1);
        for (id, comp) in s.components.iter().enumerate() {
            for &v in comp {
                prop_assert_eq!(s.component_id[v], id);
            }
        }
    }

    #[test]
    fn scalability_matches_zero_minor_enumeration(
        a in (1usize..=5).prop_flat_map(pattern),
        seed in prop::collection::vec(0u32..4, 20),
    ) {
        let n = a.n();
        // Integer targets with equal sums keep the comparison exact.
        let mut r: Vec<f64> = (0..n).map(|i| seed[i] as f64).collect();
        let mut c: Vec<f64> = (0..n).map(|j| seed[n + j] as f64).collect();
        let diff = c.iter().sum::<f64>() - r.iter().sum::<f64>();
        if diff > 0.0 {
            r[0] += diff;
        } else {
            c[0] -= diff;
        }
        let mut violated = false;
        for rows in 0u32..(1 << n) {
            for cols in 0u32..(1 << n) {
                let zero = a.iter().all(|(i, j, _)| rows >> i & 1 == 0 || cols >> j & 1 == 0);
                if !zero {
                    continue;
                }
                let supply: f64 = (0..n).filter(|i| rows >> i & 1 == 0).map(|i| r[i]).sum();
                let demand: f64 = (0..n).filter(|j| cols >> j & 1 == 1).map(|j| c[j]).sum();
                if supply < demand {
                    violated = true;
                }
            }
        }
        match check_scalable(&a, &r, &c).unwrap() {
            Scalability::Infeasible { rows, cols } => {
                prop_assert!(violated);
                for &i in &rows {
                    for &j in &cols {
                        prop_assert_eq!(a.get(i, j), 0.0);
                    }
                }
                let supply: f64 = (0..n).filter(|i| !rows.contains(i)).map(|i| r[i]).sum();
                let demand: f64 = cols.iter().map(|&j| c[j]).sum();
                prop_assert!(supply < demand);
            }
            _ => prop_assert!(!violated),
        }
    }

    #[test]
    fn matrix_market_round_trip(a in (1usize..=8).prop_flat_map(pattern), scale in -30i32..30) {
        let a = a.scaled(2f64.powi(scale)).unwrap().with_values(
            a.values().iter().enumerate().map(|(k, v)| v * 2f64.powi(scale) * (1.0 + k as f64 / 3.0)).collect()
        ).unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf).unwrap();
        let b = read_matrix_market(&buf[..]).unwrap();
        prop_assert_eq!(a.to_dense(), b.to_dense());
    }
}

#[test]
fn matrix_market_variants() {
    let sym = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 3\n1 1 2\n2 1 3\n3 2 0.5\n";
    let a = read_matrix_market(sym.as_bytes()).unwrap();
    assert_eq!(a.nnz(), 5);
    assert_eq!(a.get(0, 1), 3.0);
    assert_eq!(a.get(1, 0), 3.0);
    assert_eq!(a.get(1, 2), 0.5);

    let pat = "%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 2\n2 1\n";
    let a = read_matrix_market(pat.as_bytes()).unwrap();
    assert_eq!(a.to_dense(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);

    // Duplicates are summed.
    let dup = "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 2 1\n1 2 2\n2 1 1\n";
    assert_eq!(read_matrix_market(dup.as_bytes()).unwrap().get(0, 1), 3.0);
}

#[test]
fn matrix_market_errors() {
    let cases = [
        ("%%MatrixMarket matrix coordinate real general\n2 3 1\n1 1 1\n", "square"),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n", "range"),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 -1\n", "negative"),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n", "parse"),
        ("not a header\n", "parse"),
    ];
    for (text, kind) in cases {
        let err = read_matrix_market(text.as_bytes()).unwrap_err();
        let ok = match kind {
            "square" => matches!(err, Error::NotSquare { .. }),
            "range" => matches!(err, Error::IndexOutOfRange { line: Some(3), .. }),
            "negative" => matches!(err, Error::NegativeEntry { line: Some(3), .. }),
            _ => matches!(err, Error::Parse { .. }),
        };
        assert!(ok, "{kind}: {err}");
    }
}

#[test]
fn scaling_and_balancing_apply_diagonals() {
    let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, 4.0]]).unwrap();
    let m = a.apply_scaling(&[0.0, 1.0], &[2f64.ln(), 0.0]).unwrap();
    assert!((m.get(0, 0) - 2.0).abs() < 1e-15);
    assert!((m.get(1, 1) - 4.0 * 1f64.exp()).abs() < 1e-12);
    let b = a.apply_balancing(&[1.0, 0.0]).unwrap();
    assert!((b.get(0, 1) - 2.0 * 1f64.exp()).abs() < 1e-12);
    assert_eq!(b.get(0, 0), 1.0);
    let e = a.block_embedding();
    assert_eq!(e.n(), 4);
    assert_eq!(e.nnz(), a.nnz());
    assert_eq!(e.get(0, 2), 1.0);
}
