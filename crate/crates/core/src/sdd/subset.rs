use super::SddMatrix;

/// Greedy index set `F` such that `M[F, F]` is `alpha`-SDD:
/// `M_ii >= (1 + alpha) * sum_{j in F, j != i} |M_ij|` for every `i in F`.
///
/// Vertices are scanned by decreasing diagonal slack (ties by index); a vertex is
/// admitted only if it and all of its admitted neighbours still satisfy the
/// inequality. The result is sorted.
pub fn find_strong_subset(m: &SddMatrix, alpha: f64) -> Vec<usize> {
    let n = m.n();
    let mut order: Vec<usize> = (0..n).collect();
    let slack: Vec<f64> = (0..n).map(|i| m.slack(i)).collect();
    order.sort_by(|&a, &b| slack[b].total_cmp(&slack[a]).then(a.cmp(&b)));
    let cap: Vec<f64> = m.diag().iter().map(|d| d / (1.0 + alpha)).collect();

    let mut in_f = vec![false; n];
    // Off-diagonal mass from admitted neighbours.
    let mut mass = vec![0.0; n];
    for &v in &order {
        let mut own = 0.0;
        let mut ok = true;
        for (j, a) in m.row(v) {
            if in_f[j] {
                let w = -a;
                own += w;
                if mass[j] + w > cap[j] {
                    ok = false;
                    break;
                }
            }
        }
        if !ok || own > cap[v] {
            continue;
        }
        in_f[v] = true;
        mass[v] = own;
        for (j, a) in m.row(v) {
            if in_f[j] {
                mass[j] -= a;
            }
        }
    }
    (0..n).filter(|&i| in_f[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_takes_everything() {
        let m = SddMatrix::from_weights(vec![1.0, 2.0, 3.0], &[]).unwrap();
        assert_eq!(find_strong_subset(&m, 4.0), vec![0, 1, 2]);
    }

    #[test]
    fn two_by_two_takes_one() {
        let m = SddMatrix::from_weights(vec![2.0, 2.0], &[(0, 1, 1.0)]).unwrap();
        assert_eq!(find_strong_subset(&m, 4.0).len(), 1);
    }

    #[test]
    fn path_subset_is_strong() {
        let n = 5;
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        let mut diag = vec![3.0; n];
        diag[0] = 2.0;
        diag[n - 1] = 2.0;
        let m = SddMatrix::from_weights(diag, &edges).unwrap();
        let f = find_strong_subset(&m, 4.0);
        assert!(!f.is_empty());
        assert!(m.submatrix(&f).is_alpha_sdd(4.0));
    }
}
