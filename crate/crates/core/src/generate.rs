//! Seeded random instances for tests, benchmarks and the CLI.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::SparseMatrix;
use crate::sdd::SddMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `exp(U(-spread, spread))`.
pub fn log_uniform<R: Rng>(rng: &mut R, spread: f64) -> f64 {
    if spread == 0.0 {
        1.0
    } else {
        rng.gen_range(-spread..spread).exp()
    }
}

fn build(n: usize, entries: Vec<(usize, usize)>, rng: &mut impl Rng, spread: f64) -> SparseMatrix {
    let t: Vec<(usize, usize, f64)> = entries
        .into_iter()
        .map(|(i, j)| (i, j, log_uniform(rng, spread)))
        .collect();
    SparseMatrix::from_triplets(n, &t).expect("generated entries are valid")
}

/// Strongly connected pattern: a random Hamiltonian cycle plus random extra
/// off-diagonal entries, about `m` entries in total.
pub fn strongly_connected<R: Rng>(rng: &mut R, n: usize, m: usize, spread: f64) -> SparseMatrix {
    assert!(n >= 2);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut e: BTreeSet<(usize, usize)> = (0..n).map(|k| (perm[k], perm[(k + 1) % n])).collect();
    let target = m.min(n * (n - 1)).max(n);
    while e.len() < target {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i != j {
            e.insert((i, j));
        }
    }
    build(n, e.into_iter().collect(), rng, spread)
}

/// Pattern containing a random permutation (so it has a perfect matching) plus
/// about `m - n` random entries.
pub fn with_matching<R: Rng>(rng: &mut R, n: usize, m: usize, spread: f64) -> SparseMatrix {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut e: BTreeSet<(usize, usize)> = (0..n).map(|i| (i, perm[i])).collect();
    let target = m.min(n * n).max(n);
    while e.len() < target {
        e.insert((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    build(n, e.into_iter().collect(), rng, spread)
}

pub fn positive<R: Rng>(rng: &mut R, n: usize, spread: f64) -> SparseMatrix {
    let e = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    build(n, e, rng, spread)
}

/// Targets `(r, c)` for which `a` is exactly scalable: the margins of a random
/// positive matrix on `supp(a)`, normalized to `max(||r||_inf, ||c||_inf) = 1`.
pub fn feasible_targets<R: Rng>(rng: &mut R, a: &SparseMatrix, spread: f64) -> (Vec<f64>, Vec<f64>) {
    let b = a
        .with_values((0..a.nnz()).map(|_| log_uniform(rng, spread)).collect())
        .expect("positive values");
    let (r, c) = (b.row_sums(), b.col_sums());
    let s = r.iter().chain(&c).cloned().fold(0.0, f64::max);
    (r.iter().map(|v| v / s).collect(), c.iter().map(|v| v / s).collect())
}

/// Random SDD matrix with nonpositive off-diagonals: each pair is coupled with
/// probability `density`, and each row gets excess diagonal with probability
/// `slack_prob`.
pub fn sdd<R: Rng>(rng: &mut R, n: usize, density: f64, slack_prob: f64, spread: f64) -> SddMatrix {
    let mut edges = Vec::new();
    let mut diag = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(density) {
                let w = log_uniform(rng, spread);
                edges.push((i, j, w));
                diag[i] += w;
                diag[j] += w;
            }
        }
    }
    for d in diag.iter_mut() {
        if rng.gen_bool(slack_prob) {
            *d += log_uniform(rng, spread);
        }
    }
    SddMatrix::from_weights(diag, &edges).expect("valid weights")
}

pub fn vector<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}
