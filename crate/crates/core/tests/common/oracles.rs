//! Exact oracles and random strategies shared by the property suites.

use mfpencil::canon::Cluster;
use mfpencil::linalg::{inverse, Mat};
use proptest::prelude::*;

pub fn int_matrix(n: usize, lo: i64, hi: i64) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(lo..=hi, n), n)
}

pub fn to_mat(m: &[Vec<i64>]) -> Mat {
    Mat::from_fn(m.len(), m.len(), |i, j| m[i][j] as f64)
}

/// Integer `n x n` matrix of rank at most `r`, built as `X Y` with `X` n×r and `Y` r×n.
pub fn low_rank() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (2usize..=5)
        .prop_flat_map(|n| (Just(n), 0usize..=n))
        .prop_flat_map(|(n, r)| {
            (
                prop::collection::vec(prop::collection::vec(-3i64..=3, r), n),
                prop::collection::vec(prop::collection::vec(-3i64..=3, n), r),
            )
        })
        .prop_map(|(x, y)| {
            let n = x.len();
            let r = y.len();
            (0..n).map(|i| (0..n).map(|j| (0..r).map(|k| x[i][k] * y[k][j]).sum()).collect()).collect()
        })
}

pub fn exact_det(m: &[Vec<i64>]) -> i128 {
    match m.len() {
        0 => 1,
        1 => m[0][0] as i128,
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> =
                    m[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v).collect()).collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] as i128 * exact_det(&minor)
            })
            .sum(),
    }
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Largest order of a nonvanishing minor.
pub fn rank_by_minors(m: &[Vec<i64>]) -> usize {
    let n = m.len();
    (1..=n)
        .rev()
        .find(|&k| {
            subsets(n, k).iter().any(|rows| {
                subsets(n, k).iter().any(|cols| {
                    let sub: Vec<Vec<i64>> = rows.iter().map(|&r| cols.iter().map(|&c| m[r][c]).collect()).collect();
                    exact_det(&sub) != 0
                })
            })
        })
        .unwrap_or(0)
}

/// Faddeev–LeVerrier in exact integer arithmetic: ascending coefficients of `det(ξE - M)`.
pub fn leverrier(m: &[Vec<i64>]) -> Vec<i128> {
    let n = m.len();
    let mm: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut c = vec![0i128; n + 1];
    c[n] = 1;
    let mut mk = vec![vec![0i128; n]; n];
    for k in 1..=n {
        // M_k = M M_{k-1} + c_{n-k+1} E
        let mut next = vec![vec![0i128; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| mm[i][l] * mk[l][j]).sum::<i128>();
            }
            next[i][i] += c[n - k + 1];
        }
        mk = next;
        let tr: i128 = (0..n).map(|i| (0..n).map(|l| mm[i][l] * mk[l][i]).sum::<i128>()).sum();
        c[n - k] = -tr / k as i128;
    }
    c
}

/// Similarity `S D S⁻¹` of a block diagonal with triangular blocks on the given clusters.
pub fn hidden_clusters() -> impl Strategy<Value = (Mat, Vec<Cluster>)> {
    let sizes = prop::collection::vec(1usize..=3, 2..=3);
    (sizes, prop::collection::vec(0usize..7, 3), prop::collection::vec(-0.3f64..0.3, 81), prop::collection::vec(-0.8f64..0.8, 36))
        .prop_map(|(sizes, picks, noise, upper)| {
            // Values taken from a well-separated pool, without repeats.
            let pool = [-3.0, -1.5, -0.5, 0.0, 0.7, 1.9, 3.2];
            let mut chosen: Vec<f64> = Vec::new();
            for p in picks.iter().cycle().copied() {
                let v = pool[p % pool.len()];
                if !chosen.contains(&v) {
                    chosen.push(v);
                } else if let Some(v) = pool.iter().find(|v| !chosen.contains(v)) {
                    chosen.push(*v);
                }
                if chosen.len() == sizes.len() {
                    break;
                }
            }
            let clusters: Vec<Cluster> = sizes.iter().zip(&chosen).map(|(&size, &value)| Cluster { value, size }).collect();
            let n: usize = sizes.iter().sum();
            let mut d = Mat::zeros(n, n);
            let mut at = 0;
            let mut u = upper.iter().cycle();
            for c in &clusters {
                for i in 0..c.size {
                    d[(at + i, at + i)] = c.value;
                    for j in i + 1..c.size {
                        d[(at + i, at + j)] = *u.next().unwrap();
                    }
                }
                at += c.size;
            }
            let s = Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } + noise[i * 9 + j]);
            let g = &(&s * &d) * &inverse(&s).unwrap();
            (g, clusters)
        })
}

