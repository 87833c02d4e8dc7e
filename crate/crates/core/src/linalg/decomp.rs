use super::mat::{dot, norm2, Mat};
use super::{require_square, LinalgError};

/// Default relative rank tolerance for an order-`n` matrix: `n * 2^-40`.
pub fn default_rank_tol(n: usize) -> f64 {
    n.max(1) as f64 * 2f64.powi(-40)
}

struct Lu {
    lu: Mat,
    perm: Vec<usize>,
    sign: f64,
    // Smallest |pivot| encountered, with its column.
    min_pivot: (f64, usize),
}

fn lu_partial(m: &Mat) -> Result<Lu, LinalgError> {
    let n = require_square(m)?;
    let mut lu = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut min_pivot = (f64::INFINITY, 0);
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold((k, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if pmax < min_pivot.0 {
            min_pivot = (pmax, k);
        }
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            perm.swap(k, p);
            sign = -sign;
        }
        let piv = lu[(k, k)];
        if piv == 0.0 {
            continue;
        }
        for i in k + 1..n {
            let f = lu[(i, k)] / piv;
            lu[(i, k)] = f;
            if f != 0.0 {
                for j in k + 1..n {
                    lu[(i, j)] -= f * lu[(k, j)];
                }
            }
        }
    }
    Ok(Lu { lu, perm, sign, min_pivot })
}

/// Determinant by partially pivoted elimination, without any snapping.
pub fn det_unsnapped(m: &Mat) -> Result<f64, LinalgError> {
    let f = lu_partial(m)?;
    Ok(f.sign * (0..m.rows()).map(|i| f.lu[(i, i)]).product::<f64>())
}

/// Determinant; returns exactly 0 when a pivot falls below the default rank
/// tolerance relative to the largest entry.
pub fn det(m: &Mat) -> Result<f64, LinalgError> {
    let n = require_square(m)?;
    if n == 0 {
        return Ok(1.0);
    }
    let f = lu_partial(m)?;
    if f.min_pivot.0 <= default_rank_tol(n) * m.norm_max() {
        return Ok(0.0);
    }
    Ok(f.sign * (0..n).map(|i| f.lu[(i, i)]).product::<f64>())
}

fn lu_solve_in_place(f: &Lu, b: &mut [f64]) {
    let n = f.perm.len();
    let pb: Vec<f64> = f.perm.iter().map(|&p| b[p]).collect();
    b.copy_from_slice(&pb);
    for i in 0..n {
        let s: f64 = (0..i).map(|j| f.lu[(i, j)] * b[j]).sum();
        b[i] -= s;
    }
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| f.lu[(i, j)] * b[j]).sum();
        b[i] = (b[i] - s) / f.lu[(i, i)];
    }
}

fn check_pivots(m: &Mat, f: &Lu) -> Result<(), LinalgError> {
    let n = m.rows();
    if f.min_pivot.0 <= default_rank_tol(n) * m.norm_max() || !f.min_pivot.0.is_finite() {
        return Err(LinalgError::Singular { col: f.min_pivot.1, pivot: f.min_pivot.0 });
    }
    Ok(())
}

pub fn inverse(m: &Mat) -> Result<Mat, LinalgError> {
    let n = require_square(m)?;
    let f = lu_partial(m)?;
    check_pivots(m, &f)?;
    let mut out = Mat::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        lu_solve_in_place(&f, &mut e);
        out.set_col(j, &e);
    }
    Ok(out)
}

/// Solves `m x = b`.
pub fn solve(m: &Mat, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = require_square(m)?;
    if b.len() != n {
        return Err(LinalgError::Shape(format!("rhs has length {}, expected {n}", b.len())));
    }
    let f = lu_partial(m)?;
    check_pivots(m, &f)?;
    let mut x = b.to_vec();
    lu_solve_in_place(&f, &mut x);
    Ok(x)
}

/// Frobenius-norm condition number; infinite for singular input.
pub fn cond(m: &Mat) -> f64 {
    match inverse(m) {
        Ok(inv) => m.norm_fro() * inv.norm_fro(),
        Err(_) => f64::INFINITY,
    }
}

/// Householder QR with column pivoting: `m * P = Q * R`.
#[derive(Clone, Debug)]
pub struct PivotedQr {
    /// Full orthogonal factor, `rows x rows`.
    pub q: Mat,
    pub r: Mat,
    /// `perm[k]` is the original index of the k-th pivoted column.
    pub perm: Vec<usize>,
    /// `|R[k][k]|`, non-increasing.
    pub pivots: Vec<f64>,
}

pub fn pivoted_qr(m: &Mat) -> PivotedQr {
    let (rows, cols) = (m.rows(), m.cols());
    let mut r = m.clone();
    let mut q = Mat::identity(rows);
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut pivots = Vec::new();
    for k in 0..rows.min(cols) {
        // Pick the remaining column with the largest trailing norm.
        let norms: Vec<f64> = (k..cols)
            .map(|j| (k..rows).map(|i| r[(i, j)] * r[(i, j)]).sum::<f64>())
            .collect();
        let (off, _) = norms
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let p = k + off;
        if p != k {
            for i in 0..rows {
                let t = r[(i, k)];
                r[(i, k)] = r[(i, p)];
                r[(i, p)] = t;
            }
            perm.swap(k, p);
        }
        let x: Vec<f64> = (k..rows).map(|i| r[(i, k)]).collect();
        let alpha = norm2(&x);
        pivots.push(alpha);
        if alpha == 0.0 {
            continue;
        }
        let mut v = x;
        let beta = if v[0] >= 0.0 { -alpha } else { alpha };
        v[0] -= beta;
        let vnorm2 = dot(&v, &v);
        if vnorm2 == 0.0 {
            continue;
        }
        // Apply H = I - 2 v v^T / (v^T v) to R from the left and accumulate Q = Q H.
        for j in k..cols {
            let s: f64 = (k..rows).map(|i| v[i - k] * r[(i, j)]).sum::<f64>() * 2.0 / vnorm2;
            for i in k..rows {
                r[(i, j)] -= s * v[i - k];
            }
        }
        for i in 0..rows {
            let s: f64 = (k..rows).map(|l| q[(i, l)] * v[l - k]).sum::<f64>() * 2.0 / vnorm2;
            for l in k..rows {
                q[(i, l)] -= s * v[l - k];
            }
        }
        for i in k + 1..rows {
            r[(i, k)] = 0.0;
        }
    }
    PivotedQr { q, r, perm, pivots }
}

/// Numerical rank: number of pivots above `tol` times the largest pivot.
pub fn rank(m: &Mat, tol: f64) -> usize {
    rank_with_floor(m, tol, 0.0)
}

/// Like [`rank`], but pivots are compared against `tol * max(largest pivot, floor)`.
///
/// The floor keeps a matrix made of round-off noise from being counted as full rank
/// when its natural scale is known from context.
pub fn rank_with_floor(m: &Mat, tol: f64, floor: f64) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    let qr = pivoted_qr(m);
    let scale = qr.pivots.first().copied().unwrap_or(0.0).max(floor);
    if scale == 0.0 {
        return 0;
    }
    qr.pivots.iter().filter(|&&p| p > tol * scale).count()
}

/// Orthonormal basis (as columns) of a `dim`-dimensional numerical null space of a square `m`.
pub fn null_space(m: &Mat, dim: usize) -> Mat {
    let n = m.rows();
    let qr = pivoted_qr(&m.transpose());
    qr.q.block(0, n - dim, n, dim)
}

/// Orthonormalizes `columns` in order (modified Gram-Schmidt with one reorthogonalization pass).
///
/// The first output column is the normalized first input; the span of the first k
/// outputs equals the span of the first k inputs.
pub fn gram_schmidt(columns: &[Vec<f64>]) -> Result<Mat, LinalgError> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
    for (index, z) in columns.iter().enumerate() {
        let znorm = norm2(z);
        let mut x = z.clone();
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &x);
                x.iter_mut().zip(q).for_each(|(xi, qi)| *xi -= c * qi);
            }
        }
        let xn = norm2(&x);
        if znorm == 0.0 || xn <= 1e-10 * znorm {
            return Err(LinalgError::DependentColumns { index });
        }
        x.iter_mut().for_each(|v| *v /= xn);
        out.push(x);
    }
    Ok(Mat::from_cols(&out))
}

/// `P * A * Q = diag(E_r, 0)` with `P`, `Q` nonsingular.
#[derive(Clone, Debug)]
pub struct RankNormalForm {
    pub p: Mat,
    pub q: Mat,
    pub rank: usize,
}

/// Rank normal form by Gauss-Jordan elimination with complete pivoting.
///
/// Pivots at or below `tol * max|a_ij|` (or `tol * floor`, whichever is larger) end the
/// elimination. The trailing `n - rank` columns of `Q` span the numerical kernel.
pub fn rank_normal_form(a: &Mat, tol: f64, floor: f64) -> Result<RankNormalForm, LinalgError> {
    let n = require_square(a)?;
    let mut w = a.clone();
    let mut p = Mat::identity(n);
    let mut colperm: Vec<usize> = (0..n).collect();
    let threshold = tol * a.norm_max().max(floor);
    let mut r = 0;
    while r < n {
        let mut best = (r, r, -1.0);
        for i in r..n {
            for j in r..n {
                let v = w[(i, j)].abs();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        let (pi, pj, pv) = best;
        if pv <= threshold || pv == 0.0 {
            break;
        }
        if pi != r {
            for j in 0..n {
                let t = w[(r, j)];
                w[(r, j)] = w[(pi, j)];
                w[(pi, j)] = t;
                let t = p[(r, j)];
                p[(r, j)] = p[(pi, j)];
                p[(pi, j)] = t;
            }
        }
        if pj != r {
            for i in 0..n {
                let t = w[(i, r)];
                w[(i, r)] = w[(i, pj)];
                w[(i, pj)] = t;
            }
            colperm.swap(r, pj);
        }
        let piv = w[(r, r)];
        for j in 0..n {
            w[(r, j)] /= piv;
            p[(r, j)] /= piv;
        }
        for i in 0..n {
            if i == r {
                continue;
            }
            let f = w[(i, r)];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                w[(i, j)] -= f * w[(r, j)];
                p[(i, j)] -= f * p[(r, j)];
            }
        }
        r += 1;
    }
    // W = [[E_r, K], [~0, ~0]] in permuted columns; clear K with column operations.
    let mut q2 = Mat::identity(n);
    for i in 0..r {
        for j in r..n {
            q2[(i, j)] = -w[(i, j)];
        }
    }
    let mut perm_mat = Mat::zeros(n, n);
    for (k, &orig) in colperm.iter().enumerate() {
        perm_mat[(orig, k)] = 1.0;
    }
    let q = &perm_mat * &q2;
    Ok(RankNormalForm { p, q, rank: r })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nilpotency {
    Index(usize),
    NotNilpotent,
}

/// Smallest `k <= n` with `||M^k|| <= tol * ||M||^k` (Frobenius); the zero matrix has index 1.
pub fn nilpotency_index(m: &Mat, tol: f64) -> Result<Nilpotency, LinalgError> {
    let n = require_square(m)?;
    let norm = m.norm_fro();
    if norm == 0.0 {
        return Ok(Nilpotency::Index(1));
    }
    let mut power = m.clone();
    for k in 1..=n {
        if power.norm_fro() <= tol * norm.powi(k as i32) {
            return Ok(Nilpotency::Index(k));
        }
        power = &power * m;
    }
    Ok(Nilpotency::NotNilpotent)
}
