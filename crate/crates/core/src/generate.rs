//! Random pencils with a prescribed canonical structure.
//!
//! The canonical pair `A_c = diag{E_d, M, E_l̂}`, `B_c = diag{J_1..J_k, E_l, N}` is built from
//! the structure description and hidden behind witnesses `P₀⁻¹ = D_L(x) C_L` and `Q₀⁻¹ = C_R S(x) D_R(x)`:
//! `C_L`, `C_R` are products of constant shears, `S(x)` is one smooth shear with
//! `|α(x)| <= 1/2`, and `D_L`, `D_R` are diagonal with entries in `[1, 2]`. These are
//! nonsingular on every box, so the ground truth holds without pointwise checks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::expr::{self, Expr};
use crate::grid::{Domain, Grid, DEFAULT_GRID};
use crate::io::{GridSpec, StringMatrix};
use crate::linalg::{cond, inverse, Mat};
use crate::pencil::{MatrixFunction, Pencil};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    Identity,
    #[default]
    Random,
}

/// Requested canonical structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSpec {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub l: usize,
    pub lhat: usize,
    /// Multiplicities `p_i` of the nonzero root branches.
    #[serde(default)]
    pub p: Vec<usize>,
    /// Root branch expressions `λ_i(x)`, one per multiplicity.
    #[serde(default)]
    pub branches: Vec<String>,
    /// Jordan block sizes of the nilpotent `M`; empty means `M = 0`.
    #[serde(default)]
    pub m_pattern: Vec<usize>,
    /// Jordan block sizes of the nilpotent `N`; empty means `N = 0`.
    #[serde(default)]
    pub n_pattern: Vec<usize>,
    pub domain: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub witness: WitnessKind,
}

impl StructureSpec {
    pub fn parse(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Input(format!("generator spec: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn grid(&self) -> Result<Grid, Error> {
        let counts = self.grid.as_ref().map_or(vec![DEFAULT_GRID; self.m], |g| g.counts(self.m));
        Grid::new(Domain::new(self.domain.clone())?, counts)
    }

    fn check_pattern(name: &str, pattern: &[usize], total: usize) -> Result<(), Error> {
        if !pattern.is_empty() && (pattern.iter().sum::<usize>() != total || pattern.contains(&0)) {
            return Err(Error::Input(format!("{name} must be positive block sizes summing to {total}")));
        }
        Ok(())
    }

    /// Checks the integer bookkeeping and parses the branch expressions.
    pub fn validate(&self) -> Result<Vec<Expr>, Error> {
        let bad = |msg: String| Err(Error::Input(format!("spec violation: {msg}")));
        if self.l + self.d + self.lhat != self.n {
            return bad(format!("l + d + lhat = {} but n = {}", self.l + self.d + self.lhat, self.n));
        }
        if self.l == 0 || self.lhat == 0 {
            return bad("l and lhat must be at least 1".into());
        }
        if self.p.iter().sum::<usize>() != self.d || self.p.contains(&0) {
            return bad(format!("multiplicities {:?} must be positive and sum to d = {}", self.p, self.d));
        }
        if self.branches.len() != self.p.len() {
            return bad(format!("{} branches for {} multiplicities", self.branches.len(), self.p.len()));
        }
        if self.domain.len() != self.m {
            return bad(format!("domain has {} intervals but m = {}", self.domain.len(), self.m));
        }
        Self::check_pattern("m_pattern", &self.m_pattern, self.l)?;
        Self::check_pattern("n_pattern", &self.n_pattern, self.lhat)?;
        self.branches
            .iter()
            .enumerate()
            .map(|(i, b)| {
                expr::parse(b, self.m).map_err(|source| Error::Parse { location: format!("branch {}", i + 1), source })
            })
            .collect()
    }
}

/// Ground truth written next to a generated pencil.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub schema_version: u32,
    pub seed: u64,
    pub spec: StructureSpec,
    pub canonical_a: StringMatrix,
    pub canonical_b: StringMatrix,
    /// `P₀ A Q₀ = canonical_a` and `P₀ B Q₀ = canonical_b`.
    pub p0: StringMatrix,
    pub q0: StringMatrix,
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub pencil: Pencil,
    pub canonical_a: MatrixFunction,
    pub canonical_b: MatrixFunction,
    pub p0: MatrixFunction,
    pub q0: MatrixFunction,
    pub branches: Vec<Expr>,
    pub truth: GroundTruth,
}

type ExprMat = Vec<Vec<Expr>>;

fn zeros(n: usize) -> ExprMat {
    vec![vec![Expr::constant(0.0); n]; n]
}

fn identity(n: usize) -> ExprMat {
    (0..n).map(|i| (0..n).map(|j| Expr::constant(if i == j { 1.0 } else { 0.0 })).collect()).collect()
}

fn matmul(a: &ExprMat, b: &ExprMat) -> ExprMat {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .filter(|&k| !a[i][k].is_zero() && !b[k][j].is_zero())
                        .map(|k| a[i][k].clone() * b[k][j].clone())
                        .reduce(|x, y| x + y)
                        .unwrap_or_else(|| Expr::constant(0.0))
                })
                .collect()
        })
        .collect()
}

fn from_mat(m: &Mat) -> ExprMat {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| Expr::constant(m[(i, j)])).collect()).collect()
}

fn to_function(m: ExprMat, dim: usize) -> MatrixFunction {
    let n = m.len();
    MatrixFunction::new(n, dim, m.into_iter().flatten().collect()).expect("generated entries are in range")
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn jordan_like(sizes: &[usize], total: usize, rng: &mut ChaCha8Rng) -> ExprMat {
    let mut m = zeros(total);
    let mut at = 0;
    for &s in sizes {
        for i in at..at + s - 1 {
            m[i][i + 1] = Expr::constant(round3(rng.random_range(0.5..1.5)));
        }
        at += s;
    }
    m
}

/// Product of `n` random constant shears with condition number at most 50.
fn random_shears(n: usize, rng: &mut ChaCha8Rng) -> Mat {
    loop {
        let mut c = Mat::identity(n);
        for _ in 0..n {
            let i = rng.random_range(0..n);
            let j = (i + rng.random_range(1..n)) % n;
            let alpha = round3(rng.random_range(-1.0..1.0));
            let mut s = Mat::identity(n);
            s[(i, j)] = alpha;
            c = &c * &s;
        }
        if cond(&c) <= 50.0 {
            return c;
        }
    }
}

/// `1.5 + 0.5 sin(w x_k + phi)`, with values in `[1, 2]`.
fn smooth_scale(m: usize, rng: &mut ChaCha8Rng) -> Expr {
    let k = rng.random_range(1..=m);
    let w = round3(rng.random_range(0.5..1.5));
    let phi = round3(rng.random_range(0.0..3.0));
    Expr::constant(1.5) + Expr::constant(0.5) * (Expr::constant(w) * Expr::var(k) + Expr::constant(phi)).sin()
}

/// Builds the pencil and its ground truth. Deterministic in `seed`.
pub fn generate(spec: &StructureSpec, seed: u64) -> Result<Generated, Error> {
    let branches = spec.validate()?;
    let grid = spec.grid()?;
    check_branches(&branches, &grid)?;
    let (n, m) = (spec.n, spec.m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut a_c = zeros(n);
    let mut b_c = zeros(n);
    let mut at = 0;
    for (lam, &p) in branches.iter().zip(&spec.p) {
        for i in 0..p {
            a_c[at + i][at + i] = Expr::constant(1.0);
            b_c[at + i][at + i] = -(Expr::constant(1.0) / lam.clone());
            for j in i + 1..p {
                b_c[at + i][at + j] = Expr::constant(round3(rng.random_range(-0.5..0.5)));
            }
        }
        at += p;
    }
    let m_block = jordan_like(&spec.m_pattern, spec.l, &mut rng);
    for i in 0..spec.l {
        b_c[at + i][at + i] = Expr::constant(1.0);
        for j in 0..spec.l {
            a_c[at + i][at + j] = m_block[i][j].clone();
        }
    }
    at += spec.l;
    let n_block = jordan_like(&spec.n_pattern, spec.lhat, &mut rng);
    for i in 0..spec.lhat {
        a_c[at + i][at + i] = Expr::constant(1.0);
        for j in 0..spec.lhat {
            b_c[at + i][at + j] = n_block[i][j].clone();
        }
    }

    let (a, b, p0, q0) = match spec.witness {
        WitnessKind::Identity => (a_c.clone(), b_c.clone(), identity(n), identity(n)),
        WitnessKind::Random => {
            let c_l = random_shears(n, &mut rng);
            let c_r = random_shears(n, &mut rng);
            let d_l: Vec<Expr> = (0..n).map(|_| smooth_scale(m, &mut rng)).collect();
            let d_r: Vec<Expr> = (0..n).map(|_| smooth_scale(m, &mut rng)).collect();
            let si = rng.random_range(0..n);
            let sj = (si + rng.random_range(1..n)) % n;
            let alpha = Expr::constant(0.5)
                * (Expr::var(rng.random_range(1..=m)) + Expr::constant(round3(rng.random_range(0.0..3.0)))).sin();

            // Q₀⁻¹ = C_R S D_R with S = E + α e_si e_sjᵀ.
            let mut q_inv = from_mat(&c_r);
            for (r, row) in q_inv.iter_mut().enumerate() {
                row[sj] = row[sj].clone() + alpha.clone() * Expr::constant(c_r[(r, si)]);
                for (col, e) in row.iter_mut().enumerate() {
                    *e = e.clone() * d_r[col].clone();
                }
            }
            let scale_rows = |mat: ExprMat| -> ExprMat {
                mat.into_iter()
                    .enumerate()
                    .map(|(r, row)| row.into_iter().map(|e| d_l[r].clone() * e).collect())
                    .collect()
            };
            let c_l_e = from_mat(&c_l);
            let a = scale_rows(matmul(&c_l_e, &matmul(&a_c, &q_inv)));
            let b = scale_rows(matmul(&c_l_e, &matmul(&b_c, &q_inv)));

            // P₀ = C_L⁻¹ D_L⁻¹ and Q₀ = D_R⁻¹ S⁻¹ C_R⁻¹.
            let cli = inverse(&c_l)?;
            let cri = inverse(&c_r)?;
            let p0: ExprMat = (0..n)
                .map(|i| (0..n).map(|k| Expr::constant(cli[(i, k)]) / d_l[k].clone()).collect())
                .collect();
            let q0: ExprMat = (0..n)
                .map(|r| {
                    (0..n)
                        .map(|c| {
                            let mut e = Expr::constant(cri[(r, c)]);
                            if r == si {
                                e = e - alpha.clone() * Expr::constant(cri[(sj, c)]);
                            }
                            e / d_r[r].clone()
                        })
                        .collect()
                })
                .collect();
            (a, b, p0, q0)
        }
    };

    let canonical_a = to_function(a_c, m);
    let canonical_b = to_function(b_c, m);
    let p0 = to_function(p0, m);
    let q0 = to_function(q0, m);
    let pencil = Pencil::new(to_function(a, m), to_function(b, m), grid)?;
    let truth = GroundTruth {
        schema_version: 1,
        seed,
        spec: spec.clone(),
        canonical_a: canonical_a.to_strings(),
        canonical_b: canonical_b.to_strings(),
        p0: p0.to_strings(),
        q0: q0.to_strings(),
    };
    Ok(Generated { pencil, canonical_a, canonical_b, p0, q0, branches, truth })
}

/// Branches must be nonzero and pairwise separated at every grid point.
fn check_branches(branches: &[Expr], grid: &Grid) -> Result<(), Error> {
    for x in grid.points() {
        let vals: Vec<f64> = branches
            .iter()
            .map(|b| b.eval(&x).map_err(|source| Error::Eval { location: "branch".into(), point: x.clone(), source }))
            .collect::<Result<_, _>>()?;
        for (i, v) in vals.iter().enumerate() {
            if v.abs() <= 1e-3 {
                return Err(Error::Input(format!("spec violation: branch {} vanishes near x = {x:?}", i + 1)));
            }
            for (j, w) in vals.iter().enumerate().skip(i + 1) {
                if (v - w).abs() <= 1e-3 * (1.0 + v.abs()) {
                    return Err(Error::Input(format!(
                        "spec violation: branches {} and {} meet near x = {x:?}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
    }
    Ok(())
}

fn random_partition(total: usize, max_part: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut parts = Vec::new();
    let mut left = total;
    while left > 0 {
        let p = rng.random_range(1..=left.min(max_part));
        parts.push(p);
        left -= p;
    }
    parts
}

/// A random valid spec of order `n` in `m` variables on `[0.5, 1.5]^m`, grid 5 per axis.
pub fn random_spec(seed: u64, n: usize, m: usize) -> StructureSpec {
    assert!(n >= 2 && m >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let d = rng.random_range(0..=n - 2);
    let l = rng.random_range(1..=n - d - 1);
    let lhat = n - d - l;
    let p = random_partition(d, 3, &mut rng);
    let mut pool = vec![-4.0, -2.5, -1.2, 1.1, 2.3, 3.6, 5.0];
    pool.shuffle(&mut rng);
    let branches = p
        .iter()
        .zip(&pool)
        .map(|(_, &base)| {
            let k = rng.random_range(1..=m);
            let shape = rng.random_range(0..3);
            let phase = round3(rng.random_range(0.0..3.0));
            let var = match shape {
                0 => format!("0.2*sin(x{k} + {phase:?})"),
                1 => format!("0.1*x{k}^2"),
                _ => format!("0.15*cos({phase:?}*x{k})"),
            };
            format!("{base:?} + {var}")
        })
        .collect();
    StructureSpec {
        n,
        m,
        d,
        l,
        lhat,
        p,
        branches,
        m_pattern: random_partition(l, 3, &mut rng),
        n_pattern: random_partition(lhat, 3, &mut rng),
        domain: vec![[0.5, 1.5]; m],
        grid: Some(GridSpec::Uniform(5)),
        witness: WitnessKind::Random,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1_shape(witness: WitnessKind) -> StructureSpec {
        StructureSpec {
            n: 3,
            m: 2,
            d: 1,
            l: 1,
            lhat: 1,
            p: vec![1],
            branches: vec!["-(x1 + x2)".into()],
            m_pattern: vec![],
            n_pattern: vec![],
            domain: vec![[1.0, 2.0]; 2],
            grid: Some(GridSpec::Uniform(5)),
            witness,
        }
    }

    #[test]
    fn identity_witness_gives_canonical_pencil() {
        let g = generate(&ex1_shape(WitnessKind::Identity), 42).unwrap();
        let x = [1.0, 2.0];
        let a = g.pencil.a.eval("A", &x).unwrap();
        let b = g.pencil.b.eval("B", &x).unwrap();
        assert_eq!(a, Mat::diag(&[1.0, 0.0, 1.0]));
        assert!((b[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(b.block(1, 1, 2, 2), Mat::diag(&[1.0, 0.0]));
    }

    #[test]
    fn witnesses_invert_the_hiding() {
        let spec = random_spec(7, 5, 2);
        let g = generate(&spec, 7).unwrap();
        for x in g.pencil.grid.points() {
            let p0 = g.p0.eval("P0", &x).unwrap();
            let q0 = g.q0.eval("Q0", &x).unwrap();
            let a = g.pencil.a.eval("A", &x).unwrap();
            let ac = g.canonical_a.eval("Ac", &x).unwrap();
            assert!((&(&p0 * &a) * &q0).max_abs_diff(&ac) < 1e-12);
            assert!(cond(&p0) <= 1e4 && cond(&q0) <= 1e4);
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let s = random_spec(3, 4, 1);
        assert_eq!(s, random_spec(3, 4, 1));
        let a = generate(&s, 11).unwrap().truth;
        let b = generate(&s, 11).unwrap().truth;
        assert_eq!(a, b);
    }

    #[test]
    fn spec_violations() {
        let mut s = ex1_shape(WitnessKind::Random);
        s.p = vec![2];
        assert_eq!(generate(&s, 1).unwrap_err().exit_code(), 1);
        let mut s = ex1_shape(WitnessKind::Random);
        s.branches = vec!["x1 - x2".into()];
        assert!(generate(&s, 1).is_err());
    }
}
