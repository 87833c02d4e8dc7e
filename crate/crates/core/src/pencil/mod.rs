//! Matrix functions, pencils over a grid, and the hypothesis checks run on them.

mod classify;
mod profile;
mod shift;

pub use classify::{rank_degree_classify, Classification};
pub use profile::{char_poly_at, rank_profile, spectrum_profile, RankProfile, SpectrumProfile};
pub use shift::{choose_shift, hadamard_ratio, ShiftFunction};

use crate::error::Error;
use crate::expr::{self, Expr};
use crate::grid::Grid;
use crate::linalg::Mat;

/// Square matrix whose entries are expressions in `x_1..x_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFunction {
    n: usize,
    m: usize,
    entries: Vec<Expr>,
}

impl MatrixFunction {
    /// Entries are given row-major.
    pub fn new(n: usize, m: usize, entries: Vec<Expr>) -> Result<Self, Error> {
        if entries.len() != n * n {
            return Err(Error::Input(format!("expected {} entries, got {}", n * n, entries.len())));
        }
        if let Some(e) = entries.iter().find(|e| e.max_var() > m) {
            return Err(Error::Input(format!("entry `{e}` uses x{} but m = {m}", e.max_var())));
        }
        Ok(Self { n, m, entries })
    }

    pub fn from_fn(n: usize, m: usize, mut f: impl FnMut(usize, usize) -> Expr) -> Self {
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self { n, m, entries }
    }

    /// Parses an `n x n` table of expression strings; `name` labels error locations.
    pub fn parse(name: &str, rows: &[Vec<String>], m: usize) -> Result<Self, Error> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Input(format!("{name}: row {} has {} entries, expected {n}", i + 1, row.len())));
            }
            for (j, text) in row.iter().enumerate() {
                let e = expr::parse(text, m).map_err(|source| Error::Parse {
                    location: format!("{name}[{}][{}]", i + 1, j + 1),
                    source,
                })?;
                entries.push(e);
            }
        }
        Ok(Self { n, m, entries })
    }

    pub fn constant(mat: &Mat, m: usize) -> Self {
        Self::from_fn(mat.rows(), m, |i, j| Expr::constant(mat[(i, j)]))
    }

    pub fn identity(n: usize, m: usize) -> Self {
        Self::from_fn(n, m, |i, j| Expr::constant(if i == j { 1.0 } else { 0.0 }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.n + j]
    }

    /// Evaluates every entry at `x`; `name` labels the failing entry.
    pub fn eval(&self, name: &str, x: &[f64]) -> Result<Mat, Error> {
        let mut data = Vec::with_capacity(self.entries.len());
        for (k, e) in self.entries.iter().enumerate() {
            let v = e.eval(x).map_err(|source| Error::Eval {
                location: format!("{name}[{}][{}]", k / self.n + 1, k % self.n + 1),
                point: x.to_vec(),
                source,
            })?;
            data.push(v);
        }
        Ok(Mat::from_vec(self.n, self.n, data))
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.entry(i, j).to_string()).collect()).collect()
    }
}

/// `A(x) + λ B(x)` together with the grid it is examined on.
#[derive(Clone, Debug, PartialEq)]
pub struct Pencil {
    pub a: MatrixFunction,
    pub b: MatrixFunction,
    pub grid: Grid,
}

impl Pencil {
    pub fn new(a: MatrixFunction, b: MatrixFunction, grid: Grid) -> Result<Self, Error> {
        if a.n != b.n {
            return Err(Error::Input(format!("A is {0}x{0} but B is {1}x{1}", a.n, b.n)));
        }
        if a.n == 0 {
            return Err(Error::Input("pencil order must be positive".into()));
        }
        if a.m != b.m || a.m != grid.dim() {
            return Err(Error::Input(format!(
                "variable counts disagree: A has {}, B has {}, grid has {}",
                a.m,
                b.m,
                grid.dim()
            )));
        }
        Ok(Self { a, b, grid })
    }

    pub fn n(&self) -> usize {
        self.a.n
    }

    pub fn m(&self) -> usize {
        self.a.m
    }

    pub fn sample(&self) -> Result<Samples, Error> {
        let mut s = Samples::at_points(&self.a, &self.b, self.grid.points())?;
        s.parents = self.grid.parents();
        s.grid = Some(self.grid.clone());
        Ok(s)
    }
}

/// Pencil coefficients evaluated at a list of points.
///
/// `parents[i]` is an earlier, adjacent point used as the continuity reference for point `i`.
#[derive(Clone, Debug)]
pub struct Samples {
    pub points: Vec<Vec<f64>>,
    pub a: Vec<Mat>,
    pub b: Vec<Mat>,
    pub parents: Vec<Option<usize>>,
    pub grid: Option<Grid>,
}

impl Samples {
    /// Samples at arbitrary points, with no adjacency between them.
    pub fn at_points(a: &MatrixFunction, b: &MatrixFunction, points: Vec<Vec<f64>>) -> Result<Self, Error> {
        let mut sa = Vec::with_capacity(points.len());
        let mut sb = Vec::with_capacity(points.len());
        for x in &points {
            if x.len() != a.m {
                return Err(Error::Input(format!("point {x:?} has {} coordinates, expected {}", x.len(), a.m)));
            }
            sa.push(a.eval("A", x)?);
            sb.push(b.eval("B", x)?);
        }
        let parents = vec![None; points.len()];
        Ok(Self { points, a: sa, b: sb, parents, grid: None })
    }

    pub fn n(&self) -> usize {
        self.a.first().map_or(0, Mat::rows)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
