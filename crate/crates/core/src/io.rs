//! Pencil, transform and generator-spec files (TOML) and atomic output.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::Error;
use crate::grid::{Domain, Grid, DEFAULT_GRID};
use crate::linalg::Mat;
use crate::pencil::{MatrixFunction, Pencil};

pub type StringMatrix = Vec<Vec<String>>;

/// Grid size: one count for every axis, or one per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Uniform(usize),
    PerAxis(Vec<usize>),
}

impl GridSpec {
    pub fn counts(&self, m: usize) -> Vec<usize> {
        match self {
            GridSpec::Uniform(k) => vec![*k; m],
            GridSpec::PerAxis(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PencilFile {
    pub n: usize,
    pub m: usize,
    pub domain: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(rename = "A")]
    pub a: StringMatrix,
    #[serde(rename = "B")]
    pub b: StringMatrix,
    /// Constant shift to force instead of searching for one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    /// Partial overrides of [`Tolerances`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<toml::Table>,
}

/// A pencil file resolved into library objects.
#[derive(Clone, Debug)]
pub struct LoadedPencil {
    pub pencil: Pencil,
    pub tolerances: Tolerances,
    pub shift: Option<f64>,
}

fn check_square(name: &str, rows: &StringMatrix, n: usize) -> Result<(), Error> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Input(format!("{name} must be {n}x{n}")));
    }
    Ok(())
}

/// Applies a table of overrides to the defaults; unknown keys are errors.
pub fn merge_tolerances(base: &Tolerances, overrides: &toml::Table) -> Result<Tolerances, Error> {
    let mut table = toml::Table::try_from(base).map_err(|e| Error::Input(e.to_string()))?;
    for (k, v) in overrides {
        if k != "rank" && !table.contains_key(k) {
            return Err(Error::Input(format!("unknown tolerance `{k}`")));
        }
        table.insert(k.clone(), v.clone());
    }
    table.try_into().map_err(|e: toml::de::Error| Error::Input(format!("tolerances: {e}")))
}

impl PencilFile {
    pub fn parse(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Input(format!("pencil file: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("pencil file serializes")
    }

    /// `grid_override` replaces the per-axis count given in the file.
    pub fn resolve(&self, grid_override: Option<usize>) -> Result<LoadedPencil, Error> {
        check_square("A", &self.a, self.n)?;
        check_square("B", &self.b, self.n)?;
        if self.domain.len() != self.m {
            return Err(Error::Input(format!("domain has {} intervals but m = {}", self.domain.len(), self.m)));
        }
        let counts = match (grid_override, &self.grid) {
            (Some(k), _) => vec![k; self.m],
            (None, Some(g)) => g.counts(self.m),
            (None, None) => vec![DEFAULT_GRID; self.m],
        };
        let grid = Grid::new(Domain::new(self.domain.clone())?, counts)?;
        let a = MatrixFunction::parse("A", &self.a, self.m)?;
        let b = MatrixFunction::parse("B", &self.b, self.m)?;
        let tolerances = match &self.tolerances {
            Some(t) => merge_tolerances(&Tolerances::default(), t)?,
            None => Tolerances::default(),
        };
        Ok(LoadedPencil { pencil: Pencil::new(a, b, grid)?, tolerances, shift: self.shift })
    }

    pub fn from_pencil(p: &Pencil) -> Self {
        Self {
            n: p.n(),
            m: p.m(),
            domain: p.grid.domain().intervals().to_vec(),
            grid: Some(GridSpec::PerAxis(p.grid.counts().to_vec())),
            a: p.a.to_strings(),
            b: p.b.to_strings(),
            shift: None,
            tolerances: None,
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn load_pencil(path: &Path, grid_override: Option<usize>) -> Result<LoadedPencil, Error> {
    PencilFile::parse(&read_text(path)?)?.resolve(grid_override)
}

/// Writes through a temporary file in the same directory, then renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), Error> {
    let io_err = |source| Error::Io { path: path.display().to_string(), source };
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, contents).map_err(io_err)?;
    std::fs::rename(&tmp, path).map_err(io_err)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleEntry {
    x: Vec<f64>,
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(rename = "target_A")]
    target_a: Vec<Vec<f64>>,
    #[serde(rename = "target_B")]
    target_b: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransformsFile {
    #[serde(rename = "P")]
    p: Option<StringMatrix>,
    #[serde(rename = "Q")]
    q: Option<StringMatrix>,
    #[serde(rename = "target_A")]
    target_a: Option<StringMatrix>,
    #[serde(rename = "target_B")]
    target_b: Option<StringMatrix>,
    #[serde(default)]
    sample: Vec<SampleEntry>,
}

/// Claimed transforms and target pencil.
#[derive(Clone, Debug)]
pub enum Transforms {
    Closed { p: MatrixFunction, q: MatrixFunction, target_a: MatrixFunction, target_b: MatrixFunction },
    Sampled { points: Vec<Vec<f64>>, p: Vec<Mat>, q: Vec<Mat>, target_a: Vec<Mat>, target_b: Vec<Mat> },
}

fn numeric(name: &str, rows: &[Vec<f64>], n: usize) -> Result<Mat, Error> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Input(format!("{name} must be {n}x{n}")));
    }
    Ok(Mat::from_rows(rows))
}

impl Transforms {
    pub fn parse(text: &str, n: usize, m: usize) -> Result<Self, Error> {
        let f: TransformsFile = toml::from_str(text).map_err(|e| Error::Input(format!("transforms file: {e}")))?;
        match (f.p, f.q, f.target_a, f.target_b) {
            (Some(p), Some(q), Some(ta), Some(tb)) if f.sample.is_empty() => {
                for (name, t) in [("P", &p), ("Q", &q), ("target_A", &ta), ("target_B", &tb)] {
                    check_square(name, t, n)?;
                }
                Ok(Transforms::Closed {
                    p: MatrixFunction::parse("P", &p, m)?,
                    q: MatrixFunction::parse("Q", &q, m)?,
                    target_a: MatrixFunction::parse("target_A", &ta, m)?,
                    target_b: MatrixFunction::parse("target_B", &tb, m)?,
                })
            }
            (None, None, None, None) if !f.sample.is_empty() => {
                let mut out = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
                for s in &f.sample {
                    if s.x.len() != m {
                        return Err(Error::Input(format!("sample point {:?} needs {m} coordinates", s.x)));
                    }
                    out.0.push(s.x.clone());
                    out.1.push(numeric("P", &s.p, n)?);
                    out.2.push(numeric("Q", &s.q, n)?);
                    out.3.push(numeric("target_A", &s.target_a, n)?);
                    out.4.push(numeric("target_B", &s.target_b, n)?);
                }
                Ok(Transforms::Sampled { points: out.0, p: out.1, q: out.2, target_a: out.3, target_b: out.4 })
            }
            _ => Err(Error::Input(
                "transforms file needs either P, Q, target_A, target_B expressions or [[sample]] entries".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
n = 2
m = 1
domain = [[0.0, 1.0]]
grid = 5
A = [["1", "0"], ["0", "0"]]
B = [["0", "0"], ["0", "1"]]
[tolerances]
canon = 1e-7
"#;

    #[test]
    fn parses_and_resolves() {
        let f = PencilFile::parse(SMALL).unwrap();
        let lp = f.resolve(None).unwrap();
        assert_eq!(lp.pencil.grid.len(), 5);
        assert_eq!(lp.tolerances.canon, 1e-7);
        assert_eq!(f.resolve(Some(3)).unwrap().pencil.grid.len(), 3);
    }

    #[test]
    fn round_trips_through_toml() {
        let f = PencilFile::parse(SMALL).unwrap();
        let again = PencilFile::parse(&f.to_toml()).unwrap();
        assert_eq!(f, again);
    }

    #[test]
    fn rejects_unknown_tolerance_and_bad_shape() {
        let bad = SMALL.replace("canon", "canonn");
        assert!(PencilFile::parse(&bad).unwrap().resolve(None).is_err());
        let bad = SMALL.replace(r#"B = [["0", "0"], ["0", "1"]]"#, r#"B = [["0"], ["0", "1"]]"#);
        assert!(PencilFile::parse(&bad).unwrap().resolve(None).is_err());
    }

    #[test]
    fn transforms_sampled_form() {
        let text = r#"
[[sample]]
x = [0.5]
P = [[1.0, 0.0], [0.0, 1.0]]
Q = [[1.0, 0.0], [0.0, 1.0]]
target_A = [[1.0, 0.0], [0.0, 0.0]]
target_B = [[0.0, 0.0], [0.0, 1.0]]
"#;
        assert!(matches!(Transforms::parse(text, 2, 1).unwrap(), Transforms::Sampled { .. }));
        assert!(Transforms::parse("", 2, 1).is_err());
    }
}
