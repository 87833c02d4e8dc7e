//! Box domains and uniform sample grids.

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Axis-aligned box `[a_1, b_1] x ... x [a_m, b_m]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    intervals: Vec<[f64; 2]>,
}

impl Domain {
    pub fn new(intervals: Vec<[f64; 2]>) -> Result<Self, Error> {
        if intervals.is_empty() {
            return Err(Error::Input("domain needs at least one axis".into()));
        }
        for (i, [a, b]) in intervals.iter().enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::Input(format!("axis {}: need finite a < b, got [{a}, {b}]", i + 1)));
            }
        }
        Ok(Self { intervals })
    }

    /// The square (or cube, ...) `[a, b]^m`.
    pub fn cube(m: usize, a: f64, b: f64) -> Result<Self, Error> {
        Self::new(vec![[a, b]; m])
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[[f64; 2]] {
        &self.intervals
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.intervals).all(|(v, [a, b])| a <= v && v <= b)
    }
}

/// Default number of grid points per axis.
pub const DEFAULT_GRID: usize = 9;

/// Uniform tensor grid including the endpoints, enumerated lexicographically with the
/// last axis varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    domain: Domain,
    counts: Vec<usize>,
}

impl Grid {
    pub fn new(domain: Domain, counts: Vec<usize>) -> Result<Self, Error> {
        if counts.len() != domain.dim() {
            return Err(Error::Input(format!(
                "grid has {} axes but the domain has {}",
                counts.len(),
                domain.dim()
            )));
        }
        if let Some(c) = counts.iter().find(|&&c| c < 3) {
            return Err(Error::Input(format!("grid needs at least 3 points per axis, got {c}")));
        }
        Ok(Self { domain, counts })
    }

    pub fn uniform(domain: Domain, per_axis: usize) -> Result<Self, Error> {
        let m = domain.dim();
        Self::new(domain, vec![per_axis; m])
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multi_index(&self, mut linear: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            idx[axis] = linear % self.counts[axis];
            linear /= self.counts[axis];
        }
        idx
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.counts).fold(0, |acc, (i, c)| acc * c + i)
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let [a, b] = self.domain.intervals[axis];
        (b - a) / (self.counts[axis] - 1) as f64
    }

    pub fn point(&self, linear: usize) -> Vec<f64> {
        self.multi_index(linear)
            .iter()
            .enumerate()
            .map(|(axis, &i)| {
                let [a, b] = self.domain.intervals[axis];
                if i + 1 == self.counts[axis] {
                    b
                } else {
                    a + i as f64 * self.spacing(axis)
                }
            })
            .collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Grid-adjacent point processed earlier in lexicographic order, used as the
    /// continuity reference. `None` only for the first point.
    ///
    /// The parent of `(i_1, ..., i_j, 0, ..., 0)` with `i_j > 0` is `(i_1, ..., i_j - 1, 0, ..., 0)`,
    /// so the parents form a spanning tree of grid edges.
    pub fn parent(&self, linear: usize) -> Option<usize> {
        let mut idx = self.multi_index(linear);
        let axis = idx.iter().rposition(|&i| i > 0)?;
        idx[axis] -= 1;
        Some(self.linear_index(&idx))
    }

    pub fn parents(&self) -> Vec<Option<usize>> {
        (0..self.len()).map(|i| self.parent(i)).collect()
    }

    /// All runs of three consecutive points along an axis, as linear indices.
    pub fn axis_triples(&self, axis: usize) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        for lin in 0..self.len() {
            let idx = self.multi_index(lin);
            if idx[axis] + 2 < self.counts[axis] {
                let mut a = idx.clone();
                a[axis] += 1;
                let mut b = idx;
                b[axis] += 2;
                out.push([lin, self.linear_index(&a), self.linear_index(&b)]);
            }
        }
        out
    }

    /// All adjacent pairs along an axis.
    pub fn axis_pairs(&self, axis: usize) -> Vec<[usize; 2]> {
        let mut out = Vec::new();
        for lin in 0..self.len() {
            let mut idx = self.multi_index(lin);
            if idx[axis] + 1 < self.counts[axis] {
                idx[axis] += 1;
                out.push([lin, self.linear_index(&idx)]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_lexicographically_with_endpoints() {
        let g = Grid::uniform(Domain::cube(2, 1.0, 2.0).unwrap(), 3).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.point(0), vec![1.0, 1.0]);
        assert_eq!(g.point(1), vec![1.0, 1.5]);
        assert_eq!(g.point(3), vec![1.5, 1.0]);
        assert_eq!(g.point(8), vec![2.0, 2.0]);
    }

    #[test]
    fn parents_are_adjacent_and_earlier() {
        let g = Grid::new(Domain::cube(3, 0.0, 1.0).unwrap(), vec![3, 4, 5]).unwrap();
        assert_eq!(g.parent(0), None);
        for i in 1..g.len() {
            let p = g.parent(i).unwrap();
            assert!(p < i);
            let (a, b) = (g.multi_index(i), g.multi_index(p));
            let dist: usize = a.iter().zip(&b).map(|(x, y)| x.abs_diff(*y)).sum();
            assert_eq!(dist, 1);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Domain::new(vec![[1.0, 1.0]]).is_err());
        assert!(Grid::uniform(Domain::cube(2, 0.0, 1.0).unwrap(), 2).is_err());
        assert!(Grid::new(Domain::cube(2, 0.0, 1.0).unwrap(), vec![3]).is_err());
    }

    #[test]
    fn triples_and_pairs() {
        let g = Grid::uniform(Domain::cube(2, 0.0, 1.0).unwrap(), 3).unwrap();
        assert_eq!(g.axis_triples(0).len(), 3);
        assert_eq!(g.axis_pairs(1).len(), 6);
        assert_eq!(g.axis_triples(1)[0], [0, 1, 2]);
    }
}
