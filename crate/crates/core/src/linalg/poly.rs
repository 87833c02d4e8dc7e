use std::f64::consts::PI;

use super::decomp::det_unsnapped;
use super::hqr::{hessenberg_eigenvalues, Complex};
use super::mat::Mat;
use super::{require_square, LinalgError};

/// Real polynomial with ascending coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct RealPoly {
    coeffs: Vec<f64>,
}

impl RealPoly {
    /// Trailing (highest-order) zeros are dropped; the zero polynomial is stored as `[0]`.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    /// Monic polynomial with the given roots (repeated by multiplicity).
    pub fn from_roots(roots: &[(f64, usize)]) -> Self {
        let mut c = vec![1.0];
        for &(r, k) in roots {
            for _ in 0..k {
                let mut next = vec![0.0; c.len() + 1];
                for (i, v) in c.iter().enumerate() {
                    next[i + 1] += v;
                    next[i] -= r * v;
                }
                c = next;
            }
        }
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    /// Index of the lowest nonzero coefficient (the multiplicity of the root 0).
    pub fn lowest_nonzero(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex) -> Complex {
        self.coeffs.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &c| acc.mul(z).add(Complex::new(c, 0.0)))
    }

    pub fn derivative(&self) -> RealPoly {
        if self.coeffs.len() == 1 {
            return RealPoly::new(vec![0.0]);
        }
        RealPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect())
    }

    pub fn scaled(&self, s: f64) -> RealPoly {
        RealPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Taylor coefficient of order `k` at `z`, i.e. `p^(k)(z) / k!`.
    fn taylor(&self, k: usize, z: Complex) -> Complex {
        let mut acc = Complex::new(0.0, 0.0);
        for i in (k..self.coeffs.len()).rev() {
            acc = acc.mul(z).add(Complex::new(self.coeffs[i] * binom(i, k), 0.0));
        }
        acc
    }

    /// Sum of |c_i| |z|^i, the round-off scale of an evaluation at z.
    fn abs_scale(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.abs())
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Tolerances for root clustering.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootTolerances {
    /// Roots closer than `cluster * (1 + |root|)` always merge.
    pub cluster: f64,
    /// Largest admissible `|Im|` relative to `1 + |root|`.
    pub imag: f64,
    /// Relative coefficient noise assumed when deciding whether a spread group is one multiple root.
    pub coeff_noise: f64,
}

impl Default for RootTolerances {
    fn default() -> Self {
        Self { cluster: 1e-6, imag: 1e-7, coeff_noise: 1e-11 }
    }
}

/// Eigenvalues of the companion matrix of `p` (zero roots from exactly vanishing
/// low-order coefficients included). Unclustered.
pub fn raw_roots(p: &RealPoly) -> Result<Vec<Complex>, LinalgError> {
    if p.is_zero() {
        return Err(LinalgError::ZeroPolynomial);
    }
    let low = p.lowest_nonzero().unwrap();
    let c = &p.coeffs[low..];
    let deg = c.len() - 1;
    let mut roots = vec![Complex::new(0.0, 0.0); low];
    if deg == 0 {
        return Ok(roots);
    }
    let lead = c[deg];
    let comp = Mat::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -c[deg - 1 - j] / lead
        } else if j + 1 == i {
            1.0
        } else {
            0.0
        }
    });
    roots.extend(hessenberg_eigenvalues(&comp)?);
    Ok(roots)
}

struct Cluster {
    members: Vec<Complex>,
}

impl Cluster {
    fn mean(&self) -> Complex {
        let s = self.members.iter().fold(Complex::new(0.0, 0.0), |a, &z| a.add(z));
        s.scale(1.0 / self.members.len() as f64)
    }

    fn radius_about(&self, c: Complex) -> f64 {
        self.members.iter().map(|z| z.sub(c).abs()).fold(0.0, f64::max)
    }
}

/// Distinct real roots with multiplicities, ascending, using default tolerances.
pub fn poly_roots(p: &RealPoly) -> Result<Vec<(f64, usize)>, LinalgError> {
    poly_roots_with(p, RootTolerances::default())
}

/// Distinct real roots with multiplicities, ascending.
///
/// Companion-matrix eigenvalues are merged agglomeratively: a group of k values merges
/// when its radius is below `cluster * (1 + |mean|)` or below the spread a k-fold root
/// would show under `coeff_noise` relative coefficient noise. Each merged group is
/// reported once at its mean, polished by Newton steps on `p^(k-1)`.
pub fn poly_roots_with(p: &RealPoly, tol: RootTolerances) -> Result<Vec<(f64, usize)>, LinalgError> {
    let raw = raw_roots(p)?;
    let mut clusters: Vec<Cluster> = raw.into_iter().map(|z| Cluster { members: vec![z] }).collect();

    let admissible = |members: &[Complex]| -> bool {
        let c = Cluster { members: members.to_vec() };
        let mu = c.mean();
        let radius = c.radius_about(mu);
        let k = members.len();
        let scale = 1.0 + mu.abs();
        if radius <= tol.cluster * scale {
            return true;
        }
        let tk = p.taylor(k, mu).abs();
        if tk == 0.0 {
            return false;
        }
        let noise = tol.coeff_noise * p.abs_scale(mu.abs());
        radius <= 2.0 * (noise / tk).powf(1.0 / k as f64)
    };

    'merge: loop {
        let mut pairs = Vec::new();
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                pairs.push((i, j, clusters[i].mean().sub(clusters[j].mean()).abs()));
            }
        }
        pairs.sort_by(|a, b| a.2.total_cmp(&b.2));
        for (i, j, _) in pairs {
            let mut merged = clusters[i].members.clone();
            merged.extend_from_slice(&clusters[j].members);
            if admissible(&merged) {
                clusters[i].members = merged;
                clusters.remove(j);
                continue 'merge;
            }
        }
        break;
    }

    let mut out = Vec::with_capacity(clusters.len());
    for c in &clusters {
        let mu = c.mean();
        let k = c.members.len();
        if mu.im.abs() > tol.imag * (1.0 + mu.abs()) {
            return Err(LinalgError::ComplexRoots { re: mu.re, im: mu.im });
        }
        let root = if mu.re == 0.0 && mu.im == 0.0 { 0.0 } else { polish(p, mu.re, k, c.radius_about(mu)) };
        out.push((root, k));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Newton refinement of a k-fold root on the (k-1)-th derivative, where it is simple.
fn polish(p: &RealPoly, x0: f64, k: usize, radius: f64) -> f64 {
    let mut q = p.clone();
    for _ in 1..k {
        q = q.derivative();
    }
    let dq = q.derivative();
    let mut x = x0;
    for _ in 0..4 {
        let d = dq.eval(x);
        if d == 0.0 {
            break;
        }
        let step = q.eval(x) / d;
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    if (x - x0).abs() <= radius.max(1e-12 * (1.0 + x0.abs())) * 4.0 {
        x
    } else {
        x0
    }
}

/// Coefficients of a polynomial of degree at most `degree` from its values at Chebyshev
/// nodes on `[-radius, radius]`.
///
/// Coefficients are first formed in the scaled variable `t = λ / radius`; those with
/// magnitude at most `snap` times the largest are set to zero before unscaling.
pub fn interpolate_poly<E>(
    degree: usize,
    radius: f64,
    snap: f64,
    mut f: impl FnMut(f64) -> Result<f64, E>,
) -> Result<RealPoly, E> {
    let nodes = degree + 1;
    let mut values = Vec::with_capacity(nodes);
    let mut ts = Vec::with_capacity(nodes);
    for j in 0..nodes {
        let t = (PI * (j as f64 + 0.5) / nodes as f64).cos();
        ts.push(t);
        values.push(f(radius * t)?);
    }
    // Chebyshev coefficients.
    let mut cheb = vec![0.0; nodes];
    for (k, ck) in cheb.iter_mut().enumerate() {
        let s: f64 = values
            .iter()
            .enumerate()
            .map(|(j, v)| v * (PI * k as f64 * (j as f64 + 0.5) / nodes as f64).cos())
            .sum();
        *ck = 2.0 * s / nodes as f64;
    }
    cheb[0] *= 0.5;
    // Monomial coefficients in t via the three-term recurrence.
    let mut mono = vec![0.0; nodes];
    let mut t_prev = vec![1.0];
    let mut t_cur = vec![0.0, 1.0];
    for (k, ck) in cheb.iter().enumerate() {
        let tk: &Vec<f64> = match k {
            0 => &t_prev,
            1 => &t_cur,
            _ => {
                let mut next = vec![0.0; k + 1];
                for (i, v) in t_cur.iter().enumerate() {
                    next[i + 1] += 2.0 * v;
                }
                for (i, v) in t_prev.iter().enumerate() {
                    next[i] -= v;
                }
                t_prev = std::mem::replace(&mut t_cur, next);
                &t_cur
            }
        };
        for (i, v) in tk.iter().enumerate() {
            mono[i] += ck * v;
        }
    }
    let max = mono.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let mut scale = 1.0;
    let coeffs = mono
        .into_iter()
        .map(|c| {
            let out = if c.abs() <= snap * max { 0.0 } else { c / scale };
            scale *= radius;
            out
        })
        .collect();
    Ok(RealPoly::new(coeffs))
}

/// Characteristic polynomial `det(ξE - M)` by interpolation.
pub fn char_poly_of(m: &Mat, snap: f64) -> Result<RealPoly, LinalgError> {
    let n = require_square(m)?;
    let radius = 1.0 + m.norm_fro();
    interpolate_poly(n, radius, snap, |xi| {
        let shifted = Mat::from_fn(n, n, |i, j| if i == j { xi - m[(i, j)] } else { -m[(i, j)] });
        det_unsnapped(&shifted)
    })
}
