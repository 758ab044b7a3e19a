//! Small dense linear-algebra helpers and the shared tolerance policy.
//!
//! Every rank or zero decision in the crate goes through [`Tolerance`] so
//! that the decomposition, the design algorithm and the rank tests agree on
//! what "numerically zero" means.

use nalgebra::{Complex, DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Numerical tolerance policy.
///
/// A singular value `σ` is nonzero iff `σ > rank_factor · max(rows, cols) · σ_ref`,
/// where `σ_ref` is the largest singular value (or a caller-supplied scale
/// when that is larger). Entrywise comparisons use `entry`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rank_factor: f64,
    pub entry: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_factor: 1e-10,
            entry: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn with_entry(entry: f64) -> Self {
        Tolerance {
            entry,
            ..Default::default()
        }
    }

    pub fn rank_threshold(&self, rows: usize, cols: usize, reference: f64) -> f64 {
        self.rank_factor * rows.max(cols).max(1) as f64 * reference
    }

    pub fn is_zero(&self, x: f64) -> bool {
        x.abs() <= self.entry
    }

    /// Numerical rank relative to the largest singular value.
    pub fn rank(&self, m: &DMatrix<f64>) -> usize {
        self.rank_scaled(m, 0.0)
    }

    /// Numerical rank relative to `max(σ_max, scale)`.
    ///
    /// Use a positive `scale` when the matrix is known to be a noisy zero at
    /// a given magnitude (projections are scaled by 1).
    pub fn rank_scaled(&self, m: &DMatrix<f64>, scale: f64) -> usize {
        if m.nrows() == 0 || m.ncols() == 0 {
            return 0;
        }
        let sv = m.clone().svd(false, false).singular_values;
        let smax = sv.iter().cloned().fold(0.0, f64::max).max(scale);
        let thr = self.rank_threshold(m.nrows(), m.ncols(), smax);
        sv.iter().filter(|&&s| s > thr).count()
    }

    pub fn rank_complex(&self, m: &DMatrix<Complex64>) -> usize {
        if m.nrows() == 0 || m.ncols() == 0 {
            return 0;
        }
        let sv = m.clone().svd(false, false).singular_values;
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let thr = self.rank_threshold(m.nrows(), m.ncols(), smax);
        sv.iter().filter(|&&s| s > thr).count()
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Position and magnitude of the largest entry, `None` for empty matrices.
pub fn argmax_abs(m: &DMatrix<f64>) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)].abs();
            if best.map_or(true, |(_, _, b)| v > b) {
                best = Some((i, j, v));
            }
        }
    }
    best
}

pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Orthonormal basis of the column space of `m`, `rank` columns long.
///
/// Modified Gram-Schmidt with column pivoting: at every step the column with
/// the largest residual norm is taken, the leftmost one among (relative)
/// ties. Each vector is signed so that its first nonzero entry is positive.
pub fn pivoted_orthonormal_basis(m: &DMatrix<f64>, rank: usize, tol: &Tolerance) -> DMatrix<f64> {
    let n = m.nrows();
    let mut residual = m.clone();
    let mut basis = DMatrix::<f64>::zeros(n, rank);
    for k in 0..rank {
        let norms: Vec<f64> = (0..residual.ncols())
            .map(|j| residual.column(j).norm())
            .collect();
        let best = norms.iter().cloned().fold(0.0, f64::max);
        if best == 0.0 {
            break;
        }
        let pivot = norms
            .iter()
            .position(|&x| x >= best * (1.0 - 1e-10))
            .unwrap();
        let mut q: DVector<f64> = residual.column(pivot) / best;
        // one extra pass against the accepted vectors keeps q orthogonal
        for i in 0..k {
            let bi = basis.column(i).clone_owned();
            let c = bi.dot(&q);
            q -= bi * c;
        }
        q /= q.norm();
        if let Some(first) = q.iter().find(|x| !tol.is_zero(**x)) {
            if *first < 0.0 {
                q.neg_mut();
            }
        }
        for j in 0..residual.ncols() {
            let c = q.dot(&residual.column(j));
            let mut col = residual.column_mut(j);
            col.axpy(-c, &q, 1.0);
        }
        basis.set_column(k, &q);
    }
    basis
}

/// Orthonormal basis of the column space, rank decided by `tol` relative to
/// `max(σ_max, scale)`.
pub fn orthonormal_basis(m: &DMatrix<f64>, scale: f64, tol: &Tolerance) -> DMatrix<f64> {
    let r = tol.rank_scaled(m, scale);
    pivoted_orthonormal_basis(m, r, tol)
}

/// Complex eigenvalues of a real square matrix.
///
/// The Schur iteration is capped: nalgebra's unbounded variant can cycle on
/// matrices with large degenerate eigenspaces (e.g. `αI + β𝟙𝟙ᵀ`). If the
/// capped run does not converge the convergence threshold is relaxed.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let sym = (a + a.transpose()) * 0.5;
    let real = |m: DMatrix<f64>| -> Vec<Complex64> {
        m.symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect()
    };
    // symmetric input (common after group averaging) has a real spectrum and
    // a solver that cannot stall
    if max_abs(&(a - &sym)) <= 1e-14 * max_abs(a).max(f64::MIN_POSITIVE) {
        return real(sym);
    }
    for eps in [f64::EPSILON, 1e-14, 1e-12, 1e-10] {
        if let Some(schur) = a.clone().try_schur(eps, 10_000) {
            let eigs: Vec<Complex64> = schur
                .complex_eigenvalues()
                .iter()
                .map(|c| Complex64::new(c.re, c.im))
                .collect();
            // 2×2 blocks with a rounding-negative discriminant come back as NaN
            if eigs.iter().all(|e| e.re.is_finite() && e.im.is_finite()) {
                return eigs;
            }
        }
    }
    // last resort: the real parts of a symmetric part are better than nothing
    real(sym)
}

/// Groups eigenvalues closer than `radius` and returns one representative
/// (the cluster mean) per group together with its algebraic multiplicity.
pub fn cluster_eigenvalues(eigs: &[Complex64], radius: f64) -> Vec<(Complex64, usize)> {
    let mut clusters: Vec<(Complex64, Vec<Complex64>)> = Vec::new();
    for &e in eigs {
        match clusters.iter_mut().find(|(c, _)| (c - e).norm() <= radius) {
            Some((c, members)) => {
                members.push(e);
                *c = members.iter().sum::<Complex64>() / members.len() as f64;
            }
            None => clusters.push((e, vec![e])),
        }
    }
    clusters.into_iter().map(|(c, m)| (c, m.len())).collect()
}

/// Coefficients of the monic characteristic polynomial, highest degree first.
pub fn char_poly(a: &DMatrix<f64>) -> Vec<f64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for lambda in eigenvalues(a) {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * lambda;
        }
        coeffs = next;
    }
    coeffs.into_iter().map(|c| c.re).collect()
}

/// Largest relative discrepancy between two coefficient vectors, measured
/// against `max(1, |a_k|, |b_k|)` per coefficient.
pub fn poly_discrepancy(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1.0))
        .fold(0.0, f64::max)
}

/// Multiplies two monic polynomials given highest degree first.
pub fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex::new(x, 0.0))
}

/// Nested row-major representation used by the JSON formats.
pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().cloned().collect())
        .collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != c) {
        return None;
    }
    Some(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}
