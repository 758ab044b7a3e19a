//! Controllability and observability: rank tests, the symmetry bound on the
//! number of inputs, greedy sparse input design and brute-force enumeration.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isotypic::IsotypicDecomposition;
use crate::linalg::{cluster_eigenvalues, eigenvalues, max_abs, to_complex, Tolerance};
use crate::representations::RepType;

/// Default limit on the number of subsets [`enumerate_input_configs`] visits.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMethod {
    /// Rank of `(B, AB, …, Aⁿ⁻¹B)`.
    Kalman,
    /// Growth of `range(B) + A·range(B) + …` with re-orthonormalization.
    #[default]
    Subspace,
    /// Popov-Belevitch-Hautus: `rank(λI − A, B) = n` at every eigenvalue.
    Pbh,
}

impl RankMethod {
    pub const ALL: [RankMethod; 3] = [RankMethod::Kalman, RankMethod::Subspace, RankMethod::Pbh];
}

impl fmt::Display for RankMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RankMethod::Kalman => "kalman",
            RankMethod::Subspace => "subspace",
            RankMethod::Pbh => "pbh",
        })
    }
}

impl FromStr for RankMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kalman" => Ok(RankMethod::Kalman),
            "subspace" => Ok(RankMethod::Subspace),
            "pbh" => Ok(RankMethod::Pbh),
            other => Err(Error::Parse(format!("unknown rank method '{other}'"))),
        }
    }
}

/// PBH rank at one eigenvalue cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRank {
    pub re: f64,
    pub im: f64,
    pub algebraic_multiplicity: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub method: RankMethod,
    /// Dimension of the controllable subspace (Kalman, subspace) or the
    /// smallest PBH rank.
    pub rank: usize,
    pub state_dim: usize,
    pub tolerance: Tolerance,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eigen_ranks: Vec<EigenRank>,
}

impl RankReport {
    pub fn full(&self) -> bool {
        self.rank == self.state_dim
    }
}

fn check_shapes(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() || a.nrows() != b.nrows() {
        return Err(Error::Shape(format!(
            "A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    // nalgebra's SVD does not terminate on NaN
    if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
        return Err(Error::Shape("A or B has non-finite entries".into()));
    }
    Ok(())
}

/// `(B, AB, A²B, …, Aⁿ⁻¹B)`.
pub fn controllability_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let p = b.ncols();
    let mut out = DMatrix::zeros(n, n * p);
    let mut block = b.clone();
    for k in 0..n {
        out.columns_mut(k * p, p).copy_from(&block);
        block = a * block;
    }
    out
}

/// `(C; CA; …; CAⁿ⁻¹)`.
pub fn observability_matrix(a: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    controllability_matrix(&a.transpose(), &c.transpose()).transpose()
}

fn kalman_rank(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: &Tolerance) -> usize {
    // Scaling does not change the Krylov spaces. Dividing by the spectral
    // radius rather than a matrix norm keeps the dominant modes of Aᵏ at
    // unit size, so the slow ones stay above the rank threshold longer.
    let rho = eigenvalues(a).iter().map(|e| e.norm()).fold(0.0, f64::max);
    let a = if rho > 0.0 { a / rho } else { a.clone() };
    let k = controllability_matrix(&a, b);
    tol.rank(&k)
}

/// Orthonormal basis of the smallest `A`-invariant subspace containing
/// `range(B)`.
///
/// Only the images of the directions found in the previous round need to
/// be examined: `A·V_{k−1} ⊆ V_k` already.
pub fn controllable_subspace(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: &Tolerance) -> DMatrix<f64> {
    let n = a.nrows();
    let scale = a.norm().max(max_abs(b)).max(f64::MIN_POSITIVE);
    let thr = tol.rank_threshold(n, n, scale);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut fresh: Vec<DVector<f64>> = b.column_iter().map(|c| c.clone_owned()).collect();
    while basis.len() < n && !fresh.is_empty() {
        let start = basis.len();
        extend_orthonormal(&mut basis, fresh, thr);
        fresh = basis[start..].iter().map(|q| a * q).collect();
    }
    DMatrix::from_columns(&basis)
}

/// Adds to `basis` the directions of `candidates` whose residual against
/// the current basis exceeds `thr`, largest residual first.
fn extend_orthonormal(basis: &mut Vec<DVector<f64>>, mut candidates: Vec<DVector<f64>>, thr: f64) {
    let project_out = |v: &mut DVector<f64>, basis: &[DVector<f64>]| {
        // twice is enough (Kahan–Parlett)
        for _ in 0..2 {
            for q in basis {
                let c = q.dot(v);
                v.axpy(-c, q, 1.0);
            }
        }
    };
    for v in candidates.iter_mut() {
        project_out(v, basis);
    }
    while !candidates.is_empty() && basis.len() < candidates[0].len() {
        let (best, norm) = candidates
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if norm <= thr {
            break;
        }
        let mut q = candidates.swap_remove(best);
        project_out(&mut q, basis);
        let qn = q.norm();
        if qn <= thr {
            continue;
        }
        q /= qn;
        for v in candidates.iter_mut() {
            let c = q.dot(v);
            v.axpy(-c, &q, 1.0);
        }
        basis.push(q);
    }
}

/// Eigenvalue clusters used by the PBH test.
pub fn eigen_clusters(a: &DMatrix<f64>) -> Vec<(Complex64, usize)> {
    let eigs = eigenvalues(a);
    let scale = eigs.iter().map(|e| e.norm()).fold(1.0, f64::max);
    cluster_eigenvalues(&eigs, 1e-6 * scale)
}

/// Numerical rank of `(sI − A, B)` over ℂ.
pub fn pbh_rank(a: &DMatrix<f64>, b: &DMatrix<f64>, s: Complex64, tol: &Tolerance) -> usize {
    let n = a.nrows();
    let mut m = DMatrix::<Complex64>::zeros(n, n + b.ncols());
    m.columns_mut(0, n)
        .copy_from(&(DMatrix::<Complex64>::identity(n, n) * s - to_complex(a)));
    m.columns_mut(n, b.ncols()).copy_from(&to_complex(b));
    tol.rank_complex(&m)
}

/// `n − rank(λI − A)`.
pub fn geometric_multiplicity(a: &DMatrix<f64>, lambda: Complex64, tol: &Tolerance) -> usize {
    let n = a.nrows();
    n - pbh_rank(a, &DMatrix::zeros(n, 0), lambda, tol)
}

pub fn is_controllable(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    method: RankMethod,
    tol: &Tolerance,
) -> Result<RankReport> {
    check_shapes(a, b)?;
    let n = a.nrows();
    let mut eigen_ranks = Vec::new();
    let rank = match method {
        RankMethod::Kalman => kalman_rank(a, b, tol),
        RankMethod::Subspace => controllable_subspace(a, b, tol).ncols(),
        RankMethod::Pbh => {
            for (lambda, mult) in eigen_clusters(a) {
                eigen_ranks.push(EigenRank {
                    re: lambda.re,
                    im: lambda.im,
                    algebraic_multiplicity: mult,
                    rank: pbh_rank(a, b, lambda, tol),
                });
            }
            eigen_ranks.iter().map(|e| e.rank).min().unwrap_or(n)
        }
    };
    Ok(RankReport {
        method,
        rank,
        state_dim: n,
        tolerance: *tol,
        eigen_ranks,
    })
}

/// `(A, C)` is observable iff `(Aᵀ, Cᵀ)` is controllable.
pub fn is_observable(
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    method: RankMethod,
    tol: &Tolerance,
) -> Result<RankReport> {
    is_controllable(&a.transpose(), &c.transpose(), method, tol)
}

/// `n × k` matrix whose columns are the unit vectors `e_i`, `i ∈ indices`
/// (0-based).
pub fn unit_columns(n: usize, indices: &[usize]) -> Result<DMatrix<f64>> {
    let mut b = DMatrix::zeros(n, indices.len());
    for (j, &i) in indices.iter().enumerate() {
        if i >= n {
            return Err(Error::Shape(format!("state index {} out of range 1..={n}", i + 1)));
        }
        b[(i, j)] = 1.0;
    }
    Ok(b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NGamma {
    pub value: usize,
    /// Label of the first irrep attaining the bound.
    pub irrep: Option<String>,
    pub warnings: Vec<String>,
}

/// Lower bound on `rank(B)` for controllability: the largest price of an
/// irrep that occurs in the state space.
///
/// The price is `n_i` for irreps of real type and `n_i/2` otherwise. The
/// quaternionic case is an extrapolation of the real-type argument and is
/// reported as a warning.
pub fn n_gamma(dec: &IsotypicDecomposition) -> NGamma {
    let mut value = 0;
    let mut irrep = None;
    let mut warnings = Vec::new();
    for c in dec.present() {
        if c.kind == RepType::Quaternionic {
            warnings.push(format!(
                "'{}' is of quaternionic type; its price {} is an extrapolation",
                c.label, c.price
            ));
        }
        if c.price > value {
            value = c.price;
            irrep = Some(c.label.clone());
        }
    }
    NGamma {
        value,
        irrep,
        warnings,
    }
}

/// `‖P_i^μ e_m‖ > tol` for component `i`, block `μ` and state `m` (all
/// 0-based). Irreps that are not absolutely irreducible use the isotypic
/// projection.
pub fn check_em_condition(
    dec: &IsotypicDecomposition,
    i: usize,
    mu: usize,
    m: usize,
    tol: &Tolerance,
) -> bool {
    let c = &dec.components[i];
    let p = c.sa_projections.get(mu).unwrap_or(&c.projection);
    p.column(m).norm() > tol.entry
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignOptions {
    /// Skip candidates that do not enlarge the controllable subspace.
    pub rank_greedy: bool,
}

/// One accepted unit vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignStep {
    pub irrep: String,
    /// 1-based symmetry adapted block.
    pub mu: usize,
    /// 1-based column of `T`.
    pub column: usize,
    /// 1-based state index.
    pub row: usize,
    /// Dimension of the controllable subspace after this step.
    pub rank: usize,
    /// Whether the step came from the fallback sweep after the irrep passes.
    #[serde(default)]
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlDesign {
    /// 0-based state indices in selection order.
    pub selected: Vec<usize>,
    pub b: DMatrix<f64>,
    pub n_gamma: usize,
    pub controllable: bool,
    pub rank: usize,
    pub trace: Vec<DesignStep>,
}

impl ControlDesign {
    pub fn selected_one_based(&self) -> Vec<usize> {
        self.selected.iter().map(|i| i + 1).collect()
    }
}

/// Greedy construction of a sparse input matrix from the columns of `T`.
///
/// Irreps are visited by price (descending), ties in declaration order.
/// For an irrep with `n_i` blocks of width `d_i` the scan starts at the
/// first column `s` of its first block; the first row `r ∉ V` with
/// `|t_rs| > tol` is added to `V` and `s` advances by `d_i`, `n_i` times.
/// After each irrep the rank of the controllability matrix is checked.
/// If the irrep passes do not reach full rank, every column of `T` is swept
/// in the same order until the system is controllable or `V` holds every
/// state.
pub fn design_input_matrix(
    a: &DMatrix<f64>,
    dec: &IsotypicDecomposition,
    options: DesignOptions,
    tol: &Tolerance,
) -> Result<ControlDesign> {
    let n = a.nrows();
    if dec.transform.shape() != (n, n) {
        return Err(Error::Shape(format!(
            "transform {:?} does not match system of dimension {n}",
            dec.transform.shape()
        )));
    }
    let t = &dec.transform;
    let bound = n_gamma(dec).value;
    let mut order: Vec<usize> = (0..dec.components.len())
        .filter(|&i| dec.components[i].is_present())
        .collect();
    order.sort_by(|&x, &y| dec.components[y].price.cmp(&dec.components[x].price).then(x.cmp(&y)));

    let mut selected: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut rank = 0;
    let rank_of = |sel: &[usize]| -> usize {
        let b = unit_columns(n, sel).expect("indices in range");
        controllable_subspace(a, &b, tol).ncols()
    };

    // tries the rows of column s top to bottom; returns whether one was added
    let try_column = |s: usize,
                          comp: usize,
                          fallback: bool,
                          selected: &mut Vec<usize>,
                          rank: &mut usize,
                          trace: &mut Vec<DesignStep>|
     -> bool {
        let c = &dec.components[comp];
        for r in 0..n {
            if selected.contains(&r) || t[(r, s)].abs() <= tol.entry {
                continue;
            }
            selected.push(r);
            let new_rank = rank_of(selected);
            if options.rank_greedy && new_rank <= *rank {
                selected.pop();
                continue;
            }
            *rank = new_rank;
            trace.push(DesignStep {
                irrep: c.label.clone(),
                mu: (s - c.column_offset) / c.block_dim + 1,
                column: s + 1,
                row: r + 1,
                rank: new_rank,
                fallback,
            });
            return true;
        }
        false
    };

    for &i in &order {
        if rank == n {
            break;
        }
        let c = &dec.components[i];
        let mut added = 0;
        let mut s = c.column_offset;
        while added < c.block_count && s < c.column_offset + c.isotypic_dim {
            if try_column(s, i, false, &mut selected, &mut rank, &mut trace) {
                added += 1;
            }
            s += c.block_dim;
        }
    }
    if rank < n {
        'sweep: for &i in &order {
            let c = &dec.components[i];
            for s in c.column_offset..c.column_offset + c.isotypic_dim {
                if rank == n || selected.len() == n {
                    break 'sweep;
                }
                try_column(s, i, true, &mut selected, &mut rank, &mut trace);
            }
        }
    }
    let b = unit_columns(n, &selected)?;
    Ok(ControlDesign {
        selected,
        b,
        n_gamma: bound,
        controllable: rank == n,
        rank,
        trace,
    })
}

/// Sensor placement by duality: the input design for `Aᵀ`, returned with
/// `b` holding `C = Bᵀ`.
///
/// The decomposition depends only on the group action, which is
/// orthogonal, so the one computed for `A` serves `Aᵀ` as well.
pub fn design_output_matrix(
    a: &DMatrix<f64>,
    dec: &IsotypicDecomposition,
    options: DesignOptions,
    tol: &Tolerance,
) -> Result<ControlDesign> {
    let mut design = design_input_matrix(&a.transpose(), dec, options, tol)?;
    design.b = design.b.transpose();
    Ok(design)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputConfig {
    /// 0-based state indices, increasing.
    pub indices: Vec<usize>,
    pub controllable: bool,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            break;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
    out
}

/// Every `k`-subset of state indices, in lexicographic order, with its
/// controllability verdict (subspace method). Work is spread over threads;
/// the result is identical to a sequential run.
pub fn enumerate_input_configs(
    a: &DMatrix<f64>,
    k: usize,
    cap: u128,
    tol: &Tolerance,
) -> Result<Vec<InputConfig>> {
    let n = a.nrows();
    let count = binomial(n, k);
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    combinations(n, k)
        .into_par_iter()
        .map(|indices| {
            let b = unit_columns(n, &indices)?;
            let controllable = controllable_subspace(a, &b, tol).ncols() == n;
            Ok(InputConfig {
                indices,
                controllable,
            })
        })
        .collect()
}
