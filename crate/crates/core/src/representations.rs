//! Real irreducible representations of permutation groups.
//!
//! Representations are given by one matrix per group generator and extended
//! to all elements along the words stored in [`PermutationGroup`]. Built-in
//! families cover cyclic, dihedral and symmetric groups; anything else is
//! imported from a JSON file (for example an export from a computer algebra
//! system).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, Tolerance};
use crate::permgroup::{extend_by_words_from, PermutationGroup};

/// Frobenius-Schur type of a real irreducible representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepType {
    Real,
    Complex,
    Quaternionic,
}

impl RepType {
    /// Dimension of the commutant of a real irrep of this type.
    pub fn commutant_dim(self) -> usize {
        match self {
            RepType::Real => 1,
            RepType::Complex => 2,
            RepType::Quaternionic => 4,
        }
    }
}

impl std::fmt::Display for RepType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RepType::Real => "real",
            RepType::Complex => "complex",
            RepType::Quaternionic => "quaternionic",
        };
        f.write_str(s)
    }
}

/// A matrix representation, stored on every group element.
#[derive(Debug, Clone)]
pub struct MatrixRep {
    pub label: String,
    pub dim: usize,
    pub generator_images: Vec<DMatrix<f64>>,
    /// Indexed like [`PermutationGroup::elements`].
    pub matrices: Vec<DMatrix<f64>>,
    pub unitary: bool,
}

impl MatrixRep {
    /// Extends generator images to the whole group and checks that the
    /// result is a homomorphism.
    ///
    /// It suffices to check `ρ(x·g) = ρ(x)·ρ(g)` for every element `x` and
    /// generator `g`: together with `ρ(e) = I` this gives the full property
    /// by induction on word length.
    pub fn from_generators(
        group: &PermutationGroup,
        label: impl Into<String>,
        dim: usize,
        generator_images: Vec<DMatrix<f64>>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let label = label.into();
        for (i, m) in generator_images.iter().enumerate() {
            if m.shape() != (dim, dim) {
                return Err(Error::Shape(format!(
                    "representation '{label}': generator {} image is {}x{}, expected {dim}x{dim}",
                    i + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        let matrices = extend_by_words_from(
            group,
            &generator_images,
            &DMatrix::<f64>::identity(dim, dim),
        )?;
        for (x, mx) in matrices.iter().enumerate() {
            for (g, mg) in generator_images.iter().enumerate() {
                let lhs = &matrices[group.times_generator(x, g)];
                let residual = max_abs(&(lhs - mx * mg));
                if residual > tol.entry {
                    return Err(Error::NotHomomorphism {
                        label,
                        element: group.element(x).word_string(),
                        generator: g + 1,
                        residual,
                    });
                }
            }
        }
        let ident = DMatrix::<f64>::identity(dim, dim);
        let unitary = generator_images
            .iter()
            .all(|m| max_abs(&(m.transpose() * m - &ident)) <= tol.entry);
        Ok(MatrixRep {
            label,
            dim,
            generator_images,
            matrices,
            unitary,
        })
    }

    /// Largest `|ρ(gh) − ρ(g)ρ(h)|` over all pairs.
    pub fn homomorphism_defect(&self, group: &PermutationGroup) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..group.order() {
            for j in 0..group.order() {
                let lhs = &self.matrices[group.product_index(i, j)];
                worst = worst.max(max_abs(&(lhs - &self.matrices[i] * &self.matrices[j])));
            }
        }
        worst
    }
}

/// Trace function of a representation, indexed like the group elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Character {
    pub values: Vec<f64>,
}

impl Character {
    pub fn degree(&self) -> f64 {
        self.values[0]
    }

    /// `(1/|Γ|) Σ χ(g) ψ(g)`; characters of real representations are real
    /// and satisfy `χ(g⁻¹) = χ(g)`.
    pub fn inner(&self, other: &Character) -> f64 {
        let n = self.values.len() as f64;
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n
    }

    /// Largest deviation from being constant on conjugacy classes.
    pub fn class_function_defect(&self, group: &PermutationGroup) -> f64 {
        let mut worst = 0.0f64;
        for g in 0..group.order() {
            for h in 0..group.order() {
                let conj = group.product_index(group.product_index(h, g), group.inverse_index(h));
                worst = worst.max((self.values[conj] - self.values[g]).abs());
            }
        }
        worst
    }
}

pub fn character_of(rep: &MatrixRep) -> Character {
    Character {
        values: rep.matrices.iter().map(|m| m.trace()).collect(),
    }
}

/// Dimension of `{X : X ρ(g) = ρ(g) X for all g}`.
///
/// Only generators are needed. The constraints `(ρ(g)ᵀ ⊗ I − I ⊗ ρ(g)) vec X = 0`
/// are stacked and the null space dimension is read off the rank.
pub fn commutant_dimension(rep: &MatrixRep, tol: &Tolerance) -> usize {
    let n = rep.dim;
    let nn = n * n;
    if rep.generator_images.is_empty() {
        return nn;
    }
    let mut stacked = DMatrix::<f64>::zeros(nn * rep.generator_images.len(), nn);
    for (k, m) in rep.generator_images.iter().enumerate() {
        // row (i, j) of X m − m X, unknown X[(a, b)] at column a + n b
        for i in 0..n {
            for j in 0..n {
                let row = k * nn + i + n * j;
                for l in 0..n {
                    stacked[(row, i + n * l)] += m[(l, j)];
                    stacked[(row, l + n * j)] -= m[(i, l)];
                }
            }
        }
    }
    nn - tol.rank_scaled(&stacked, 1.0)
}

pub fn is_absolutely_irreducible(rep: &MatrixRep, tol: &Tolerance) -> bool {
    commutant_dimension(rep, tol) == 1
}

/// Frobenius-Schur indicator value `(1/|Γ|) Σ χ(g²)`.
pub fn fs_value(character: &Character, group: &PermutationGroup) -> f64 {
    (0..group.order())
        .map(|g| character.values[group.product_index(g, g)])
        .sum::<f64>()
        / group.order() as f64
}

/// Classifies an irreducible character by its Frobenius-Schur indicator.
///
/// `1` is real type and `0` complex type. Quaternionic type shows up as `-1`
/// for a complex irreducible character and as `-2` for the real irreducible
/// representation that carries two copies of it.
pub fn fs_indicator(character: &Character, group: &PermutationGroup) -> Result<RepType> {
    let s = fs_value(character, group);
    let close = |x: f64| (s - x).abs() <= 1e-6;
    if close(1.0) {
        Ok(RepType::Real)
    } else if close(0.0) {
        Ok(RepType::Complex)
    } else if close(-1.0) || close(-2.0) {
        Ok(RepType::Quaternionic)
    } else {
        Err(Error::Classification { value: s })
    }
}

/// A representation together with its derived invariants.
#[derive(Debug, Clone)]
pub struct IrrepInfo {
    pub rep: MatrixRep,
    pub character: Character,
    pub abs_irreducible: bool,
    pub commutant_dim: usize,
    pub kind: RepType,
}

impl IrrepInfo {
    /// Strict constructor for representations known to be irreducible.
    pub fn new(group: &PermutationGroup, rep: MatrixRep, tol: &Tolerance) -> Result<Self> {
        let character = character_of(&rep);
        let kind = fs_indicator(&character, group)?;
        let commutant_dim = commutant_dimension(&rep, tol);
        Ok(IrrepInfo {
            rep,
            character,
            abs_irreducible: commutant_dim == 1,
            commutant_dim,
            kind,
        })
    }

    /// Like [`IrrepInfo::new`] but never fails on classification; problems
    /// are returned as warnings instead.
    pub fn new_lenient(
        group: &PermutationGroup,
        rep: MatrixRep,
        tol: &Tolerance,
    ) -> (Self, Vec<String>) {
        let mut warnings = Vec::new();
        let character = character_of(&rep);
        let commutant_dim = commutant_dimension(&rep, tol);
        let kind = match fs_indicator(&character, group) {
            Ok(kind) => kind,
            Err(e) => {
                warnings.push(format!("'{}': {e}", rep.label));
                match commutant_dim {
                    2 => RepType::Complex,
                    4 => RepType::Quaternionic,
                    _ => RepType::Real,
                }
            }
        };
        if commutant_dim != kind.commutant_dim() {
            warnings.push(format!(
                "'{}' looks reducible: commutant dimension {commutant_dim} for {kind} type",
                rep.label
            ));
        }
        (
            IrrepInfo {
                rep,
                character,
                abs_irreducible: commutant_dim == 1,
                commutant_dim,
                kind,
            },
            warnings,
        )
    }

    pub fn label(&self) -> &str {
        &self.rep.label
    }

    pub fn dim(&self) -> usize {
        self.rep.dim
    }

    /// Contribution to the lower bound on the number of inputs: the
    /// dimension for real type, half of it otherwise.
    pub fn price(&self) -> usize {
        match self.kind {
            RepType::Real => self.rep.dim,
            RepType::Complex | RepType::Quaternionic => (self.rep.dim / 2).max(1),
        }
    }

    /// Number of symmetry adapted sub-blocks the isotypic component splits
    /// into: `n` for absolutely irreducible representations, one otherwise.
    pub fn block_count(&self) -> usize {
        if self.abs_irreducible {
            self.rep.dim
        } else {
            1
        }
    }

    /// An orthogonal representation equivalent to this one.
    ///
    /// With `H = Σ ρ(g)ᵀ ρ(g) = L Lᵀ` (Cholesky) the conjugate
    /// `Lᵀ ρ(g) L⁻ᵀ` is orthogonal.
    pub fn unitarized(&self, group: &PermutationGroup, tol: &Tolerance) -> Result<Self> {
        if self.rep.unitary {
            return Ok(self.clone());
        }
        let n = self.rep.dim;
        let h = self
            .rep
            .matrices
            .iter()
            .fold(DMatrix::<f64>::zeros(n, n), |acc, m| acc + m.transpose() * m);
        let chol = h.cholesky().ok_or_else(|| {
            Error::Decomposition(format!("'{}': invariant form not positive definite", self.rep.label))
        })?;
        let s = chol.l().transpose();
        let s_inv = s
            .clone()
            .try_inverse()
            .ok_or(Error::NonInvertibleImage { index: 0 })?;
        let images = self
            .rep
            .generator_images
            .iter()
            .map(|m| &s * m * &s_inv)
            .collect();
        let rep = MatrixRep::from_generators(group, self.rep.label.clone(), n, images, tol)?;
        Ok(IrrepInfo {
            character: character_of(&rep),
            rep,
            ..self.clone()
        })
    }
}

fn scalar(x: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, x)
}

fn rotation(angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

fn build(
    group: &PermutationGroup,
    specs: Vec<(String, usize, Vec<DMatrix<f64>>)>,
    tol: &Tolerance,
) -> Result<Vec<IrrepInfo>> {
    specs
        .into_iter()
        .map(|(label, dim, images)| {
            let rep = MatrixRep::from_generators(group, label, dim, images, tol)?;
            IrrepInfo::new(group, rep, tol)
        })
        .collect()
}

fn expect_generators(group: &PermutationGroup, count: usize, family: &'static str) -> Result<()> {
    if group.generators().len() != count {
        return Err(Error::Parse(format!(
            "{family} irreps need a group with {count} generator(s), found {}",
            group.generators().len()
        )));
    }
    Ok(())
}

/// Real irreps of `ℤ_k` for a group generated by a single element of order
/// `k`: the trivial rep, the sign rep (even `k`), and rotations by `2πj/k`
/// for `j = 1..⌊(k−1)/2⌋`, which are of complex type.
pub fn cyclic_irreps(group: &PermutationGroup, k: usize, tol: &Tolerance) -> Result<Vec<IrrepInfo>> {
    if k == 0 {
        return Err(Error::OutOfRange {
            family: "cyclic",
            range: "k >= 1",
            got: k,
        });
    }
    if k == 1 && group.generators().is_empty() {
        return build(group, vec![("A".into(), 1, vec![])], tol);
    }
    expect_generators(group, 1, "cyclic")?;
    let mut specs = vec![("A".to_string(), 1, vec![scalar(1.0)])];
    if k % 2 == 0 {
        specs.push(("B".to_string(), 1, vec![scalar(-1.0)]));
    }
    for j in 1..=(k - 1) / 2 {
        specs.push((
            format!("E{j}"),
            2,
            vec![rotation(2.0 * PI * j as f64 / k as f64)],
        ));
    }
    build(group, specs, tol)
}

/// Real irreps of `D_k` for a group generated by `(R₁, S₁)` with
/// `R₁ᵏ = S₁² = 1` and `S₁R₁S₁ = R₁⁻¹`.
///
/// Order: the one-dimensional reps `A1` (trivial), `B1` (`R₁ ↦ −1, S₁ ↦ 1`,
/// even `k`), `A2` (`R₁ ↦ 1, S₁ ↦ −1`), `B2` (`R₁, S₁ ↦ −1`, even `k`),
/// then `E_j` with `R₁ ↦ rot(2πj/k)`, `S₁ ↦ diag(1, −1)` for
/// `j = 1..⌈k/2⌉−1`.
pub fn dihedral_irreps(
    group: &PermutationGroup,
    k: usize,
    tol: &Tolerance,
) -> Result<Vec<IrrepInfo>> {
    if k < 2 {
        return Err(Error::OutOfRange {
            family: "dihedral",
            range: "k >= 2",
            got: k,
        });
    }
    expect_generators(group, 2, "dihedral")?;
    let even = k % 2 == 0;
    let mut specs = vec![("A1".to_string(), 1, vec![scalar(1.0), scalar(1.0)])];
    if even {
        specs.push(("B1".to_string(), 1, vec![scalar(-1.0), scalar(1.0)]));
    }
    specs.push(("A2".to_string(), 1, vec![scalar(1.0), scalar(-1.0)]));
    if even {
        specs.push(("B2".to_string(), 1, vec![scalar(-1.0), scalar(-1.0)]));
    }
    let reflection = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    for j in 1..k.div_ceil(2) {
        specs.push((
            format!("E{j}"),
            2,
            vec![rotation(2.0 * PI * j as f64 / k as f64), reflection.clone()],
        ));
    }
    build(group, specs, tol)
}

/// Partitions of `n` in reverse lexicographic order, `[n]` first.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            cur.push(part);
            rec(rest - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Standard Young tableaux of `shape`, each stored as `(row, col)` of the
/// entries `1..=n`.
fn standard_tableaux(shape: &[usize]) -> Vec<Vec<(usize, usize)>> {
    fn rec(
        shape: &[usize],
        filled: &mut Vec<usize>,
        pos: &mut Vec<(usize, usize)>,
        n: usize,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if pos.len() == n {
            out.push(pos.clone());
            return;
        }
        for r in 0..shape.len() {
            if filled[r] < shape[r] && (r == 0 || filled[r - 1] > filled[r]) {
                pos.push((r, filled[r]));
                filled[r] += 1;
                rec(shape, filled, pos, n, out);
                filled[r] -= 1;
                pos.pop();
            }
        }
    }
    let n = shape.iter().sum();
    let mut out = Vec::new();
    rec(shape, &mut vec![0; shape.len()], &mut Vec::new(), n, &mut out);
    out
}

/// Young's orthogonal form of the adjacent transpositions `s_k = (k k+1)`,
/// `k = 1..n−1`, on the standard tableaux of `shape`.
///
/// With axial distance `a = c(k+1) − c(k)` (content `c = col − row`),
/// `s_k T = (1/a) T + √(1 − 1/a²) T'`, where `T'` swaps `k` and `k+1`.
pub fn young_orthogonal_form(shape: &[usize]) -> Vec<DMatrix<f64>> {
    let tableaux = standard_tableaux(shape);
    let n: usize = shape.iter().sum();
    let dim = tableaux.len();
    let lookup: std::collections::HashMap<Vec<(usize, usize)>, usize> = tableaux
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    (0..n.saturating_sub(1))
        .map(|k| {
            let mut m = DMatrix::<f64>::zeros(dim, dim);
            for (i, t) in tableaux.iter().enumerate() {
                let (r1, c1) = t[k];
                let (r2, c2) = t[k + 1];
                let a = (c2 as f64 - r2 as f64) - (c1 as f64 - r1 as f64);
                m[(i, i)] = 1.0 / a;
                if a.abs() > 1.0 {
                    let mut swapped = t.clone();
                    swapped.swap(k, k + 1);
                    let j = lookup[&swapped];
                    m[(j, i)] = (1.0 - 1.0 / (a * a)).sqrt();
                }
            }
            m
        })
        .collect()
}

fn partition_label(p: &[usize]) -> String {
    let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(","))
}

/// Orthogonal irreps of `S_n` (`2 ≤ n ≤ 6`) for a group generated by the
/// transposition `(1 2)` and the cycle `(1 2 … n)`, one per partition of
/// `n` in reverse lexicographic order.
pub fn symmetric_irreps(
    group: &PermutationGroup,
    n: usize,
    tol: &Tolerance,
) -> Result<Vec<IrrepInfo>> {
    if !(2..=6).contains(&n) {
        return Err(Error::OutOfRange {
            family: "symmetric",
            range: "2 <= n <= 6",
            got: n,
        });
    }
    expect_generators(group, 2, "symmetric")?;
    let specs = partitions(n)
        .into_iter()
        .map(|shape| {
            let s = young_orthogonal_form(&shape);
            let dim = s[0].nrows();
            // (1 2 … n) = s_1 s_2 ⋯ s_{n−1}
            let cycle = s
                .iter()
                .fold(DMatrix::<f64>::identity(dim, dim), |acc, m| acc * m);
            (partition_label(&shape), dim, vec![s[0].clone(), cycle])
        })
        .collect();
    build(group, specs, tol)
}

/// A group family with built-in irreps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "order", rename_all = "lowercase")]
pub enum Family {
    Trivial,
    Cyclic(usize),
    Dihedral(usize),
    Symmetric(usize),
}

impl Family {
    /// Canonical permutation group for the family.
    pub fn group(self) -> Result<PermutationGroup> {
        match self {
            Family::Trivial => Ok(PermutationGroup::trivial(1)),
            Family::Cyclic(k) => PermutationGroup::cyclic(k),
            Family::Dihedral(k) => PermutationGroup::dihedral(k),
            Family::Symmetric(n) => PermutationGroup::symmetric(n),
        }
    }

    /// Irreps over `group`, whose generators must follow the family's
    /// convention.
    pub fn irreps(self, group: &PermutationGroup, tol: &Tolerance) -> Result<Vec<IrrepInfo>> {
        match self {
            Family::Trivial => {
                let ones = vec![scalar(1.0); group.generators().len()];
                build(group, vec![("A".into(), 1, ones)], tol)
            }
            Family::Cyclic(k) => cyclic_irreps(group, k, tol),
            Family::Dihedral(k) => dihedral_irreps(group, k, tol),
            Family::Symmetric(n) => symmetric_irreps(group, n, tol),
        }
    }
}

/// `Σ` of squared complex dimensions over the complex irreps contained in
/// the given real irreps; equals `|Γ|` for a complete list.
pub fn complex_dimension_square_sum(irreps: &[IrrepInfo]) -> usize {
    irreps
        .iter()
        .map(|ir| {
            let n = ir.dim();
            match ir.kind {
                RepType::Real => n * n,
                RepType::Complex => 2 * (n / 2) * (n / 2),
                RepType::Quaternionic => (n / 2) * (n / 2),
            }
        })
        .sum()
}

/// How imported matrices act.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionConvention {
    /// `ρ(gh) = ρ(g)ρ(h)` with `gh` meaning "apply `h`, then `g`".
    #[default]
    Left,
    /// Matrices acting on row vectors from the right, as exported by GAP;
    /// they are transposed on import.
    Right,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixData {
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

impl MatrixData {
    fn to_matrix(&self, dim: usize) -> Option<DMatrix<f64>> {
        match self {
            MatrixData::Flat(v) if v.len() == dim * dim => {
                Some(DMatrix::from_row_slice(dim, dim, v))
            }
            MatrixData::Rows(rows) if rows.len() == dim && rows.iter().all(|r| r.len() == dim) => {
                Some(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
            }
            _ => None,
        }
    }
}

/// One entry of an irrep import file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IrrepRecord {
    pub label: String,
    pub dim: usize,
    pub generator_matrices: Vec<MatrixData>,
    #[serde(default)]
    pub convention: ActionConvention,
}

#[derive(Debug, Clone)]
pub struct ImportedIrreps {
    pub irreps: Vec<IrrepInfo>,
    pub warnings: Vec<String>,
}

/// Imports irreps from a JSON array of [`IrrepRecord`]s, one matrix per
/// group generator in generator order.
pub fn import_irreps(
    json: &str,
    group: &PermutationGroup,
    tol: &Tolerance,
) -> Result<ImportedIrreps> {
    let records: Vec<IrrepRecord> = serde_json::from_str(json)?;
    irreps_from_records(&records, group, tol)
}

pub fn irreps_from_records(
    records: &[IrrepRecord],
    group: &PermutationGroup,
    tol: &Tolerance,
) -> Result<ImportedIrreps> {
    let mut irreps = Vec::new();
    let mut warnings = Vec::new();
    for rec in records {
        if rec.generator_matrices.len() != group.generators().len() {
            return Err(Error::Parse(format!(
                "irrep '{}': {} generator matrices for {} generators",
                rec.label,
                rec.generator_matrices.len(),
                group.generators().len()
            )));
        }
        let images = rec
            .generator_matrices
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let m = m.to_matrix(rec.dim).ok_or_else(|| {
                    Error::Parse(format!(
                        "irrep '{}': generator matrix {} is not {}x{}",
                        rec.label,
                        i + 1,
                        rec.dim,
                        rec.dim
                    ))
                })?;
                Ok(match rec.convention {
                    ActionConvention::Left => m,
                    ActionConvention::Right => m.transpose(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let rep = MatrixRep::from_generators(group, rec.label.clone(), rec.dim, images, tol)?;
        let (info, w) = IrrepInfo::new_lenient(group, rep, tol);
        warnings.extend(w);
        irreps.push(info);
    }
    Ok(ImportedIrreps { irreps, warnings })
}
