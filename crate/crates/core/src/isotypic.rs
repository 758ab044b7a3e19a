//! Isotypic and symmetry adapted decompositions of the state space.
//!
//! For a group acting on `ℝⁿ` by matrices `M(γ)` and a real irrep `ϑ` of
//! dimension `n_ϑ`, the isotypic projection is
//! `P_ϑ = (n_ϑ / (e·|Γ|)) Σ χ(γ) M(γ)` with `e` the commutant dimension of
//! `ϑ`. For absolutely irreducible `ϑ` with orthogonal matrices `ρ(γ)` the
//! isotypic component splits further through
//! `P^{μν} = (n_ϑ/|Γ|) Σ ρ(γ)_{μν} M(γ)`; `P^μ = P^{μμ}` are the symmetry
//! adapted projections and `P^{μ1}` carries a basis of `V^1` onto `V^μ`.
//!
//! Columns of the transform `T` are ordered irrep by irrep (declaration
//! order), and inside an irrep by `μ` ascending, `d_ϑ` columns per `μ`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{char_poly, max_abs, orthonormal_basis, poly_discrepancy, Tolerance};
use crate::network::EquivariantSystem;
use crate::representations::{IrrepInfo, RepType};

/// `(n/(e|Γ|)) Σ χ(γ) M(γ)`.
pub fn isotypic_projection(action: &[DMatrix<f64>], irrep: &IrrepInfo) -> DMatrix<f64> {
    let e = irrep.commutant_dim.max(1) as f64;
    let scale = irrep.dim() as f64 / (e * action.len() as f64);
    weighted_sum(action, |g| irrep.character.values[g]) * scale
}

/// Transfer operator `P^{μν} = (n/|Γ|) Σ ρ(γ)_{μν} M(γ)` (0-based `μ, ν`).
///
/// For orthogonal `ρ` this equals `(n/|Γ|) Σ ρ(γ⁻¹)_{νμ} M(γ)`.
pub fn transfer_operator(
    action: &[DMatrix<f64>],
    irrep: &IrrepInfo,
    mu: usize,
    nu: usize,
) -> DMatrix<f64> {
    let scale = irrep.dim() as f64 / action.len() as f64;
    weighted_sum(action, |g| irrep.rep.matrices[g][(mu, nu)]) * scale
}

/// Symmetry adapted projection `P^μ = (n/|Γ|) Σ ρ(γ⁻¹)_{μμ} M(γ)`.
///
/// `inverses[g]` is the index of `γ⁻¹`. The result is an orthogonal
/// projection when both `ρ` and `M` are orthogonal.
pub fn sa_projection(
    action: &[DMatrix<f64>],
    irrep: &IrrepInfo,
    inverses: &[usize],
    mu: usize,
) -> DMatrix<f64> {
    let scale = irrep.dim() as f64 / action.len() as f64;
    weighted_sum(action, |g| irrep.rep.matrices[inverses[g]][(mu, mu)]) * scale
}

fn weighted_sum(action: &[DMatrix<f64>], weight: impl Fn(usize) -> f64) -> DMatrix<f64> {
    let n = action[0].nrows();
    let mut acc = DMatrix::zeros(n, n);
    for (g, m) in action.iter().enumerate() {
        let w = weight(g);
        if w != 0.0 {
            acc += m * w;
        }
    }
    acc
}

/// Orthonormal basis of `range(P)` for an (approximate) projection.
pub fn basis_of_image(p: &DMatrix<f64>, tol: &Tolerance) -> Result<DMatrix<f64>> {
    let residual = max_abs(&(p * p - p));
    if residual > tol.entry * max_abs(p).max(1.0) {
        return Err(Error::NotIdempotent { residual });
    }
    Ok(orthonormal_basis(p, 1.0, tol))
}

/// One irrep's share of the state space.
#[derive(Debug, Clone)]
pub struct Component {
    pub label: String,
    /// `n_i`, the dimension of the irrep.
    pub rep_dim: usize,
    pub kind: RepType,
    pub abs_irreducible: bool,
    pub price: usize,
    /// Number of symmetry adapted blocks (`n_i` or 1).
    pub block_count: usize,
    /// Size of each block.
    pub block_dim: usize,
    /// `d_i`, how often the irrep occurs.
    pub multiplicity: usize,
    /// `m_i = n_i · d_i`.
    pub isotypic_dim: usize,
    pub projection: DMatrix<f64>,
    /// `P^μ` for `μ = 1..n_i`; empty unless absolutely irreducible.
    pub sa_projections: Vec<DMatrix<f64>>,
    /// Orthonormal bases `S_i^μ`, one `n × block_dim` matrix per block.
    pub bases: Vec<DMatrix<f64>>,
    /// First column of this component in `T` (0-based).
    pub column_offset: usize,
}

impl Component {
    pub fn is_present(&self) -> bool {
        self.isotypic_dim > 0
    }

    /// 0-based column of `T` where block `μ` (0-based) starts.
    pub fn block_offset(&self, mu: usize) -> usize {
        self.column_offset + mu * self.block_dim
    }
}

#[derive(Debug, Clone)]
pub struct IsotypicDecomposition {
    pub state_dim: usize,
    pub components: Vec<Component>,
    /// Columns: all present components in order.
    pub transform: DMatrix<f64>,
    pub orthogonal: bool,
    pub warnings: Vec<String>,
}

impl IsotypicDecomposition {
    pub fn present(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| c.is_present())
    }

    /// Block sizes in `T` order.
    pub fn block_structure(&self) -> Vec<usize> {
        self.present()
            .flat_map(|c| std::iter::repeat_n(c.block_dim, c.block_count))
            .collect()
    }

    pub fn component(&self, label: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.label == label)
    }

    /// Replaces `T` by an externally supplied matrix with the same column
    /// layout, e.g. a reference basis. Each column must lie in the
    /// isotypic component it is assigned to.
    pub fn with_transform(&self, t: DMatrix<f64>, tol: &Tolerance) -> Result<Self> {
        if t.shape() != self.transform.shape() {
            return Err(Error::Shape(format!(
                "transform is {}x{}, expected {}x{}",
                t.nrows(),
                t.ncols(),
                self.transform.nrows(),
                self.transform.ncols()
            )));
        }
        let mut out = self.clone();
        for comp in out.components.iter_mut().filter(|c| c.is_present()) {
            let cols = t.columns(comp.column_offset, comp.isotypic_dim).clone_owned();
            let residual = max_abs(&(&comp.projection * &cols - &cols));
            if residual > tol.entry * max_abs(&cols).max(1.0) {
                return Err(Error::Decomposition(format!(
                    "columns {}..{} of the transform leave the '{}' component (residual {residual:.3e})",
                    comp.column_offset + 1,
                    comp.column_offset + comp.isotypic_dim,
                    comp.label
                )));
            }
            comp.bases = (0..comp.block_count)
                .map(|mu| t.columns(comp.block_offset(mu), comp.block_dim).clone_owned())
                .collect();
        }
        let n = t.ncols();
        out.orthogonal =
            max_abs(&(t.transpose() * &t - DMatrix::identity(n, n))) <= tol.entry;
        out.transform = t;
        Ok(out)
    }
}

struct Built {
    component: Component,
    warnings: Vec<String>,
}

fn build_component(
    action: &[DMatrix<f64>],
    inverses: &[usize],
    irrep: &IrrepInfo,
    group: &crate::permgroup::PermutationGroup,
    tol: &Tolerance,
) -> Result<Built> {
    let mut warnings = Vec::new();
    let projection = isotypic_projection(action, irrep);
    let residual = max_abs(&(&projection * &projection - &projection));
    if residual > tol.entry {
        return Err(Error::NotIdempotent { residual });
    }
    let isotypic_dim = tol.rank_scaled(&projection, 1.0);
    let n = irrep.dim();
    if isotypic_dim % n != 0 {
        return Err(Error::InconsistentMultiplicity {
            label: irrep.label().to_string(),
            isotypic_dim,
            rep_dim: n,
        });
    }
    let multiplicity = isotypic_dim / n;
    let (block_count, block_dim, sa_projections, bases) = if isotypic_dim == 0 {
        (irrep.block_count(), multiplicity, Vec::new(), Vec::new())
    } else if irrep.abs_irreducible {
        let orth = if irrep.rep.unitary {
            irrep.clone()
        } else {
            warnings.push(format!(
                "'{}' is not orthogonal; using an equivalent orthogonal form",
                irrep.label()
            ));
            irrep.unitarized(group, tol)?
        };
        let sa: Vec<_> = (0..n).map(|mu| sa_projection(action, &orth, inverses, mu)).collect();
        let first = basis_of_image(&sa[0], tol)?;
        if first.ncols() != multiplicity {
            return Err(Error::InconsistentMultiplicity {
                label: irrep.label().to_string(),
                isotypic_dim,
                rep_dim: n,
            });
        }
        let bases = (0..n)
            .map(|mu| {
                if mu == 0 {
                    first.clone()
                } else {
                    transfer_operator(action, &orth, mu, 0) * &first
                }
            })
            .collect();
        (n, multiplicity, sa, bases)
    } else {
        let basis = basis_of_image(&projection, tol)?;
        (1, isotypic_dim, Vec::new(), vec![basis])
    };
    Ok(Built {
        component: Component {
            label: irrep.label().to_string(),
            rep_dim: n,
            kind: irrep.kind,
            abs_irreducible: irrep.abs_irreducible,
            price: irrep.price(),
            block_count,
            block_dim,
            multiplicity,
            isotypic_dim,
            projection,
            sa_projections,
            bases,
            column_offset: 0,
        },
        warnings,
    })
}

/// Splits the state space of `system` along the given irreps.
///
/// The irreps must be pairwise non-isomorphic and defined on the system's
/// group. Irreps that do not occur are kept with `m_i = 0`.
pub fn decompose(
    system: &EquivariantSystem,
    irreps: &[IrrepInfo],
    tol: &Tolerance,
) -> Result<IsotypicDecomposition> {
    let n = system.state_dim();
    let group = &system.group;
    for ir in irreps {
        if ir.rep.matrices.len() != group.order() {
            return Err(Error::Shape(format!(
                "irrep '{}' has {} matrices, group has {} elements",
                ir.label(),
                ir.rep.matrices.len(),
                group.order()
            )));
        }
    }
    let inverses: Vec<usize> = (0..group.order()).map(|g| group.inverse_index(g)).collect();
    let action = &system.lifted_action;
    let built: Vec<Built> = irreps
        .par_iter()
        .map(|ir| build_component(action, &inverses, ir, group, tol))
        .collect::<Result<_>>()?;

    let mut warnings = Vec::new();
    let mut components = Vec::with_capacity(built.len());
    let mut offset = 0;
    for b in built {
        warnings.extend(b.warnings);
        let mut c = b.component;
        c.column_offset = offset;
        offset += c.isotypic_dim;
        components.push(c);
    }
    let total = components
        .iter()
        .fold(DMatrix::<f64>::zeros(n, n), |acc, c| acc + &c.projection);
    let defect = max_abs(&(total - DMatrix::<f64>::identity(n, n)));
    if offset != n || defect > tol.entry {
        return Err(Error::IncompleteIrreps {
            covered: offset,
            residual: n.saturating_sub(offset),
            dim: n,
        });
    }
    let mut transform = DMatrix::zeros(n, n);
    for c in &components {
        for (mu, b) in c.bases.iter().enumerate() {
            transform.columns_mut(c.block_offset(mu), c.block_dim).copy_from(b);
        }
    }
    let orthogonal =
        max_abs(&(transform.transpose() * &transform - DMatrix::identity(n, n))) <= tol.entry;
    Ok(IsotypicDecomposition {
        state_dim: n,
        components,
        transform,
        orthogonal,
        warnings,
    })
}

/// A diagonal block of `TᵀAT`.
#[derive(Debug, Clone)]
pub struct Block {
    pub label: String,
    /// 1-based index of the symmetry adapted block within its irrep.
    pub mu: usize,
    pub offset: usize,
    pub matrix: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct BlockDiagonal {
    pub a_tilde: DMatrix<f64>,
    pub blocks: Vec<Block>,
    pub off_block_residual: f64,
}

/// `Ã = T⁻¹AT` (`TᵀAT` for orthogonal `T`) cut into diagonal blocks.
///
/// Fails when an entry outside the blocks exceeds `tol.entry` relative to
/// `max(1, max|A|)`, which signals that `A` is not equivariant or the
/// decomposition does not belong to the action.
pub fn block_diagonalize(
    a: &DMatrix<f64>,
    dec: &IsotypicDecomposition,
    tol: &Tolerance,
) -> Result<BlockDiagonal> {
    let t = &dec.transform;
    if a.shape() != t.shape() {
        return Err(Error::Shape(format!(
            "system matrix {:?} does not match transform {:?}",
            a.shape(),
            t.shape()
        )));
    }
    let a_tilde = if dec.orthogonal {
        t.transpose() * a * t
    } else {
        let t_inv = t
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Decomposition("transform is singular".into()))?;
        t_inv * a * t
    };
    let mut blocks = Vec::new();
    let mut inside = DMatrix::from_element(a.nrows(), a.ncols(), false);
    for c in dec.present() {
        for mu in 0..c.block_count {
            let off = c.block_offset(mu);
            let k = c.block_dim;
            blocks.push(Block {
                label: c.label.clone(),
                mu: mu + 1,
                offset: off,
                matrix: a_tilde.view((off, off), (k, k)).clone_owned(),
            });
            inside.view_mut((off, off), (k, k)).fill(true);
        }
    }
    let off_block_residual = a_tilde
        .iter()
        .zip(inside.iter())
        .filter(|(_, &ins)| !ins)
        .fold(0.0f64, |acc, (x, _)| acc.max(x.abs()));
    if off_block_residual > tol.entry * max_abs(a).max(1.0) {
        return Err(Error::Decomposition(format!(
            "off-block residual {off_block_residual:.3e} exceeds tolerance; is A equivariant?"
        )));
    }
    Ok(BlockDiagonal {
        a_tilde,
        blocks,
        off_block_residual,
    })
}

#[derive(Debug, Clone)]
pub struct IsomorphyEntry {
    pub label: String,
    pub block_count: usize,
    /// Largest relative characteristic polynomial discrepancy against the
    /// first block.
    pub char_poly_discrepancy: f64,
    /// Largest entrywise difference against the first block.
    pub entry_discrepancy: f64,
}

/// Compares the blocks of each irrep with each other.
pub fn verify_block_isomorphy(blocks: &BlockDiagonal) -> Vec<IsomorphyEntry> {
    let mut out: Vec<IsomorphyEntry> = Vec::new();
    let mut first: Vec<(String, DMatrix<f64>, Vec<f64>)> = Vec::new();
    for b in &blocks.blocks {
        match first.iter().position(|(l, _, _)| *l == b.label) {
            None => {
                first.push((b.label.clone(), b.matrix.clone(), char_poly(&b.matrix)));
                out.push(IsomorphyEntry {
                    label: b.label.clone(),
                    block_count: 1,
                    char_poly_discrepancy: 0.0,
                    entry_discrepancy: 0.0,
                });
            }
            Some(k) => {
                let (_, m0, p0) = &first[k];
                let e = &mut out[k];
                e.block_count += 1;
                e.char_poly_discrepancy = e
                    .char_poly_discrepancy
                    .max(poly_discrepancy(p0, &char_poly(&b.matrix)));
                e.entry_discrepancy = e.entry_discrepancy.max(max_abs(&(m0 - &b.matrix)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{assemble, petersen, ring, EquivariantSystem};
    use crate::permgroup::PermutationGroup;
    use crate::representations::Family;

    fn m(r: usize, c: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, c, v)
    }

    fn d4() -> (EquivariantSystem, Vec<IrrepInfo>) {
        let tol = Tolerance::default();
        let net = ring(
            4,
            m(2, 2, &[10.0, -10.0, 3.0, 30.0]),
            m(2, 2, &[6.0, 3.0, 1.0, 5.0]),
            m(2, 2, &[6.0, 3.0, 1.0, 5.0]),
            true,
        )
        .unwrap();
        let sys = net.system(&tol).unwrap();
        let irreps = Family::Dihedral(4).irreps(&sys.group, &tol).unwrap();
        (sys, irreps)
    }

    #[test]
    fn d4_isotypic_dimensions() {
        let tol = Tolerance::default();
        let (sys, irreps) = d4();
        let dec = decompose(&sys, &irreps, &tol).unwrap();
        let dims: Vec<_> = dec.components.iter().map(|c| (c.label.as_str(), c.isotypic_dim)).collect();
        assert_eq!(dims, vec![("A1", 2), ("B1", 2), ("A2", 0), ("B2", 0), ("E1", 4)]);
        assert!(dec.orthogonal);
        assert_eq!(dec.block_structure(), vec![2, 2, 2, 2]);
    }

    #[test]
    fn d4_trivial_projection_is_node_average() {
        let tol = Tolerance::default();
        let (sys, irreps) = d4();
        let dec = decompose(&sys, &irreps, &tol).unwrap();
        let p = &dec.components[0].projection;
        for i in 0..8 {
            for j in 0..8 {
                let expected = if i % 2 == j % 2 { 0.25 } else { 0.0 };
                assert!((p[(i, j)] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn d4_sa_projection_couples_nodes_2_and_4() {
        let tol = Tolerance::default();
        let (sys, irreps) = d4();
        let dec = decompose(&sys, &irreps, &tol).unwrap();
        let e = dec.component("E1").unwrap();
        // one of the two P^μ lives on nodes 2 and 4 only, the other on 1 and 3
        let support = |p: &DMatrix<f64>| -> Vec<usize> {
            (0..8).filter(|&i| p.row(i).amax() > 1e-12).map(|i| i / 2 + 1).collect()
        };
        let mut s: Vec<_> = e.sa_projections.iter().map(support).collect();
        s.sort();
        assert_eq!(s, vec![vec![1, 1, 3, 3], vec![2, 2, 4, 4]]);
        for p in &e.sa_projections {
            assert!(max_abs(&(p * p - p)) < 1e-12);
            let halves = p.iter().filter(|x| (x.abs() - 0.5).abs() < 1e-12).count();
            assert_eq!(halves, 8);
        }
    }

    #[test]
    fn d4_blocks_and_isomorphy() {
        let tol = Tolerance::default();
        let (sys, irreps) = d4();
        let dec = decompose(&sys, &irreps, &tol).unwrap();
        let bd = block_diagonalize(&sys.a, &dec, &tol).unwrap();
        assert!(bd.off_block_residual < 1e-9);
        assert_eq!(bd.blocks.len(), 4);
        let iso = verify_block_isomorphy(&bd);
        let e = iso.iter().find(|e| e.label == "E1").unwrap();
        assert_eq!(e.block_count, 2);
        assert!(e.entry_discrepancy < 1e-9);
        // the repeated block is the internal block B − C₂-type combination
        let expected = [
            char_poly(&m(2, 2, &[22.0, -4.0, 5.0, 40.0])),
            char_poly(&m(2, 2, &[-2.0, -16.0, 1.0, 20.0])),
            char_poly(&m(2, 2, &[10.0, -10.0, 3.0, 30.0])),
        ];
        for (b, p) in bd.blocks.iter().take(3).zip(expected.iter()) {
            assert!(poly_discrepancy(&char_poly(&b.matrix), p) < 1e-9, "{}", b.label);
        }
    }

    #[test]
    fn projections_sum_to_identity_and_annihilate() {
        let tol = Tolerance::default();
        let (sys, irreps) = d4();
        let dec = decompose(&sys, &irreps, &tol).unwrap();
        for (i, ci) in dec.components.iter().enumerate() {
            for (j, cj) in dec.components.iter().enumerate() {
                let prod = &ci.projection * &cj.projection;
                if i == j {
                    assert!(max_abs(&(prod - &ci.projection)) < 1e-12);
                } else {
                    assert!(max_abs(&prod) < 1e-12);
                }
            }
            assert!(max_abs(&(&sys.a * &ci.projection - &ci.projection * &sys.a)) < 1e-9);
        }
    }

    #[test]
    fn missing_irreps_reported() {
        let tol = Tolerance::default();
        let (sys, irreps) = d4();
        let partial: Vec<_> = irreps.into_iter().filter(|i| i.label() != "E1").collect();
        match decompose(&sys, &partial, &tol) {
            Err(Error::IncompleteIrreps { covered, dim, .. }) => {
                assert_eq!((covered, dim), (4, 8));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn trivial_group_gives_identity_transform() {
        let tol = Tolerance::default();
        let group = PermutationGroup::trivial(3);
        let a = m(3, 3, &[1.0, 2.0, 0.0, 0.0, 3.0, 1.0, 4.0, 0.0, 2.0]);
        let sys = EquivariantSystem::new(a.clone(), 1, group.clone(), &[], true, &tol).unwrap();
        let irreps = Family::Trivial.irreps(&group, &tol).unwrap();
        let dec = decompose(&sys, &irreps, &tol).unwrap();
        assert_eq!(dec.transform, DMatrix::identity(3, 3));
        let bd = block_diagonalize(&a, &dec, &tol).unwrap();
        assert_eq!(bd.blocks.len(), 1);
        assert_eq!(bd.off_block_residual, 0.0);
    }

    #[test]
    fn petersen_multiplicities_with_young_irreps() {
        let tol = Tolerance::default();
        let net = petersen(0.0, 1.0);
        let sys = net.system(&tol).unwrap();
        let irreps = Family::Symmetric(5).irreps(&sys.group, &tol).unwrap();
        let dec = decompose(&sys, &irreps, &tol).unwrap();
        let present: Vec<_> = dec.present().map(|c| (c.label.as_str(), c.isotypic_dim)).collect();
        assert_eq!(present, vec![("[5]", 1), ("[4,1]", 4), ("[3,2]", 5)]);
        let bd = block_diagonalize(&assemble(&net.spec).unwrap(), &dec, &tol).unwrap();
        for b in &bd.blocks {
            let v = b.matrix[(0, 0)];
            let expected = match b.label.as_str() {
                "[5]" => 3.0,
                "[4,1]" => -2.0,
                _ => 1.0,
            };
            assert!((v - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn cyclic_complex_component_is_one_block() {
        let tol = Tolerance::default();
        let net = ring(
            4,
            m(1, 1, &[1.0]),
            m(1, 1, &[2.0]),
            m(1, 1, &[3.0]),
            false,
        )
        .unwrap();
        let sys = net.system(&tol).unwrap();
        let irreps = Family::Cyclic(4).irreps(&sys.group, &tol).unwrap();
        let dec = decompose(&sys, &irreps, &tol).unwrap();
        let e = dec.component("E1").unwrap();
        assert_eq!((e.block_count, e.block_dim, e.isotypic_dim), (1, 2, 2));
        let bd = block_diagonalize(&sys.a, &dec, &tol).unwrap();
        assert!(bd.off_block_residual < 1e-12);
    }

    #[test]
    fn foreign_transform_rejected() {
        let tol = Tolerance::default();
        let (sys, irreps) = d4();
        let dec = decompose(&sys, &irreps, &tol).unwrap();
        assert!(dec.with_transform(DMatrix::identity(8, 8), &tol).is_err());
        let same = dec.with_transform(dec.transform.clone(), &tol).unwrap();
        assert!(same.orthogonal);
    }

    #[test]
    fn non_idempotent_rejected() {
        let p = m(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            basis_of_image(&p, &Tolerance::default()),
            Err(Error::NotIdempotent { .. })
        ));
        assert_eq!(basis_of_image(&DMatrix::zeros(3, 3), &Tolerance::default()).unwrap().ncols(), 0);
    }
}
