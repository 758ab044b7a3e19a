//! Networked linear systems: assembly of the system matrix, lifting of node
//! permutations to the state space, and equivariance checks.

use std::collections::{BTreeMap, HashSet};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{kron, Tolerance};
use crate::permgroup::{extend_by_words_from, Permutation, PermutationGroup};

/// A directed coupling: the state of `from` enters the equation of `to`
/// through the matrix named `label`. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: String,
}

/// `N` identical nodes with `d`-dimensional internal dynamics.
#[derive(Debug, Clone)]
pub struct NetworkSpec {
    pub node_count: usize,
    pub node_dim: usize,
    pub internal_block: DMatrix<f64>,
    pub coupling_labels: BTreeMap<String, DMatrix<f64>>,
    pub edges: Vec<Edge>,
}

impl NetworkSpec {
    pub fn state_dim(&self) -> usize {
        self.node_count * self.node_dim
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.node_dim;
        if d == 0 || self.node_count == 0 {
            return Err(Error::InvalidNetwork(
                "node_count and node_dim must be positive".into(),
            ));
        }
        if self.internal_block.shape() != (d, d) {
            return Err(Error::InvalidNetwork(format!(
                "internal_block is {}x{}, expected {d}x{d}",
                self.internal_block.nrows(),
                self.internal_block.ncols()
            )));
        }
        for (name, m) in &self.coupling_labels {
            if m.shape() != (d, d) {
                return Err(Error::InvalidNetwork(format!(
                    "coupling '{name}' is {}x{}, expected {d}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        let mut seen = HashSet::new();
        for e in &self.edges {
            if e.from >= self.node_count || e.to >= self.node_count {
                return Err(Error::InvalidNetwork(format!(
                    "edge {} -> {} out of range 1..={}",
                    e.from + 1,
                    e.to + 1,
                    self.node_count
                )));
            }
            if !self.coupling_labels.contains_key(&e.label) {
                return Err(Error::InvalidNetwork(format!(
                    "edge {} -> {} uses unknown label '{}'",
                    e.from + 1,
                    e.to + 1,
                    e.label
                )));
            }
            if !seen.insert((e.from, e.to)) {
                return Err(Error::InvalidNetwork(format!(
                    "duplicate edge {} -> {}",
                    e.from + 1,
                    e.to + 1
                )));
            }
        }
        Ok(())
    }
}

/// Assembles the system matrix.
///
/// Row block `i` holds the equation of node `i`: block `(i, i)` is the
/// internal block and block `(i, j)` is the coupling matrix of the edge
/// `j → i`. Absent edges give zero blocks.
pub fn assemble(spec: &NetworkSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let d = spec.node_dim;
    let n = spec.state_dim();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..spec.node_count {
        a.view_mut((i * d, i * d), (d, d))
            .copy_from(&spec.internal_block);
    }
    for e in &spec.edges {
        let c = &spec.coupling_labels[&e.label];
        a.view_mut((e.to * d, e.from * d), (d, d)).copy_from(c);
    }
    Ok(a)
}

/// Permutation matrix of `perm` Kronecker `I_d`.
pub fn lift(perm: &Permutation, node_dim: usize) -> DMatrix<f64> {
    kron(&perm.matrix(), &DMatrix::identity(node_dim, node_dim))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivarianceReport {
    pub max_residual: f64,
    /// Index into the checked action list of the worst offender.
    pub worst: Option<usize>,
    pub worst_entry: Option<(usize, usize)>,
    pub pass: bool,
}

/// `max_γ ‖γA − Aγ‖_max` over the given matrices.
///
/// Passing the generator images is enough: equivariance under generators
/// implies it under all products.
pub fn check_equivariance(
    a: &DMatrix<f64>,
    action: &[DMatrix<f64>],
    tol: f64,
) -> Result<EquivarianceReport> {
    let mut report = EquivarianceReport {
        max_residual: 0.0,
        worst: None,
        worst_entry: None,
        pass: true,
    };
    for (k, g) in action.iter().enumerate() {
        if g.shape() != a.shape() || !a.is_square() {
            return Err(Error::Shape(format!(
                "action matrix {k} is {:?}, system matrix is {:?}",
                g.shape(),
                a.shape()
            )));
        }
        let diff = g * a - a * g;
        if let Some((i, j, v)) = crate::linalg::argmax_abs(&diff) {
            if v > report.max_residual {
                report.max_residual = v;
                report.worst = Some(k);
                report.worst_entry = Some((i, j));
            }
        }
    }
    report.pass = report.max_residual <= tol;
    Ok(report)
}

/// A system matrix together with the group acting on its nodes.
#[derive(Debug, Clone)]
pub struct EquivariantSystem {
    pub a: DMatrix<f64>,
    pub node_dim: usize,
    pub group: PermutationGroup,
    /// Node permutation of every group element.
    pub vertex_action: Vec<Permutation>,
    /// `lift(vertex_action[g], d)` for every group element.
    pub lifted_action: Vec<DMatrix<f64>>,
    pub equivariance: EquivarianceReport,
}

impl EquivariantSystem {
    /// Builds the lifted action from one node permutation per generator.
    ///
    /// With `check` set, construction fails unless `A` commutes with the
    /// action of every generator within `tol.entry`.
    pub fn new(
        a: DMatrix<f64>,
        node_dim: usize,
        group: PermutationGroup,
        vertex_generators: &[Permutation],
        check: bool,
        tol: &Tolerance,
    ) -> Result<Self> {
        if !a.is_square() || node_dim == 0 || a.nrows() % node_dim != 0 {
            return Err(Error::Shape(format!(
                "system matrix {:?} incompatible with node dimension {node_dim}",
                a.shape()
            )));
        }
        let nodes = a.nrows() / node_dim;
        for (i, p) in vertex_generators.iter().enumerate() {
            if p.degree() != nodes {
                return Err(Error::InvalidNetwork(format!(
                    "vertex action of generator {} acts on {} points, network has {nodes} nodes",
                    i + 1,
                    p.degree()
                )));
            }
        }
        let vertex_action =
            extend_by_words_from(&group, vertex_generators, &Permutation::identity(nodes))?;
        // the vertex action must itself respect the group law
        for x in 0..group.order() {
            for (g, pg) in vertex_generators.iter().enumerate() {
                let lhs = &vertex_action[group.times_generator(x, g)];
                if lhs != &vertex_action[x].compose(pg)? {
                    return Err(Error::InvalidNetwork(format!(
                        "vertex action is not a homomorphism at element {} and generator {}",
                        group.element(x).word_string(),
                        g + 1
                    )));
                }
            }
        }
        let lifted_action: Vec<_> = vertex_action.iter().map(|p| lift(p, node_dim)).collect();
        let generator_lifts: Vec<_> = vertex_generators.iter().map(|p| lift(p, node_dim)).collect();
        let equivariance = check_equivariance(&a, &generator_lifts, tol.entry)?;
        if check && !equivariance.pass {
            let (row, col) = equivariance.worst_entry.unwrap_or((0, 0));
            return Err(Error::NotEquivariant {
                generator: equivariance.worst.map_or(0, |g| g + 1),
                residual: equivariance.max_residual,
                row: row + 1,
                col: col + 1,
            });
        }
        Ok(EquivariantSystem {
            a,
            node_dim,
            group,
            vertex_action,
            lifted_action,
            equivariance,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    /// Equivariance over every group element, for diagnostics.
    pub fn full_equivariance(&self, tol: f64) -> Result<EquivarianceReport> {
        check_equivariance(&self.a, &self.lifted_action, tol)
    }

    /// The same group action on a different system matrix, e.g. `Aᵀ`.
    pub fn with_matrix(&self, a: DMatrix<f64>) -> Self {
        EquivariantSystem {
            a,
            ..self.clone()
        }
    }
}

/// 2-subsets of `{1..5}` labelling the Petersen vertices `1..10`.
///
/// This is the unique labelling in which vertex 1 is adjacent to 2, 5, 6
/// and the transposition `(1 2)` and cycle `(1 2 3 4 5)` induce
/// `(3 7)(4 10)(8 9)` and `(1 4 2 5 3)(6 9 7 10 8)`.
pub const PETERSEN_SUBSETS: [(usize, usize); 10] = [
    (1, 2),
    (3, 4),
    (1, 5),
    (2, 3),
    (4, 5),
    (3, 5),
    (2, 5),
    (2, 4),
    (1, 4),
    (1, 3),
];

/// A network bundled with the group acting on it.
#[derive(Debug, Clone)]
pub struct SymmetricNetwork {
    pub spec: NetworkSpec,
    pub group: PermutationGroup,
    pub vertex_generators: Vec<Permutation>,
}

impl SymmetricNetwork {
    pub fn system(&self, tol: &Tolerance) -> Result<EquivariantSystem> {
        let a = assemble(&self.spec)?;
        EquivariantSystem::new(
            a,
            self.spec.node_dim,
            self.group.clone(),
            &self.vertex_generators,
            true,
            tol,
        )
    }
}

/// Induced action of a permutation of `{1..5}` on the Petersen vertices.
pub fn petersen_vertex_perm(symbols: &Permutation) -> Permutation {
    let images = PETERSEN_SUBSETS
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (symbols.apply(a - 1) + 1, symbols.apply(b - 1) + 1);
            let key = (x.min(y), x.max(y));
            PETERSEN_SUBSETS.iter().position(|&s| s == key).unwrap()
        })
        .collect();
    Permutation::new(images).expect("induced action is a bijection")
}

/// The Petersen graph with scalar node dynamics `b` and coupling `c`,
/// together with `S₅` (generators `(1 2)`, `(1 2 3 4 5)`) and its induced
/// vertex action.
pub fn petersen(b: f64, c: f64) -> SymmetricNetwork {
    let group = PermutationGroup::symmetric(5).expect("S5");
    let vertex_generators = group.generators().iter().map(petersen_vertex_perm).collect();
    let mut edges = Vec::new();
    for (i, &(a1, b1)) in PETERSEN_SUBSETS.iter().enumerate() {
        for (j, &(a2, b2)) in PETERSEN_SUBSETS.iter().enumerate() {
            if i != j && a1 != a2 && a1 != b2 && b1 != a2 && b1 != b2 {
                edges.push(Edge {
                    from: j,
                    to: i,
                    label: "C".into(),
                });
            }
        }
    }
    let spec = NetworkSpec {
        node_count: 10,
        node_dim: 1,
        internal_block: DMatrix::from_element(1, 1, b),
        coupling_labels: BTreeMap::from([("C".to_string(), DMatrix::from_element(1, 1, c))]),
        edges,
    };
    SymmetricNetwork {
        spec,
        group,
        vertex_generators,
    }
}

/// Ring of `N` nodes where node `i` hears node `i+1` through `forward` and
/// node `i−1` through `backward`, with the rotation `R₁` (and, when
/// `with_reflection`, the reflection `S₁` fixing node 2) as generators.
pub fn ring(
    node_count: usize,
    internal: DMatrix<f64>,
    forward: DMatrix<f64>,
    backward: DMatrix<f64>,
    with_reflection: bool,
) -> Result<SymmetricNetwork> {
    let n = node_count;
    let d = internal.nrows();
    let mut edges = Vec::new();
    for i in 0..n {
        edges.push(Edge {
            from: (i + 1) % n,
            to: i,
            label: "C1".into(),
        });
        if n > 2 {
            edges.push(Edge {
                from: (i + n - 1) % n,
                to: i,
                label: "C2".into(),
            });
        }
    }
    let spec = NetworkSpec {
        node_count: n,
        node_dim: d,
        internal_block: internal,
        coupling_labels: BTreeMap::from([("C1".to_string(), forward), ("C2".to_string(), backward)]),
        edges,
    };
    // R₁ x has block i equal to x_{i+1}, i.e. node i+1 is sent to node i
    let rotation = Permutation::new((0..n).map(|i| (i + n - 1) % n).collect())?;
    let mut generators = vec![rotation];
    if with_reflection {
        // S₁ fixes node 2 and maps node i to node 4 − i (mod N), i.e. (1 3) on a 4-ring
        let reflection = Permutation::new((0..n).map(|i| (n + 2 - i) % n).collect())?;
        generators.push(reflection);
    }
    let group = PermutationGroup::closure(n, generators.clone(), crate::permgroup::DEFAULT_CAP)?;
    Ok(SymmetricNetwork {
        spec,
        group,
        vertex_generators: generators,
    })
}
