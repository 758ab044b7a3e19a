//! JSON network specifications and machine-readable reports.
//!
//! A specification lists the nodes, the internal and coupling blocks, the
//! directed edges (1-based `[from, to, label]`) and the symmetry group:
//!
//! ```json
//! {
//!   "nodes": 4,
//!   "internal": [[10, -10], [3, 30]],
//!   "couplings": { "C": [[6, 3], [1, 5]] },
//!   "edges": [[2, 1, "C"], [4, 1, "C"]],
//!   "group": { "generators": ["(1 4 3 2)", "(1 3)"], "family": { "kind": "dihedral", "order": 4 } }
//! }
//! ```
//!
//! Group generators act on the nodes unless `vertex_action` is given; then
//! `generators` act on `degree` abstract points and `vertex_action` lists
//! the induced node permutations. Irreps come from `irreps` (a path relative
//! to the specification) or from the built-in `family`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::control::{ControlDesign, DesignStep, NGamma, RankMethod, RankReport};
use crate::error::{Error, Result};
use crate::isotypic::{BlockDiagonal, IsomorphyEntry, IsotypicDecomposition};
use crate::linalg::{cluster_eigenvalues, eigenvalues, from_rows, max_abs, to_rows, Tolerance};
use crate::network::{Edge, EquivariantSystem, NetworkSpec, SymmetricNetwork};
use crate::permgroup::{Permutation, PermutationGroup, DEFAULT_CAP};
use crate::representations::{import_irreps, Family, IrrepInfo, RepType};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub generators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_action: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub nodes: usize,
    pub internal: Vec<Vec<f64>>,
    #[serde(default)]
    pub couplings: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default)]
    pub edges: Vec<(usize, usize, String)>,
    pub group: GroupFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub irreps: Option<String>,
    /// Optional basis replacing the computed transform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<String>,
}

/// A parsed specification with its group and resolved file references.
#[derive(Debug, Clone)]
pub struct LoadedNetwork {
    pub name: String,
    pub network: SymmetricNetwork,
    pub family: Option<Family>,
    pub irreps_path: Option<PathBuf>,
    pub transform_path: Option<PathBuf>,
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::Parse(format!("{what}: empty matrix")));
    }
    from_rows(rows).ok_or_else(|| Error::Parse(format!("{what}: rows have different lengths")))
}

fn perms(list: &[String], degree: usize, what: &str) -> Result<Vec<Permutation>> {
    list.iter()
        .enumerate()
        .map(|(i, s)| {
            Permutation::parse_cycles(s, degree).map_err(|e| {
                Error::Parse(format!("group.{what}[{}] = \"{s}\": {e}", i))
            })
        })
        .collect()
}

impl NetworkFile {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| {
            Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    /// Builds the network and group; relative paths resolve against `base`.
    pub fn resolve(&self, base: &Path) -> Result<LoadedNetwork> {
        let internal = matrix(&self.internal, "internal")?;
        let d = internal.nrows();
        let mut coupling_labels = BTreeMap::new();
        for (label, rows) in &self.couplings {
            coupling_labels.insert(label.clone(), matrix(rows, &format!("couplings.{label}"))?);
        }
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(k, (from, to, label))| {
                if *from == 0 || *to == 0 {
                    return Err(Error::Parse(format!(
                        "edges[{k}]: node indices are 1-based"
                    )));
                }
                Ok(Edge {
                    from: from - 1,
                    to: to - 1,
                    label: label.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = NetworkSpec {
            node_count: self.nodes,
            node_dim: d,
            internal_block: internal,
            coupling_labels,
            edges,
        };
        spec.validate()?;

        let g = &self.group;
        let (group, vertex_generators) = match &g.vertex_action {
            None => {
                let gens = perms(&g.generators, self.nodes, "generators")?;
                let group = PermutationGroup::closure(self.nodes, gens.clone(), DEFAULT_CAP)?;
                (group, gens)
            }
            Some(action) => {
                let degree = g.degree.ok_or_else(|| {
                    Error::Parse("group.degree is required with group.vertex_action".into())
                })?;
                if action.len() != g.generators.len() {
                    return Err(Error::Parse(format!(
                        "group.vertex_action has {} entries for {} generators",
                        action.len(),
                        g.generators.len()
                    )));
                }
                let gens = perms(&g.generators, degree, "generators")?;
                let group = PermutationGroup::closure(degree, gens, DEFAULT_CAP)?;
                (group, perms(action, self.nodes, "vertex_action")?)
            }
        };
        Ok(LoadedNetwork {
            name: self.name.clone().unwrap_or_else(|| "network".into()),
            network: SymmetricNetwork {
                spec,
                group,
                vertex_generators,
            },
            family: g.family,
            irreps_path: self.irreps.as_ref().map(|p| base.join(p)),
            transform_path: self.transform.as_ref().map(|p| base.join(p)),
        })
    }
}

impl LoadedNetwork {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file = NetworkFile::parse(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        file.resolve(path.parent().unwrap_or(Path::new(".")))
    }

    pub fn system(&self, tol: &Tolerance) -> Result<EquivariantSystem> {
        self.network.system(tol)
    }

    /// Irreps from `override_path`, else the file's `irreps`, else the
    /// built-in family. Returns the irreps and any import warnings.
    pub fn irreps(
        &self,
        group: &PermutationGroup,
        override_path: Option<&Path>,
        tol: &Tolerance,
    ) -> Result<(Vec<IrrepInfo>, Vec<String>)> {
        if let Some(path) = override_path.or(self.irreps_path.as_deref()) {
            let text = std::fs::read_to_string(path)?;
            let imported = import_irreps(&text, group, tol)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            return Ok((imported.irreps, imported.warnings));
        }
        match self.family {
            Some(f) => Ok((f.irreps(group, tol)?, Vec::new())),
            None => Err(Error::Parse(
                "no irreps: give group.family, an irreps file, or --irreps".into(),
            )),
        }
    }

    /// Runs the decomposition, replacing `T` when the file names one.
    pub fn decompose(
        &self,
        system: &EquivariantSystem,
        irreps: &[IrrepInfo],
        tol: &Tolerance,
    ) -> Result<IsotypicDecomposition> {
        let dec = crate::isotypic::decompose(system, irreps, tol)?;
        match &self.transform_path {
            Some(p) => dec.with_transform(load_matrix(p)?, tol),
            None => Ok(dec),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    Rows(Vec<Vec<f64>>),
    Wrapped { rows: Vec<Vec<f64>> },
}

/// Reads a matrix stored as nested rows, bare or under `"rows"`.
pub fn load_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn parse_matrix(json: &str) -> Result<DMatrix<f64>> {
    let rows = match serde_json::from_str::<MatrixFile>(json)? {
        MatrixFile::Rows(r) | MatrixFile::Wrapped { rows: r } => r,
    };
    matrix(&rows, "matrix")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IrrepRow {
    pub label: String,
    /// `n_i`
    pub dim: usize,
    /// `d_i`
    pub multiplicity: usize,
    /// `m_i`
    pub isotypic_dim: usize,
    #[serde(rename = "type")]
    pub kind: RepType,
    pub price: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockRow {
    pub label: String,
    pub mu: usize,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenRow {
    pub re: f64,
    pub im: f64,
    pub algebraic: usize,
    pub geometric: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Residuals {
    pub equivariance: f64,
    pub off_block: f64,
    pub orthogonality: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub name: String,
    pub group_order: usize,
    pub state_dim: usize,
    pub irreps: Vec<IrrepRow>,
    pub n_gamma: NGamma,
    #[serde(rename = "T")]
    pub transform: Vec<Vec<f64>>,
    pub blocks: Vec<BlockRow>,
    pub spectrum: Vec<EigenRow>,
    pub residuals: Residuals,
    pub isomorphy: Vec<IsomorphyRow>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsomorphyRow {
    pub label: String,
    pub blocks: usize,
    pub char_poly_discrepancy: f64,
    pub entry_discrepancy: f64,
}

impl From<&IsomorphyEntry> for IsomorphyRow {
    fn from(e: &IsomorphyEntry) -> Self {
        IsomorphyRow {
            label: e.label.clone(),
            blocks: e.block_count,
            char_poly_discrepancy: e.char_poly_discrepancy,
            entry_discrepancy: e.entry_discrepancy,
        }
    }
}

/// Eigenvalue clusters of `A` with algebraic and geometric multiplicities,
/// sorted by real part descending.
pub fn spectrum(a: &DMatrix<f64>, tol: &Tolerance) -> Vec<EigenRow> {
    let eigs = eigenvalues(a);
    let scale = eigs.iter().map(|e| e.norm()).fold(1.0, f64::max);
    let mut rows: Vec<EigenRow> = cluster_eigenvalues(&eigs, 1e-6 * scale)
        .into_iter()
        .map(|(l, alg)| EigenRow {
            re: clean(l.re),
            im: clean(l.im),
            algebraic: alg,
            geometric: crate::control::geometric_multiplicity(a, l, tol),
        })
        .collect();
    rows.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    rows
}

/// Rounds away floating-point dust below `1e-12`.
fn clean(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else {
        x
    }
}

pub fn analysis_report(
    name: &str,
    system: &EquivariantSystem,
    dec: &IsotypicDecomposition,
    blocks: &BlockDiagonal,
    tol: &Tolerance,
) -> AnalysisReport {
    let n = dec.state_dim;
    let t = &dec.transform;
    let mut warnings = dec.warnings.clone();
    let ng = crate::control::n_gamma(dec);
    warnings.extend(ng.warnings.iter().cloned());
    AnalysisReport {
        name: name.to_string(),
        group_order: system.group.order(),
        state_dim: n,
        irreps: dec
            .components
            .iter()
            .map(|c| IrrepRow {
                label: c.label.clone(),
                dim: c.rep_dim,
                multiplicity: c.multiplicity,
                isotypic_dim: c.isotypic_dim,
                kind: c.kind,
                price: c.price,
            })
            .collect(),
        n_gamma: ng,
        transform: to_rows(t),
        blocks: blocks
            .blocks
            .iter()
            .map(|b| BlockRow {
                label: b.label.clone(),
                mu: b.mu,
                matrix: to_rows(&b.matrix.map(clean)),
            })
            .collect(),
        spectrum: spectrum(&system.a, tol),
        residuals: Residuals {
            equivariance: system.equivariance.max_residual,
            off_block: blocks.off_block_residual,
            orthogonality: max_abs(&(t.transpose() * t - DMatrix::identity(n, n))),
        },
        isomorphy: crate::isotypic::verify_block_isomorphy(blocks)
            .iter()
            .map(IsomorphyRow::from)
            .collect(),
        warnings,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Inputs `B` for controllability.
    #[default]
    Input,
    /// Outputs `C` for observability.
    Output,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignReport {
    pub name: String,
    #[serde(default)]
    pub mode: Mode,
    pub n_gamma: usize,
    /// 1-based.
    pub selected_state_indices: Vec<usize>,
    pub controllable: bool,
    pub rank: usize,
    pub state_dim: usize,
    pub method: RankMethod,
    #[serde(default)]
    pub trace: Vec<DesignStep>,
}

impl DesignReport {
    pub fn new(name: &str, mode: Mode, design: &ControlDesign, method: RankMethod, rank: usize, n: usize) -> Self {
        DesignReport {
            name: name.to_string(),
            mode,
            n_gamma: design.n_gamma,
            selected_state_indices: design.selected_one_based(),
            controllable: rank == n,
            rank,
            state_dim: n,
            method,
            trace: design.trace.clone(),
        }
    }

    pub fn parse(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub mode: Mode,
    /// 1-based.
    pub state_indices: Vec<usize>,
    pub state_dim: usize,
    pub results: Vec<RankReport>,
    /// All methods agree and report full rank.
    pub controllable: bool,
    pub methods_agree: bool,
}

/// Runs the requested rank tests on `(A, B)` (input mode) or `(A, C)`
/// (output mode) with unit vectors at `indices` (0-based).
pub fn check_report(
    name: &str,
    a: &DMatrix<f64>,
    indices: &[usize],
    mode: Mode,
    methods: &[RankMethod],
    tol: &Tolerance,
) -> Result<CheckReport> {
    let n = a.nrows();
    let b = crate::control::unit_columns(n, indices)?;
    let results = methods
        .iter()
        .map(|&m| match mode {
            Mode::Input => crate::control::is_controllable(a, &b, m, tol),
            Mode::Output => crate::control::is_observable(a, &b.transpose(), m, tol),
        })
        .collect::<Result<Vec<_>>>()?;
    let methods_agree = results.windows(2).all(|w| w[0].full() == w[1].full());
    let controllable = methods_agree && results.first().is_some_and(|r| r.full());
    Ok(CheckReport {
        name: name.to_string(),
        mode,
        state_indices: indices.iter().map(|i| i + 1).collect(),
        state_dim: n,
        results,
        controllable,
        methods_agree,
    })
}

/// Parses `"1,2, 3"` into 0-based indices.
pub fn parse_index_list(s: &str, n: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for tok in s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        let i: usize = tok
            .parse()
            .map_err(|_| Error::Parse(format!("'{tok}' is not an index")))?;
        if i == 0 || i > n {
            return Err(Error::Parse(format!("index {i} out of range 1..={n}")));
        }
        if out.contains(&(i - 1)) {
            return Err(Error::Parse(format!("index {i} listed twice")));
        }
        out.push(i - 1);
    }
    Ok(out)
}
