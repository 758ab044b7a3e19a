#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symnet::control::{self, RankMethod};
use symnet::io::LoadedNetwork;
use symnet::isotypic::{self, IsotypicDecomposition};
use symnet::linalg::max_abs;
use symnet::network::EquivariantSystem;
use symnet::permgroup::PermutationGroup;
use symnet::representations::{Family, IrrepInfo};
use symnet::Tolerance;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub struct Loaded {
    pub system: EquivariantSystem,
    pub irreps: Vec<IrrepInfo>,
    pub dec: IsotypicDecomposition,
}

pub fn load(name: &str) -> Loaded {
    let tol = Tolerance::default();
    let net = LoadedNetwork::load(&data(name)).unwrap();
    let system = net.system(&tol).unwrap();
    let (irreps, _) = net.irreps(&system.group, None, &tol).unwrap();
    let dec = net.decompose(&system, &irreps, &tol).unwrap();
    Loaded {
        system,
        irreps,
        dec,
    }
}

pub fn m(r: usize, c: usize, v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(r, c, v)
}

/// Blocks of the guiding example in the reference basis.
pub fn d4_golden_blocks() -> Vec<DMatrix<f64>> {
    vec![
        m(2, 2, &[22.0, -4.0, 5.0, 40.0]),
        m(2, 2, &[-2.0, -16.0, 1.0, 20.0]),
        m(2, 2, &[10.0, -10.0, 3.0, 30.0]),
        m(2, 2, &[10.0, -10.0, 3.0, 30.0]),
    ]
}

#[rustfmt::skip]
pub const PETERSEN_P2_TIMES_6: [f64; 100] = [
     3.,  1., -1., -1.,  1.,  1., -1., -1., -1., -1.,
     1.,  3.,  1., -1., -1., -1.,  1., -1., -1., -1.,
    -1.,  1.,  3.,  1., -1., -1., -1.,  1., -1., -1.,
    -1., -1.,  1.,  3.,  1., -1., -1., -1.,  1., -1.,
     1., -1., -1.,  1.,  3., -1., -1., -1., -1.,  1.,
     1., -1., -1., -1., -1.,  3., -1.,  1.,  1., -1.,
    -1.,  1., -1., -1., -1., -1.,  3., -1.,  1.,  1.,
    -1., -1.,  1., -1., -1.,  1., -1.,  3., -1.,  1.,
    -1., -1., -1.,  1., -1.,  1.,  1., -1.,  3., -1.,
    -1., -1., -1., -1.,  1., -1.,  1.,  1., -1.,  3.,
];

#[rustfmt::skip]
pub const PETERSEN_P3_TIMES_15: [f64; 100] = [
     6., -4.,  1.,  1., -4., -4.,  1.,  1.,  1.,  1.,
    -4.,  6., -4.,  1.,  1.,  1., -4.,  1.,  1.,  1.,
     1., -4.,  6., -4.,  1.,  1.,  1., -4.,  1.,  1.,
     1.,  1., -4.,  6., -4.,  1.,  1.,  1., -4.,  1.,
    -4.,  1.,  1., -4.,  6.,  1.,  1.,  1.,  1., -4.,
    -4.,  1.,  1.,  1.,  1.,  6.,  1., -4., -4.,  1.,
     1., -4.,  1.,  1.,  1.,  1.,  6.,  1., -4., -4.,
     1.,  1., -4.,  1.,  1., -4.,  1.,  6.,  1., -4.,
     1.,  1.,  1., -4.,  1., -4., -4.,  1.,  6.,  1.,
     1.,  1.,  1.,  1., -4.,  1., -4., -4.,  1.,  6.,
];

/// Groups of the randomized suites.
pub fn families() -> Vec<Family> {
    let mut out = Vec::new();
    out.extend((3..=6).map(Family::Dihedral));
    out.extend((3..=8).map(Family::Cyclic));
    out.extend((3..=5).map(Family::Symmetric));
    out
}

/// An equivariant system drawn from `seed`: a family, a node dimension,
/// `A = (1/|Γ|) Σ L(γ) A₀ L(γ)ᵀ` for uniform random `A₀`, and a
/// random set of input states.
pub struct RandomCase {
    pub family: Family,
    pub system: EquivariantSystem,
    pub irreps: Vec<IrrepInfo>,
    pub inputs: Vec<usize>,
}

pub fn random_case(seed: u64) -> RandomCase {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fams = families();
    let family = fams[rng.random_range(0..fams.len())];
    let group: PermutationGroup = family.group().unwrap();
    let nodes = group.degree();
    // keep n ≤ 12 so the Krylov test stays well conditioned
    let d = if nodes <= 6 { rng.random_range(1..=2) } else { 1 };
    let n = nodes * d;
    let a0 = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let gens = group.generators().to_vec();
    let lifts: Vec<_> = group
        .elements()
        .iter()
        .map(|e| symnet::network::lift(&e.perm, d))
        .collect();
    let a = lifts
        .iter()
        .fold(DMatrix::zeros(n, n), |acc, l| acc + l * &a0 * l.transpose())
        / lifts.len() as f64;
    let system = EquivariantSystem::new(a, d, group.clone(), &gens, true, &tol).unwrap();
    let irreps = family.irreps(&group, &tol).unwrap();
    let k = rng.random_range(1..=5.min(n));
    let mut inputs: Vec<usize> = Vec::new();
    while inputs.len() < k {
        let i = rng.random_range(0..n);
        if !inputs.contains(&i) {
            inputs.push(i);
        }
    }
    RandomCase {
        family,
        system,
        irreps,
        inputs,
    }
}

/// Checks every structural property on one random case; `Err` names the
/// first violation.
pub fn check_properties(case: &RandomCase) -> Result<(), String> {
    let tol = Tolerance::default();
    let a = &case.system.a;
    let n = a.nrows();
    let fail = |what: &str, v: f64| Err(format!("{:?}: {what} = {v:.3e}", case.family));
    let dec = isotypic::decompose(&case.system, &case.irreps, &tol).map_err(|e| e.to_string())?;
    let id = DMatrix::<f64>::identity(n, n);

    let sum = dec
        .components
        .iter()
        .fold(DMatrix::zeros(n, n), |acc, c| acc + &c.projection);
    let r = max_abs(&(sum - &id));
    if r > 1e-9 {
        return fail("|ΣP − I|", r);
    }
    for (i, ci) in dec.components.iter().enumerate() {
        let p = &ci.projection;
        let r = max_abs(&(p * p - p));
        if r > 1e-9 {
            return fail("|P² − P|", r);
        }
        let r = max_abs(&(a * p - p * a));
        if r > 1e-9 {
            return fail("|AP − PA|", r);
        }
        for cj in dec.components.iter().skip(i + 1) {
            let r = max_abs(&(p * &cj.projection));
            if r > 1e-9 {
                return fail("|P_i P_j|", r);
            }
        }
    }
    let t = &dec.transform;
    let r = max_abs(&(t.transpose() * t - &id));
    if r > 1e-9 {
        return fail("|TᵀT − I|", r);
    }
    let bd = isotypic::block_diagonalize(a, &dec, &tol).map_err(|e| e.to_string())?;
    if bd.off_block_residual > 1e-9 {
        return fail("off-block residual", bd.off_block_residual);
    }

    let b = control::unit_columns(n, &case.inputs).unwrap();
    let verdicts: Vec<bool> = RankMethod::ALL
        .iter()
        .map(|&meth| control::is_controllable(a, &b, meth, &tol).unwrap().full())
        .collect();
    if verdicts.iter().any(|&v| v != verdicts[0]) {
        return Err(format!(
            "{:?}: methods disagree {verdicts:?} on inputs {:?}",
            case.family, case.inputs
        ));
    }
    if verdicts[0] {
        for (lambda, _) in control::eigen_clusters(a) {
            let g = control::geometric_multiplicity(a, lambda, &tol);
            if g > case.inputs.len() {
                return Err(format!(
                    "{:?}: controllable with {} inputs but eigenvalue {lambda} has geometric multiplicity {g}",
                    case.family,
                    case.inputs.len()
                ));
            }
        }
        let ng = control::n_gamma(&dec).value;
        if case.inputs.len() < ng {
            return Err(format!(
                "{:?}: controllable with {} < N_Γ = {ng} inputs",
                case.family,
                case.inputs.len()
            ));
        }
    }
    let c = b.transpose();
    // Krylov spaces do not change under scaling; this keeps powers bounded
    let rho = symnet::linalg::eigenvalues(a).iter().map(|e| e.norm()).fold(0.0, f64::max);
    let obs = control::observability_matrix(&(a / rho.max(f64::MIN_POSITIVE)), &c);
    let by_matrix = tol.rank(&obs) == n;
    let by_dual = control::is_controllable(&a.transpose(), &b, RankMethod::Subspace, &tol)
        .unwrap()
        .full();
    if by_matrix != by_dual {
        return Err(format!("{:?}: duality violated", case.family));
    }
    Ok(())
}
