//! End-to-end acceptance checks, one line per criterion.
//!
//! Run with `cargo test -p symnet-core --test acceptance`; exits non-zero
//! if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use symnet::control::{self, DesignOptions, RankMethod, DEFAULT_ENUMERATION_CAP};
use symnet::isotypic::{block_diagonalize, verify_block_isomorphy};
use symnet::linalg::{char_poly, max_abs, poly_discrepancy};
use symnet::representations::{complex_dimension_square_sum, RepType};
use symnet::Tolerance;

/// Number of controllable 5-input configurations of the Petersen graph
/// (`b = 0`, `c = 1`), recorded after the first verified run.
const PETERSEN_FIVE_INPUT_CONTROLLABLE: usize = 162;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let tol = Tolerance::default();
    let l = load("d4_ring.json");
    let t = symnet::io::load_matrix(&data("d4_reference_T.json")).map_err(|e| e.to_string())?;
    let dec = l.dec.with_transform(t, &tol).map_err(|e| e.to_string())?;
    let bd = block_diagonalize(&l.system.a, &dec, &tol).map_err(|e| e.to_string())?;
    let expected = d4_golden_blocks();
    ensure(bd.blocks.len() == 4, format!("{} blocks", bd.blocks.len()))?;
    let worst = bd
        .blocks
        .iter()
        .zip(&expected)
        .map(|(b, e)| max_abs(&(&b.matrix - e)))
        .fold(0.0, f64::max);
    ensure(worst < 1e-9, format!("block deviation {worst:.3e}"))?;
    ensure(
        bd.off_block_residual < 1e-9,
        format!("off-block {:.3e}", bd.off_block_residual),
    )?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!(
        "block deviation {worst:.1e}, off-block {:.1e}, {elapsed:.2?}",
        bd.off_block_residual
    ))
}

fn criterion_2() -> Outcome {
    let tol = Tolerance::default();
    let l = load("d4_ring.json");
    ensure(
        l.dec.block_structure() == vec![2, 2, 2, 2],
        format!("block structure {:?}", l.dec.block_structure()),
    )?;
    let bd = block_diagonalize(&l.system.a, &l.dec, &tol).map_err(|e| e.to_string())?;
    let mut remaining: Vec<Vec<f64>> = d4_golden_blocks().iter().map(char_poly).collect();
    let mut worst = 0.0f64;
    for b in &bd.blocks {
        let p = char_poly(&b.matrix);
        let (k, d) = remaining
            .iter()
            .enumerate()
            .map(|(k, q)| (k, poly_discrepancy(&p, q)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .ok_or("more blocks than expected")?;
        ensure(d < 1e-6, format!("block {}{} has no matching polynomial ({d:.2e})", b.label, b.mu))?;
        worst = worst.max(d);
        remaining.remove(k);
    }
    let iso = verify_block_isomorphy(&bd);
    let e = iso
        .iter()
        .find(|e| e.block_count == 2)
        .ok_or("no repeated block")?;
    ensure(
        e.entry_discrepancy < 1e-9,
        format!("{} blocks differ by {:.3e}", e.label, e.entry_discrepancy),
    )?;
    Ok(format!(
        "structure (2,2,2,2), char-poly discrepancy {worst:.1e}, {} blocks equal to {:.1e}",
        e.label, e.entry_discrepancy
    ))
}

fn criterion_3() -> Outcome {
    let tol = Tolerance::default();
    let l = load("petersen.json");
    let ones = DMatrix::from_element(10, 10, 0.1);
    let p2 = DMatrix::from_row_slice(10, 10, &PETERSEN_P2_TIMES_6) / 6.0;
    let p3 = DMatrix::from_row_slice(10, 10, &PETERSEN_P3_TIMES_15) / 15.0;
    let mut worst = 0.0f64;
    for (c, expected) in l.dec.components.iter().zip([&ones, &p2, &p3]) {
        let d = max_abs(&(&c.projection - expected));
        ensure(d < 1e-9, format!("{} differs by {d:.3e}", c.label))?;
        worst = worst.max(d);
    }
    let a = &l.system.a;
    for (lambda, g) in [(3.0, 1), (1.0, 5), (-2.0, 4)] {
        let got = control::geometric_multiplicity(a, Complex64::new(lambda, 0.0), &tol);
        ensure(got == g, format!("λ = {lambda}: multiplicity {got}, expected {g}"))?;
    }
    Ok(format!("P1..P3 within {worst:.1e}; multiplicities 3→1, 1→5, −2→4"))
}

fn criterion_4() -> Outcome {
    let mut parts = Vec::new();
    for (file, expected) in [("d4_ring.json", 2), ("z4_ring.json", 1), ("petersen.json", 5)] {
        let l = load(file);
        let got = control::n_gamma(&l.dec).value;
        ensure(got == expected, format!("{file}: N_Γ = {got}, expected {expected}"))?;
        parts.push(format!("{file} {got}"));
    }
    Ok(parts.join(", "))
}

fn all_methods(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<bool> {
    let tol = Tolerance::default();
    RankMethod::ALL
        .iter()
        .map(|&m| control::is_controllable(a, b, m, &tol).unwrap().full())
        .collect()
}

fn criterion_5() -> Outcome {
    let tol = Tolerance::default();
    let d4 = load("d4_ring.json");
    let design = control::design_input_matrix(&d4.system.a, &d4.dec, DesignOptions::default(), &tol)
        .map_err(|e| e.to_string())?;
    ensure(
        design.selected_one_based() == vec![3, 1],
        format!("D4 selected {:?}", design.selected_one_based()),
    )?;
    ensure(
        all_methods(&d4.system.a, &design.b) == vec![true; 3],
        "D4 design not controllable by all methods",
    )?;

    let pet = load("petersen.json");
    let design = control::design_input_matrix(&pet.system.a, &pet.dec, DesignOptions::default(), &tol)
        .map_err(|e| e.to_string())?;
    let mut sel = design.selected_one_based();
    sel.sort();
    ensure(sel == vec![1, 2, 3, 6, 9], format!("Petersen selected {sel:?}"))?;
    ensure(
        all_methods(&pet.system.a, &design.b) == vec![true; 3],
        "Petersen design not controllable by all methods",
    )?;

    let z4 = load("z4_ring.json");
    let e1 = control::unit_columns(8, &[0]).unwrap();
    ensure(
        all_methods(&z4.system.a, &e1) == vec![true; 3],
        "Z4 not controllable from e1",
    )?;
    Ok("D4 [3, 1], Petersen {1,2,3,6,9}, Z4 e1; kalman/subspace/pbh agree".into())
}

fn criterion_6() -> Outcome {
    let tol = Tolerance::default();
    let d4 = load("d4_ring.json");
    for i in 0..8 {
        let b = control::unit_columns(8, &[i]).unwrap();
        ensure(
            all_methods(&d4.system.a, &b) == vec![false; 3],
            format!("D4 controllable from e{}", i + 1),
        )?;
    }
    let pet = load("petersen.json");
    let start = Instant::now();
    let four = control::enumerate_input_configs(&pet.system.a, 4, DEFAULT_ENUMERATION_CAP, &tol)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(four.len() == 210, format!("{} subsets", four.len()))?;
    let bad = four.iter().filter(|c| c.controllable).count();
    ensure(bad == 0, format!("{bad} four-input subsets controllable"))?;
    ensure(elapsed < Duration::from_secs(10), format!("enumeration took {elapsed:?}"))?;

    let five = control::enumerate_input_configs(&pet.system.a, 5, DEFAULT_ENUMERATION_CAP, &tol)
        .map_err(|e| e.to_string())?;
    let count = five.iter().filter(|c| c.controllable).count();
    ensure(
        count == PETERSEN_FIVE_INPUT_CONTROLLABLE,
        format!("five-input controllable count {count}, recorded {PETERSEN_FIVE_INPUT_CONTROLLABLE}"),
    )?;
    Ok(format!(
        "8 single inputs fail; 0/210 four-input subsets in {elapsed:.2?}; {count}/252 five-input subsets controllable"
    ))
}

fn criterion_7() -> Outcome {
    let mut per_family = std::collections::BTreeMap::new();
    for seed in 0..100u64 {
        let case = random_case(seed);
        check_properties(&case).map_err(|e| format!("seed {seed}: {e}"))?;
        *per_family.entry(format!("{:?}", case.family)).or_insert(0) += 1;
    }
    Ok(format!("100 seeds over {} groups", per_family.len()))
}

fn criterion_8() -> Outcome {
    let tol = Tolerance::default();
    let mut checked = 0;
    for family in families() {
        let group = family.group().map_err(|e| e.to_string())?;
        let irreps = family.irreps(&group, &tol).map_err(|e| e.to_string())?;
        for (i, a) in irreps.iter().enumerate() {
            let defect = a.rep.homomorphism_defect(&group);
            ensure(defect < 1e-9, format!("{family:?} {}: defect {defect:.2e}", a.label()))?;
            for (j, b) in irreps.iter().enumerate() {
                let inner = a.character.inner(&b.character);
                let expected = if i == j { a.commutant_dim as f64 } else { 0.0 };
                ensure(
                    (inner - expected).abs() < 1e-9,
                    format!("{family:?} <χ_{}, χ_{}> = {inner}", a.label(), b.label()),
                )?;
            }
            match family {
                symnet::representations::Family::Dihedral(_) if a.dim() == 2 => {
                    ensure(a.kind == RepType::Real, format!("{family:?} {} not real", a.label()))?
                }
                symnet::representations::Family::Cyclic(_) if a.dim() == 2 => ensure(
                    a.kind == RepType::Complex,
                    format!("{family:?} {} not complex", a.label()),
                )?,
                _ => {}
            }
            checked += 1;
        }
        ensure(
            complex_dimension_square_sum(&irreps) == group.order(),
            format!("{family:?}: dimension squares do not sum to |Γ|"),
        )?;
    }
    let s5 = symnet::representations::Family::Symmetric(5);
    let g = s5.group().unwrap();
    let irreps = s5.irreps(&g, &tol).unwrap();
    let sum: usize = irreps.iter().map(|i| i.dim() * i.dim()).sum();
    ensure(sum == 120, format!("S5 dimension squares sum to {sum}"))?;
    Ok(format!("{checked} irreps; S5 Σdim² = 120; D_k 2-dim real, Z_k 2-dim complex"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("D4 golden decomposition", criterion_1),
        ("D4 self-built decomposition", criterion_2),
        ("Petersen projections and multiplicities", criterion_3),
        ("N_Γ bounds", criterion_4),
        ("input design", criterion_5),
        ("rank lower bounds", criterion_6),
        ("randomized properties", criterion_7),
        ("built-in irreps", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
