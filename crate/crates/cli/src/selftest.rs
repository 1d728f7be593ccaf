//! Small, fast versions of the invariant checks.

use anyhow::Result;
use num_complex::Complex64;
use serde::Serialize;
use wreath_core::finite::{finite_spectral_measure, verify_unitary_equivalence, DEFAULT_BASIS_CAP};
use wreath_core::green::{parseval_check_finite, rank_one_suite, FunctionSpec};
use wreath_core::lifshitz::{
    heat_kernel_from_measure, normalize, pittet_inequality_check, pittet_time_grid, product_grid, sandwich_check,
};
use wreath_core::schrodinger::{dos_estimate, sampler_moment_check, DosMode, PotentialSampler};
use wreath_core::walk::DEFAULT_STATE_CAP;
use wreath_core::{
    annealed_moments, lamp_moment_table, plancherel_moments, word_enumeration_oracle, word_length, wreath_measure,
    FiniteMeasure, Group, GroupElement, GroupSpec,
};

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn measure(g: GroupSpec, atoms: &[(&str, &str)]) -> Result<FiniteMeasure<GroupSpec>> {
    Ok(FiniteMeasure::from_literals(g, atoms.iter().copied())?)
}

fn walk_agreement() -> Result<Check> {
    let base = measure(GroupSpec::Z, &[("1", "1"), ("-1", "1")])?;
    let lamp = measure(GroupSpec::CyclicZmod { n: 2 }, &[("1", "1")])?;
    let exact = plancherel_moments(&wreath_measure(&base, &lamp)?, 8, DEFAULT_STATE_CAP)?;
    let table = lamp_moment_table(&lamp, 8)?;
    let annealed = annealed_moments(&base, &table, 8, DEFAULT_STATE_CAP)?;
    let oracle = word_enumeration_oracle(&base, &table, 8, None)?;
    let pass = exact.values == annealed.values && exact.values[8] == oracle;
    Ok(Check { name: "lamplighter moments: exact = annealed = enumeration", pass, detail: format!("m8 = {oracle}") })
}

fn heisenberg() -> Result<Check> {
    let h = GroupSpec::Heisenberg3;
    let prod = h.multiply(&GroupElement::Heis(1, 0, 0), &GroupElement::Heis(0, 1, 0))?;
    let len = word_length(&h, &GroupElement::Heis(0, 0, 1), &h.standard_generators(), 6)?;
    let pass = prod == GroupElement::Heis(1, 1, 1) && len == Some(4);
    Ok(Check { name: "Heisenberg product and word length", pass, detail: format!("{prod:?}, |z| = {len:?}") })
}

fn finite_equivalence() -> Result<Check> {
    let z2 = measure(GroupSpec::CyclicZmod { n: 2 }, &[("1", "1")])?;
    let r = verify_unitary_equivalence(&z2, &z2, DEFAULT_BASIS_CAP)?;
    Ok(Check {
        name: "Z/2 wr Z/2 unitary equivalence",
        pass: r.pass,
        detail: format!("conjugation residual {:e}", r.conjugation_residual),
    })
}

fn rank_one(seed: u64) -> Result<Check> {
    let r = rank_one_suite(seed, 20, 20)?;
    Ok(Check { name: "rank-one resolvent formula", pass: r.pass, detail: format!("max residual {:e}", r.max_residual) })
}

fn parseval() -> Result<Check> {
    let base = measure(GroupSpec::CyclicZmod { n: 3 }, &[("1", "1"), ("2", "1")])?;
    let lamp = measure(GroupSpec::CyclicZmod { n: 2 }, &[("1", "1")])?;
    let f = FunctionSpec::Resolvent { z: Complex64::new(0.4, 0.3) };
    let r = parseval_check_finite(&base, &lamp, &f, &GroupElement::Residue(1), DEFAULT_BASIS_CAP)?;
    Ok(Check {
        name: "finite Parseval identity",
        pass: r.residual <= 1e-10,
        detail: format!("residual {:e}", r.residual),
    })
}

fn heat_kernel() -> Result<Check> {
    let z2 = measure(GroupSpec::CyclicZmod { n: 2 }, &[("1", "1")])?;
    let est = normalize(&finite_spectral_measure(&z2, &z2, DEFAULT_BASIS_CAP)?, 2.0)?;
    let hk = heat_kernel_from_measure(&est, &pittet_time_grid(20))?;
    let pittet = pittet_inequality_check(&est.moments(42).expect("eigenpairs"), &hk, 20)?;
    let sandwich = sandwich_check(&est, &product_grid(&[0.1, 0.2, 0.3, 0.4, 0.5], &[1.0, 2.0, 5.0, 10.0, 20.0]))?;
    Ok(Check {
        name: "heat kernel inequalities",
        pass: pittet.pass && sandwich.pass,
        detail: format!("{} + {} violations", pittet.violations, sandwich.violations),
    })
}

fn sampler(seed: u64) -> Result<Check> {
    let lamp = measure(GroupSpec::Z, &[("1", "1/2"), ("-1", "1/2")])?;
    let r = sampler_moment_check(&PotentialSampler::new(lamp)?, seed, 100_000, 6, 5.0)?;
    Ok(Check { name: "sampler law moments", pass: r.pass, detail: format!("max z {:.2}", r.max_z) })
}

fn dos(seed: u64) -> Result<Check> {
    let base = measure(GroupSpec::Z, &[("1", "1"), ("-1", "1")])?;
    let lamp = measure(GroupSpec::CyclicZmod { n: 2 }, &[("1", "1")])?;
    let exact = plancherel_moments(&wreath_measure(&base, &lamp)?, 6, DEFAULT_STATE_CAP)?;
    let r = dos_estimate(&base, &lamp, 8, 200, seed, DosMode { order: 6, eigen: false, dense_cap: 4096 })?;
    let worst = (0..=6)
        .map(|n| {
            let gap = (r.moments[n] - exact.values[n].re()).abs();
            if gap < 1e-9 {
                0.0
            } else {
                gap / r.standard_errors[n]
            }
        })
        .fold(0.0, f64::max);
    Ok(Check { name: "Monte-Carlo DOS moments", pass: worst <= 4.0, detail: format!("max z {worst:.2}") })
}

pub fn run(seed: u64) -> Result<SelftestReport> {
    let checks = vec![
        walk_agreement()?,
        heisenberg()?,
        finite_equivalence()?,
        rank_one(seed)?,
        parseval()?,
        heat_kernel()?,
        sampler(seed)?,
        dos(seed)?,
    ];
    let pass = checks.iter().all(|c| c.pass);
    Ok(SelftestReport { seed, checks, pass })
}
