//! One function per subcommand. Each returns a serializable report and a
//! pass flag; nothing here touches the filesystem.

use anyhow::{bail, Result};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use wreath_core::finite::{finite_spectral_measure, verify_unitary_equivalence};
use wreath_core::green::{
    parseval_check_finite, parseval_truncated_z, rank_one_suite, wegner_probe, FunctionSpec, ParsevalTruncatedParams,
    WegnerParams,
};
use wreath_core::lifshitz::{
    erschler_overlay, heat_kernel_from_measure, normalize, pittet_inequality_check, pittet_time_grid, product_grid,
    sandwich_check, tail_slope_diagnostic,
};
use wreath_core::schrodinger::{dos_estimate, sampler_moment_check, DosMode, PotentialSampler, SpectralEstimate};
use wreath_core::{
    annealed_moments, lamp_moment_table, plancherel_moments, word_enumeration_oracle, wreath_measure, Error, GroupSpec,
    Weight,
};

use crate::config::ExperimentConfig;

pub struct Outcome {
    pub report: Value,
    pub csv: Option<String>,
    pub pass: bool,
}

fn outcome(report: impl Serialize, pass: bool) -> Result<Outcome> {
    Ok(Outcome { report: serde_json::to_value(report)?, csv: None, pass })
}

fn strings(values: &[Weight]) -> Vec<String> {
    values.iter().map(Weight::to_string).collect()
}

fn wreath_name(cfg: &ExperimentConfig) -> String {
    format!("({}) wr ({})", cfg.lamp_group, cfg.base_group)
}

pub fn moments(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let (gamma, lambda) = (cfg.gamma()?, cfg.lambda()?);
    let exact = plancherel_moments(&wreath_measure(&gamma, &lambda)?, p.order, p.state_cap)?;
    let table = lamp_moment_table(&lambda, p.order)?;
    let annealed = annealed_moments(&gamma, &table, p.order, p.state_cap)?;
    let oracle = if p.oracle && p.order <= p.enumeration_guard {
        Some(
            (0..=p.order)
                .map(|n| word_enumeration_oracle(&gamma, &table, n, Some(p.enumeration_guard)))
                .collect::<wreath_core::Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let agree = exact.values == annealed.values && oracle.as_ref().is_none_or(|o| *o == exact.values);
    outcome(
        json!({
            "wreath": wreath_name(cfg),
            "order": p.order,
            "values": strings(&exact.values),
            "annealed": strings(&annealed.values),
            "oracle": oracle.as_deref().map(strings),
            "total_abs_mass": exact.total_abs_mass,
            "agree": agree,
        }),
        agree,
    )
}

pub fn dos(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let (gamma, lambda) = (cfg.gamma()?, cfg.lambda()?);
    let mode = DosMode { order: p.order, eigen: p.eigen, dense_cap: p.dense_cap };
    let report = dos_estimate(&gamma, &lambda, p.radius, p.realizations, p.seed, mode)?;
    let exact = match plancherel_moments(&wreath_measure(&gamma, &lambda)?, p.order, p.state_cap) {
        Ok(m) => Some(m.values),
        Err(Error::CapExceeded { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let z_scores: Option<Vec<f64>> = exact.as_ref().map(|ex| {
        ex.iter()
            .zip(report.moments.iter().zip(&report.standard_errors))
            .map(|(x, (m, se))| {
                let gap = (m - x.re()).abs();
                if gap <= 1e-9 * x.abs().max(1.0) {
                    0.0
                } else {
                    gap / se
                }
            })
            .collect()
    });
    let pass = z_scores.as_ref().is_none_or(|z| z.iter().all(|s| *s <= 4.0));
    outcome(
        json!({
            "wreath": wreath_name(cfg),
            "estimate": report,
            "exact": exact.as_deref().map(strings),
            "z_scores": z_scores,
            "within_4_se": pass,
        }),
        pass,
    )
}

pub fn verify_finite(cfg: &ExperimentConfig) -> Result<Outcome> {
    let r = verify_unitary_equivalence(&cfg.gamma()?, &cfg.lambda()?, cfg.params.basis_cap)?;
    let pass = r.pass;
    outcome(r, pass)
}

pub fn green(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let r = rank_one_suite(p.seed, p.instances, p.max_dim)?;
    let pass = r.pass;
    outcome(r, pass)
}

fn energy_grid(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    if let Some(e) = &cfg.params.energies {
        return Ok(e.clone());
    }
    let s = cfg.gamma()?.total_abs_mass() + cfg.lambda()?.total_abs_mass();
    Ok((0..21).map(|i| -s + 2.0 * s * i as f64 / 20.0).collect())
}

pub fn wegner(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let params = WegnerParams {
        radius: p.radius,
        energies: energy_grid(cfg)?,
        eta: p.eta,
        realizations: p.realizations,
        seed: p.seed,
        sampler_draws: p.sampler_draws,
    };
    let r = wegner_probe(&cfg.gamma()?, &cfg.lambda()?, &params)?;
    let pass = r.pass;
    outcome(r, pass)
}

fn z_values(cfg: &ExperimentConfig) -> Vec<Complex64> {
    cfg.params.z.iter().map(|z| Complex64::new(z[0], z[1])).collect()
}

pub fn parseval(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let (gamma, lambda) = (cfg.gamma()?, cfg.lambda()?);
    let target = cfg.base_group.parse_element(&p.target)?;
    if cfg.base_group.is_finite() && cfg.lamp_group.is_finite() {
        let reports = z_values(cfg)
            .into_iter()
            .map(|z| parseval_check_finite(&gamma, &lambda, &FunctionSpec::Resolvent { z }, &target, p.basis_cap))
            .collect::<wreath_core::Result<Vec<_>>>()?;
        let max_residual = reports.iter().map(|r| r.residual).fold(0.0, f64::max);
        let pass = max_residual <= 1e-10;
        return outcome(
            json!({ "mode": "finite", "checks": reports, "max_residual": max_residual, "pass": pass }),
            pass,
        );
    }
    if cfg.lamp_group != GroupSpec::Z {
        bail!("parseval needs finite base and lamp groups, or Z lamps; got {}", wreath_name(cfg));
    }
    let Some(&z) = z_values(cfg).first() else { bail!("params.z is empty") };
    let params = ParsevalTruncatedParams {
        z,
        radius: p.radius,
        wreath_radius: p.wreath_radius,
        state_cap: p.state_cap,
        cutoffs: p.cutoffs.clone(),
        realizations: p.realizations,
        seed: p.seed,
        target,
    };
    let r = parseval_truncated_z(&gamma, &lambda, &params)?;
    let pass = r.monotone && r.bounded;
    outcome(json!({ "mode": "truncated", "check": r, "pass": pass }), pass)
}

/// Polynomial growth degree of the base, when known.
fn growth_degree(g: &GroupSpec) -> Option<u32> {
    match g {
        GroupSpec::Z => Some(1),
        GroupSpec::Zd { d } => Some(*d as u32),
        GroupSpec::Heisenberg3 => Some(4),
        GroupSpec::CyclicZmod { .. } => Some(0),
        GroupSpec::FreeGroup { .. } => None,
    }
}

/// The averaged spectral measure at the identity: exact for finite groups,
/// Monte-Carlo eigen-measures otherwise.
fn lifshitz_measure(cfg: &ExperimentConfig) -> Result<(&'static str, SpectralEstimate)> {
    let p = &cfg.params;
    let (gamma, lambda) = (cfg.gamma()?, cfg.lambda()?);
    if cfg.base_group.is_finite() && cfg.lamp_group.is_finite() {
        return Ok(("finite", finite_spectral_measure(&gamma, &lambda, p.basis_cap)?));
    }
    let mode = DosMode { order: 0, eigen: true, dense_cap: p.dense_cap };
    let r = dos_estimate(&gamma, &lambda, p.radius, p.realizations, p.seed, mode)?;
    Ok(("monte_carlo", r.eigen.expect("eigen mode")))
}

pub fn lifshitz(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let (source, raw) = lifshitz_measure(cfg)?;
    let scale = cfg.gamma()?.total_abs_mass() + cfg.lambda()?.total_abs_mass();
    let est = normalize(&raw, scale)?;

    let mut times = pittet_time_grid(p.pittet_n);
    times.extend_from_slice(&p.times);
    times.sort_by(f64::total_cmp);
    times.dedup();
    let hk = heat_kernel_from_measure(&est, &times)?;
    let moments = est.moments(2 * p.pittet_n + 2).expect("eigenpairs");
    let pittet = pittet_inequality_check(&moments, &hk, p.pittet_n)?;
    let sandwich = sandwich_check(&est, &product_grid(&p.epsilons, &p.times))?;
    let slope = tail_slope_diagnostic(&est, &p.epsilons)?;
    let slope_finite = slope.slope.is_none_or(f64::is_finite);
    let overlay = growth_degree(&cfg.base_group).map(|d| {
        let ns: Vec<u64> = (1..=p.pittet_n as u64).collect();
        let infinite = !cfg.lamp_group.is_finite();
        json!({ "d": d, "infinite_lamps": infinite, "n": ns, "values": erschler_overlay(d, infinite, &ns) })
    });
    let pass = pittet.pass && sandwich.pass && slope_finite;
    let csv = sandwich.to_csv();
    let report = json!({
        "wreath": wreath_name(cfg),
        "source": source,
        "normalization": scale,
        "heat_kernel": hk,
        "monotone": hk.is_nonincreasing(),
        "log_convex": hk.is_log_convex(),
        "pittet": pittet,
        "sandwich": sandwich,
        "tail_slope": slope,
        "overlay": overlay,
        "pass": pass,
    });
    Ok(Outcome { report, csv: Some(csv), pass })
}

pub fn sampler(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = &cfg.params;
    let s = PotentialSampler::new(cfg.lambda()?)?;
    let r = sampler_moment_check(&s, p.seed, p.sampler_draws, p.sampler_order, 5.0)?;
    let pass = r.pass;
    outcome(r, pass)
}
