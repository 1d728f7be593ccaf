//! Heat kernel `k(t) = ∫ e^{−t(1−λ)} dμ(λ)` of a probability-normalized
//! spectral measure, the return-probability inequalities relating `k` to the
//! moments, and band-edge window diagnostics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::schrodinger::sampler::least_squares_slope;
use crate::schrodinger::SpectralEstimate;

/// Tolerance on `Σ weights = 1` and on the support lying in `[−1, 1]`.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Absolute slack granted to every inequality check.
pub const INEQUALITY_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeatKernelSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// The top of the spectrum is taken to be 1 after normalization; this is
    /// assumed, not checked against the infinite-volume operator.
    pub sigma_one_assumed: bool,
}

impl HeatKernelSeries {
    pub fn at(&self, t: f64) -> Option<f64> {
        self.times.iter().position(|&s| s == t).map(|i| self.values[i])
    }

    /// Nonincreasing in `t`, given ascending times.
    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + INEQUALITY_SLACK)
    }

    /// `k(t₁)² ≤ k(t₀) k(t₂)` on every equally spaced triple of the grid.
    pub fn is_log_convex(&self) -> bool {
        (0..self.times.len().saturating_sub(2)).all(|i| {
            let (t0, t1, t2) = (self.times[i], self.times[i + 1], self.times[i + 2]);
            if ((t1 - t0) - (t2 - t1)).abs() > 1e-12 * t2.abs().max(1.0) {
                return true;
            }
            let (k0, k1, k2) = (self.values[i], self.values[i + 1], self.values[i + 2]);
            k1 * k1 <= k0 * k2 * (1.0 + 1e-12) + INEQUALITY_SLACK
        })
    }
}

fn eigenpairs(est: &SpectralEstimate) -> Result<(&[f64], &[f64])> {
    let SpectralEstimate::Eigen { values, weights } = est else {
        return Err(Error::Unsupported("heat kernel needs an eigenpair estimate".into()));
    };
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Normalization(format!("total mass {total} is not 1")));
    }
    if weights.iter().any(|w| *w < -NORMALIZATION_TOL) {
        return Err(Error::Normalization("negative weight".into()));
    }
    if values.iter().any(|l| l.abs() > 1.0 + NORMALIZATION_TOL) {
        return Err(Error::Normalization("support leaves [-1, 1]".into()));
    }
    Ok((values, weights))
}

/// Divides weights by their total and the spectral variable by `scale`.
pub fn normalize(est: &SpectralEstimate, scale: f64) -> Result<SpectralEstimate> {
    let SpectralEstimate::Eigen { values, weights } = est.scaled(scale) else {
        return Err(Error::Unsupported("normalization needs an eigenpair estimate".into()));
    };
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::Normalization("zero total mass".into()));
    }
    Ok(SpectralEstimate::Eigen { values, weights: weights.iter().map(|w| w / total).collect() })
}

fn kernel(values: &[f64], weights: &[f64], t: f64) -> f64 {
    values.iter().zip(weights).map(|(l, w)| w * (-t * (1.0 - l)).exp()).sum()
}

pub fn heat_kernel_from_measure(est: &SpectralEstimate, times: &[f64]) -> Result<HeatKernelSeries> {
    let (values, weights) = eigenpairs(est)?;
    Ok(HeatKernelSeries {
        times: times.to_vec(),
        values: times.iter().map(|&t| kernel(values, weights, t)).collect(),
        sigma_one_assumed: true,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PittetRow {
    pub n: usize,
    pub m_2n_plus_2: f64,
    pub two_k_2n: f64,
    pub k_4n: f64,
    pub exp_plus_m_2n: f64,
    pub upper_ok: bool,
    pub lower_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PittetReport {
    pub rows: Vec<PittetRow>,
    pub violations: usize,
    pub pass: bool,
}

/// Checks `m_{2n+2} ≤ 2k(2n)` and `k(4n) ≤ e^{−2n} + m_{2n}` for
/// `n = 0..=n_max`. `moments` must reach index `2 n_max + 2` and `hk` must
/// contain the integer times `2n` and `4n`.
pub fn pittet_inequality_check(moments: &[f64], hk: &HeatKernelSeries, n_max: usize) -> Result<PittetReport> {
    if moments.len() < 2 * n_max + 3 {
        return Err(Error::Unsupported(format!("need {} moments, got {}", 2 * n_max + 3, moments.len())));
    }
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let k = |t: usize| hk.at(t as f64).ok_or_else(|| Error::Unsupported(format!("k({t}) missing from the grid")));
        let (k2, k4) = (k(2 * n)?, k(4 * n)?);
        let m_2n_plus_2 = moments[2 * n + 2];
        let exp_plus_m_2n = (-2.0 * n as f64).exp() + moments[2 * n];
        rows.push(PittetRow {
            n,
            m_2n_plus_2,
            two_k_2n: 2.0 * k2,
            k_4n: k4,
            exp_plus_m_2n,
            upper_ok: m_2n_plus_2 <= 2.0 * k2 + INEQUALITY_SLACK,
            lower_ok: k4 <= exp_plus_m_2n + INEQUALITY_SLACK,
        });
    }
    let violations = rows.iter().map(|r| usize::from(!r.upper_ok) + usize::from(!r.lower_ok)).sum();
    Ok(PittetReport { rows, violations, pass: violations == 0 })
}

/// Integer grid `0..=4 n_max` needed by [`pittet_inequality_check`].
pub fn pittet_time_grid(n_max: usize) -> Vec<f64> {
    (0..=4 * n_max).map(|t| t as f64).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichRow {
    pub epsilon: f64,
    pub window_mass: f64,
    pub t: f64,
    pub k: f64,
    pub bound_lo: f64,
    pub bound_hi: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub rows: Vec<SandwichRow>,
    pub violations: usize,
    pub pass: bool,
}

impl SandwichReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,window_mass,t,k,bound_lo,bound_hi\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{},{}\n", r.epsilon, r.window_mass, r.t, r.k, r.bound_lo, r.bound_hi));
        }
        out
    }
}

/// All pairs `(ε, t)` of the two grids.
pub fn product_grid(epsilons: &[f64], times: &[f64]) -> Vec<(f64, f64)> {
    epsilons.iter().flat_map(|&e| times.iter().map(move |&t| (e, t))).collect()
}

/// Pairs `(ε, c/ε)`.
pub fn reciprocal_grid(epsilons: &[f64], constants: &[f64]) -> Vec<(f64, f64)> {
    epsilons.iter().flat_map(|&e| constants.iter().map(move |&c| (e, c / e))).collect()
}

/// Checks `e^{−εt} μ(I_ε) ≤ k(t) ≤ e^{−εt} + μ(I_ε)` with `I_ε = [1−ε, 1]`.
pub fn sandwich_check(est: &SpectralEstimate, pairs: &[(f64, f64)]) -> Result<SandwichReport> {
    let (values, weights) = eigenpairs(est)?;
    let rows: Vec<SandwichRow> = pairs
        .iter()
        .map(|&(epsilon, t)| {
            let window_mass = est.window_mass(1.0 - epsilon, f64::INFINITY).expect("eigenpairs");
            let k = kernel(values, weights, t);
            let decay = (-epsilon * t).exp();
            let (bound_lo, bound_hi) = (decay * window_mass, decay + window_mass);
            let ok = bound_lo <= k + INEQUALITY_SLACK && k <= bound_hi + INEQUALITY_SLACK;
            SandwichRow { epsilon, window_mass, t, k, bound_lo, bound_hi, ok }
        })
        .collect();
    let violations = rows.iter().filter(|r| !r.ok).count();
    Ok(SandwichReport { rows, violations, pass: violations == 0 })
}

#[derive(Clone, Debug, Serialize)]
pub struct TailSlope {
    /// Slope of `ln(−ln μ(I_ε))` against `ln ε`.
    pub slope: Option<f64>,
    pub standard_error: Option<f64>,
    /// `slope ± 1.96·se`.
    pub band: Option<(f64, f64)>,
    pub used: Vec<f64>,
    /// ε values with `μ(I_ε) ∈ {0, 1}`.
    pub skipped: Vec<f64>,
}

/// Least-squares diagnostic of the band-edge shape. Not a test of any limit.
pub fn tail_slope_diagnostic(est: &SpectralEstimate, epsilons: &[f64]) -> Result<TailSlope> {
    eigenpairs(est)?;
    let mut points = Vec::new();
    let (mut used, mut skipped) = (Vec::new(), Vec::new());
    for &e in epsilons {
        let mu = est.window_mass(1.0 - e, f64::INFINITY).expect("eigenpairs");
        if mu <= 0.0 || mu >= 1.0 - 1e-15 || e <= 0.0 {
            skipped.push(e);
        } else {
            points.push((e.ln(), (-mu.ln()).ln()));
            used.push(e);
        }
    }
    if points.len() < 2 {
        return Ok(TailSlope { slope: None, standard_error: None, band: None, used, skipped });
    }
    let (slope, se) = least_squares_slope(&points);
    let se = se.is_finite().then_some(se);
    Ok(TailSlope {
        slope: Some(slope),
        standard_error: se,
        band: se.map(|s| (slope - 1.96 * s, slope + 1.96 * s)),
        used,
        skipped,
    })
}

/// `exp(−n^{d/(d+2)} ln^α n)` with `α = 2/(d+2)` for infinite lamp groups and
/// `0` for finite ones. Overlay only.
pub fn erschler_overlay(d: u32, infinite_lamps: bool, ns: &[u64]) -> Vec<f64> {
    let d = d as f64;
    let alpha = if infinite_lamps { 2.0 / (d + 2.0) } else { 0.0 };
    ns.iter()
        .map(|&n| {
            let n = n.max(2) as f64;
            (-(n.powf(d / (d + 2.0)) * n.ln().powf(alpha))).exp()
        })
        .collect()
}
