use rayon::prelude::*;
use serde::Serialize;

use super::ball::{build_ball, DEFAULT_BALL_CAP};
use super::operator::{assemble, TruncatedOperator};
use super::sampler::{sample_potential, PotentialSampler};
use super::spectral::{spectral_measure, SpectralEstimate, SpectralMode};
use crate::error::Result;
use crate::group::GroupSpec;
use crate::measure::FiniteMeasure;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DosMode {
    /// Highest moment reported.
    pub order: usize,
    /// Also average the exact eigen-measures at `e_Γ` (needs a dense eig per
    /// realization).
    pub eigen: bool,
    pub dense_cap: usize,
}

/// A fixed hopping operator on a ball plus a potential sampler; realization
/// `r` is a pure function of `(seed, r)`.
#[derive(Clone, Debug)]
pub struct DosEstimator {
    template: TruncatedOperator<GroupSpec>,
    sampler: PotentialSampler,
}

impl DosEstimator {
    pub fn new(m_base: &FiniteMeasure<GroupSpec>, m_lamp: &FiniteMeasure<GroupSpec>, radius: usize) -> Result<Self> {
        let ball = build_ball(m_base, radius, DEFAULT_BALL_CAP)?;
        let n = ball.len();
        let template = assemble(m_base, &ball, vec![0.0; n])?;
        let sampler = PotentialSampler::new(m_lamp.clone())?;
        Ok(DosEstimator { template, sampler })
    }

    pub fn sampler(&self) -> &PotentialSampler {
        &self.sampler
    }

    pub fn ball_size(&self) -> usize {
        self.template.dim()
    }

    pub fn operator(&self, seed: u64, realization: u64) -> TruncatedOperator<GroupSpec> {
        let v = sample_potential(&self.sampler, &self.template.ball, seed, realization);
        self.template.with_potential(v).expect("potential sized to the ball")
    }

    /// `⟨δ_e, H(ω_r)ⁿ δ_e⟩` for `n = 0..=order`.
    pub fn realization_moments(&self, seed: u64, realization: u64, order: usize) -> Vec<f64> {
        self.operator(seed, realization).diagonal_moments(0, order)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DosReport {
    pub radius: usize,
    pub ball_size: usize,
    pub realizations: usize,
    pub seed: u64,
    pub moments: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// Averaged eigen-measure at `e_Γ` (weights sum to one).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigen: Option<SpectralEstimate>,
}

/// Monte-Carlo average of the spectral measure of `H(ω)` at `e_Γ` on the
/// ball of radius `radius`. Realizations run in parallel; the reduction is
/// in realization order, so output is independent of the thread count.
pub fn dos_estimate(
    m_base: &FiniteMeasure<GroupSpec>,
    m_lamp: &FiniteMeasure<GroupSpec>,
    radius: usize,
    realizations: usize,
    seed: u64,
    mode: DosMode,
) -> Result<DosReport> {
    let est = DosEstimator::new(m_base, m_lamp, radius)?;
    let per: Vec<(Vec<f64>, Option<SpectralEstimate>)> = (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let op = est.operator(seed, r);
            let moments = op.diagonal_moments(0, mode.order);
            let eigen = if mode.eigen {
                Some(spectral_measure(&op, 0, SpectralMode::Exact { cap: mode.dense_cap })?)
            } else {
                None
            };
            Ok((moments, eigen))
        })
        .collect::<Result<_>>()?;

    let k = realizations.max(1) as f64;
    let mut moments = vec![0.0; mode.order + 1];
    for (m, _) in &per {
        for (acc, x) in moments.iter_mut().zip(m) {
            *acc += x;
        }
    }
    moments.iter_mut().for_each(|x| *x /= k);
    let mut var = vec![0.0; mode.order + 1];
    for (m, _) in &per {
        for ((acc, x), mean) in var.iter_mut().zip(m).zip(&moments) {
            *acc += (x - mean).powi(2);
        }
    }
    let standard_errors = var.iter().map(|v| if realizations > 1 { (v / (k - 1.0) / k).sqrt() } else { 0.0 }).collect();

    let eigen = mode.eigen.then(|| {
        let mut values = Vec::new();
        let mut weights = Vec::new();
        for (_, e) in &per {
            if let Some(SpectralEstimate::Eigen { values: v, weights: w }) = e {
                values.extend_from_slice(v);
                weights.extend(w.iter().map(|x| x / k));
            }
        }
        SpectralEstimate::Eigen { values, weights }
    });

    Ok(DosReport { radius, ball_size: est.ball_size(), realizations, seed, moments, standard_errors, eigen })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::uniform_on_generators;
    use crate::weight::Weight;

    fn mode(order: usize) -> DosMode {
        DosMode { order, eigen: false, dense_cap: 4096 }
    }

    #[test]
    fn zero_lamp_measure_is_free_walk() {
        let mg = uniform_on_generators(GroupSpec::Z, Weight::one());
        // mΛ = 0: v ≡ 0
        let ml = FiniteMeasure::zero(GroupSpec::Z);
        let r = dos_estimate(&mg, &ml, 4, 3, 1, mode(4)).unwrap();
        assert_eq!(r.moments, vec![1.0, 0.0, 2.0, 0.0, 6.0]);
        assert!(r.standard_errors.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn single_realization_is_reproducible() {
        let mg = uniform_on_generators(GroupSpec::Z, Weight::one());
        let ml = FiniteMeasure::from_literals(GroupSpec::CyclicZmod { n: 2 }, [("1", "1")]).unwrap();
        let m = DosMode { order: 6, eigen: true, dense_cap: 4096 };
        let a = dos_estimate(&mg, &ml, 5, 1, 11, m).unwrap();
        let b = dos_estimate(&mg, &ml, 5, 1, 11, m).unwrap();
        assert_eq!(a.moments, b.moments);
        assert_eq!(a.eigen, b.eigen);
    }

    #[test]
    fn radius_growth_keeps_short_moments() {
        let mg = uniform_on_generators(GroupSpec::Zd { d: 2 }, Weight::one());
        let ml = FiniteMeasure::from_literals(GroupSpec::CyclicZmod { n: 2 }, [("1", "1")]).unwrap();
        let small = DosEstimator::new(&mg, &ml, 6).unwrap();
        let big = DosEstimator::new(&mg, &ml, 8).unwrap();
        for r in 0..5 {
            assert_eq!(small.realization_moments(2, r, 6), big.realization_moments(2, r, 6));
        }
    }
}
