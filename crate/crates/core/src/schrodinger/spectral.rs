use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use super::operator::TruncatedOperator;
use crate::error::{Error, Result};
use crate::group::Group;

/// Largest dimension diagonalized densely by default.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// A surrogate for a spectral measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralEstimate {
    /// Atoms `Σ weights[i] δ_{values[i]}`.
    Eigen { values: Vec<f64>, weights: Vec<f64> },
    /// `∫ λⁿ dμ` for `n = 0..`.
    Moments { values: Vec<f64>, standard_errors: Option<Vec<f64>> },
    /// `(1/π) Im ∫ dμ(λ)/(λ − E − iη)` sampled on an energy grid.
    Density { energies: Vec<f64>, eta: f64, values: Vec<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralMode {
    Exact { cap: usize },
    Moments { order: usize },
}

impl SpectralEstimate {
    pub fn total_weight(&self) -> Option<f64> {
        match self {
            SpectralEstimate::Eigen { weights, .. } => Some(weights.iter().sum()),
            SpectralEstimate::Moments { values, .. } => values.first().copied(),
            SpectralEstimate::Density { .. } => None,
        }
    }

    /// Moments `0..=order` of an atomic estimate.
    pub fn moments(&self, order: usize) -> Option<Vec<f64>> {
        match self {
            SpectralEstimate::Eigen { values, weights } => {
                Some((0..=order as i32).map(|n| values.iter().zip(weights).map(|(l, w)| w * l.powi(n)).sum()).collect())
            }
            SpectralEstimate::Moments { values, .. } => values.get(..=order).map(<[f64]>::to_vec),
            SpectralEstimate::Density { .. } => None,
        }
    }

    /// `μ([lo, hi])` for an atomic estimate.
    pub fn window_mass(&self, lo: f64, hi: f64) -> Option<f64> {
        match self {
            SpectralEstimate::Eigen { values, weights } => {
                Some(values.iter().zip(weights).filter(|(l, _)| **l >= lo && **l <= hi).map(|(_, w)| w).sum())
            }
            _ => None,
        }
    }

    /// Rescales the spectral variable `λ ↦ λ / scale`.
    pub fn scaled(&self, scale: f64) -> SpectralEstimate {
        match self {
            SpectralEstimate::Eigen { values, weights } => {
                SpectralEstimate::Eigen { values: values.iter().map(|l| l / scale).collect(), weights: weights.clone() }
            }
            SpectralEstimate::Moments { values, standard_errors } => {
                let f = |v: &Vec<f64>| v.iter().enumerate().map(|(n, x)| x / scale.powi(n as i32)).collect();
                SpectralEstimate::Moments { values: f(values), standard_errors: standard_errors.as_ref().map(f) }
            }
            SpectralEstimate::Density { energies, eta, values } => SpectralEstimate::Density {
                energies: energies.iter().map(|e| e / scale).collect(),
                eta: eta / scale,
                values: values.iter().map(|v| v * scale).collect(),
            },
        }
    }

    /// `(1/π) Im ∫ dμ(λ) / (λ − E − iη)` for an atomic estimate.
    pub fn smoothed_density(&self, energies: &[f64], eta: f64) -> Option<SpectralEstimate> {
        let SpectralEstimate::Eigen { values, weights } = self else {
            return None;
        };
        let dens = energies
            .iter()
            .map(|e| {
                values.iter().zip(weights).map(|(l, w)| w * eta / ((l - e) * (l - e) + eta * eta)).sum::<f64>()
                    / std::f64::consts::PI
            })
            .collect();
        Some(SpectralEstimate::Density { energies: energies.to_vec(), eta, values: dens })
    }
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
pub fn dense_eigen(h: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(h.nrows(), h.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// The spectral measure `μ^{site}` of a truncated operator: eigenvalues with
/// weights `|⟨δ_site, ψ_i⟩|²` in exact mode, diagonal moments otherwise.
pub fn spectral_measure<G: Group>(
    op: &TruncatedOperator<G>,
    site: usize,
    mode: SpectralMode,
) -> Result<SpectralEstimate> {
    if site >= op.dim() {
        return Err(Error::Unsupported(format!("site {site} outside operator of size {}", op.dim())));
    }
    match mode {
        SpectralMode::Exact { cap } => {
            if op.dim() > cap {
                return Err(Error::CapExceeded { what: "dense eigendecomposition size", limit: cap });
            }
            let (values, vectors) = dense_eigen(&op.to_dense());
            let weights = (0..values.len()).map(|i| vectors[(site, i)].norm_sqr()).collect();
            Ok(SpectralEstimate::Eigen { values, weights })
        }
        SpectralMode::Moments { order } => {
            Ok(SpectralEstimate::Moments { values: op.diagonal_moments(site, order), standard_errors: None })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use crate::measure::{uniform_on_generators, FiniteMeasure};
    use crate::schrodinger::{assemble, build_ball, DEFAULT_BALL_CAP};
    use crate::weight::Weight;

    fn exact() -> SpectralMode {
        SpectralMode::Exact { cap: DEFAULT_DENSE_CAP }
    }

    #[test]
    fn one_by_one_is_point_mass() {
        let m = FiniteMeasure::zero(GroupSpec::Z);
        let ball = build_ball(&m, 3, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(ball.len(), 1);
        let op = assemble(&m, &ball, vec![0.7]).unwrap();
        let est = spectral_measure(&op, 0, exact()).unwrap();
        assert_eq!(est, SpectralEstimate::Eigen { values: vec![0.7], weights: vec![1.0] });
    }

    #[test]
    fn two_site_flip() {
        let m = uniform_on_generators(GroupSpec::CyclicZmod { n: 2 }, Weight::one());
        let ball = build_ball(&m, 1, DEFAULT_BALL_CAP).unwrap();
        let op = assemble(&m, &ball, vec![0.0, 0.0]).unwrap();
        let SpectralEstimate::Eigen { values, weights } = spectral_measure(&op, 0, exact()).unwrap() else { panic!() };
        assert!((values[0] + 1.0).abs() < 1e-14 && (values[1] - 1.0).abs() < 1e-14);
        assert!(weights.iter().all(|w| (w - 0.5).abs() < 1e-14));
    }

    #[test]
    fn two_site_with_potential() {
        let m = uniform_on_generators(GroupSpec::CyclicZmod { n: 2 }, Weight::one());
        let ball = build_ball(&m, 1, DEFAULT_BALL_CAP).unwrap();
        let op = assemble(&m, &ball, vec![1.0, -1.0]).unwrap();
        let SpectralEstimate::Eigen { values, weights } = spectral_measure(&op, 0, exact()).unwrap() else { panic!() };
        let r2 = 2f64.sqrt();
        assert!((values[0] + r2).abs() < 1e-14 && (values[1] - r2).abs() < 1e-14);
        // first-coordinate overlaps of [[1,1],[1,-1]]: (1 ± 1/√2)/2
        let mut w = weights.clone();
        w.sort_by(f64::total_cmp);
        assert!((w[0] - (1.0 - 1.0 / r2) / 2.0).abs() < 1e-14);
        assert!((w[1] - (1.0 + 1.0 / r2) / 2.0).abs() < 1e-14);
        assert!((w[0] + w[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exact_and_moment_modes_agree() {
        let m = uniform_on_generators(GroupSpec::Zd { d: 2 }, Weight::one());
        let ball = build_ball(&m, 3, DEFAULT_BALL_CAP).unwrap();
        let pot: Vec<f64> = (0..ball.len()).map(|i| ((i * 7) % 5) as f64 * 0.3 - 0.6).collect();
        let op = assemble(&m, &ball, pot).unwrap();
        let a = spectral_measure(&op, 0, exact()).unwrap().moments(6).unwrap();
        let SpectralEstimate::Moments { values: b, .. } =
            spectral_measure(&op, 0, SpectralMode::Moments { order: 6 }).unwrap()
        else {
            panic!()
        };
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9 * (1.0 + y.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn dense_cap() {
        let m = uniform_on_generators(GroupSpec::Z, Weight::one());
        let ball = build_ball(&m, 5, DEFAULT_BALL_CAP).unwrap();
        let op = assemble(&m, &ball, vec![0.0; 11]).unwrap();
        assert!(matches!(spectral_measure(&op, 0, SpectralMode::Exact { cap: 10 }), Err(Error::CapExceeded { .. })));
    }
}
