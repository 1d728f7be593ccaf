//! Finite-volume random Schrödinger operators `H(ω) = A + V` on Cayley-graph
//! balls and Monte-Carlo estimates of their averaged spectral measure.

mod ball;
mod dos;
mod operator;
pub(crate) mod sampler;
mod spectral;

pub use ball::{build_ball, BallIndex, DEFAULT_BALL_CAP};
pub use dos::{dos_estimate, DosEstimator, DosMode, DosReport};
pub use operator::{assemble, SparseHermitian, TruncatedOperator};
pub use sampler::{
    quantile_fourier_coefficients, sample_potential, sampler_moment_check, DualPoint, PotentialSampler, QuantileSeries,
    SamplerMoment, SamplerMomentReport, TargetLaw,
};
pub use spectral::{dense_eigen, spectral_measure, SpectralEstimate, SpectralMode, DEFAULT_DENSE_CAP};
