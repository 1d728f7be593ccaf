use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::ball::BallIndex;
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};
use crate::measure::FiniteMeasure;
use crate::rng::{domain, stream};
use crate::walk::lamp_moment_table;
use crate::weight::Weight;

/// A point of the dual group of an Abelian lamp group: `[0,1)^d` for `Z^d`,
/// `{0,…,n−1}` for `Z/n`.
#[derive(Clone, Debug, PartialEq)]
pub enum DualPoint {
    Torus(Vec<f64>),
    Residue(u64),
}

#[derive(Clone, Debug, PartialEq)]
enum Dual {
    Torus(usize),
    Cyclic(u64),
}

/// Draws single-site potentials `v = Σ_t m_Λ(t) χ_t(ω)` with `ω` uniform on
/// the dual group, so that `v` follows the spectral measure of `L_{m_Λ}`.
#[derive(Clone, Debug)]
pub struct PotentialSampler {
    lamp: FiniteMeasure<GroupSpec>,
    dual: Dual,
    terms: Vec<(Vec<i64>, Complex64)>,
}

const BLOCK: usize = 4096;

impl PotentialSampler {
    pub fn new(lamp: FiniteMeasure<GroupSpec>) -> Result<Self> {
        if !lamp.is_self_adjoint() {
            return Err(Error::NotSelfAdjoint);
        }
        let dual = match lamp.group() {
            GroupSpec::Z => Dual::Torus(1),
            GroupSpec::Zd { d } => Dual::Torus(*d),
            GroupSpec::CyclicZmod { n } => Dual::Cyclic(*n),
            g @ (GroupSpec::FreeGroup { .. } | GroupSpec::Heisenberg3) => {
                return Err(Error::Unsupported(format!(
                    "potential sampling needs an Abelian lamp group with a dual; got {g}"
                )))
            }
        };
        let terms = lamp
            .atoms()
            .map(|(t, w)| {
                let coords = match t {
                    GroupElement::Int(k) => vec![*k],
                    GroupElement::Tuple(v) => v.clone(),
                    GroupElement::Residue(k) => vec![*k as i64],
                    _ => unreachable!("Abelian lamp groups only"),
                };
                (coords, w.to_complex())
            })
            .collect();
        Ok(PotentialSampler { lamp, dual, terms })
    }

    pub fn lamp(&self) -> &FiniteMeasure<GroupSpec> {
        &self.lamp
    }

    /// True when the lamp group is finite, so the potential law is atomic.
    pub fn is_atomic(&self) -> bool {
        matches!(self.dual, Dual::Cyclic(_)) || self.terms.iter().all(|(t, _)| t.iter().all(|&k| k == 0))
    }

    /// `χ_t(ω)` for a lamp element given by its coordinates.
    pub fn character(&self, t: &[i64], omega: &DualPoint) -> Complex64 {
        let phase = match (omega, &self.dual) {
            (DualPoint::Torus(w), _) => t.iter().zip(w).map(|(k, x)| *k as f64 * x).sum::<f64>(),
            (DualPoint::Residue(w), Dual::Cyclic(n)) => {
                ((t[0].rem_euclid(*n as i64) as u64 * w) % n) as f64 / *n as f64
            }
            (DualPoint::Residue(_), Dual::Torus(_)) => unreachable!("residue point for a torus dual"),
        };
        Complex64::from_polar(1.0, 2.0 * PI * phase)
    }

    /// `V_{m_Λ}(ω)`, real for self-adjoint `m_Λ`.
    pub fn evaluate(&self, omega: &DualPoint) -> f64 {
        self.terms.iter().map(|(t, w)| w * self.character(t, omega)).sum::<Complex64>().re
    }

    pub fn draw_dual(&self, rng: &mut ChaCha8Rng) -> DualPoint {
        match self.dual {
            Dual::Torus(d) => DualPoint::Torus((0..d).map(|_| rng.random::<f64>()).collect()),
            Dual::Cyclic(n) => DualPoint::Residue(rng.random_range(0..n)),
        }
    }

    /// Every point of a finite dual group, in residue order.
    pub fn dual_points(&self) -> Option<Vec<DualPoint>> {
        match self.dual {
            Dual::Cyclic(n) => Some((0..n).map(DualPoint::Residue).collect()),
            Dual::Torus(_) => None,
        }
    }

    /// `count` i.i.d. draws from the single-site law; draw `i` depends only
    /// on `(seed, i / 4096)` and its position in that block.
    pub fn sample_many(&self, seed: u64, count: usize) -> Vec<f64> {
        let blocks = count.div_ceil(BLOCK);
        let chunks: Vec<Vec<f64>> = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = stream(seed, domain::SAMPLER_BLOCK, &[b as u64]);
                let len = BLOCK.min(count - b * BLOCK);
                (0..len).map(|_| self.evaluate(&self.draw_dual(&mut rng))).collect()
            })
            .collect();
        chunks.concat()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SamplerMoment {
    pub k: usize,
    pub empirical: f64,
    pub standard_error: f64,
    pub exact: f64,
    /// `|empirical − exact| / se`, or 0 when both the gap and `se` vanish.
    pub z_score: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SamplerMomentReport {
    pub lamp: String,
    pub draws: usize,
    pub seed: u64,
    pub moments: Vec<SamplerMoment>,
    pub max_z: f64,
    pub pass: bool,
}

/// Empirical moments `k = 1..=order` of `count` draws against the exact lamp
/// moments `⟨δ_e, L_{m_Λ}^k δ_e⟩`, passing when every gap is within
/// `z_limit` standard errors.
pub fn sampler_moment_check(
    sampler: &PotentialSampler,
    seed: u64,
    count: usize,
    order: usize,
    z_limit: f64,
) -> Result<SamplerMomentReport> {
    let exact = lamp_moment_table(sampler.lamp(), order)?;
    let draws = sampler.sample_many(seed, count);
    let n = draws.len() as f64;
    let moments: Vec<SamplerMoment> = (1..=order)
        .map(|k| {
            let powers: Vec<f64> = draws.iter().map(|v| v.powi(k as i32)).collect();
            let empirical = powers.iter().sum::<f64>() / n;
            let var = powers.iter().map(|p| (p - empirical).powi(2)).sum::<f64>() / (n - 1.0);
            let standard_error = (var / n).sqrt();
            let exact = exact.get(k).re();
            let gap = (empirical - exact).abs();
            let z_score = if gap <= 1e-12 * exact.abs().max(1.0) { 0.0 } else { gap / standard_error };
            SamplerMoment { k, empirical, standard_error, exact, z_score }
        })
        .collect();
    let max_z = moments.iter().map(|m| m.z_score).fold(0.0, f64::max);
    Ok(SamplerMomentReport {
        lamp: sampler.lamp().group().to_string(),
        draws: draws.len(),
        seed,
        moments,
        max_z,
        pass: max_z <= z_limit,
    })
}

/// One potential realization on a ball; the value at each site is keyed by
/// `(seed, realization, site normal form)`.
pub fn sample_potential(
    sampler: &PotentialSampler,
    ball: &BallIndex<GroupSpec>,
    seed: u64,
    realization: u64,
) -> Vec<f64> {
    ball.elements()
        .iter()
        .map(|site| {
            let mut rng = stream(seed, domain::SITE_POTENTIAL, &[realization, site.stable_hash()]);
            sampler.evaluate(&sampler.draw_dual(&mut rng))
        })
        .collect()
}

/// A potential law given by its CDF on a bounded interval.
pub struct TargetLaw {
    cdf: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    lo: f64,
    hi: f64,
}

impl TargetLaw {
    pub fn from_cdf(cdf: impl Fn(f64) -> f64 + Send + Sync + 'static, lo: f64, hi: f64) -> Self {
        TargetLaw { cdf: Box::new(cdf), lo, hi }
    }

    pub fn uniform(a: f64, b: f64) -> Self {
        Self::from_cdf(move |t| ((t - a) / (b - a)).clamp(0.0, 1.0), a, b)
    }

    pub fn point_mass(c: f64) -> Self {
        Self::from_cdf(move |t| if t >= c { 1.0 } else { 0.0 }, c, c)
    }

    /// Fair coin on `{a, b}` with `a < b`.
    pub fn two_point(a: f64, b: f64) -> Self {
        Self::from_cdf(
            move |t| {
                if t >= b {
                    1.0
                } else if t >= a {
                    0.5
                } else {
                    0.0
                }
            },
            a,
            b,
        )
    }

    /// Generalized inverse `inf{t : F(t) ≥ u}` by bisection on the support.
    pub fn quantile(&self, u: f64) -> f64 {
        if (self.cdf)(self.lo) >= u {
            return self.lo;
        }
        let (mut a, mut b) = (self.lo, self.hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if (self.cdf)(mid) >= u {
                b = mid;
            } else {
                a = mid;
            }
        }
        b
    }
}

/// Truncated Fourier series of a quantile function on `[0,1]`.
#[derive(Clone, Debug)]
pub struct QuantileSeries {
    /// `m(n)` for `|n| ≤ K`, a measure on `Z`.
    pub coefficients: FiniteMeasure<GroupSpec>,
    pub l1_mass: f64,
    /// Sup-norm error of the truncated series against `F⁻¹` on a uniform grid.
    pub sup_error: f64,
    /// Fitted exponent `p` in `|m(n)| ~ n^{-p}` over the upper quarter of the
    /// cutoff range.
    pub decay_exponent: Option<f64>,
    /// Set when the fitted decay is too slow for the coefficients to be
    /// summable.
    pub l1_warning: bool,
}

const QUADRATURE_POINTS: usize = 1 << 16;
const ERROR_GRID: usize = 2001;

/// Fourier coefficients `m(n) = ∫₀¹ F⁻¹(u) e^{−2πinu} du`, `|n| ≤ cutoff`, by
/// the midpoint rule. Slow decay is reported, never raised.
pub fn quantile_fourier_coefficients(target: &TargetLaw, cutoff: usize) -> QuantileSeries {
    let q = QUADRATURE_POINTS;
    let values: Vec<f64> = (0..q).map(|j| target.quantile((j as f64 + 0.5) / q as f64)).collect();
    let coeff = |n: i64| -> Complex64 {
        values
            .iter()
            .enumerate()
            .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * n as f64 * (j as f64 + 0.5) / q as f64))
            .sum::<Complex64>()
            / q as f64
    };
    let k = cutoff as i64;
    let raw: Vec<(i64, Complex64)> = (-k..=k).map(|n| (n, coeff(n))).collect();
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let kept: Vec<(i64, Complex64)> = raw.iter().copied().filter(|(_, c)| c.norm() > 1e-13 * scale).collect();

    let coefficients =
        FiniteMeasure::new(GroupSpec::Z, kept.iter().map(|(n, c)| (GroupElement::Int(*n), Weight::float(c.re, c.im))))
            .expect("integers belong to Z");
    let l1_mass = kept.iter().map(|(_, c)| c.norm()).sum();

    let sup_error = (0..ERROR_GRID)
        .map(|i| {
            let u = i as f64 / (ERROR_GRID - 1) as f64;
            let s: f64 = kept.iter().map(|(n, c)| (c * Complex64::from_polar(1.0, 2.0 * PI * *n as f64 * u)).re).sum();
            (s - target.quantile(u)).abs()
        })
        .fold(0.0, f64::max);

    let tail: Vec<(f64, f64)> = raw
        .iter()
        .filter(|(n, c)| *n >= (k / 4).max(1) && c.norm() > 1e-12 * scale)
        .map(|(n, c)| ((*n as f64).ln(), c.norm().ln()))
        .collect();
    let decay_exponent = (tail.len() >= 2).then(|| -least_squares_slope(&tail).0);
    let l1_warning = decay_exponent.is_some_and(|p| p < 1.2);
    if l1_warning {
        log::warn!(
            "quantile Fourier coefficients decay like n^-{:.2}; the series may not be summable",
            decay_exponent.unwrap_or(0.0)
        );
    }
    QuantileSeries { coefficients, l1_mass, sup_error, decay_exponent, l1_warning }
}

/// Ordinary least squares `y ≈ a + b x`; returns `(b, standard error of b)`.
pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    let resid: f64 = points.iter().map(|p| (p.1 - my - b * (p.0 - mx)).powi(2)).sum();
    let se = if points.len() > 2 { (resid / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (b, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::uniform_on_generators;

    fn flip() -> PotentialSampler {
        PotentialSampler::new(FiniteMeasure::from_literals(GroupSpec::CyclicZmod { n: 2 }, [("1", "1")]).unwrap())
            .unwrap()
    }

    #[test]
    fn flip_lamp_gives_fair_signs() {
        let s = flip();
        let vals: Vec<f64> = s.dual_points().unwrap().iter().map(|w| s.evaluate(w)).collect();
        assert_eq!(vals, vec![1.0, -1.0]);
        let draws = s.sample_many(3, 20_000);
        assert!(draws.iter().all(|v| *v == 1.0 || *v == -1.0));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 0.03);
    }

    #[test]
    fn half_walk_on_z_is_cosine() {
        let s =
            PotentialSampler::new(FiniteMeasure::from_literals(GroupSpec::Z, [("1", "1/2"), ("-1", "1/2")]).unwrap())
                .unwrap();
        for u in [0.0, 0.1, 0.25, 0.7] {
            assert!((s.evaluate(&DualPoint::Torus(vec![u])) - (2.0 * PI * u).cos()).abs() < 1e-14);
        }
        assert!(!s.is_atomic());
    }

    #[test]
    fn identity_lamp_is_deterministic() {
        let s = PotentialSampler::new(FiniteMeasure::from_literals(GroupSpec::Z, [("0", "1")]).unwrap()).unwrap();
        assert!(s.sample_many(1, 100).iter().all(|v| (*v - 1.0).abs() < 1e-15));
        assert!(s.is_atomic());
    }

    #[test]
    fn non_abelian_lamps_rejected() {
        let m = uniform_on_generators(GroupSpec::FreeGroup { rank: 2 }, Weight::one());
        assert!(matches!(PotentialSampler::new(m), Err(Error::Unsupported(_))));
    }

    #[test]
    fn sample_many_is_prefix_stable() {
        let s = flip();
        let a = s.sample_many(9, 10_000);
        let b = s.sample_many(9, 5_000);
        assert_eq!(&a[..4096], &b[..4096]);
    }

    #[test]
    fn site_potential_depends_on_site_not_order() {
        let s = flip();
        let m = uniform_on_generators(GroupSpec::Z, Weight::one());
        let small = crate::schrodinger::build_ball(&m, 3, 100).unwrap();
        let big = crate::schrodinger::build_ball(&m, 6, 100).unwrap();
        let a = sample_potential(&s, &small, 5, 2);
        let b = sample_potential(&s, &big, 5, 2);
        for (i, x) in small.elements().iter().enumerate() {
            assert_eq!(a[i], b[big.index_of(x).unwrap()]);
        }
    }

    // analytic oracle: F⁻¹(u) = 2u − 1 has m(n) = i/(πn), m(0) = 0
    #[test]
    fn uniform_quantile_series() {
        let qs = quantile_fourier_coefficients(&TargetLaw::uniform(-1.0, 1.0), 16);
        for n in 1..=16i64 {
            let c = qs.coefficients.weight(&GroupElement::Int(n)).to_complex();
            let expect = Complex64::new(0.0, 1.0 / (PI * n as f64));
            assert!((c - expect).norm() < 1e-6, "n={n}: {c} vs {expect}");
        }
        assert!(qs.coefficients.weight(&GroupElement::Int(0)).abs() < 1e-9);
        let p = qs.decay_exponent.unwrap();
        assert!((p - 1.0).abs() < 0.05, "decay exponent {p}");
        assert!(qs.l1_warning);
    }

    #[test]
    fn point_mass_quantile_series() {
        let qs = quantile_fourier_coefficients(&TargetLaw::point_mass(0.3), 8);
        assert_eq!(qs.coefficients.len(), 1);
        assert!((qs.coefficients.weight(&GroupElement::Int(0)).re() - 0.3).abs() < 1e-10);
        assert!(qs.sup_error < 1e-10);
        assert!(!qs.l1_warning);
    }

    #[test]
    fn sampler_moments_of_flip_lamp() {
        let r = sampler_moment_check(&flip(), 3, 20_000, 4, 5.0).unwrap();
        assert!(r.pass, "{r:?}");
        // v = ±1: even moments are exactly one
        assert_eq!(r.moments[1].empirical, 1.0);
        assert_eq!(r.moments[1].z_score, 0.0);
    }

    // analytic oracle: square wave, m(n) = 2i/(πn) for odd n, 0 for even n
    #[test]
    fn fair_sign_quantile_series() {
        let qs = quantile_fourier_coefficients(&TargetLaw::two_point(-1.0, 1.0), 15);
        for n in 1..=15i64 {
            let c = qs.coefficients.weight(&GroupElement::Int(n)).to_complex();
            let expect = if n % 2 == 1 { Complex64::new(0.0, 2.0 / (PI * n as f64)) } else { Complex64::new(0.0, 0.0) };
            assert!((c - expect).norm() < 1e-6, "n={n}: {c} vs {expect}");
        }
        assert!(qs.l1_warning);
        assert!(qs.coefficients.is_self_adjoint());
    }
}
