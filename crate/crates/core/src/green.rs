//! Resolvent computations: the rank-one update formula, Wegner-bound
//! probing, and the Parseval identity for the Green function second moment.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite::{build_m_matrix, direct_sum_blocks, CharacterIndex, WreathBasis};
use crate::group::{Group, GroupElement, GroupSpec, WreathProduct};
use crate::measure::FiniteMeasure;
use crate::rng::{domain, stream};
use crate::schrodinger::assemble;
use crate::schrodinger::{
    build_ball, dense_eigen, sample_potential, spectral_measure, DosEstimator, PotentialSampler, SpectralEstimate,
    SpectralMode, TruncatedOperator, DEFAULT_BALL_CAP, DEFAULT_DENSE_CAP,
};

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// A resolvent entry `⟨δ_x, (H − z)⁻¹ δ_y⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResolventSample {
    pub z: Complex64,
    pub g: Complex64,
    pub x: usize,
    pub y: usize,
}

/// Solves `(H − z) u = δ_y` and returns `u_x`. Diagonal entries with
/// `Im z > 0` must have `Im g > 0`.
pub fn green(h: &DMatrix<Complex64>, x: usize, y: usize, z: Complex64) -> Result<ResolventSample> {
    if z.im == 0.0 {
        return Err(Error::Unsupported("resolvent needs Im z != 0".into()));
    }
    let n = h.nrows();
    if x >= n || y >= n {
        return Err(Error::Unsupported(format!("site outside matrix of size {n}")));
    }
    let shifted = h - DMatrix::<Complex64>::identity(n, n) * z;
    let mut rhs = DVector::from_element(n, czero());
    rhs[y] = Complex64::new(1.0, 0.0);
    let u = shifted.lu().solve(&rhs).ok_or_else(|| Error::Numerical("singular shifted system".into()))?;
    let g = u[x];
    if !g.re.is_finite() || !g.im.is_finite() {
        return Err(Error::Numerical("non-finite resolvent".into()));
    }
    if x == y && z.im.signum() * g.im <= 0.0 {
        return Err(Error::Numerical(format!("Herglotz property violated: Im g = {} at z = {z}", g.im)));
    }
    Ok(ResolventSample { z, g, x, y })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RankOneReport {
    pub g0: Complex64,
    pub direct: Complex64,
    pub formula: Complex64,
    pub residual: f64,
}

/// Compares `g_v(z)` of `H + v δ_site δ_site*` computed directly against
/// `1 / (g_0(z)⁻¹ + v)`.
pub fn rank_one_check(h: &DMatrix<Complex64>, site: usize, v: f64, z: Complex64) -> Result<RankOneReport> {
    let g0 = green(h, site, site, z)?.g;
    let mut hv = h.clone();
    hv[(site, site)] += Complex64::new(v, 0.0);
    let direct = green(&hv, site, site, z)?.g;
    let formula = 1.0 / (1.0 / g0 + v);
    Ok(RankOneReport { g0, direct, formula, residual: (direct - formula).norm() })
}

/// A random Hermitian matrix with entries of modulus at most one, seeded by
/// `(seed, index)`.
pub fn random_hermitian(dim: usize, seed: u64, index: u64) -> DMatrix<Complex64> {
    let mut rng = stream(seed, domain::TEST_INSTANCE, &[index]);
    let mut h = DMatrix::from_element(dim, dim, czero());
    for i in 0..dim {
        h[(i, i)] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..dim {
            let w = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * 0.7;
            h[(i, j)] = w;
            h[(j, i)] = w.conj();
        }
    }
    h
}

#[derive(Clone, Debug, Serialize)]
pub struct RankOneCase {
    pub dim: usize,
    pub site: usize,
    pub v: f64,
    pub z: Complex64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RankOneSuite {
    pub seed: u64,
    pub cases: Vec<RankOneCase>,
    pub max_residual: f64,
    pub pass: bool,
}

pub const RANK_ONE_TOL: f64 = 1e-12;

/// Random instances with `dim ∈ [2, max_dim]`, `v ∈ [−2, 2]` and
/// `Im z ∈ [0.05, 1]`.
pub fn rank_one_suite(seed: u64, count: usize, max_dim: usize) -> Result<RankOneSuite> {
    if max_dim < 2 {
        return Err(Error::Unsupported("max_dim must be at least 2".into()));
    }
    let cases: Vec<RankOneCase> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, domain::TEST_INSTANCE, &[i, 1]);
            let dim = rng.random_range(2..=max_dim);
            let site = rng.random_range(0..dim);
            let v = rng.random_range(-2.0..=2.0);
            let z = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(0.05..=1.0));
            let h = random_hermitian(dim, seed, i);
            let r = rank_one_check(&h, site, v, z)?;
            Ok(RankOneCase { dim, site, v, z, residual: r.residual })
        })
        .collect::<Result<_>>()?;
    let max_residual = cases.iter().map(|c| c.residual).fold(0.0, f64::max);
    Ok(RankOneSuite { seed, cases, max_residual, pass: max_residual <= RANK_ONE_TOL })
}

/// Histogram estimate of `sup ρ` for a law with a density.
#[derive(Clone, Debug, Serialize)]
pub struct DensityMaxEstimate {
    pub rho_max: f64,
    /// Poisson standard error of the tallest bin.
    pub standard_error: f64,
    pub bin_width: f64,
    pub draws: usize,
}

/// Freedman–Diaconis histogram of `samples`; returns the tallest bin height.
pub fn histogram_density_max(samples: &[f64]) -> Result<DensityMaxEstimate> {
    let n = samples.len();
    if n < 4 {
        return Err(Error::Unsupported("too few samples for a histogram".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| sorted[((n - 1) as f64 * p).round() as usize];
    let iqr = q(0.75) - q(0.25);
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    if iqr <= 0.0 || hi <= lo {
        return Err(Error::Unsupported("law looks atomic: zero interquartile range".into()));
    }
    let width = 2.0 * iqr / (n as f64).cbrt();
    let bins = ((hi - lo) / width).ceil().max(1.0) as usize;
    let mut counts = vec![0usize; bins];
    for x in &sorted {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let top = *counts.iter().max().expect("at least one bin") as f64;
    let scale = n as f64 * width;
    Ok(DensityMaxEstimate { rho_max: top / scale, standard_error: top.sqrt() / scale, bin_width: width, draws: n })
}

#[derive(Clone, Debug)]
pub struct WegnerParams {
    pub radius: usize,
    pub energies: Vec<f64>,
    pub eta: f64,
    pub realizations: usize,
    pub seed: u64,
    pub sampler_draws: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct WegnerPoint {
    pub energy: f64,
    /// `(1/π) 𝔼 Im g(E + iη)`.
    pub density: f64,
    pub standard_error: f64,
    /// `ρ̂_max + 3·sqrt(se² + se_hist²)`.
    pub bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WegnerReport {
    pub eta: f64,
    pub radius: usize,
    pub realizations: usize,
    pub seed: u64,
    pub rho: DensityMaxEstimate,
    pub points: Vec<WegnerPoint>,
    pub pass: bool,
}

/// Monte-Carlo estimate of the smoothed density of states at `E + iη` on a
/// grid, checked against the single-site density bound.
pub fn wegner_probe(
    m_base: &FiniteMeasure<GroupSpec>,
    m_lamp: &FiniteMeasure<GroupSpec>,
    params: &WegnerParams,
) -> Result<WegnerReport> {
    if params.eta <= 0.0 {
        return Err(Error::Unsupported("eta must be positive".into()));
    }
    let est = DosEstimator::new(m_base, m_lamp, params.radius)?;
    if est.sampler().is_atomic() {
        return Err(Error::Unsupported(
            "the potential law is atomic (finite lamp group or trivial measure); the density bound does not apply"
                .into(),
        ));
    }
    let rho = histogram_density_max(&est.sampler().sample_many(params.seed, params.sampler_draws))?;

    let per: Vec<Vec<f64>> = (0..params.realizations as u64)
        .into_par_iter()
        .map(|r| {
            let op = est.operator(params.seed, r);
            let mu = spectral_measure(&op, 0, SpectralMode::Exact { cap: DEFAULT_DENSE_CAP })?;
            match mu.smoothed_density(&params.energies, params.eta) {
                Some(SpectralEstimate::Density { values, .. }) => Ok(values),
                _ => unreachable!("exact mode yields eigenpairs"),
            }
        })
        .collect::<Result<_>>()?;

    let k = params.realizations as f64;
    let points: Vec<WegnerPoint> = params
        .energies
        .iter()
        .enumerate()
        .map(|(i, &energy)| {
            let mean = per.iter().map(|v| v[i]).sum::<f64>() / k;
            let var = per.iter().map(|v| (v[i] - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
            let se = (var / k).sqrt();
            let bound = rho.rho_max + 3.0 * (se * se + rho.standard_error * rho.standard_error).sqrt();
            WegnerPoint { energy, density: mean, standard_error: se, bound, ok: mean <= bound }
        })
        .collect();
    let pass = points.iter().all(|p| p.ok);
    Ok(WegnerReport {
        eta: params.eta,
        radius: params.radius,
        realizations: params.realizations,
        seed: params.seed,
        rho,
        points,
        pass,
    })
}

/// The smooth functions `f` used in the Parseval identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `(λ − z)⁻¹`.
    Resolvent { z: Complex64 },
    /// `Σ_k c_k λ^k`.
    Polynomial { coefficients: Vec<Complex64> },
}

impl FunctionSpec {
    pub fn eval(&self, lambda: f64) -> Complex64 {
        match self {
            FunctionSpec::Resolvent { z } => 1.0 / (Complex64::new(lambda, 0.0) - z),
            FunctionSpec::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(czero(), |acc, c| acc * lambda + c)
            }
        }
    }
}

/// `⟨δ_a, f(H) δ_b⟩` from an eigendecomposition.
fn functional_entry(values: &[f64], vectors: &DMatrix<Complex64>, f: &FunctionSpec, a: usize, b: usize) -> Complex64 {
    values.iter().enumerate().map(|(i, &l)| vectors[(a, i)] * f.eval(l) * vectors[(b, i)].conj()).sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct ParsevalFiniteReport {
    pub wreath: String,
    /// `𝔼_ω |⟨δ_e, f(H(ω)) δ_g⟩|²` over the finite dual.
    pub left: f64,
    /// `Σ_l |⟨δ_e, f(M) δ_{(l,g)}⟩|²`.
    pub right: f64,
    pub residual: f64,
}

/// Both sides of the Parseval identity for finite `Γ` and cyclic `Λ`.
pub fn parseval_check_finite(
    m_base: &FiniteMeasure<GroupSpec>,
    m_lamp: &FiniteMeasure<GroupSpec>,
    f: &FunctionSpec,
    g: &GroupElement,
    cap: usize,
) -> Result<ParsevalFiniteReport> {
    let wreath = WreathProduct::new(m_lamp.group().clone(), m_base.group().clone());
    let basis = WreathBasis::new(wreath.clone(), cap)?;
    let chars = CharacterIndex::new(&wreath.lamp, &wreath.base, cap)?;
    let g_idx = basis
        .base_elements
        .iter()
        .position(|x| x == g)
        .ok_or_else(|| Error::GroupMismatch(format!("{g:?} not in {}", wreath.base)))?;
    let e_idx = basis.base_elements.iter().position(|x| *x == wreath.base.identity()).expect("identity");

    let blocks = direct_sum_blocks(m_base, m_lamp, &chars)?;
    let left = blocks
        .iter()
        .map(|h| {
            let (vals, vecs) = dense_eigen(h);
            functional_entry(&vals, &vecs, f, e_idx, g_idx).norm_sqr()
        })
        .sum::<f64>()
        / blocks.len() as f64;

    let m = build_m_matrix(m_base, m_lamp, &basis)?;
    let (vals, vecs) = dense_eigen(&m);
    let root = basis.index_of(&wreath.identity()).expect("identity in basis");
    let right = (0..basis.len())
        .filter(|&i| basis.element(i).base == *g)
        .map(|i| functional_entry(&vals, &vecs, f, root, i).norm_sqr())
        .sum::<f64>();

    Ok(ParsevalFiniteReport { wreath: wreath.to_string(), left, right, residual: (left - right).abs() })
}

#[derive(Clone, Debug)]
pub struct ParsevalTruncatedParams {
    pub z: Complex64,
    /// Base ball radius.
    pub radius: usize,
    /// BFS radius of the lamp-configuration graph kept around the identity.
    pub wreath_radius: usize,
    pub state_cap: usize,
    /// `(L, K)`: at most `L` lit lamps, each of height `|l(x)| ≤ K`.
    pub cutoffs: Vec<(usize, i64)>,
    pub realizations: usize,
    pub seed: u64,
    pub target: GroupElement,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartialSum {
    pub max_lamps: usize,
    pub max_height: i64,
    pub terms: usize,
    pub value: f64,
    /// MC left side minus this partial sum.
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParsevalTruncatedReport {
    pub z: Complex64,
    pub radius: usize,
    pub wreath_radius: usize,
    pub states: usize,
    pub left: f64,
    pub left_standard_error: f64,
    pub partial_sums: Vec<PartialSum>,
    /// Partial sums nondecreasing along the cutoff list (which must be
    /// nested).
    pub monotone: bool,
    /// Every partial sum is at most `left + 3·se`.
    pub bounded: bool,
}

/// Lamp configuration with integer lamps on the sites of a finite ball.
type LampState = (Vec<(usize, i64)>, usize);

/// Dirichlet truncation of `M` for `Z` lamps over the finite operator `A`:
/// `⟨(f, x'), M (f, x)⟩ = A[x', x]` and `⟨(f + t·1_x, x), M (f, x)⟩ = m_Λ(t)`.
struct TruncatedLampOperator {
    states: Vec<LampState>,
    columns: Vec<Vec<(usize, Complex64)>>,
}

impl TruncatedLampOperator {
    fn build(
        a: &TruncatedOperator<GroupSpec>,
        lamp_atoms: &[(i64, Complex64)],
        radius: usize,
        cap: usize,
    ) -> Result<Self> {
        let root: LampState = (Vec::new(), 0);
        let mut index: HashMap<LampState, usize> = HashMap::from([(root.clone(), 0)]);
        let mut states = vec![root];
        let mut depth = vec![0usize];
        let mut queue = VecDeque::from([0usize]);
        let mut edges: Vec<Vec<(LampState, Complex64)>> = Vec::new();
        let neighbours = |(f, x): &LampState| -> Vec<(LampState, Complex64)> {
            let mut out = Vec::new();
            // column x of A: rows y with A[y, x] != 0
            for (y, row) in a.hopping.rows.iter().enumerate() {
                for &(c, w) in row {
                    if c == *x {
                        out.push(((f.clone(), y), w));
                    }
                }
            }
            for &(t, w) in lamp_atoms {
                let mut g = f.clone();
                match g.binary_search_by_key(x, |p| p.0) {
                    Ok(i) => {
                        g[i].1 += t;
                        if g[i].1 == 0 {
                            g.remove(i);
                        }
                    }
                    Err(i) => {
                        if t != 0 {
                            g.insert(i, (*x, t));
                        }
                    }
                }
                out.push(((g, *x), w));
            }
            out
        };
        while let Some(i) = queue.pop_front() {
            let nb = neighbours(&states[i]);
            if depth[i] < radius {
                for (s, _) in &nb {
                    if !index.contains_key(s) {
                        if states.len() == cap {
                            return Err(Error::CapExceeded { what: "truncated lamp state count", limit: cap });
                        }
                        index.insert(s.clone(), states.len());
                        states.push(s.clone());
                        depth.push(depth[i] + 1);
                        queue.push_back(states.len() - 1);
                    }
                }
            }
            edges.push(nb);
        }
        let columns = edges
            .into_iter()
            .map(|nb| nb.into_iter().filter_map(|(s, w)| index.get(&s).map(|&j| (j, w))).collect())
            .collect();
        Ok(TruncatedLampOperator { states, columns })
    }

    /// `y = (M − shift) x`, with `M` given column-wise.
    fn apply(&self, x: &[Complex64], shift: Complex64, y: &mut [Complex64]) {
        for (i, v) in x.iter().enumerate() {
            y[i] = -shift * v;
        }
        for (col, entries) in self.columns.iter().enumerate() {
            let xc = x[col];
            if xc == czero() {
                continue;
            }
            for &(row, w) in entries {
                y[row] += w * xc;
            }
        }
    }

    /// Row 0 of `(M − z)⁻¹`, by conjugate gradients on
    /// `(M − z)(M − z̄) w = (M − z) δ_0`, so that `w = (M − z̄)⁻¹ δ_0`.
    fn resolvent_row(&self, z: Complex64, tol: f64, max_iter: usize) -> Result<Vec<Complex64>> {
        let n = self.states.len();
        let zc = z.conj();
        let mut tmp = vec![czero(); n];
        let normal = |v: &[Complex64], out: &mut [Complex64], tmp: &mut [Complex64]| {
            self.apply(v, zc, tmp);
            self.apply(tmp, z, out);
        };
        let mut e0 = vec![czero(); n];
        e0[0] = Complex64::new(1.0, 0.0);
        let mut b = vec![czero(); n];
        self.apply(&e0, z, &mut b);

        let dot = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>();
        let mut w = vec![czero(); n];
        let mut r = b.clone();
        let mut p = r.clone();
        let mut ap = vec![czero(); n];
        let mut rr = dot(&r, &r).re;
        let b_norm = rr.sqrt();
        for _ in 0..max_iter {
            if rr.sqrt() <= tol * b_norm {
                // M Hermitian: ((M − z)⁻¹)[0, j] = conj(((M − z̄)⁻¹)[j, 0])
                return Ok(w.iter().map(|c| c.conj()).collect());
            }
            normal(&p, &mut ap, &mut tmp);
            let alpha = rr / dot(&p, &ap).re;
            for i in 0..n {
                w[i] += p[i] * alpha;
                r[i] -= ap[i] * alpha;
            }
            let rr_new = dot(&r, &r).re;
            let beta = rr_new / rr;
            for i in 0..n {
                p[i] = r[i] + p[i] * beta;
            }
            rr = rr_new;
        }
        Err(Error::Numerical("conjugate gradients did not converge".into()))
    }
}

/// Truncated right side of the Parseval identity for `Λ = Z` against a
/// Monte-Carlo left side. Both sides use the same Dirichlet-truncated base
/// operator on the ball of radius `radius`.
pub fn parseval_truncated_z(
    m_base: &FiniteMeasure<GroupSpec>,
    m_lamp: &FiniteMeasure<GroupSpec>,
    params: &ParsevalTruncatedParams,
) -> Result<ParsevalTruncatedReport> {
    if *m_lamp.group() != GroupSpec::Z {
        return Err(Error::Unsupported(format!("lamp group must be Z, got {}", m_lamp.group())));
    }
    if params.z.im == 0.0 {
        return Err(Error::Unsupported("resolvent needs Im z != 0".into()));
    }
    let ball = build_ball(m_base, params.radius, DEFAULT_BALL_CAP)?;
    let target =
        ball.index_of(&params.target).ok_or_else(|| Error::Unsupported("target site outside the base ball".into()))?;
    let a = assemble(m_base, &ball, vec![0.0; ball.len()])?;

    // Monte-Carlo left side.
    let sampler = PotentialSampler::new(m_lamp.clone())?;
    let dense_a = a.to_dense();
    let samples: Vec<f64> = (0..params.realizations as u64)
        .into_par_iter()
        .map(|r| {
            let v = sample_potential(&sampler, &ball, params.seed, r);
            let mut h = dense_a.clone();
            for (i, x) in v.iter().enumerate() {
                h[(i, i)] += Complex64::new(*x, 0.0);
            }
            Ok(green(&h, 0, target, params.z)?.g.norm_sqr())
        })
        .collect::<Result<_>>()?;
    let k = samples.len() as f64;
    let left = samples.iter().sum::<f64>() / k;
    let left_var = samples.iter().map(|s| (s - left).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    let left_standard_error = (left_var / k).sqrt();

    // Right side from the truncated wreath operator.
    let lamp_atoms: Vec<(i64, Complex64)> = m_lamp
        .atoms()
        .map(|(t, w)| match t {
            GroupElement::Int(k) => (*k, w.to_complex()),
            _ => unreachable!("Z lamps"),
        })
        .collect();
    let op = TruncatedLampOperator::build(&a, &lamp_atoms, params.wreath_radius, params.state_cap)?;
    let row = op.resolvent_row(params.z, 1e-13, 20_000)?;

    let mut partial_sums = Vec::with_capacity(params.cutoffs.len());
    for &(max_lamps, max_height) in &params.cutoffs {
        let mut value = 0.0;
        let mut terms = 0;
        for (i, (f, x)) in op.states.iter().enumerate() {
            if *x == target && f.len() <= max_lamps && f.iter().all(|(_, h)| h.abs() <= max_height) {
                value += row[i].norm_sqr();
                terms += 1;
            }
        }
        partial_sums.push(PartialSum { max_lamps, max_height, terms, value, gap: left - value });
    }
    let monotone = partial_sums.windows(2).all(|p| p[1].value >= p[0].value);
    let bounded = partial_sums.iter().all(|p| p.value <= left + 3.0 * left_standard_error);
    Ok(ParsevalTruncatedReport {
        z: params.z,
        radius: params.radius,
        wreath_radius: params.wreath_radius,
        states: op.states.len(),
        left,
        left_standard_error,
        partial_sums,
        monotone,
        bounded,
    })
}
