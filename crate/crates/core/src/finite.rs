//! Matrix-level check of the unitary equivalence between the convolution
//! operator on a finite wreath product and the direct sum of Schrödinger
//! operators over the (finite) dual of the lamp configurations.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Group, GroupElement, GroupSpec, LampConfig, WreathElement, WreathProduct};
use crate::measure::{wreath_measure, FiniteMeasure};
use crate::schrodinger::{dense_eigen, SpectralEstimate};

/// Default bound on `|Γ|·|Λ|^{|Γ|}`.
pub const DEFAULT_BASIS_CAP: usize = 20_000;
/// Largest dimension for which the dense unitary `F` is formed.
pub const DEFAULT_VERIFY_CAP: usize = 4096;

fn finite_elements(g: &GroupSpec) -> Result<Vec<GroupElement>> {
    g.elements().ok_or_else(|| Error::Unsupported(format!("{g} is not finite")))
}

fn tuple_count(lamps: usize, sites: usize, cap: usize) -> Result<usize> {
    (0..sites)
        .try_fold(1usize, |acc, _| acc.checked_mul(lamps).filter(|&n| n <= cap))
        .ok_or(Error::CapExceeded { what: "wreath basis size", limit: cap })
}

/// Decodes `code` into per-site digits, most significant digit first.
fn digits(mut code: usize, radix: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut().rev() {
        *slot = code % radix;
        code /= radix;
    }
    d
}

/// All elements `(f, g)` of a finite wreath product, ordered
/// lexicographically by `(g, f(x_0), f(x_1), …)`.
#[derive(Clone, Debug)]
pub struct WreathBasis {
    pub wreath: WreathProduct,
    pub base_elements: Vec<GroupElement>,
    pub lamp_elements: Vec<GroupElement>,
    elements: Vec<WreathElement>,
    lookup: HashMap<WreathElement, usize>,
}

impl WreathBasis {
    pub fn new(wreath: WreathProduct, cap: usize) -> Result<Self> {
        let base_elements = finite_elements(&wreath.base)?;
        let lamp_elements = finite_elements(&wreath.lamp)?;
        let configs = tuple_count(lamp_elements.len(), base_elements.len(), cap)?;
        if configs.checked_mul(base_elements.len()).is_none_or(|n| n > cap) {
            return Err(Error::CapExceeded { what: "wreath basis size", limit: cap });
        }
        let mut elements = Vec::with_capacity(configs * base_elements.len());
        for g in &base_elements {
            for code in 0..configs {
                let values = digits(code, lamp_elements.len(), base_elements.len());
                let lamps = LampConfig::from_pairs(
                    &wreath.lamp,
                    base_elements.iter().cloned().zip(values.iter().map(|&v| lamp_elements[v].clone())),
                );
                elements.push(WreathElement { lamps, base: g.clone() });
            }
        }
        let lookup = elements.iter().cloned().enumerate().map(|(i, h)| (h, i)).collect();
        Ok(WreathBasis { wreath, base_elements, lamp_elements, elements, lookup })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &WreathElement {
        &self.elements[i]
    }

    pub fn index_of(&self, h: &WreathElement) -> Option<usize> {
        self.lookup.get(h).copied()
    }

    pub fn config_count(&self) -> usize {
        self.len() / self.base_elements.len()
    }
}

/// The dual group `Ω = (Z/n)^Γ` of the lamp configurations, in the same
/// lexicographic order as the configurations of [`WreathBasis`].
#[derive(Clone, Debug)]
pub struct CharacterIndex {
    pub modulus: u64,
    pub sites: usize,
    points: Vec<Vec<u64>>,
}

impl CharacterIndex {
    pub fn new(lamp: &GroupSpec, base: &GroupSpec, cap: usize) -> Result<Self> {
        let GroupSpec::CyclicZmod { n } = *lamp else {
            return Err(Error::Unsupported(format!("finite dual needs a cyclic lamp group, got {lamp}")));
        };
        let sites = finite_elements(base)?.len();
        let count = tuple_count(n as usize, sites, cap)?;
        let points = (0..count).map(|c| digits(c, n as usize, sites).into_iter().map(|d| d as u64).collect()).collect();
        Ok(CharacterIndex { modulus: n, sites, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[u64] {
        &self.points[i]
    }

    /// `χ_f(ω) = exp(2πi Σ_x f(x) ω_x / n)` for `f` given by its residue tuple.
    pub fn pairing(&self, f: &[u64], omega: &[u64]) -> Complex64 {
        let n = self.modulus;
        let phase = f.iter().zip(omega).fold(0u64, |acc, (a, b)| (acc + a * b) % n);
        Complex64::from_polar(1.0, 2.0 * PI * phase as f64 / n as f64)
    }
}

fn residue(x: &GroupElement) -> u64 {
    match x {
        GroupElement::Residue(k) => *k,
        _ => unreachable!("finite groups are cyclic"),
    }
}

fn lamp_tuple(basis: &WreathBasis, h: &WreathElement) -> Vec<u64> {
    basis.base_elements.iter().map(|x| h.lamps.get(x).map(residue).unwrap_or(0)).collect()
}

/// Matrix of `M = L_{m̂_Γ + m̂_Λ}` in the wreath basis, acting by right
/// multiplication: `⟨δ_{h·s}, M δ_h⟩ = m(s)`. A base atom moves the walker,
/// a lamp atom changes the lamp under it.
pub fn build_m_matrix(
    m_base: &FiniteMeasure<GroupSpec>,
    m_lamp: &FiniteMeasure<GroupSpec>,
    basis: &WreathBasis,
) -> Result<DMatrix<Complex64>> {
    let m = wreath_measure(m_base, m_lamp)?;
    if !m.is_self_adjoint() {
        return Err(Error::NotSelfAdjoint);
    }
    let n = basis.len();
    let mut mat = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (col, h) in basis.elements.iter().enumerate() {
        for (s, w) in m.atoms() {
            let target = basis.wreath.multiply(h, s)?;
            let row = basis.index_of(&target).expect("basis is closed under multiplication");
            mat[(row, col)] += w.to_complex();
        }
    }
    Ok(mat)
}

/// `A` on `ℓ²(Γ)` for finite `Γ` with the same right action:
/// `⟨δ_{g s}, A δ_g⟩ = m_Γ(s)`.
pub fn base_matrix(m_base: &FiniteMeasure<GroupSpec>) -> Result<DMatrix<Complex64>> {
    let els = finite_elements(m_base.group())?;
    let idx: HashMap<&GroupElement, usize> = els.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let mut a = DMatrix::from_element(els.len(), els.len(), Complex64::new(0.0, 0.0));
    for (col, g) in els.iter().enumerate() {
        for (s, w) in m_base.atoms() {
            let row = idx[&m_base.group().multiply(g, s)?];
            a[(row, col)] += w.to_complex();
        }
    }
    Ok(a)
}

/// `V_{m_Λ}(ω_x) = Σ_t m_Λ(t) exp(2πi t ω_x / n)`.
pub fn lamp_symbol(m_lamp: &FiniteMeasure<GroupSpec>, modulus: u64, omega_x: u64) -> f64 {
    m_lamp
        .atoms()
        .map(|(t, w)| {
            let phase = (residue(t) * omega_x) % modulus;
            w.to_complex() * Complex64::from_polar(1.0, 2.0 * PI * phase as f64 / modulus as f64)
        })
        .sum::<Complex64>()
        .re
}

/// The blocks `H(ω) = A + Diag(V_{m_Λ}(ω_x))`, one per dual point.
pub fn direct_sum_blocks(
    m_base: &FiniteMeasure<GroupSpec>,
    m_lamp: &FiniteMeasure<GroupSpec>,
    chars: &CharacterIndex,
) -> Result<Vec<DMatrix<Complex64>>> {
    if !m_base.is_self_adjoint() || !m_lamp.is_self_adjoint() {
        return Err(Error::NotSelfAdjoint);
    }
    let a = base_matrix(m_base)?;
    Ok((0..chars.len())
        .map(|k| {
            let mut h = a.clone();
            for (x, &w) in chars.point(k).iter().enumerate() {
                h[(x, x)] += Complex64::new(lamp_symbol(m_lamp, chars.modulus, w), 0.0);
            }
            h
        })
        .collect())
}

/// Block-diagonal `⊕_ω H(ω)`, indexed by `(ω, x) ↦ ω·|Γ| + x`.
pub fn build_direct_sum(
    m_base: &FiniteMeasure<GroupSpec>,
    m_lamp: &FiniteMeasure<GroupSpec>,
    chars: &CharacterIndex,
) -> Result<DMatrix<Complex64>> {
    let blocks = direct_sum_blocks(m_base, m_lamp, chars)?;
    let b = chars.sites;
    let n = blocks.len() * b;
    let mut out = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (k, h) in blocks.iter().enumerate() {
        out.view_mut((k * b, k * b), (b, b)).copy_from(h);
    }
    Ok(out)
}

/// `F[(ω, x), (f, g)] = |Ω|^{-1/2} χ_f(ω) [x = g]`.
pub fn character_unitary(basis: &WreathBasis, chars: &CharacterIndex) -> DMatrix<Complex64> {
    let b = basis.base_elements.len();
    let norm = 1.0 / (chars.len() as f64).sqrt();
    let n = basis.len();
    let mut f = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (col, h) in basis.elements.iter().enumerate() {
        let g = basis.base_elements.iter().position(|x| *x == h.base).expect("base in basis");
        let lamps = lamp_tuple(basis, h);
        for k in 0..chars.len() {
            f[(k * b + g, col)] = chars.pairing(&lamps, chars.point(k)) * norm;
        }
    }
    f
}

fn max_abs_entry(m: &DMatrix<Complex64>) -> (f64, (usize, usize)) {
    let mut best = (0.0, (0, 0));
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)].norm();
            if v > best.0 {
                best = (v, (i, j));
            }
        }
    }
    best
}

/// Max distance between two sorted lists of equal length.
pub fn sorted_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub wreath: String,
    pub dimension: usize,
    pub unitarity_residual: f64,
    pub conjugation_residual: f64,
    /// Entry `(row, col)` of `F M F* − ⊕H(ω)` with the largest modulus.
    pub conjugation_worst_entry: (usize, usize),
    pub eig_distance: f64,
    pub spectrum: Vec<f64>,
    pub pass: bool,
}

pub const UNITARITY_TOL: f64 = 1e-12;
pub const CONJUGATION_TOL: f64 = 1e-10;
pub const EIGEN_TOL: f64 = 1e-10;

/// Builds `M`, `⊕H(ω)` and `F`, and checks `F F* = I`, `F M F* = ⊕H(ω)` and
/// equality of the sorted spectra.
pub fn verify_unitary_equivalence(
    m_base: &FiniteMeasure<GroupSpec>,
    m_lamp: &FiniteMeasure<GroupSpec>,
    cap: usize,
) -> Result<EquivalenceReport> {
    let wreath = WreathProduct::new(m_lamp.group().clone(), m_base.group().clone());
    let basis = WreathBasis::new(wreath.clone(), cap.min(DEFAULT_VERIFY_CAP))?;
    let chars = CharacterIndex::new(&wreath.lamp, &wreath.base, cap)?;
    let m = build_m_matrix(m_base, m_lamp, &basis)?;
    let direct = build_direct_sum(m_base, m_lamp, &chars)?;
    let f = character_unitary(&basis, &chars);
    let n = basis.len();

    let identity = DMatrix::<Complex64>::identity(n, n);
    let (unitarity_residual, _) = max_abs_entry(&(&f * f.adjoint() - identity));
    let (conjugation_residual, conjugation_worst_entry) = max_abs_entry(&(&f * &m * f.adjoint() - &direct));
    let (spec_m, _) = dense_eigen(&m);
    let (spec_h, _) = dense_eigen(&direct);
    let eig_distance = sorted_distance(&spec_m, &spec_h);

    let pass =
        unitarity_residual <= UNITARITY_TOL && conjugation_residual <= CONJUGATION_TOL && eig_distance <= EIGEN_TOL;
    Ok(EquivalenceReport {
        wreath: wreath.to_string(),
        dimension: n,
        unitarity_residual,
        conjugation_residual,
        conjugation_worst_entry,
        eig_distance,
        spectrum: spec_m,
        pass,
    })
}

/// Spectral measure of `M` at the identity: eigenvalues with weights
/// `|⟨δ_e, v_i⟩|²`.
pub fn finite_spectral_measure(
    m_base: &FiniteMeasure<GroupSpec>,
    m_lamp: &FiniteMeasure<GroupSpec>,
    cap: usize,
) -> Result<SpectralEstimate> {
    let wreath = WreathProduct::new(m_lamp.group().clone(), m_base.group().clone());
    let basis = WreathBasis::new(wreath.clone(), cap.min(DEFAULT_VERIFY_CAP))?;
    let m = build_m_matrix(m_base, m_lamp, &basis)?;
    let root = basis.index_of(&wreath.identity()).expect("identity in basis");
    let (values, vectors) = dense_eigen(&m);
    let weights = (0..values.len()).map(|i| vectors[(root, i)].norm_sqr()).collect();
    Ok(SpectralEstimate::Eigen { values, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyc(n: u64, atoms: &[(&str, &str)]) -> FiniteMeasure<GroupSpec> {
        FiniteMeasure::from_literals(GroupSpec::CyclicZmod { n }, atoms.iter().copied()).unwrap()
    }

    #[test]
    fn spectral_measure_reproduces_moments() {
        let mg = cyc(2, &[("1", "1")]);
        let ml = cyc(2, &[("1", "1")]);
        let est = finite_spectral_measure(&mg, &ml, DEFAULT_BASIS_CAP).unwrap();
        let m = est.moments(4).unwrap();
        // the Cayley graph is an 8-cycle
        for (got, want) in m.iter().zip([1.0, 0.0, 2.0, 0.0, 6.0]) {
            assert!((got - want).abs() < 1e-12, "{m:?}");
        }
    }

    #[test]
    fn z2_wr_z2_matrix_is_two_regular() {
        let mg = cyc(2, &[("1", "1")]);
        let ml = cyc(2, &[("1", "1")]);
        let basis = WreathBasis::new(
            WreathProduct::new(GroupSpec::CyclicZmod { n: 2 }, GroupSpec::CyclicZmod { n: 2 }),
            DEFAULT_BASIS_CAP,
        )
        .unwrap();
        assert_eq!(basis.len(), 8);
        let m = build_m_matrix(&mg, &ml, &basis).unwrap();
        for i in 0..8 {
            assert_eq!((0..8).filter(|&j| m[(i, j)].norm() > 0.0).count(), 2);
            assert_eq!(m[(i, i)], Complex64::new(0.0, 0.0));
        }
        assert_eq!(m.adjoint(), m);
    }

    #[test]
    fn z2_wr_z2_blocks() {
        let mg = cyc(2, &[("1", "1")]);
        let ml = cyc(2, &[("1", "1")]);
        let chars = CharacterIndex::new(&GroupSpec::CyclicZmod { n: 2 }, &GroupSpec::CyclicZmod { n: 2 }, 100).unwrap();
        let blocks = direct_sum_blocks(&mg, &ml, &chars).unwrap();
        assert_eq!(blocks.len(), 4);
        let diag: Vec<(f64, f64)> = blocks.iter().map(|b| (b[(0, 0)].re, b[(1, 1)].re)).collect();
        assert_eq!(diag, vec![(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]);
        let (e, _) = dense_eigen(&blocks[0]);
        assert!((e[0]).abs() < 1e-14 && (e[1] - 2.0).abs() < 1e-14);
        let (e, _) = dense_eigen(&blocks[1]);
        let r2 = 2f64.sqrt();
        assert!((e[0] + r2).abs() < 1e-14 && (e[1] - r2).abs() < 1e-14);
    }

    #[test]
    fn z2_wr_z2_spectrum() {
        let mg = cyc(2, &[("1", "1")]);
        let ml = cyc(2, &[("1", "1")]);
        let rep = verify_unitary_equivalence(&mg, &ml, DEFAULT_BASIS_CAP).unwrap();
        assert!(rep.pass, "{rep:?}");
        let r2 = 2f64.sqrt();
        let expect = [-2.0, -r2, -r2, 0.0, 0.0, r2, r2, 2.0];
        assert!(sorted_distance(&rep.spectrum, &expect) < 1e-12);
    }

    #[test]
    fn zero_lamp_measure_gives_copies_of_a() {
        let mg = cyc(3, &[("1", "1"), ("2", "1")]);
        let ml = FiniteMeasure::zero(GroupSpec::CyclicZmod { n: 2 });
        let chars = CharacterIndex::new(ml.group(), mg.group(), 100).unwrap();
        let blocks = direct_sum_blocks(&mg, &ml, &chars).unwrap();
        let a = base_matrix(&mg).unwrap();
        assert!(blocks.iter().all(|b| *b == a));
        assert!(verify_unitary_equivalence(&mg, &ml, DEFAULT_BASIS_CAP).unwrap().pass);
    }

    #[test]
    fn complex_characters_z4_lamps() {
        let mg = cyc(2, &[("1", "1")]);
        let ml = cyc(4, &[("1", "1"), ("3", "1")]);
        let rep = verify_unitary_equivalence(&mg, &ml, DEFAULT_BASIS_CAP).unwrap();
        assert_eq!(rep.dimension, 32);
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn character_orthogonality() {
        let chars = CharacterIndex::new(&GroupSpec::CyclicZmod { n: 4 }, &GroupSpec::CyclicZmod { n: 2 }, 100).unwrap();
        let n = chars.len();
        for a in 0..n {
            for b in 0..n {
                let s: Complex64 = (0..n)
                    .map(|f| {
                        chars.pairing(chars.point(f), chars.point(a))
                            * chars.pairing(chars.point(f), chars.point(b)).conj()
                    })
                    .sum();
                let expect = if a == b { n as f64 } else { 0.0 };
                assert!((s - expect).norm() < 1e-14 * n as f64, "{a},{b}: {s}");
            }
        }
    }

    #[test]
    fn basis_cap() {
        let w = WreathProduct::new(GroupSpec::CyclicZmod { n: 2 }, GroupSpec::CyclicZmod { n: 20 });
        assert!(matches!(WreathBasis::new(w, DEFAULT_BASIS_CAP), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn infinite_groups_rejected() {
        let w = WreathProduct::new(GroupSpec::CyclicZmod { n: 2 }, GroupSpec::Z);
        assert!(matches!(WreathBasis::new(w, DEFAULT_BASIS_CAP), Err(Error::Unsupported(_))));
    }
}
