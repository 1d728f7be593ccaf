//! Exact return moments `⟨δ_e, L_mⁿ δ_e⟩` by dynamic programming over group
//! elements, and the annealed walk expansion that matches them to the
//! averaged moments of a random Schrödinger operator.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::measure::FiniteMeasure;
use crate::weight::Weight;

/// Default bound on the number of live DP states.
pub const DEFAULT_STATE_CAP: usize = 10_000_000;
/// Default largest word length for [`word_enumeration_oracle`].
pub const DEFAULT_ENUMERATION_GUARD: usize = 12;

/// `values[n] = ⟨δ_e, Mⁿ δ_e⟩` for `n = 0..=order`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence {
    pub values: Vec<Weight>,
    /// `Σ|m(x)|` of the generating measure; bounds `|values[n]|` by its n-th power.
    pub total_abs_mass: f64,
}

impl MomentSequence {
    pub fn order(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Moments of `M / scale` as floats.
    pub fn scaled(&self, scale: f64) -> Vec<f64> {
        self.values.iter().enumerate().map(|(n, v)| v.re() / scale.powi(n as i32)).collect()
    }
}

/// `E_k = ⟨δ_e, B^k δ_e⟩ = ∫ v^k dμ_B`, the single-site potential moments.
#[derive(Clone, Debug, PartialEq)]
pub struct LampMomentTable {
    pub values: Vec<Weight>,
    /// `Σ|m_Λ(t)|`, a bound on `|v|`.
    pub total_abs_mass: f64,
}

impl LampMomentTable {
    pub fn get(&self, k: usize) -> &Weight {
        &self.values[k]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn warn_if_not_self_adjoint<G: Group>(m: &FiniteMeasure<G>) {
    if !m.is_self_adjoint() {
        log::warn!("measure is not self-adjoint; moments need not be spectral");
    }
}

/// Merges `(key, weight)` contributions in arrival order and returns the
/// surviving states sorted by key. The arrival order is deterministic, so
/// float accumulation is reproducible.
fn merge_sorted<K: Ord + Hash + Clone>(
    contribs: impl Iterator<Item = (K, Weight)>,
    cap: usize,
) -> Result<Vec<(K, Weight)>> {
    let mut acc: HashMap<K, Weight> = HashMap::new();
    for (k, w) in contribs {
        *acc.entry(k).or_default() += &w;
        if acc.len() > cap {
            return Err(Error::CapExceeded { what: "walk DP state count", limit: cap });
        }
    }
    let mut out: Vec<(K, Weight)> = acc.into_iter().filter(|(_, w)| !w.is_zero()).collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// The coefficient of the identity in `m^{*n}` for `n = 0..=order`. The
/// frontier after `n` steps is exactly the support of `m^{*n}`.
pub fn plancherel_moments<G: Group>(m: &FiniteMeasure<G>, order: usize, state_cap: usize) -> Result<MomentSequence> {
    warn_if_not_self_adjoint(m);
    let group = m.group();
    let e = group.identity();
    let atoms: Vec<(G::Element, Weight)> = m.atoms().map(|(x, w)| (x.clone(), w.clone())).collect();
    let mut frontier = vec![(e.clone(), Weight::one())];
    let mut values = vec![Weight::one()];
    for _ in 1..=order {
        let mut contribs = Vec::with_capacity(frontier.len() * atoms.len());
        for (x, c) in &frontier {
            for (s, w) in &atoms {
                contribs.push((group.multiply(s, x)?, c * w));
            }
        }
        frontier = merge_sorted(contribs.into_iter(), state_cap)?;
        let at_e = frontier.binary_search_by(|(k, _)| k.cmp(&e)).map(|i| frontier[i].1.clone()).unwrap_or_default();
        values.push(at_e);
    }
    Ok(MomentSequence { values, total_abs_mass: m.total_abs_mass() })
}

/// `E_k` for `k = 0..=order`, i.e. the Plancherel moments of the lamp measure.
pub fn lamp_moment_table<G: Group>(m_lamp: &FiniteMeasure<G>, order: usize) -> Result<LampMomentTable> {
    let seq = plancherel_moments(m_lamp, order, DEFAULT_STATE_CAP)?;
    Ok(LampMomentTable { values: seq.values, total_abs_mass: m_lamp.total_abs_mass() })
}

/// A walker position together with how many potential letters were read at
/// each visited site.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnnealedWalkState<E> {
    pub position: E,
    /// Sorted `(site, k_site)` with `k_site > 0`.
    pub visit_counts: Vec<(E, u32)>,
}

impl<E: Ord + Clone> AnnealedWalkState<E> {
    fn bump(&self) -> Self {
        let mut counts = self.visit_counts.clone();
        match counts.binary_search_by(|(k, _)| k.cmp(&self.position)) {
            Ok(i) => counts[i].1 += 1,
            Err(i) => counts.insert(i, (self.position.clone(), 1)),
        }
        AnnealedWalkState { position: self.position.clone(), visit_counts: counts }
    }
}

fn profile_weight<E>(counts: &[(E, u32)], lamp: &LampMomentTable) -> Weight {
    counts.iter().fold(Weight::one(), |acc, (_, k)| &acc * lamp.get(*k as usize))
}

/// `𝔼⟨δ_e, H(ω)ⁿ δ_e⟩` for `H = L_{m_base} + V` with i.i.d. site potentials
/// whose moments are `lamp`, by DP over [`AnnealedWalkState`]s.
pub fn annealed_moments<G: Group>(
    m_base: &FiniteMeasure<G>,
    lamp: &LampMomentTable,
    order: usize,
    state_cap: usize,
) -> Result<MomentSequence> {
    if lamp.len() <= order {
        return Err(Error::Unsupported(format!("lamp moment table has {} entries, need {}", lamp.len(), order + 1)));
    }
    warn_if_not_self_adjoint(m_base);
    let group = m_base.group();
    let e = group.identity();
    let atoms: Vec<(G::Element, Weight)> = m_base.atoms().map(|(x, w)| (x.clone(), w.clone())).collect();
    let mut frontier = vec![(AnnealedWalkState { position: e.clone(), visit_counts: Vec::new() }, Weight::one())];
    let mut values = vec![Weight::one()];
    for _ in 1..=order {
        let mut contribs = Vec::with_capacity(frontier.len() * (atoms.len() + 1));
        for (state, c) in &frontier {
            for (s, w) in &atoms {
                let next = AnnealedWalkState {
                    position: group.multiply(s, &state.position)?,
                    visit_counts: state.visit_counts.clone(),
                };
                contribs.push((next, c * w));
            }
            contribs.push((state.bump(), c.clone()));
        }
        frontier = merge_sorted(contribs.into_iter(), state_cap)?;
        let moment = frontier
            .iter()
            .filter(|(s, _)| s.position == e)
            .fold(Weight::zero(), |acc, (s, c)| &acc + &(c * &profile_weight(&s.visit_counts, lamp)));
        values.push(moment);
    }
    Ok(MomentSequence { values, total_abs_mass: m_base.total_abs_mass() + lamp.total_abs_mass })
}

/// Literal enumeration of every word of length `n` over `supp(m_base) ⊔ {v}`.
/// Words whose group letters multiply to the identity contribute
/// `Π m(u_i) · Π_y E_{k_y(u)}`, where the walk moves by `x_i = u_i⁻¹ x_{i-1}`.
///
/// Cost is `(|supp|+1)^n`; `n` beyond `guard` (default
/// [`DEFAULT_ENUMERATION_GUARD`]) is refused unless `guard` is raised.
pub fn word_enumeration_oracle<G: Group>(
    m_base: &FiniteMeasure<G>,
    lamp: &LampMomentTable,
    n: usize,
    guard: Option<usize>,
) -> Result<Weight> {
    let guard = guard.unwrap_or(DEFAULT_ENUMERATION_GUARD);
    if n > guard {
        return Err(Error::GuardExceeded { guard, requested: n });
    }
    if lamp.len() <= n {
        return Err(Error::Unsupported("lamp moment table too short".into()));
    }
    let group = m_base.group();
    let e = group.identity();
    let letters: Vec<(G::Element, G::Element, Weight)> =
        m_base.atoms().map(|(x, w)| Ok((x.clone(), group.inverse(x)?, w.clone()))).collect::<Result<_>>()?;
    let radix = letters.len() + 1; // last digit is the potential letter
    let total = radix.checked_pow(n as u32).ok_or(Error::CapExceeded { what: "word count", limit: usize::MAX })?;

    let mut sum = Weight::zero();
    let mut digits = vec![0usize; n];
    for word in 0..total {
        let mut rest = word;
        for d in digits.iter_mut() {
            *d = rest % radix;
            rest /= radix;
        }
        let mut product = e.clone();
        for &d in &digits {
            if d < letters.len() {
                product = group.multiply(&product, &letters[d].0)?;
            }
        }
        if product != e {
            continue;
        }
        let mut weight = Weight::one();
        let mut position = e.clone();
        let mut k: BTreeMap<G::Element, usize> = BTreeMap::new();
        for &d in &digits {
            if d < letters.len() {
                position = group.multiply(&letters[d].1, &position)?;
                weight = &weight * &letters[d].2;
            } else {
                *k.entry(position.clone()).or_insert(0) += 1;
            }
        }
        for &ky in k.values() {
            weight = &weight * lamp.get(ky);
        }
        sum += &weight;
    }
    Ok(sum)
}
