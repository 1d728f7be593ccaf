//! Finitely supported complex measures on groups.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::group::{Group, GroupElement, GroupSpec, WreathElement, WreathProduct};
use crate::weight::Weight;

/// A finitely supported measure `m` on `group`; the convolution operator is
/// `L_m = Σ m(x) L_x`. Zero atoms are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMeasure<G: Group> {
    group: G,
    atoms: BTreeMap<G::Element, Weight>,
}

impl<G: Group> FiniteMeasure<G> {
    pub fn zero(group: G) -> Self {
        FiniteMeasure { group, atoms: BTreeMap::new() }
    }

    /// Builds a measure, summing repeated atoms and validating membership.
    pub fn new(group: G, atoms: impl IntoIterator<Item = (G::Element, Weight)>) -> Result<Self> {
        let mut m = FiniteMeasure::zero(group);
        for (x, w) in atoms {
            m.add_atom(x, &w)?;
        }
        Ok(m)
    }

    /// Adds `w·δ_x`.
    pub fn add_atom(&mut self, x: G::Element, w: &Weight) -> Result<()> {
        if !self.group.contains(&x) {
            return Err(crate::Error::GroupMismatch(format!("atom {x:?} not in {:?}", self.group)));
        }
        let entry = self.atoms.entry(x.clone()).or_default();
        *entry += w;
        if entry.is_zero() {
            self.atoms.remove(&x);
        }
        Ok(())
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&G::Element, &Weight)> {
        self.atoms.iter()
    }

    pub fn weight(&self, x: &G::Element) -> Weight {
        self.atoms.get(x).cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// True when every weight is an exact rational (real or complex).
    pub fn is_exact(&self) -> bool {
        self.atoms.values().all(Weight::is_exact)
    }

    /// `m(g⁻¹) = conj(m(g))` for every atom.
    pub fn is_self_adjoint(&self) -> bool {
        self.atoms.iter().all(|(x, w)| match self.group.inverse(x) {
            Ok(xi) => {
                let partner = self.weight(&xi);
                if w.is_exact() && partner.is_exact() {
                    partner == w.conj()
                } else {
                    (partner.to_complex() - w.to_complex().conj()).norm() <= 1e-12 * (1.0 + w.abs())
                }
            }
            Err(_) => false,
        })
    }

    /// `Σ |m(x)|`, an upper bound for the operator norm of `L_m`.
    pub fn total_abs_mass(&self) -> f64 {
        self.atoms.values().map(Weight::abs).sum()
    }

    /// Total signed mass `Σ m(x)`.
    pub fn total_mass(&self) -> Weight {
        self.atoms.values().fold(Weight::zero(), |acc, w| &acc + w)
    }

    /// True when every weight is real and nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        self.atoms.values().all(|w| {
            let c = w.to_complex();
            c.im == 0.0 && c.re >= 0.0
        })
    }

    pub fn identity_weight(&self) -> Weight {
        self.weight(&self.group.identity())
    }

    /// Largest word length of an atom, with respect to the atoms themselves as
    /// generators (1 for any non-identity atom, 0 for the identity).
    pub fn max_step(&self) -> usize {
        let e = self.group.identity();
        usize::from(self.atoms.keys().any(|x| *x != e))
    }

    /// The non-identity atoms, used as the generating set of the Cayley graph.
    pub fn generators(&self) -> Vec<G::Element> {
        let e = self.group.identity();
        self.atoms.keys().filter(|x| **x != e).cloned().collect()
    }
}

impl FiniteMeasure<GroupSpec> {
    /// Parses `(element literal, weight literal)` pairs.
    pub fn from_literals<'a>(group: GroupSpec, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let atoms = pairs
            .into_iter()
            .map(|(x, w)| Ok((group.parse_element(x)?, w.parse::<Weight>()?)))
            .collect::<Result<Vec<_>>>()?;
        FiniteMeasure::new(group, atoms)
    }

    /// Inverse of [`FiniteMeasure::from_literals`].
    pub fn to_literals(&self) -> Vec<(String, String)> {
        self.atoms.iter().map(|(x, w)| (self.group.format_element(x), w.to_string())).collect()
    }
}

/// `m̂_Γ + m̂_Λ` on `Λ ≀ Γ`. Atoms that coincide (both measures charging their
/// identities) are summed.
pub fn wreath_measure(
    m_base: &FiniteMeasure<GroupSpec>,
    m_lamp: &FiniteMeasure<GroupSpec>,
) -> Result<FiniteMeasure<WreathProduct>> {
    let w = WreathProduct::new(m_lamp.group().clone(), m_base.group().clone());
    let mut out = FiniteMeasure::zero(w.clone());
    for (g, weight) in m_base.atoms() {
        out.add_atom(w.embed_base(g)?, weight)?;
    }
    for (l, weight) in m_lamp.atoms() {
        out.add_atom(w.embed_lamp(l)?, weight)?;
    }
    Ok(out)
}

/// Convenience: `Σ_s w·δ_s` over the standard generators of `group`.
pub fn uniform_on_generators(group: GroupSpec, w: Weight) -> FiniteMeasure<GroupSpec> {
    let gens: Vec<GroupElement> = group.standard_generators();
    FiniteMeasure::new(group, gens.into_iter().map(|g| (g, w.clone())))
        .expect("standard generators belong to their group")
}

impl FiniteMeasure<WreathProduct> {
    pub fn wreath(&self) -> &WreathProduct {
        &self.group
    }

    pub fn atom_list(&self) -> Vec<(WreathElement, Weight)> {
        self.atoms.iter().map(|(x, w)| (x.clone(), w.clone())).collect()
    }
}
