//! Canonical arithmetic for base groups, lamp groups and their wreath products.
//!
//! Every element is held in a normal form that is unique per group element, so
//! structural equality (and hashing) coincides with group equality.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The operations a group must provide for walk counting and operator assembly.
pub trait Group: Clone + fmt::Debug + PartialEq + Send + Sync {
    type Element: Clone + Eq + Ord + Hash + fmt::Debug + Send + Sync;

    fn identity(&self) -> Self::Element;
    fn multiply(&self, a: &Self::Element, b: &Self::Element) -> Result<Self::Element>;
    fn inverse(&self, a: &Self::Element) -> Result<Self::Element>;
    fn contains(&self, a: &Self::Element) -> bool;
}

/// The supported base and lamp groups.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum GroupSpec {
    Z,
    Zd {
        d: usize,
    },
    FreeGroup {
        rank: usize,
    },
    /// Integer triples with `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`.
    Heisenberg3,
    CyclicZmod {
        n: u64,
    },
}

/// A free-group letter: `+k` is generator `k` (1-based), `-k` its inverse.
pub type Letter = i32;

/// Normal form of an element of a [`GroupSpec`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GroupElement {
    Int(i64),
    Tuple(Vec<i64>),
    /// Freely reduced word.
    Word(Vec<Letter>),
    Heis(i64, i64, i64),
    Residue(u64),
}

impl GroupSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Unsupported(format!("{self}: {msg}")));
        match *self {
            GroupSpec::Zd { d } if d < 1 => bad("d must be >= 1"),
            GroupSpec::FreeGroup { rank } if !(1..=26).contains(&rank) => bad("rank must be in 1..=26"),
            GroupSpec::CyclicZmod { n } if n < 2 => bad("n must be >= 2"),
            _ => Ok(()),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, GroupSpec::CyclicZmod { .. })
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            GroupSpec::Z | GroupSpec::Zd { .. } | GroupSpec::CyclicZmod { .. } => true,
            GroupSpec::FreeGroup { rank } => *rank == 1,
            GroupSpec::Heisenberg3 => false,
        }
    }

    /// Order of a finite group.
    pub fn order(&self) -> Option<usize> {
        match self {
            GroupSpec::CyclicZmod { n } => Some(*n as usize),
            _ => None,
        }
    }

    /// All elements of a finite group, in normal-form order.
    pub fn elements(&self) -> Option<Vec<GroupElement>> {
        match self {
            GroupSpec::CyclicZmod { n } => Some((0..*n).map(GroupElement::Residue).collect()),
            _ => None,
        }
    }

    /// A symmetric generating set. For the Heisenberg group this is `x^±1, y^±1`;
    /// the centre is generated by the commutator `[x, y]`.
    pub fn standard_generators(&self) -> Vec<GroupElement> {
        match self {
            GroupSpec::Z => vec![GroupElement::Int(1), GroupElement::Int(-1)],
            GroupSpec::Zd { d } => (0..*d)
                .flat_map(|i| {
                    [1, -1].into_iter().map(move |s| {
                        let mut v = vec![0; *d];
                        v[i] = s;
                        GroupElement::Tuple(v)
                    })
                })
                .collect(),
            GroupSpec::FreeGroup { rank } => (1..=*rank as Letter)
                .flat_map(|k| [GroupElement::Word(vec![k]), GroupElement::Word(vec![-k])])
                .collect(),
            GroupSpec::Heisenberg3 => vec![
                GroupElement::Heis(1, 0, 0),
                GroupElement::Heis(-1, 0, 0),
                GroupElement::Heis(0, 1, 0),
                GroupElement::Heis(0, -1, 0),
            ],
            GroupSpec::CyclicZmod { n } => {
                if *n == 2 {
                    vec![GroupElement::Residue(1)]
                } else {
                    vec![GroupElement::Residue(1), GroupElement::Residue(n - 1)]
                }
            }
        }
    }

    fn mismatch(&self, a: &GroupElement) -> Error {
        Error::GroupMismatch(format!("{a:?} is not an element of {self}"))
    }

    fn check(&self, a: &GroupElement) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(self.mismatch(a))
        }
    }

    /// Parses an element literal: `5` for Z, `1,0` for Z^d, `aB` (uppercase =
    /// inverse) for free groups, `a,b,c` for Heisenberg3, and a residue for
    /// Z/n (negative values are reduced). `e` is the identity of every group.
    pub fn parse_element(&self, literal: &str) -> Result<GroupElement> {
        let err = |reason: &str| Error::ElementLiteral {
            literal: literal.to_string(),
            group: self.to_string(),
            reason: reason.to_string(),
        };
        if literal.trim() == "e" {
            return Ok(self.identity());
        }
        let s = literal.trim().trim_start_matches('(').trim_end_matches(')').trim();
        let ints = |s: &str| -> Result<Vec<i64>> {
            s.split(',').map(|t| t.trim().parse::<i64>().map_err(|_| err("expected integers"))).collect()
        };
        match self {
            GroupSpec::Z => s.parse().map(GroupElement::Int).map_err(|_| err("expected an integer")),
            GroupSpec::Zd { d } => {
                let v = ints(s)?;
                if v.len() != *d {
                    return Err(err("wrong tuple length"));
                }
                Ok(GroupElement::Tuple(v))
            }
            GroupSpec::Heisenberg3 => match ints(s)?.as_slice() {
                [a, b, c] => Ok(GroupElement::Heis(*a, *b, *c)),
                _ => Err(err("expected a triple")),
            },
            GroupSpec::CyclicZmod { n } => {
                let k: i64 = s.parse().map_err(|_| err("expected an integer"))?;
                Ok(GroupElement::Residue(k.rem_euclid(*n as i64) as u64))
            }
            GroupSpec::FreeGroup { rank } => {
                if s == "e" || s.is_empty() {
                    return Ok(GroupElement::Word(vec![]));
                }
                let mut word = Vec::new();
                for c in s.chars() {
                    let k = if c.is_ascii_lowercase() {
                        (c as u8 - b'a' + 1) as Letter
                    } else if c.is_ascii_uppercase() {
                        -((c as u8 - b'A' + 1) as Letter)
                    } else {
                        return Err(err("letters must be ASCII"));
                    };
                    if k.unsigned_abs() as usize > *rank {
                        return Err(err("generator beyond rank"));
                    }
                    push_reduced(&mut word, k);
                }
                Ok(GroupElement::Word(word))
            }
        }
    }

    /// Inverse of [`GroupSpec::parse_element`].
    pub fn format_element(&self, a: &GroupElement) -> String {
        match a {
            GroupElement::Int(k) => k.to_string(),
            GroupElement::Residue(k) => k.to_string(),
            GroupElement::Tuple(v) => v.iter().map(i64::to_string).collect::<Vec<_>>().join(","),
            GroupElement::Heis(a, b, c) => format!("{a},{b},{c}"),
            GroupElement::Word(w) if w.is_empty() => "e".to_string(),
            GroupElement::Word(w) => w
                .iter()
                .map(|&k| {
                    let base = if k > 0 { b'a' } else { b'A' };
                    (base + (k.unsigned_abs() as u8 - 1)) as char
                })
                .collect(),
        }
    }
}

fn push_reduced(word: &mut Vec<Letter>, k: Letter) {
    if word.last() == Some(&-k) {
        word.pop();
    } else {
        word.push(k);
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Z => write!(f, "Z"),
            GroupSpec::Zd { d } => write!(f, "Z^{d}"),
            GroupSpec::FreeGroup { rank } => write!(f, "F_{rank}"),
            GroupSpec::Heisenberg3 => write!(f, "H3(Z)"),
            GroupSpec::CyclicZmod { n } => write!(f, "Z/{n}"),
        }
    }
}

impl Group for GroupSpec {
    type Element = GroupElement;

    fn identity(&self) -> GroupElement {
        match self {
            GroupSpec::Z => GroupElement::Int(0),
            GroupSpec::Zd { d } => GroupElement::Tuple(vec![0; *d]),
            GroupSpec::FreeGroup { .. } => GroupElement::Word(Vec::new()),
            GroupSpec::Heisenberg3 => GroupElement::Heis(0, 0, 0),
            GroupSpec::CyclicZmod { .. } => GroupElement::Residue(0),
        }
    }

    fn contains(&self, a: &GroupElement) -> bool {
        match (self, a) {
            (GroupSpec::Z, GroupElement::Int(_)) => true,
            (GroupSpec::Zd { d }, GroupElement::Tuple(v)) => v.len() == *d,
            (GroupSpec::FreeGroup { rank }, GroupElement::Word(w)) => {
                w.iter().all(|&k| k != 0 && k.unsigned_abs() as usize <= *rank) && w.windows(2).all(|p| p[0] != -p[1])
            }
            (GroupSpec::Heisenberg3, GroupElement::Heis(..)) => true,
            (GroupSpec::CyclicZmod { n }, GroupElement::Residue(k)) => k < n,
            _ => false,
        }
    }

    fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (self, a, b) {
            (_, GroupElement::Int(x), GroupElement::Int(y)) => GroupElement::Int(x + y),
            (_, GroupElement::Tuple(x), GroupElement::Tuple(y)) => {
                GroupElement::Tuple(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (_, GroupElement::Word(x), GroupElement::Word(y)) => {
                let mut w = x.clone();
                for &k in y {
                    push_reduced(&mut w, k);
                }
                GroupElement::Word(w)
            }
            (_, GroupElement::Heis(a1, b1, c1), GroupElement::Heis(a2, b2, c2)) => {
                GroupElement::Heis(a1 + a2, b1 + b2, c1 + c2 + a1 * b2)
            }
            (GroupSpec::CyclicZmod { n }, GroupElement::Residue(x), GroupElement::Residue(y)) => {
                GroupElement::Residue((x + y) % n)
            }
            _ => unreachable!("membership already checked"),
        })
    }

    fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(match (self, a) {
            (_, GroupElement::Int(x)) => GroupElement::Int(-x),
            (_, GroupElement::Tuple(x)) => GroupElement::Tuple(x.iter().map(|p| -p).collect()),
            (_, GroupElement::Word(w)) => GroupElement::Word(w.iter().rev().map(|k| -k).collect()),
            (_, GroupElement::Heis(a, b, c)) => GroupElement::Heis(-a, -b, a * b - c),
            (GroupSpec::CyclicZmod { n }, GroupElement::Residue(x)) => GroupElement::Residue((n - x) % n),
            _ => unreachable!("membership already checked"),
        })
    }
}

impl GroupElement {
    /// A platform-independent 64-bit digest of the normal form, used to key
    /// per-site random streams.
    pub fn stable_hash(&self) -> u64 {
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for byte in x.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        match self {
            GroupElement::Int(k) => {
                eat(1);
                eat(*k as u64);
            }
            GroupElement::Tuple(v) => {
                eat(2);
                eat(v.len() as u64);
                v.iter().for_each(|&k| eat(k as u64));
            }
            GroupElement::Word(w) => {
                eat(3);
                eat(w.len() as u64);
                w.iter().for_each(|&k| eat(k as i64 as u64));
            }
            GroupElement::Heis(a, b, c) => {
                eat(4);
                eat(*a as u64);
                eat(*b as u64);
                eat(*c as u64);
            }
            GroupElement::Residue(k) => {
                eat(5);
                eat(*k);
            }
        }
        h
    }
}

/// A finitely supported lamp configuration `f: Γ → Λ`, stored as an
/// association list sorted by base element with no identity values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LampConfig(Vec<(GroupElement, GroupElement)>);

impl LampConfig {
    pub fn empty() -> Self {
        LampConfig(Vec::new())
    }

    /// Builds a configuration, dropping identity lamps. Later entries for a
    /// repeated site overwrite earlier ones.
    pub fn from_pairs(lamp: &GroupSpec, pairs: impl IntoIterator<Item = (GroupElement, GroupElement)>) -> Self {
        let e = lamp.identity();
        let map: BTreeMap<_, _> = pairs.into_iter().collect();
        LampConfig(map.into_iter().filter(|(_, l)| *l != e).collect())
    }

    pub fn get(&self, site: &GroupElement) -> Option<&GroupElement> {
        self.0.binary_search_by(|(k, _)| k.cmp(site)).ok().map(|i| &self.0[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(GroupElement, GroupElement)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// An element `(f, g)` of `Λ ≀ Γ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WreathElement {
    pub lamps: LampConfig,
    pub base: GroupElement,
}

/// The wreath product `lamp ≀ base`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WreathProduct {
    pub lamp: GroupSpec,
    pub base: GroupSpec,
}

impl WreathProduct {
    pub fn new(lamp: GroupSpec, base: GroupSpec) -> Self {
        WreathProduct { lamp, base }
    }

    /// `g ↦ (e, g)`.
    pub fn embed_base(&self, g: &GroupElement) -> Result<WreathElement> {
        self.base.check(g)?;
        Ok(WreathElement { lamps: LampConfig::empty(), base: g.clone() })
    }

    /// `l ↦ (1_l, e_Γ)`, the lamp `l` at the base identity.
    pub fn embed_lamp(&self, l: &GroupElement) -> Result<WreathElement> {
        self.lamp.check(l)?;
        Ok(WreathElement {
            lamps: LampConfig::from_pairs(&self.lamp, [(self.base.identity(), l.clone())]),
            base: self.base.identity(),
        })
    }

    /// Right multiplication by the lamp `t` at the walker's position:
    /// `(f, g)·t̂ = (f with f(g) ↦ f(g)·t, g)`.
    pub fn toggle_at_walker(&self, h: &WreathElement, t: &GroupElement) -> Result<WreathElement> {
        let current = h.lamps.get(&h.base).cloned().unwrap_or_else(|| self.lamp.identity());
        let updated = self.lamp.multiply(&current, t)?;
        let mut map: BTreeMap<GroupElement, GroupElement> = h.lamps.iter().cloned().collect();
        map.insert(h.base.clone(), updated);
        Ok(WreathElement { lamps: LampConfig::from_pairs(&self.lamp, map), base: h.base.clone() })
    }
}

impl fmt::Display for WreathProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) wr ({})", self.lamp, self.base)
    }
}

impl Group for WreathProduct {
    type Element = WreathElement;

    fn identity(&self) -> WreathElement {
        WreathElement { lamps: LampConfig::empty(), base: self.base.identity() }
    }

    fn contains(&self, a: &WreathElement) -> bool {
        let e = self.lamp.identity();
        self.base.contains(&a.base)
            && a.lamps.0.windows(2).all(|p| p[0].0 < p[1].0)
            && a.lamps.iter().all(|(k, l)| self.base.contains(k) && self.lamp.contains(l) && *l != e)
    }

    /// `(f, g)·(f', g') = (f·(f'∘g⁻¹), g g')`.
    fn multiply(&self, a: &WreathElement, b: &WreathElement) -> Result<WreathElement> {
        if !self.contains(a) || !self.contains(b) {
            return Err(Error::GroupMismatch(format!("operands are not elements of {self}")));
        }
        let mut map: BTreeMap<GroupElement, GroupElement> = a.lamps.iter().cloned().collect();
        for (site, l) in b.lamps.iter() {
            let shifted = self.base.multiply(&a.base, site)?;
            let entry = map.entry(shifted).or_insert_with(|| self.lamp.identity());
            *entry = self.lamp.multiply(entry, l)?;
        }
        Ok(WreathElement {
            lamps: LampConfig::from_pairs(&self.lamp, map),
            base: self.base.multiply(&a.base, &b.base)?,
        })
    }

    /// `(f, g)⁻¹ = (h ↦ f(g h)⁻¹, g⁻¹)`.
    fn inverse(&self, a: &WreathElement) -> Result<WreathElement> {
        if !self.contains(a) {
            return Err(Error::GroupMismatch(format!("operand is not an element of {self}")));
        }
        let g_inv = self.base.inverse(&a.base)?;
        let pairs = a
            .lamps
            .iter()
            .map(|(site, l)| Ok((self.base.multiply(&g_inv, site)?, self.lamp.inverse(l)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(WreathElement { lamps: LampConfig::from_pairs(&self.lamp, pairs), base: g_inv })
    }
}

/// Geodesic length of `a` with respect to `gens` (left multiplication), found
/// by breadth-first search. Returns `None` when `a` is farther than `radius`.
pub fn word_length<G: Group>(group: &G, a: &G::Element, gens: &[G::Element], radius: usize) -> Result<Option<usize>> {
    let e = group.identity();
    if *a == e {
        return Ok(Some(0));
    }
    let mut dist: HashMap<G::Element, usize> = HashMap::from([(e.clone(), 0)]);
    let mut queue = VecDeque::from([e]);
    while let Some(x) = queue.pop_front() {
        let d = dist[&x];
        if d == radius {
            continue;
        }
        for s in gens {
            let y = group.multiply(s, &x)?;
            if dist.contains_key(&y) {
                continue;
            }
            if y == *a {
                return Ok(Some(d + 1));
            }
            dist.insert(y.clone(), d + 1);
            queue.push_back(y);
        }
    }
    Ok(None)
}
