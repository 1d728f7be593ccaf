use proptest::prelude::*;
use wreath_core::{Group, GroupElement, GroupSpec, LampConfig, WreathElement, WreathProduct};

fn word(letters: Vec<i32>) -> GroupElement {
    let g = GroupSpec::FreeGroup { rank: 2 };
    letters.into_iter().fold(g.identity(), |acc, l| g.multiply(&acc, &GroupElement::Word(vec![l])).unwrap())
}

fn element(spec: &GroupSpec) -> BoxedStrategy<GroupElement> {
    match spec {
        GroupSpec::Z => (-50i64..50).prop_map(GroupElement::Int).boxed(),
        GroupSpec::Zd { d } => prop::collection::vec(-20i64..20, *d).prop_map(GroupElement::Tuple).boxed(),
        GroupSpec::FreeGroup { .. } => {
            prop::collection::vec(prop::sample::select(vec![1, -1, 2, -2]), 0..10).prop_map(word).boxed()
        }
        GroupSpec::Heisenberg3 => {
            (-9i64..9, -9i64..9, -30i64..30).prop_map(|(a, b, c)| GroupElement::Heis(a, b, c)).boxed()
        }
        GroupSpec::CyclicZmod { n } => (0..*n).prop_map(GroupElement::Residue).boxed(),
    }
}

fn wreath_element(w: &WreathProduct) -> BoxedStrategy<WreathElement> {
    let lamp = w.lamp.clone();
    (prop::collection::vec((element(&w.base), element(&w.lamp)), 0..5), element(&w.base))
        .prop_map(move |(pairs, base)| {
            // later pairs overwrite earlier ones at the same site
            let map: std::collections::BTreeMap<_, _> = pairs.into_iter().collect();
            WreathElement { lamps: LampConfig::from_pairs(&lamp, map), base }
        })
        .boxed()
}

fn check_axioms<G: Group>(g: &G, a: &G::Element, b: &G::Element, c: &G::Element) -> Result<(), TestCaseError> {
    let ab_c = g.multiply(&g.multiply(a, b).unwrap(), c).unwrap();
    let a_bc = g.multiply(a, &g.multiply(b, c).unwrap()).unwrap();
    prop_assert_eq!(ab_c, a_bc);
    prop_assert_eq!(&g.multiply(a, &g.identity()).unwrap(), a);
    prop_assert_eq!(&g.multiply(&g.identity(), a).unwrap(), a);
    prop_assert_eq!(g.multiply(a, &g.inverse(a).unwrap()).unwrap(), g.identity());
    prop_assert_eq!(g.multiply(&g.inverse(a).unwrap(), a).unwrap(), g.identity());
    Ok(())
}

fn specs() -> Vec<GroupSpec> {
    vec![
        GroupSpec::Z,
        GroupSpec::Zd { d: 3 },
        GroupSpec::FreeGroup { rank: 2 },
        GroupSpec::Heisenberg3,
        GroupSpec::CyclicZmod { n: 5 },
    ]
}

fn triple(spec: GroupSpec) -> impl Strategy<Value = (GroupSpec, GroupElement, GroupElement, GroupElement)> {
    (element(&spec), element(&spec), element(&spec)).prop_map(move |(a, b, c)| (spec.clone(), a, b, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn base_group_axioms((g, a, b, c) in prop::sample::select(specs()).prop_flat_map(triple)) {
        check_axioms(&g, &a, &b, &c)?;
    }

    #[test]
    fn lamplighter_over_z_axioms(
        (a, b, c) in {
            let w = WreathProduct::new(GroupSpec::CyclicZmod { n: 3 }, GroupSpec::Z);
            (wreath_element(&w), wreath_element(&w), wreath_element(&w))
        }
    ) {
        check_axioms(&WreathProduct::new(GroupSpec::CyclicZmod { n: 3 }, GroupSpec::Z), &a, &b, &c)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn integer_lamps_over_free_group_axioms(
        (a, b, c) in {
            let w = WreathProduct::new(GroupSpec::Z, GroupSpec::FreeGroup { rank: 2 });
            (wreath_element(&w), wreath_element(&w), wreath_element(&w))
        }
    ) {
        check_axioms(&WreathProduct::new(GroupSpec::Z, GroupSpec::FreeGroup { rank: 2 }), &a, &b, &c)?;
    }

    #[test]
    fn lamps_over_heisenberg_axioms(
        (a, b, c) in {
            let w = WreathProduct::new(GroupSpec::CyclicZmod { n: 2 }, GroupSpec::Heisenberg3);
            (wreath_element(&w), wreath_element(&w), wreath_element(&w))
        }
    ) {
        check_axioms(&WreathProduct::new(GroupSpec::CyclicZmod { n: 2 }, GroupSpec::Heisenberg3), &a, &b, &c)?;
    }

    #[test]
    fn free_group_words_reduce_consistently(u in prop::collection::vec(prop::sample::select(vec![1, -1, 2, -2]), 0..12)) {
        let GroupElement::Word(w) = word(u.clone()) else { unreachable!() };
        prop_assert!(w.windows(2).all(|p| p[0] != -p[1]));
        // u followed by its formal inverse is trivial
        let inv: Vec<i32> = u.iter().rev().map(|l| -l).collect();
        prop_assert_eq!(word([u, inv].concat()), GroupSpec::FreeGroup { rank: 2 }.identity());
    }

    #[test]
    fn embeddings_are_homomorphisms(
        g in element(&GroupSpec::Zd { d: 2 }),
        h in element(&GroupSpec::Zd { d: 2 }),
        l in element(&GroupSpec::CyclicZmod { n: 4 }),
        k in element(&GroupSpec::CyclicZmod { n: 4 }),
    ) {
        let w = WreathProduct::new(GroupSpec::CyclicZmod { n: 4 }, GroupSpec::Zd { d: 2 });
        let (base, lamp) = (&w.base, &w.lamp);
        prop_assert_eq!(
            w.multiply(&w.embed_base(&g).unwrap(), &w.embed_base(&h).unwrap()).unwrap(),
            w.embed_base(&base.multiply(&g, &h).unwrap()).unwrap()
        );
        prop_assert_eq!(
            w.multiply(&w.embed_lamp(&l).unwrap(), &w.embed_lamp(&k).unwrap()).unwrap(),
            w.embed_lamp(&lamp.multiply(&l, &k).unwrap()).unwrap()
        );
        // images meet only in the identity
        if g != base.identity() || l != lamp.identity() {
            prop_assert_ne!(w.embed_base(&g).unwrap(), w.embed_lamp(&l).unwrap());
        }
        let conj = w.multiply(
            &w.multiply(&w.embed_base(&g).unwrap(), &w.embed_lamp(&l).unwrap()).unwrap(),
            &w.embed_base(&base.inverse(&g).unwrap()).unwrap(),
        ).unwrap();
        let expect = WreathElement { lamps: LampConfig::from_pairs(lamp, [(g.clone(), l.clone())]), base: base.identity() };
        prop_assert_eq!(conj, expect);
    }
}

/// `(f, g)` acting on `Λ × Γ` by `(l, x) ↦ (f(g x)·l, g x)`; composition of
/// these permutations is an independent model of the product.
fn permutation(w: &WreathProduct, h: &WreathElement, points: &[(GroupElement, GroupElement)]) -> Vec<usize> {
    points
        .iter()
        .map(|(l, x)| {
            let gx = w.base.multiply(&h.base, x).unwrap();
            let fl = w.lamp.multiply(&h.lamps.get(&gx).cloned().unwrap_or_else(|| w.lamp.identity()), l).unwrap();
            points.iter().position(|p| *p == (fl.clone(), gx.clone())).unwrap()
        })
        .collect()
}

#[test]
fn z2_wr_z2_matches_permutation_model() {
    let w = WreathProduct::new(GroupSpec::CyclicZmod { n: 2 }, GroupSpec::CyclicZmod { n: 2 });
    let base = w.base.elements().unwrap();
    let lamp = w.lamp.elements().unwrap();
    let points: Vec<_> = lamp.iter().flat_map(|l| base.iter().map(move |x| (l.clone(), x.clone()))).collect();
    let mut elements = Vec::new();
    for g in &base {
        for f0 in &lamp {
            for f1 in &lamp {
                let lamps =
                    LampConfig::from_pairs(&w.lamp, [(base[0].clone(), f0.clone()), (base[1].clone(), f1.clone())]);
                elements.push(WreathElement { lamps, base: g.clone() });
            }
        }
    }
    assert_eq!(elements.len(), 8);
    let perms: Vec<Vec<usize>> = elements.iter().map(|h| permutation(&w, h, &points)).collect();
    for i in 0..8 {
        for j in i + 1..8 {
            assert_ne!(perms[i], perms[j], "the action is faithful");
        }
    }
    for (a, pa) in elements.iter().zip(&perms) {
        for (b, pb) in elements.iter().zip(&perms) {
            let composed: Vec<usize> = pb.iter().map(|&k| pa[k]).collect();
            assert_eq!(permutation(&w, &w.multiply(a, b).unwrap(), &points), composed);
        }
        let inv = permutation(&w, &w.inverse(a).unwrap(), &points);
        assert!((0..points.len()).all(|k| inv[pa[k]] == k));
    }
}
