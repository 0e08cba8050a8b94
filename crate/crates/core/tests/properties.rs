//! Property suites: algebraic invariants under randomized inputs, plus the
//! dual-route cross-checks that pair each decision procedure with an
//! independent oracle.

use proptest::prelude::*;

use cmonoids::abelian::{
    hom_kernel, quotient_by_relations, smith_normal_form, structure_from_table, FiniteAbelianGroup,
    GroupHom, IntMat,
};
use cmonoids::cmonoid::{CMonoidPresentation, Caps, FactoredPattern};
use cmonoids::factorial::{FactorialElement, FactorialMonoid};
use cmonoids::gallery::{build_example43, Example43Spec};
use cmonoids::productone::{bg_atoms, is_product_one, product_set, FiniteGroup, GSequence};
use cmonoids::semigroup::{from_abelian_group, FinCommSemigroup};

fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(-12i64..=12, c), r)
    })
}

proptest! {
    #[test]
    fn snf_decomposition_properties(rows in small_matrix()) {
        let m = IntMat::from_rows(&rows);
        let snf = smith_normal_form(&m);
        // S = U * M * V with unimodular transforms
        prop_assert_eq!(snf.u.mul(&m).mul(&snf.v), snf.s.clone());
        prop_assert_eq!(snf.u.determinant().abs(), 1);
        prop_assert_eq!(snf.v.determinant().abs(), 1);
        // diagonal with a divisibility chain
        for i in 0..snf.s.rows {
            for j in 0..snf.s.cols {
                if i != j {
                    prop_assert_eq!(snf.s[(i, j)], 0);
                }
            }
        }
        let diag = snf.diagonal();
        for w in diag.windows(2) {
            if w[0] == 0 {
                prop_assert_eq!(w[1], 0);
            } else {
                prop_assert_eq!(w[1] % w[0], 0);
            }
        }
    }

    #[test]
    fn alpha_reduce_is_idempotent_and_unit_stable(
        exps in proptest::collection::vec(0u64..40, 1..4),
        alpha in 1u64..6,
        unit in 0u64..4,
    ) {
        let units = FiniteAbelianGroup::cyclic(4);
        let labels = (0..exps.len()).map(|i| format!("p{i}")).collect();
        let f = FactorialMonoid::new(units, labels);
        let a = f.element(vec![unit], exps).unwrap();
        let r = f.alpha_reduce(&a, alpha);
        prop_assert_eq!(f.alpha_reduce(&r, alpha).clone(), r.clone());
        prop_assert!(r.exponents.iter().all(|&e| e < 2 * alpha));
        prop_assert_eq!(&r.unit, &a.unit);
    }

    #[test]
    fn power_to_idempotent_within_carrier_bound(factors in proptest::collection::vec(2u64..6, 1..3)) {
        // random abelian group tables; orders stay modest
        let mut chain = Vec::new();
        let mut acc = 1u64;
        for f in factors {
            acc = acc.checked_mul(f).unwrap();
            chain.push(acc);
        }
        let g = FiniteAbelianGroup::new(chain).unwrap();
        let s = from_abelian_group(&g);
        for a in 0..s.size() {
            let (n, e) = s.power_to_idempotent(a);
            prop_assert!(n <= s.size() as u64);
            prop_assert!(s.is_idempotent(e));
        }
        // constituent groups of distinct idempotents are disjoint
        let d = s.clifford_decomposition();
        let mut seen = vec![false; s.size()];
        for c in &d.constituents {
            for &m in &c.members {
                prop_assert!(!seen[m]);
                seen[m] = true;
            }
        }
    }

    #[test]
    fn hom_kernel_is_a_subgroup(
        d1 in 2u64..7,
        d2 in 2u64..7,
        img in 0u64..7,
    ) {
        let dom = FiniteAbelianGroup::cyclic(d1);
        let cod = FiniteAbelianGroup::cyclic(d2);
        // force a well-defined image: scale to an element killed by d1
        let candidate = cod.scalar_mul(img, &vec![d2 / cmonoids::util::gcd(d1, d2)]);
        let hom = GroupHom::new(dom.clone(), cod, vec![candidate]).unwrap();
        let kernel = hom_kernel(&hom).unwrap();
        prop_assert!(kernel.contains(&dom.zero()));
        for a in &kernel {
            for b in &kernel {
                prop_assert!(kernel.contains(&dom.add(a, b)));
            }
        }
    }

    #[test]
    fn product_set_contains_concatenations(
        left in proptest::collection::vec(0u64..2, 6),
        right in proptest::collection::vec(0u64..2, 6),
    ) {
        let s3 = FiniteGroup::symmetric3();
        let ls = GSequence::new(left.clone());
        let rs = GSequence::new(right.clone());
        if ls.is_empty() || rs.is_empty() {
            return Ok(());
        }
        let joined = GSequence::new(
            left.iter().zip(&right).map(|(&a, &b)| a + b).collect(),
        );
        let pl = product_set(&s3, &ls).unwrap();
        let pr = product_set(&s3, &rs).unwrap();
        let pj = product_set(&s3, &joined).unwrap();
        for &a in &pl {
            for &b in &pr {
                prop_assert!(pj.contains(&s3.op(a, b)));
            }
        }
    }

    #[test]
    fn semigroup_text_roundtrip(factors in proptest::collection::vec(2u64..5, 1..3)) {
        let g = FiniteAbelianGroup::new({
            let mut chain = Vec::new();
            let mut acc = 1u64;
            for f in factors {
                acc *= f;
                chain.push(acc);
            }
            chain
        }).unwrap();
        let s = from_abelian_group(&g);
        let back = FinCommSemigroup::from_text(&s.to_text()).unwrap();
        prop_assert_eq!(back.to_text(), s.to_text());
    }
}

/// quotient_by_relations against brute-force coset enumeration on torsion
/// ambients of order <= 512.
#[test]
fn quotient_matches_coset_enumeration() {
    let cases: Vec<(Vec<u64>, Vec<Vec<i64>>)> = vec![
        (vec![4, 8], vec![vec![2, 0]]),
        (vec![2, 4], vec![vec![1, 2]]),
        (vec![3, 9], vec![vec![0, 3], vec![1, 1]]),
        (vec![2, 2, 4], vec![vec![1, 1, 0]]),
        (vec![8, 8], vec![vec![4, 4]]),
        (vec![6, 6], vec![vec![2, 3], vec![3, 0]]),
    ];
    for (factors, relations) in cases {
        let ambient = FiniteAbelianGroup::new(factors.clone()).unwrap();
        assert!(ambient.order() <= 512);
        let computed = quotient_by_relations(0, &ambient, &relations).unwrap();
        // oracle: enumerate the subgroup generated by the relations, then
        // build the coset table and recover its structure
        let gens: Vec<Vec<u64>> = relations
            .iter()
            .map(|r| ambient.reduce(r).unwrap())
            .collect();
        let subgroup = ambient.subgroup_closure(&gens);
        let elements = ambient.elements();
        let mut coset = vec![usize::MAX; elements.len()];
        let mut reps: Vec<usize> = Vec::new();
        for (i, e) in elements.iter().enumerate() {
            if coset[i] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(i);
            for (j, f) in elements.iter().enumerate() {
                if subgroup.contains(&ambient.sub(f, e)) {
                    coset[j] = c;
                }
            }
        }
        let add = |a: usize, b: usize| {
            let s = ambient.add(&elements[reps[a]], &elements[reps[b]]);
            coset[ambient.index_of(&s)]
        };
        let oracle = structure_from_table(reps.len(), coset[0], &add);
        assert_eq!(
            computed.invariant_factors(),
            oracle.invariant_factors(),
            "ambient {factors:?}, relations {relations:?}"
        );
    }
}

/// The atom enumeration cap |G| is an engineering guard: re-running with
/// cap |G| + 2 must produce no new atoms for the shipped groups.
#[test]
fn atom_length_cap_guard() {
    for g in [
        FiniteGroup::cyclic(2),
        FiniteGroup::cyclic(3),
        FiniteGroup::cyclic(4),
        FiniteGroup::klein_four(),
        FiniteGroup::symmetric3(),
        FiniteGroup::cyclic(6),
    ] {
        let base = bg_atoms(&g, g.order() as u64).unwrap();
        let extended = bg_atoms(&g, g.order() as u64 + 2).unwrap();
        assert_eq!(
            base.len(),
            extended.len(),
            "new atoms appeared for {} beyond |G|",
            g.name()
        );
    }
}

/// Atoms returned by the enumerator admit no product-one splitting,
/// re-verified by an independent enumerator over sub-multisets.
#[test]
fn atoms_have_no_splittings_on_d4() {
    let d4 = FiniteGroup::dihedral(4);
    let atoms = bg_atoms(&d4, 5).unwrap();
    assert!(!atoms.is_empty());
    for atom in atoms.iter().take(40) {
        let m = &atom.multiplicities;
        let total = atom.len();
        let mut sub = vec![0u64; m.len()];
        let mut found = false;
        'outer: loop {
            let size: u64 = sub.iter().sum();
            if size > 0 && size < total {
                let s1 = GSequence::new(sub.clone());
                let s2 = GSequence::new(m.iter().zip(&sub).map(|(&a, &b)| a - b).collect());
                if is_product_one(&d4, &s1).unwrap() && is_product_one(&d4, &s2).unwrap() {
                    found = true;
                    break;
                }
            }
            // odometer bounded by m
            let mut i = sub.len();
            loop {
                if i == 0 {
                    break 'outer;
                }
                i -= 1;
                sub[i] += 1;
                if sub[i] <= m[i] {
                    break;
                }
                sub[i] = 0;
            }
        }
        assert!(!found, "atom {atom:?} splits");
    }
}

/// Dual-route check: the factored presentation of the minimal gallery
/// instance agrees with a dense presentation built from the raw membership
/// predicate, class semigroup and all.
#[test]
fn example43_factored_agrees_with_dense() {
    let spec = Example43Spec::with_default_bondings(vec![
        FiniteAbelianGroup::cyclic(2),
        FiniteAbelianGroup::trivial(),
    ])
    .unwrap();
    let inst = build_example43(&spec, &Caps::default()).unwrap();
    let factored = &inst.presentation;
    let pattern = factored.factored_pattern().unwrap().clone();
    let FactoredPattern {
        sem,
        unit_images,
        prime_images,
        accept,
        ..
    } = pattern;
    let oracle = move |unit: usize, exps: &[u64]| -> bool {
        let mut acc = unit_images[unit];
        for (p, &e) in exps.iter().enumerate() {
            if e > 0 {
                acc = sem.op(acc, sem.multiple(e, prime_images[p]));
            }
        }
        accept[acc]
    };
    let dense = CMonoidPresentation::from_membership_oracle(
        factored.ambient().clone(),
        &oracle,
        None,
        &Caps::default(),
    )
    .unwrap();
    assert_eq!(dense.alphas(), factored.alphas());
    let cs_f = factored.class_semigroup().unwrap();
    let cs_d = dense.class_semigroup().unwrap();
    assert_eq!(cs_f.class_count(), cs_d.class_count());
    assert_eq!(cs_f.representatives, cs_d.representatives);
    for i in 0..cs_f.class_count() {
        assert_eq!(cs_f.is_h_class[i], cs_d.is_h_class[i]);
        assert_eq!(cs_f.is_unit_class[i], cs_d.is_unit_class[i]);
        assert_eq!(cs_f.is_star_class[i], cs_d.is_star_class[i]);
        for j in 0..cs_f.class_count() {
            assert_eq!(cs_f.carrier.op(i, j), cs_d.carrier.op(i, j));
        }
    }
    // membership agreement on random elements
    let mut rng = cmonoids::util::SplitMix64::new(7);
    let f = factored.ambient().clone();
    for _ in 0..2000 {
        let unit = f.units().element_at(rng.below(2) as usize);
        let exponents: Vec<u64> = (0..f.prime_count()).map(|_| rng.below(9)).collect();
        let a = FactorialElement { unit, exponents };
        assert_eq!(
            factored.membership(&a).unwrap(),
            dense.membership(&a).unwrap()
        );
    }
}

/// Presentation serialization is bit-exact.
#[test]
fn serialization_is_bit_exact() {
    let f = FactorialMonoid::free(2);
    let gens = vec![
        f.element(vec![], vec![1, 1]).unwrap(),
        f.element(vec![], vec![0, 1]).unwrap(),
        f.element(vec![], vec![3, 0]).unwrap(),
        f.element(vec![], vec![2, 0]).unwrap(),
    ];
    let h = CMonoidPresentation::from_generators(f, gens, None, &Caps::default()).unwrap();
    let text = h.to_text();
    let h2 = CMonoidPresentation::from_text(&text, &Caps::default()).unwrap();
    assert_eq!(h2.to_text(), text);
    let text3 = CMonoidPresentation::from_text(&h2.to_text(), &Caps::default())
        .unwrap()
        .to_text();
    assert_eq!(text3, text);
}

/// The reduced class semigroup of B(G) is a group exactly when G is
/// abelian, and in that case its one constituent carries the structure of
/// G itself.
#[test]
fn bg_reduced_class_semigroup_is_a_group_iff_abelian() {
    use cmonoids::cmonoid::seminormality;
    use cmonoids::productone::{bg_expected_flags, bg_presentation};

    for g in [
        FiniteGroup::cyclic(2),
        FiniteGroup::cyclic(3),
        FiniteGroup::cyclic(4),
        FiniteGroup::klein_four(),
        FiniteGroup::cyclic(6),
        FiniteGroup::symmetric3(),
        FiniteGroup::dihedral(4),
        FiniteGroup::quaternion8(),
    ] {
        let (_, krull_expected) = bg_expected_flags(&g);
        let h = bg_presentation(&g, &Caps::default()).unwrap();
        let cs = h.class_semigroup().unwrap();
        let (_, star) = seminormality(&cs);
        let is_group = star.clifford.is_union_of_groups && star.clifford.idempotents.len() == 1;
        assert_eq!(
            is_group,
            krull_expected,
            "C*(B({}),F) group-ness should match abelianness",
            g.name()
        );
        if let Some(abelian) = g.as_abelian() {
            let constituent = &star.clifford.constituents[0].group;
            assert!(
                cmonoids::abelian::are_isomorphic(constituent, &abelian),
                "C*(B({}),F) should be {abelian:?}, found {constituent:?}",
                g.name()
            );
        }
    }
}
