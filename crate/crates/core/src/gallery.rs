//! Constructors for the concrete instances used across the test suites: the
//! two-prime non-seminormal example, the family of half-factorial dense
//! seminormal monoids built from a Clifford semigroup of groups G_i + Z/2,
//! and directly labeled class semigroups violating exactly one criterion
//! property each.

use std::fmt;

use crate::abelian::{AbelianError, FiniteAbelianGroup, GroupHom};
use crate::cmonoid::{CMonoidError, CMonoidPresentation, Caps, ClassSemigroup, FactoredPattern};
use crate::factorial::{FactorialElement, FactorialMonoid};
use crate::semigroup::{FinCommSemigroup, SemigroupError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GalleryError {
    InvalidChain(String),
    NonSurjectiveBonding { index: usize },
    CMonoid(String),
    Construction(String),
}

impl fmt::Display for GalleryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GalleryError::InvalidChain(msg) => write!(f, "invalid chain: {msg}"),
            GalleryError::NonSurjectiveBonding { index } => {
                write!(f, "bonding {index} is not surjective")
            }
            GalleryError::CMonoid(msg) | GalleryError::Construction(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for GalleryError {}

impl From<CMonoidError> for GalleryError {
    fn from(e: CMonoidError) -> Self {
        GalleryError::CMonoid(e.to_string())
    }
}

impl From<AbelianError> for GalleryError {
    fn from(e: AbelianError) -> Self {
        GalleryError::Construction(e.to_string())
    }
}

impl From<SemigroupError> for GalleryError {
    fn from(e: SemigroupError) -> Self {
        GalleryError::Construction(e.to_string())
    }
}

/// The two-prime instance H = [p1 p2, p1^(2k) p2 | k >= 0]: membership is
///   s = 0: only 1;  s = 1: t even or t = 1;  s >= 2: everything,
/// writing t = v_{p1}, s = v_{p2}. Its class [p1^2] is idempotent although
/// p1^2 is not a member, so H is not seminormal.
pub fn build_remark313(caps: &Caps) -> Result<CMonoidPresentation, GalleryError> {
    let ambient = FactorialMonoid::free(2);
    let oracle = |_unit: usize, e: &[u64]| -> bool {
        let (t, s) = (e[0], e[1]);
        match s {
            0 => t == 0,
            1 => t == 1 || t % 2 == 0,
            _ => true,
        }
    };
    Ok(CMonoidPresentation::from_membership_oracle(
        ambient, &oracle, None, caps,
    )?)
}

/// Chain data for the half-factorial family: strictly decreasing abelian
/// groups G_0 ⊋ … ⊋ G_n = 1 with surjective consecutive bondings. Composite
/// bondings are formed by composition, so compatibility is automatic.
#[derive(Clone, Debug)]
pub struct Example43Spec {
    pub groups: Vec<FiniteAbelianGroup>,
    pub bondings: Vec<GroupHom>,
}

impl Example43Spec {
    pub fn new(
        groups: Vec<FiniteAbelianGroup>,
        bondings: Vec<GroupHom>,
    ) -> Result<Self, GalleryError> {
        if groups.len() < 2 {
            return Err(GalleryError::InvalidChain(
                "need at least G_0 and G_1".into(),
            ));
        }
        if !groups.last().unwrap().is_trivial() {
            return Err(GalleryError::InvalidChain("G_n must be trivial".into()));
        }
        for w in groups.windows(2) {
            if w[1].order() >= w[0].order() {
                return Err(GalleryError::InvalidChain(
                    "orders must strictly decrease".into(),
                ));
            }
        }
        if bondings.len() != groups.len() - 1 {
            return Err(GalleryError::InvalidChain(
                "one bonding per consecutive pair".into(),
            ));
        }
        for (i, hom) in bondings.iter().enumerate() {
            if hom.domain() != &groups[i] || hom.codomain() != &groups[i + 1] {
                return Err(GalleryError::InvalidChain(format!(
                    "bonding {i} does not match the chain"
                )));
            }
            if !hom.is_surjective() {
                return Err(GalleryError::NonSurjectiveBonding { index: i });
            }
        }
        Ok(Example43Spec { groups, bondings })
    }

    /// Default bondings: align the trailing invariant factors and reduce,
    /// killing leading generators. Surjective whenever the trailing factors
    /// divide pairwise, which holds for the shipped chains.
    pub fn with_default_bondings(groups: Vec<FiniteAbelianGroup>) -> Result<Self, GalleryError> {
        let mut bondings = Vec::new();
        for w in groups.windows(2) {
            bondings.push(default_bonding(&w[0], &w[1])?);
        }
        Example43Spec::new(groups, bondings)
    }

    pub fn n(&self) -> usize {
        self.groups.len() - 1
    }
}

fn default_bonding(
    from: &FiniteAbelianGroup,
    to: &FiniteAbelianGroup,
) -> Result<GroupHom, GalleryError> {
    let r = from.rank();
    let r2 = to.rank();
    if r2 > r {
        return Err(GalleryError::InvalidChain(
            "no default bonding onto a higher-rank group".into(),
        ));
    }
    let mut images = Vec::with_capacity(r);
    for k in 0..r {
        if k < r - r2 {
            images.push(to.zero());
        } else {
            let j = k - (r - r2);
            let mut img = to.zero();
            img[j] = 1;
            images.push(img);
        }
    }
    let hom = GroupHom::new(from.clone(), to.clone(), images)
        .map_err(|e| GalleryError::InvalidChain(format!("default bonding: {e}")))?;
    if !hom.is_surjective() {
        return Err(GalleryError::NonSurjectiveBonding { index: 0 });
    }
    Ok(hom)
}

/// A built instance: the presentation B inside F = G_0 × F(C), the Clifford
/// semigroup C it was assembled from, and bookkeeping for the checks.
#[derive(Clone, Debug)]
pub struct Example43Instance {
    pub presentation: CMonoidPresentation,
    /// The Clifford semigroup C with constituents G_i + Z/2.
    pub clifford: FinCommSemigroup,
    /// Index in C of the idempotent e_i of every level.
    pub idempotent_indices: Vec<usize>,
    /// Index in C of the image of each unit element (the embedding of G_0
    /// into the constituent at e_0).
    pub iota: Vec<usize>,
    /// Level of each element of C.
    pub level_of: Vec<usize>,
}

/// Assemble C from the chain, embed F^x = G_0 through the canonical
/// monomorphism into C_0 = G_0 + Z/2, and present
/// B = { eps*S : iota(eps) + sigma(S) idempotent } through the sum map.
pub fn build_example43(
    spec: &Example43Spec,
    caps: &Caps,
) -> Result<Example43Instance, GalleryError> {
    let n = spec.n();
    let levels = &spec.groups;
    // composite bondings as element-index maps: map[i][j] for i <= j
    let elems: Vec<Vec<crate::abelian::Elem>> = levels.iter().map(|g| g.elements()).collect();
    let mut maps: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n + 1]; n + 1];
    for i in 0..=n {
        maps[i][i] = (0..elems[i].len()).collect();
        for j in i + 1..=n {
            let prev = maps[i][j - 1].clone();
            let hom = &spec.bondings[j - 1];
            maps[i][j] = prev
                .iter()
                .map(|&idx| levels[j].index_of(&hom.apply(&elems[j - 1][idx])))
                .collect();
        }
    }
    // carrier of C: (level, group element, Z/2 bit)
    let mut offset = vec![0usize; n + 2];
    for i in 0..=n {
        offset[i + 1] = offset[i] + 2 * elems[i].len();
    }
    let total = offset[n + 1];
    let encode = |i: usize, g: usize, b: usize| offset[i] + 2 * g + b;
    let level_of: Vec<usize> = {
        let mut lv = vec![0usize; total];
        for i in 0..=n {
            for x in offset[i]..offset[i + 1] {
                lv[x] = i;
            }
        }
        lv
    };
    let decode = |x: usize| -> (usize, usize, usize) {
        let i = level_of[x];
        let rest = x - offset[i];
        (i, rest / 2, rest % 2)
    };
    let mut table = vec![vec![0usize; total]; total];
    for x in 0..total {
        for y in 0..total {
            let (i, g, b) = decode(x);
            let (j, h, c) = decode(y);
            let k = i.max(j);
            let gi = maps[i][k][g];
            let hj = maps[j][k][h];
            let sum = levels[k].index_of(&levels[k].add(&elems[k][gi], &elems[k][hj]));
            table[x][y] = encode(k, sum, (b + c) % 2);
        }
    }
    let labels: Vec<String> = (0..total)
        .map(|x| {
            let (i, g, b) = decode(x);
            format!("c{i}.{g}.{b}")
        })
        .collect();
    let clifford = FinCommSemigroup::validate(table, Some(labels.clone()))?;

    let idempotent_indices: Vec<usize> = (0..=n).map(|i| encode(i, 0, 0)).collect();
    let units = levels[0].clone();
    let iota: Vec<usize> = (0..elems[0].len()).map(|g| encode(0, g, 0)).collect();
    let mut accept = vec![false; total];
    for &e in &idempotent_indices {
        accept[e] = true;
    }
    let ambient = FactorialMonoid::new(units, labels);
    let pattern = FactoredPattern {
        sem: clifford.clone(),
        identity: idempotent_indices[0],
        unit_images: iota.clone(),
        prime_images: (0..total).collect(),
        accept,
    };
    let presentation = CMonoidPresentation::from_factored(ambient, pattern, caps)?;
    Ok(Example43Instance {
        presentation,
        clifford,
        idempotent_indices,
        iota,
        level_of,
    })
}

/// A directly-built labeled class semigroup for exercising the criterion
/// checks in isolation. Representatives are placeholders; the carrier labels
/// carry the readable names.
#[derive(Clone, Debug)]
pub struct CriterionFixture {
    pub name: String,
    /// Which property this fixture violates, if any.
    pub violates: Option<&'static str>,
    pub cs: ClassSemigroup,
}

fn labeled_cs(
    table: Vec<Vec<usize>>,
    labels: Vec<String>,
    is_h_class: Vec<bool>,
    unit_class_of: Vec<usize>,
    identity_class: usize,
) -> ClassSemigroup {
    let k = table.len();
    let mut carrier = FinCommSemigroup::validate(table, None).expect("fixture table");
    carrier.set_labels(labels);
    ClassSemigroup {
        carrier,
        representatives: vec![
            FactorialElement {
                unit: vec![],
                exponents: vec![]
            };
            k
        ],
        is_h_class,
        is_unit_class: {
            let mut v = vec![false; k];
            for &u in &unit_class_of {
                v[u] = true;
            }
            v
        },
        is_star_class: vec![true; k],
        identity_class,
        prime_class: (0..k).collect(),
        class_has_prime: vec![true; k],
        unit_class_of,
    }
}

/// Negative fixtures: each one violates exactly one of the four properties,
/// plus nothing else, and a semilattice that passes everything.
pub fn fixture_semigroups() -> Vec<CriterionFixture> {
    let mut out = Vec::new();

    // P1: two constituents Z/3 with identity bonding; trivial units make the
    // bottom quotient Z/3.
    {
        let z3 = FiniteAbelianGroup::cyclic(3);
        let el = z3.elements();
        let enc = |lvl: usize, g: usize| lvl * 3 + g;
        let mut table = vec![vec![0usize; 6]; 6];
        for x in 0..6 {
            for y in 0..6 {
                let (i, g) = (x / 3, x % 3);
                let (j, h) = (y / 3, y % 3);
                let k = i.max(j);
                let sum = z3.index_of(&z3.add(&el[g], &el[h]));
                table[x][y] = enc(k, sum);
            }
        }
        let labels = vec!["e0", "a", "2a", "e1", "b", "2b"]
            .into_iter()
            .map(String::from)
            .collect();
        let mut is_h = vec![false; 6];
        is_h[enc(0, 0)] = true;
        is_h[enc(1, 0)] = true;
        out.push(CriterionFixture {
            name: "two Z/3 constituents".into(),
            violates: Some("P1"),
            cs: labeled_cs(table, labels, is_h, vec![0], 0),
        });
    }

    // P2: units Z/2 = {1, u}, C_1 = Z/4 with u landing on 2g, C_2 trivial.
    // The preimage of the bottom translates inside C_1 is all of C_1 but the
    // unit translates there are only {e1, 2g}.
    {
        // classes: 0=[1], 1=[u], 2=e1, 3=g, 4=2g, 5=3g, 6=e2
        let phi1 = |u: usize| if u == 0 { 0 } else { 2 }; // into Z/4 as offset
        let op = |x: usize, y: usize| -> usize {
            let lvl = |c: usize| match c {
                0 | 1 => 0,
                2..=5 => 1,
                _ => 2,
            };
            let (lx, ly) = (lvl(x), lvl(y));
            let k = lx.max(ly);
            if k == 2 {
                return 6;
            }
            if k == 0 {
                // unit group Z/2
                return (x + y) % 2;
            }
            // level 1: Z/4 written as 2 + (offset mod 4)
            let off = |c: usize| match lvl(c) {
                0 => phi1(c),
                _ => c - 2,
            };
            2 + (off(x) + off(y)) % 4
        };
        let table: Vec<Vec<usize>> = (0..7).map(|x| (0..7).map(|y| op(x, y)).collect()).collect();
        let labels = vec!["[1]", "[u]", "e1", "g", "2g", "3g", "e2"]
            .into_iter()
            .map(String::from)
            .collect();
        let mut is_h = vec![false; 7];
        is_h[0] = true;
        is_h[2] = true;
        is_h[6] = true;
        out.push(CriterionFixture {
            name: "collapsing bottom over Z/4".into(),
            violates: Some("P2"),
            cs: labeled_cs(table, labels, is_h, vec![0, 1], 0),
        });
    }

    // P3: units Z/2^3; C_1 and C_2 kill one generator each, the diamond
    // bottom kills everything, so the composite kernel is the whole unit
    // group while the kernel sum has index two.
    {
        let units: usize = 8; // bitmask over generators a, b, c
                              // classes: 0..8 units; 8..12 C_1 = Z/2^2 (bits b,c);
                              // 12..16 C_2 = Z/2^2 (bits a,c); 16 e3
        let lvl = |x: usize| match x {
            0..=7 => 0,
            8..=11 => 1,
            12..=15 => 2,
            _ => 3,
        };
        let to1 = |x: usize| match lvl(x) {
            0 => (x >> 1) & 3, // keep bits b,c
            1 => x - 8,
            _ => usize::MAX,
        };
        let to2 = |x: usize| match lvl(x) {
            0 => ((x & 1) << 1 | (x >> 2)) & 3, // keep bits a,c as (c,a)
            2 => x - 12,
            _ => usize::MAX,
        };
        // diamond join: e0 above e1, e2, both above e3 = e1 + e2
        let join = |a: usize, b: usize| -> usize {
            match (a.min(b), a.max(b)) {
                (0, l) => l,
                (1, 1) => 1,
                (2, 2) => 2,
                _ => 3,
            }
        };
        let op = move |x: usize, y: usize| -> usize {
            match join(lvl(x), lvl(y)) {
                0 => x ^ y,
                1 => 8 + (to1(x) ^ to1(y)),
                2 => 12 + (to2(x) ^ to2(y)),
                _ => 16,
            }
        };
        let table: Vec<Vec<usize>> = (0..17)
            .map(|x| (0..17).map(|y| op(x, y)).collect())
            .collect();
        let labels: Vec<String> = (0..17)
            .map(|x| match lvl(x) {
                0 => format!("u{x}"),
                1 => format!("v{}", x - 8),
                2 => format!("w{}", x - 12),
                _ => "e3".into(),
            })
            .collect();
        let mut is_h = vec![false; 17];
        is_h[0] = true;
        is_h[8] = true;
        is_h[12] = true;
        is_h[16] = true;
        out.push(CriterionFixture {
            name: "diamond with fat kernels".into(),
            violates: Some("P3"),
            cs: labeled_cs(table, labels, is_h, (0..units).collect(), 0),
        });
    }

    // P4: a diamond semilattice whose two middle idempotents are outside
    // C_H while their sum is inside.
    {
        // 0 = e0, 1 = f1, 2 = f2, 3 = f3 = f1 + f2
        let op = |x: usize, y: usize| -> usize {
            if x == y {
                return x;
            }
            if x == 0 {
                return y;
            }
            if y == 0 {
                return x;
            }
            3
        };
        let table: Vec<Vec<usize>> = (0..4).map(|x| (0..4).map(|y| op(x, y)).collect()).collect();
        let labels = vec!["e0", "f1", "f2", "f3"]
            .into_iter()
            .map(String::from)
            .collect();
        let is_h = vec![true, false, false, true];
        out.push(CriterionFixture {
            name: "semilattice with absorbing pair".into(),
            violates: Some("P4"),
            cs: labeled_cs(table, labels, is_h, vec![0], 0),
        });
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmonoid::seminormality;
    use crate::criterion::{build_context, criterion_on_context};

    #[test]
    fn remark313_membership_matches_displayed_set() {
        let h = build_remark313(&Caps::default()).unwrap();
        assert_eq!(h.alphas(), &[2, 2]);
        let f = h.ambient().clone();
        let m = |t: u64, s: u64| {
            h.membership(&f.element(vec![], vec![t, s]).unwrap())
                .unwrap()
        };
        assert!(m(0, 0));
        assert!(m(1, 1)); // p1 p2 is a generator
        assert!(!m(2, 0)); // p1^2 not in H
        assert!(m(3, 2)); // p1^3 p2^2 in the s >= 2 part
        assert!(m(4, 1)); // p1^4 p2
        assert!(!m(3, 1));
        assert!(!m(1, 0));
    }

    #[test]
    fn remark313_class_semigroup_has_nine_classes() {
        let h = build_remark313(&Caps::default()).unwrap();
        let cs = h.class_semigroup().unwrap();
        assert_eq!(cs.class_count(), 9);
        // [p1^2] = [p1^4]
        let f = h.ambient().clone();
        let p1sq = f.element(vec![], vec![2, 0]).unwrap();
        let p1quad = f.element(vec![], vec![4, 0]).unwrap();
        assert!(h.h_equivalent(&p1sq, &p1quad).unwrap());
        // [p1] and [p1^3] differ: witness x = p2
        let p1 = f.element(vec![], vec![1, 0]).unwrap();
        let p1cube = f.element(vec![], vec![3, 0]).unwrap();
        assert!(!h.h_equivalent(&p1, &p1cube).unwrap());
        // 3 idempotents: [1], [p1^2], [p2^2]
        let idems = cs.carrier.idempotents();
        assert_eq!(idems.len(), 3);
        let (sn, star) = seminormality(&cs);
        assert!(!sn);
        assert!(star.clifford.non_group_witness.is_some());
    }

    #[test]
    fn remark313_power_walks() {
        let h = build_remark313(&Caps::default()).unwrap();
        let cs = h.class_semigroup().unwrap();
        // [p1]: 2[p1] = [p1^2] is idempotent
        let f = h.ambient().clone();
        let p1 = f.element(vec![], vec![1, 0]).unwrap();
        let p1_class = crate::criterion::class_of_element(&h, &cs, &p1).unwrap();
        let (steps, e) = cs.carrier.power_to_idempotent(p1_class);
        assert_eq!(steps, 2);
        let p1sq = f.element(vec![], vec![2, 0]).unwrap();
        assert_eq!(
            e,
            crate::criterion::class_of_element(&h, &cs, &p1sq).unwrap()
        );
    }

    #[test]
    fn remark313_atoms_in_degree_box() {
        let h = build_remark313(&Caps::default()).unwrap();
        let atoms = crate::lengths::atoms_in_box(&h, 4).unwrap();
        let exps: Vec<Vec<u64>> = atoms.iter().map(|a| a.exponents.clone()).collect();
        assert!(exps.contains(&vec![0, 1])); // p2
        assert!(exps.contains(&vec![1, 1])); // p1 p2
        assert!(exps.contains(&vec![2, 1])); // p1^2 p2
        assert!(!exps.contains(&vec![0, 2])); // p2^2 = p2 * p2
    }

    #[test]
    fn remark313_not_seminormal_with_witness() {
        let h = build_remark313(&Caps::default()).unwrap();
        let w = h
            .seminormal_bruteforce(&Caps::default())
            .unwrap()
            .expect("not seminormal");
        assert_eq!(w.element.exponents, vec![3, 1]);
        assert_eq!(w.from_power, 2);
        // class group of the completion is trivial
        let cg = h.class_group_of_completion(&Caps::default()).unwrap();
        assert!(cg.is_trivial());
    }

    #[test]
    fn example43_minimal_instance() {
        let spec = Example43Spec::with_default_bondings(vec![
            FiniteAbelianGroup::cyclic(2),
            FiniteAbelianGroup::trivial(),
        ])
        .unwrap();
        let inst = build_example43(&spec, &Caps::default()).unwrap();
        assert_eq!(inst.clifford.size(), 6);
        let cs = inst.presentation.class_semigroup().unwrap();
        assert_eq!(cs.class_count(), 6);
        let (sn, _) = seminormality(&cs);
        assert!(sn);
        // carrier isomorphic to C through the prime classes
        let map: Vec<usize> = cs.prime_class.clone();
        let mut seen = map.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 6);
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(cs.carrier.op(map[a], map[b]), map[inst.clifford.op(a, b)]);
            }
        }
        // C_B = E(C*), C_units of order 2
        for c in 0..cs.class_count() {
            assert_eq!(cs.is_h_class[c], cs.carrier.is_idempotent(c));
        }
        assert_eq!(cs.units_group().invariant_factors(), &[2]);
    }

    #[test]
    fn example43_is_half_factorial_by_criterion() {
        let spec = Example43Spec::with_default_bondings(vec![
            FiniteAbelianGroup::cyclic(2),
            FiniteAbelianGroup::trivial(),
        ])
        .unwrap();
        let inst = build_example43(&spec, &Caps::default()).unwrap();
        let rep = crate::criterion::half_factorial_by_criterion(&inst.presentation).unwrap();
        assert!(rep.hypothesis_holds);
        assert_eq!(rep.verdict, Some(true), "{rep:?}");
    }

    #[test]
    fn invalid_chains_are_rejected() {
        let err = Example43Spec::with_default_bondings(vec![FiniteAbelianGroup::cyclic(2)]);
        assert!(matches!(err, Err(GalleryError::InvalidChain(_))));
        let err = Example43Spec::with_default_bondings(vec![
            FiniteAbelianGroup::cyclic(2),
            FiniteAbelianGroup::cyclic(2),
        ]);
        assert!(matches!(err, Err(GalleryError::InvalidChain(_))));
        // non-surjective bonding: Z/4 -> Z/4 doubling
        let z4 = FiniteAbelianGroup::cyclic(4);
        let doubling = GroupHom::new(z4.clone(), z4.clone(), vec![vec![2]]).unwrap();
        let err = Example43Spec::new(
            vec![z4.clone(), z4.clone(), FiniteAbelianGroup::trivial()],
            vec![
                doubling,
                GroupHom::new(z4, FiniteAbelianGroup::trivial(), vec![vec![]]).unwrap(),
            ],
        );
        assert!(matches!(
            err,
            Err(GalleryError::InvalidChain(_)) | Err(GalleryError::NonSurjectiveBonding { .. })
        ));
    }

    #[test]
    fn fixtures_violate_exactly_their_property() {
        for fixture in fixture_semigroups() {
            let ctx = build_context(&fixture.cs).expect(&fixture.name);
            let report = criterion_on_context(&ctx);
            let verdicts = [
                ("P1", report.p1.pass),
                ("P2", report.p2.pass),
                ("P3", report.p3.pass),
                ("P4", report.p4.pass),
            ];
            for (name, pass) in verdicts {
                if Some(name) == fixture.violates {
                    assert!(!pass, "{}: {name} should fail", fixture.name);
                } else {
                    assert!(pass, "{}: {name} should pass", fixture.name);
                }
            }
        }
    }
}
