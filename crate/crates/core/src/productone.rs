//! Monoids of product-one sequences over finite groups.
//!
//! A sequence over a finite group G is a finite multiset of group elements;
//! it is product-one if its terms can be ordered so that their product is
//! the identity. The collection B(G) of all product-one sequences is a
//! submonoid of the free abelian monoid on G and is bridged here into a
//! certified presentation with trivial unit group: membership factors
//! through the group sum when G is abelian and is tabulated from the exact
//! product-set dynamic program otherwise.

use std::collections::HashMap;
use std::fmt;

use crate::abelian::FiniteAbelianGroup;
use crate::cmonoid::{CMonoidError, CMonoidPresentation, Caps, FactoredPattern, WindowOracle};
use crate::factorial::{FactorialElement, FactorialMonoid};
use crate::semigroup::FinCommSemigroup;
use crate::util::{total_cells, BitVec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupError {
    NotSquare,
    NoIdentity,
    NoInverse { element: usize },
    NotAssociative { a: usize, b: usize, c: usize },
    EmptySequence,
    TooLarge { order: usize, cap: usize },
}

impl fmt::Display for GroupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupError::NotSquare => write!(f, "multiplication table is not square"),
            GroupError::NoIdentity => write!(f, "no identity element"),
            GroupError::NoInverse { element } => write!(f, "element {element} has no inverse"),
            GroupError::NotAssociative { a, b, c } => {
                write!(f, "not associative at ({a},{b},{c})")
            }
            GroupError::EmptySequence => write!(f, "empty sequence has no product set"),
            GroupError::TooLarge { order, cap } => {
                write!(f, "group of order {order} exceeds cap {cap}")
            }
        }
    }
}

impl std::error::Error for GroupError {}

/// Product-set masks are machine words, so the dense product-one pipeline
/// handles groups up to this order.
pub const MASK_GROUP_CAP: usize = 64;

/// A finite group as a Cayley table. Not required to be abelian.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    n: usize,
    table: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
    name: String,
    labels: Vec<String>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.name, self.n)
    }
}

impl FiniteGroup {
    pub fn from_table(
        table: Vec<Vec<usize>>,
        name: &str,
        labels: Option<Vec<String>>,
    ) -> Result<Self, GroupError> {
        let n = table.len();
        let mut flat = Vec::with_capacity(n * n);
        for row in &table {
            if row.len() != n {
                return Err(GroupError::NotSquare);
            }
            for &v in row {
                if v >= n {
                    return Err(GroupError::NotSquare);
                }
                flat.push(v);
            }
        }
        let op = |a: usize, b: usize| flat[a * n + b];
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| op(e, x) == x && op(x, e) == x))
            .ok_or(GroupError::NoIdentity)?;
        let mut inverse = vec![usize::MAX; n];
        for a in 0..n {
            match (0..n).find(|&b| op(a, b) == identity && op(b, a) == identity) {
                Some(b) => inverse[a] = b,
                None => return Err(GroupError::NoInverse { element: a }),
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = op(a, b);
                for c in 0..n {
                    if op(ab, c) != op(a, op(b, c)) {
                        return Err(GroupError::NotAssociative { a, b, c });
                    }
                }
            }
        }
        let labels = labels.unwrap_or_else(|| (0..n).map(|i| format!("g{i}")).collect());
        Ok(FiniteGroup {
            n,
            table: flat,
            identity,
            inverse,
            name: name.to_string(),
            labels,
        })
    }

    pub fn cyclic(n: u64) -> Self {
        let n = n.max(1) as usize;
        let table: Vec<Vec<usize>> = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        let labels = (0..n).map(|i| i.to_string()).collect();
        FiniteGroup::from_table(table, &format!("Z/{n}"), Some(labels)).expect("cyclic group")
    }

    pub fn klein_four() -> Self {
        let mut g = FiniteGroup::cyclic(2).direct_product(&FiniteGroup::cyclic(2));
        g.name = "Z/2+Z/2".into();
        g
    }

    /// Dihedral group of order 2n: rotations r^i and reflections s r^i.
    pub fn dihedral(n: usize) -> Self {
        assert!(n >= 1);
        let order = 2 * n;
        // index i < n: r^i; index n + i: s r^i
        let op = |a: usize, b: usize| -> usize {
            let (ra, sa) = (a % n, a >= n);
            let (rb, sb) = (b % n, b >= n);
            // (s^sa r^ra)(s^sb r^rb) = s^(sa+sb) r^(±ra + rb)
            let r = if sb { (n - ra) % n + rb } else { ra + rb } % n;
            let s = sa ^ sb;
            if s {
                n + r
            } else {
                r
            }
        };
        let table: Vec<Vec<usize>> = (0..order)
            .map(|a| (0..order).map(|b| op(a, b)).collect())
            .collect();
        let labels: Vec<String> = (0..order)
            .map(|i| {
                if i < n {
                    if i == 0 {
                        "e".to_string()
                    } else {
                        format!("r{i}")
                    }
                } else if i == n {
                    "s".to_string()
                } else {
                    format!("sr{}", i - n)
                }
            })
            .collect();
        FiniteGroup::from_table(table, &format!("D{n}"), Some(labels)).expect("dihedral group")
    }

    /// The symmetric group on three letters, elements as permutations.
    pub fn symmetric3() -> Self {
        let perms: [[usize; 3]; 6] = [
            [0, 1, 2], // e
            [1, 0, 2], // (12)
            [2, 1, 0], // (13)
            [0, 2, 1], // (23)
            [1, 2, 0], // (123)
            [2, 0, 1], // (132)
        ];
        let labels = ["e", "(12)", "(13)", "(23)", "(123)", "(132)"];
        let compose = |a: &[usize; 3], b: &[usize; 3]| -> [usize; 3] {
            // (a*b)(x) = a(b(x))
            [a[b[0]], a[b[1]], a[b[2]]]
        };
        let idx = |p: &[usize; 3]| perms.iter().position(|q| q == p).unwrap();
        let table: Vec<Vec<usize>> = perms
            .iter()
            .map(|a| perms.iter().map(|b| idx(&compose(a, b))).collect())
            .collect();
        FiniteGroup::from_table(
            table,
            "S3",
            Some(labels.iter().map(|s| s.to_string()).collect()),
        )
        .expect("symmetric group")
    }

    /// Quaternion group {±1, ±i, ±j, ±k}.
    pub fn quaternion8() -> Self {
        // encode q = (sign, axis) with axis 0=1, 1=i, 2=j, 3=k
        // multiplication of units: i*j = k, j*k = i, k*i = j, x*x = -1
        let mul = |a: usize, b: usize| -> usize {
            let (sa, xa) = (a / 4, a % 4);
            let (sb, xb) = (b / 4, b % 4);
            let (s, x) = match (xa, xb) {
                (0, y) => (0, y),
                (y, 0) => (0, y),
                (y, z) if y == z => (1, 0),
                (1, 2) => (0, 3),
                (2, 3) => (0, 1),
                (3, 1) => (0, 2),
                (2, 1) => (1, 3),
                (3, 2) => (1, 1),
                (1, 3) => (1, 2),
                _ => unreachable!(),
            };
            ((s + sa + sb) % 2) * 4 + x
        };
        let table: Vec<Vec<usize>> = (0..8)
            .map(|a| (0..8).map(|b| mul(a, b)).collect())
            .collect();
        let labels = ["1", "i", "j", "k", "-1", "-i", "-j", "-k"];
        FiniteGroup::from_table(
            table,
            "Q8",
            Some(labels.iter().map(|s| s.to_string()).collect()),
        )
        .expect("quaternion group")
    }

    pub fn direct_product(&self, other: &FiniteGroup) -> Self {
        let n = self.n * other.n;
        let idx = |a: usize, b: usize| a * other.n + b;
        let mut table = vec![vec![0usize; n]; n];
        for a1 in 0..self.n {
            for b1 in 0..other.n {
                for a2 in 0..self.n {
                    for b2 in 0..other.n {
                        table[idx(a1, b1)][idx(a2, b2)] = idx(self.op(a1, a2), other.op(b1, b2));
                    }
                }
            }
        }
        let labels = (0..self.n)
            .flat_map(|a| {
                (0..other.n).map(move |b| format!("({},{})", self.labels[a], other.labels[b]))
            })
            .collect();
        FiniteGroup::from_table(
            table,
            &format!("{}x{}", self.name, other.name),
            Some(labels),
        )
        .expect("direct product")
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn op(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.n).all(|a| (a..self.n).all(|b| self.op(a, b) == self.op(b, a)))
    }

    /// Subgroup generated by all commutators g^-1 h^-1 g h, as a sorted list.
    pub fn commutator_subgroup(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        for g in 0..self.n {
            for h in 0..self.n {
                let c = self.op(self.op(self.inverse(g), self.inverse(h)), self.op(g, h));
                if !gens.contains(&c) {
                    gens.push(c);
                }
            }
        }
        // closure
        let mut seen = vec![false; self.n];
        seen[self.identity] = true;
        let mut queue = vec![self.identity];
        while let Some(x) = queue.pop() {
            for &g in &gens {
                let y = self.op(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push(y);
                }
            }
        }
        (0..self.n).filter(|&x| seen[x]).collect()
    }

    /// Abelian Cayley structure, for abelian groups only.
    pub fn as_abelian(&self) -> Option<FiniteAbelianGroup> {
        if !self.is_abelian() {
            return None;
        }
        Some(crate::abelian::structure_from_table(
            self.n,
            self.identity,
            &|a, b| self.op(a, b),
        ))
    }
}

/// A sequence over G: a multiset given by its multiplicity vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GSequence {
    pub multiplicities: Vec<u64>,
}

impl GSequence {
    pub fn new(multiplicities: Vec<u64>) -> Self {
        GSequence { multiplicities }
    }

    pub fn empty(group_order: usize) -> Self {
        GSequence {
            multiplicities: vec![0; group_order],
        }
    }

    pub fn len(&self) -> u64 {
        self.multiplicities.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn display(&self, group: &FiniteGroup) -> String {
        let mut parts = Vec::new();
        for (g, &m) in self.multiplicities.iter().enumerate() {
            for _ in 0..m {
                parts.push(group.labels()[g].clone());
            }
        }
        if parts.is_empty() {
            "()".to_string()
        } else {
            format!("({})", parts.join("·"))
        }
    }
}

/// The set of all products of the terms of S over all orderings, computed by
/// dynamic programming over sub-multisets (state = consumed multiset,
/// value = reachable products).
pub fn product_set(group: &FiniteGroup, seq: &GSequence) -> Result<Vec<usize>, GroupError> {
    if seq.is_empty() {
        return Err(GroupError::EmptySequence);
    }
    if group.order() > MASK_GROUP_CAP {
        return Err(GroupError::TooLarge {
            order: group.order(),
            cap: MASK_GROUP_CAP,
        });
    }
    let mask = product_mask(group, &seq.multiplicities, &mut HashMap::new());
    Ok((0..group.order()).filter(|&g| mask >> g & 1 == 1).collect())
}

fn product_mask(group: &FiniteGroup, mult: &[u64], memo: &mut HashMap<Vec<u64>, u64>) -> u64 {
    if mult.iter().all(|&m| m == 0) {
        return 1 << group.identity();
    }
    if let Some(&m) = memo.get(mult) {
        return m;
    }
    let mut out = 0u64;
    for g in 0..mult.len() {
        if mult[g] == 0 {
            continue;
        }
        let mut rest = mult.to_vec();
        rest[g] -= 1;
        let sub = product_mask(group, &rest, memo);
        for x in 0..group.order() {
            if sub >> x & 1 == 1 {
                out |= 1 << group.op(x, g);
            }
        }
    }
    memo.insert(mult.to_vec(), out);
    out
}

/// Is S a product-one sequence? The empty sequence is the identity of B(G)
/// and counts as product-one.
pub fn is_product_one(group: &FiniteGroup, seq: &GSequence) -> Result<bool, GroupError> {
    if seq.is_empty() {
        return Ok(true);
    }
    Ok(product_set(group, seq)?.contains(&group.identity()))
}

/// All atoms of B(G) with length in [1, length_cap]: product-one sequences
/// admitting no splitting into two nonempty product-one sub-multisets.
pub fn bg_atoms(group: &FiniteGroup, length_cap: u64) -> Result<Vec<GSequence>, GroupError> {
    if group.order() > MASK_GROUP_CAP {
        return Err(GroupError::TooLarge {
            order: group.order(),
            cap: MASK_GROUP_CAP,
        });
    }
    let n = group.order();
    let mut memo: HashMap<Vec<u64>, u64> = HashMap::new();
    let one_bit = 1u64 << group.identity();
    let mut atoms = Vec::new();
    let mut mult = vec![0u64; n];
    enumerate_multisets(&mut mult, 0, length_cap, &mut |m: &[u64]| {
        if m.iter().all(|&x| x == 0) {
            return;
        }
        if product_mask(group, m, &mut memo) & one_bit == 0 {
            return;
        }
        // splitting scan over proper nonempty sub-multisets
        let mut sub = vec![0u64; n];
        let splittable = scan_splittings(group, m, &mut sub, 0, &mut memo, one_bit);
        if !splittable {
            atoms.push(GSequence::new(m.to_vec()));
        }
    });
    Ok(atoms)
}

fn enumerate_multisets(
    mult: &mut Vec<u64>,
    from: usize,
    remaining: u64,
    f: &mut dyn FnMut(&[u64]),
) {
    if from == mult.len() {
        f(mult);
        return;
    }
    for v in 0..=remaining {
        mult[from] = v;
        enumerate_multisets(mult, from + 1, remaining - v, f);
    }
    mult[from] = 0;
}

fn scan_splittings(
    group: &FiniteGroup,
    full: &[u64],
    sub: &mut Vec<u64>,
    from: usize,
    memo: &mut HashMap<Vec<u64>, u64>,
    one_bit: u64,
) -> bool {
    if from == full.len() {
        let size: u64 = sub.iter().sum();
        let total: u64 = full.iter().sum();
        if size == 0 || size == total {
            return false;
        }
        if product_mask(group, sub, memo) & one_bit == 0 {
            return false;
        }
        let complement: Vec<u64> = full.iter().zip(sub.iter()).map(|(&a, &b)| a - b).collect();
        return product_mask(group, &complement, memo) & one_bit != 0;
    }
    for v in 0..=full[from] {
        sub[from] = v;
        if scan_splittings(group, full, sub, from + 1, memo, one_bit) {
            sub[from] = 0;
            return true;
        }
    }
    sub[from] = 0;
    false
}

/// Set of lengths of a product-one sequence inside B(G): counts of atoms in
/// each factorization into atoms.
pub fn sequence_lengths(_group: &FiniteGroup, seq: &GSequence, atoms: &[GSequence]) -> Vec<u64> {
    let mut memo: HashMap<Vec<u64>, Vec<u64>> = HashMap::new();
    fn go(mult: &[u64], atoms: &[GSequence], memo: &mut HashMap<Vec<u64>, Vec<u64>>) -> Vec<u64> {
        if mult.iter().all(|&m| m == 0) {
            return vec![0];
        }
        if let Some(v) = memo.get(mult) {
            return v.clone();
        }
        let mut lengths = std::collections::BTreeSet::new();
        for atom in atoms {
            if atom.multiplicities.iter().zip(mult).all(|(&a, &m)| a <= m) {
                let rest: Vec<u64> = mult
                    .iter()
                    .zip(&atom.multiplicities)
                    .map(|(&m, &a)| m - a)
                    .collect();
                for l in go(&rest, atoms, memo) {
                    lengths.insert(l + 1);
                }
            }
        }
        let out: Vec<u64> = lengths.into_iter().collect();
        memo.insert(mult.to_vec(), out.clone());
        out
    }
    go(&seq.multiplicities, atoms, &mut memo)
}

/// Expected structural flags from the group alone: seminormality of B(G)
/// holds iff the commutator subgroup has at most two elements, and B(G) is
/// Krull iff G is abelian.
pub fn bg_expected_flags(group: &FiniteGroup) -> (bool, bool) {
    let commutator = group.commutator_subgroup();
    (commutator.len() <= 2, group.is_abelian())
}

/// Window oracle evaluating product-one membership in bulk: a graded pass
/// over the window computes each cell's product set from its predecessors.
struct ProductOneOracle<'a> {
    group: &'a FiniteGroup,
}

impl WindowOracle for ProductOneOracle<'_> {
    fn fill(&self, unit_count: usize, dims: &[u64]) -> BitVec {
        assert_eq!(unit_count, 1, "B(G) has trivial units");
        let n = self.group.order();
        assert_eq!(dims.len(), n);
        let cells = total_cells(dims);
        let strides = crate::util::strides(dims);
        // mask_mul[m][g] for masks over the group
        let order = self.group.order();
        let mut masks: Vec<u64> = vec![0; cells];
        let mut bits = BitVec::zeros(cells);
        let one_bit = 1u64 << self.group.identity();
        // row-major iteration visits all predecessors (smaller digits) first
        let mut digits = vec![0u64; n];
        for cell in 0..cells {
            let mut mask = 0u64;
            if digits.iter().all(|&d| d == 0) {
                mask = one_bit;
            } else {
                for (g, &d) in digits.iter().enumerate() {
                    if d == 0 {
                        continue;
                    }
                    let sub = masks[cell - strides[g]];
                    for x in 0..order {
                        if sub >> x & 1 == 1 {
                            mask |= 1 << self.group.op(x, g);
                        }
                    }
                }
            }
            masks[cell] = mask;
            if mask & one_bit != 0 {
                bits.set(cell, true);
            }
            for p in (0..n).rev() {
                digits[p] += 1;
                if digits[p] < dims[p] {
                    break;
                }
                digits[p] = 0;
            }
        }
        bits
    }
}

/// Certified presentation of B(G) inside F(G): primes are the group
/// elements, units are trivial, generators are the atoms. Abelian groups
/// use the factored backend through the group sum; nonabelian groups use a
/// dense pattern certified against the product-set dynamic program.
pub fn bg_presentation(
    group: &FiniteGroup,
    caps: &Caps,
) -> Result<CMonoidPresentation, CMonoidError> {
    let ambient = FactorialMonoid::new(FiniteAbelianGroup::trivial(), group.labels().to_vec());
    let atoms = bg_atoms(group, group.order() as u64)
        .map_err(|e| CMonoidError::InvalidPattern(e.to_string()))?;
    let generators: Vec<FactorialElement> = atoms
        .iter()
        .map(|a| FactorialElement {
            unit: vec![],
            exponents: a.multiplicities.clone(),
        })
        .collect();
    if group.is_abelian() {
        // membership factors through the group sum
        let table: Vec<Vec<usize>> = (0..group.order())
            .map(|a| (0..group.order()).map(|b| group.op(a, b)).collect())
            .collect();
        let sem = FinCommSemigroup::validate(table, Some(group.labels().to_vec()))?;
        let mut accept = vec![false; group.order()];
        accept[group.identity()] = true;
        let pattern = FactoredPattern {
            sem,
            identity: group.identity(),
            unit_images: vec![group.identity()],
            prime_images: (0..group.order()).collect(),
            accept,
        };
        let mut pres = CMonoidPresentation::from_factored(ambient, pattern, caps)?;
        pres.set_generators(generators);
        Ok(pres)
    } else {
        let oracle = ProductOneOracle { group };
        CMonoidPresentation::from_window_oracle(ambient, &oracle, Some(generators), None, caps)
    }
}
