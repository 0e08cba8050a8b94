//! Finite commutative semigroups as Cayley tables.
//!
//! Provides idempotents, the Rees order on idempotents, powers to
//! idempotency, constituent (maximal) groups, and the union-of-groups
//! (Clifford) decomposition.

use std::fmt;

use crate::abelian::{structure_from_table, FiniteAbelianGroup};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemigroupError {
    NotSquare,
    EntryOutOfRange {
        row: usize,
        col: usize,
        value: usize,
    },
    NotCommutative {
        a: usize,
        b: usize,
    },
    NotAssociative {
        a: usize,
        b: usize,
        c: usize,
    },
    NotIdempotent {
        element: usize,
    },
    NotClosed {
        a: usize,
        b: usize,
    },
    Parse(String),
}

impl fmt::Display for SemigroupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemigroupError::NotSquare => write!(f, "operation table is not square"),
            SemigroupError::EntryOutOfRange { row, col, value } => {
                write!(f, "entry ({row},{col}) = {value} out of range")
            }
            SemigroupError::NotCommutative { a, b } => {
                write!(f, "not commutative: {a}+{b} != {b}+{a}")
            }
            SemigroupError::NotAssociative { a, b, c } => {
                write!(f, "not associative at witness ({a},{b},{c})")
            }
            SemigroupError::NotIdempotent { element } => {
                write!(f, "element {element} is not idempotent")
            }
            SemigroupError::NotClosed { a, b } => {
                write!(f, "subset not closed: {a}+{b} escapes")
            }
            SemigroupError::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for SemigroupError {}

/// Full associativity check is n^3; above this cap validation samples
/// random triples instead and records that it did.
pub const ASSOCIATIVITY_CAP: usize = 512;

/// A finite commutative semigroup on indices `0..n`, written additively.
#[derive(Clone, PartialEq, Eq)]
pub struct FinCommSemigroup {
    n: usize,
    table: Vec<usize>,
    labels: Option<Vec<String>>,
    assoc_exhaustive: bool,
}

impl fmt::Debug for FinCommSemigroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinCommSemigroup(n={})", self.n)
    }
}

impl FinCommSemigroup {
    /// Validates commutativity and associativity of the given table.
    pub fn validate(
        table: Vec<Vec<usize>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, SemigroupError> {
        let n = table.len();
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(SemigroupError::NotSquare);
            }
            for (j, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(SemigroupError::EntryOutOfRange {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                flat.push(v);
            }
        }
        if let Some(ref ls) = labels {
            if ls.len() != n {
                return Err(SemigroupError::NotSquare);
            }
        }
        let s = FinCommSemigroup {
            n,
            table: flat,
            labels,
            assoc_exhaustive: true,
        };
        for a in 0..n {
            for b in a + 1..n {
                if s.op(a, b) != s.op(b, a) {
                    return Err(SemigroupError::NotCommutative { a, b });
                }
            }
        }
        let mut s = s;
        if n <= ASSOCIATIVITY_CAP {
            for a in 0..n {
                for b in a..n {
                    let ab = s.op(a, b);
                    for c in b..n {
                        if s.op(ab, c) != s.op(a, s.op(b, c)) {
                            return Err(SemigroupError::NotAssociative { a, b, c });
                        }
                    }
                }
            }
        } else {
            s.assoc_exhaustive = false;
            let mut rng = crate::util::SplitMix64::new(0x5eed);
            for _ in 0..(16 * n) {
                let a = rng.below(n as u64) as usize;
                let b = rng.below(n as u64) as usize;
                let c = rng.below(n as u64) as usize;
                if s.op(s.op(a, b), c) != s.op(a, s.op(b, c)) {
                    return Err(SemigroupError::NotAssociative { a, b, c });
                }
            }
        }
        Ok(s)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn op(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b]
    }

    pub fn was_associativity_exhaustive(&self) -> bool {
        self.assoc_exhaustive
    }

    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(ls) => ls[i].clone(),
            None => i.to_string(),
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn set_labels(&mut self, labels: Vec<String>) {
        assert_eq!(labels.len(), self.n);
        self.labels = Some(labels);
    }

    /// n * a (n >= 1) by repeated addition.
    pub fn multiple(&self, n: u64, a: usize) -> usize {
        assert!(n >= 1);
        // binary powering; associativity makes this valid
        let mut k = n - 1;
        let mut acc = a;
        let mut base = a;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.op(acc, base);
            }
            base = self.op(base, base);
            k >>= 1;
        }
        acc
    }

    pub fn is_idempotent(&self, a: usize) -> bool {
        self.op(a, a) == a
    }

    /// {x : x + x = x}, nonempty for any finite commutative semigroup.
    pub fn idempotents(&self) -> Vec<usize> {
        (0..self.n).filter(|&x| self.is_idempotent(x)).collect()
    }

    /// Identity element, if one exists.
    pub fn identity(&self) -> Option<usize> {
        (0..self.n).find(|&e| (0..self.n).all(|x| self.op(e, x) == x))
    }

    /// Sum of all idempotents; checked to be <= every idempotent in the
    /// Rees order (e <= f iff e + f = e).
    pub fn rees_smallest_idempotent(&self) -> usize {
        let idems = self.idempotents();
        assert!(
            !idems.is_empty(),
            "finite commutative semigroup has an idempotent"
        );
        let mut e = idems[0];
        for &f in &idems[1..] {
            e = self.op(e, f);
        }
        for &f in &idems {
            debug_assert_eq!(self.op(e, f), e, "Rees minimality violated");
        }
        e
    }

    /// Minimal n >= 1 with n*a idempotent, together with that idempotent.
    /// Terminates with n <= size for finite semigroups.
    pub fn power_to_idempotent(&self, a: usize) -> (u64, usize) {
        let mut cur = a;
        let mut n = 1u64;
        loop {
            if self.is_idempotent(cur) {
                return (n, cur);
            }
            cur = self.op(cur, a);
            n += 1;
            debug_assert!(n <= self.n as u64 + 1);
        }
    }

    /// Maximal group at the idempotent e: elements x with x + e = x that have
    /// an inverse relative to e. Returns the member set and abstract group.
    pub fn constituent_group(&self, e: usize) -> Result<ConstituentGroup, SemigroupError> {
        if !self.is_idempotent(e) {
            return Err(SemigroupError::NotIdempotent { element: e });
        }
        let mut members = Vec::new();
        for x in 0..self.n {
            if self.op(x, e) != x {
                continue;
            }
            if (0..self.n).any(|y| self.op(x, y) == e) {
                members.push(x);
            }
        }
        let pos: std::collections::HashMap<usize, usize> =
            members.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let e_pos = pos[&e];
        let add = |a: usize, b: usize| pos[&self.op(members[a], members[b])];
        let group = structure_from_table(members.len(), e_pos, &add);
        Ok(ConstituentGroup {
            idempotent: e,
            members,
            group,
        })
    }

    /// Clifford decomposition: constituent groups over all idempotents, plus
    /// whether they cover the carrier (union of groups).
    pub fn clifford_decomposition(&self) -> CliffordDecomposition {
        let idems = self.idempotents();
        let mut constituents = Vec::new();
        let mut covered = vec![false; self.n];
        for &e in &idems {
            let cg = self.constituent_group(e).expect("e is idempotent");
            for &x in &cg.members {
                debug_assert!(!covered[x], "constituent groups must be disjoint");
                covered[x] = true;
            }
            constituents.push(cg);
        }
        let non_group_witness = covered.iter().position(|&c| !c);
        CliffordDecomposition {
            smallest_idempotent: self.rees_smallest_idempotent(),
            idempotents: idems,
            constituents,
            is_union_of_groups: non_group_witness.is_none(),
            non_group_witness,
        }
    }

    /// Restriction to a closed subset; errors with a witness if the subset is
    /// not closed under the operation. Returns the sub-semigroup together
    /// with the member list mapping new indices to old ones.
    pub fn subsemigroup(
        &self,
        subset: &[usize],
    ) -> Result<(FinCommSemigroup, Vec<usize>), SemigroupError> {
        let mut pos = vec![usize::MAX; self.n];
        for (i, &x) in subset.iter().enumerate() {
            pos[x] = i;
        }
        let m = subset.len();
        let mut table = vec![vec![0usize; m]; m];
        for i in 0..m {
            for j in 0..m {
                let r = self.op(subset[i], subset[j]);
                if pos[r] == usize::MAX {
                    return Err(SemigroupError::NotClosed {
                        a: subset[i],
                        b: subset[j],
                    });
                }
                table[i][j] = pos[r];
            }
        }
        let labels = self
            .labels
            .as_ref()
            .map(|ls| subset.iter().map(|&x| ls[x].clone()).collect());
        let sub = FinCommSemigroup::validate(table, labels)?;
        Ok((sub, subset.to_vec()))
    }

    /// Plain integer-matrix text block: one row per element.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.op(i, j).to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, SemigroupError> {
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: Result<Vec<usize>, _> = line.split_whitespace().map(str::parse).collect();
            rows.push(row.map_err(|e| SemigroupError::Parse(e.to_string()))?);
        }
        FinCommSemigroup::validate(rows, None)
    }
}

/// A constituent group: member indices plus the abstract group structure.
#[derive(Clone, Debug)]
pub struct ConstituentGroup {
    pub idempotent: usize,
    pub members: Vec<usize>,
    pub group: FiniteAbelianGroup,
}

#[derive(Clone, Debug)]
pub struct CliffordDecomposition {
    pub idempotents: Vec<usize>,
    pub constituents: Vec<ConstituentGroup>,
    pub is_union_of_groups: bool,
    /// An element lying in no constituent group, when one exists.
    pub non_group_witness: Option<usize>,
    pub smallest_idempotent: usize,
}

impl CliffordDecomposition {
    pub fn constituent_at(&self, e: usize) -> Option<&ConstituentGroup> {
        self.constituents.iter().find(|c| c.idempotent == e)
    }
}

/// Build a finite abelian group as a semigroup table (used in tests and the
/// gallery constructions).
pub fn from_abelian_group(g: &FiniteAbelianGroup) -> FinCommSemigroup {
    let elems = g.elements();
    let n = elems.len();
    let mut table = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in 0..n {
            table[i][j] = g.index_of(&g.add(&elems[i], &elems[j]));
        }
    }
    FinCommSemigroup::validate(table, None).expect("group table is a semigroup")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2_table() -> FinCommSemigroup {
        FinCommSemigroup::validate(vec![vec![0, 1], vec![1, 0]], None).unwrap()
    }

    /// Two-element semilattice {e0, e1} with e0 + e1 = e1.
    fn semilattice2() -> FinCommSemigroup {
        FinCommSemigroup::validate(vec![vec![0, 1], vec![1, 1]], None).unwrap()
    }

    #[test]
    fn validate_accepts_small_tables() {
        assert!(FinCommSemigroup::validate(vec![vec![0]], None).is_ok());
        assert!(z2_table().size() == 2);
    }

    #[test]
    fn validate_rejects_violations() {
        // constructed non-associative commutative table:
        // 0+0=0, 0+1=1, 1+1=0 over {0,1,2} with stray entries
        let bad = vec![vec![1, 1, 2], vec![1, 2, 0], vec![2, 0, 0]];
        let err = FinCommSemigroup::validate(bad, None);
        assert!(matches!(err, Err(SemigroupError::NotAssociative { .. })));

        let noncomm = vec![vec![0, 0], vec![1, 0]];
        let err = FinCommSemigroup::validate(noncomm, None);
        assert!(matches!(err, Err(SemigroupError::NotCommutative { .. })));

        let range = vec![vec![0, 5], vec![5, 0]];
        assert!(matches!(
            FinCommSemigroup::validate(range, None),
            Err(SemigroupError::EntryOutOfRange { .. })
        ));
    }

    #[test]
    fn idempotents_examples() {
        assert_eq!(z2_table().idempotents(), vec![0]);
        assert_eq!(semilattice2().idempotents(), vec![0, 1]);
    }

    #[test]
    fn rees_smallest() {
        assert_eq!(z2_table().rees_smallest_idempotent(), 0);
        assert_eq!(semilattice2().rees_smallest_idempotent(), 1);
    }

    #[test]
    fn power_to_idempotent_examples() {
        let s = semilattice2();
        assert_eq!(s.power_to_idempotent(1), (1, 1));
        // generator of Z/4 -> (4, 0)
        let g = FiniteAbelianGroup::cyclic(4);
        let z4 = from_abelian_group(&g);
        assert_eq!(z4.power_to_idempotent(1), (4, 0));
        // bound n <= |S|
        for a in 0..z4.size() {
            let (n, e) = z4.power_to_idempotent(a);
            assert!(n <= z4.size() as u64);
            assert!(z4.is_idempotent(e));
        }
    }

    #[test]
    fn constituent_groups() {
        let z2 = z2_table();
        let cg = z2.constituent_group(0).unwrap();
        assert_eq!(cg.members, vec![0, 1]);
        assert_eq!(cg.group.invariant_factors(), &[2]);

        let s = semilattice2();
        let cg = s.constituent_group(0).unwrap();
        assert_eq!(cg.members, vec![0]);
        assert!(cg.group.is_trivial());

        assert!(matches!(
            z2.constituent_group(1),
            Err(SemigroupError::NotIdempotent { element: 1 })
        ));
    }

    #[test]
    fn clifford_on_groups_and_semilattices() {
        let z2 = z2_table();
        let d = z2.clifford_decomposition();
        assert!(d.is_union_of_groups);
        assert_eq!(d.idempotents.len(), 1);

        let s = semilattice2();
        let d = s.clifford_decomposition();
        assert!(d.is_union_of_groups);
        assert_eq!(d.constituents.len(), 2);
        assert_eq!(d.smallest_idempotent, 1);
    }

    #[test]
    fn clifford_union_matches_direct_recheck() {
        // x admits e with x+e = x and some y with x+y = e
        let samples = [z2_table(), semilattice2()];
        for s in &samples {
            let d = s.clifford_decomposition();
            let direct = (0..s.size()).all(|x| {
                s.idempotents()
                    .iter()
                    .any(|&e| s.op(x, e) == x && (0..s.size()).any(|y| s.op(x, y) == e))
            });
            assert_eq!(d.is_union_of_groups, direct);
        }
    }

    #[test]
    fn text_roundtrip() {
        let s = semilattice2();
        let text = s.to_text();
        assert_eq!(text, "0 1\n1 1\n");
        let back = FinCommSemigroup::from_text(&text).unwrap();
        assert_eq!(back.table, s.table);
    }

    #[test]
    fn subsemigroup_restriction() {
        let s = semilattice2();
        let (sub, map) = s.subsemigroup(&[1]).unwrap();
        assert_eq!(sub.size(), 1);
        assert_eq!(map, vec![1]);
        // {0} alone is closed in the semilattice
        assert!(s.subsemigroup(&[0]).is_ok());
        // {1} in Z/2 is not closed (1+1 = 0)
        assert!(z2_table().subsemigroup(&[1]).is_err());
    }
}
