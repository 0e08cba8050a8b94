//! Atoms, factorization lengths, and brute-force half-factoriality.
//!
//! All searches run over the elements of H whose total degree (number of
//! prime factors with multiplicity) is at most a caller-chosen cap, so
//! verdicts produced here are box-relative and say so.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::cmonoid::{CMonoidError, CMonoidPresentation, ClassSemigroup};
use crate::factorial::FactorialElement;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LengthsError {
    NotInMonoid,
    PreconditionFailed(String),
    CMonoid(String),
}

impl fmt::Display for LengthsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthsError::NotInMonoid => write!(f, "element is not in the monoid"),
            LengthsError::PreconditionFailed(msg) => write!(f, "precondition failed: {msg}"),
            LengthsError::CMonoid(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for LengthsError {}

impl From<CMonoidError> for LengthsError {
    fn from(e: CMonoidError) -> Self {
        LengthsError::CMonoid(e.to_string())
    }
}

/// Set of lengths of one element together with its distance set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LengthReport {
    pub element: FactorialElement,
    pub factorization_count: u64,
    pub lengths: BTreeSet<u64>,
    pub delta: BTreeSet<u64>,
}

/// Consecutive differences of a finite sorted set.
pub fn delta_set(lengths: &BTreeSet<u64>) -> BTreeSet<u64> {
    let v: Vec<u64> = lengths.iter().copied().collect();
    v.windows(2).map(|w| w[1] - w[0]).collect()
}

/// All atoms of H with total degree <= degree_cap: members of H \ H^x such
/// that every splitting a = b*c inside H has b or c a unit of H. Decided by
/// an exhaustive divisor scan.
pub fn atoms_in_box(
    h: &CMonoidPresentation,
    degree_cap: u64,
) -> Result<Vec<FactorialElement>, LengthsError> {
    let members = h.degree_bounded_members(degree_cap);
    let mut atoms = Vec::new();
    for (unit, exps) in &members {
        let a = FactorialElement {
            unit: unit.clone(),
            exponents: exps.clone(),
        };
        if a.degree() == 0 {
            continue; // units of H are not atoms
        }
        if is_atom(h, &a)? {
            atoms.push(a);
        }
    }
    Ok(atoms)
}

fn is_atom(h: &CMonoidPresentation, a: &FactorialElement) -> Result<bool, LengthsError> {
    if !h.membership(a)? || a.degree() == 0 {
        return Ok(false);
    }
    let ambient = h.ambient();
    let units = ambient.units();
    let unit_elems = units.elements();
    // enumerate divisors b = (delta, w <= exps)
    let mut w = vec![0u64; a.exponents.len()];
    loop {
        for delta in &unit_elems {
            let b = FactorialElement {
                unit: delta.clone(),
                exponents: w.clone(),
            };
            let c = ambient.quotient(a, &b).expect("w <= exps");
            if h.membership(&b)? && h.membership(&c)? && !h.is_h_unit(&b)? && !h.is_h_unit(&c)? {
                return Ok(false);
            }
        }
        // odometer over w bounded by a's exponents
        let mut p = w.len();
        loop {
            if p == 0 {
                return Ok(true);
            }
            p -= 1;
            w[p] += 1;
            if w[p] <= a.exponents[p] {
                break;
            }
            w[p] = 0;
        }
    }
}

/// Set of lengths of `a` within the degree box: every k such that a is a
/// product of k atoms. Exhaustive recursion with memoization on the
/// remaining element; atom multisets are counted once.
pub fn set_of_lengths(
    h: &CMonoidPresentation,
    a: &FactorialElement,
    degree_cap: u64,
) -> Result<LengthReport, LengthsError> {
    if !h.membership(a)? {
        return Err(LengthsError::NotInMonoid);
    }
    let atoms = atoms_in_box(h, degree_cap.max(a.degree()))?;
    Ok(lengths_with_atoms(h, a, &atoms))
}

pub(crate) fn lengths_with_atoms(
    h: &CMonoidPresentation,
    a: &FactorialElement,
    atoms: &[FactorialElement],
) -> LengthReport {
    let mut memo: HashMap<FactorialElement, BTreeSet<u64>> = HashMap::new();
    let lengths = lengths_rec(h, a, atoms, &mut memo);
    let mut count_memo: HashMap<(FactorialElement, usize), u64> = HashMap::new();
    let count = count_factorizations(h, a, atoms, atoms.len(), &mut count_memo);
    let delta = delta_set(&lengths);
    LengthReport {
        element: a.clone(),
        factorization_count: count,
        lengths,
        delta,
    }
}

fn lengths_rec(
    h: &CMonoidPresentation,
    rem: &FactorialElement,
    atoms: &[FactorialElement],
    memo: &mut HashMap<FactorialElement, BTreeSet<u64>>,
) -> BTreeSet<u64> {
    if rem.degree() == 0 {
        // a unit of H: length 0 by convention
        return BTreeSet::from([0]);
    }
    if let Some(v) = memo.get(rem) {
        return v.clone();
    }
    let ambient = h.ambient();
    let mut lengths = BTreeSet::new();
    for atom in atoms {
        if !ambient.divides(atom, rem) {
            continue;
        }
        let rest = ambient.quotient(rem, atom).expect("atom divides");
        if !h.membership(&rest).unwrap_or(false) {
            continue;
        }
        for l in lengths_rec(h, &rest, atoms, memo) {
            lengths.insert(l + 1);
        }
    }
    memo.insert(rem.clone(), lengths.clone());
    lengths
}

/// Number of atom multisets factoring `rem`; the non-increasing index bound
/// counts each multiset exactly once.
fn count_factorizations(
    h: &CMonoidPresentation,
    rem: &FactorialElement,
    atoms: &[FactorialElement],
    max_atom: usize,
    memo: &mut HashMap<(FactorialElement, usize), u64>,
) -> u64 {
    if rem.degree() == 0 {
        return 1;
    }
    if let Some(&v) = memo.get(&(rem.clone(), max_atom)) {
        return v;
    }
    let ambient = h.ambient();
    let mut count = 0u64;
    for i in 0..max_atom {
        let atom = &atoms[i];
        if !ambient.divides(atom, rem) {
            continue;
        }
        let rest = ambient.quotient(rem, atom).expect("atom divides");
        if !h.membership(&rest).unwrap_or(false) {
            continue;
        }
        count += count_factorizations(h, &rest, atoms, i + 1, memo);
    }
    memo.insert((rem.clone(), max_atom), count);
    count
}

/// Box-relative half-factoriality verdict with the witness when negative.
#[derive(Clone, Debug)]
pub struct HalfFactorialVerdict {
    /// True iff every member of the degree box has a singleton set of
    /// lengths. Box-relative: a `true` only certifies the searched box.
    pub half_factorial_within_box: bool,
    pub witness: Option<LengthReport>,
    pub degree_cap: u64,
}

/// Scan every H-member of degree at most `degree_cap`; report the first
/// element with two factorization lengths, if any.
pub fn half_factorial_bruteforce(
    h: &CMonoidPresentation,
    degree_cap: u64,
) -> Result<HalfFactorialVerdict, LengthsError> {
    let atoms = atoms_in_box(h, degree_cap)?;
    for (unit, exps) in h.degree_bounded_members(degree_cap) {
        let a = FactorialElement {
            unit,
            exponents: exps,
        };
        if a.degree() == 0 {
            continue;
        }
        let report = lengths_with_atoms(h, &a, &atoms);
        if report.lengths.len() >= 2 {
            return Ok(HalfFactorialVerdict {
                half_factorial_within_box: false,
                witness: Some(report),
                degree_cap,
            });
        }
    }
    Ok(HalfFactorialVerdict {
        half_factorial_within_box: true,
        witness: None,
        degree_cap,
    })
}

/// The weight of an atom against a labeled class semigroup: primes whose
/// class translates a unit class at an H-idempotent count 1, primes in a
/// constituent at an H-idempotent but outside those translates count 1/2,
/// all other primes count 0. Checks weight 1 for every atom in the box.
#[derive(Clone, Debug)]
pub struct WeightReport {
    pub all_atoms_weight_one: bool,
    /// (atom, twice its weight) for every violation.
    pub violations: Vec<(FactorialElement, u64)>,
    pub checked: usize,
}

pub fn weight_check(
    h: &CMonoidPresentation,
    cs: &ClassSemigroup,
    atoms: &[FactorialElement],
) -> Result<WeightReport, LengthsError> {
    for atom in atoms {
        if !h.membership(atom)? {
            return Err(LengthsError::PreconditionFailed(
                "weight check received a non-member atom".into(),
            ));
        }
    }
    let (seminormal, star) = crate::cmonoid::seminormality(cs);
    if !seminormal {
        return Err(LengthsError::PreconditionFailed(
            "weight check requires a seminormal presentation".into(),
        ));
    }
    // idempotents with e in C_H, and the unit-class translates at each
    let idempotents: Vec<usize> = star
        .clifford
        .idempotents
        .iter()
        .map(|&e| star.to_class[e])
        .collect();
    let unit_classes: BTreeSet<usize> = cs.unit_class_of.iter().copied().collect();
    let mut in_g1 = vec![false; cs.class_count()];
    let mut in_g2 = vec![false; cs.class_count()];
    for &e in &idempotents {
        if !cs.is_h_class[e] {
            continue;
        }
        let mut translate = BTreeSet::new();
        for &u in &unit_classes {
            translate.insert(cs.carrier.op(u, e));
        }
        // constituent members at e, within C*
        let sub_e = star.sub_of_class(e).expect("idempotent lies in C*");
        let constituent = star
            .clifford
            .constituent_at(sub_e)
            .expect("idempotent has a constituent");
        for &m in &constituent.members {
            let class = star.to_class[m];
            if translate.contains(&class) {
                in_g1[class] = true;
            } else {
                in_g2[class] = true;
            }
        }
        for &t in &translate {
            in_g1[t] = true;
        }
    }
    let mut violations = Vec::new();
    for atom in atoms {
        let mut twice_weight = 0u64;
        for (p, &e) in atom.exponents.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let class = cs.prime_class[p];
            if in_g1[class] {
                twice_weight += 2 * e;
            } else if in_g2[class] {
                twice_weight += e;
            }
        }
        if twice_weight != 2 {
            violations.push((atom.clone(), twice_weight));
        }
    }
    Ok(WeightReport {
        all_atoms_weight_one: violations.is_empty(),
        violations,
        checked: atoms.len(),
    })
}
