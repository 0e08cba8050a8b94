//! Elements of a factorial monoid F = F^x × F(P) with a finite unit group
//! and a finite prime set.

use std::fmt;

use crate::abelian::{Elem, FiniteAbelianGroup};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorialError {
    AmbientMismatch,
    UnknownPrime(String),
}

impl fmt::Display for FactorialError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorialError::AmbientMismatch => write!(f, "element does not fit the ambient monoid"),
            FactorialError::UnknownPrime(p) => write!(f, "unknown prime {p}"),
        }
    }
}

impl std::error::Error for FactorialError {}

/// The ambient factorial monoid: a finite unit group and labeled primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorialMonoid {
    units: FiniteAbelianGroup,
    primes: Vec<String>,
}

/// An element `eps * prod p^(v_p)`: a unit together with an exponent vector.
///
/// Field order matters: derived comparison is lexicographic in
/// (unit, exponents), which is the canonical-representative order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactorialElement {
    pub unit: Elem,
    pub exponents: Vec<u64>,
}

impl FactorialMonoid {
    pub fn new(units: FiniteAbelianGroup, primes: Vec<String>) -> Self {
        FactorialMonoid { units, primes }
    }

    /// Trivial unit group with the given number of primes labeled p1, p2, …
    pub fn free(prime_count: usize) -> Self {
        let primes = (1..=prime_count).map(|i| format!("p{i}")).collect();
        FactorialMonoid::new(FiniteAbelianGroup::trivial(), primes)
    }

    pub fn units(&self) -> &FiniteAbelianGroup {
        &self.units
    }

    pub fn primes(&self) -> &[String] {
        &self.primes
    }

    pub fn prime_count(&self) -> usize {
        self.primes.len()
    }

    pub fn prime_index(&self, label: &str) -> Result<usize, FactorialError> {
        self.primes
            .iter()
            .position(|p| p == label)
            .ok_or_else(|| FactorialError::UnknownPrime(label.to_string()))
    }

    pub fn one(&self) -> FactorialElement {
        FactorialElement {
            unit: self.units.zero(),
            exponents: vec![0; self.prime_count()],
        }
    }

    pub fn prime(&self, idx: usize) -> FactorialElement {
        let mut e = self.one();
        e.exponents[idx] = 1;
        e
    }

    pub fn element(
        &self,
        unit: Elem,
        exponents: Vec<u64>,
    ) -> Result<FactorialElement, FactorialError> {
        let e = FactorialElement { unit, exponents };
        if self.fits(&e) {
            Ok(e)
        } else {
            Err(FactorialError::AmbientMismatch)
        }
    }

    pub fn fits(&self, a: &FactorialElement) -> bool {
        self.units.is_valid(&a.unit) && a.exponents.len() == self.prime_count()
    }

    /// Units multiply in F^x, exponents add.
    pub fn multiply(
        &self,
        a: &FactorialElement,
        b: &FactorialElement,
    ) -> Result<FactorialElement, FactorialError> {
        if !self.fits(a) || !self.fits(b) {
            return Err(FactorialError::AmbientMismatch);
        }
        Ok(FactorialElement {
            unit: self.units.add(&a.unit, &b.unit),
            exponents: a
                .exponents
                .iter()
                .zip(&b.exponents)
                .map(|(&x, &y)| x + y)
                .collect(),
        })
    }

    /// p-adic exponent lookup by prime label.
    pub fn v_p(&self, a: &FactorialElement, prime: &str) -> Result<u64, FactorialError> {
        if !self.fits(a) {
            return Err(FactorialError::AmbientMismatch);
        }
        Ok(a.exponents[self.prime_index(prime)?])
    }

    /// Reduce every exponent e >= 2*alpha to alpha + ((e - alpha) mod alpha);
    /// the result has all exponents < 2*alpha and the same unit.
    pub fn alpha_reduce(&self, a: &FactorialElement, alpha: u64) -> FactorialElement {
        assert!(alpha >= 1);
        FactorialElement {
            unit: a.unit.clone(),
            exponents: a
                .exponents
                .iter()
                .map(|&e| reduce_exponent(e, alpha))
                .collect(),
        }
    }

    /// Divisibility in F: units always divide, exponents componentwise <=.
    pub fn divides(&self, a: &FactorialElement, b: &FactorialElement) -> bool {
        a.exponents.iter().zip(&b.exponents).all(|(&x, &y)| x <= y)
    }

    /// Exact quotient b / a when `divides(a, b)`.
    pub fn quotient(&self, b: &FactorialElement, a: &FactorialElement) -> Option<FactorialElement> {
        if !self.divides(a, b) {
            return None;
        }
        Some(FactorialElement {
            unit: self.units.sub(&b.unit, &a.unit),
            exponents: b
                .exponents
                .iter()
                .zip(&a.exponents)
                .map(|(&y, &x)| y - x)
                .collect(),
        })
    }

    pub fn is_ambient_unit(&self, a: &FactorialElement) -> bool {
        a.exponents.iter().all(|&e| e == 0)
    }

    /// Rendering used in reports: `eps_k * p1^a1 * p2^a2 …`.
    pub fn display(&self, a: &FactorialElement) -> String {
        let mut parts = Vec::new();
        let unit_idx = self.units.index_of(&a.unit);
        if unit_idx != 0 {
            parts.push(format!("eps{unit_idx}"));
        }
        for (i, &e) in a.exponents.iter().enumerate() {
            if e == 1 {
                parts.push(self.primes[i].clone());
            } else if e > 1 {
                parts.push(format!("{}^{}", self.primes[i], e));
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl FactorialElement {
    /// Number of prime factors counted with multiplicity.
    pub fn degree(&self) -> u64 {
        self.exponents.iter().sum()
    }
}

#[inline]
pub(crate) fn reduce_exponent(e: u64, alpha: u64) -> u64 {
    if e < 2 * alpha {
        e
    } else {
        alpha + (e - alpha) % alpha
    }
}
