//! Presentations of dense submonoids H of a factorial monoid F, exact
//! class-semigroup computation through H-equivalence, and the seminormality
//! machinery built on it.
//!
//! A presentation certifies, per prime p, a period `alpha_p` such that for
//! every a with v_p(a) >= alpha_p membership of `p^alpha_p * a` and `a`
//! agree. Membership then factors through reduction of each exponent into
//! `[0, 2*alpha_p)`, so every question about H below is decided by a finite,
//! exact computation. The reported uniform period `alpha` is the lcm of the
//! per-prime ones.
//!
//! Two pattern backends are supported:
//! * `Dense` — an explicit membership bit table over the reduced box,
//!   certified against an oracle (generator closure, a membership predicate,
//!   or a bulk product-one table) on enlarged verification windows.
//! * `Factored` — membership factors through a homomorphism into a finite
//!   commutative monoid (the sum map of the gallery constructions, or the
//!   group sum for product-one monoids over abelian groups). Periodicity is
//!   certified algebraically and queries stay exact without materializing
//!   the box.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::abelian::{
    are_isomorphic, quotient_by_relations, AbelianError, Elem, FiniteAbelianGroup, LatticeTester,
};
use crate::factorial::{reduce_exponent, FactorialElement, FactorialMonoid};
use crate::semigroup::{CliffordDecomposition, FinCommSemigroup, SemigroupError};
use crate::util::{gcd, lcm, total_cells, BitVec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CMonoidError {
    /// No per-prime period up to the cap passes the certificate.
    NoAlphaFound {
        cap: u64,
        prime: usize,
    },
    /// Some prime has v_p(H) with gcd > 1 on the observable box.
    NotDense {
        prime: usize,
    },
    /// Internal consistency failure while building the class semigroup.
    NotACongruence,
    AmbientMismatch,
    BoxTooLarge {
        cells: usize,
        cap: usize,
    },
    PreconditionNotSeminormal,
    /// A structural invariant of the membership pattern failed.
    InvalidPattern(String),
    NotInMonoid,
    Abelian(AbelianError),
    Semigroup(SemigroupError),
    Parse(String),
}

impl fmt::Display for CMonoidError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CMonoidError::NoAlphaFound { cap, prime } => {
                write!(f, "no period alpha <= {cap} certifies prime {prime}")
            }
            CMonoidError::NotDense { prime } => write!(f, "submonoid not dense at prime {prime}"),
            CMonoidError::NotACongruence => write!(f, "H-equivalence failed the congruence check"),
            CMonoidError::AmbientMismatch => write!(f, "element does not fit the ambient monoid"),
            CMonoidError::BoxTooLarge { cells, cap } => {
                write!(f, "box of {cells} cells exceeds cap {cap}")
            }
            CMonoidError::PreconditionNotSeminormal => {
                write!(f, "operation requires a seminormal presentation")
            }
            CMonoidError::InvalidPattern(msg) => write!(f, "invalid membership pattern: {msg}"),
            CMonoidError::NotInMonoid => write!(f, "element is not in the monoid"),
            CMonoidError::Abelian(e) => write!(f, "{e}"),
            CMonoidError::Semigroup(e) => write!(f, "{e}"),
            CMonoidError::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for CMonoidError {}

impl From<AbelianError> for CMonoidError {
    fn from(e: AbelianError) -> Self {
        CMonoidError::Abelian(e)
    }
}

impl From<SemigroupError> for CMonoidError {
    fn from(e: SemigroupError) -> Self {
        CMonoidError::Semigroup(e)
    }
}

/// Size and search caps for presentation construction.
#[derive(Clone, Debug)]
pub struct Caps {
    /// Largest per-prime period tried during discovery.
    pub alpha_cap: u64,
    /// Cap on reduced-box cells.
    pub box_cells: usize,
    /// Cap on verification-window cells.
    pub window_cells: usize,
    /// Degree bound for support enumeration on factored backends.
    pub support_degree: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            alpha_cap: 8,
            box_cells: 1 << 22,
            window_cells: 1 << 26,
            support_degree: 6,
        }
    }
}

/// Full pairwise congruence verification is performed up to this many cells;
/// larger boxes re-verify translation stability plus representative products,
/// which implies the congruence property by induction over generator words.
const FULL_CONGRUENCE_CELLS: usize = 8192;

// ---------------------------------------------------------------------------
// cell space: indexing of the reduced box
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
struct CellSpace {
    dims: Vec<u64>,
    strides: Vec<usize>,
    exp_cells: usize,
    unit_count: usize,
    unit_elems: Vec<Elem>,
    /// addred[p][a * dims[p] + b] = reduced digit of a + b
    addred: Vec<Vec<u16>>,
}

impl CellSpace {
    fn new(units: &FiniteAbelianGroup, alphas: &[u64]) -> CellSpace {
        let dims: Vec<u64> = alphas.iter().map(|&a| 2 * a).collect();
        let strides = crate::util::strides(&dims);
        let exp_cells = total_cells(&dims);
        let unit_elems = units.elements();
        let addred = alphas
            .iter()
            .map(|&a| {
                let d = 2 * a;
                let mut t = vec![0u16; (d * d) as usize];
                for x in 0..d {
                    for y in 0..d {
                        t[(x * d + y) as usize] = reduce_exponent(x + y, a) as u16;
                    }
                }
                t
            })
            .collect();
        CellSpace {
            dims,
            strides,
            exp_cells,
            unit_count: unit_elems.len(),
            unit_elems,
            addred,
        }
    }

    fn cells(&self) -> usize {
        self.unit_count * self.exp_cells
    }

    fn encode(&self, unit_idx: usize, digits: &[u64]) -> usize {
        let mut idx = 0usize;
        for (p, &d) in digits.iter().enumerate() {
            idx += d as usize * self.strides[p];
        }
        unit_idx * self.exp_cells + idx
    }

    fn decode(&self, cell: usize) -> (usize, Vec<u64>) {
        let unit = cell / self.exp_cells;
        let mut rest = cell % self.exp_cells;
        let mut digits = vec![0u64; self.dims.len()];
        for p in 0..self.dims.len() {
            digits[p] = (rest / self.strides[p]) as u64;
            rest %= self.strides[p];
        }
        (unit, digits)
    }

    /// Reduced product of two cells.
    fn product(&self, units: &FiniteAbelianGroup, a: usize, b: usize) -> usize {
        let ua = a / self.exp_cells;
        let ub = b / self.exp_cells;
        let unit = units.index_of(&units.add(&self.unit_elems[ua], &self.unit_elems[ub]));
        let mut ra = a % self.exp_cells;
        let mut rb = b % self.exp_cells;
        let mut idx = 0usize;
        for p in 0..self.dims.len() {
            let da = ra / self.strides[p];
            let db = rb / self.strides[p];
            ra %= self.strides[p];
            rb %= self.strides[p];
            let d = self.dims[p] as usize;
            idx += self.addred[p][da * d + db] as usize * self.strides[p];
        }
        unit * self.exp_cells + idx
    }

    /// Cell shifted by one copy of prime p (with reduction).
    fn succ_prime(&self, cell: usize, p: usize) -> usize {
        let rest = cell % self.exp_cells;
        let d = (rest / self.strides[p]) % self.dims[p] as usize;
        if d + 1 < self.dims[p] as usize {
            cell + self.strides[p]
        } else {
            // wrap 2*alpha - 1 back to alpha
            let alpha = (self.dims[p] / 2) as usize;
            cell - (d - alpha) * self.strides[p]
        }
    }

    fn succ_unit(&self, units: &FiniteAbelianGroup, cell: usize, gen: usize) -> usize {
        let u = cell / self.exp_cells;
        let nu = units.index_of(&units.add(&self.unit_elems[u], &units.generator(gen)));
        nu * self.exp_cells + cell % self.exp_cells
    }
}

// ---------------------------------------------------------------------------
// oracles used while certifying dense patterns
// ---------------------------------------------------------------------------

/// Produces membership bits for an arbitrary window `units x dims`
/// (unit-major, exponent digits row-major, first prime most significant).
pub(crate) trait WindowOracle {
    fn fill(&self, unit_count: usize, dims: &[u64]) -> BitVec;
}

/// Per-cell membership predicate on (unit index, unreduced exponents).
pub(crate) struct FnOracle<'a> {
    pub f: &'a dyn Fn(usize, &[u64]) -> bool,
}

impl WindowOracle for FnOracle<'_> {
    fn fill(&self, unit_count: usize, dims: &[u64]) -> BitVec {
        let exp_cells = total_cells(dims);
        let mut bits = BitVec::zeros(unit_count * exp_cells);
        let mut digits = vec![0u64; dims.len()];
        for u in 0..unit_count {
            for d in digits.iter_mut() {
                *d = 0;
            }
            for e in 0..exp_cells {
                if (self.f)(u, &digits) {
                    bits.set(u * exp_cells + e, true);
                }
                // odometer increment (last digit fastest)
                for p in (0..dims.len()).rev() {
                    digits[p] += 1;
                    if digits[p] < dims[p] {
                        break;
                    }
                    digits[p] = 0;
                }
            }
        }
        bits
    }
}

/// Exact closure of a generator set inside a window. Exponents only grow
/// under multiplication, so the closure restricted to the window is the
/// full intersection of the generated monoid with the window.
pub(crate) struct ClosureOracle<'a> {
    pub units: &'a FiniteAbelianGroup,
    pub generators: &'a [(usize, Vec<u64>)],
}

impl WindowOracle for ClosureOracle<'_> {
    fn fill(&self, unit_count: usize, dims: &[u64]) -> BitVec {
        let exp_cells = total_cells(dims);
        let strides = crate::util::strides(dims);
        let mut bits = BitVec::zeros(unit_count * exp_cells);
        let unit_elems = self.units.elements();
        let one = 0usize;
        bits.set(one, true);
        let mut queue = vec![(0usize, vec![0u64; dims.len()])];
        while let Some((u, digits)) = queue.pop() {
            'gens: for (gu, gexp) in self.generators {
                let mut nd = digits.clone();
                for p in 0..dims.len() {
                    nd[p] += gexp[p];
                    if nd[p] >= dims[p] {
                        continue 'gens;
                    }
                }
                let nu = self
                    .units
                    .index_of(&self.units.add(&unit_elems[u], &unit_elems[*gu]));
                let mut idx = nu * exp_cells;
                for p in 0..dims.len() {
                    idx += nd[p] as usize * strides[p];
                }
                if !bits.get(idx) {
                    bits.set(idx, true);
                    queue.push((nu, nd));
                }
            }
        }
        bits
    }
}

// ---------------------------------------------------------------------------
// presentation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
struct DensePattern {
    space: CellSpace,
    bits: BitVec,
}

/// Membership pattern factoring through a finite commutative monoid:
/// an element `eps * prod p^(v_p)` is in H iff
/// `unit_images[eps] + sum v_p * prime_images[p]` lies in the accept set.
#[derive(Clone, Debug)]
pub struct FactoredPattern {
    pub sem: FinCommSemigroup,
    pub identity: usize,
    /// Image of every unit element, indexed like `units.elements()`.
    pub unit_images: Vec<usize>,
    pub prime_images: Vec<usize>,
    pub accept: Vec<bool>,
}

#[derive(Clone, Debug)]
enum Backend {
    Dense(DensePattern),
    Factored(FactoredPattern),
}

/// A certified presentation of a submonoid H of F.
#[derive(Clone, Debug)]
pub struct CMonoidPresentation {
    ambient: FactorialMonoid,
    alphas: Vec<u64>,
    alpha: u64,
    backend: Backend,
    generators: Option<Vec<FactorialElement>>,
    /// Per prime: do the observed positive exponents of H have gcd 1?
    dense_at: Vec<bool>,
}

impl CMonoidPresentation {
    /// Build from a generator list: the pattern is the exact sum-closure of
    /// the generators, certified on per-prime verification windows.
    pub fn from_generators(
        ambient: FactorialMonoid,
        generators: Vec<FactorialElement>,
        alpha_hint: Option<u64>,
        caps: &Caps,
    ) -> Result<Self, CMonoidError> {
        for g in &generators {
            if !ambient.fits(g) {
                return Err(CMonoidError::AmbientMismatch);
            }
        }
        let units = ambient.units().clone();
        let gen_cells: Vec<(usize, Vec<u64>)> = generators
            .iter()
            .map(|g| (units.index_of(&g.unit), g.exponents.clone()))
            .collect();
        let oracle = ClosureOracle {
            units: &units,
            generators: &gen_cells,
        };
        // the scan window must contain every generator
        let floor: Vec<u64> = (0..ambient.prime_count())
            .map(|p| {
                let m = generators.iter().map(|g| g.exponents[p]).max().unwrap_or(0);
                m / 4 + 1
            })
            .collect();
        let pres = build_dense(ambient, &oracle, caps, Some(generators), alpha_hint, &floor)?;
        if let Some(p) = pres.dense_at.iter().position(|&d| !d) {
            return Err(CMonoidError::NotDense { prime: p });
        }
        Ok(pres)
    }

    /// Build from a membership predicate on (unit index, unreduced
    /// exponents). The predicate must describe a genuine submonoid; the
    /// constructor certifies periodicity on verification windows and all
    /// structural invariants on the reduced box.
    pub fn from_membership_oracle(
        ambient: FactorialMonoid,
        oracle: &dyn Fn(usize, &[u64]) -> bool,
        alpha_hint: Option<u64>,
        caps: &Caps,
    ) -> Result<Self, CMonoidError> {
        let floor = vec![1u64; ambient.prime_count()];
        build_dense(
            ambient,
            &FnOracle { f: oracle },
            caps,
            None,
            alpha_hint,
            &floor,
        )
    }

    pub(crate) fn from_window_oracle(
        ambient: FactorialMonoid,
        oracle: &dyn WindowOracle,
        generators: Option<Vec<FactorialElement>>,
        alpha_hint: Option<u64>,
        caps: &Caps,
    ) -> Result<Self, CMonoidError> {
        let floor = vec![1u64; ambient.prime_count()];
        build_dense(ambient, oracle, caps, generators, alpha_hint, &floor)
    }

    /// Build from a factored membership pattern. Periodicity is certified
    /// algebraically: alpha_p is the least a with translation by `a*c_p`
    /// equal to translation by `2a*c_p` on the whole codomain.
    pub fn from_factored(
        ambient: FactorialMonoid,
        pattern: FactoredPattern,
        caps: &Caps,
    ) -> Result<Self, CMonoidError> {
        let sem = &pattern.sem;
        let n = sem.size();
        if pattern.accept.len() != n || pattern.prime_images.iter().any(|&c| c >= n) {
            return Err(CMonoidError::InvalidPattern(
                "factored maps out of range".into(),
            ));
        }
        if pattern.prime_images.len() != ambient.prime_count() {
            return Err(CMonoidError::AmbientMismatch);
        }
        if sem.identity() != Some(pattern.identity) {
            return Err(CMonoidError::InvalidPattern(
                "declared identity is not an identity".into(),
            ));
        }
        let units = ambient.units();
        let unit_count = units.order() as usize;
        if pattern.unit_images.len() != unit_count {
            return Err(CMonoidError::AmbientMismatch);
        }
        let unit_elems = units.elements();
        if pattern.unit_images[0] != pattern.identity {
            return Err(CMonoidError::InvalidPattern(
                "unit identity must map to the identity".into(),
            ));
        }
        // homomorphism check on units
        for a in 0..unit_count {
            for b in 0..unit_count {
                let sum = units.index_of(&units.add(&unit_elems[a], &unit_elems[b]));
                if pattern.unit_images[sum]
                    != sem.op(pattern.unit_images[a], pattern.unit_images[b])
                {
                    return Err(CMonoidError::InvalidPattern(
                        "unit map is not a homomorphism".into(),
                    ));
                }
            }
        }
        if !pattern.accept[pattern.identity] {
            return Err(CMonoidError::InvalidPattern("1 is not in H".into()));
        }
        // accept set closed under the operation (H is a monoid)
        let accepted: Vec<usize> = (0..n).filter(|&c| pattern.accept[c]).collect();
        for &a in &accepted {
            for &b in &accepted {
                if !pattern.accept[sem.op(a, b)] {
                    return Err(CMonoidError::InvalidPattern(
                        "accept set is not multiplicatively closed".into(),
                    ));
                }
            }
        }
        // unit trace is a subgroup (finite: closure suffices)
        let trace: Vec<usize> = (0..unit_count)
            .filter(|&u| pattern.accept[pattern.unit_images[u]])
            .collect();
        for &a in &trace {
            for &b in &trace {
                let s = units.index_of(&units.add(&unit_elems[a], &unit_elems[b]));
                if !pattern.accept[pattern.unit_images[s]] {
                    return Err(CMonoidError::InvalidPattern(
                        "unit trace is not a subgroup".into(),
                    ));
                }
            }
        }
        // per-prime period: translations by a*c and 2a*c must agree
        let mut alphas = Vec::with_capacity(pattern.prime_images.len());
        for (p, &c) in pattern.prime_images.iter().enumerate() {
            let mut found = None;
            for a in 1..=caps.alpha_cap {
                let t1 = sem.multiple(a, c);
                let t2 = sem.multiple(2 * a, c);
                if (0..n).all(|x| sem.op(t1, x) == sem.op(t2, x)) {
                    found = Some(a);
                    break;
                }
            }
            match found {
                Some(a) => alphas.push(a),
                None => {
                    return Err(CMonoidError::NoAlphaFound {
                        cap: caps.alpha_cap,
                        prime: p,
                    })
                }
            }
        }
        // density flags: gcd of the p-exponents realized by members, with
        // the other primes free
        let mut dense_at = Vec::with_capacity(pattern.prime_images.len());
        for (p, &c) in pattern.prime_images.iter().enumerate() {
            let mut other = vec![false; n];
            for &u in &pattern.unit_images {
                other[u] = true;
            }
            loop {
                let mut changed = false;
                for x in 0..n {
                    if !other[x] {
                        continue;
                    }
                    for (q, &cq) in pattern.prime_images.iter().enumerate() {
                        if q == p {
                            continue;
                        }
                        let y = sem.op(x, cq);
                        if !other[y] {
                            other[y] = true;
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            let mut g = 0u64;
            for v in 1..(2 * alphas[p]) {
                let vc = sem.multiple(v, c);
                if (0..n).any(|x| other[x] && pattern.accept[sem.op(x, vc)]) {
                    g = gcd(g, v);
                }
            }
            dense_at.push(g == 1);
        }
        let alpha = alphas.iter().fold(1u64, |a, &b| lcm(a, b));
        Ok(CMonoidPresentation {
            ambient,
            alphas,
            alpha,
            backend: Backend::Factored(pattern),
            generators: None,
            dense_at,
        })
    }

    pub fn ambient(&self) -> &FactorialMonoid {
        &self.ambient
    }

    /// Uniform period: the lcm of the per-prime periods.
    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    pub fn alphas(&self) -> &[u64] {
        &self.alphas
    }

    pub fn generators(&self) -> Option<&[FactorialElement]> {
        self.generators.as_deref()
    }

    /// Per-prime density flags: does v_p(H) observed on the box have gcd 1?
    pub fn dense_at(&self) -> &[bool] {
        &self.dense_at
    }

    pub fn is_dense(&self) -> bool {
        self.dense_at.iter().all(|&d| d)
    }

    pub fn set_generators(&mut self, gens: Vec<FactorialElement>) {
        self.generators = Some(gens);
    }

    pub fn is_factored(&self) -> bool {
        matches!(self.backend, Backend::Factored(_))
    }

    pub fn factored_pattern(&self) -> Option<&FactoredPattern> {
        match &self.backend {
            Backend::Factored(f) => Some(f),
            Backend::Dense(_) => None,
        }
    }

    /// Reduced-box dimensions 2*alpha_p.
    pub fn box_dims(&self) -> Vec<u64> {
        self.alphas.iter().map(|&a| 2 * a).collect()
    }

    /// Per-prime exponent reduction of an element (unit unchanged).
    pub fn reduce(&self, a: &FactorialElement) -> FactorialElement {
        FactorialElement {
            unit: a.unit.clone(),
            exponents: a
                .exponents
                .iter()
                .zip(&self.alphas)
                .map(|(&e, &al)| reduce_exponent(e, al))
                .collect(),
        }
    }

    /// Exact membership test.
    pub fn membership(&self, a: &FactorialElement) -> Result<bool, CMonoidError> {
        if !self.ambient.fits(a) {
            return Err(CMonoidError::AmbientMismatch);
        }
        Ok(self.membership_unchecked(a))
    }

    fn membership_unchecked(&self, a: &FactorialElement) -> bool {
        match &self.backend {
            Backend::Dense(d) => {
                let u = self.ambient.units().index_of(&a.unit);
                let digits: Vec<u64> = a
                    .exponents
                    .iter()
                    .zip(&self.alphas)
                    .map(|(&e, &al)| reduce_exponent(e, al))
                    .collect();
                d.bits.get(d.space.encode(u, &digits))
            }
            Backend::Factored(f) => {
                let u = self.ambient.units().index_of(&a.unit);
                let mut acc = f.unit_images[u];
                for (p, &e) in a.exponents.iter().enumerate() {
                    if e > 0 {
                        acc = f.sem.op(acc, f.sem.multiple(e, f.prime_images[p]));
                    }
                }
                f.accept[acc]
            }
        }
    }

    /// Is the element a unit of H (a unit of F lying in H)?
    pub fn is_h_unit(&self, a: &FactorialElement) -> Result<bool, CMonoidError> {
        Ok(self.ambient.is_ambient_unit(a) && self.membership(a)?)
    }

    /// Exact H-equivalence: for every x in the reduced box,
    /// membership(x*y) == membership(x*y'). Finite and exact because
    /// membership factors through the per-prime reduction.
    pub fn h_equivalent(
        &self,
        y: &FactorialElement,
        y2: &FactorialElement,
    ) -> Result<bool, CMonoidError> {
        if !self.ambient.fits(y) || !self.ambient.fits(y2) {
            return Err(CMonoidError::AmbientMismatch);
        }
        match &self.backend {
            Backend::Dense(d) => {
                let units = self.ambient.units();
                let ry = self.reduce(y);
                let ry2 = self.reduce(y2);
                let cy = d.space.encode(units.index_of(&ry.unit), &ry.exponents);
                let cy2 = d.space.encode(units.index_of(&ry2.unit), &ry2.exponents);
                for x in 0..d.space.cells() {
                    if d.bits.get(d.space.product(units, x, cy))
                        != d.bits.get(d.space.product(units, x, cy2))
                    {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Backend::Factored(f) => {
                let a = self.factored_value(y);
                let b = self.factored_value(y2);
                let reach = factored_reachable(f, false);
                let equal = reach
                    .iter_ones()
                    .all(|t| f.accept[f.sem.op(t, a)] == f.accept[f.sem.op(t, b)]);
                Ok(equal)
            }
        }
    }

    fn factored_value(&self, a: &FactorialElement) -> usize {
        match &self.backend {
            Backend::Factored(f) => {
                let u = self.ambient.units().index_of(&a.unit);
                let mut acc = f.unit_images[u];
                for (p, &e) in a.exponents.iter().enumerate() {
                    if e > 0 {
                        acc = f.sem.op(acc, f.sem.multiple(e, f.prime_images[p]));
                    }
                }
                acc
            }
            Backend::Dense(_) => unreachable!("factored_value on dense backend"),
        }
    }

    /// The class semigroup C(H, F): the partition of the reduced box by
    /// H-equivalence with the induced operation, labeled with C_H, the unit
    /// classes, the reduced part C*, and the class of every prime.
    pub fn class_semigroup(&self) -> Result<ClassSemigroup, CMonoidError> {
        match &self.backend {
            Backend::Dense(d) => dense_class_semigroup(&self.ambient, d),
            Backend::Factored(f) => factored_class_semigroup(&self.ambient, f, &self.alphas),
        }
    }

    /// Seminormality via the union-of-groups test on C*(H, F).
    pub fn is_seminormal(&self) -> Result<(bool, StarClifford), CMonoidError> {
        let cs = self.class_semigroup()?;
        Ok(seminormality(&cs))
    }

    /// Generators of q(H) inside q(F) = F^x + Z^P, in torsion-first layout.
    ///
    /// Dense: spanned by the membership support of the reduced box plus the
    /// provable alpha-shifts `alpha_p * e_p`. Factored: spanned by the
    /// degree-bounded support plus alpha-shifts; the degree bound is checked
    /// for stabilization by extending it one step.
    pub fn quotient_lattice(&self, caps: &Caps) -> Result<Vec<Vec<i64>>, CMonoidError> {
        let units = self.ambient.units();
        let urank = units.rank();
        let pcount = self.ambient.prime_count();
        let dim = urank + pcount;
        // incremental basis: the tester is rebuilt only when the span grows
        struct Growing<'a> {
            rank: usize,
            units: &'a FiniteAbelianGroup,
            basis: Vec<Vec<i64>>,
            tester: LatticeTester,
        }
        impl Growing<'_> {
            fn push(&mut self, v: Vec<i64>) -> Result<(), CMonoidError> {
                if !self.tester.contains(&v)? {
                    self.basis.push(v);
                    self.tester = LatticeTester::new(self.rank, self.units, &self.basis)?;
                }
                Ok(())
            }
        }
        let mut growing = Growing {
            rank: pcount,
            units,
            basis: Vec::new(),
            tester: LatticeTester::new(pcount, units, &[])?,
        };
        // alpha_p * e_p lies in q(H) whenever some h in H has v_p(h) >=
        // alpha_p: certified periodicity then puts p^(alpha_p) h in H too.
        for (p, &al) in self.alphas.iter().enumerate() {
            let shift_justified = match &self.backend {
                Backend::Dense(d) => d.bits.iter_ones().any(|cell| {
                    let v =
                        (cell % d.space.exp_cells / d.space.strides[p]) as u64 % d.space.dims[p];
                    v >= al
                }),
                Backend::Factored(f) => {
                    let reach = factored_reachable(f, false);
                    let shifted = f.sem.multiple(al, f.prime_images[p]);
                    let hit = reach.iter_ones().any(|o| f.accept[f.sem.op(o, shifted)]);
                    hit
                }
            };
            if shift_justified {
                let mut v = vec![0i64; dim];
                v[urank + p] = al as i64;
                growing.push(v)?;
            }
        }
        let element_vec = |unit: &Elem, exps: &[u64]| -> Vec<i64> {
            let mut v = vec![0i64; dim];
            for (k, &c) in unit.iter().enumerate() {
                v[k] = c as i64;
            }
            for (p, &e) in exps.iter().enumerate() {
                v[urank + p] = e as i64;
            }
            v
        };
        match &self.backend {
            Backend::Dense(d) => {
                for cell in d.bits.iter_ones() {
                    let (u, digits) = d.space.decode(cell);
                    growing.push(element_vec(&d.space.unit_elems[u], &digits))?;
                }
            }
            Backend::Factored(_) => {
                // stabilization guard: one extra degree step must add nothing
                let mut grew_at_extra_step = false;
                for extra in 0..=1u64 {
                    let before = growing.basis.len();
                    let cap = caps.support_degree + extra;
                    for (unit, exps) in self.degree_bounded_members(cap) {
                        growing.push(element_vec(&unit, &exps))?;
                    }
                    if extra == 1 && growing.basis.len() != before {
                        grew_at_extra_step = true;
                    }
                }
                if grew_at_extra_step {
                    return Err(CMonoidError::InvalidPattern(
                        "quotient lattice did not stabilize; raise support_degree".into(),
                    ));
                }
            }
        }
        Ok(growing.basis)
    }

    /// All H-members with total degree <= cap, ascending by degree then lex.
    pub fn degree_bounded_members(&self, degree_cap: u64) -> Vec<(Elem, Vec<u64>)> {
        let units = self.ambient.units();
        let unit_elems = units.elements();
        let pcount = self.ambient.prime_count();
        let mut out = Vec::new();
        let mut exps = vec![0u64; pcount];
        for deg in 0..=degree_cap {
            collect_degree(&mut exps, 0, deg, &mut |e: &[u64]| {
                for u in &unit_elems {
                    let cand = FactorialElement {
                        unit: u.clone(),
                        exponents: e.to_vec(),
                    };
                    if self.membership_unchecked(&cand) {
                        out.push((u.clone(), e.to_vec()));
                    }
                }
            });
        }
        out
    }

    /// Exhaustive search for an element of H' \ H: some x in q(H) and F but
    /// not H with x^n in H for all large n. The eventual behavior of the
    /// power sequence is decided exactly by walking the reduced states until
    /// they cycle. Dense backends search the whole reduced box (complete:
    /// any witness reduces into it); factored backends search members of
    /// bounded degree.
    pub fn seminormal_bruteforce(
        &self,
        caps: &Caps,
    ) -> Result<Option<SeminormalWitness>, CMonoidError> {
        let lattice = self.quotient_lattice(caps)?;
        let units = self.ambient.units();
        let urank = units.rank();
        let pcount = self.ambient.prime_count();
        let tester = LatticeTester::new(pcount, units, &lattice)?;
        let candidates: Vec<FactorialElement> = match &self.backend {
            Backend::Dense(d) => (0..d.space.cells())
                .filter(|&cell| cell % d.space.exp_cells != 0 && !d.bits.get(cell))
                .map(|cell| {
                    let (u, digits) = d.space.decode(cell);
                    FactorialElement {
                        unit: d.space.unit_elems[u].clone(),
                        exponents: digits,
                    }
                })
                .collect(),
            Backend::Factored(_) => {
                let unit_elems = units.elements();
                let mut cands = Vec::new();
                let mut exps = vec![0u64; pcount];
                for deg in 1..=caps.support_degree {
                    collect_degree(&mut exps, 0, deg, &mut |e: &[u64]| {
                        for u in &unit_elems {
                            cands.push(FactorialElement {
                                unit: u.clone(),
                                exponents: e.to_vec(),
                            });
                        }
                    });
                }
                cands
            }
        };
        let mut vec = vec![0i64; urank + pcount];
        for x in candidates {
            if x.degree() == 0 || self.membership_unchecked(&x) {
                continue;
            }
            for (k, &c) in x.unit.iter().enumerate() {
                vec[k] = c as i64;
            }
            for (p, &e) in x.exponents.iter().enumerate() {
                vec[urank + p] = e as i64;
            }
            if !tester.contains(&vec)? {
                continue;
            }
            if let Some(m) = self.eventually_in(&x) {
                return Ok(Some(SeminormalWitness {
                    element: x,
                    from_power: m,
                }));
            }
        }
        Ok(None)
    }

    /// If x^n is in H for all n >= m (some m), returns the least such m
    /// visible from the reduced power walk; otherwise None. Exact: the
    /// reduced state of x^n is eventually periodic and membership depends
    /// only on it.
    fn eventually_in(&self, x: &FactorialElement) -> Option<u64> {
        match &self.backend {
            Backend::Dense(d) => {
                // walk on cell indices; cycles are short (lcm of the
                // per-prime periods times the unit order)
                let units = self.ambient.units();
                let x_cell = d
                    .space
                    .encode(units.index_of(&x.unit), &self.reduce(x).exponents);
                let mut seen: Vec<usize> = Vec::new();
                let mut states: Vec<bool> = Vec::new();
                let mut cur = x_cell;
                loop {
                    if let Some(first) = seen.iter().position(|&c| c == cur) {
                        let pre = first as u64 + 1;
                        return finish_walk(&states, pre);
                    }
                    seen.push(cur);
                    states.push(d.bits.get(cur));
                    cur = d.space.product(units, cur, x_cell);
                }
            }
            Backend::Factored(f) => {
                let x_val = self.factored_value(x);
                let mut seen: Vec<usize> = Vec::new();
                let mut states: Vec<bool> = Vec::new();
                let mut cur = x_val;
                loop {
                    if let Some(first) = seen.iter().position(|&c| c == cur) {
                        let pre = first as u64 + 1;
                        return finish_walk(&states, pre);
                    }
                    seen.push(cur);
                    states.push(f.accept[cur]);
                    cur = f.sem.op(cur, x_val);
                }
            }
        }
    }

    /// Class group of the complete integral closure: q(F)/q(H).
    pub fn class_group_of_completion(
        &self,
        caps: &Caps,
    ) -> Result<FiniteAbelianGroup, CMonoidError> {
        let lattice = self.quotient_lattice(caps)?;
        Ok(quotient_by_relations(
            self.ambient.prime_count(),
            self.ambient.units(),
            &lattice,
        )?)
    }

    /// F^x / H^x as an abstract group.
    pub fn unit_quotient_group(&self) -> FiniteAbelianGroup {
        let units = self.ambient.units();
        let unit_elems = units.elements();
        let trace: Vec<bool> = unit_elems
            .iter()
            .map(|u| {
                self.membership_unchecked(&FactorialElement {
                    unit: u.clone(),
                    exponents: vec![0; self.ambient.prime_count()],
                })
            })
            .collect();
        // cosets by canonical (minimal-index) representative
        let n = unit_elems.len();
        let mut coset = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for i in 0..n {
            if coset[i] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(i);
            for (j, uj) in unit_elems.iter().enumerate() {
                let diff = units.sub(uj, &unit_elems[i]);
                if trace[units.index_of(&diff)] {
                    coset[j] = c;
                }
            }
        }
        let add = |a: usize, b: usize| {
            let s = units.add(&unit_elems[reps[a]], &unit_elems[reps[b]]);
            coset[units.index_of(&s)]
        };
        crate::abelian::structure_from_table(reps.len(), coset[0], &add)
    }

    /// Theorem-level consistency report for seminormal presentations:
    /// every H-class idempotent, and the constituent group of the smallest
    /// idempotent of C* isomorphic to the class group of the completion.
    pub fn verify_theorem_seminormal(
        &self,
        cs: &ClassSemigroup,
        caps: &Caps,
    ) -> Result<SeminormalStructureReport, CMonoidError> {
        let (seminormal, star) = seminormality(cs);
        if !seminormal {
            return Err(CMonoidError::PreconditionNotSeminormal);
        }
        let mut idempotency_witness = None;
        for c in 0..cs.carrier.size() {
            if cs.is_h_class[c] && !cs.carrier.is_idempotent(c) {
                idempotency_witness = Some(c);
                break;
            }
        }
        let smallest = star.clifford.smallest_idempotent;
        let constituent = star
            .clifford
            .constituent_at(smallest)
            .expect("smallest idempotent has a constituent")
            .group
            .clone();
        let completion = self.class_group_of_completion(caps)?;
        let isomorphic = are_isomorphic(&constituent, &completion);
        Ok(SeminormalStructureReport {
            all_h_classes_idempotent: idempotency_witness.is_none(),
            idempotency_witness,
            constituent_of_smallest: constituent,
            completion_class_group: completion,
            groups_isomorphic: isomorphic,
        })
    }

    /// Restriction H ∩ F_k for a prime subset (divisor-closed submonoid).
    /// Density is not required to survive restriction.
    pub fn restrict_primes(&self, keep: &[usize]) -> Result<CMonoidPresentation, CMonoidError> {
        let labels: Vec<String> = keep
            .iter()
            .map(|&p| self.ambient.primes()[p].clone())
            .collect();
        let sub_ambient = FactorialMonoid::new(self.ambient.units().clone(), labels);
        let alphas: Vec<u64> = keep.iter().map(|&p| self.alphas[p]).collect();
        match &self.backend {
            Backend::Dense(d) => {
                let space = CellSpace::new(self.ambient.units(), &alphas);
                let mut bits = BitVec::zeros(space.cells());
                for cell in 0..space.cells() {
                    let (u, digits) = space.decode(cell);
                    let mut full = vec![0u64; self.ambient.prime_count()];
                    for (i, &p) in keep.iter().enumerate() {
                        full[p] = digits[i];
                    }
                    let orig = d.space.encode(u, &full);
                    bits.set(cell, d.bits.get(orig));
                }
                let alpha = alphas.iter().fold(1u64, |a, &b| lcm(a, b));
                let dense_at = vec![true; keep.len()];
                let mut pres = CMonoidPresentation {
                    ambient: sub_ambient,
                    alphas,
                    alpha,
                    backend: Backend::Dense(DensePattern { space, bits }),
                    generators: None,
                    dense_at,
                };
                pres.dense_at = validate_dense_invariants(&pres)?;
                Ok(pres)
            }
            Backend::Factored(f) => {
                let pattern = FactoredPattern {
                    sem: f.sem.clone(),
                    identity: f.identity,
                    unit_images: f.unit_images.clone(),
                    prime_images: keep.iter().map(|&p| f.prime_images[p]).collect(),
                    accept: f.accept.clone(),
                };
                CMonoidPresentation::from_factored(sub_ambient, pattern, &Caps::default())
            }
        }
    }

    /// Serialize the presentation. Dense patterns write the bit table in
    /// row-major (unit, exponent) order; factored patterns write their
    /// structural data. Round-trips are bit-exact.
    pub fn to_text(&self) -> String {
        let mut out = String::from("cmonoid v1\n");
        let fs: Vec<String> = self
            .ambient
            .units()
            .invariant_factors()
            .iter()
            .map(|d| d.to_string())
            .collect();
        out.push_str(&format!("units: {}\n", fs.join(" ")));
        out.push_str(&format!("primes: {}\n", self.ambient.primes().join(" ")));
        out.push_str(&format!("alpha: {}\n", self.alpha));
        let als: Vec<String> = self.alphas.iter().map(|a| a.to_string()).collect();
        out.push_str(&format!("alphas: {}\n", als.join(" ")));
        match &self.backend {
            Backend::Dense(d) => {
                out.push_str("backend: dense\n");
                let mut bits = String::with_capacity(d.space.cells());
                for i in 0..d.space.cells() {
                    bits.push(if d.bits.get(i) { '1' } else { '0' });
                }
                out.push_str(&format!("pattern: {bits}\n"));
            }
            Backend::Factored(f) => {
                out.push_str("backend: factored\n");
                out.push_str("sem:\n");
                out.push_str(&f.sem.to_text());
                out.push_str(".\n");
                out.push_str(&format!("identity: {}\n", f.identity));
                let ui: Vec<String> = f.unit_images.iter().map(|x| x.to_string()).collect();
                out.push_str(&format!("unit-images: {}\n", ui.join(" ")));
                let pi: Vec<String> = f.prime_images.iter().map(|x| x.to_string()).collect();
                out.push_str(&format!("prime-images: {}\n", pi.join(" ")));
                let acc: String = f
                    .accept
                    .iter()
                    .map(|&b| if b { '1' } else { '0' })
                    .collect();
                out.push_str(&format!("accept: {acc}\n"));
            }
        }
        out
    }

    pub fn from_text(text: &str, caps: &Caps) -> Result<Self, CMonoidError> {
        let mut lines = text.lines().peekable();
        let header = lines
            .next()
            .ok_or_else(|| CMonoidError::Parse("empty".into()))?;
        if header.trim() != "cmonoid v1" {
            return Err(CMonoidError::Parse(format!("bad header {header:?}")));
        }
        let field = |name: &str,
                     lines: &mut std::iter::Peekable<std::str::Lines>|
         -> Result<String, CMonoidError> {
            let line = lines
                .next()
                .ok_or_else(|| CMonoidError::Parse(format!("missing field {name}")))?;
            let (k, v) = line
                .split_once(':')
                .ok_or_else(|| CMonoidError::Parse(format!("bad line {line:?}")))?;
            if k.trim() != name {
                return Err(CMonoidError::Parse(format!(
                    "expected field {name}, found {k}"
                )));
            }
            Ok(v.trim().to_string())
        };
        let units_s = field("units", &mut lines)?;
        let factors: Vec<u64> = units_s
            .split_whitespace()
            .map(|t| t.parse().map_err(|e| CMonoidError::Parse(format!("{e}"))))
            .collect::<Result<_, _>>()?;
        let units = FiniteAbelianGroup::new(factors)?;
        let primes: Vec<String> = field("primes", &mut lines)?
            .split_whitespace()
            .map(str::to_string)
            .collect();
        let alpha: u64 = field("alpha", &mut lines)?
            .parse()
            .map_err(|e| CMonoidError::Parse(format!("{e}")))?;
        let alphas: Vec<u64> = field("alphas", &mut lines)?
            .split_whitespace()
            .map(|t| t.parse().map_err(|e| CMonoidError::Parse(format!("{e}"))))
            .collect::<Result<_, _>>()?;
        if alphas.len() != primes.len() || alphas.contains(&0) {
            return Err(CMonoidError::Parse("alphas do not match primes".into()));
        }
        if alpha != alphas.iter().fold(1u64, |a, &b| lcm(a, b)) {
            return Err(CMonoidError::Parse(
                "alpha is not the lcm of the per-prime periods".into(),
            ));
        }
        let ambient = FactorialMonoid::new(units.clone(), primes);
        let backend = field("backend", &mut lines)?;
        match backend.as_str() {
            "dense" => {
                let bits_s = field("pattern", &mut lines)?;
                let space = CellSpace::new(&units, &alphas);
                if bits_s.len() != space.cells() {
                    return Err(CMonoidError::Parse("pattern length mismatch".into()));
                }
                let mut bits = BitVec::zeros(space.cells());
                for (i, ch) in bits_s.chars().enumerate() {
                    match ch {
                        '1' => bits.set(i, true),
                        '0' => {}
                        _ => return Err(CMonoidError::Parse("pattern must be 0/1".into())),
                    }
                }
                let alpha = alphas.iter().fold(1u64, |a, &b| lcm(a, b));
                let mut pres = CMonoidPresentation {
                    ambient,
                    alphas,
                    alpha,
                    backend: Backend::Dense(DensePattern { space, bits }),
                    generators: None,
                    dense_at: vec![],
                };
                pres.dense_at = validate_dense_invariants(&pres)?;
                Ok(pres)
            }
            "factored" => {
                let sem_header = lines.next();
                if sem_header.map(str::trim) != Some("sem:") {
                    return Err(CMonoidError::Parse("expected sem: block".into()));
                }
                let mut table_text = String::new();
                for line in lines.by_ref() {
                    if line.trim() == "." {
                        break;
                    }
                    table_text.push_str(line);
                    table_text.push('\n');
                }
                let sem = FinCommSemigroup::from_text(&table_text)?;
                let identity: usize = field("identity", &mut lines)?
                    .parse()
                    .map_err(|e| CMonoidError::Parse(format!("{e}")))?;
                let unit_images: Vec<usize> = field("unit-images", &mut lines)?
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|e| CMonoidError::Parse(format!("{e}"))))
                    .collect::<Result<_, _>>()?;
                let prime_images: Vec<usize> = field("prime-images", &mut lines)?
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|e| CMonoidError::Parse(format!("{e}"))))
                    .collect::<Result<_, _>>()?;
                let accept: Vec<bool> = field("accept", &mut lines)?
                    .chars()
                    .map(|c| c == '1')
                    .collect();
                CMonoidPresentation::from_factored(
                    ambient,
                    FactoredPattern {
                        sem,
                        identity,
                        unit_images,
                        prime_images,
                        accept,
                    },
                    caps,
                )
            }
            other => Err(CMonoidError::Parse(format!("unknown backend {other}"))),
        }
    }
}

/// Witness that H is not seminormal: `element` is outside H while all of its
/// powers from `from_power` on are inside.
#[derive(Clone, Debug)]
pub struct SeminormalWitness {
    pub element: FactorialElement,
    pub from_power: u64,
}

#[derive(Clone, Debug)]
pub struct SeminormalStructureReport {
    pub all_h_classes_idempotent: bool,
    pub idempotency_witness: Option<usize>,
    pub constituent_of_smallest: FiniteAbelianGroup,
    pub completion_class_group: FiniteAbelianGroup,
    pub groups_isomorphic: bool,
}

impl SeminormalStructureReport {
    pub fn passed(&self) -> bool {
        self.all_h_classes_idempotent && self.groups_isomorphic
    }
}

// ---------------------------------------------------------------------------
// class semigroup
// ---------------------------------------------------------------------------

/// The class semigroup of H in F with its standard labels.
#[derive(Clone, Debug)]
pub struct ClassSemigroup {
    pub carrier: FinCommSemigroup,
    /// Lexicographically minimal reduced member of each class.
    pub representatives: Vec<FactorialElement>,
    /// Classes of elements of H.
    pub is_h_class: Vec<bool>,
    /// Classes of units of F.
    pub is_unit_class: Vec<bool>,
    /// Classes of (F \ F^x) ∪ {1} — the reduced class semigroup C*.
    pub is_star_class: Vec<bool>,
    pub identity_class: usize,
    /// Class of each ambient prime.
    pub prime_class: Vec<usize>,
    pub class_has_prime: Vec<bool>,
    /// Class of each unit element (indexed like units.elements()).
    pub unit_class_of: Vec<usize>,
}

impl ClassSemigroup {
    pub fn class_count(&self) -> usize {
        self.carrier.size()
    }

    /// The unit classes form a group isomorphic to F^x / H^x.
    pub fn units_group(&self) -> FiniteAbelianGroup {
        let mut classes: Vec<usize> = Vec::new();
        for &c in &self.unit_class_of {
            if !classes.contains(&c) {
                classes.push(c);
            }
        }
        classes.sort_unstable();
        let pos = |c: usize| classes.iter().position(|&x| x == c).unwrap();
        let id = pos(self.identity_class);
        let add = |a: usize, b: usize| pos(self.carrier.op(classes[a], classes[b]));
        crate::abelian::structure_from_table(classes.len(), id, &add)
    }

    /// The reduced class semigroup C* as a carrier, with the index map back
    /// to class ids.
    pub fn star_subsemigroup(&self) -> (FinCommSemigroup, Vec<usize>) {
        let subset: Vec<usize> = (0..self.class_count())
            .filter(|&c| self.is_star_class[c])
            .collect();
        self.carrier
            .subsemigroup(&subset)
            .expect("C* is closed under the operation")
    }

    /// Either the unit classes sit inside C*, or they meet it only in [1].
    pub fn unit_star_position_consistent(&self) -> bool {
        let inside = (0..self.class_count())
            .filter(|&c| self.is_unit_class[c])
            .all(|c| self.is_star_class[c]);
        let only_identity = (0..self.class_count())
            .filter(|&c| self.is_unit_class[c] && self.is_star_class[c])
            .all(|c| c == self.identity_class);
        inside || only_identity
    }
}

/// Clifford decomposition of C*(H, F).
#[derive(Clone, Debug)]
pub struct StarClifford {
    pub sub: FinCommSemigroup,
    /// Map from C* indices to class ids of the full class semigroup.
    pub to_class: Vec<usize>,
    pub clifford: CliffordDecomposition,
}

impl StarClifford {
    pub fn class_of_sub(&self, sub_index: usize) -> usize {
        self.to_class[sub_index]
    }

    pub fn sub_of_class(&self, class: usize) -> Option<usize> {
        self.to_class.iter().position(|&c| c == class)
    }
}

/// Union-of-groups verdict on C*(H, F), checked consistent with the same
/// verdict on the full class semigroup.
pub fn seminormality(cs: &ClassSemigroup) -> (bool, StarClifford) {
    let (sub, to_class) = cs.star_subsemigroup();
    let clifford = sub.clifford_decomposition();
    let full = cs.carrier.clifford_decomposition();
    debug_assert_eq!(
        clifford.is_union_of_groups, full.is_union_of_groups,
        "C and C* must agree on the union-of-groups property"
    );
    (
        clifford.is_union_of_groups,
        StarClifford {
            sub,
            to_class,
            clifford,
        },
    )
}

fn dense_class_semigroup(
    ambient: &FactorialMonoid,
    d: &DensePattern,
) -> Result<ClassSemigroup, CMonoidError> {
    let units = ambient.units();
    let space = &d.space;
    let cells = space.cells();

    // Moore refinement over the box monoid: start from the membership bit
    // and refine by the translation successors until stable. The resulting
    // partition is exactly H-equivalence (every box element is a product of
    // prime and unit-generator steps).
    let mut ids: Vec<u32> = (0..cells).map(|i| d.bits.get(i) as u32).collect();
    let mut count = renumber(&mut ids);
    let prime_moves = space.dims.len();
    let unit_moves = units.rank();
    loop {
        let before = count;
        for mv in 0..prime_moves + unit_moves {
            let succ = |cell: usize| {
                if mv < prime_moves {
                    space.succ_prime(cell, mv)
                } else {
                    space.succ_unit(units, cell, mv - prime_moves)
                }
            };
            count = refine_by(&mut ids, count, &succ);
        }
        if count == before {
            break;
        }
    }

    let k = count as usize;
    // representatives: first cell of each class (ids are numbered by first
    // occurrence, so class i's first cell is lex-minimal)
    let mut rep_cell = vec![usize::MAX; k];
    for (cell, &id) in ids.iter().enumerate() {
        if rep_cell[id as usize] == usize::MAX {
            rep_cell[id as usize] = cell;
        }
    }
    let representatives: Vec<FactorialElement> = rep_cell
        .iter()
        .map(|&cell| {
            let (u, digits) = space.decode(cell);
            FactorialElement {
                unit: space.unit_elems[u].clone(),
                exponents: digits,
            }
        })
        .collect();

    let mut table = vec![vec![0usize; k]; k];
    for i in 0..k {
        for j in 0..k {
            table[i][j] = ids[space.product(units, rep_cell[i], rep_cell[j])] as usize;
        }
    }

    // congruence verification
    if cells <= FULL_CONGRUENCE_CELLS {
        for x in 0..cells {
            for y in 0..cells {
                if ids[space.product(units, x, y)] as usize
                    != table[ids[x] as usize][ids[y] as usize]
                {
                    return Err(CMonoidError::NotACongruence);
                }
            }
        }
    } else {
        // translation stability plus representative products imply the
        // congruence for all pairs by induction over generator words
        for x in 0..cells {
            for j in 0..k {
                if ids[space.product(units, x, rep_cell[j])] as usize != table[ids[x] as usize][j] {
                    return Err(CMonoidError::NotACongruence);
                }
            }
        }
    }

    let mut is_h_class = vec![false; k];
    let mut is_unit_class = vec![false; k];
    let mut is_star_class = vec![false; k];
    for cell in 0..cells {
        let id = ids[cell] as usize;
        if d.bits.get(cell) {
            is_h_class[id] = true;
        }
        if cell % space.exp_cells == 0 {
            is_unit_class[id] = true;
        } else {
            is_star_class[id] = true;
        }
    }
    let identity_class = ids[0] as usize;
    is_star_class[identity_class] = true;
    let prime_class: Vec<usize> = (0..space.dims.len())
        .map(|p| ids[space.strides[p]] as usize)
        .collect();
    let mut class_has_prime = vec![false; k];
    for &c in &prime_class {
        class_has_prime[c] = true;
    }
    let unit_class_of: Vec<usize> = (0..space.unit_count)
        .map(|u| ids[u * space.exp_cells] as usize)
        .collect();

    let mut carrier = FinCommSemigroup::validate(table, None)?;
    let labels: Vec<String> = representatives
        .iter()
        .map(|r| format!("[{}]", ambient.display(r)))
        .collect();
    carrier.set_labels(labels);

    Ok(ClassSemigroup {
        carrier,
        representatives,
        is_h_class,
        is_unit_class,
        is_star_class,
        identity_class,
        prime_class,
        class_has_prime,
        unit_class_of,
    })
}

/// Reachable image values: unit images plus sums of prime images; with
/// `require_prime` only values involving at least one prime.
fn factored_reachable(f: &FactoredPattern, require_prime: bool) -> BitVec {
    let n = f.sem.size();
    let mut reach = BitVec::zeros(n);
    let mut queue: Vec<usize> = Vec::new();
    if require_prime {
        for &u in &f.unit_images {
            for &c in &f.prime_images {
                let v = f.sem.op(u, c);
                if !reach.get(v) {
                    reach.set(v, true);
                    queue.push(v);
                }
            }
        }
    } else {
        for &u in &f.unit_images {
            if !reach.get(u) {
                reach.set(u, true);
                queue.push(u);
            }
        }
    }
    while let Some(x) = queue.pop() {
        for &c in f.prime_images.iter().chain(&f.unit_images) {
            let y = f.sem.op(x, c);
            if !reach.get(y) {
                reach.set(y, true);
                queue.push(y);
            }
        }
    }
    reach
}

fn factored_class_semigroup(
    ambient: &FactorialMonoid,
    f: &FactoredPattern,
    alphas: &[u64],
) -> Result<ClassSemigroup, CMonoidError> {
    let reach = factored_reachable(f, false);
    let reach_elems: Vec<usize> = reach.iter_ones().collect();

    // classes = image values with equal translation signature over the
    // reachable set
    let mut sig_to_class: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let mut class_of_val: HashMap<usize, usize> = HashMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for &c in &reach_elems {
        let mut sig = vec![0u64; reach_elems.len().div_ceil(64)];
        for (i, &t) in reach_elems.iter().enumerate() {
            if f.accept[f.sem.op(t, c)] {
                sig[i >> 6] |= 1 << (i & 63);
            }
        }
        let next = sig_to_class.len();
        let id = *sig_to_class.entry(sig).or_insert(next);
        if id == members.len() {
            members.push(Vec::new());
        }
        members[id].push(c);
        class_of_val.insert(c, id);
    }

    // lexicographically minimal reduced preimage per class
    let mut reps: Vec<FactorialElement> = Vec::with_capacity(members.len());
    for member in &members {
        reps.push(lexmin_preimage(ambient, f, alphas, member).ok_or(CMonoidError::NotACongruence)?);
    }
    // renumber classes by representative order (identity first, as for the
    // dense backend where ids follow the first box cell)
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&a, &b| reps[a].cmp(&reps[b]));
    let mut new_id = vec![0usize; members.len()];
    for (new, &old) in order.iter().enumerate() {
        new_id[old] = new;
    }
    let class_of = |v: usize| -> usize { new_id[class_of_val[&v]] };
    let k = members.len();
    let mut representatives = vec![
        FactorialElement {
            unit: vec![],
            exponents: vec![]
        };
        k
    ];
    let mut class_members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for old in 0..k {
        representatives[new_id[old]] = reps[old].clone();
        class_members[new_id[old]] = members[old].clone();
    }

    let mut table = vec![vec![0usize; k]; k];
    for i in 0..k {
        for j in 0..k {
            table[i][j] = class_of(f.sem.op(class_members[i][0], class_members[j][0]));
        }
    }
    // congruence check over all reachable pairs
    for &a in &reach_elems {
        for &b in &reach_elems {
            if class_of(f.sem.op(a, b)) != table[class_of(a)][class_of(b)] {
                return Err(CMonoidError::NotACongruence);
            }
        }
    }

    let mut is_h_class = vec![false; k];
    for &v in &reach_elems {
        if f.accept[v] {
            is_h_class[class_of(v)] = true;
        }
    }
    let mut is_unit_class = vec![false; k];
    for &u in &f.unit_images {
        is_unit_class[class_of(u)] = true;
    }
    let identity_class = class_of(f.identity);
    let mut is_star_class = vec![false; k];
    let star_reach = factored_reachable(f, true);
    for v in star_reach.iter_ones() {
        is_star_class[class_of(v)] = true;
    }
    is_star_class[identity_class] = true;
    let prime_class: Vec<usize> = f.prime_images.iter().map(|&c| class_of(c)).collect();
    let mut class_has_prime = vec![false; k];
    for &c in &prime_class {
        class_has_prime[c] = true;
    }
    let unit_class_of: Vec<usize> = f.unit_images.iter().map(|&u| class_of(u)).collect();

    let mut carrier = FinCommSemigroup::validate(table, None)?;
    let labels: Vec<String> = representatives
        .iter()
        .map(|r| format!("[{}]", ambient.display(r)))
        .collect();
    carrier.set_labels(labels);

    Ok(ClassSemigroup {
        carrier,
        representatives,
        is_h_class,
        is_unit_class,
        is_star_class,
        identity_class,
        prime_class,
        class_has_prime,
        unit_class_of,
    })
}

/// Greedy lexicographically minimal reduced element whose image lies in the
/// given value set. Suffix-reachability over the codomain makes each digit
/// choice exact.
fn lexmin_preimage(
    ambient: &FactorialMonoid,
    f: &FactoredPattern,
    alphas: &[u64],
    targets: &[usize],
) -> Option<FactorialElement> {
    let n = f.sem.size();
    let pcount = f.prime_images.len();
    let target_set = {
        let mut s = vec![false; n];
        for &t in targets {
            s[t] = true;
        }
        s
    };
    // reach[j] = values of sums over primes j.. with reduced multiplicities
    let mut reach: Vec<Vec<bool>> = vec![vec![false; n]; pcount + 1];
    reach[pcount][f.identity] = true;
    for j in (0..pcount).rev() {
        let c = f.prime_images[j];
        let mut acc = vec![false; n];
        for m in 0..(2 * alphas[j]) {
            let mc = if m == 0 {
                f.identity
            } else {
                f.sem.multiple(m, c)
            };
            for v in 0..n {
                if reach[j + 1][v] {
                    acc[f.sem.op(mc, v)] = true;
                }
            }
        }
        reach[j] = acc;
    }
    let unit_elems = ambient.units().elements();
    for (u, _) in unit_elems.iter().enumerate() {
        let start = f.unit_images[u];
        let can =
            |cur: usize, j: usize| (0..n).any(|v| reach[j][v] && target_set[f.sem.op(cur, v)]);
        if !can(start, 0) {
            continue;
        }
        let mut cur = start;
        let mut digits = vec![0u64; pcount];
        for j in 0..pcount {
            for m in 0..(2 * alphas[j]) {
                let val = if m == 0 {
                    cur
                } else {
                    f.sem.op(cur, f.sem.multiple(m, f.prime_images[j]))
                };
                if can(val, j + 1) {
                    digits[j] = m;
                    cur = val;
                    break;
                }
            }
        }
        debug_assert!(target_set[cur]);
        return Some(FactorialElement {
            unit: unit_elems[u].clone(),
            exponents: digits,
        });
    }
    None
}

// ---------------------------------------------------------------------------
// dense construction & certification
// ---------------------------------------------------------------------------

fn build_dense(
    ambient: FactorialMonoid,
    oracle: &dyn WindowOracle,
    caps: &Caps,
    generators: Option<Vec<FactorialElement>>,
    alpha_hint: Option<u64>,
    floor: &[u64],
) -> Result<CMonoidPresentation, CMonoidError> {
    let units = ambient.units().clone();
    let unit_count = units.order() as usize;
    let pcount = ambient.prime_count();

    let mut alphas: Vec<u64> = match alpha_hint {
        Some(a) => vec![a.max(1); pcount],
        None => floor.to_vec(),
    };
    // Per-prime scan to a fixpoint: find the least alpha_p such that the
    // oracle agrees with its own p-reduction on the window
    // [0,2a_q)^(q!=p) x [0,4a_p), with the other coordinates at their
    // current values. Values only grow, so this terminates.
    loop {
        let mut changed = false;
        for p in 0..pcount {
            let mut found = None;
            for cand in alphas[p]..=caps.alpha_cap.max(alphas[p]) {
                if alpha_hint.is_some() && cand != alphas[p] {
                    break;
                }
                if check_prime_window(&ambient, oracle, &alphas, p, cand, caps)? {
                    found = Some(cand);
                    break;
                }
            }
            match found {
                Some(a) => {
                    if a != alphas[p] {
                        alphas[p] = a;
                        changed = true;
                    }
                }
                None => {
                    return Err(CMonoidError::NoAlphaFound {
                        cap: caps.alpha_cap,
                        prime: p,
                    })
                }
            }
        }
        if !changed {
            break;
        }
    }

    let space = CellSpace::new(&units, &alphas);
    if space.cells() > caps.box_cells {
        return Err(CMonoidError::BoxTooLarge {
            cells: space.cells(),
            cap: caps.box_cells,
        });
    }
    let bits = oracle.fill(unit_count, &space.dims);
    let alpha = alphas.iter().fold(1u64, |a, &b| lcm(a, b));
    let dense_at = vec![true; space.dims.len()];
    let mut pres = CMonoidPresentation {
        ambient,
        alphas,
        alpha,
        backend: Backend::Dense(DensePattern { space, bits }),
        generators,
        dense_at,
    };
    pres.dense_at = validate_dense_invariants(&pres)?;
    Ok(pres)
}

/// Truncation consistency for one prime: every window cell must agree with
/// its p-reduction. This subsumes the pairwise period checks.
fn check_prime_window(
    ambient: &FactorialMonoid,
    oracle: &dyn WindowOracle,
    alphas: &[u64],
    p: usize,
    cand: u64,
    caps: &Caps,
) -> Result<bool, CMonoidError> {
    let unit_count = ambient.units().order() as usize;
    let mut dims: Vec<u64> = alphas.iter().map(|&a| 2 * a).collect();
    dims[p] = 4 * cand;
    let cells = unit_count
        .checked_mul(total_cells(&dims))
        .ok_or(CMonoidError::BoxTooLarge {
            cells: usize::MAX,
            cap: caps.window_cells,
        })?;
    if cells > caps.window_cells {
        return Err(CMonoidError::BoxTooLarge {
            cells,
            cap: caps.window_cells,
        });
    }
    let bits = oracle.fill(unit_count, &dims);
    let strides = crate::util::strides(&dims);
    let exp_cells = total_cells(&dims);
    for cell in 0..bits.len() {
        let dp = (cell % exp_cells / strides[p]) as u64 % dims[p];
        let rp = reduce_exponent(dp, cand);
        if rp != dp {
            let reduced = cell - ((dp - rp) as usize) * strides[p];
            if bits.get(cell) != bits.get(reduced) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Structural invariants of a dense pattern; returns the per-prime density
/// flags.
fn validate_dense_invariants(pres: &CMonoidPresentation) -> Result<Vec<bool>, CMonoidError> {
    let (space, bits) = match &pres.backend {
        Backend::Dense(d) => (&d.space, &d.bits),
        Backend::Factored(_) => return Ok(pres.dense_at.clone()),
    };
    let units = pres.ambient.units();
    if !bits.get(0) {
        return Err(CMonoidError::InvalidPattern("1 is not in H".into()));
    }
    // multiplicativity on the box closure; for very large supports restrict
    // the second factor to low-degree members
    let support: Vec<usize> = bits.iter_ones().collect();
    let full_pairs = support.len().saturating_mul(support.len()) <= 40_000_000;
    let small: Vec<usize> = if full_pairs {
        support.clone()
    } else {
        let mut by_degree: Vec<(u64, usize)> = support
            .iter()
            .map(|&cell| {
                let (_, digits) = space.decode(cell);
                (digits.iter().sum::<u64>(), cell)
            })
            .collect();
        by_degree.sort_unstable();
        let cap = 40_000_000 / support.len().max(1);
        by_degree
            .into_iter()
            .take(cap.max(16))
            .map(|(_, c)| c)
            .collect()
    };
    for &a in &support {
        for &b in &small {
            if !bits.get(space.product(units, a, b)) {
                return Err(CMonoidError::InvalidPattern(
                    "membership pattern is not multiplicative on the box".into(),
                ));
            }
        }
    }
    // unit trace subgroup
    let trace: Vec<usize> = (0..space.unit_count)
        .filter(|&u| bits.get(u * space.exp_cells))
        .collect();
    for &a in &trace {
        for &b in &trace {
            let s = units.index_of(&units.add(&space.unit_elems[a], &space.unit_elems[b]));
            if !bits.get(s * space.exp_cells) {
                return Err(CMonoidError::InvalidPattern(
                    "unit trace is not a subgroup".into(),
                ));
            }
        }
    }
    // density flags: gcd of the observed positive p-exponents
    let mut dense_at = Vec::with_capacity(space.dims.len());
    for p in 0..space.dims.len() {
        let mut g = 0u64;
        for &cell in &support {
            let v = (cell % space.exp_cells / space.strides[p]) as u64 % space.dims[p];
            if v > 0 {
                g = gcd(g, v);
            }
        }
        dense_at.push(g == 1);
    }
    Ok(dense_at)
}

/// Decide eventual membership from a power walk: states[k] is membership of
/// x^(k+1) and the walk repeats its state from power `pre + period`
/// (states.len() = pre + period - 1). All cycle states must be members.
fn finish_walk(states: &[bool], pre: u64) -> Option<u64> {
    let cycle_ok = states[(pre - 1) as usize..].iter().all(|&b| b);
    if !cycle_ok {
        return None;
    }
    let mut m = pre;
    while m > 1 && states[(m - 2) as usize] {
        m -= 1;
    }
    Some(m)
}

fn renumber(ids: &mut [u32]) -> u32 {
    let mut map: HashMap<u32, u32> = HashMap::new();
    let mut next = 0u32;
    for id in ids.iter_mut() {
        let e = map.entry(*id).or_insert_with(|| {
            let v = next;
            next += 1;
            v
        });
        *id = *e;
    }
    next
}

/// One refinement step: split classes by the successor's class. New ids are
/// numbered by first occurrence, preserving the lex-minimal-representative
/// ordering.
fn refine_by(ids: &mut Vec<u32>, count: u32, succ: &dyn Fn(usize) -> usize) -> u32 {
    let n = ids.len();
    let key_space = count as u64 * count as u64;
    let mut next = 0u32;
    let mut out = vec![0u32; n];
    if key_space <= (1 << 26) {
        let mut map = vec![u32::MAX; key_space as usize];
        for x in 0..n {
            let key = (ids[x] as u64 * count as u64 + ids[succ(x)] as u64) as usize;
            if map[key] == u32::MAX {
                map[key] = next;
                next += 1;
            }
            out[x] = map[key];
        }
    } else {
        let mut map: HashMap<u64, u32> = HashMap::new();
        for x in 0..n {
            let key = ids[x] as u64 * count as u64 + ids[succ(x)] as u64;
            let e = map.entry(key).or_insert_with(|| {
                let v = next;
                next += 1;
                v
            });
            out[x] = *e;
        }
    }
    *ids = out;
    next
}

/// Enumerate exponent vectors of exact total degree `deg` in lexicographic
/// order, invoking the callback on each.
fn collect_degree(exps: &mut Vec<u64>, from: usize, deg: u64, f: &mut dyn FnMut(&[u64])) {
    if from == exps.len() {
        if deg == 0 {
            f(exps);
        }
        return;
    }
    if from + 1 == exps.len() {
        exps[from] = deg;
        f(exps);
        exps[from] = 0;
        return;
    }
    for v in 0..=deg {
        exps[from] = v;
        collect_degree(exps, from + 1, deg - v, f);
    }
    exps[from] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::from_abelian_group;

    fn free_monoid(primes: usize) -> FactorialMonoid {
        FactorialMonoid::free(primes)
    }

    fn numerical_23() -> CMonoidPresentation {
        // H = <p^2, p^3> in F({p})
        let f = free_monoid(1);
        let gens = vec![
            f.element(vec![], vec![2]).unwrap(),
            f.element(vec![], vec![3]).unwrap(),
        ];
        CMonoidPresentation::from_generators(f, gens, None, &Caps::default()).unwrap()
    }

    #[test]
    fn h_equals_f_is_trivial() {
        let f = free_monoid(1);
        let gens = vec![f.prime(0)];
        let h = CMonoidPresentation::from_generators(f, gens, None, &Caps::default()).unwrap();
        assert_eq!(h.alpha(), 1);
        for e in 0..6 {
            let a = h.ambient().element(vec![], vec![e]).unwrap();
            assert!(h.membership(&a).unwrap());
        }
        let cs = h.class_semigroup().unwrap();
        assert_eq!(cs.class_count(), 1);
        let (sn, _) = seminormality(&cs);
        assert!(sn);
        assert!(h.seminormal_bruteforce(&Caps::default()).unwrap().is_none());
    }

    #[test]
    fn numerical_monoid_pattern() {
        let h = numerical_23();
        // pattern of <2,3>: 0 yes, 1 no, everything >= 2 yes; period 1 from
        // threshold 2 means the discovered per-prime alpha is 2
        assert_eq!(h.alphas(), &[2]);
        assert_eq!(h.alpha(), 2);
        let f = h.ambient().clone();
        let member = |e: u64| h.membership(&f.element(vec![], vec![e]).unwrap()).unwrap();
        for e in 0..12 {
            let expected = e != 1;
            assert_eq!(member(e), expected, "exponent {e}");
        }
    }

    #[test]
    fn alpha_hint_is_verified() {
        let f = free_monoid(1);
        let gens = vec![
            f.element(vec![], vec![2]).unwrap(),
            f.element(vec![], vec![3]).unwrap(),
        ];
        let h = CMonoidPresentation::from_generators(
            f.clone(),
            gens.clone(),
            Some(2),
            &Caps::default(),
        )
        .unwrap();
        assert_eq!(h.alphas(), &[2]);
        // a hint that does not certify is rejected
        let err = CMonoidPresentation::from_generators(f, gens, Some(1), &Caps::default());
        assert!(matches!(err, Err(CMonoidError::NoAlphaFound { .. })));
    }

    #[test]
    fn only_even_exponents_is_not_dense() {
        let f = free_monoid(1);
        let gens = vec![f.element(vec![], vec![2]).unwrap()];
        let err = CMonoidPresentation::from_generators(f, gens, None, &Caps::default());
        assert!(matches!(err, Err(CMonoidError::NotDense { prime: 0 })));
    }

    #[test]
    fn generator_closure_that_never_stabilizes_is_rejected() {
        // <p1p2, p2, p1^2 p2, p2^2>: v_{p2}-degree bounds v_{p1} in the true
        // closure, so no finite period certifies it
        let f = free_monoid(2);
        let gens = vec![
            f.element(vec![], vec![1, 1]).unwrap(),
            f.element(vec![], vec![0, 1]).unwrap(),
            f.element(vec![], vec![2, 1]).unwrap(),
            f.element(vec![], vec![0, 2]).unwrap(),
        ];
        let err = CMonoidPresentation::from_generators(f, gens, None, &Caps::default());
        assert!(matches!(err, Err(CMonoidError::NoAlphaFound { .. })));
    }

    #[test]
    fn membership_factors_through_reduction() {
        let h = numerical_23();
        let f = h.ambient().clone();
        for e in 0..30u64 {
            let a = f.element(vec![], vec![e]).unwrap();
            let r = h.reduce(&a);
            assert_eq!(h.membership(&a).unwrap(), h.membership(&r).unwrap());
            // uniform-alpha reduction agrees as well
            let ru = f.alpha_reduce(&a, h.alpha());
            assert_eq!(h.membership(&a).unwrap(), h.membership(&ru).unwrap());
        }
    }

    #[test]
    fn h_equivalence_on_numerical_monoid() {
        let h = numerical_23();
        let f = h.ambient().clone();
        let el = |e: u64| f.element(vec![], vec![e]).unwrap();
        // reflexivity
        assert!(h.h_equivalent(&el(5), &el(5)).unwrap());
        // 2 and 3 are both "in H and stay in H": oracle:
        // membership(x+2) vs membership(x+3): x=0: yes/yes; x=1: yes/yes, all yes
        assert!(h.h_equivalent(&el(2), &el(3)).unwrap());
        // 0 vs 1: x=1 gives 1 not in H vs 2 in H
        assert!(!h.h_equivalent(&el(0), &el(1)).unwrap());
        let cs = h.class_semigroup().unwrap();
        // classes: [1], [p], [p^2]=[p^3]=...
        assert_eq!(cs.class_count(), 3);
        assert!(cs.is_h_class[cs.identity_class]);
    }

    #[test]
    fn numerical_monoid_is_seminormal_and_krullish() {
        let h = numerical_23();
        let cs = h.class_semigroup().unwrap();
        let (sn, star) = seminormality(&cs);
        // <2,3> is seminormal: x^n in H for all n >= 2 implies x in H fails
        // only for x = p, and p^1 is not eventually... p^n in H for n >= 2, so
        // p is in H' \ H: NOT seminormal.
        assert!(!sn);
        assert!(!star.clifford.is_union_of_groups);
        let w = h.seminormal_bruteforce(&Caps::default()).unwrap().unwrap();
        assert_eq!(w.element.exponents, vec![1]);
        assert_eq!(w.from_power, 2);
    }

    #[test]
    fn factored_z2_pattern() {
        // membership factors through Z/2: multiplicity parity
        let f = free_monoid(1);
        let sem = from_abelian_group(&FiniteAbelianGroup::cyclic(2));
        let pattern = FactoredPattern {
            sem,
            identity: 0,
            unit_images: vec![0],
            prime_images: vec![1],
            accept: vec![true, false],
        };
        let h = CMonoidPresentation::from_factored(f, pattern, &Caps::default()).unwrap();
        assert_eq!(h.alphas(), &[2]);
        let f = h.ambient().clone();
        for e in 0..10u64 {
            let a = f.element(vec![], vec![e]).unwrap();
            assert_eq!(h.membership(&a).unwrap(), e % 2 == 0);
        }
        let cs = h.class_semigroup().unwrap();
        assert_eq!(cs.class_count(), 2);
        let (sn, star) = seminormality(&cs);
        assert!(sn);
        assert!(star.clifford.is_union_of_groups);
        assert!(h.seminormal_bruteforce(&Caps::default()).unwrap().is_none());
        // q(F)/q(H) = Z/2
        let cg = h.class_group_of_completion(&Caps::default()).unwrap();
        assert_eq!(cg.invariant_factors(), &[2]);
    }

    #[test]
    fn factored_matches_dense_on_parity_monoid() {
        let sem = from_abelian_group(&FiniteAbelianGroup::cyclic(2));
        let pattern = FactoredPattern {
            sem,
            identity: 0,
            unit_images: vec![0],
            prime_images: vec![1, 1],
            accept: vec![true, false],
        };
        let fac =
            CMonoidPresentation::from_factored(free_monoid(2), pattern, &Caps::default()).unwrap();
        let dense = CMonoidPresentation::from_membership_oracle(
            free_monoid(2),
            &|_, e: &[u64]| (e[0] + e[1]) % 2 == 0,
            None,
            &Caps::default(),
        )
        .unwrap();
        assert_eq!(fac.alphas(), dense.alphas());
        let cs_f = fac.class_semigroup().unwrap();
        let cs_d = dense.class_semigroup().unwrap();
        assert_eq!(cs_f.class_count(), cs_d.class_count());
        assert_eq!(cs_f.representatives, cs_d.representatives);
        for i in 0..cs_f.class_count() {
            for j in 0..cs_f.class_count() {
                assert_eq!(cs_f.carrier.op(i, j), cs_d.carrier.op(i, j));
            }
            assert_eq!(cs_f.is_h_class[i], cs_d.is_h_class[i]);
            assert_eq!(cs_f.is_unit_class[i], cs_d.is_unit_class[i]);
            assert_eq!(cs_f.is_star_class[i], cs_d.is_star_class[i]);
        }
    }

    #[test]
    fn unit_quotient() {
        // F^x = Z/4, H^x = {0, 2}: F^x/H^x = Z/2
        let units = FiniteAbelianGroup::cyclic(4);
        let f = FactorialMonoid::new(units, vec!["p".into()]);
        let oracle = |u: usize, e: &[u64]| {
            if e[0] == 0 {
                u == 0 || u == 2
            } else {
                true
            }
        };
        let h = CMonoidPresentation::from_membership_oracle(f, &oracle, None, &Caps::default())
            .unwrap();
        assert_eq!(h.unit_quotient_group().invariant_factors(), &[2]);
        let cs = h.class_semigroup().unwrap();
        assert_eq!(cs.units_group().invariant_factors(), &[2]);
        assert!(cs.unit_star_position_consistent());
    }

    #[test]
    fn theorem_verification_requires_seminormality() {
        let h = numerical_23();
        let cs = h.class_semigroup().unwrap();
        assert!(matches!(
            h.verify_theorem_seminormal(&cs, &Caps::default()),
            Err(CMonoidError::PreconditionNotSeminormal)
        ));
        // H = F passes trivially
        let f = free_monoid(1);
        let hf = CMonoidPresentation::from_generators(
            f,
            vec![FactorialMonoid::free(1).prime(0)],
            None,
            &Caps::default(),
        )
        .unwrap();
        let cs = hf.class_semigroup().unwrap();
        let report = hf.verify_theorem_seminormal(&cs, &Caps::default()).unwrap();
        assert!(report.passed());
        assert!(report.constituent_of_smallest.is_trivial());
    }

    #[test]
    fn serialization_roundtrip_dense() {
        let h = numerical_23();
        let text = h.to_text();
        let back = CMonoidPresentation::from_text(&text, &Caps::default()).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.alphas(), h.alphas());
    }

    #[test]
    fn serialization_rejects_malformed_text() {
        let h = numerical_23();
        let good = h.to_text();
        assert!(good.contains("alpha: 2\n"));
        assert!(good.contains("alphas: 2\n"));
        let caps = Caps::default();
        assert!(matches!(
            CMonoidPresentation::from_text("nonsense v9\n", &caps),
            Err(CMonoidError::Parse(_))
        ));
        let truncated = good.replace("pattern: 1011", "pattern: 1");
        assert!(matches!(
            CMonoidPresentation::from_text(&truncated, &caps),
            Err(CMonoidError::Parse(_))
        ));
        let wrong_alpha = good.replace("alpha: 2", "alpha: 3");
        assert!(matches!(
            CMonoidPresentation::from_text(&wrong_alpha, &caps),
            Err(CMonoidError::Parse(_))
        ));
    }

    #[test]
    fn serialization_roundtrip_factored() {
        let sem = from_abelian_group(&FiniteAbelianGroup::cyclic(2));
        let pattern = FactoredPattern {
            sem,
            identity: 0,
            unit_images: vec![0],
            prime_images: vec![1],
            accept: vec![true, false],
        };
        let h =
            CMonoidPresentation::from_factored(free_monoid(1), pattern, &Caps::default()).unwrap();
        let text = h.to_text();
        let back = CMonoidPresentation::from_text(&text, &Caps::default()).unwrap();
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn restriction_keeps_membership() {
        let f = free_monoid(2);
        let oracle = |_: usize, e: &[u64]| (e[0] + e[1]) % 2 == 0;
        let h = CMonoidPresentation::from_membership_oracle(f, &oracle, None, &Caps::default())
            .unwrap();
        let hk = h.restrict_primes(&[0]).unwrap();
        assert_eq!(hk.ambient().prime_count(), 1);
        for e in 0..8u64 {
            let a = hk.ambient().element(vec![], vec![e]).unwrap();
            assert_eq!(hk.membership(&a).unwrap(), e % 2 == 0);
        }
    }
}
