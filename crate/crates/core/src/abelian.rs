//! Exact arithmetic for finite(ly generated) abelian groups.
//!
//! Groups are kept in invariant-factor form `Z/d1 ⊕ … ⊕ Z/dr` with
//! `2 ≤ d1 | d2 | … | dr`; the empty list is the trivial group. Elements are
//! integer vectors reduced component-wise. Quotients of `torsion ⊕ Z^rank`
//! by finitely many relations are computed through an integer Smith normal
//! form, which is also exposed directly.

use std::fmt;

use crate::util::{factorize, gcd, lcm};

/// Element of a [`FiniteAbelianGroup`]: one residue per invariant factor.
pub type Elem = Vec<u64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbelianError {
    /// Invariant factors must satisfy d_i >= 2 and d_i | d_{i+1}.
    BadInvariantFactors(Vec<u64>),
    /// A relation vector has the wrong length for the ambient group.
    BadRelationLength { expected: usize, got: usize },
    /// The quotient has positive free rank.
    InfiniteQuotient { free_rank: usize },
    /// Generator image order does not divide the generator order.
    IllFormedHom { generator: usize },
    /// Mismatched element length.
    BadElement,
    /// Group too large for exhaustive enumeration.
    TooLarge { order: u64, cap: u64 },
}

impl fmt::Display for AbelianError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbelianError::BadInvariantFactors(v) => {
                write!(f, "invalid invariant factors {v:?}")
            }
            AbelianError::BadRelationLength { expected, got } => {
                write!(f, "relation has length {got}, expected {expected}")
            }
            AbelianError::InfiniteQuotient { free_rank } => {
                write!(f, "quotient is infinite (free rank {free_rank})")
            }
            AbelianError::IllFormedHom { generator } => {
                write!(f, "image of generator {generator} has incompatible order")
            }
            AbelianError::BadElement => write!(f, "element has wrong length"),
            AbelianError::TooLarge { order, cap } => {
                write!(f, "group of order {order} exceeds enumeration cap {cap}")
            }
        }
    }
}

impl std::error::Error for AbelianError {}

/// Default cap on exhaustively enumerated group orders.
pub const ENUMERATION_CAP: u64 = 4096;

/// A finite abelian group in invariant-factor form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    factors: Vec<u64>,
}

impl fmt::Debug for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            write!(f, "Z/1")
        } else {
            let parts: Vec<String> = self.factors.iter().map(|d| format!("Z/{d}")).collect();
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl FiniteAbelianGroup {
    pub fn new(factors: Vec<u64>) -> Result<Self, AbelianError> {
        for i in 0..factors.len() {
            if factors[i] < 2 {
                return Err(AbelianError::BadInvariantFactors(factors));
            }
            if i + 1 < factors.len() && factors[i + 1] % factors[i] != 0 {
                return Err(AbelianError::BadInvariantFactors(factors));
            }
        }
        Ok(FiniteAbelianGroup { factors })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup { factors: vec![] }
    }

    /// Z/n; n = 1 gives the trivial group.
    pub fn cyclic(n: u64) -> Self {
        if n <= 1 {
            Self::trivial()
        } else {
            FiniteAbelianGroup { factors: vec![n] }
        }
    }

    /// Direct sum, renormalized to invariant-factor form.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut primary: Vec<(u64, u32)> = Vec::new();
        for d in self.factors.iter().chain(&other.factors) {
            for (p, e) in factorize(*d) {
                primary.push((p, e));
            }
        }
        from_primary_decomposition(&primary)
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn exponent(&self) -> u64 {
        self.factors.last().copied().unwrap_or(1)
    }

    pub fn zero(&self) -> Elem {
        vec![0; self.factors.len()]
    }

    pub fn is_valid(&self, a: &Elem) -> bool {
        a.len() == self.factors.len() && a.iter().zip(&self.factors).all(|(&x, &d)| x < d)
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        debug_assert!(self.is_valid(a) && self.is_valid(b));
        a.iter()
            .zip(b)
            .zip(&self.factors)
            .map(|((&x, &y), &d)| (x + y) % d)
            .collect()
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        debug_assert!(self.is_valid(a));
        a.iter()
            .zip(&self.factors)
            .map(|(&x, &d)| (d - x) % d)
            .collect()
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        self.add(a, &self.neg(b))
    }

    pub fn scalar_mul(&self, k: u64, a: &Elem) -> Elem {
        a.iter()
            .zip(&self.factors)
            .map(|(&x, &d)| (x % d * (k % d)) % d)
            .collect()
    }

    /// Reduce an integer vector component-wise into the group.
    pub fn reduce(&self, a: &[i64]) -> Result<Elem, AbelianError> {
        if a.len() != self.factors.len() {
            return Err(AbelianError::BadElement);
        }
        Ok(a.iter()
            .zip(&self.factors)
            .map(|(&x, &d)| x.rem_euclid(d as i64) as u64)
            .collect())
    }

    pub fn order_of(&self, a: &Elem) -> u64 {
        let mut n = 1;
        for (&x, &d) in a.iter().zip(&self.factors) {
            n = lcm(n, d / gcd(x, d));
        }
        n
    }

    /// k-th canonical generator e_k.
    pub fn generator(&self, k: usize) -> Elem {
        let mut e = self.zero();
        e[k] = 1;
        e
    }

    /// All elements in lexicographic order (index 0 is the zero element).
    pub fn elements(&self) -> Vec<Elem> {
        let mut out = vec![self.zero()];
        for (i, &d) in self.factors.iter().enumerate() {
            let prev = std::mem::take(&mut out);
            for e in prev {
                for v in 0..d {
                    let mut e2 = e.clone();
                    e2[i] = v;
                    out.push(e2);
                }
            }
        }
        out
    }

    /// Index of an element under the ordering of [`elements`](Self::elements).
    pub fn index_of(&self, a: &Elem) -> usize {
        debug_assert!(self.is_valid(a));
        let mut idx = 0usize;
        for (&x, &d) in a.iter().zip(&self.factors) {
            idx = idx * d as usize + x as usize;
        }
        idx
    }

    pub fn element_at(&self, mut idx: usize) -> Elem {
        let mut out = self.zero();
        for i in (0..self.factors.len()).rev() {
            let d = self.factors[i] as usize;
            out[i] = (idx % d) as u64;
            idx /= d;
        }
        out
    }

    /// Closure of a generating set; returns a sorted element list.
    pub fn subgroup_closure(&self, gens: &[Elem]) -> Vec<Elem> {
        let mut seen = std::collections::BTreeSet::new();
        seen.insert(self.zero());
        let mut queue: Vec<Elem> = vec![self.zero()];
        while let Some(x) = queue.pop() {
            for g in gens {
                let y = self.add(&x, g);
                if seen.insert(y.clone()) {
                    queue.push(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    pub fn is_subgroup(&self, set: &[Elem]) -> bool {
        let lookup: std::collections::BTreeSet<&Elem> = set.iter().collect();
        if !lookup.contains(&self.zero()) {
            return false;
        }
        for a in set {
            for b in set {
                if !lookup.contains(&self.add(a, b)) {
                    return false;
                }
            }
        }
        true
    }
}

/// Sum A + B = {a + b} of two subgroups given extensionally.
pub fn subgroup_sum(group: &FiniteAbelianGroup, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    let mut out = std::collections::BTreeSet::new();
    for x in a {
        for y in b {
            out.insert(group.add(x, y));
        }
    }
    out.into_iter().collect()
}

/// Canonical-form equality of invariant factors.
pub fn are_isomorphic(a: &FiniteAbelianGroup, b: &FiniteAbelianGroup) -> bool {
    a.invariant_factors() == b.invariant_factors()
}

fn from_primary_decomposition(primary: &[(u64, u32)]) -> FiniteAbelianGroup {
    // Group the p-power exponents per prime, sort descending, then zip the
    // largest together to form the top invariant factor and so on.
    let mut by_prime: std::collections::BTreeMap<u64, Vec<u32>> = std::collections::BTreeMap::new();
    for &(p, e) in primary {
        if e > 0 {
            by_prime.entry(p).or_default().push(e);
        }
    }
    let mut layers = 0usize;
    for exps in by_prime.values_mut() {
        exps.sort_unstable_by(|a, b| b.cmp(a));
        layers = layers.max(exps.len());
    }
    let mut factors_desc: Vec<u64> = Vec::new();
    for layer in 0..layers {
        let mut d = 1u64;
        for (p, exps) in &by_prime {
            if let Some(&e) = exps.get(layer) {
                d *= p.pow(e);
            }
        }
        factors_desc.push(d);
    }
    factors_desc.reverse();
    FiniteAbelianGroup {
        factors: factors_desc,
    }
}

/// Recover the abstract group of a finite abelian Cayley structure.
///
/// `add` and `identity` describe a group on indices `0..n`; the result is its
/// invariant-factor form, obtained by counting p^j-torsion per prime.
pub fn structure_from_table(
    n: usize,
    identity: usize,
    add: &dyn Fn(usize, usize) -> usize,
) -> FiniteAbelianGroup {
    if n <= 1 {
        return FiniteAbelianGroup::trivial();
    }
    let scalar = |mut k: u64, x: usize| -> usize {
        // repeated doubling
        let mut acc = identity;
        let mut base = x;
        while k > 0 {
            if k & 1 == 1 {
                acc = add(acc, base);
            }
            base = add(base, base);
            k >>= 1;
        }
        acc
    };
    let mut primary: Vec<(u64, u32)> = Vec::new();
    for (p, e) in factorize(n as u64) {
        let sylow = p.pow(e);
        // m[j] = #{x : p^j x = 0}; the count of cyclic factors with exponent
        // >= j is log_p(m[j] / m[j-1]).
        let mut counts_ge: Vec<u32> = Vec::new();
        let mut prev = 1u64;
        let mut j = 1;
        loop {
            let pj = p.pow(j);
            let m = (0..n).filter(|&x| scalar(pj, x) == identity).count() as u64;
            let ratio = m / prev;
            let mut c = 0u32;
            let mut r = ratio;
            while r > 1 {
                debug_assert_eq!(r % p, 0, "torsion counts must be p-powers");
                r /= p;
                c += 1;
            }
            counts_ge.push(c);
            prev = m;
            if m == sylow || c == 0 {
                break;
            }
            j += 1;
        }
        for j in 0..counts_ge.len() {
            let here = counts_ge[j];
            let next = counts_ge.get(j + 1).copied().unwrap_or(0);
            for _ in 0..(here - next) {
                primary.push((p, (j + 1) as u32));
            }
        }
    }
    let g = from_primary_decomposition(&primary);
    debug_assert_eq!(g.order(), n as u64);
    g
}

/// Homomorphism between finite abelian groups, given on canonical generators.
#[derive(Clone, Debug)]
pub struct GroupHom {
    domain: FiniteAbelianGroup,
    codomain: FiniteAbelianGroup,
    images: Vec<Elem>,
}

impl GroupHom {
    /// Checks d_k * images[k] = 0 so the map is well defined.
    pub fn new(
        domain: FiniteAbelianGroup,
        codomain: FiniteAbelianGroup,
        images: Vec<Elem>,
    ) -> Result<Self, AbelianError> {
        if images.len() != domain.rank() {
            return Err(AbelianError::BadElement);
        }
        for (k, img) in images.iter().enumerate() {
            if !codomain.is_valid(img) {
                return Err(AbelianError::BadElement);
            }
            let d = domain.invariant_factors()[k];
            if codomain.scalar_mul(d, img) != codomain.zero() {
                return Err(AbelianError::IllFormedHom { generator: k });
            }
        }
        Ok(GroupHom {
            domain,
            codomain,
            images,
        })
    }

    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        let images = (0..group.rank()).map(|k| group.generator(k)).collect();
        GroupHom {
            domain: group.clone(),
            codomain: group.clone(),
            images,
        }
    }

    pub fn domain(&self) -> &FiniteAbelianGroup {
        &self.domain
    }

    pub fn codomain(&self) -> &FiniteAbelianGroup {
        &self.codomain
    }

    pub fn apply(&self, a: &Elem) -> Elem {
        debug_assert!(self.domain.is_valid(a));
        let mut acc = self.codomain.zero();
        for (&x, img) in a.iter().zip(&self.images) {
            acc = self.codomain.add(&acc, &self.codomain.scalar_mul(x, img));
        }
        acc
    }

    pub fn compose(&self, then: &GroupHom) -> Result<GroupHom, AbelianError> {
        if self.codomain != then.domain {
            return Err(AbelianError::BadElement);
        }
        let images = self.images.iter().map(|img| then.apply(img)).collect();
        GroupHom::new(self.domain.clone(), then.codomain.clone(), images)
    }

    pub fn image(&self) -> Vec<Elem> {
        self.codomain.subgroup_closure(&self.images)
    }

    pub fn is_surjective(&self) -> bool {
        self.image().len() as u64 == self.codomain.order()
    }

    pub fn is_injective(&self) -> bool {
        self.kernel().map(|k| k.len() == 1).unwrap_or(false)
    }

    /// Exact kernel as a sorted element list (exhaustive scan).
    pub fn kernel(&self) -> Result<Vec<Elem>, AbelianError> {
        let order = self.domain.order();
        if order > ENUMERATION_CAP {
            return Err(AbelianError::TooLarge {
                order,
                cap: ENUMERATION_CAP,
            });
        }
        let zero = self.codomain.zero();
        Ok(self
            .domain
            .elements()
            .into_iter()
            .filter(|a| self.apply(a) == zero)
            .collect())
    }
}

/// Exact kernel of `f`, per the scan in [`GroupHom::kernel`].
pub fn hom_kernel(f: &GroupHom) -> Result<Vec<Elem>, AbelianError> {
    f.kernel()
}

/// Dense integer matrix with exact i128 entries.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<i128>,
}

impl fmt::Debug for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<i128> = (0..self.cols).map(|c| self[(r, c)]).collect();
            writeln!(f, "  {row:?}")?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for IntMat {
    type Output = i128;
    fn index(&self, (r, c): (usize, usize)) -> &i128 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut i128 {
        &mut self.data[r * self.cols + c]
    }
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = x as i128;
            }
        }
        m
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows);
        let mut out = IntMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[a] += k * row[b]
    fn add_row(&mut self, a: usize, b: usize, k: i128) {
        for j in 0..self.cols {
            let v = self[(b, j)];
            self[(a, j)] += k * v;
        }
    }

    /// col[a] += k * col[b]
    fn add_col(&mut self, a: usize, b: usize, k: i128) {
        for i in 0..self.rows {
            let v = self[(i, b)];
            self[(i, a)] += k * v;
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            self[(a, j)] = -self[(a, j)];
        }
    }

    /// Determinant by fraction-free Bareiss elimination (square only).
    pub fn determinant(&self) -> i128 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return 1;
        }
        let mut m = self.clone();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if m[(k, k)] == 0 {
                let pivot = (k + 1..n).find(|&i| m[(i, k)] != 0);
                match pivot {
                    Some(i) => {
                        m.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    m[(i, j)] = (m[(i, j)] * m[(k, k)] - m[(i, k)] * m[(k, j)]) / prev;
                }
                m[(i, k)] = 0;
            }
            prev = m[(k, k)];
        }
        sign * m[(n - 1, n - 1)]
    }
}

/// Smith normal form decomposition: `s = u * m * v` with u, v unimodular and
/// s diagonal with a divisibility chain.
#[derive(Clone, Debug)]
pub struct SnfDecomposition {
    pub u: IntMat,
    pub s: IntMat,
    pub v: IntMat,
}

impl SnfDecomposition {
    pub fn diagonal(&self) -> Vec<i128> {
        (0..self.s.rows.min(self.s.cols))
            .map(|i| self.s[(i, i)])
            .collect()
    }
}

/// Smith normal form with a deterministic pivoting rule: the pivot is the
/// entry of smallest nonzero absolute value in the working submatrix, ties
/// broken by row-major position.
pub fn smith_normal_form(m: &IntMat) -> SnfDecomposition {
    let mut s = m.clone();
    let mut u = IntMat::identity(m.rows);
    let mut v = IntMat::identity(m.cols);
    let t_max = m.rows.min(m.cols);

    for t in 0..t_max {
        'stage: loop {
            // deterministic pivot selection
            let mut pivot: Option<(usize, usize, i128)> = None;
            for i in t..s.rows {
                for j in t..s.cols {
                    let val = s[(i, j)].abs();
                    if val != 0 && pivot.map(|(_, _, p)| val < p).unwrap_or(true) {
                        pivot = Some((i, j, val));
                    }
                }
            }
            let (pi, pj, _) = match pivot {
                Some(p) => p,
                None => return SnfDecomposition { u, s, v },
            };
            s.swap_rows(t, pi);
            u.swap_rows(t, pi);
            s.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..s.rows {
                if s[(i, t)] != 0 {
                    let q = div_nearest(s[(i, t)], s[(t, t)]);
                    if q != 0 {
                        s.add_row(i, t, -q);
                        u.add_row(i, t, -q);
                    }
                    if s[(i, t)] != 0 {
                        clean = false;
                    }
                }
            }
            for j in t + 1..s.cols {
                if s[(t, j)] != 0 {
                    let q = div_nearest(s[(t, j)], s[(t, t)]);
                    if q != 0 {
                        s.add_col(j, t, -q);
                        v.add_col(j, t, -q);
                    }
                    if s[(t, j)] != 0 {
                        clean = false;
                    }
                }
            }
            if !clean {
                continue 'stage;
            }
            // pivot divides the remaining submatrix?
            for i in t + 1..s.rows {
                for j in t + 1..s.cols {
                    if s[(i, j)] % s[(t, t)] != 0 {
                        s.add_row(t, i, 1);
                        u.add_row(t, i, 1);
                        continue 'stage;
                    }
                }
            }
            break;
        }
        if s[(t, t)] < 0 {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    SnfDecomposition { u, s, v }
}

/// Rounded division minimizing |a - q*b|.
fn div_nearest(a: i128, b: i128) -> i128 {
    debug_assert!(b != 0);
    let q = a / b;
    let r = a - q * b;
    if 2 * r.abs() > b.abs() {
        q + if (r < 0) == (b < 0) { 1 } else { -1 }
    } else {
        q
    }
}

/// Quotient of `torsion ⊕ Z^rank` by the subgroup generated by `relations`.
///
/// Relation vectors list the torsion coordinates first, then the free ones.
/// Fails with `InfiniteQuotient` if the result has positive free rank.
pub fn quotient_by_relations(
    rank: usize,
    torsion: &FiniteAbelianGroup,
    relations: &[Vec<i64>],
) -> Result<FiniteAbelianGroup, AbelianError> {
    let gens = torsion.rank() + rank;
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for (k, &d) in torsion.invariant_factors().iter().enumerate() {
        let mut row = vec![0i64; gens];
        row[k] = d as i64;
        rows.push(row);
    }
    for rel in relations {
        if rel.len() != gens {
            return Err(AbelianError::BadRelationLength {
                expected: gens,
                got: rel.len(),
            });
        }
        rows.push(rel.clone());
    }
    if gens == 0 {
        return Ok(FiniteAbelianGroup::trivial());
    }
    if rows.is_empty() {
        return Err(AbelianError::InfiniteQuotient { free_rank: gens });
    }
    let snf = smith_normal_form(&IntMat::from_rows(&rows));
    let diag = snf.diagonal();
    let nonzero = diag.iter().filter(|&&d| d != 0).count();
    if nonzero < gens {
        return Err(AbelianError::InfiniteQuotient {
            free_rank: gens - nonzero,
        });
    }
    let mut primary = Vec::new();
    for &d in &diag {
        let d = d.unsigned_abs() as u64;
        if d > 1 {
            for (p, e) in factorize(d) {
                primary.push((p, e));
            }
        }
    }
    Ok(from_primary_decomposition(&primary))
}

/// Membership tests against the integer lattice spanned by a basis (plus the
/// torsion relations of the unit block) inside `torsion ⊕ Z^rank`, torsion
/// coordinates first. The Smith normal form is computed once at
/// construction; each query is a matrix-vector product.
#[derive(Clone, Debug)]
pub struct LatticeTester {
    gens: usize,
    u: IntMat,
    diag: Vec<i128>,
}

impl LatticeTester {
    pub fn new(
        rank: usize,
        torsion: &FiniteAbelianGroup,
        basis: &[Vec<i64>],
    ) -> Result<Self, AbelianError> {
        let gens = torsion.rank() + rank;
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for (k, &d) in torsion.invariant_factors().iter().enumerate() {
            let mut row = vec![0i64; gens];
            row[k] = d as i64;
            rows.push(row);
        }
        for b in basis {
            if b.len() != gens {
                return Err(AbelianError::BadRelationLength {
                    expected: gens,
                    got: b.len(),
                });
            }
            rows.push(b.clone());
        }
        if gens == 0 || rows.is_empty() {
            return Ok(LatticeTester {
                gens,
                u: IntMat::identity(gens),
                diag: vec![0; gens],
            });
        }
        // rows^T has the lattice generators as columns; target in lattice
        // iff A x = target is solvable over Z, decided through the SNF.
        let m = rows.len();
        let mut at = IntMat::zeros(gens, m);
        for (j, row) in rows.iter().enumerate() {
            for i in 0..gens {
                at[(i, j)] = row[i] as i128;
            }
        }
        let snf = smith_normal_form(&at);
        let mut diag = snf.diagonal();
        diag.resize(gens, 0);
        Ok(LatticeTester {
            gens,
            u: snf.u,
            diag,
        })
    }

    pub fn contains(&self, target: &[i64]) -> Result<bool, AbelianError> {
        if target.len() != self.gens {
            return Err(AbelianError::BadRelationLength {
                expected: self.gens,
                got: target.len(),
            });
        }
        // u * A * v = s  =>  A x = t solvable iff s y = u t solvable
        for i in 0..self.gens {
            let mut uti = 0i128;
            for k in 0..self.gens {
                uti += self.u[(i, k)] * target[k] as i128;
            }
            let d = self.diag[i];
            if d == 0 {
                if uti != 0 {
                    return Ok(false);
                }
            } else if uti % d != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// One-shot lattice membership.
pub fn lattice_contains(
    rank: usize,
    torsion: &FiniteAbelianGroup,
    basis: &[Vec<i64>],
    target: &[i64],
) -> Result<bool, AbelianError> {
    LatticeTester::new(rank, torsion, basis)?.contains(target)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: u64) -> FiniteAbelianGroup {
        FiniteAbelianGroup::cyclic(n)
    }

    #[test]
    fn invariant_factor_validation() {
        assert!(FiniteAbelianGroup::new(vec![2, 4]).is_ok());
        assert!(FiniteAbelianGroup::new(vec![2, 3]).is_err());
        assert!(FiniteAbelianGroup::new(vec![1]).is_err());
        assert_eq!(FiniteAbelianGroup::new(vec![]).unwrap().order(), 1);
    }

    #[test]
    fn snf_identity_and_scalar() {
        let id = IntMat::identity(2);
        let snf = smith_normal_form(&id);
        assert_eq!(snf.s, id);
        let m = IntMat::from_rows(&[vec![2]]);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.diagonal(), vec![2]);
    }

    #[test]
    fn snf_unit_determinant_case() {
        // det -1 forces unit invariant factors
        let m = IntMat::from_rows(&[vec![1, 1], vec![2, 1]]);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.diagonal(), vec![1, 1]);
        check_snf(&m, &snf);
    }

    #[test]
    fn snf_empty_matrix() {
        let m = IntMat::zeros(0, 0);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.s.rows, 0);
    }

    fn check_snf(m: &IntMat, snf: &SnfDecomposition) {
        assert_eq!(snf.u.mul(m).mul(&snf.v), snf.s);
        assert_eq!(snf.u.determinant().abs(), 1);
        assert_eq!(snf.v.determinant().abs(), 1);
        let diag = snf.diagonal();
        for i in 0..snf.s.rows {
            for j in 0..snf.s.cols {
                if i != j {
                    assert_eq!(snf.s[(i, j)], 0);
                }
            }
        }
        for w in diag.windows(2) {
            if w[0] != 0 {
                assert_eq!(w[1] % w[0], 0);
            } else {
                assert_eq!(w[1], 0);
            }
        }
        for &d in &diag {
            assert!(d >= 0);
        }
    }

    #[test]
    fn snf_properties_on_fixed_samples() {
        let samples = [
            IntMat::from_rows(&[vec![4, 6], vec![6, 12]]),
            IntMat::from_rows(&[vec![0, 0], vec![0, 0]]),
            IntMat::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]),
            IntMat::from_rows(&[vec![3], vec![6]]),
            IntMat::from_rows(&[vec![5, 0, -3, 1]]),
        ];
        for m in &samples {
            check_snf(m, &smith_normal_form(m));
        }
    }

    #[test]
    fn quotient_examples() {
        // relations (1,1),(2,1) span Z^2
        let q = quotient_by_relations(2, &FiniteAbelianGroup::trivial(), &[vec![1, 1], vec![2, 1]])
            .unwrap();
        assert!(q.is_trivial());
        let q = quotient_by_relations(1, &FiniteAbelianGroup::trivial(), &[vec![3]]).unwrap();
        assert_eq!(q.invariant_factors(), &[3]);
        let q = quotient_by_relations(0, &z(2), &[]).unwrap();
        assert_eq!(q.invariant_factors(), &[2]);
        let err = quotient_by_relations(2, &FiniteAbelianGroup::trivial(), &[vec![2, 0]]);
        assert!(matches!(
            err,
            Err(AbelianError::InfiniteQuotient { free_rank: 1 })
        ));
    }

    /// Independent oracle: invariant factors from determinantal divisors
    /// (d_1…d_j = gcd of all j x j minors), no elimination involved.
    fn determinantal_divisor_factors(rows: &[Vec<i64>], gens: usize) -> Vec<u64> {
        fn minors_gcd(m: &IntMat, k: usize) -> i128 {
            fn combos(n: usize, k: usize) -> Vec<Vec<usize>> {
                if k == 0 {
                    return vec![vec![]];
                }
                let mut out = Vec::new();
                for first in 0..n {
                    for mut rest in combos(n - first - 1, k - 1) {
                        for r in rest.iter_mut() {
                            *r += first + 1;
                        }
                        let mut c = vec![first];
                        c.append(&mut rest);
                        out.push(c);
                    }
                }
                out
            }
            let mut g: i128 = 0;
            for ri in combos(m.rows, k) {
                for ci in combos(m.cols, k) {
                    let mut sub = IntMat::zeros(k, k);
                    for (a, &r) in ri.iter().enumerate() {
                        for (b, &c) in ci.iter().enumerate() {
                            sub[(a, b)] = m[(r, c)];
                        }
                    }
                    let d = sub.determinant().abs();
                    g = crate::util::gcd(g as u64, d as u64) as i128;
                }
            }
            g
        }
        let m = IntMat::from_rows(rows);
        let mut prev = 1i128;
        let mut factors = Vec::new();
        for k in 1..=gens.min(m.rows) {
            let dk = minors_gcd(&m, k);
            if dk == 0 {
                break;
            }
            factors.push((dk / prev) as u64);
            prev = dk;
        }
        while factors.len() < gens {
            factors.push(0); // free rank marker
        }
        factors.retain(|&d| d > 1);
        factors
    }

    #[test]
    fn quotient_matches_determinantal_divisors() {
        let cases: Vec<(usize, Vec<Vec<i64>>)> = vec![
            (2, vec![vec![2, 0], vec![0, 4]]),
            (2, vec![vec![2, 2], vec![0, 8]]),
            (3, vec![vec![2, 0, 0], vec![0, 3, 0], vec![0, 0, 4]]),
            (2, vec![vec![6, 4], vec![4, 6]]),
        ];
        for (rank, rels) in cases {
            let q = quotient_by_relations(rank, &FiniteAbelianGroup::trivial(), &rels).unwrap();
            let expected = determinantal_divisor_factors(&rels, rank);
            assert_eq!(q.invariant_factors(), expected.as_slice(), "rels {rels:?}");
        }
    }

    #[test]
    fn hom_kernels() {
        let z4 = z(4);
        let id = GroupHom::identity(&z4);
        assert_eq!(hom_kernel(&id).unwrap(), vec![vec![0u64]]);

        // doubling on Z/4: oracle = test all 4 elements
        let double = GroupHom::new(z4.clone(), z4.clone(), vec![vec![2]]).unwrap();
        let expected: Vec<Elem> = z4
            .elements()
            .into_iter()
            .filter(|a| z4.scalar_mul(2, a) == z4.zero())
            .collect();
        assert_eq!(hom_kernel(&double).unwrap(), expected);
        assert_eq!(hom_kernel(&double).unwrap(), vec![vec![0u64], vec![2u64]]);

        let z2 = z(2);
        let zero = GroupHom::new(z2.clone(), z2.clone(), vec![vec![0]]).unwrap();
        assert_eq!(hom_kernel(&zero).unwrap(), vec![vec![0u64], vec![1u64]]);
    }

    #[test]
    fn hom_well_definedness() {
        // Z/2 -> Z/4 sending the generator to an order-4 element is ill-formed
        let err = GroupHom::new(z(2), z(4), vec![vec![1]]);
        assert!(matches!(
            err,
            Err(AbelianError::IllFormedHom { generator: 0 })
        ));
        assert!(GroupHom::new(z(2), z(4), vec![vec![2]]).is_ok());
    }

    #[test]
    fn subgroup_sums() {
        let z4 = z(4);
        let zero_sub = vec![z4.zero()];
        assert_eq!(subgroup_sum(&z4, &zero_sub, &zero_sub), zero_sub);
        let two = vec![vec![0u64], vec![2u64]];
        assert_eq!(subgroup_sum(&z4, &two, &two), two);
        let all = z4.elements();
        // enumerate all sums
        let mut expected: Vec<Elem> = Vec::new();
        for a in &two {
            for b in &all {
                let s = z4.add(a, b);
                if !expected.contains(&s) {
                    expected.push(s);
                }
            }
        }
        expected.sort();
        assert_eq!(subgroup_sum(&z4, &two, &all), expected);
        assert_eq!(subgroup_sum(&z4, &two, &all).len(), 4);
    }

    #[test]
    fn isomorphism_checks() {
        assert!(are_isomorphic(&z(2), &z(2)));
        let z2z2 = FiniteAbelianGroup::new(vec![2, 2]).unwrap();
        assert!(!are_isomorphic(&z(4), &z2z2));
        let q = quotient_by_relations(2, &FiniteAbelianGroup::trivial(), &[vec![1, 1], vec![2, 1]])
            .unwrap();
        assert!(are_isomorphic(&q, &FiniteAbelianGroup::trivial()));
    }

    #[test]
    fn structure_recovery() {
        let g = FiniteAbelianGroup::new(vec![2, 4]).unwrap();
        let elems = g.elements();
        let add = |a: usize, b: usize| g.index_of(&g.add(&elems[a], &elems[b]));
        let rec = structure_from_table(elems.len(), 0, &add);
        assert_eq!(rec.invariant_factors(), &[2, 4]);

        let g = FiniteAbelianGroup::new(vec![6]).unwrap();
        let elems = g.elements();
        let add = |a: usize, b: usize| g.index_of(&g.add(&elems[a], &elems[b]));
        assert_eq!(structure_from_table(6, 0, &add).invariant_factors(), &[6]);
    }

    #[test]
    fn lattice_membership() {
        // lattice spanned by (1,1),(2,1) is Z^2
        let t = FiniteAbelianGroup::trivial();
        assert!(lattice_contains(2, &t, &[vec![1, 1], vec![2, 1]], &[0, 1]).unwrap());
        // lattice spanned by (2,0),(0,2): even vectors only
        assert!(lattice_contains(2, &t, &[vec![2, 0], vec![0, 2]], &[2, -4]).unwrap());
        assert!(!lattice_contains(2, &t, &[vec![2, 0], vec![0, 2]], &[1, 0]).unwrap());
    }

    #[test]
    fn direct_sum_normalizes() {
        let a = z(2);
        let b = z(3);
        assert_eq!(a.direct_sum(&b).invariant_factors(), &[6]);
        let c = z(2).direct_sum(&z(2));
        assert_eq!(c.invariant_factors(), &[2, 2]);
        assert_eq!(c.direct_sum(&z(4)).invariant_factors(), &[2, 2, 4]);
    }
}
