//! Sparse exterior algebra over `R^{n+1}` and over the split space
//! `W = R^{1+d+n}`.
//!
//! Blades are sets of basis indices stored as bitmasks. Sorted blades are an
//! orthonormal basis for the pairing [`MultiVector::inner`].

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::{self, Debug, Display};

use num_integer::Integer;
use num_traits::{Num, Signed, ToPrimitive};

use crate::error::{domain, shape, Result};
use crate::scalar::Scalar;
use crate::subspace::AffineSubspace;

/// Coefficient ring of a multivector.
pub trait Coeff: Clone + Debug + Display + Num + Signed + PartialOrd + ToPrimitive + Send + Sync {}

impl<T: Clone + Debug + Display + Num + Signed + PartialOrd + ToPrimitive + Send + Sync> Coeff for T {}

/// Maximum number of basis vectors.
pub const MAX_DIM: usize = 64;

/// A set of basis indices. Ordered lexicographically as ascending sequences.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Blade(u64);

impl Blade {
    pub const EMPTY: Blade = Blade(0);

    /// The blade of `indices`, or `None` if an index repeats or is too large.
    pub fn from_indices(indices: &[usize]) -> Option<Self> {
        let mut bits = 0u64;
        for &i in indices {
            if i >= MAX_DIM || bits & (1 << i) != 0 {
                return None;
            }
            bits |= 1 << i;
        }
        Some(Blade(bits))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn grade(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_DIM && self.0 & (1 << i) != 0
    }

    pub fn is_subset_of(self, other: Blade) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn without(self, i: usize) -> Self {
        Blade(self.0 & !(1 << i))
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }

    /// Highest index plus one.
    pub fn span(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    /// Sign of `e_A ∧ e_B = ±e_{A∪B}`, or `None` when the blades overlap.
    pub fn wedge_sign(self, other: Blade) -> Option<bool> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let mut swaps = 0u32;
        for j in other.indices() {
            swaps += (self.0 >> j).count_ones();
        }
        Some(swaps % 2 == 1)
    }
}

impl Ord for Blade {
    fn cmp(&self, other: &Self) -> Ordering {
        self.indices().cmp(other.indices())
    }
}

impl PartialOrd for Blade {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Debug for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.indices()).finish()
    }
}

/// Element of the exterior algebra of `R^dim`. Zero coefficients are never
/// stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiVector<C> {
    dim: usize,
    terms: BTreeMap<Blade, C>,
}

impl<C: Coeff> MultiVector<C> {
    pub fn zero(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        Self { dim, terms: BTreeMap::new() }
    }

    /// The scalar `c` (grade 0).
    pub fn scalar(dim: usize, c: C) -> Self {
        let mut out = Self::zero(dim);
        out.add_term(Blade::EMPTY, c);
        out
    }

    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        Self::blade(dim, &[i], C::one())
    }

    /// `c · e_{i_1} ∧ … ∧ e_{i_k}` for indices in any order.
    pub fn blade(dim: usize, indices: &[usize], c: C) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
            return Err(shape(format!("basis index {bad} out of range for dimension {dim}")));
        }
        let mut out = Self::zero(dim);
        let Some(blade) = Blade::from_indices(indices) else {
            return Ok(out);
        };
        let inversions = (0..indices.len())
            .flat_map(|a| (a + 1..indices.len()).map(move |b| (a, b)))
            .filter(|&(a, b)| indices[a] > indices[b])
            .count();
        out.add_term(blade, if inversions % 2 == 1 { -c } else { c });
        Ok(out)
    }

    /// Grade-one element with the given coordinates.
    pub fn from_vector(v: &[C]) -> Self {
        let mut out = Self::zero(v.len());
        for (i, c) in v.iter().enumerate() {
            out.add_term(Blade(1 << i), c.clone());
        }
        out
    }

    /// Builds from explicit `(blade, coefficient)` pairs, summing repeats.
    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Blade, C)>) -> Result<Self> {
        let mut out = Self::zero(dim);
        for (b, c) in terms {
            if b.span() > dim {
                return Err(shape(format!("blade {b:?} out of range for dimension {dim}")));
            }
            out.add_term(b, c);
        }
        Ok(out)
    }

    fn add_term(&mut self, blade: Blade, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&blade) {
            Some(slot) => {
                *slot = slot.clone() + c;
                if slot.is_zero() {
                    self.terms.remove(&blade);
                }
            }
            None => {
                self.terms.insert(blade, c);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in blade order.
    pub fn terms(&self) -> impl Iterator<Item = (Blade, &C)> {
        self.terms.iter().map(|(b, c)| (*b, c))
    }

    pub fn coeff(&self, blade: Blade) -> C {
        self.terms.get(&blade).cloned().unwrap_or_else(C::zero)
    }

    /// The common grade of all terms; `None` for zero or mixed grades.
    pub fn grade(&self) -> Option<usize> {
        let mut grades = self.terms.keys().map(|b| b.grade());
        let first = grades.next()?;
        grades.all(|g| g == first).then_some(first)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(shape(format!("dimension mismatch: {} vs {}", self.dim, other.dim)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (b, c) in other.terms() {
            out.add_term(b, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-C::one()))
    }

    pub fn scale(&self, t: &C) -> Self {
        let mut out = Self::zero(self.dim);
        for (b, c) in self.terms() {
            out.add_term(b, c.clone() * t.clone());
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.dim);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                if let Some(negative) = a.wedge_sign(b) {
                    let c = ca.clone() * cb.clone();
                    out.add_term(Blade(a.0 | b.0), if negative { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// Pairing in which distinct sorted blades are orthonormal.
    pub fn inner(&self, other: &Self) -> Result<C> {
        self.check_dim(other)?;
        if let (Some(p), Some(q)) = (self.grade(), other.grade()) {
            if p != q {
                return Err(domain(format!("grade mismatch: {p} vs {q}")));
            }
        }
        Ok(self
            .terms()
            .filter_map(|(b, c)| other.terms.get(&b).map(|d| c.clone() * d.clone()))
            .fold(C::zero(), |acc, x| acc + x))
    }

    /// Largest absolute coefficient.
    pub fn sup_norm(&self) -> C {
        self.terms.values().map(|c| c.abs()).fold(C::zero(), |m, c| if c > m { c } else { m })
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().unwrap_or(f64::NAN).powi(2)).sum::<f64>().sqrt()
    }

    /// Keeps the terms whose blade satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(Blade) -> bool) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().filter(|(b, _)| keep(**b)).map(|(b, c)| (*b, c.clone())).collect(),
        }
    }

    /// Applies `f` to every coefficient.
    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> MultiVector<D> {
        let mut out = MultiVector::zero(self.dim);
        for (b, c) in self.terms() {
            out.add_term(b, f(c));
        }
        out
    }

    /// One blade per line, `"e0^e2: -3/4"`, with the given basis labels.
    pub fn dump_with(&self, label: impl Fn(usize) -> String) -> String {
        let mut out = String::new();
        for (b, c) in self.terms() {
            let name =
                if b == Blade::EMPTY { "1".to_string() } else { b.indices().map(&label).collect::<Vec<_>>().join("^") };
            out.push_str(&format!("{name}: {c}\n"));
        }
        out
    }

    /// [`MultiVector::dump_with`] using labels `e0, e1, …`.
    pub fn dump(&self) -> String {
        self.dump_with(|i| format!("e{i}"))
    }
}

impl<C: Display> Debug for MultiVector<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiVector(dim {}) {{", self.dim)?;
        for (i, (b, c)) in self.terms.iter().enumerate() {
            write!(f, "{}{b:?}: {c}", if i > 0 { ", " } else { " " })?;
        }
        write!(f, " }}")
    }
}

impl<C: Coeff + Integer> MultiVector<C> {
    /// Divides out the gcd of the coefficients and makes the first nonzero
    /// coefficient (in blade order) positive.
    pub fn normalized(&self) -> Self {
        let Some(first) = self.terms.values().next() else {
            return self.clone();
        };
        let g = self.terms.values().fold(C::zero(), |g, c| g.gcd(c));
        let g = if first.is_negative() { -g } else { g };
        let mut out = Self::zero(self.dim);
        for (b, c) in self.terms() {
            out.terms.insert(b, c.clone() / g.clone());
        }
        out
    }
}

/// Image of the c-map: one component per index `0..=n`, each supported on
/// blades of `{1, …, n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CMapImage<C: Display> {
    pub components: Vec<MultiVector<C>>,
}

impl<C: Coeff> CMapImage<C> {
    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> CMapImage<D> {
        CMapImage { components: self.components.iter().map(|m| m.map(&f)).collect() }
    }
}

/// `c(w)_i = Σ_J ⟨e_i ∧ e_J, w⟩ e_J` over `J ⊂ {1, …, n}` with `#J = j − 1`,
/// for `w` of grade `j ≥ 1` in `R^{n+1}`.
pub fn c_map<C: Coeff>(w: &MultiVector<C>) -> Result<CMapImage<C>> {
    if w.terms().any(|(b, _)| b.grade() == 0) {
        return Err(domain("the c-map needs grade at least 1"));
    }
    if w.grade().is_none() && !w.is_zero() {
        return Err(domain("the c-map needs a homogeneous multivector"));
    }
    let dim = w.dim();
    let mut components = vec![MultiVector::zero(dim); dim];
    for (m, c) in w.terms() {
        for i in m.indices() {
            let rest = m.without(i);
            if rest.contains(0) {
                continue;
            }
            // e_i ∧ e_J = (−1)^{#{k ∈ J : k < i}} e_M
            let below = (rest.0 & ((1u64 << i) - 1)).count_ones();
            let c = if below % 2 == 1 { -c.clone() } else { c.clone() };
            components[i].add_term(rest, c);
        }
    }
    Ok(CMapImage { components })
}

/// `R_A c(w)` with `R_A = (Id_{d+1} | A)`, one multivector per row.
pub fn r_a_apply<S: Scalar>(sub: &AffineSubspace<S>, img: &CMapImage<S>) -> Result<Vec<MultiVector<S>>> {
    let n = sub.n();
    let d = sub.d();
    if img.components.len() != n + 1 {
        return Err(shape(format!("c-map image has {} components, expected n+1 = {}", img.components.len(), n + 1)));
    }
    let dim = img.components[0].dim();
    let mut out = Vec::with_capacity(d + 1);
    for r in 0..=d {
        let mut acc = img.components[r].clone();
        for (col, comp) in img.components[d + 1..].iter().enumerate() {
            let entry = sub.entry(r, col);
            if !entry.is_zero() && !comp.is_zero() {
                acc = acc.add(&comp.scale(entry))?;
            }
        }
        debug_assert_eq!(acc.dim(), dim);
        out.push(acc);
    }
    Ok(out)
}

/// Sup norm over all blade coefficients of all components.
pub fn components_sup_norm<S: Coeff>(parts: &[MultiVector<S>]) -> S {
    parts.iter().map(MultiVector::sup_norm).fold(S::zero(), |m, c| if c > m { c } else { m })
}

/// Keeps the blades inside `{d+1, …, n}`.
pub fn project_bullet<C: Coeff>(w: &MultiVector<C>, d: usize) -> MultiVector<C> {
    w.filter(|b| !b.indices().any(|i| i <= d))
}

/// Index layout of `W = R^{1+d+n}`: `e₀`, then `e*₁ … e*_d`, then `e₁ … e_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpace {
    pub n: usize,
    pub d: usize,
}

impl SplitSpace {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if d == 0 || d >= n {
            return Err(domain(format!("need 0 < d < n, got n = {n}, d = {d}")));
        }
        if 1 + d + n > MAX_DIM {
            return Err(domain("split space too large"));
        }
        Ok(Self { n, d })
    }

    pub fn dim(&self) -> usize {
        1 + self.d + self.n
    }

    /// Index of `e*_i`, `1 ≤ i ≤ d`.
    pub fn star(&self, i: usize) -> usize {
        i
    }

    /// Index of `e_i`, `1 ≤ i ≤ n`.
    pub fn plain(&self, i: usize) -> usize {
        self.d + i
    }

    pub fn label(&self, index: usize) -> String {
        match index {
            0 => "e0".to_string(),
            i if i <= self.d => format!("e*{i}"),
            i => format!("e{}", i - self.d),
        }
    }

    fn starred(&self) -> u64 {
        ((1u64 << (self.d + 1)) - 1) & !1
    }

    /// Drops every blade with two or more starred labels.
    pub fn project_star<C: Coeff>(&self, w: &MultiVector<C>) -> MultiVector<C> {
        let mask = self.starred();
        w.filter(|b| (b.0 & mask).count_ones() <= 1)
    }

    /// Euclidean norm of [`SplitSpace::project_star`].
    pub fn nu_norm<C: Coeff>(&self, w: &MultiVector<C>) -> f64 {
        self.project_star(w).euclidean_norm()
    }

    pub fn dump<C: Coeff>(&self, w: &MultiVector<C>) -> String {
        w.dump_with(|i| self.label(i))
    }
}
