//! Sparse exact-coefficient polynomial and truncated-series arithmetic.
//!
//! Two families of values live here:
//!
//! * [`EvenPoly`] — polynomials in the squared boundary lengths qᵢ = Lᵢ²
//!   (plus an optional opaque symbol `P` standing for π²), the carrier of the
//!   volume polynomials. Working in the qᵢ encodes "only even powers of the
//!   boundary lengths" by construction.
//! * [`TSeries`] — truncated formal series in the variables t₀, t₁, … and s,
//!   the carrier of the intersection-number generating functions. Truncation
//!   is organized around the fact that each monomial s^m·∏tᵢ^{nᵢ} belongs to
//!   at most one surface type (g, n): n = Σnᵢ and 3g−3+n = m + Σi·nᵢ.
//!
//! Zero coefficients are never stored, and term iteration order is canonical,
//! so equal values have equal representations and serialization is
//! deterministic.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::Zero;

use crate::numkit::{rat_int, Rat};

// ───────────────────────────────────────────────────────────────────────────
// Even polynomials in q₁…qₙ and P
// ───────────────────────────────────────────────────────────────────────────

/// Monomial of an [`EvenPoly`]: exponents of q₁…qₙ and of the symbol P (π²).
///
/// The ordering is graded: lower total degree first, and within a degree,
/// terms with higher powers of earlier q-variables first, with P sorting
/// after all q-variables. Iterating a polynomial's map therefore yields the
/// canonical serialization order (constant term first, then q₁, q₂, …).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMono {
    /// Exponents of q₁…qₙ; the length always equals the owning polynomial's
    /// variable count.
    pub q: Vec<u32>,
    /// Exponent of P.
    pub p: u32,
}

impl QMono {
    /// The constant monomial in `nq` variables.
    pub fn unit(nq: usize) -> Self {
        QMono { q: vec![0; nq], p: 0 }
    }

    /// Total degree, counting P as one variable.
    pub fn deg(&self) -> u32 {
        self.p + self.q_deg()
    }

    /// Total degree in the q-variables only.
    pub fn q_deg(&self) -> u32 {
        self.q.iter().sum()
    }
}

impl PartialOrd for QMono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QMono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.deg()
            .cmp(&other.deg())
            .then_with(|| other.q.cmp(&self.q))
            .then_with(|| self.p.cmp(&other.p))
    }
}

/// Sparse polynomial in q₁…qₙ and P with exact rational coefficients.
///
/// Invariants: every stored monomial has exponent-vector length equal to
/// [`EvenPoly::nq`], and no stored coefficient is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvenPoly {
    nq: usize,
    terms: BTreeMap<QMono, Rat>,
}

impl EvenPoly {
    /// The zero polynomial in `nq` q-variables.
    pub fn zero(nq: usize) -> Self {
        EvenPoly { nq, terms: BTreeMap::new() }
    }

    /// A constant polynomial.
    pub fn constant(nq: usize, c: Rat) -> Self {
        let mut p = Self::zero(nq);
        p.add_term(QMono::unit(nq), c);
        p
    }

    /// The constant 1.
    pub fn one(nq: usize) -> Self {
        Self::constant(nq, rat_int(1))
    }

    /// The variable q_{slot+1} (slots are 0-based internally).
    pub fn var(nq: usize, slot: usize) -> Self {
        assert!(slot < nq, "variable slot {slot} out of range for {nq} variables");
        let mut m = QMono::unit(nq);
        m.q[slot] = 1;
        let mut p = Self::zero(nq);
        p.add_term(m, rat_int(1));
        p
    }

    /// Number of q-variables.
    pub fn nq(&self) -> usize {
        self.nq
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c·m` into the polynomial, dropping the entry if it cancels.
    pub fn add_term(&mut self, m: QMono, c: Rat) {
        assert_eq!(m.q.len(), self.nq, "monomial arity mismatch");
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            alloc::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// The coefficient of `m` (zero when absent).
    pub fn coefficient(&self, m: &QMono) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&QMono, &Rat)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nq, other.nq, "variable count mismatch");
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.nq);
        for (m, c) in self.terms() {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, k: &Rat) -> Self {
        let mut out = Self::zero(self.nq);
        if k.is_zero() {
            return out;
        }
        for (m, c) in self.terms() {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nq, other.nq, "variable count mismatch");
        let mut out = Self::zero(self.nq);
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                let q = ma.q.iter().zip(&mb.q).map(|(a, b)| a + b).collect();
                out.add_term(QMono { q, p: ma.p + mb.p }, ca * cb);
            }
        }
        out
    }

    /// Reinterprets the polynomial in a larger variable set: old slot `i`
    /// becomes new slot `map[i]`. The map must be injective and in range.
    pub fn map_vars(&self, new_nq: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.nq, "map length must equal variable count");
        let mut seen = vec![false; new_nq];
        for &m in map {
            assert!(m < new_nq && !seen[m], "variable map must be injective and in range");
            seen[m] = true;
        }
        let mut out = Self::zero(new_nq);
        for (m, c) in self.terms() {
            let mut q = vec![0u32; new_nq];
            for (i, &e) in m.q.iter().enumerate() {
                q[map[i]] = e;
            }
            out.add_term(QMono { q, p: m.p }, c.clone());
        }
        out
    }

    /// The polynomial with the q-variables permuted: slot `i` of the result
    /// reads from slot `perm[i]` of the input.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.nq);
        let mut out = Self::zero(self.nq);
        for (m, c) in self.terms() {
            let q = perm.iter().map(|&src| m.q[src]).collect();
            out.add_term(QMono { q, p: m.p }, c.clone());
        }
        out
    }

    /// True when the polynomial is invariant under every permutation of the
    /// q-variables (checked on adjacent transpositions, which generate them).
    pub fn is_symmetric_in_q(&self) -> bool {
        for i in 0..self.nq.saturating_sub(1) {
            let mut perm: Vec<usize> = (0..self.nq).collect();
            perm.swap(i, i + 1);
            if self.permuted(&perm) != *self {
                return false;
            }
        }
        true
    }

    /// Drops every term containing any q-variable (i.e. evaluates q = 0,
    /// keeping P).
    pub fn eval_q_zero(&self) -> Self {
        let mut out = Self::zero(self.nq);
        for (m, c) in self.terms() {
            if m.q_deg() == 0 {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// The constant term (all q = 0, P = 0 exponent).
    pub fn constant_term(&self) -> Rat {
        self.coefficient(&QMono::unit(self.nq))
    }

    /// Largest total q-degree among stored terms (0 for the zero polynomial).
    pub fn max_q_degree(&self) -> u32 {
        self.terms.keys().map(QMono::q_deg).max().unwrap_or(0)
    }
}

// ───────────────────────────────────────────────────────────────────────────
// Univariate polynomials in the integration variable t over EvenPoly
// ───────────────────────────────────────────────────────────────────────────

/// Polynomial in the integration variable t whose coefficients are
/// [`EvenPoly`] values (all with the same variable count). This is the shape
/// of the assembled integrand of the volume recursion before averaging over
/// the first boundary.
#[derive(Debug, Clone)]
pub struct TPoly {
    nq: usize,
    /// coeffs[k] multiplies t^k.
    coeffs: Vec<EvenPoly>,
}

impl TPoly {
    pub fn zero(nq: usize) -> Self {
        TPoly { nq, coeffs: Vec::new() }
    }

    pub fn nq(&self) -> usize {
        self.nq
    }

    /// Adds `poly·t^tpow`.
    pub fn add_term(&mut self, tpow: usize, poly: &EvenPoly) {
        assert_eq!(poly.nq(), self.nq, "coefficient arity mismatch");
        if poly.is_zero() {
            return;
        }
        while self.coeffs.len() <= tpow {
            self.coeffs.push(EvenPoly::zero(self.nq));
        }
        self.coeffs[tpow] = self.coeffs[tpow].add(poly);
    }

    pub fn coeff(&self, tpow: usize) -> EvenPoly {
        self.coeffs.get(tpow).cloned().unwrap_or_else(|| EvenPoly::zero(self.nq))
    }

    /// Averaged integral over the first boundary: (1/L)∫₀^L ·dt with the
    /// monomial rule t^{2u} ↦ q^u/(2u+1), where q = L² enters as a fresh
    /// variable prepended at slot 0 (existing slots shift up by one).
    ///
    /// The assembled integrand of the recursion is always even in t; a
    /// nonzero odd-power coefficient is a hard error.
    pub fn avg_integrate(&self) -> EvenPoly {
        let out_nq = self.nq + 1;
        let map: Vec<usize> = (1..=self.nq).collect();
        let mut out = EvenPoly::zero(out_nq);
        for (k, c) in self.coeffs.iter().enumerate() {
            if k % 2 == 1 {
                assert!(
                    c.is_zero(),
                    "odd power t^{k} survived integrand assembly; parity cancellation failed"
                );
                continue;
            }
            let u = (k / 2) as u32;
            let lifted = c.map_vars(out_nq, &map);
            for (m, coeff) in lifted.terms() {
                let mut q = m.q.clone();
                q[0] += u;
                out.add_term(QMono { q, p: m.p }, coeff / rat_int(i64::from(2 * u + 1)));
            }
        }
        out
    }
}

// ───────────────────────────────────────────────────────────────────────────
// Monomials in t₀, t₁, …, s and the (g,n) grading
// ───────────────────────────────────────────────────────────────────────────

/// Monomial s^m·∏tᵢ^{nᵢ}. The t-exponents are stored sparsely as
/// (index, exponent) pairs with strictly increasing indices and positive
/// exponents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TMono {
    pub s: u32,
    pub t: Vec<(u32, u32)>,
}

impl TMono {
    /// The empty (constant) monomial.
    pub fn unit() -> Self {
        TMono { s: 0, t: Vec::new() }
    }

    /// s^m.
    pub fn s_pow(m: u32) -> Self {
        TMono { s: m, t: Vec::new() }
    }

    /// tᵢ^e (the unit monomial when e = 0).
    pub fn t_pow(i: u32, e: u32) -> Self {
        if e == 0 {
            Self::unit()
        } else {
            TMono { s: 0, t: vec![(i, e)] }
        }
    }

    /// Builds a monomial from arbitrary (index, exponent) pairs, merging
    /// duplicates and dropping zero exponents.
    pub fn from_pairs(s: u32, pairs: &[(u32, u32)]) -> Self {
        let mut map: BTreeMap<u32, u32> = BTreeMap::new();
        for &(i, e) in pairs {
            if e > 0 {
                *map.entry(i).or_insert(0) += e;
            }
        }
        TMono { s, t: map.into_iter().collect() }
    }

    /// Number of t-factors n = Σnᵢ.
    pub fn n(&self) -> u32 {
        self.t.iter().map(|&(_, e)| e).sum()
    }

    /// The weight m + Σ i·nᵢ, which equals 3g−3+n on valid monomials.
    pub fn weight(&self) -> u32 {
        self.s + self.t.iter().map(|&(i, e)| i * e).sum::<u32>()
    }

    /// The exponent of tᵢ.
    pub fn t_exp(&self, i: u32) -> u32 {
        self.t
            .binary_search_by_key(&i, |&(j, _)| j)
            .map(|pos| self.t[pos].1)
            .unwrap_or(0)
    }

    /// Largest t-index present.
    pub fn max_t_index(&self) -> Option<u32> {
        self.t.last().map(|&(i, _)| i)
    }

    /// The unique surface type (g, n) of the monomial, when one exists:
    /// n = Σnᵢ and 3g−3+n = weight with g a nonnegative integer and
    /// 2g−2+n > 0. Monomials arising from intermediate arithmetic may have
    /// none.
    pub fn gn(&self) -> Option<(u32, u32)> {
        let n = self.n();
        let w = self.weight();
        // 3g = w + 3 − n must be a nonnegative multiple of 3.
        if w + 3 < n {
            return None;
        }
        let num = w + 3 - n;
        if num % 3 != 0 {
            return None;
        }
        let g = num / 3;
        if 2 * g + n > 2 {
            Some((g, n))
        } else {
            None
        }
    }

    /// True when the monomial maps to a surface type with at least one
    /// boundary/marked point — the domain actually represented by the
    /// generating functions here (the n = 0 sector is outside it).
    pub fn is_representable(&self) -> bool {
        matches!(self.gn(), Some((_, n)) if n >= 1)
    }

    /// Product of monomials.
    pub fn mul(&self, other: &Self) -> Self {
        let mut map: BTreeMap<u32, u32> = self.t.iter().copied().collect();
        for &(i, e) in &other.t {
            *map.entry(i).or_insert(0) += e;
        }
        TMono { s: self.s + other.s, t: map.into_iter().collect() }
    }

    /// Componentwise quotient, or `None` when `other` does not divide.
    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        if other.s > self.s {
            return None;
        }
        let mut map: BTreeMap<u32, u32> = self.t.iter().copied().collect();
        for &(i, e) in &other.t {
            let have = map.get(&i).copied().unwrap_or(0);
            if have < e {
                return None;
            }
            if have == e {
                map.remove(&i);
            } else {
                map.insert(i, have - e);
            }
        }
        Some(TMono { s: self.s - other.s, t: map.into_iter().collect() })
    }

    /// Every monomial dividing `self` (componentwise, including the s
    /// exponent). The count is ∏(eᵢ+1)·(s+1); callers use this on small
    /// monomials only.
    pub fn divisors(&self) -> Vec<TMono> {
        let mut out = vec![TMono::unit()];
        for s in 1..=self.s {
            out.push(TMono::s_pow(s));
        }
        let mut acc = out;
        for &(i, e) in &self.t {
            let mut next = Vec::with_capacity(acc.len() * (e as usize + 1));
            for d in &acc {
                for k in 0..=e {
                    next.push(d.mul(&TMono::t_pow(i, k)));
                }
            }
            acc = next;
        }
        acc
    }
}

// ───────────────────────────────────────────────────────────────────────────
// Windows
// ───────────────────────────────────────────────────────────────────────────

/// Truncation window for [`TSeries`].
///
/// A bounded window admits the surface types {g ≤ g_max, 1 ≤ n ≤ n_max}. For
/// intermediate arithmetic (exponentials, products) it retains the larger,
/// divisibility-closed monomial set {n ≤ n_max and weight ≤ E} with
/// E = max(0, 3·g_max−3+n_max), so that every window-valid monomial of a
/// product is computed from fully retained factors (truncation is loss-free
/// on the window).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Bounded { g_max: u32, n_max: u32 },
    /// No truncation; used for residual computations, which are finite
    /// because their inputs are.
    Unbounded,
}

impl Window {
    pub fn bounded(g_max: u32, n_max: u32) -> Self {
        assert!(n_max >= 1, "window must admit at least one boundary");
        Window::Bounded { g_max, n_max }
    }

    /// The retention weight cap of a bounded window.
    pub fn weight_cap(&self) -> Option<u32> {
        match *self {
            Window::Bounded { g_max, n_max } => {
                Some((3 * i64::from(g_max) - 3 + i64::from(n_max)).max(0) as u32)
            }
            Window::Unbounded => None,
        }
    }

    /// Largest t-index occurring in any window-valid monomial; equals the
    /// weight cap. Panics on the unbounded window.
    pub fn max_t_index(&self) -> u32 {
        self.weight_cap().expect("unbounded window has no index bound")
    }

    /// Whether the surface type (g, n) is admitted.
    pub fn admits(&self, g: u32, n: u32) -> bool {
        match *self {
            Window::Bounded { g_max, n_max } => g <= g_max && (1..=n_max).contains(&n),
            Window::Unbounded => n >= 1,
        }
    }

    /// Retention predicate for stored monomials (see type docs).
    pub fn retains(&self, m: &TMono) -> bool {
        match *self {
            Window::Bounded { n_max, .. } => {
                m.n() <= n_max && m.weight() <= self.weight_cap().expect("bounded")
            }
            Window::Unbounded => true,
        }
    }

    /// Whether the monomial is valid and its surface type admitted.
    pub fn contains_valid(&self, m: &TMono) -> bool {
        match m.gn() {
            Some((g, n)) => n >= 1 && self.admits(g, n),
            None => false,
        }
    }

    /// Whether a series truncated to this window accounts for the monomial's
    /// true coefficient: either the monomial has no surface type (so the
    /// coefficient is zero by convention) or its type is admitted with
    /// n ≥ 1. A monomial with a valid type that is outside the window — or
    /// in the n = 0 sector, which the generating functions here omit — is
    /// not covered, and computations reading it are untrustworthy.
    pub fn covers(&self, m: &TMono) -> bool {
        match m.gn() {
            Some((g, n)) => n >= 1 && self.admits(g, n),
            None => true,
        }
    }

    /// All admitted surface types, in (g, n) order.
    pub fn surface_types(&self) -> Vec<(u32, u32)> {
        match *self {
            Window::Bounded { g_max, n_max } => {
                let mut out = Vec::new();
                for g in 0..=g_max {
                    for n in 1..=n_max {
                        if 2 * g + n > 2 {
                            out.push((g, n));
                        }
                    }
                }
                out
            }
            Window::Unbounded => panic!("unbounded window cannot be enumerated"),
        }
    }

    /// All valid monomials of all admitted surface types, canonically
    /// ordered.
    pub fn valid_monomials(&self) -> Vec<TMono> {
        let mut out: Vec<TMono> =
            self.surface_types().iter().flat_map(|&(g, n)| monomials_for(g, n)).collect();
        out.sort();
        out
    }
}

/// All valid monomials of surface type (g, n): one for each multiset of n
/// t-indices with Σ dᵢ ≤ 3g−3+n, the s-exponent making up the difference.
pub fn monomials_for(g: u32, n: u32) -> Vec<TMono> {
    assert!(2 * g + n > 2, "unstable surface type ({g},{n})");
    let c = 3 * g as i64 - 3 + n as i64;
    debug_assert!(c >= 0);
    let c = c as u32;
    let mut out = Vec::new();
    let mut parts: Vec<u32> = Vec::new();
    enumerate_multisets(n, c, c, &mut parts, &mut out);
    out
}

/// Recursively enumerates non-increasing sequences of `slots` indices with
/// sum ≤ `budget`, each index ≤ `cap`, emitting the corresponding monomial
/// with the s-exponent filling the dimension gap.
fn enumerate_multisets(slots: u32, budget: u32, cap: u32, parts: &mut Vec<u32>, out: &mut Vec<TMono>) {
    if slots == 0 {
        // The unspent budget becomes the s-exponent.
        let pairs: Vec<(u32, u32)> = parts.iter().map(|&d| (d, 1)).collect();
        out.push(TMono::from_pairs(budget, &pairs));
        return;
    }
    let hi = cap.min(budget);
    for d in (0..=hi).rev() {
        parts.push(d);
        enumerate_multisets(slots - 1, budget - d, d, parts, out);
        parts.pop();
    }
}

// ───────────────────────────────────────────────────────────────────────────
// Truncated series
// ───────────────────────────────────────────────────────────────────────────

/// Truncated formal power series in t₀, t₁, …, s over the exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TSeries {
    window: Window,
    terms: BTreeMap<TMono, Rat>,
}

impl TSeries {
    pub fn zero(window: Window) -> Self {
        TSeries { window, terms: BTreeMap::new() }
    }

    pub fn constant(window: Window, c: Rat) -> Self {
        let mut s = Self::zero(window);
        s.add_term(TMono::unit(), c);
        s
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Adds `c·m`, subject to the window's retention predicate.
    pub fn add_term(&mut self, m: TMono, c: Rat) {
        if c.is_zero() || !self.window.retains(&m) {
            return;
        }
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// The stored coefficient of `m` (zero when absent).
    pub fn coefficient(&self, m: &TMono) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&TMono, &Rat)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&rat_int(-1))
    }

    pub fn scale(&self, k: &Rat) -> Self {
        let mut out = Self::zero(self.window);
        if k.is_zero() {
            return out;
        }
        for (m, c) in self.terms() {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.window);
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn mul_mono(&self, m: &TMono, k: &Rat) -> Self {
        let mut out = Self::zero(self.window);
        for (mm, c) in self.terms() {
            out.add_term(mm.mul(m), c * k);
        }
        out
    }

    /// Partial derivative with respect to tᵢ.
    pub fn derivative(&self, i: u32) -> Self {
        let mut out = Self::zero(self.window);
        for (m, c) in self.terms() {
            let e = m.t_exp(i);
            if e == 0 {
                continue;
            }
            let lowered = m
                .checked_div(&TMono::t_pow(i, 1))
                .expect("exponent checked above");
            out.add_term(lowered, c * rat_int(i64::from(e)));
        }
        out
    }

    /// Truncated exponential. The input must have no constant term; the
    /// window must be bounded (otherwise the support would be infinite).
    pub fn exp(&self) -> Self {
        assert!(
            self.coefficient(&TMono::unit()).is_zero(),
            "series exponential requires a zero constant term"
        );
        assert!(
            matches!(self.window, Window::Bounded { .. }),
            "series exponential requires a bounded window"
        );
        let mut acc = Self::constant(self.window, rat_int(1));
        let mut power = Self::constant(self.window, rat_int(1));
        let mut k: i64 = 1;
        loop {
            power = power.mul(self).scale(&rat_int(k).recip());
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power);
            k += 1;
        }
        acc
    }

    /// Substitutes t_j ← t_j + c_j·s^{j−1} for the supplied (j, c_j) pairs
    /// and re-truncates to the series' window. Shifts for t₀ or t₁ are
    /// rejected: those variables stay untouched by design.
    pub fn shift_substitute(&self, shifts: &[(u32, Rat)]) -> Self {
        for &(j, _) in shifts {
            assert!(j >= 2, "shift supplied for t_{j}; only j >= 2 may be shifted");
        }
        let table: BTreeMap<u32, Rat> = shifts.iter().cloned().collect();
        let mut out = Self::zero(self.window);
        for (m, c) in self.terms() {
            expand_shifted(m, c, &table, &mut out);
        }
        out
    }

    /// The same series filtered through another window's retention.
    pub fn restricted(&self, window: Window) -> Self {
        let mut out = Self::zero(window);
        for (m, c) in self.terms() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    /// Only the window-valid monomials (surface type admitted by `window`).
    pub fn valid_part(&self, window: Window) -> Self {
        let mut out = Self::zero(window);
        for (m, c) in self.terms() {
            if window.contains_valid(m) {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }
}

/// Expands one monomial under the variable shift and accumulates into `out`.
fn expand_shifted(m: &TMono, coeff: &Rat, table: &BTreeMap<u32, Rat>, out: &mut TSeries) {
    // Split the monomial into unshifted factors and shifted ones.
    let mut base = TMono { s: m.s, t: Vec::new() };
    let mut shifted: Vec<(u32, u32, &Rat)> = Vec::new();
    for &(i, e) in &m.t {
        match table.get(&i) {
            Some(c) => shifted.push((i, e, c)),
            None => base.t.push((i, e)),
        }
    }
    // Distribute (t_j + c_j s^{j−1})^{e_j} over all shifted factors.
    let mut stack: Vec<(usize, TMono, Rat)> = vec![(0, base, coeff.clone())];
    while let Some((pos, mono, c)) = stack.pop() {
        if pos == shifted.len() {
            out.add_term(mono, c);
            continue;
        }
        let (j, e, cj) = shifted[pos];
        for r in 0..=e {
            let mut factor_c = c.clone() * Rat::from_integer(crate::numkit::binomial(e, r));
            for _ in 0..r {
                factor_c *= cj;
            }
            let mut next = mono.mul(&TMono::t_pow(j, e - r));
            next.s += r * (j - 1);
            stack.push((pos + 1, next, factor_c));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::rat;
    use alloc::vec;
    use proptest::prelude::*;

    fn qm(q: &[u32], p: u32) -> QMono {
        QMono { q: q.to_vec(), p }
    }

    #[test]
    fn evenpoly_add_mul_examples() {
        // (1+q₁) + q₁ = 1 + 2q₁
        let one_q = EvenPoly::one(1).add(&EvenPoly::var(1, 0));
        let sum = one_q.add(&EvenPoly::var(1, 0));
        assert_eq!(sum.coefficient(&qm(&[0], 0)), rat_int(1));
        assert_eq!(sum.coefficient(&qm(&[1], 0)), rat_int(2));

        // (1+q₁)·0 = 0
        assert!(one_q.mul(&EvenPoly::zero(1)).is_zero());

        // (q₁+q₂)(q₁−q₂) = q₁²−q₂²
        let a = EvenPoly::var(2, 0).add(&EvenPoly::var(2, 1));
        let b = EvenPoly::var(2, 0).sub(&EvenPoly::var(2, 1));
        let prod = a.mul(&b);
        assert_eq!(prod.coefficient(&qm(&[2, 0], 0)), rat_int(1));
        assert_eq!(prod.coefficient(&qm(&[0, 2], 0)), rat_int(-1));
        assert_eq!(prod.term_count(), 2);
    }

    #[test]
    fn evenpoly_cancellation_drops_terms() {
        let q = EvenPoly::var(1, 0);
        let diff = q.sub(&q);
        assert!(diff.is_zero());
        assert_eq!(diff.term_count(), 0);
    }

    #[test]
    fn evenpoly_canonical_order_is_graded() {
        // 1 + q₁ + q₂ + P + q₁²: iteration must be constant, q₁, q₂, P, q₁².
        let mut p = EvenPoly::zero(2);
        p.add_term(qm(&[2, 0], 0), rat_int(5));
        p.add_term(qm(&[0, 0], 1), rat_int(4));
        p.add_term(qm(&[0, 1], 0), rat_int(3));
        p.add_term(qm(&[1, 0], 0), rat_int(2));
        p.add_term(qm(&[0, 0], 0), rat_int(1));
        let order: Vec<QMono> = p.terms().map(|(m, _)| m.clone()).collect();
        assert_eq!(
            order,
            vec![qm(&[0, 0], 0), qm(&[1, 0], 0), qm(&[0, 1], 0), qm(&[0, 0], 1), qm(&[2, 0], 0)]
        );
    }

    #[test]
    fn evenpoly_symmetry_check() {
        let sym = EvenPoly::var(2, 0).add(&EvenPoly::var(2, 1));
        assert!(sym.is_symmetric_in_q());
        assert!(!EvenPoly::var(2, 0).is_symmetric_in_q());
    }

    #[test]
    fn avg_integrate_monomial_rule() {
        // t² → q₁/3 (over zero ambient variables).
        let mut p = TPoly::zero(0);
        p.add_term(2, &EvenPoly::one(0));
        let out = p.avg_integrate();
        assert_eq!(out.coefficient(&qm(&[1], 0)), rat(1, 3));
        assert_eq!(out.term_count(), 1);

        // 1 → 1.
        let mut p = TPoly::zero(0);
        p.add_term(0, &EvenPoly::one(0));
        assert_eq!(p.avg_integrate(), EvenPoly::one(1));

        // t² + q₂ + 1/3 → q₁/3 + q₂ + 1/3 (ambient variable becomes slot 1).
        let mut p = TPoly::zero(1);
        p.add_term(2, &EvenPoly::one(1));
        p.add_term(0, &EvenPoly::var(1, 0));
        p.add_term(0, &EvenPoly::constant(1, rat(1, 3)));
        let out = p.avg_integrate();
        assert_eq!(out.coefficient(&qm(&[1, 0], 0)), rat(1, 3));
        assert_eq!(out.coefficient(&qm(&[0, 1], 0)), rat_int(1));
        assert_eq!(out.coefficient(&qm(&[0, 0], 0)), rat(1, 3));
    }

    #[test]
    #[should_panic(expected = "odd power")]
    fn avg_integrate_rejects_odd_survivors() {
        let mut p = TPoly::zero(0);
        p.add_term(3, &EvenPoly::one(0));
        let _ = p.avg_integrate();
    }

    #[test]
    fn tmono_surface_type_mapping() {
        // t₀³ ↔ (0,3); t₁ and s·t₀ ↔ (1,1); s³ ↔ (2,0); t₀ ↔ nothing.
        assert_eq!(TMono::from_pairs(0, &[(0, 3)]).gn(), Some((0, 3)));
        assert_eq!(TMono::t_pow(1, 1).gn(), Some((1, 1)));
        assert_eq!(TMono::from_pairs(1, &[(0, 1)]).gn(), Some((1, 1)));
        assert_eq!(TMono::s_pow(3).gn(), Some((2, 0)));
        assert!(!TMono::s_pow(3).is_representable());
        assert_eq!(TMono::t_pow(0, 1).gn(), None);
        assert_eq!(TMono::t_pow(0, 6).gn(), None);
    }

    #[test]
    fn monomials_for_small_types() {
        assert_eq!(monomials_for(0, 3), vec![TMono::from_pairs(0, &[(0, 3)])]);
        let m11 = monomials_for(1, 1);
        assert_eq!(m11.len(), 2);
        assert!(m11.contains(&TMono::t_pow(1, 1)));
        assert!(m11.contains(&TMono::from_pairs(1, &[(0, 1)])));
        // Every emitted monomial reconstructs its surface type.
        for (g, n) in [(0u32, 5u32), (1, 3), (2, 2)] {
            for m in monomials_for(g, n) {
                assert_eq!(m.gn(), Some((g, n)), "bad monomial {m:?}");
            }
        }
    }

    #[test]
    fn window_retention_and_validity() {
        let w = Window::bounded(1, 3);
        // Valid monomials of admitted types are retained.
        for m in w.valid_monomials() {
            assert!(w.retains(&m));
            assert!(w.contains_valid(&m));
        }
        // The constant monomial is retained but not valid.
        assert!(w.retains(&TMono::unit()));
        assert!(!w.contains_valid(&TMono::unit()));
        // n beyond the cap is not retained.
        assert!(!w.retains(&TMono::t_pow(0, 4)));
        // Weight beyond the cap is not retained (cap is 3 here).
        assert!(!w.retains(&TMono::s_pow(4)));
    }

    #[test]
    fn window_coverage() {
        let w = Window::bounded(1, 3);
        // Invalid monomials are trivially covered (their coefficient is 0).
        assert!(w.covers(&TMono::t_pow(0, 1)));
        assert!(w.covers(&TMono::t_pow(0, 6)));
        assert!(w.covers(&TMono::unit()));
        // Admitted valid monomials are covered.
        assert!(w.covers(&TMono::t_pow(1, 1)));
        // Valid monomials of types outside the window are not: (0,4) exceeds
        // n_max = 3, and t₄ belongs to genus 2.
        assert!(!w.covers(&TMono::from_pairs(0, &[(1, 1), (0, 3)])));
        assert!(!w.covers(&TMono::t_pow(4, 1)));
        // The n = 0 sector is never covered: a bounded-window series omits
        // it even though the true coefficient is nonzero.
        assert!(!w.covers(&TMono::s_pow(3)));
    }

    #[test]
    fn series_exp_examples() {
        let w = Window::bounded(0, 6);
        // exp(0) = 1.
        assert_eq!(TSeries::zero(w).exp(), TSeries::constant(w, rat_int(1)));

        // exp(t₀³/6) = 1 + t₀³/6 + t₀⁶/72 + … within the window.
        let mut f = TSeries::zero(w);
        f.add_term(TMono::t_pow(0, 3), rat(1, 6));
        let e = f.exp();
        assert_eq!(e.coefficient(&TMono::unit()), rat_int(1));
        assert_eq!(e.coefficient(&TMono::t_pow(0, 3)), rat(1, 6));
        assert_eq!(e.coefficient(&TMono::t_pow(0, 6)), rat(1, 72));

        // exp(f)·exp(−f) = 1.
        let prod = e.mul(&f.neg().exp());
        assert_eq!(prod, TSeries::constant(w, rat_int(1)));
    }

    #[test]
    fn shift_substitute_examples() {
        let w = Window::bounded(2, 4);
        // t₂ with c₂ = 1 → t₂ + s.
        let mut f = TSeries::zero(w);
        f.add_term(TMono::t_pow(2, 1), rat_int(1));
        let g = f.shift_substitute(&[(2, rat_int(1))]);
        assert_eq!(g.coefficient(&TMono::t_pow(2, 1)), rat_int(1));
        assert_eq!(g.coefficient(&TMono::s_pow(1)), rat_int(1));

        // t₂²/2 with c₂ = 1 → t₂²/2 + s·t₂ + s²/2.
        let mut f = TSeries::zero(w);
        f.add_term(TMono::t_pow(2, 2), rat(1, 2));
        let g = f.shift_substitute(&[(2, rat_int(1))]);
        assert_eq!(g.coefficient(&TMono::t_pow(2, 2)), rat(1, 2));
        assert_eq!(g.coefficient(&TMono::from_pairs(1, &[(2, 1)])), rat_int(1));
        assert_eq!(g.coefficient(&TMono::s_pow(2)), rat(1, 2));
    }

    #[test]
    #[should_panic(expected = "only j >= 2")]
    fn shift_substitute_rejects_low_variables() {
        let f = TSeries::zero(Window::bounded(1, 2));
        let _ = f.shift_substitute(&[(1, rat_int(1))]);
    }

    #[test]
    fn derivative_basic() {
        let w = Window::bounded(1, 4);
        let mut f = TSeries::zero(w);
        f.add_term(TMono::from_pairs(0, &[(0, 3), (1, 1)]), rat_int(6));
        let d = f.derivative(0);
        assert_eq!(d.coefficient(&TMono::from_pairs(0, &[(0, 2), (1, 1)])), rat_int(18));
        assert!(f.derivative(2).is_zero());
    }

    #[test]
    fn divisor_enumeration_counts() {
        let m = TMono::from_pairs(1, &[(0, 2), (3, 1)]);
        // (s+1)·(e₀+1)·(e₃+1) = 2·3·2 = 12 divisors.
        assert_eq!(m.divisors().len(), 12);
        for d in m.divisors() {
            assert!(m.checked_div(&d).is_some());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_evenpoly_ring_laws(
            xs in proptest::collection::vec((0u32..3, 0u32..3, -4i64..5), 0..5),
            ys in proptest::collection::vec((0u32..3, 0u32..3, -4i64..5), 0..5),
            zs in proptest::collection::vec((0u32..3, 0u32..3, -4i64..5), 0..5),
        ) {
            let build = |ts: &[(u32, u32, i64)]| {
                let mut p = EvenPoly::zero(2);
                for &(e1, e2, c) in ts {
                    p.add_term(qm(&[e1, e2], 0), rat_int(c));
                }
                p
            };
            let (a, b, c) = (build(&xs), build(&ys), build(&zs));
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn prop_avg_integrate_is_linear(
            xs in proptest::collection::vec((0usize..4, -4i64..5), 0..4),
            ys in proptest::collection::vec((0usize..4, -4i64..5), 0..4),
        ) {
            let build = |ts: &[(usize, i64)]| {
                let mut p = TPoly::zero(0);
                for &(k, c) in ts {
                    p.add_term(2 * k, &EvenPoly::constant(0, rat_int(c)));
                }
                p
            };
            let (a, b) = (build(&xs), build(&ys));
            let mut sum = TPoly::zero(0);
            for &(k, c) in xs.iter().chain(&ys) {
                sum.add_term(2 * k, &EvenPoly::constant(0, rat_int(c)));
            }
            prop_assert_eq!(sum.avg_integrate(), a.avg_integrate().add(&b.avg_integrate()));
        }

        #[test]
        fn prop_exp_inverse(
            xs in proptest::collection::vec((0u32..3, 1u32..3, -3i64..4), 0..4)
        ) {
            let w = Window::bounded(1, 4);
            let mut f = TSeries::zero(w);
            for &(i, e, c) in &xs {
                f.add_term(TMono::t_pow(i, e), rat_int(c));
            }
            let prod = f.exp().mul(&f.neg().exp());
            prop_assert_eq!(prod, TSeries::constant(w, rat_int(1)));
        }

        #[test]
        fn prop_shift_with_zero_table_is_identity(
            xs in proptest::collection::vec((0u32..4, 1u32..3, -3i64..4), 0..5)
        ) {
            let w = Window::bounded(2, 4);
            let mut f = TSeries::zero(w);
            for &(i, e, c) in &xs {
                f.add_term(TMono::t_pow(i, e), rat_int(c));
            }
            prop_assert_eq!(f.shift_substitute(&[]), f.clone());
            prop_assert_eq!(f.shift_substitute(&[(2, Rat::zero()), (3, Rat::zero())]), f);
        }

        #[test]
        fn prop_valid_monomials_roundtrip(g in 0u32..3, n in 1u32..5) {
            prop_assume!(2 * g + n > 2);
            for m in monomials_for(g, n) {
                prop_assert_eq!(m.gn(), Some((g, n)));
            }
        }
    }
}
