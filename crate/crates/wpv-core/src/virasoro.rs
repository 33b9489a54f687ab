//! Constraint operators annihilating the exponentials of the generating
//! functions, and a solver that reconstructs those functions from the
//! constraints alone.
//!
//! The deformed family V̂_k (k ≥ −1) acts on series in s and t₀, t₁, …:
//!
//!   V̂_k = −((2k+3)!!/2)·∂_{k+1}
//!         + ½ Σ_{i,j≥0, i+j+k≥0} ((2(i+j+k)+1)!!/(2j−1)!!)·βᵢ·sⁱ·tⱼ·∂_{i+j+k}
//!         + ¼ Σ_{i≥0} Σ_{d₁+d₂=k+i−1} (2d₁+1)!!(2d₂+1)!!·βᵢ·sⁱ·∂_{d₁}∂_{d₂}
//!         + δ_{k,−1}(t₀²/4 + s/48) + δ_{k,0}/16,
//!
//! with exp(G) in its kernel. Its s-free slice L_k annihilates exp(F). The
//! undeformed resummation V_k = Σᵢ αᵢ sⁱ V̂_{k+i} satisfies the commutation
//! relations [V_n, V_m] = (n−m)V_{n+m}, while the deformed family satisfies
//! [V̂_n, V̂_m] = (n−m)·Σᵢ βᵢ sⁱ V̂_{n+m+i}.
//!
//! All operators are order ≤ 2 with monomial multipliers. A [`DiffOp`] is
//! truncated by a derivative cap: terms differentiating past the cap are
//! dropped. Because every multiplier's t-index exceeds its term's derivative
//! index by at most one, a commutator computed from operands built at cap
//! D+1 and then restricted to cap D agrees with the untruncated commutator
//! restricted to D; the relation tests rely on this.
//!
//! Residuals e^{−f}·(op e^f) are evaluated coefficientwise without forming
//! e^f. A residual coefficient is asserted to vanish only where the window
//! determines it: every monomial the evaluation reads must be covered by
//! the window (see [`Window::covers`]), with product reads excused when
//! either factor is off the dimension grading and hence zero in truth.

use crate::numkit::{
    alpha_coeff, beta_coeff, binomial, odd_double_factorial_rat, rat, rat_int, Rat,
};
use crate::polyalg::{monomials_for, TMono, TSeries, Window};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// A finitely supported differential operator Σ c·s^a·t^μ·∂_ν with ν a
/// multiset of t-indices of size ≤ 2 for the built-in families (composition
/// may produce higher orders). Terms whose derivative multiset contains an
/// index above `d_cap` are dropped on insertion, so equality of truncations
/// is plain structural equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffOp {
    d_cap: u32,
    terms: BTreeMap<(TMono, Vec<u32>), Rat>,
}

impl DiffOp {
    pub fn new(d_cap: u32) -> Self {
        DiffOp {
            d_cap,
            terms: BTreeMap::new(),
        }
    }

    pub fn d_cap(&self) -> u32 {
        self.d_cap
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TMono, &[u32], &Rat)> {
        self.terms.iter().map(|((m, d), c)| (m, d.as_slice(), c))
    }

    /// Adds c·mult·∂_deriv, sorting the derivative multiset and enforcing
    /// the cap. Cancelling terms are removed to keep the form canonical.
    pub fn add_term(&mut self, mult: TMono, mut deriv: Vec<u32>, c: Rat) {
        if c.is_zero() || deriv.iter().any(|&d| d > self.d_cap) {
            return;
        }
        deriv.sort_unstable();
        let entry = self.terms.entry((mult, deriv)).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            // `entry` borrowed mutably; re-fetch the key to remove.
            let dead: Vec<_> = self
                .terms
                .iter()
                .filter(|(_, v)| v.is_zero())
                .map(|(k, _)| k.clone())
                .collect();
            for k in dead {
                self.terms.remove(&k);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.d_cap, other.d_cap, "derivative caps must agree");
        let mut out = self.clone();
        for ((m, d), c) in &other.terms {
            out.add_term(m.clone(), d.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&rat_int(-1))
    }

    pub fn scale(&self, k: &Rat) -> Self {
        let mut out = DiffOp::new(self.d_cap);
        if k.is_zero() {
            return out;
        }
        for ((m, d), c) in &self.terms {
            out.terms.insert((m.clone(), d.clone()), c * k);
        }
        out
    }

    /// Multiplies every term by c·mono on the left (mono commutes with all
    /// multipliers and never feeds the derivatives of this operator).
    pub fn scaled_mult(&self, mono: &TMono, c: &Rat) -> Self {
        let mut out = DiffOp::new(self.d_cap);
        if c.is_zero() {
            return out;
        }
        for ((m, d), coeff) in &self.terms {
            out.terms.insert((mono.mul(m), d.clone()), coeff * c);
        }
        out
    }

    /// Keeps only the s-free terms.
    pub fn s_free_part(&self) -> Self {
        let mut out = DiffOp::new(self.d_cap);
        for ((m, d), c) in &self.terms {
            if m.s == 0 {
                out.terms.insert((m.clone(), d.clone()), c.clone());
            }
        }
        out
    }

    /// Re-truncates to a smaller derivative cap.
    pub fn restricted(&self, d_cap: u32) -> Self {
        assert!(d_cap <= self.d_cap, "restriction must shrink the cap");
        let mut out = DiffOp::new(d_cap);
        for ((m, d), c) in &self.terms {
            out.add_term(m.clone(), d.clone(), c.clone());
        }
        out
    }

    /// Operator product self∘other by the Leibniz rule: each derivative of
    /// `self` either consumes a factor of the other term's multiplier or
    /// passes through. Grouping the derivative multiset by index, consuming
    /// u of r copies of ∂_idx against exponent e contributes C(r,u)·e·(e−1)
    /// ⋯(e−u+1) and lowers the exponent by u.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.d_cap, other.d_cap, "derivative caps must agree");
        let mut out = DiffOp::new(self.d_cap);
        for ((ma, va), ca) in &self.terms {
            let groups = group_indices(va);
            for ((mb, vb), cb) in &other.terms {
                // (lowered multiplier of other, combinatorial weight,
                //  surviving derivatives of self)
                let mut states: Vec<(TMono, Rat, Vec<u32>)> =
                    vec![(mb.clone(), ca * cb, Vec::new())];
                for &(idx, r) in &groups {
                    let mut next = Vec::new();
                    for (cur, weight, rem) in &states {
                        let e = cur.t_exp(idx);
                        for used in 0..=r.min(e) {
                            let mut ways = binomial(r, used);
                            for u in 0..used {
                                ways *= BigInt::from(e - u);
                            }
                            let lowered = cur
                                .checked_div(&TMono::t_pow(idx, used))
                                .expect("exponent bound checked");
                            let mut surviving = rem.clone();
                            surviving
                                .extend(core::iter::repeat(idx).take((r - used) as usize));
                            next.push((
                                lowered,
                                weight * Rat::from_integer(ways),
                                surviving,
                            ));
                        }
                    }
                    states = next;
                }
                for (lowered, weight, mut deriv) in states {
                    deriv.extend_from_slice(vb);
                    out.add_term(ma.mul(&lowered), deriv, weight);
                }
            }
        }
        out
    }
}

/// ab − ba. Exact at cap D when a and b are built at cap D+1 and the result
/// is restricted to D (see the module notes on the cap-margin argument).
pub fn commutator(a: &DiffOp, b: &DiffOp) -> DiffOp {
    a.compose(b).sub(&b.compose(a))
}

/// Groups an ascending multiset into (index, multiplicity) pairs.
fn group_indices(v: &[u32]) -> Vec<(u32, u32)> {
    let mut out: Vec<(u32, u32)> = Vec::new();
    for &idx in v {
        match out.last_mut() {
            Some((i, r)) if *i == idx => *r += 1,
            _ => out.push((idx, 1)),
        }
    }
    out
}

/// (2k+1)!! for k ≥ −1, as a rational.
fn dfact(k: i64) -> Rat {
    odd_double_factorial_rat(k)
}

/// The deformed constraint operator V̂_k, truncated to `d_cap`.
pub fn build_vhat(k: i64, d_cap: u32) -> DiffOp {
    assert!(k >= -1, "the operator family starts at index -1");
    let cap = d_cap as i64;
    let mut op = DiffOp::new(d_cap);
    // Leading derivative.
    if k + 1 <= cap {
        op.add_term(
            TMono::unit(),
            vec![(k + 1) as u32],
            dfact(k + 1) * rat(-1, 2),
        );
    }
    // First-order tail: ½·((2(i+j+k)+1)!!/(2j−1)!!)·βᵢ·sⁱ·tⱼ·∂_{i+j+k}.
    for i in 0..=(cap - k).max(0) {
        let beta = beta_coeff(i as u32);
        for j in 0..=(cap - k - i) {
            let d = i + j + k;
            if d < 0 {
                continue;
            }
            let coeff = rat(1, 2) * dfact(d) / dfact(j - 1) * &beta;
            op.add_term(
                TMono::from_pairs(i as u32, &[(j as u32, 1)]),
                vec![d as u32],
                coeff,
            );
        }
    }
    // Second-order tail: ¼·(2d₁+1)!!(2d₂+1)!!·βᵢ·sⁱ·∂_{d₁}∂_{d₂} over
    // ordered pairs d₁+d₂ = k+i−1.
    for i in (1 - k).max(0)..=(2 * cap + 1 - k) {
        let beta = beta_coeff(i as u32);
        let total = k + i - 1;
        for d1 in 0..=total {
            let d2 = total - d1;
            if d1 > cap || d2 > cap {
                continue;
            }
            let coeff = rat(1, 4) * dfact(d1) * dfact(d2) * &beta;
            op.add_term(
                TMono::s_pow(i as u32),
                vec![d1 as u32, d2 as u32],
                coeff,
            );
        }
    }
    // Constants.
    if k == -1 {
        op.add_term(TMono::t_pow(0, 2), Vec::new(), rat(1, 4));
        op.add_term(TMono::s_pow(1), Vec::new(), rat(1, 48));
    }
    if k == 0 {
        op.add_term(TMono::unit(), Vec::new(), rat(1, 16));
    }
    op
}

/// The s-free constraint operator L_k annihilating exp of the pure-ψ
/// generating function; equals V̂_k with every s-carrying term removed.
pub fn build_l(k: i64, d_cap: u32) -> DiffOp {
    assert!(k >= -1, "the operator family starts at index -1");
    let cap = d_cap as i64;
    let mut op = DiffOp::new(d_cap);
    if k + 1 <= cap {
        op.add_term(
            TMono::unit(),
            vec![(k + 1) as u32],
            dfact(k + 1) * rat(-1, 2),
        );
    }
    for j in (-k).max(0)..=(cap - k) {
        let d = j + k;
        let coeff = rat(1, 2) * dfact(d) / dfact(j - 1);
        op.add_term(
            TMono::t_pow(j as u32, 1),
            vec![d as u32],
            coeff,
        );
    }
    for d1 in 0..=(k - 1) {
        let d2 = k - 1 - d1;
        if d1 > cap || d2 > cap {
            continue;
        }
        let coeff = rat(1, 4) * dfact(d1) * dfact(d2);
        op.add_term(TMono::unit(), vec![d1 as u32, d2 as u32], coeff);
    }
    if k == -1 {
        op.add_term(TMono::t_pow(0, 2), Vec::new(), rat(1, 4));
    }
    if k == 0 {
        op.add_term(TMono::unit(), Vec::new(), rat(1, 16));
    }
    op
}

/// The current-mode operator: J_p = (2j+1)!!·∂_j for p = 2j+1 > 0 and
/// multiplication by t_j/(2j−1)!! for p = −(2j+1) < 0.
pub fn build_j(p: i64, d_cap: u32) -> DiffOp {
    assert!(p % 2 != 0, "current modes carry odd labels");
    let mut op = DiffOp::new(d_cap);
    if p > 0 {
        let j = (p - 1) / 2;
        op.add_term(TMono::unit(), vec![j as u32], dfact(j));
    } else {
        let j = (-p - 1) / 2;
        op.add_term(TMono::t_pow(j as u32, 1), Vec::new(), dfact(j - 1).recip());
    }
    op
}

/// The normally ordered bilinear block E_k: L_k without its leading
/// derivative term (the ¼ΣJJ expansion plus the δ constants).
pub fn build_e(k: i64, d_cap: u32) -> DiffOp {
    let mut op = build_l(k, d_cap);
    if k + 1 <= d_cap as i64 {
        op.add_term(
            TMono::unit(),
            vec![(k + 1) as u32],
            dfact(k + 1) * rat(1, 2),
        );
    }
    op
}

/// The undeformed resummation V_k = Σ_{i≥0} αᵢ sⁱ V̂_{k+i}. The sum is
/// finite at any cap: V̂_{k+i} truncates to nothing once k+i−1 > 2·cap.
pub fn build_v(k: i64, d_cap: u32) -> DiffOp {
    assert!(k >= -1, "the operator family starts at index -1");
    let mut op = DiffOp::new(d_cap);
    for i in 0..=(2 * (d_cap as i64) + 1 - k).max(0) {
        let piece = build_vhat(k + i, d_cap)
            .scaled_mult(&TMono::s_pow(i as u32), &alpha_coeff(i as u32));
        op = op.add(&piece);
    }
    op
}

/// Right-hand side of the deformed relation: (n−m)·Σᵢ βᵢ sⁱ V̂_{n+m+i}.
pub fn deformed_relation_rhs(n: i64, m: i64, d_cap: u32) -> DiffOp {
    let mut op = DiffOp::new(d_cap);
    if n == m {
        return op;
    }
    for i in 0..=(2 * (d_cap as i64) + 1 - (n + m)).max(0) {
        let piece = build_vhat(n + m + i, d_cap)
            .scaled_mult(&TMono::s_pow(i as u32), &beta_coeff(i as u32));
        op = op.add(&piece);
    }
    op.scale(&rat_int(n - m))
}

/// Right-hand side of the boson identity: −½J_{2k+3} + Σᵢ βᵢ sⁱ E_{k+i}.
pub fn boson_rhs(k: i64, d_cap: u32) -> DiffOp {
    let mut op = build_j(2 * k + 3, d_cap).scale(&rat(-1, 2));
    for i in 0..=(2 * (d_cap as i64) + 1 - k).max(0) {
        let piece = build_e(k + i, d_cap)
            .scaled_mult(&TMono::s_pow(i as u32), &beta_coeff(i as u32));
        op = op.add(&piece);
    }
    op
}

/// e^{−f}·(op e^f) as a series on f's window, expanded through second
/// order: a term c·m·∂ᵢ∂ⱼ contributes c·m·(∂ᵢ∂ⱼf + ∂ᵢf·∂ⱼf).
pub fn apply_to_exp(op: &DiffOp, f: &TSeries) -> TSeries {
    assert!(
        f.coefficient(&TMono::unit()).is_zero(),
        "exp-conjugation requires a constant-free series"
    );
    let window = f.window();
    let mut out = TSeries::zero(window);
    for (mult, deriv, c) in op.terms() {
        let body = match deriv {
            [] => TSeries::constant(window, Rat::one()),
            [i] => f.derivative(*i),
            [i, j] => {
                let di = f.derivative(*i);
                let dj = f.derivative(*j);
                di.derivative(*j).add(&di.mul(&dj))
            }
            _ => panic!("operator order above two cannot act on an exponential here"),
        };
        out = out.add(&body.mul_mono(mult, c));
    }
    out
}

/// The coefficient of `at` in e^{−f}·(op e^f), reading f coefficientwise:
/// a term c·s^a·t^μ·∂_ν contributes at `at` only if s^a·t^μ divides it,
/// and then reads f at the quotient raised by ν (plus all product splits
/// for order two). Series outside the stored support read as zero.
pub fn residual_coeff_at(op: &DiffOp, f: &TSeries, at: &TMono) -> Rat {
    let mut acc = Rat::zero();
    for (mult, deriv, c) in op.terms() {
        let q = match at.checked_div(mult) {
            Some(q) => q,
            None => continue,
        };
        match deriv {
            [] => {
                if q == TMono::unit() {
                    acc += c;
                }
            }
            [i] => {
                let coeff = f.coefficient(&q.mul(&TMono::t_pow(*i, 1)));
                if !coeff.is_zero() {
                    acc += c * rat_int((q.t_exp(*i) + 1) as i64) * coeff;
                }
            }
            [i, j] => {
                let both = q.mul(&TMono::t_pow(*i, 1)).mul(&TMono::t_pow(*j, 1));
                let coeff = f.coefficient(&both);
                if !coeff.is_zero() {
                    let lift = (q.t_exp(*i) + 1) * (q.t_exp(*j) + 1 + u32::from(i == j));
                    acc += c * rat_int(lift as i64) * coeff;
                }
                for a in q.divisors() {
                    let fa = f.coefficient(&a.mul(&TMono::t_pow(*i, 1)));
                    if fa.is_zero() {
                        continue;
                    }
                    let b = q.checked_div(&a).expect("divisor of q");
                    let fb = f.coefficient(&b.mul(&TMono::t_pow(*j, 1)));
                    if fb.is_zero() {
                        continue;
                    }
                    let lift = (a.t_exp(*i) + 1) * (b.t_exp(*j) + 1);
                    acc += c * rat_int(lift as i64) * fa * fb;
                }
            }
            _ => panic!("operator order above two cannot act on an exponential here"),
        }
    }
    acc
}

/// Whether the window determines the residual coefficient at `at` exactly:
/// every monomial the evaluation reads must be covered, except product
/// splits where one factor is off the dimension grading (zero in truth).
pub fn is_residual_determined(op: &DiffOp, window: Window, at: &TMono) -> bool {
    for (mult, deriv, _) in op.terms() {
        let q = match at.checked_div(mult) {
            Some(q) => q,
            None => continue,
        };
        match deriv {
            [] => {}
            [i] => {
                if !window.covers(&q.mul(&TMono::t_pow(*i, 1))) {
                    return false;
                }
            }
            [i, j] => {
                if !window.covers(&q.mul(&TMono::t_pow(*i, 1)).mul(&TMono::t_pow(*j, 1))) {
                    return false;
                }
                for a in q.divisors() {
                    let fa = a.mul(&TMono::t_pow(*i, 1));
                    let fb = q
                        .checked_div(&a)
                        .expect("divisor of q")
                        .mul(&TMono::t_pow(*j, 1));
                    if fa.gn().is_none() || fb.gn().is_none() {
                        continue;
                    }
                    if !window.covers(&fa) || !window.covers(&fb) {
                        return false;
                    }
                }
            }
            _ => return false,
        }
    }
    true
}

/// Monomials worth asserting on: pull every window-valid monomial back
/// through each derivative stencil of the operator, then keep those whose
/// residual the window determines. For such monomials the capped operator
/// sees every term that could read on-grading data, so a vanishing residual
/// is an exact statement, not a truncation artifact. Soundness needs the
/// operator built with cap ≥ window.max_t_index() + 1.
pub fn residual_check_monomials(op: &DiffOp, window: Window) -> Vec<TMono> {
    assert!(
        op.d_cap() > window.max_t_index(),
        "safety analysis needs one cap level above the window"
    );
    let valid = window.valid_monomials();
    let mut seen = BTreeSet::new();
    for (mult, deriv, _) in op.terms() {
        let stencil = match deriv {
            [] => continue,
            [i] => TMono::t_pow(*i, 1),
            [i, j] => TMono::t_pow(*i, 1).mul(&TMono::t_pow(*j, 1)),
            _ => continue,
        };
        for r in &valid {
            if let Some(q) = r.checked_div(&stencil) {
                seen.insert(q.mul(mult));
            }
        }
    }
    seen.into_iter()
        .filter(|m| is_residual_determined(op, window, m))
        .collect()
}

/// Which operator family drives the constraint solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintFamily {
    /// V̂_k acting on the mixed generating function (s and t variables).
    Deformed,
    /// L_k acting on the pure-ψ generating function (t variables only).
    Undeformed,
}

/// Reconstructs the generating function on {g ≤ g_max, n ≤ n_max} from the
/// constraints alone, with no seeded coefficients.
///
/// Targets are processed in increasing dimension 3g−3+n. A target with
/// largest t-index d is pinned by the k = d−1 constraint at the probe
/// obtained by removing one t_d: there the leading term reads the target
/// with a nonzero factor, and every other read is a previously solved
/// coefficient (same genus, fewer points; or lower genus) or off-grading.
/// The enlarged genus-dependent margin n ≤ n_max + 2(g_max − g) makes the
/// probe equations close over the solved set.
pub fn solve_series_from_constraints(
    family: ConstraintFamily,
    g_max: u32,
    n_max: u32,
) -> TSeries {
    let container = Window::bounded(g_max, n_max + 2 * g_max);
    let d_cap = container.max_t_index();
    let mut ops: BTreeMap<i64, DiffOp> = BTreeMap::new();
    let mut targets: Vec<(u32, u32, TMono)> = Vec::new();
    for g in 0..=g_max {
        for n in 1..=(n_max + 2 * (g_max - g)) {
            if 2 * g + n <= 2 {
                continue;
            }
            for m in monomials_for(g, n) {
                if family == ConstraintFamily::Undeformed && m.s != 0 {
                    continue;
                }
                targets.push((3 * g + n - 3, g, m));
            }
        }
    }
    targets.sort();

    let mut solved = TSeries::zero(container);
    for (_, _, target) in targets {
        let dmax = target
            .max_t_index()
            .expect("every target carries a marked point");
        let k = dmax as i64 - 1;
        let op = ops.entry(k).or_insert_with(|| match family {
            ConstraintFamily::Deformed => build_vhat(k, d_cap),
            ConstraintFamily::Undeformed => build_l(k, d_cap),
        });
        let probe = target
            .checked_div(&TMono::t_pow(dmax, 1))
            .expect("dmax divides the target");
        let rest = residual_coeff_at(op, &solved, &probe);
        // Residual at the probe = rest + lambda·(target coefficient).
        let lambda = dfact(k + 1) * rat(-1, 2) * rat_int(target.t_exp(dmax) as i64);
        assert!(
            !lambda.is_zero(),
            "constraint fails to determine {target:?}"
        );
        let value = -rest / lambda;
        if !value.is_zero() {
            solved.add_term(target, value);
        }
    }
    solved
}
