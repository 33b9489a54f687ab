//! Exact mixed intersection numbers ⟨κ₁^{k₀} τ_{d₁}⋯τ_{dₙ}⟩_g.
//!
//! Two independent evaluation paths are provided:
//!
//! * [`bracket`] — a memoized recursion that consumes the largest ψ-index.
//!   One application lowers the complexity 3g−3+n by gluing a pair of pants:
//!   either a handle comes off (genus drops, two new ψ-legs), the surface
//!   splits into two stable pieces, or the distinguished leg joins another
//!   boundary. The κ₁-powers participate through the ladder coefficients
//!   β_i, which let κ₁^{k₀} shed weight into the new ψ-legs.
//! * [`kappa_from_psi`] — converts a mixed bracket into a finite signed
//!   combination of pure-ψ brackets via the shift coefficients c_j
//!   ([`crate::numkit::gamma_shift_coeff`]); only the k₀ = 0 slice of the
//!   recursion is exercised.
//!
//! A third, fully elementary evaluator, [`genus0_string_oracle`], computes
//! genus-0 pure-ψ brackets by repeated string-equation reduction and serves
//! as an independent ground truth for that sector.
//!
//! Memo tables are caller-owned so the crate stays allocation-only; the
//! companion CLI crate wraps them for sharing and persistence.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::numkit::{
    beta_coeff, binomial, factorial_rat, gamma_shift_coeff, odd_double_factorial_rat, rat,
    rat_int, Rat,
};

/// Canonical identifier of a mixed bracket ⟨κ₁^{kappa} ∏τ_{dᵢ}⟩_g.
///
/// Invariants: ψ-indices sorted descending, n = |psi| ≥ 1, and the surface
/// type is stable (2g−2+n > 0).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BracketKey {
    g: u32,
    kappa: u32,
    psi: Vec<u32>,
}

impl BracketKey {
    pub fn new(g: u32, kappa: u32, mut psi: Vec<u32>) -> Self {
        assert!(!psi.is_empty(), "bracket requires at least one tau factor");
        let n = psi.len() as u32;
        assert!(2 * g + n > 2, "unstable surface type ({g},{n})");
        psi.sort_unstable_by(|a, b| b.cmp(a));
        BracketKey { g, kappa, psi }
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    /// ψ-indices, sorted descending.
    pub fn psi(&self) -> &[u32] {
        &self.psi
    }

    pub fn n(&self) -> u32 {
        self.psi.len() as u32
    }

    /// Complexity 3g−3+n, the quantity every recursion step strictly lowers.
    pub fn complexity(&self) -> u32 {
        3 * self.g + self.n() - 3
    }

    /// The dimension gate: the bracket vanishes unless
    /// kappa + Σdᵢ = 3g−3+n.
    pub fn dimension_ok(&self) -> bool {
        self.kappa + self.psi.iter().sum::<u32>() == self.complexity()
    }
}

/// Caller-owned memo table for [`bracket`].
pub type BracketMemo = BTreeMap<BracketKey, Rat>;

/// The mixed bracket ⟨κ₁^{k₀} ∏τ_{dᵢ}⟩_g, exactly.
///
/// Returns 0 when the dimension gate fails. Results are memoized in `memo`;
/// passing the same table across calls shares all sub-results.
pub fn bracket(key: &BracketKey, memo: &mut BracketMemo) -> Rat {
    if !key.dimension_ok() {
        return Rat::zero();
    }
    if let Some(v) = memo.get(key) {
        return v.clone();
    }
    let v = match (key.g, key.n()) {
        // Gate-passing (0,3) keys are exactly ⟨τ₀³⟩₀.
        (0, 3) => rat_int(1),
        // Gate-passing (1,1) keys are ⟨τ₁⟩₁ and ⟨κ₁τ₀⟩₁, both 1/24.
        (1, 1) => rat(1, 24),
        _ => recurse(key, 0, memo),
    };
    memo.insert(key.clone(), v.clone());
    v
}

/// Diagnostic variant of [`bracket`] distinguishing the ψ-entry at position
/// `pos` of the canonical (descending) index list instead of the largest
/// one. The recursion is valid for any choice; agreement across choices is
/// a consistency check of the coefficient bookkeeping.
pub fn bracket_with_distinguished(key: &BracketKey, pos: usize, memo: &mut BracketMemo) -> Rat {
    if !key.dimension_ok() {
        return Rat::zero();
    }
    match (key.g, key.n()) {
        (0, 3) => rat_int(1),
        (1, 1) => rat(1, 24),
        _ => recurse(key, pos, memo),
    }
}

/// One recursion step on the ψ-entry at `pos`; sub-brackets are evaluated
/// canonically through [`bracket`].
fn recurse(key: &BracketKey, pos: usize, memo: &mut BracketMemo) -> Rat {
    let g = key.g;
    let k0 = key.kappa;
    let k = key.psi[pos];
    let mut rest = key.psi.clone();
    rest.remove(pos);

    // κ-ladder factor shared by all three sums: (k₀!/d₀!)·β_{k₀−d₀}.
    let ladder = |d0: u32| -> Rat {
        (factorial_rat(k0) / factorial_rat(d0)) * beta_coeff(k0 - d0)
    };

    // Handle term: the distinguished leg closes a handle, producing a
    // genus-(g−1) bracket with two new legs τ_{d₁}, τ_{d₂}. The summation
    // range d₀+d₁+d₂ = k₀+k−2 is exactly the sub-bracket's dimension gate.
    let mut handle_sum = Rat::zero();
    if g >= 1 && k0 + k >= 2 {
        let budget = k0 + k - 2;
        for d0 in 0..=budget.min(k0) {
            let lf = ladder(d0);
            for d1 in 0..=(budget - d0) {
                let d2 = budget - d0 - d1;
                let mut psi = rest.clone();
                psi.push(d1);
                psi.push(d2);
                let sub = bracket(&BracketKey::new(g - 1, d0, psi), memo);
                if sub.is_zero() {
                    continue;
                }
                handle_sum += &lf
                    * odd_double_factorial_rat(i64::from(d1))
                    * odd_double_factorial_rat(i64::from(d2))
                    * sub;
            }
        }
    }

    // Split term: the surface separates into two stable pieces carrying an
    // ordered distribution of genus, the remaining legs, and the κ-ladder.
    let mut split_sum = Rat::zero();
    let groups = group_multiset(&rest);
    for (part1, ways) in sub_multisets(&groups) {
        let part2 = multiset_diff(&groups, &part1);
        for g1 in 0..=g {
            let g2 = g - g1;
            let n1 = part1.len() as u32 + 1;
            let n2 = part2.len() as u32 + 1;
            if 2 * g1 + n1 <= 2 || 2 * g2 + n2 <= 2 {
                continue;
            }
            // Per-factor dimension budgets; negative means the gate cannot
            // be met by any (d₀, d₁).
            let w1: u32 = part1.iter().sum();
            let w2: u32 = part2.iter().sum();
            let b1 = i64::from(3 * g1 + n1) - 3 - i64::from(w1);
            let b2 = i64::from(3 * g2 + n2) - 3 - i64::from(w2);
            if b1 < 0 || b2 < 0 {
                continue;
            }
            let (b1, b2) = (b1 as u32, b2 as u32);
            for d0 in 0..=b1.min(k0) {
                for d0p in 0..=b2.min(k0 - d0) {
                    let (d1, d1p) = (b1 - d0, b2 - d0p);
                    let mut psi1 = part1.clone();
                    psi1.push(d1);
                    let mut psi2 = part2.clone();
                    psi2.push(d1p);
                    let sub1 = bracket(&BracketKey::new(g1, d0, psi1), memo);
                    if sub1.is_zero() {
                        continue;
                    }
                    let sub2 = bracket(&BracketKey::new(g2, d0p, psi2), memo);
                    if sub2.is_zero() {
                        continue;
                    }
                    let lf = (factorial_rat(k0) / (factorial_rat(d0) * factorial_rat(d0p)))
                        * beta_coeff(k0 - d0 - d0p);
                    split_sum += lf
                        * &ways
                        * odd_double_factorial_rat(i64::from(d1))
                        * odd_double_factorial_rat(i64::from(d1p))
                        * sub1
                        * sub2;
                }
            }
        }
    }

    // Join term: the distinguished leg absorbs another leg τ_j, leaving a
    // bracket with one leg fewer. Again the d₀+d₁ range is the gate.
    let mut join_sum = Rat::zero();
    for (j, mult) in &groups {
        if k0 + k + j == 0 {
            continue;
        }
        let budget = k0 + k + j - 1;
        for d0 in 0..=budget.min(k0) {
            let d1 = budget - d0;
            let mut psi = rest.clone();
            let at = psi.iter().position(|v| v == j).expect("entry from grouping");
            psi.remove(at);
            psi.push(d1);
            let sub = bracket(&BracketKey::new(g, d0, psi), memo);
            if sub.is_zero() {
                continue;
            }
            join_sum += ladder(d0)
                * (odd_double_factorial_rat(i64::from(d1))
                    / odd_double_factorial_rat(i64::from(*j) - 1))
                * rat_int(i64::from(*mult))
                * sub;
        }
    }

    (handle_sum.half() + split_sum.half() + join_sum)
        / odd_double_factorial_rat(i64::from(k))
}

trait Half {
    fn half(self) -> Self;
}

impl Half for Rat {
    fn half(self) -> Self {
        self / rat_int(2)
    }
}

/// Groups a descending multiset into (value, multiplicity) pairs.
fn group_multiset(entries: &[u32]) -> Vec<(u32, u32)> {
    let mut out: Vec<(u32, u32)> = Vec::new();
    for &v in entries {
        match out.last_mut() {
            Some((val, m)) if *val == v => *m += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

/// All sub-multisets of a grouped multiset, each with the number of ways
/// ∏(multᵢ choose lᵢ) to select it from labeled entries.
fn sub_multisets(groups: &[(u32, u32)]) -> Vec<(Vec<u32>, Rat)> {
    let mut out: Vec<(Vec<u32>, Rat)> = alloc::vec![(Vec::new(), rat_int(1))];
    for &(v, mult) in groups {
        let mut next = Vec::with_capacity(out.len() * (mult as usize + 1));
        for (chosen, ways) in &out {
            for l in 0..=mult {
                let mut c = chosen.clone();
                c.extend(core::iter::repeat(v).take(l as usize));
                next.push((c, ways * Rat::from_integer(binomial(mult, l))));
            }
        }
        out = next;
    }
    out
}

/// The complement of `part` inside the grouped multiset.
fn multiset_diff(groups: &[(u32, u32)], part: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    for &(v, mult) in groups {
        let used = part.iter().filter(|&&x| x == v).count() as u32;
        out.extend(core::iter::repeat(v).take((mult - used) as usize));
    }
    out
}

/// Genus-0 pure-ψ brackets by repeated string-equation reduction:
/// ⟨τ₀ ∏τ_{dᵢ}⟩₀ = Σⱼ ⟨τ_{dⱼ−1} ∏_{i≠j} τ_{dᵢ}⟩₀, ending at ⟨τ₀³⟩₀ = 1.
///
/// Every dimension-correct genus-0 key with n > 3 contains a τ₀ (otherwise
/// Σdᵢ ≥ n > n−3), so the reduction never gets stuck. Completely
/// independent of [`bracket`].
pub fn genus0_string_oracle(psi: &[u32]) -> Rat {
    let mut sorted = psi.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let n = sorted.len() as u32;
    assert!(n >= 3, "genus-0 bracket needs at least three tau factors");
    assert!(
        sorted.iter().sum::<u32>() == n - 3,
        "dimension gate requires sum of indices = n - 3 at genus 0"
    );
    string_reduce(&sorted)
}

fn string_reduce(sorted_desc: &[u32]) -> Rat {
    if sorted_desc.len() == 3 {
        // The gate leaves only ⟨τ₀³⟩₀.
        return rat_int(1);
    }
    // Remove one τ₀ (the last entry of the descending list).
    debug_assert_eq!(*sorted_desc.last().expect("nonempty"), 0);
    let remaining = &sorted_desc[..sorted_desc.len() - 1];
    let mut total = Rat::zero();
    for (i, &d) in remaining.iter().enumerate() {
        if d == 0 {
            continue;
        }
        let mut reduced = remaining.to_vec();
        reduced[i] = d - 1;
        reduced.sort_unstable_by(|a, b| b.cmp(a));
        total += string_reduce(&reduced);
    }
    total
}

/// The mixed bracket ⟨κ₁^m ∏τ_{dᵢ}⟩_g expressed through pure-ψ brackets:
///
/// ```text
/// m!·Σ_{ {r_j}_{j≥2} : Σ r_j(j−1) = m } ∏ⱼ c_j^{r_j}/r_j! · ⟨∏τ_{dᵢ}·∏τⱼ^{r_j}⟩_g
/// ```
///
/// with c_j the shift coefficients. Only k₀ = 0 brackets are consulted, so
/// this is an independent path to every mixed value.
pub fn kappa_from_psi(m: u32, psi: &[u32], g: u32, memo: &mut BracketMemo) -> Rat {
    assert!(!psi.is_empty(), "bracket requires at least one tau factor");
    let n = psi.len() as u32;
    let dim = 3 * i64::from(g) - 3 + i64::from(n);
    if i64::from(m + psi.iter().sum::<u32>()) != dim {
        return Rat::zero();
    }
    let mut total = Rat::zero();
    for partition in partitions(m) {
        // A part of size p contributes one τ_{p+1} with c_{p+1}.
        let mut factor = factorial_rat(m);
        let mut extended = psi.to_vec();
        for &(part, r) in &partition {
            let j = part + 1;
            let c = gamma_shift_coeff(j);
            for _ in 0..r {
                factor *= &c;
                extended.push(j);
            }
            factor /= factorial_rat(r);
        }
        total += factor * bracket(&BracketKey::new(g, 0, extended), memo);
    }
    total
}

/// All partitions of `m` as (part, multiplicity) lists with parts
/// descending; the empty partition for m = 0.
fn partitions(m: u32) -> Vec<Vec<(u32, u32)>> {
    let mut out = Vec::new();
    let mut current: Vec<(u32, u32)> = Vec::new();
    fn walk(remaining: u32, max_part: u32, current: &mut Vec<(u32, u32)>, out: &mut Vec<Vec<(u32, u32)>>) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        for part in (1..=max_part.min(remaining)).rev() {
            for mult in (1..=remaining / part).rev() {
                current.push((part, mult));
                walk(remaining - part * mult, part - 1, current, out);
                current.pop();
            }
        }
    }
    walk(m, m.max(1), &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(g: u32, kappa: u32, psi: &[u32]) -> BracketKey {
        BracketKey::new(g, kappa, psi.to_vec())
    }

    /// All descending multisets of `n` indices summing to exactly `total`.
    fn index_multisets(n: u32, total: u32) -> Vec<Vec<u32>> {
        fn walk(slots: u32, left: u32, cap: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if slots == 0 {
                if left == 0 {
                    out.push(cur.clone());
                }
                return;
            }
            for d in (0..=cap.min(left)).rev() {
                cur.push(d);
                walk(slots - 1, left - d, d, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        walk(n, total, total, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn seeds() {
        let memo = &mut BracketMemo::new();
        assert_eq!(bracket(&key(0, 0, &[0, 0, 0]), memo), rat_int(1));
        assert_eq!(bracket(&key(1, 0, &[1]), memo), rat(1, 24));
        assert_eq!(bracket(&key(1, 1, &[0]), memo), rat(1, 24));
    }

    #[test]
    fn dimension_gate_vanishing() {
        let memo = &mut BracketMemo::new();
        assert!(bracket(&key(0, 0, &[0, 0, 0, 0]), memo).is_zero());
        assert!(bracket(&key(1, 2, &[0]), memo).is_zero());
        assert!(bracket(&key(0, 1, &[2, 0, 0, 0]), memo).is_zero());
        assert!(bracket(&key(2, 0, &[3, 0]), memo).is_zero());
        // Sampled sweep: everything off-gate is zero.
        for g in 0..=2u32 {
            for n in 1..=5u32 {
                if 2 * g + n <= 2 {
                    continue;
                }
                let dim = 3 * g + n - 3;
                for kappa in 0..=dim + 1 {
                    for extra in [1, 2] {
                        for psi in index_multisets(n, dim + extra - kappa.min(dim + extra)) {
                            let k = key(g, kappa, &psi);
                            if !k.dimension_ok() {
                                assert!(bracket(&k, memo).is_zero());
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn join_and_split_reassemble_fifteen() {
        // 15·⟨τ₂τ₀⁴⟩₀ = 12 (join) + 3 (split), so the bracket itself is 1.
        let memo = &mut BracketMemo::new();
        assert_eq!(bracket(&key(0, 0, &[2, 0, 0, 0, 0]), memo), rat_int(1));
    }

    #[test]
    fn string_oracle_values() {
        assert_eq!(genus0_string_oracle(&[0, 0, 0]), rat_int(1));
        assert_eq!(genus0_string_oracle(&[1, 0, 0, 0]), rat_int(1));
        assert_eq!(genus0_string_oracle(&[3, 0, 0, 0, 0, 0]), rat_int(1));
        assert_eq!(genus0_string_oracle(&[2, 2, 0, 0, 0, 0, 0]), rat_int(6));
    }

    #[test]
    fn recursion_matches_string_oracle_through_n7() {
        let memo = &mut BracketMemo::new();
        for n in 3..=7u32 {
            for psi in index_multisets(n, n - 3) {
                assert_eq!(
                    bracket(&key(0, 0, &psi), memo),
                    genus0_string_oracle(&psi),
                    "psi = {psi:?}"
                );
            }
        }
    }

    #[test]
    fn genus_one_pure_values() {
        let memo = &mut BracketMemo::new();
        assert_eq!(bracket(&key(1, 0, &[2, 0]), memo), rat(1, 24));
        assert_eq!(bracket(&key(1, 0, &[1, 1]), memo), rat(1, 24));
        assert_eq!(bracket(&key(1, 0, &[2, 1, 0]), memo), rat(1, 12));
        assert_eq!(bracket(&key(1, 0, &[3, 0, 0]), memo), rat(1, 24));
        assert_eq!(bracket(&key(1, 0, &[2, 2, 0, 0]), memo), rat(1, 6));
    }

    #[test]
    fn genus_two_pure_values() {
        // ⟨τ₄⟩₂ = 1/1152, the classical one-point genus-2 value; its string
        // and dilaton descendants must follow.
        let memo = &mut BracketMemo::new();
        let v = bracket(&key(2, 0, &[4]), memo);
        assert_eq!(v, rat(1, 1152));
        assert_eq!(bracket(&key(2, 0, &[5, 0]), memo), v.clone());
        assert_eq!(bracket(&key(2, 0, &[4, 1]), memo), v * rat_int(3));
    }

    #[test]
    fn mixed_values() {
        let memo = &mut BracketMemo::new();
        assert_eq!(bracket(&key(1, 1, &[1, 0]), memo), rat(1, 12));
        assert_eq!(bracket(&key(0, 2, &[0, 0, 0, 0, 0]), memo), rat_int(5));
        assert_eq!(bracket(&key(1, 2, &[0, 0]), memo), rat(1, 8));
    }

    #[test]
    fn shift_path_small_examples() {
        let memo = &mut BracketMemo::new();
        // m = 0 is the pure bracket unchanged.
        assert_eq!(kappa_from_psi(0, &[2, 0, 0, 0, 0], 0, memo), rat_int(1));
        // ⟨κ₁τ₀⟩₁ = ⟨τ₂τ₀⟩₁ = 1/24.
        assert_eq!(kappa_from_psi(1, &[0], 1, memo), rat(1, 24));
        // ⟨κ₁²τ₀⁵⟩₀ = ⟨τ₂²τ₀⁵⟩₀ − ⟨τ₃τ₀⁵⟩₀ = 6 − 1 = 5.
        assert_eq!(kappa_from_psi(2, &[0, 0, 0, 0, 0], 0, memo), rat_int(5));
        // Gate failure returns zero.
        assert!(kappa_from_psi(1, &[0, 0, 0], 0, memo).is_zero());
    }

    #[test]
    fn ladder_and_shift_paths_agree_on_window() {
        // Every in-window mixed bracket evaluated by the κ-ladder recursion
        // equals its expansion into shifted pure-ψ brackets.
        let memo = &mut BracketMemo::new();
        for (g, n_max) in [(0u32, 8u32), (1, 5), (2, 2)] {
            for n in 1..=n_max {
                if 2 * g + n <= 2 {
                    continue;
                }
                let dim = 3 * g + n - 3;
                for kappa in 0..=dim {
                    for psi in index_multisets(n, dim - kappa) {
                        let direct = bracket(&key(g, kappa, &psi), memo);
                        let shifted = kappa_from_psi(kappa, &psi, g, memo);
                        assert_eq!(direct, shifted, "g={g} kappa={kappa} psi={psi:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn string_equation_on_window() {
        // ⟨τ₀ ∏τ_{dᵢ}⟩_g = Σⱼ ⟨τ_{dⱼ−1} ∏_{i≠j}τ_{dᵢ}⟩_g for pure-ψ keys.
        let memo = &mut BracketMemo::new();
        for g in 0..=2u32 {
            for n in 2..=5u32 {
                if 2 * g + n <= 2 || (g, n) == (0, 3) {
                    continue;
                }
                let dim = 3 * g + n - 3;
                if dim == 0 {
                    continue;
                }
                for rest in index_multisets(n - 1, dim) {
                    if 2 * g + n - 1 <= 2 {
                        continue;
                    }
                    let mut with_zero = rest.clone();
                    with_zero.push(0);
                    let lhs = bracket(&key(g, 0, &with_zero), memo);
                    let mut rhs = Rat::zero();
                    for i in 0..rest.len() {
                        if rest[i] == 0 {
                            continue;
                        }
                        let mut red = rest.clone();
                        red[i] -= 1;
                        rhs += bracket(&key(g, 0, &red), memo);
                    }
                    assert_eq!(lhs, rhs, "g={g} rest={rest:?}");
                }
            }
        }
    }

    #[test]
    fn dilaton_equation_on_window() {
        // ⟨τ₁ ∏τ_{dᵢ}⟩_g = (2g−2+n)·⟨∏τ_{dᵢ}⟩_g for pure-ψ keys.
        let memo = &mut BracketMemo::new();
        for g in 0..=2u32 {
            for n in 1..=4u32 {
                if 2 * g + n <= 2 {
                    continue;
                }
                let dim = 3 * g + n - 3;
                for psi in index_multisets(n, dim) {
                    let mut with_one = psi.clone();
                    with_one.push(1);
                    let lhs = bracket(&key(g, 0, &with_one), memo);
                    let rhs = bracket(&key(g, 0, &psi), memo)
                        * rat_int(i64::from(2 * g + n) - 2);
                    assert_eq!(lhs, rhs, "g={g} psi={psi:?}");
                }
            }
        }
    }

    #[test]
    fn distinguished_entry_choice_is_immaterial() {
        let memo = &mut BracketMemo::new();
        let samples = [
            key(0, 0, &[2, 0, 0, 0, 0]),
            key(0, 0, &[1, 1, 0, 0, 0]),
            key(0, 1, &[1, 0, 0, 0, 0]),
            key(1, 0, &[2, 1, 0]),
            key(1, 1, &[1, 0]),
            key(1, 2, &[0, 0]),
            key(2, 1, &[3, 0]),
            key(2, 3, &[0, 0]),
        ];
        for k in samples {
            let canonical = bracket(&k, memo);
            for pos in 0..k.psi().len() {
                assert_eq!(
                    bracket_with_distinguished(&k, pos, memo),
                    canonical,
                    "key {k:?} pos {pos}"
                );
            }
        }
    }

    #[test]
    #[should_panic(expected = "unstable")]
    fn unstable_key_rejected() {
        let _ = key(0, 0, &[0, 0]);
    }
}
