//! Generating-function assembly and the KdV-side certificate.
//!
//! Two series are built over a truncation window:
//!
//! * F — the pure-ψ generating function: the coefficient of ∏tᵢ^{nᵢ} is
//!   ⟨∏τᵢ^{nᵢ}⟩_g/∏nᵢ! (each monomial determines its genus).
//! * G — the mixed generating function: the coefficient of s^m·∏tᵢ^{nᵢ} is
//!   ⟨κ₁^m ∏τᵢ^{nᵢ}⟩_g/(m!·∏nᵢ!).
//!
//! The central identity is that G arises from F by the variable shift
//! tⱼ ↦ tⱼ + cⱼ·s^{j−1} (j ≥ 2) with cⱼ = [`crate::numkit::gamma_shift_coeff`];
//! [`assemble_g_by_shift`] realizes it and the tests compare against the
//! direct assembly from the κ-ladder recursion. Because the shift lowers n
//! and raises nothing else, producing G on a window {g ≤ G, n ≤ N} needs F
//! on the wider window {g ≤ G, n ≤ N + (3G−3+N)}; [`TauPair::assemble`]
//! handles the bookkeeping.
//!
//! Independently, F is checked against the first KdV flow
//! ∂_{t₁}u = u·∂_{t₀}u + (1/12)·∂³_{t₀}u for u = ∂²F/∂t₀², on the
//! monomials where the truncated series determines the residual exactly.

use crate::intersect::{bracket, BracketKey, BracketMemo};
use crate::numkit::{factorial_rat, gamma_shift_coeff, rat, Rat};
use crate::polyalg::{monomials_for, TMono, TSeries, Window};

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_traits::Zero;

/// The ψ-index multiset of a monomial's t-part.
fn psi_list(m: &TMono) -> Vec<u32> {
    let mut out = Vec::new();
    for &(i, e) in &m.t {
        out.extend(core::iter::repeat(i).take(e as usize));
    }
    out
}

/// ∏ nᵢ! over the t-exponents of the monomial.
fn t_symmetry_factor(m: &TMono) -> Rat {
    let mut f = factorial_rat(0);
    for &(_, e) in &m.t {
        f *= factorial_rat(e);
    }
    f
}

/// The pure-ψ generating function F on the window (s-free).
pub fn assemble_f(window: Window, memo: &mut BracketMemo) -> TSeries {
    let mut out = TSeries::zero(window);
    for (g, n) in window.surface_types() {
        for m in monomials_for(g, n) {
            if m.s != 0 {
                continue;
            }
            let val = bracket(&BracketKey::new(g, 0, psi_list(&m)), memo);
            if !val.is_zero() {
                let denom = t_symmetry_factor(&m);
                out.add_term(m, val / denom);
            }
        }
    }
    out
}

/// The mixed generating function G on the window, assembled directly from
/// the κ-ladder recursion.
pub fn assemble_g_direct(window: Window, memo: &mut BracketMemo) -> TSeries {
    let mut out = TSeries::zero(window);
    for (g, n) in window.surface_types() {
        for m in monomials_for(g, n) {
            let val = bracket(&BracketKey::new(g, m.s, psi_list(&m)), memo);
            if !val.is_zero() {
                let denom = factorial_rat(m.s) * t_symmetry_factor(&m);
                out.add_term(m, val / denom);
            }
        }
    }
    out
}

/// The canonical shift table tⱼ ↦ tⱼ + cⱼ·s^{j−1} for 2 ≤ j ≤ max_index.
pub fn shift_table(max_index: u32) -> Vec<(u32, Rat)> {
    (2..=max_index).map(|j| (j, gamma_shift_coeff(j))).collect()
}

/// G produced from F by the variable shift. The result keeps F's window;
/// callers narrow it (see [`TauPair::assemble`] for the window arithmetic).
pub fn assemble_g_by_shift(f: &TSeries) -> TSeries {
    let cap = f.window().max_t_index();
    f.shift_substitute(&shift_table(cap.max(2)))
}

/// F and G on a common window, with G produced by the shift route.
#[derive(Debug, Clone)]
pub struct TauPair {
    pub window: Window,
    pub f: TSeries,
    pub g: TSeries,
}

impl TauPair {
    /// Assembles F and G on `window`, computing F on the wider window
    /// required for the shift to be exact on every window-valid monomial.
    pub fn assemble(window: Window, memo: &mut BracketMemo) -> Self {
        let (g_max, n_max) = match window {
            Window::Bounded { g_max, n_max } => (g_max, n_max),
            Window::Unbounded => panic!("tau-function assembly requires a bounded window"),
        };
        let wide = Window::bounded(g_max, n_max + window.weight_cap().expect("bounded"));
        let f_wide = assemble_f(wide, memo);
        let g = assemble_g_by_shift(&f_wide).valid_part(window);
        let f = f_wide.valid_part(window);
        TauPair { window, f, g }
    }
}

/// The first-KdV-flow residual ∂_{t₁}u − u·∂_{t₀}u − (1/12)∂³_{t₀}u with
/// u = ∂²F/∂t₀², computed on F's window. Only coefficients at monomials
/// passing [`kdv1_is_safe`] are determined by the truncation.
pub fn kdv1_residual(f: &TSeries) -> TSeries {
    let u = f.derivative(0).derivative(0);
    let du = u.derivative(0);
    let dddu = du.derivative(0).derivative(0);
    u.derivative(1)
        .sub(&u.mul(&du))
        .sub(&dddu.scale(&rat(1, 12)))
}

/// Whether the window determines the KdV residual coefficient at `m`
/// exactly: every monomial of F the coefficient reads — through ∂₁∂₀²,
/// ∂₀⁵, or a product split of ∂₀²·∂₀³ — must be covered by the window.
pub fn kdv1_is_safe(window: Window, m: &TMono) -> bool {
    let t0 = |e: u32| TMono::t_pow(0, e);
    // ∂_{t₁}u reads F at m + e₁ + 2e₀; ∂³_{t₀}u reads F at m + 5e₀.
    let p1 = m.mul(&TMono::t_pow(1, 1)).mul(&t0(2));
    let p2 = m.mul(&t0(5));
    if !window.covers(&p1) || !window.covers(&p2) {
        return false;
    }
    // u·∂₀u reads F at A + 2e₀ and B + 3e₀ for every split A·B = m. A pair
    // is harmless if either preimage is invalid (that factor is zero in
    // truth); otherwise both must be covered.
    for a in m.divisors() {
        let b = m.checked_div(&a).expect("divisor");
        let pa = a.mul(&t0(2));
        let pb = b.mul(&t0(3));
        if pa.gn().is_none() || pb.gn().is_none() {
            continue;
        }
        if !window.covers(&pa) || !window.covers(&pb) {
            return false;
        }
    }
    true
}

/// All monomials at which the window-truncated residual is meaningful and
/// checkable: candidates are window-valid F-monomials pulled back through
/// the ∂₁∂₀² and ∂₀⁵ stencils, filtered by safety.
pub fn kdv1_safe_monomials(window: Window) -> Vec<TMono> {
    let stencils = [
        TMono::from_pairs(0, &[(0, 2), (1, 1)]),
        TMono::from_pairs(0, &[(0, 5)]),
    ];
    let mut seen = BTreeSet::new();
    seen.insert(TMono::unit());
    for (g, n) in window.surface_types() {
        for p in monomials_for(g, n) {
            if p.s != 0 {
                continue;
            }
            for stencil in &stencils {
                if let Some(m) = p.checked_div(stencil) {
                    seen.insert(m);
                }
            }
        }
    }
    seen.into_iter()
        .filter(|m| kdv1_is_safe(window, m))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::rat_int;

    #[test]
    fn f_coefficients() {
        let memo = &mut BracketMemo::new();
        let w = Window::bounded(1, 3);
        let f = assemble_f(w, memo);
        assert_eq!(f.coefficient(&TMono::t_pow(0, 3)), rat(1, 6));
        assert_eq!(f.coefficient(&TMono::t_pow(1, 1)), rat(1, 24));
        assert_eq!(
            f.coefficient(&TMono::from_pairs(0, &[(0, 1), (2, 1)])),
            rat(1, 24)
        );
        // No s-powers anywhere.
        for (m, _) in f.terms() {
            assert_eq!(m.s, 0);
        }
    }

    #[test]
    fn g_coefficients_and_s0_slice() {
        let memo = &mut BracketMemo::new();
        let pair = TauPair::assemble(Window::bounded(1, 3), memo);
        assert_eq!(
            pair.g.coefficient(&TMono::from_pairs(1, &[(0, 1)])),
            rat(1, 24)
        );
        // The s-free part of G is exactly F.
        let mut s0 = TSeries::zero(pair.window);
        for (m, c) in pair.g.terms() {
            if m.s == 0 {
                s0.add_term(m.clone(), c.clone());
            }
        }
        assert_eq!(s0, pair.f);
    }

    #[test]
    fn g_stored_coefficient_recovers_bracket() {
        let memo = &mut BracketMemo::new();
        let pair = TauPair::assemble(Window::bounded(0, 5), memo);
        // ⟨κ₁²τ₀⁵⟩₀ = 5 stored as 5/(2!·5!).
        let m = TMono::from_pairs(2, &[(0, 5)]);
        assert_eq!(pair.g.coefficient(&m), rat_int(5) / (rat_int(2) * rat_int(120)));
    }

    #[test]
    fn shift_matches_direct_assembly() {
        let memo = &mut BracketMemo::new();
        for (g_max, n_max) in [(0u32, 5u32), (1, 3), (2, 2)] {
            let w = Window::bounded(g_max, n_max);
            let pair = TauPair::assemble(w, memo);
            let direct = assemble_g_direct(w, memo).valid_part(w);
            assert_eq!(pair.g, direct, "window ({g_max},{n_max})");
        }
    }

    #[test]
    fn kdv_flow_residual_vanishes_where_determined() {
        let memo = &mut BracketMemo::new();
        let w = Window::bounded(2, 6);
        let f = assemble_f(w, memo);
        let residual = kdv1_residual(&f);
        let safe = kdv1_safe_monomials(w);
        assert!(safe.len() >= 5, "safety analysis left nothing to check");
        for m in &safe {
            assert!(
                residual.coefficient(m).is_zero(),
                "nonzero KdV residual at {m:?}"
            );
        }
        // The sweep is not vacuous at the top genus: t₆ is safe here and its
        // flow term reads the genus-2 value ⟨τ₀²τ₁τ₆⟩₂.
        assert!(safe.contains(&TMono::t_pow(6, 1)));
    }

    #[test]
    fn kdv_low_coefficients_zero() {
        let memo = &mut BracketMemo::new();
        let w = Window::bounded(1, 4);
        let f = assemble_f(w, memo);
        let residual = kdv1_residual(&f);
        for m in [TMono::unit(), TMono::t_pow(0, 1)] {
            assert!(kdv1_is_safe(w, &m));
            assert!(residual.coefficient(&m).is_zero());
        }
    }

    #[test]
    fn safety_rejects_window_edge() {
        // At the window edge the ∂₁∂₀² preimage escapes: with n_max = 3 the
        // monomial t₀ needs F at t₀³t₁ of type (0,4).
        let w = Window::bounded(0, 3);
        assert!(!kdv1_is_safe(w, &TMono::t_pow(0, 1)));
        assert!(kdv1_is_safe(Window::bounded(0, 4), &TMono::t_pow(0, 1)));
    }
}
