//! Exact Weil–Petersson volume polynomials by the Mirzakhani-type integral
//! recursion, in normalized form.
//!
//! The normalized volume v_{g,n} is a polynomial in qᵢ = Lᵢ² related to the
//! honest volume by Vol_{g,n}(2πL) = 2^d·π^{2d}·v_{g,n}(L), d = 3g−3+n. The
//! recursion distinguishes boundary 1 and averages an assembled integrand
//! over t ∈ [0, L₁]:
//!
//! * handle term — expand v_{g−1,n+1}(x, y, L_rest) in x²ᵃy²ᵇ; each
//!   monomial contributes 2·(2a+1)!(2b+1)!·𝔥_{2a+2b+3}(t) times its q-rest
//!   part ([`crate::kernel::kernel_moment`] gives the 𝔥 polynomials);
//! * splitting term — the same reduction applied to every ordered pair of
//!   stable surfaces splitting the genus and the label set {2,…,n};
//! * joining term — for each j ≥ 2, expand v_{g,n−1}(x, L_rest) in x²ᵃ;
//!   each monomial contributes (2a+1)!·(𝔥_{2a+1}(t+Lⱼ)+𝔥_{2a+1}(t−Lⱼ)),
//!   whose odd powers of t and Lⱼ cancel pairwise.
//!
//! The averaged integral t^{2u} ↦ q₁^u/(2u+1) then lands back in polynomial
//! form. Base cases: v₀,₃ = 1 and v₁,₁ = (1+q₁)/24 (the latter carries the
//! conventional ½ of the one-pointed torus, which the splitting term relies
//! on).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::kernel::kernel_moment;
use crate::numkit::{binomial, factorial_rat, rat, rat_int, Rat};
use crate::polyalg::{EvenPoly, QMono, TPoly};

/// Caller-owned memo table keyed by (g, n); label symmetry lets one
/// polynomial serve all boundary arrangements.
pub type VolMemo = BTreeMap<(u32, u32), EvenPoly>;

/// The normalized volume polynomial v_{g,n} in q₁…qₙ.
pub fn v_poly(g: u32, n: u32, memo: &mut VolMemo) -> EvenPoly {
    assert!(n >= 1 && 2 * g + n > 2, "unstable surface type ({g},{n})");
    if let Some(p) = memo.get(&(g, n)) {
        return p.clone();
    }
    let result = match (g, n) {
        (0, 3) => EvenPoly::one(3),
        (1, 1) => {
            let mut p = EvenPoly::constant(1, rat(1, 24));
            p.add_term(QMono { q: alloc::vec![1], p: 0 }, rat(1, 24));
            p
        }
        _ => recurse(g, n, memo),
    };
    memo.insert((g, n), result.clone());
    result
}

fn recurse(g: u32, n: u32, memo: &mut VolMemo) -> EvenPoly {
    // Integrand in t with coefficients in q₂…qₙ (ambient slots 0…n−2).
    let ambient = (n - 1) as usize;
    let mut integrand = TPoly::zero(ambient);

    // Handle term.
    if g >= 1 && 2 * (g - 1) + (n + 1) > 2 {
        let sub = v_poly(g - 1, n + 1, memo);
        // Sub-variables: slot 0 = x, slot 1 = y, slots 2… = labels 2…n.
        for (m, c) in sub.terms() {
            let (a, b) = (m.q[0], m.q[1]);
            let weight = rat_int(2) * factorial_rat(2 * a + 1) * factorial_rat(2 * b + 1) * c;
            let rest = rest_poly(&m.q[2..], ambient, &weight);
            add_kernel_times(&mut integrand, a + b + 1, &rest);
        }
    }

    // Splitting term: ordered stable pairs over genus and the label set.
    let labels: Vec<u32> = (2..=n).collect();
    for mask in 0u32..(1 << labels.len()) {
        let (set_i, set_j): (Vec<u32>, Vec<u32>) =
            labels.iter().partition(|&&l| mask & (1 << (l - 2)) != 0);
        for g1 in 0..=g {
            let g2 = g - g1;
            let n1 = set_i.len() as u32 + 1;
            let n2 = set_j.len() as u32 + 1;
            if 2 * g1 + n1 <= 2 || 2 * g2 + n2 <= 2 {
                continue;
            }
            let sub1 = v_poly(g1, n1, memo);
            let sub2 = v_poly(g2, n2, memo);
            for (m1, c1) in sub1.terms() {
                let a = m1.q[0];
                let rest1 = embed_labels(&m1.q[1..], &set_i, ambient);
                for (m2, c2) in sub2.terms() {
                    let b = m2.q[0];
                    let rest2 = embed_labels(&m2.q[1..], &set_j, ambient);
                    let weight = rat_int(2)
                        * factorial_rat(2 * a + 1)
                        * factorial_rat(2 * b + 1)
                        * c1
                        * c2;
                    let mut joint = rest1.clone();
                    for i in 0..ambient {
                        joint[i] += rest2[i];
                    }
                    let rest = rest_poly(&joint, ambient, &weight);
                    add_kernel_times(&mut integrand, a + b + 1, &rest);
                }
            }
        }
    }

    // Joining term (absent for n = 1, where no other boundary exists).
    if n >= 2 {
        let sub = v_poly(g, n - 1, memo);
        for j in 2..=n {
            // Sub-variables: slot 0 = x, slots 1… = labels {2…n}∖{j}.
            let others: Vec<u32> = (2..=n).filter(|&l| l != j).collect();
            for (m, c) in sub.terms() {
                let a = m.q[0];
                let rest = embed_labels(&m.q[1..], &others, ambient);
                let weight = factorial_rat(2 * a + 1) * c;
                // (t+Lⱼ)^{2v} + (t−Lⱼ)^{2v} = 2·Σ_w C(2v,2w)·t^{2v−2w}·qⱼ^w.
                let h = kernel_moment(a);
                for (v, hv) in h.even_coeffs().iter().enumerate() {
                    let v = v as u32;
                    for w in 0..=v {
                        let mut exps = rest.clone();
                        exps[(j - 2) as usize] += w;
                        let coeff = &weight
                            * hv
                            * rat_int(2)
                            * Rat::from_integer(binomial(2 * v, 2 * w));
                        let poly = rest_poly(&exps, ambient, &coeff);
                        integrand.add_term((2 * (v - w)) as usize, &poly);
                    }
                }
            }
        }
    }

    integrand.avg_integrate()
}

/// A single-monomial polynomial with the given q-exponents and coefficient.
fn rest_poly(exps: &[u32], ambient: usize, coeff: &Rat) -> EvenPoly {
    assert_eq!(exps.len(), ambient);
    let mut p = EvenPoly::zero(ambient);
    p.add_term(QMono { q: exps.to_vec(), p: 0 }, coeff.clone());
    p
}

/// Places sub-polynomial exponents (ordered as `labels`) into the ambient
/// slot layout where label l occupies slot l−2.
fn embed_labels(exps: &[u32], labels: &[u32], ambient: usize) -> Vec<u32> {
    assert_eq!(exps.len(), labels.len());
    let mut out = alloc::vec![0u32; ambient];
    for (&e, &l) in exps.iter().zip(labels) {
        out[(l - 2) as usize] = e;
    }
    out
}

/// Adds poly·𝔥_{2k+1}(t) to the integrand.
fn add_kernel_times(integrand: &mut TPoly, k: u32, poly: &EvenPoly) {
    let h = kernel_moment(k);
    for (u, hu) in h.even_coeffs().iter().enumerate() {
        integrand.add_term(2 * u, &poly.scale(hu));
    }
}

/// The honest volume polynomial Vol_{g,n} in q₁…qₙ and P (= π²): the
/// monomial q^e of v_{g,n} maps to 2^d·P^{d−|e|}·q^e/4^{|e|}.
pub fn vol_poly(g: u32, n: u32, memo: &mut VolMemo) -> EvenPoly {
    let v = v_poly(g, n, memo);
    let d = 3 * g + n - 3;
    let mut out = EvenPoly::zero(n as usize);
    for (m, c) in v.terms() {
        let e = m.q_deg();
        debug_assert!(e <= d && m.p == 0);
        let scale = Rat::from_integer(crate::numkit::pow2(d))
            / Rat::from_integer(crate::numkit::pow2(2 * e));
        out.add_term(QMono { q: m.q.clone(), p: d - e }, c * scale);
    }
    out
}

/// All stable (g, n) with 3g−3+n ≤ d_max, with both polynomial forms,
/// ordered by (dimension, genus).
pub fn volume_table(d_max: u32, memo: &mut VolMemo) -> Vec<(u32, u32, EvenPoly, EvenPoly)> {
    let mut out = Vec::new();
    for d in 0..=d_max {
        for g in 0..=(d + 3) / 3 {
            let n = d + 3 - 3 * g;
            if n >= 1 && 2 * g + n > 2 {
                out.push((g, n, v_poly(g, n, memo), vol_poly(g, n, memo)));
            }
        }
    }
    out
}
