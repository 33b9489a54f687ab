//! Closed polynomial forms of the recursion-kernel moment integrals.
//!
//! The integral transform at the heart of the volume recursion uses the
//! kernel K(x,t) = 1/(1+e^{π(x+t)}) + 1/(1+e^{π(x−t)}). Its odd moments are
//! even polynomials in t:
//!
//! ```text
//! ∫₀^∞ x^{2k+1}/(2k+1)! · K(x,t) dx
//!   = Σ_{m=0}^{k+1} (−1)^{m−1}(2^{2m}−2)·B_{2m}/(2m)! · t^{2k+2−2m}/(2k+2−2m)!
//! ```
//!
//! with B the Bernoulli numbers. This module evaluates that closed form
//! exactly; the floating-point quadrature that verifies it against the
//! actual integral lives in the companion CLI crate (the only place
//! approximate arithmetic is allowed).

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::numkit::{bernoulli_upto, factorial_rat, pow2, rat_int, Rat};

/// The even polynomial equal to the (2k+1)-st moment of the recursion
/// kernel.
///
/// Invariants: degree exactly 2k+2, only even powers of t, leading
/// coefficient 1/(2k+2)!.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelMoment {
    k: u32,
    /// even_coeffs[u] multiplies t^{2u}, u = 0..=k+1.
    even_coeffs: Vec<Rat>,
}

impl KernelMoment {
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Degree of the polynomial, always 2k+2.
    pub fn degree(&self) -> u32 {
        2 * self.k + 2
    }

    /// Coefficient of t^{2u} (zero beyond the degree).
    pub fn even_coeff(&self, u: u32) -> Rat {
        self.even_coeffs.get(u as usize).cloned().unwrap_or_else(Rat::zero)
    }

    /// Coefficients of t⁰, t², …, t^{2k+2} in order.
    pub fn even_coeffs(&self) -> &[Rat] {
        &self.even_coeffs
    }

    /// Exact evaluation at rational t.
    pub fn eval(&self, t: &Rat) -> Rat {
        let t2 = t * t;
        let mut acc = Rat::zero();
        for c in self.even_coeffs.iter().rev() {
            acc = acc * &t2 + c;
        }
        acc
    }

    /// Double-precision evaluation at real t (plain polynomial arithmetic;
    /// used by the quadrature checks in the companion crate).
    pub fn eval_f64(&self, t: f64) -> f64 {
        let t2 = t * t;
        let mut acc = 0.0f64;
        for c in self.even_coeffs.iter().rev() {
            acc = acc * t2 + rat_to_f64(c);
        }
        acc
    }
}

/// Closed form of the (2k+1)-st kernel moment (see module docs).
pub fn kernel_moment(k: u32) -> KernelMoment {
    let bern = bernoulli_upto(k + 1);
    let mut even_coeffs = vec![Rat::zero(); k as usize + 2];
    for m in 0..=k + 1 {
        // (−1)^{m−1}(2^{2m}−2)·B_{2m}/(2m)! / (2k+2−2m)!
        let sign = if m % 2 == 1 { rat_int(1) } else { rat_int(-1) };
        let two_pow = Rat::from_integer(pow2(2 * m)) - rat_int(2);
        let c = sign * two_pow * &bern[m as usize] / factorial_rat(2 * m)
            / factorial_rat(2 * k + 2 - 2 * m);
        even_coeffs[(k + 1 - m) as usize] = c;
    }
    let out = KernelMoment { k, even_coeffs };
    debug_assert_eq!(out.even_coeff(k + 1), factorial_rat(2 * k + 2).recip());
    out
}

/// Lossy conversion of an exact rational to f64 (for the quadrature
/// comparisons only).
pub fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("rational magnitude representable as f64")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{beta_coeff, rat};

    #[test]
    fn first_moment_is_half_t_squared_plus_sixth() {
        let h = kernel_moment(0);
        assert_eq!(h.even_coeffs(), &[rat(1, 6), rat(1, 2)]);
    }

    #[test]
    fn third_moment_matches_frozen_form() {
        // t⁴/24 + t²/12 + 7/360
        let h = kernel_moment(1);
        assert_eq!(h.even_coeffs(), &[rat(7, 360), rat(1, 12), rat(1, 24)]);
    }

    #[test]
    fn fifth_moment_matches_frozen_form() {
        // t⁶/720 + t⁴/144 + 7t²/720 + 31/15120
        let h = kernel_moment(2);
        assert_eq!(
            h.even_coeffs(),
            &[rat(31, 15120), rat(7, 720), rat(1, 144), rat(1, 720)]
        );
    }

    #[test]
    fn degree_and_leading_coefficient() {
        for k in 0..=8 {
            let h = kernel_moment(k);
            assert_eq!(h.degree(), 2 * k + 2);
            assert_eq!(h.even_coeff(k + 1), factorial_rat(2 * k + 2).recip());
            assert_eq!(h.even_coeffs().len() as u32, k + 2);
        }
    }

    #[test]
    fn coefficients_are_scaled_inverse_moment_weights() {
        // The t^{2u} coefficient equals β_{k+1−u}/2^{k+1−u}/(2u)!, tying the
        // kernel moments to the series-inversion sequence β.
        for k in 0..=6u32 {
            let h = kernel_moment(k);
            for u in 0..=k + 1 {
                let m = k + 1 - u;
                let expected =
                    beta_coeff(m) / Rat::from_integer(pow2(m)) / factorial_rat(2 * u);
                assert_eq!(h.even_coeff(u), expected, "k={k} u={u}");
            }
        }
    }

    #[test]
    fn exact_evaluation() {
        // 𝔥₁(0) = 1/6, 𝔥₁(2) = 2 + 1/6, 𝔥₃(1) = 1/24 + 1/12 + 7/360 = 13/90.
        assert_eq!(kernel_moment(0).eval(&rat_int(0)), rat(1, 6));
        assert_eq!(kernel_moment(0).eval(&rat_int(2)), rat(13, 6));
        assert_eq!(kernel_moment(1).eval(&rat_int(1)), rat(13, 90));
    }

    #[test]
    fn f64_evaluation_tracks_exact() {
        let h = kernel_moment(3);
        for t in [0.0, 0.5, 1.0, 2.0] {
            let exact = h.eval(&Rat::new(
                num_bigint::BigInt::from((t * 2.0) as i64),
                num_bigint::BigInt::from(2),
            ));
            assert!((h.eval_f64(t) - rat_to_f64(&exact)).abs() < 1e-12);
        }
    }
}
