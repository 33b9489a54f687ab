//! Exact rational scalars and the fixed coefficient sequences used by the
//! recursions: factorials, double factorials, Bernoulli numbers B_{2m}, and
//! the mutually reciprocal sequences α_i and β_i together with the
//! variable-shift coefficients c_j.
//!
//! All arithmetic is exact; nothing in this module (or crate) rounds.

use alloc::string::String;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational number, always in lowest terms with a
/// positive denominator (maintained by the underlying representation).
pub type Rat = num_rational::BigRational;

/// Shorthand for an integer rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Shorthand for the rational `p/q`. Panics if `q == 0`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Serializes a rational as `"p/q"` in lowest terms, or `"p"` when the
/// denominator is 1. This is the exchange format used by every emitter.
pub fn rat_to_string(x: &Rat) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    if x.denom().is_one() {
        let _ = write!(s, "{}", x.numer());
    } else {
        let _ = write!(s, "{}/{}", x.numer(), x.denom());
    }
    s
}

/// n! as a big integer.
pub fn factorial(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=u64::from(n) {
        acc *= k;
    }
    acc
}

/// n! as a rational, for use in coefficient formulas.
pub fn factorial_rat(n: u32) -> Rat {
    Rat::from_integer(factorial(n))
}

/// Double factorial n!! = n·(n−2)·(n−4)⋯ for odd n ≥ −1, with the empty
/// product convention (−1)!! = 1.
///
/// Panics on even input or input below −1; the recursions only ever form
/// odd double factorials.
pub fn double_factorial(n: i64) -> BigInt {
    assert!(n >= -1, "double_factorial: argument {n} below -1");
    assert!(n % 2 != 0, "double_factorial: argument {n} must be odd");
    let mut acc = BigInt::one();
    let mut k = n;
    while k >= 2 {
        acc *= k;
        k -= 2;
    }
    acc
}

/// (2k+1)!! as a rational; accepts k ≥ −1 so that the k = 0 convention
/// (−1)!! = 1 of the index-lowering terms comes out automatically.
pub fn odd_double_factorial_rat(k: i64) -> Rat {
    Rat::from_integer(double_factorial(2 * k + 1))
}

/// Binomial coefficient C(n, k) as a big integer (0 when k > n).
pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

/// The 2m-th Bernoulli number B_{2m}, defined by
///
/// ```text
/// (z/2)·(e^{z/2} + e^{−z/2})/(e^{z/2} − e^{−z/2}) = Σ_{n≥0} B_{2n} z^{2n}/(2n)!
/// ```
///
/// Computed by clearing the denominator: with sinh(z/2)/(z/2) and cosh(z/2)
/// expanded, the defining relation becomes the triangular system
///
/// ```text
/// Σ_{k+n=m} B_{2n}/((2n)!·4^k·(2k+1)!) = 1/(4^m·(2m)!)
/// ```
///
/// which is solved order by order. O(m²) exact operations.
pub fn bernoulli(m: u32) -> Rat {
    bernoulli_upto(m).pop().expect("nonempty by construction")
}

/// B_0, B_2, …, B_{2m} in one pass (see [`bernoulli`]).
pub fn bernoulli_upto(m: u32) -> Vec<Rat> {
    let mut b: Vec<Rat> = Vec::with_capacity(m as usize + 1);
    for j in 0..=m {
        // rhs term 1/(4^j (2j)!), minus the already-known part of the sum.
        let mut acc = Rat::new(BigInt::one(), pow4(j) * factorial(2 * j));
        for (n, bn) in b.iter().enumerate() {
            let n = n as u32;
            let k = j - n;
            let denom = factorial(2 * n) * pow4(k) * factorial(2 * k + 1);
            acc -= bn / Rat::from_integer(denom);
        }
        // acc now equals B_{2j}/(2j)!.
        b.push(acc * factorial_rat(2 * j));
    }
    b
}

fn pow4(k: u32) -> BigInt {
    BigInt::from(4u32).pow(k)
}

/// 2^e as an exact integer.
pub fn pow2(e: u32) -> BigInt {
    BigInt::from(2u32).pow(e)
}

/// α_i = (−2)^i/(2i+1)!, the coefficients of the expansion of
/// sin√(2s)/√(2s) in powers of s.
pub fn alpha_coeff(i: u32) -> Rat {
    let mut numer = BigInt::from(2).pow(i);
    if i % 2 == 1 {
        numer = -numer;
    }
    Rat::new(numer, factorial(2 * i + 1))
}

/// β_i = (−1)^{i−1}·2^i·(2^{2i}−2)·B_{2i}/(2i)!, the coefficients of the
/// reciprocal expansion √(2s)/sin√(2s); β_0 = 1, β_1 = 1/3, β_2 = 7/90.
///
/// Callers treat β_i = 0 for i < 0 (the κ-ladder of the recursion truncates
/// there); this function itself takes the nonnegative index.
pub fn beta_coeff(i: u32) -> Rat {
    let two_pow = BigInt::from(2).pow(i);
    let mut factor = two_pow * (BigInt::from(2).pow(2 * i) - BigInt::from(2));
    if i % 2 == 0 {
        factor = -factor;
    }
    Rat::new(factor, factorial(2 * i)) * bernoulli(i)
}

/// Shift coefficient c_j = −(2j−1)!!·α_{j−1} for j ≥ 2, the coefficient in
/// the variable shift t_j ↦ t_j + c_j·s^{j−1} that converts pure-ψ
/// intersections into mixed κ₁/ψ ones. Algebraically c_j = (−1)^j/(j−1)!.
///
/// Panics for j < 2: the shift leaves t_0 and t_1 untouched.
pub fn gamma_shift_coeff(j: u32) -> Rat {
    assert!(j >= 2, "gamma_shift_coeff: shift is defined for j >= 2 only, got {j}");
    -Rat::from_integer(double_factorial(2 * i64::from(j) - 1)) * alpha_coeff(j - 1)
}

/// Precomputed prefix tables of the coefficient sequences, for callers that
/// index them repeatedly. Immutable once built (write-once semantics: build,
/// then share freely across threads).
#[derive(Debug, Clone)]
pub struct CoeffTable {
    pub alpha: Vec<Rat>,
    pub beta: Vec<Rat>,
    pub bernoulli: Vec<Rat>,
    /// gamma_coeff[j] = c_{j+2}: the shift coefficients, offset by their
    /// smallest index.
    pub gamma_coeff: Vec<Rat>,
}

impl CoeffTable {
    /// Tables of α_i, β_i, B_{2i} for i ≤ order and c_j for 2 ≤ j ≤ order+2.
    pub fn up_to(order: u32) -> Self {
        CoeffTable {
            alpha: (0..=order).map(alpha_coeff).collect(),
            beta: (0..=order).map(beta_coeff).collect(),
            bernoulli: bernoulli_upto(order),
            gamma_coeff: (2..=order + 2).map(gamma_shift_coeff).collect(),
        }
    }

    /// β_i with the i < 0 ⇒ 0 convention used by the bracket recursion.
    pub fn beta_or_zero(&self, i: i64) -> Rat {
        if i < 0 {
            Rat::zero()
        } else {
            self.beta[usize::try_from(i).expect("nonnegative")].clone()
        }
    }
}

/// True when the rational is strictly positive.
pub fn is_positive(x: &Rat) -> bool {
    x.numer().is_positive()
}
