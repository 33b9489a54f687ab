//! Exact computation of Weil–Petersson volume polynomials of moduli spaces of
//! bordered hyperbolic surfaces, and of the mixed κ₁/ψ intersection numbers
//! that appear as their coefficients.
//!
//! Everything in this crate is exact: the scalar field is the arbitrary
//! precision rationals ([`numkit::Rat`]) and no floating point occurs
//! anywhere. The same quantities are computed along three independent
//! pipelines so that they can be cross-checked coefficient by coefficient:
//!
//! 1. **Volume recursion** ([`volrec`]) — the integral recursion for the
//!    normalized volume polynomials v_{g,n}(L), evaluated exactly through the
//!    moment polynomials of the recursion kernel ([`kernel`]).
//! 2. **Bracket recursion** ([`intersect`]) — a memoized recursion for the
//!    mixed brackets ⟨κ₁^{k₀} τ_{d₁}⋯τ_{dₙ}⟩_g, together with a genus-0
//!    string-equation oracle that is independent of it.
//! 3. **Time shift** ([`intersect::kappa_from_psi`], [`kdv`]) — κ₁ powers
//!    re-expressed through pure ψ intersections by a shift of the generating
//!    variables, plus the first KdV flow as a certificate on the truncated
//!    generating function.
//!
//! The constraint-operator algebra ([`virasoro`]) provides a fourth, internal
//! consistency layer: the families of at-most-second-order operators that
//! annihilate the exponential of the generating function, their commutation
//! relations, and a solver that re-derives every coefficient from the
//! constraints alone, with no seeded values.
//!
//! # Module map
//!
//! | module | contents |
//! |--------|----------|
//! | [`numkit`] | rationals, factorials, Bernoulli numbers, the α/β/shift coefficient sequences |
//! | [`polyalg`] | sparse even polynomials in squared boundary lengths; graded truncated series in t₀,t₁,…,s |
//! | [`kernel`] | exact closed forms 𝔥_{2k+1}(t) of the kernel moment integrals |
//! | [`volrec`] | pipeline 1: the volume recursion and the π²-graded volume polynomials |
//! | [`intersect`] | pipeline 2: mixed brackets; pipeline 3: the κ-from-ψ shift evaluator |
//! | [`virasoro`] | differential operator algebra, constraint residuals, the no-seed solver |
//! | [`kdv`] | generating-function assembly, the variable shift, the first KdV flow residual |
//!
//! The crate is `no_std` (it allocates, but performs no IO and spawns no
//! threads); all values are immutable after construction and all functions
//! are re-entrant. Memoization state is held in explicit table values owned
//! by the caller, so embedding code chooses its own sharing and locking
//! discipline.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod intersect;
pub mod kdv;
pub mod kernel;
pub mod numkit;
pub mod polyalg;
pub mod virasoro;
pub mod volrec;
