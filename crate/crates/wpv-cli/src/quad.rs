//! Floating-point cross-checks of the kernel moment identities.
//!
//! Everything else in this workspace is exact rational arithmetic; this module
//! is the one place where approximation enters, and it exists only to verify
//! that the closed-form moment polynomials really are the integrals they claim
//! to be.  The integrals
//!
//! ```text
//! S_k(t)     = INT_0^inf  x^(2k+1)/(2k+1)! K(x, t) dx
//! D_{i,j}(t) = INT_0^inf INT_0^inf  x^(2i+1)/(2i+1)! y^(2j+1)/(2j+1)! K(x+y, t) dx dy
//! ```
//!
//! with `K(x, t) = 1/(1+e^{pi (x+t)}) + 1/(1+e^{pi (x-t)})` are evaluated by
//! adaptive composite Gauss-Legendre quadrature and compared against the exact
//! moment polynomial (`S_k` against `h_{2k+1}(t)`, `D_{i,j}` against
//! `h_{2(i+j+1)+1}(t)`, which doubles as a check of the reduction identity
//! `D_{i,j} = S_{i+j+1}`).
//!
//! The integrand decays like `e^{-pi x}` once `x > |t|`, so the domain is cut
//! off at a point `X` where the analytically bounded tail is below a tenth of
//! the requested tolerance, using `K(x, t) <= 2 e^{-pi (x - |t|)}` and the
//! closed form of the incomplete-gamma integral `INT_X^inf x^m e^{-pi x} dx`.

use wpv_core::kernel::kernel_moment;

const PI: f64 = std::f64::consts::PI;

/// Number of Gauss-Legendre nodes per panel.
const NODES: usize = 20;

/// Outcome of one quadrature check.  `numeric` is the quadrature value,
/// `exact` the moment polynomial evaluated at the same `t`, and `panels` the
/// number of panels per axis at which the panel-doubling loop stopped.
#[derive(Clone, Copy, Debug)]
pub struct QuadReport {
    pub numeric: f64,
    pub exact: f64,
    pub abs_err: f64,
    pub panels: u32,
    pub converged: bool,
}

/// Overflow-safe logistic tail `1/(1 + e^z)` for arbitrary `z`.
fn logistic(z: f64) -> f64 {
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// The symmetrized Fermi kernel `K(x, t)`.
pub fn kernel_eval(x: f64, t: f64) -> f64 {
    logistic(PI * (x + t)) + logistic(PI * (x - t))
}

fn factorial_f64(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// found by Newton iteration on the Legendre polynomial from the Chebyshev
/// initial guess.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 2);
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * cur - (kf - 1.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    let dp = n as f64 * (x * cur - prev) / (x * x - 1.0);
    (cur, dp)
}

/// `INT_X^inf x^m e^{-pi x} dx = e^{-pi X} sum_{r=0}^m (m!/r!) X^r / pi^(m-r+1)`.
fn exp_poly_tail(m: u32, x: f64) -> f64 {
    // Factored as e^{-pi X} X^m sum_{r=0}^m (m!/r!) X^{r-m} / pi^{m-r+1};
    // stepping r -> r-1 multiplies the summand by (r+1)/(pi X).
    let mut term = 1.0 / PI;
    let mut total = term;
    for r in (0..m).rev() {
        term *= (r + 1) as f64 / (PI * x);
        total += term;
    }
    total * x.powi(m as i32) * (-PI * x).exp()
}

/// Upper bound for the single-integral tail beyond `X`, using
/// `K(x, t) <= 2 e^{-pi (x - |t|)}`.
fn single_tail_bound(k: u32, t: f64, x: f64) -> f64 {
    let m = 2 * k + 1;
    2.0 * (PI * t.abs()).exp() / factorial_f64(m) * exp_poly_tail(m, x)
}

/// Upper bound for the double-integral tail outside `[0, X]^2`.  The exterior
/// is covered by the two half-strips `x > X` and `y > X`, each bounded with
/// `K(x + y, t) <= 2 e^{-pi (x + y - |t|)}` and the moment
/// `INT_0^inf y^m e^{-pi y} dy / m! = pi^(-m-1)`.
fn double_tail_bound(i: u32, j: u32, t: f64, x: f64) -> f64 {
    let scale = 2.0 * (PI * t.abs()).exp();
    let strip = |a: u32, b: u32| {
        exp_poly_tail(2 * a + 1, x) / factorial_f64(2 * a + 1) * PI.powi(-(2 * b as i32) - 2)
    };
    scale * (strip(i, j) + strip(j, i))
}

/// Domain cutoff: start from `|t| + ln(10/tol)/pi + 5` and extend until the
/// analytic tail bound actually drops below `tol / 10` (the fixed headroom
/// alone does not absorb the polynomial factor `x^{2k+1}` for larger `k`).
fn domain_cutoff(tol: f64, t: f64, tail: impl Fn(f64) -> f64) -> f64 {
    let mut x = t.abs() + (10.0 / tol).ln() / PI + 5.0;
    while tail(x) >= tol / 10.0 {
        x += 2.0;
    }
    x
}

/// Composite Gauss-Legendre value of `f` over `[0, x_max]` with `panels`
/// equal panels.
fn composite_1d(f: &dyn Fn(f64) -> f64, x_max: f64, panels: u32, rule: &[(f64, f64)]) -> f64 {
    let h = x_max / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for &(node, weight) in rule {
            sum += weight * f(mid + 0.5 * h * node);
        }
    }
    sum * 0.5 * h
}

/// Doubles the panel count until two successive composite values agree to
/// `tol / 10`, then reports against `exact`.
fn adaptive_1d(f: &dyn Fn(f64) -> f64, x_max: f64, tol: f64, exact: f64) -> QuadReport {
    let rule = gauss_legendre(NODES);
    let mut panels = 4;
    let mut value = composite_1d(f, x_max, panels, &rule);
    let mut converged = false;
    while panels < 4096 {
        let next = composite_1d(f, x_max, 2 * panels, &rule);
        let stable = (next - value).abs() < tol / 10.0;
        panels *= 2;
        value = next;
        if stable {
            converged = true;
            break;
        }
    }
    QuadReport {
        numeric: value,
        exact,
        abs_err: (value - exact).abs(),
        panels,
        converged,
    }
}

/// Checks `S_k(t)` against the exact moment `h_{2k+1}(t)`.
pub fn quad_check_single(k: u32, t: f64, tol: f64) -> QuadReport {
    assert!(tol > 0.0, "tolerance must be positive");
    let x_max = domain_cutoff(tol, t, |x| single_tail_bound(k, t, x));
    let norm = factorial_f64(2 * k + 1);
    let f = move |x: f64| x.powi(2 * k as i32 + 1) / norm * kernel_eval(x, t);
    adaptive_1d(&f, x_max, tol, kernel_moment_value(k, t))
}

/// Exact moment polynomial `h_{2k+1}` evaluated at `t` in floating point.
fn kernel_moment_value(k: u32, t: f64) -> f64 {
    kernel_moment(k).eval_f64(t)
}

/// Tensor-product composite Gauss-Legendre value over `[0, x_max]^2`.
fn composite_2d(f: &dyn Fn(f64, f64) -> f64, x_max: f64, panels: u32, rule: &[(f64, f64)]) -> f64 {
    let h = x_max / panels as f64;
    // Precompute the 1-d abscissas and weights for the full panel layout so
    // the double loop below is a plain product grid.
    let mut points = Vec::with_capacity(panels as usize * rule.len());
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for &(node, weight) in rule {
            points.push((mid + 0.5 * h * node, weight * 0.5 * h));
        }
    }
    let mut sum = 0.0;
    for &(x, wx) in &points {
        let mut row = 0.0;
        for &(y, wy) in &points {
            row += wy * f(x, y);
        }
        sum += wx * row;
    }
    sum
}

/// Checks `D_{i,j}(t)` against the exact moment `h_{2(i+j+1)+1}(t)`; the
/// integral is done as a genuine two-dimensional tensor product so agreement
/// with the single-integral moment is an independent test of the reduction
/// identity rather than a restatement of it.
pub fn quad_check_double(i: u32, j: u32, t: f64, tol: f64) -> QuadReport {
    assert!(tol > 0.0, "tolerance must be positive");
    let x_max = domain_cutoff(tol, t, |x| double_tail_bound(i, j, t, x));
    let (ni, nj) = (factorial_f64(2 * i + 1), factorial_f64(2 * j + 1));
    let f = move |x: f64, y: f64| {
        x.powi(2 * i as i32 + 1) / ni * y.powi(2 * j as i32 + 1) / nj * kernel_eval(x + y, t)
    };
    let exact = kernel_moment_value(i + j + 1, t);
    let rule = gauss_legendre(NODES);
    let mut panels = 2;
    let mut value = composite_2d(&f, x_max, panels, &rule);
    let mut converged = false;
    while panels < 64 {
        let next = composite_2d(&f, x_max, 2 * panels, &rule);
        let stable = (next - value).abs() < tol / 10.0;
        panels *= 2;
        value = next;
        if stable {
            converged = true;
            break;
        }
    }
    QuadReport {
        numeric: value,
        exact,
        abs_err: (value - exact).abs(),
        panels,
        converged,
    }
}
