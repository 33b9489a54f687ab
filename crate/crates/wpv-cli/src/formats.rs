//! Deterministic rendering of exact polynomials and generating series.
//!
//! All exact numbers are printed as reduced fractions `p/q` (or a bare
//! integer).  Volume polynomials are printed over a common denominator, e.g.
//! `(q1 + 4*P)/48`, with terms ordered by ascending total degree and, within
//! a degree, leading variables first (`q1` before `q2` before `P`).  Floats
//! appear only in quadrature reports and are fixed at 12 significant digits.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use serde_json::{json, Value};
use wpv_core::numkit::{rat_to_string, Rat};
use wpv_core::polyalg::{EvenPoly, QMono, TMono, TSeries};

/// Fixed 12-significant-digit scientific rendering for quadrature output.
pub fn float_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Terms of `p` in display order.  The canonical monomial order (ascending
/// total degree, then leading variables first, so `q1` precedes `q2` and any
/// `q` precedes a pure `P` power) is already the natural reading order.
fn display_terms(p: &EvenPoly) -> Vec<(QMono, Rat)> {
    p.terms().map(|(m, c)| (m.clone(), c.clone())).collect()
}

/// Least common multiple of all coefficient denominators.
fn common_denominator(terms: &[(QMono, Rat)]) -> BigInt {
    let mut l = BigInt::one();
    for (_, c) in terms {
        l = l.lcm(c.denom());
    }
    l
}

fn qmono_text(m: &QMono) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.q.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("q{}", i + 1)),
            _ => parts.push(format!("q{}^{}", i + 1, e)),
        }
    }
    match m.p {
        0 => {}
        1 => parts.push("P".to_string()),
        _ => parts.push(format!("P^{}", m.p)),
    }
    parts.join("*")
}

fn qmono_latex(m: &QMono) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.q.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("q_{{{}}}", i + 1)),
            _ => parts.push(format!("q_{{{}}}^{{{}}}", i + 1, e)),
        }
    }
    if m.p > 0 {
        parts.push(format!("\\pi^{{{}}}", 2 * m.p));
    }
    parts.join(" ")
}

/// Joins signed terms: the leading term keeps its own sign, later terms are
/// separated by ` + ` / ` - `.
fn join_signed(terms: Vec<(bool, String)>) -> String {
    let mut out = String::new();
    for (i, (negative, body)) in terms.into_iter().enumerate() {
        if i == 0 {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    out
}

/// Common-denominator plain-text form, e.g. `(q1 + 4*P)/48`.
pub fn poly_text(p: &EvenPoly) -> String {
    let terms = display_terms(p);
    if terms.is_empty() {
        return "0".to_string();
    }
    let denom = common_denominator(&terms);
    let rendered: Vec<(bool, String)> = terms
        .iter()
        .map(|(m, c)| {
            let scaled = (c.numer() * &denom) / c.denom();
            let mono = qmono_text(m);
            let mag = scaled.abs();
            let body = if mono.is_empty() {
                mag.to_string()
            } else if mag.is_one() {
                mono
            } else {
                format!("{mag}*{mono}")
            };
            (scaled.is_negative(), body)
        })
        .collect();
    let multi = rendered.len() > 1;
    let joined = join_signed(rendered);
    if denom.is_one() {
        joined
    } else if multi {
        format!("({joined})/{denom}")
    } else {
        format!("{joined}/{denom}")
    }
}

/// Common-denominator LaTeX form, e.g. `\frac{q_{1} + 4 \pi^{2}}{48}`.
pub fn poly_latex(p: &EvenPoly) -> String {
    let terms = display_terms(p);
    if terms.is_empty() {
        return "0".to_string();
    }
    let denom = common_denominator(&terms);
    let rendered: Vec<(bool, String)> = terms
        .iter()
        .map(|(m, c)| {
            let scaled = (c.numer() * &denom) / c.denom();
            let mono = qmono_latex(m);
            let mag = scaled.abs();
            let body = if mono.is_empty() {
                mag.to_string()
            } else if mag.is_one() {
                mono
            } else {
                format!("{mag} {mono}")
            };
            (scaled.is_negative(), body)
        })
        .collect();
    let joined = join_signed(rendered);
    if denom.is_one() {
        joined
    } else {
        format!("\\frac{{{joined}}}{{{denom}}}")
    }
}

/// JSON value for one polynomial: a list of term objects with exact
/// fraction-string coefficients, in display order.
pub fn poly_json(p: &EvenPoly) -> Value {
    let terms: Vec<Value> = display_terms(p)
        .iter()
        .map(|(m, c)| {
            json!({
                "q": m.q,
                "p": m.p,
                "coeff": rat_to_string(c),
            })
        })
        .collect();
    json!({ "vars": p.nq(), "terms": terms })
}

/// JSON value for a generating series in the `s`/`t_i` variables.
pub fn series_json(s: &TSeries) -> Value {
    let terms: Vec<Value> = s
        .terms()
        .map(|(m, c)| {
            let t: Vec<Value> = m.t.iter().map(|&(i, e)| json!([i, e])).collect();
            json!({ "s": m.s, "t": t, "coeff": rat_to_string(c) })
        })
        .collect();
    json!({ "terms": terms })
}

/// LaTeX form of a generating series, one term per coefficient.
pub fn series_latex(s: &TSeries) -> String {
    let mut rendered = Vec::new();
    for (m, c) in s.terms() {
        let mut parts = Vec::new();
        let mag = c.abs();
        if !mag.is_one() || (m.s == 0 && m.t.is_empty()) {
            parts.push(if mag.denom().is_one() {
                format!("{}", mag.numer())
            } else {
                format!("\\frac{{{}}}{{{}}}", mag.numer(), mag.denom())
            });
        }
        match m.s {
            0 => {}
            1 => parts.push("s".to_string()),
            e => parts.push(format!("s^{{{e}}}")),
        }
        for &(i, e) in &m.t {
            parts.push(if e == 1 {
                format!("t_{{{i}}}")
            } else {
                format!("t_{{{i}}}^{{{e}}}")
            });
        }
        rendered.push((c.is_negative(), parts.join(" ")));
    }
    if rendered.is_empty() {
        "0".to_string()
    } else {
        join_signed(rendered)
    }
}

/// CSV rows `monomial,coefficient` with exact fractions, in display order.
pub fn poly_csv(p: &EvenPoly) -> String {
    let mut out = String::from("monomial,coefficient\n");
    for (m, c) in display_terms(p) {
        let mono = qmono_text(&m);
        let mono = if mono.is_empty() { "1".to_string() } else { mono };
        out.push_str(&format!("{mono},{}\n", rat_to_string(&c)));
    }
    out
}

/// CSV rows `monomial,coefficient` for a generating series.
pub fn series_csv(s: &TSeries) -> String {
    let mut out = String::from("monomial,coefficient\n");
    for (m, c) in s.terms() {
        out.push_str(&format!("{},{}\n", tmono_text(m), rat_to_string(c)));
    }
    out
}

/// Plain-text form of one series monomial, `1` for the unit.
pub fn tmono_text(m: &TMono) -> String {
    if m.s == 0 && m.t.is_empty() {
        return "1".to_string();
    }
    let mut parts = Vec::new();
    match m.s {
        0 => {}
        1 => parts.push("s".to_string()),
        e => parts.push(format!("s^{e}")),
    }
    for &(i, e) in &m.t {
        parts.push(if e == 1 {
            format!("t{i}")
        } else {
            format!("t{i}^{e}")
        });
    }
    parts.join("*")
}

/// Plain-text form of a generating series, e.g. `1/6*t0^3 + 1/24*t1`.
pub fn series_text(s: &TSeries) -> String {
    let mut rendered = Vec::new();
    for (m, c) in s.terms() {
        let mut parts = Vec::new();
        let mag = c.abs();
        if !mag.is_one() || (m.s == 0 && m.t.is_empty()) {
            parts.push(rat_to_string(&mag));
        }
        match m.s {
            0 => {}
            1 => parts.push("s".to_string()),
            e => parts.push(format!("s^{e}")),
        }
        for &(i, e) in &m.t {
            parts.push(if e == 1 {
                format!("t{i}")
            } else {
                format!("t{i}^{e}")
            });
        }
        rendered.push((c.is_negative(), parts.join("*")));
    }
    if rendered.is_empty() {
        "0".to_string()
    } else {
        join_signed(rendered)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use wpv_core::volrec::{v_poly, vol_poly, VolMemo};

    #[test]
    fn pinned_polynomial_text_forms() {
        let mut memo = VolMemo::default();
        assert_eq!(poly_text(&vol_poly(1, 1, &mut memo)), "(q1 + 4*P)/48");
        assert_eq!(poly_text(&v_poly(0, 4, &mut memo)), "1 + q1 + q2 + q3 + q4");
        assert_eq!(poly_text(&EvenPoly::zero(2)), "0");
        let cusp = vol_poly(1, 1, &mut memo).eval_q_zero();
        assert_eq!(poly_text(&cusp), "P/12");
    }

    #[test]
    fn latex_uses_fraction_and_pi_powers() {
        let mut memo = VolMemo::default();
        assert_eq!(
            poly_latex(&vol_poly(1, 1, &mut memo)),
            "\\frac{q_{1} + 4 \\pi^{2}}{48}"
        );
    }

    #[test]
    fn float_formatting_is_fixed_width() {
        assert_eq!(float_sig12(std::f64::consts::PI), "3.14159265359e0");
        assert_eq!(float_sig12(0.0), "0.00000000000e0");
    }
}
