//! Verification drivers behind `wpv verify ...`.
//!
//! Each driver returns a [`Report`]: the ordered output lines plus an overall
//! pass flag.  Sweeps over independent cells (quadrature grid points,
//! constraint indices) fan out across the rayon pool; results are collected
//! back in input order so the printed output is byte-deterministic regardless
//! of thread count.

use num_traits::Zero;
use rayon::prelude::*;
use wpv_core::intersect::{bracket, kappa_from_psi, BracketKey, BracketMemo};
use wpv_core::kdv::{assemble_g_direct, kdv1_residual, kdv1_safe_monomials, TauPair};
use wpv_core::numkit::{factorial_rat, Rat};
use wpv_core::polyalg::{QMono, TMono, Window};
use wpv_core::virasoro::{
    boson_rhs, build_l, build_v, build_vhat, commutator, deformed_relation_rhs,
    residual_check_monomials, residual_coeff_at, solve_series_from_constraints,
    ConstraintFamily,
};
use wpv_core::volrec::{volume_table, VolMemo};

use crate::formats::{float_sig12, tmono_text};
use crate::quad::{quad_check_double, quad_check_single};

/// Absolute-error pass threshold for the quadrature suite.
const QUAD_ACCURACY: f64 = 1e-8;

/// Ordered output of one verification run.
pub struct Report {
    pub ok: bool,
    pub lines: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Report { ok: true, lines: Vec::new() }
    }

    fn push(&mut self, ok: bool, line: String) {
        self.ok &= ok;
        self.lines.push(line);
    }
}

fn status(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

/// Quadrature sweep: single moments for `k <= k_max`, double moments for
/// `i + j <= 3`, each at `t` in {0, 1/2, 1, 2}, as CSV rows.  A double check
/// also emits a reduction row comparing the two-dimensional value against the
/// single integral it must collapse to.
pub fn verify_kernel(k_max: u32, tol: f64) -> Report {
    #[derive(Clone, Copy)]
    enum Cell {
        Single(u32, f64),
        Double(u32, u32, f64),
    }
    let grid_t = [0.0, 0.5, 1.0, 2.0];
    let mut cells = Vec::new();
    for k in 0..=k_max {
        for &t in &grid_t {
            cells.push(Cell::Single(k, t));
        }
    }
    for i in 0..=3 {
        for j in 0..=(3 - i) {
            for &t in &grid_t {
                cells.push(Cell::Double(i, j, t));
            }
        }
    }
    let rows: Vec<(bool, Vec<String>)> = cells
        .par_iter()
        .map(|&cell| match cell {
            Cell::Single(k, t) => {
                let r = quad_check_single(k, t, tol);
                let ok = r.converged && r.abs_err < QUAD_ACCURACY;
                let line = format!(
                    "single k={k},{t},{},{},{},{},{}",
                    float_sig12(r.numeric),
                    float_sig12(r.exact),
                    float_sig12(r.abs_err),
                    r.panels,
                    status(ok)
                );
                (ok, vec![line])
            }
            Cell::Double(i, j, t) => {
                let d = quad_check_double(i, j, t, tol);
                let s = quad_check_single(i + j + 1, t, tol);
                let ok = d.converged && d.abs_err < QUAD_ACCURACY;
                let line = format!(
                    "double i={i} j={j},{t},{},{},{},{},{}",
                    float_sig12(d.numeric),
                    float_sig12(d.exact),
                    float_sig12(d.abs_err),
                    d.panels,
                    status(ok)
                );
                let diff = (d.numeric - s.numeric).abs();
                let reduce_ok = s.converged && diff < 2.0 * tol;
                let reduce = format!(
                    "reduce i={i} j={j},{t},{},{},{},{},{}",
                    float_sig12(d.numeric),
                    float_sig12(s.numeric),
                    float_sig12(diff),
                    s.panels,
                    status(reduce_ok)
                );
                (ok && reduce_ok, vec![line, reduce])
            }
        })
        .collect();
    let mut report = Report::new();
    report.lines.push("check,t,numeric,exact,abs_err,panels,status".to_string());
    for (ok, lines) in rows {
        report.ok &= ok;
        report.lines.extend(lines);
    }
    report
}

fn window_label(w: Window) -> String {
    match w {
        Window::Bounded { g_max, n_max } => format!("g<={g_max} n<={n_max}"),
        Window::Unbounded => "unbounded".to_string(),
    }
}

/// Operator-identity sweep: deformed-to-undeformed slice, boson
/// representation, both commutation-relation families, residual vanishing on
/// the safe sub-window for both constraint families, and the seed-free solver
/// against direct assembly.  One `identity | window | status` row each.
pub fn verify_virasoro(g_max: u32, n_max: u32, k_max: i64) -> Report {
    let window = Window::bounded(g_max, n_max);
    let d_cap = window.max_t_index() + 1;
    let label = window_label(window);
    let mut report = Report::new();
    report.lines.push("identity | window | status".to_string());

    let slice_ok = (-1..=k_max)
        .into_par_iter()
        .all(|k| build_vhat(k, d_cap).s_free_part() == build_l(k, d_cap));
    report.push(
        slice_ok,
        format!("s-free slice of Vhat_k equals L_k (k<={k_max}) | derivative indices <={d_cap} | {}", status(slice_ok)),
    );

    let boson_ok = (-1..=k_max)
        .into_par_iter()
        .all(|k| build_vhat(k, d_cap) == boson_rhs(k, d_cap));
    report.push(
        boson_ok,
        format!("boson form of Vhat_k (k<={k_max}) | derivative indices <={d_cap} | {}", status(boson_ok)),
    );

    let pairs: Vec<(i64, i64)> = (-1..=3)
        .flat_map(|n| (n..=3).map(move |m| (n, m)))
        .collect();
    let undeformed_ok = pairs.par_iter().all(|&(n, m)| {
        let lhs = commutator(&build_v(n, d_cap + 1), &build_v(m, d_cap + 1)).restricted(d_cap);
        if n == m {
            lhs.is_zero()
        } else {
            lhs == build_v(n + m, d_cap).scale(&Rat::from_integer((n - m).into()))
        }
    });
    report.push(
        undeformed_ok,
        format!("[V_n,V_m] = (n-m) V_(n+m) (-1<=n,m<=3) | derivative indices <={d_cap} | {}", status(undeformed_ok)),
    );

    let deformed_ok = pairs.par_iter().all(|&(n, m)| {
        let lhs =
            commutator(&build_vhat(n, d_cap + 1), &build_vhat(m, d_cap + 1)).restricted(d_cap);
        lhs == deformed_relation_rhs(n, m, d_cap)
    });
    report.push(
        deformed_ok,
        format!("[Vhat_n,Vhat_m] = (n-m) sum beta_i s^i Vhat_(n+m+i) (-1<=n,m<=3) | derivative indices <={d_cap} | {}", status(deformed_ok)),
    );

    let mut memo = BracketMemo::new();
    let pair = TauPair::assemble(window, &mut memo);
    for (family, series, name) in [
        (ConstraintFamily::Undeformed, &pair.f, "L_k exp(F)"),
        (ConstraintFamily::Deformed, &pair.g, "Vhat_k exp(G)"),
    ] {
        let results: Vec<(i64, usize, Option<TMono>)> = (-1..=k_max)
            .into_par_iter()
            .map(|k| {
                let op = match family {
                    ConstraintFamily::Undeformed => build_l(k, d_cap),
                    ConstraintFamily::Deformed => build_vhat(k, d_cap),
                };
                let checked = residual_check_monomials(&op, window);
                let bad = checked
                    .iter()
                    .find(|m| !residual_coeff_at(&op, series, m).is_zero())
                    .cloned();
                (k, checked.len(), bad)
            })
            .collect();
        let total: usize = results.iter().map(|(_, c, _)| c).sum();
        let bad = results.iter().find_map(|(k, _, m)| m.clone().map(|m| (*k, m)));
        let ok = bad.is_none() && total > 0;
        let detail = match &bad {
            Some((k, m)) => format!("nonzero at k={k}, {m:?}"),
            None => format!("{total} safe coefficients across k<={k_max}"),
        };
        report.push(
            ok,
            format!("residuals of {name} vanish | {label} | {} ({detail})", status(ok)),
        );
    }

    for (family, series, name) in [
        (ConstraintFamily::Undeformed, &pair.f, "undeformed"),
        (ConstraintFamily::Deformed, &pair.g, "deformed"),
    ] {
        let solved = solve_series_from_constraints(family, g_max, n_max);
        let ok = solved.valid_part(window) == series.valid_part(window);
        report.push(
            ok,
            format!("seed-free {name} solver matches assembly | {label} | {}", status(ok)),
        );
    }
    report
}

/// KdV sweep: the first-flow residual of F vanishes on every safe monomial,
/// and the deformed series G equals F composed with the exact coupling shift.
/// The checked monomials are listed so the certificate's reach is explicit.
pub fn verify_kdv(g_max: u32, n_max: u32) -> Report {
    let window = Window::bounded(g_max, n_max);
    let label = window_label(window);
    let mut report = Report::new();
    let mut memo = BracketMemo::new();
    let pair = TauPair::assemble(window, &mut memo);

    let direct = assemble_g_direct(window, &mut memo).valid_part(window);
    let shift_ok = pair.g == direct;
    report.push(
        shift_ok,
        format!("G equals F after coupling shift | {label} | {}", status(shift_ok)),
    );

    let residual = kdv1_residual(&pair.f);
    let safe = kdv1_safe_monomials(window);
    let bad: Vec<&TMono> = safe
        .iter()
        .filter(|m| !residual.coefficient(m).is_zero())
        .collect();
    let ok = bad.is_empty() && !safe.is_empty();
    report.push(
        ok,
        format!(
            "first KdV flow residual vanishes on safe sub-window | {label} | {} ({} monomials)",
            status(ok),
            safe.len()
        ),
    );
    let listed: Vec<String> = safe.iter().map(tmono_text).collect();
    report.lines.push(format!("checked: {}", listed.join(", ")));
    report
}

/// All q-exponent multisets of total degree at most `d` in `n` slots, each as
/// a full descending exponent vector.
fn exponent_multisets(d: u32, n: u32) -> Vec<Vec<u32>> {
    fn extend(out: &mut Vec<Vec<u32>>, prefix: &mut Vec<u32>, budget: u32, cap: u32, slots: u32) {
        if slots == 0 {
            out.push(prefix.clone());
            return;
        }
        for e in (0..=budget.min(cap)).rev() {
            prefix.push(e);
            extend(out, prefix, budget - e, e, slots - 1);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut out, &mut Vec::new(), d, d, n);
    out
}

/// Cross-pipeline sweep: for every stable `(g, n)` with `3g-3+n <= d_max`,
/// every coefficient of the volume recursion's normalized polynomial must
/// equal the matching mixed bracket divided by its factorials, and that
/// bracket must equal its reduction to pure psi-intersections.  Enumerating
/// all exponent multisets (not just stored terms) also catches a pipeline
/// that drops a nonzero coefficient entirely.
pub fn verify_cross(d_max: u32, memo: &mut BracketMemo) -> Report {
    let mut report = Report::new();
    let mut vmemo = VolMemo::new();
    for (g, n, v, _) in volume_table(d_max, &mut vmemo) {
        let d = 3 * g + n - 3;
        let mut coefficients = 0usize;
        let mut ok = true;
        let mut detail = String::new();
        for e in exponent_multisets(d, n) {
            let psi_sum: u32 = e.iter().sum();
            let kappa = d - psi_sum;
            let key = BracketKey::new(g, kappa, e.clone());
            let b = bracket(&key, memo);
            let mut expected = b.clone() / factorial_rat(kappa);
            for &exp in &e {
                expected = expected / factorial_rat(exp);
            }
            let coeff = v.coefficient(&QMono { q: e.clone(), p: 0 });
            let reduced = kappa_from_psi(kappa, &e, g, memo);
            if coeff != expected || reduced != b {
                ok = false;
                detail = format!(" (mismatch at exponents {e:?})");
                break;
            }
            coefficients += 1;
        }
        report.push(
            ok,
            format!(
                "({g},{n}) dim {d}: volume, bracket and kappa-reduction agree on {coefficients} coefficients | {}{detail}",
                status(ok)
            ),
        );
    }
    report
}
