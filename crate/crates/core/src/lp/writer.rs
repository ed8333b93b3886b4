//! CPLEX-style LP text dump for cross-checking against external solvers.
//!
//! Layout, one item per line:
//!
//! ```text
//! \ objective offset: <c0>
//! Minimize
//!  obj: <coef> <var> + ...
//! Subject To
//!  <row>: <expr> <= <rhs>       (ranged rows become <row>_lo / <row>_hi)
//! Bounds
//!  <lo> <= <var> <= <hi>        (or "<var> free")
//! End
//! ```

use std::fmt::Write;

use super::{LinearProgram, VarId};

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn expr(lp: &LinearProgram, terms: &[(VarId, f64)]) -> String {
    if terms.is_empty() {
        return "0 x0_dummy".into();
    }
    let mut s = String::new();
    for (k, &(v, a)) in terms.iter().enumerate() {
        let name = sanitize(&lp.names[v.0]);
        if k == 0 {
            let _ = write!(s, "{} {}", num(a), name);
        } else if a < 0.0 {
            let _ = write!(s, " - {} {}", num(-a), name);
        } else {
            let _ = write!(s, " + {} {}", num(a), name);
        }
    }
    s
}

pub fn write_lp_format(lp: &LinearProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ objective offset: {}", lp.objective_offset);
    let _ = writeln!(out, "Minimize");
    let obj: Vec<(VarId, f64)> = lp
        .objective
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(j, &c)| (VarId(j), c))
        .collect();
    let _ = writeln!(out, " obj: {}", expr(lp, &obj));
    let _ = writeln!(out, "Subject To");
    for row in &lp.rows {
        let name = sanitize(&row.name);
        let e = expr(lp, &row.coeffs);
        if row.lo == row.hi {
            let _ = writeln!(out, " {name}: {e} = {}", num(row.hi));
        } else {
            if row.lo.is_finite() {
                let suffix = if row.hi.is_finite() { "_lo" } else { "" };
                let _ = writeln!(out, " {name}{suffix}: {e} >= {}", num(row.lo));
            }
            if row.hi.is_finite() {
                let suffix = if row.lo.is_finite() { "_hi" } else { "" };
                let _ = writeln!(out, " {name}{suffix}: {e} <= {}", num(row.hi));
            }
        }
    }
    let _ = writeln!(out, "Bounds");
    for j in 0..lp.num_vars() {
        let name = sanitize(&lp.names[j]);
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(out, " {name} free");
        } else {
            let _ = writeln!(out, " {} <= {name} <= {}", num(lo), num(hi));
        }
    }
    let _ = writeln!(out, "End");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Sense;

    #[test]
    fn dump_contains_sections() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x[0]", 0.0, 4.0, 2.0);
        let y = lp.add_var("y", f64::NEG_INFINITY, f64::INFINITY, -1.0);
        lp.add_row("cap", vec![(x, 1.0), (y, -2.0)], Sense::Le, 3.0);
        lp.add_range("band", vec![(y, 1.0)], -1.0, 1.0);
        let text = write_lp_format(&lp);
        assert!(text.contains("Minimize\n obj: 2 x_0_ - 1 y\n"));
        assert!(text.contains(" cap: 1 x_0_ - 2 y <= 3\n"));
        assert!(text.contains(" band_lo: 1 y >= -1\n"));
        assert!(text.contains(" band_hi: 1 y <= 1\n"));
        assert!(text.contains(" y free\n"));
        assert!(text.ends_with("End\n"));
    }
}
