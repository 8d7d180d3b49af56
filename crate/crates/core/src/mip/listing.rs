use std::fmt::Write;

use super::model::{CanonicalModel, VarKind};

fn term(out: &mut String, first: bool, coef: f64, name: &str) {
    let sign = match (coef < 0.0, first) {
        (true, true) => "-",
        (true, false) => "- ",
        (false, true) => "",
        (false, false) => "+ ",
    };
    if coef.abs() == 1.0 {
        let _ = write!(out, "{sign}{name}");
    } else {
        let _ = write!(out, "{sign}{} {name}", coef.abs());
    }
}

/// Human-readable listing: objective, one line per constraint, bounds.
pub fn render_listing(model: &CanonicalModel) -> String {
    let mut out = String::from("maximize\n  obj:");
    let mut first = true;
    for v in model.variables.iter().filter(|v| v.objective != 0.0) {
        out.push(' ');
        term(&mut out, first, v.objective, &v.name);
        first = false;
    }
    if first {
        out.push_str(" 0");
    }
    out.push_str("\nsubject to\n");
    for c in &model.constraints {
        let _ = write!(out, "  {}:", c.name);
        for (k, &(j, a)) in c.terms.iter().enumerate() {
            out.push(' ');
            term(&mut out, k == 0, a, &model.variables[j].name);
        }
        let _ = writeln!(out, " {} {}", c.sense.symbol(), c.rhs);
    }
    out.push_str("bounds\n");
    for v in &model.variables {
        let kind = match v.kind {
            VarKind::Binary => "binary",
            VarKind::Integer => "integer",
        };
        let _ = writeln!(out, "  {} <= {} <= {} {kind}", v.lower, v.name, v.upper);
    }
    out.push_str("end\n");
    out
}
