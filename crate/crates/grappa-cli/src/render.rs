//! Text and JSON renderings shared by the commands.

use grappa::harmonic::Measure;
use grappa::kummer::{Mismatch, OracleReport};
use grappa::lie::LieAlgebra;
use grappa::rational::{fmt_q, Q};
use grappa::ReductionGraph;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::commands::CliError;

pub fn rationals(xs: &[Q]) -> Value {
    Value::Array(xs.iter().map(|x| Value::String(fmt_q(x))).collect())
}

pub fn rationals_text(xs: &[Q]) -> String {
    format!("[{}]", xs.iter().map(fmt_q).collect::<Vec<_>>().join(", "))
}

/// Bracket trees `["[,]", a, b]` as `[a, b]`.
pub fn bracket_text(tree: &Value) -> String {
    match tree {
        Value::String(s) => s.clone(),
        Value::Array(parts) if parts.len() == 3 => format!("[{}, {}]", bracket_text(&parts[1]), bracket_text(&parts[2])),
        other => other.to_string(),
    }
}

/// Basis of `gr^W_{−n} V` as sums of bracketed Lyndon words of the `(−n, −2)` piece.
pub fn v_basis(lie: &LieAlgebra, n: usize) -> Vec<Vec<(Q, Value)>> {
    let piece = lie.piece(-(n as i32), -2);
    let basis = lie.v_space(n).basis();
    (0..basis.cols())
        .map(|j| {
            piece
                .basis_words()
                .iter()
                .enumerate()
                .filter(|(i, _)| !basis.get(*i, j).is_zero())
                .map(|(i, w)| (basis.get(i, j).clone(), lie.bracket_tree(w)))
                .collect()
        })
        .collect()
}

pub fn v_basis_value(basis: &[Vec<(Q, Value)>]) -> Value {
    Value::Array(
        basis
            .iter()
            .map(|terms| Value::Array(terms.iter().map(|(c, t)| json!({"coeff": fmt_q(c), "bracket": t})).collect()))
            .collect(),
    )
}

pub fn v_basis_text(basis: &[Vec<(Q, Value)>]) -> String {
    let mut out = String::new();
    for (k, terms) in basis.iter().enumerate() {
        let sum: Vec<String> = terms.iter().map(|(c, t)| format!("{}*{}", fmt_q(c), bracket_text(t))).collect();
        out += &format!("  b{k} = {}\n", sum.join(" + "));
    }
    out
}

/// Nonzero parts of a measure, one per line.
pub fn measure_text(g: &ReductionGraph, m: &Measure, indent: &str) -> String {
    let mut out = String::new();
    for (e, p) in m.edge.iter().enumerate() {
        if !p.is_zero() {
            out += &format!("{indent}edge {}: density {p}\n", g.edges()[e].id);
        }
    }
    for (v, x) in m.vertex.iter().enumerate() {
        if !x.is_zero() {
            out += &format!("{indent}vertex {}: mass {}\n", g.vertices()[v].id, fmt_q(x));
        }
    }
    for (h, x) in m.half.iter().enumerate() {
        if !x.is_zero() {
            out += &format!("{indent}half-edge {}: mass {}\n", g.half_edges()[h].id, fmt_q(x));
        }
    }
    if out.is_empty() {
        out = format!("{indent}zero\n");
    }
    out
}

pub fn mismatch_value(m: &Mismatch) -> Value {
    json!({"identity": m.identity, "lhs": m.lhs, "rhs": m.rhs})
}

pub fn oracle_value(name: &str, rep: &OracleReport) -> Value {
    json!({
        "name": name,
        "checked": rep.checked,
        "mismatches": rep.mismatches.len(),
        "first_failure": rep.mismatches.first().map(mismatch_value),
    })
}

pub fn oracle_text(name: &str, rep: &OracleReport) -> String {
    match rep.mismatches.first() {
        None => format!("{name}: ok ({} checks)\n", rep.checked),
        Some(m) => format!(
            "{name}: {} of {} checks failed\n  first failure: {}\n  lhs: {}\n  rhs: {}\n",
            rep.mismatches.len(),
            rep.checked,
            m.identity,
            m.lhs,
            m.rhs
        ),
    }
}

pub fn error_document(e: &CliError) -> String {
    serde_json::to_string_pretty(&json!({"status": "error", "error": e.to_string()})).expect("json")
}
