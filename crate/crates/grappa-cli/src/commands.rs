//! Command dispatch. Every command produces a [`Report`] holding both the
//! text rendering and the structured result.

use std::path::{Path, PathBuf};

use grappa::bundled::bundled;
use grappa::chabauty::{canonical_measure, mu_f, mu_z_punctured, EndomorphismData};
use grappa::cheng_katz::path_oracle;
use grappa::kummer::{ode_oracle, structure_oracle, Kummer, OracleReport};
use grappa::ops::{eliminate_half_edge, injectivity_census, resistance_reduce};
use grappa::rational::fmt_q;
use grappa::{GraphPoint, GrappaError, ReductionGraph, Stability};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::render::*;
use crate::{Command, Format, Oracle, RunConfig};

const DEFAULT_DEPTH: usize = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Grappa(#[from] GrappaError),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Invalid,
    Mismatch,
}

impl Status {
    fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Invalid => "invalid",
            Status::Mismatch => "mismatch",
        }
    }
}

#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    pub graph_hash: String,
    pub status: Status,
    pub text: String,
    pub data: Value,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Json => {
                let doc = json!({
                    "command": self.command,
                    "graph_hash": self.graph_hash,
                    "status": self.status.name(),
                    "result": self.data,
                });
                serde_json::to_string_pretty(&doc).expect("json") + "\n"
            }
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Reads a graph file, or a shipped example given as `bundled:NAME`.
pub fn load_graph(path: &Path) -> Result<ReductionGraph> {
    if let Some(name) = path.to_str().and_then(|s| s.strip_prefix("bundled:")) {
        return bundled(name).ok_or_else(|| CliError::Usage(format!("no bundled graph named {name:?}")));
    }
    Ok(ReductionGraph::parse(&read(path)?)?)
}

/// SHA-256 of the canonical serialization, so formatting does not matter.
pub fn graph_hash(g: &ReductionGraph) -> String {
    hex::encode(Sha256::digest(g.to_json().as_bytes()))
}

fn depth(config: &RunConfig) -> Result<usize> {
    let d = match config.depth {
        Some(d) => d,
        None => match std::env::var("GRAPPA_DEPTH") {
            Ok(s) => s.trim().parse().map_err(|_| CliError::Usage(format!("GRAPPA_DEPTH must be a positive integer, got {s:?}")))?,
            Err(_) => DEFAULT_DEPTH,
        },
    };
    if d == 0 {
        return Err(CliError::Usage("depth must be at least 1".into()));
    }
    Ok(d)
}

fn weight(config: &RunConfig, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let depth = depth(config)?;
    if n > depth {
        return Err(GrappaError::DepthExceeded { n, depth }.into());
    }
    Ok(n)
}

fn point(g: &ReductionGraph, text: Option<&str>) -> Result<GraphPoint> {
    Ok(match text {
        Some(t) => g.parse_point(t)?,
        None => GraphPoint::Vertex(0),
    })
}

fn graph_arg(c: &Command) -> &Path {
    match c {
        Command::Validate { graph }
        | Command::Invariants { graph }
        | Command::Measure { graph, .. }
        | Command::Kummer { graph, .. }
        | Command::Injectivity { graph, .. }
        | Command::CanonicalMeasure { graph }
        | Command::MuF { graph, .. }
        | Command::MuZ { graph }
        | Command::Reduce { graph, .. }
        | Command::Verify { graph, .. } => graph,
    }
}

pub fn run(config: &RunConfig) -> Result<Report> {
    depth(config)?;
    let g = load_graph(graph_arg(&config.command))?;
    let mut report = match &config.command {
        Command::Validate { .. } => validate(&g),
        Command::Invariants { .. } => invariants(&g),
        Command::Measure { n, .. } => measure(&g, weight(config, *n)?),
        Command::Kummer { base, point: p, n, .. } => kummer(&g, base.as_deref(), p, weight(config, *n)?),
        Command::Injectivity { denominator, n, .. } => {
            if *denominator == 0 {
                return Err(CliError::Usage("--denominator must be at least 1".into()));
            }
            injectivity(&g, *denominator, weight(config, *n)?)
        }
        Command::CanonicalMeasure { .. } => Ok(canonical(&g)),
        Command::MuF { endo, .. } => endomorphism(&g, endo),
        Command::MuZ { .. } => punctured(&g),
        Command::Reduce { half_edge, contract, ends, .. } => reduce(&g, half_edge.as_deref(), contract.as_deref(), ends.as_deref()),
        Command::Verify { oracle, n, base, .. } => verify(&g, *oracle, weight(config, *n)?, base.as_deref()),
    }?;
    report.graph_hash = graph_hash(&g);
    Ok(report)
}

fn report(command: &'static str, status: Status, text: String, data: Value) -> Report {
    Report { command, graph_hash: String::new(), status, text, data }
}

fn validate(g: &ReductionGraph) -> Result<Report> {
    let st = g.stability();
    let status = if st == Stability::Neither { Status::Invalid } else { Status::Ok };
    let data = json!({
        "stability": st.to_string(),
        "vertices": g.num_vertices(),
        "edges": g.num_edges(),
        "half_edges": g.half_edges().len(),
    });
    Ok(report("validate", status, format!("{st}\n"), data))
}

fn invariants(g: &ReductionGraph) -> Result<Report> {
    let inv = g.invariants();
    let text = format!(
        "first Betti number: {}\ntotal genus: {}\nEuler characteristic: {}\n",
        inv.first_betti, inv.total_genus, inv.euler_char
    );
    let data = json!({"first_betti": inv.first_betti, "total_genus": inv.total_genus, "euler_char": inv.euler_char});
    Ok(report("invariants", Status::Ok, text, data))
}

fn measure(g: &ReductionGraph, n: usize) -> Result<Report> {
    let k = Kummer::new(g, &GraphPoint::Vertex(0), n)?;
    let mu = k.mu(n)?;
    let basis = v_basis(k.lie(), n);
    let mut text = format!("v_basis (weight {n}):\n{}", v_basis_text(&basis));
    for (i, m) in mu.iter().enumerate() {
        text += &format!("mu_{n}[b{i}]:\n{}", measure_text(g, m, "  "));
    }
    let data = json!({
        "n": n,
        "v_basis": v_basis_value(&basis),
        "measure": mu.iter().map(|m| m.to_value(g)).collect::<Vec<_>>(),
    });
    Ok(report("measure", Status::Ok, text, data))
}

fn kummer(g: &ReductionGraph, base: Option<&str>, p: &str, n: usize) -> Result<Report> {
    let b = point(g, base)?;
    let x = g.parse_point(p)?;
    let k = Kummer::new(g, &b, n)?;
    let mut text = format!("base {}, point {}\n", g.point_name(&b), g.point_name(&x));
    let mut weights = Vec::new();
    for r in 1..=n {
        let basis = v_basis(k.lie(), r);
        let value = k.value(&x, r)?;
        text += &format!("weight {r}:\n{}  j = {}\n", v_basis_text(&basis), rationals_text(&value));
        weights.push(json!({"n": r, "v_basis": v_basis_value(&basis), "value": rationals(&value)}));
    }
    let data = json!({"base": g.point_name(&b), "point": g.point_name(&x), "weights": weights});
    Ok(report("kummer", Status::Ok, text, data))
}

fn injectivity(g: &ReductionGraph, denominator: u32, n: usize) -> Result<Report> {
    let r = injectivity_census(g, denominator, n)?;
    let name = |p: &GraphPoint| g.point_name(p);
    let mut text = format!("{} grid points (denominator {denominator})\n", r.points.len());
    text += &format!("j_1 constant: {}\n", r.j1_constant);
    text += &format!("weight-2 collisions: {}\n", r.collisions.len());
    for c in &r.collisions {
        let w = c.witness.as_ref().map_or("none".to_string(), |i| i.describe(g));
        text += &format!("  {} ~ {} (involution: {w})\n", name(&c.x), name(&c.y));
    }
    text += &format!("involution pairs with distinct j_2: {}\n", r.missed.len());
    for (x, y) in &r.missed {
        text += &format!("  {} ~ {}\n", name(x), name(y));
    }
    text += &format!("weight-{n} collisions: {}\n", r.higher_collisions.len());
    for (x, y) in &r.higher_collisions {
        text += &format!("  {} ~ {}\n", name(x), name(y));
    }
    let pairs = |v: &[(GraphPoint, GraphPoint)]| v.iter().map(|(x, y)| json!([name(x), name(y)])).collect::<Vec<_>>();
    let data = json!({
        "denominator": denominator,
        "n": n,
        "points": r.points.len(),
        "j1_constant": r.j1_constant,
        "collisions": r.collisions.iter().map(|c| json!({
            "x": name(&c.x),
            "y": name(&c.y),
            "witness": c.witness.as_ref().map(|i| i.describe(g)),
        })).collect::<Vec<_>>(),
        "missed": pairs(&r.missed),
        "higher_collisions": pairs(&r.higher_collisions),
    });
    let status = if r.ok() { Status::Ok } else { Status::Mismatch };
    Ok(report("injectivity", status, text, data))
}

fn canonical(g: &ReductionGraph) -> Report {
    let m = canonical_measure(g);
    let mass = m.total_mass(g);
    let text = format!("{}total mass {}\n", measure_text(g, &m, ""), fmt_q(&mass));
    report("canonical-measure", Status::Ok, text, json!({"measure": m.to_value(g), "total_mass": fmt_q(&mass)}))
}

fn h1_basis(g: &ReductionGraph) -> Vec<Vec<(String, String)>> {
    g.homology()
        .basis()
        .iter()
        .map(|c| c.iter().enumerate().filter(|(_, x)| !num_traits::Zero::is_zero(*x)).map(|(e, x)| (g.edges()[e].id.clone(), fmt_q(x))).collect())
        .collect()
}

fn endomorphism(g: &ReductionGraph, endo: &Path) -> Result<Report> {
    let f = EndomorphismData::parse(g, &read(endo)?)?;
    let m = mu_f(g, &f)?;
    let mass = m.total_mass(g);
    let basis = h1_basis(g);
    let mut text = String::from("h1_basis:\n");
    for (i, c) in basis.iter().enumerate() {
        let terms: Vec<String> = c.iter().map(|(e, x)| format!("{x}*{e}")).collect();
        text += &format!("  g{i} = {}\n", terms.join(" + "));
    }
    text += &measure_text(g, &m, "");
    text += &format!("total mass {} (total trace {})\n", fmt_q(&mass), fmt_q(&f.total_trace()));
    let data = json!({
        "h1_basis": basis.iter().map(|c| c.iter().map(|(e, x)| json!({"edge": e, "coeff": x})).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "endomorphism": f.to_value(g),
        "measure": m.to_value(g),
        "total_mass": fmt_q(&mass),
        "total_trace": fmt_q(&f.total_trace()),
        "trace_zero": f.check_trace_zero().is_ok(),
    });
    Ok(report("mu-f", Status::Ok, text, data))
}

fn punctured(g: &ReductionGraph) -> Result<Report> {
    let p = mu_z_punctured(g)?;
    let holds = p.identity_holds();
    let text = format!(
        "{}canonical-measure identity: {}\n",
        measure_text(g, &p.mu_z, ""),
        if holds { "holds" } else { "FAILS" }
    );
    let data = json!({"measure": p.mu_z.to_value(g), "zhang_side": p.zhang_side.to_value(g), "identity_holds": holds});
    Ok(report("mu-z", if holds { Status::Ok } else { Status::Mismatch }, text, data))
}

/// Vertices of the subgraph with an edge leaving it.
fn attachment_vertices(g: &ReductionGraph, c: &[usize]) -> Vec<usize> {
    let inside = |v: usize| c.iter().any(|&e| g.edges()[e].src == v || g.edges()[e].dst == v);
    (0..g.num_vertices())
        .filter(|&v| inside(v))
        .filter(|&v| (0..g.num_edges()).any(|e| !c.contains(&e) && (g.edges()[e].src == v || g.edges()[e].dst == v)))
        .collect()
}

fn reduce(g: &ReductionGraph, half_edge: Option<&str>, contract: Option<&str>, ends: Option<&str>) -> Result<Report> {
    let red = match (half_edge, contract) {
        (Some(h), _) => {
            let h = g.half_edge_index(h).ok_or_else(|| GrappaError::UnknownId(h.to_string()))?;
            eliminate_half_edge(g, h)?
        }
        (None, Some(list)) => {
            let c = list
                .split(',')
                .map(|id| g.edge_index(id.trim()).ok_or_else(|| GrappaError::UnknownId(id.trim().to_string())))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let (w0, w1) = match ends {
                Some(pair) => {
                    let ids: Vec<&str> = pair.split(',').map(str::trim).collect();
                    let [a, b] = ids[..] else {
                        return Err(CliError::Usage("--ends takes two vertex ids".into()));
                    };
                    let v = |id: &str| g.vertex_index(id).ok_or_else(|| GrappaError::UnknownId(id.to_string()));
                    (v(a)?, v(b)?)
                }
                None => match attachment_vertices(g, &c)[..] {
                    [a, b] => (a, b),
                    _ => return Err(CliError::Usage("cannot infer the two attachment vertices; pass --ends".into())),
                },
            };
            resistance_reduce(g, &c, w0, w1)?
        }
        (None, None) => return Err(CliError::Usage("pass --half-edge or --contract".into())),
    };
    let target = red.target();
    let warning = red.semistability_warning();
    let mut text = String::new();
    if warning {
        text += "warning: the reduced graph is not semistable\n";
    }
    text += &target.to_json();
    text += "\n";
    let target_value: Value = serde_json::from_str(&target.to_json()).expect("graph json");
    let data = json!({"target": target_value, "target_hash": graph_hash(target), "semistability_warning": warning});
    Ok(report("reduce", Status::Ok, text, data))
}

fn verify(g: &ReductionGraph, oracle: Oracle, n: usize, base: Option<&str>) -> Result<Report> {
    let mut runs: Vec<(&str, OracleReport)> = Vec::new();
    if matches!(oracle, Oracle::Ode | Oracle::All) {
        let k = Kummer::new(g, &point(g, base)?, n)?;
        let mut rep = ode_oracle(&k, n)?;
        rep.merge(structure_oracle(&k, n)?);
        runs.push(("ode", rep));
    }
    if matches!(oracle, Oracle::ChengKatz | Oracle::All) {
        runs.push(("cheng-katz", path_oracle(g, n)?));
    }
    let ok = runs.iter().all(|(_, r)| r.ok());
    let text: String = runs.iter().map(|(name, r)| oracle_text(name, r)).collect();
    let data = json!({"n": n, "oracles": runs.iter().map(|(name, r)| oracle_value(name, r)).collect::<Vec<_>>()});
    Ok(report("verify", if ok { Status::Ok } else { Status::Mismatch }, text, data))
}
