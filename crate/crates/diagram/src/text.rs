//! Line-based debug format and Graphviz export.
//!
//! ```text
//! diagram chi=2 coeff=1/2
//! v0 ext(0,1,0)
//! v1 noise(0,0)
//! e 0.0 -> 1.0
//! end
//! ```
//!
//! `ext(slot,legs,snaky)`, `drift(out)`, `noise(out1,out2)` and
//! `corr(out1,out2)` are the vertex kinds. Coefficients are always printed as
//! `p/q` so that text → diagram → text is the identity.

use std::fmt::Write as _;

use thiserror::Error;

use crate::diagram::{Diagram, Edge, VertexKind};
use crate::sum::DiagramSum;
use crate::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn perr(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

pub fn diagram_to_text(d: &Diagram) -> String {
    let mut s = String::new();
    writeln!(s, "diagram chi={} coeff={}/{}", d.chi_order, d.coefficient.numer(), d.coefficient.denom()).unwrap();
    for (i, v) in d.vertices.iter().enumerate() {
        let body = match v {
            VertexKind::External { slot, legs, snaky } => format!("ext({slot},{legs},{snaky})"),
            VertexKind::Drift { out } => format!("drift({out})"),
            VertexKind::Noise { out } => format!("noise({},{})", out[0], out[1]),
            VertexKind::Correction { out } => format!("corr({},{})", out[0], out[1]),
        };
        writeln!(s, "v{i} {body}").unwrap();
    }
    for e in &d.edges {
        writeln!(s, "e {}.{} -> {}.{}", e.src, e.src_slot, e.dst, e.dst_slot).unwrap();
    }
    s.push_str("end\n");
    s
}

fn parse_rational(text: &str, line: usize) -> Result<Rational, ParseError> {
    let (p, q) = text.split_once('/').ok_or_else(|| perr(line, "coefficient must be p/q"))?;
    let p: num_bigint::BigInt = p.parse().map_err(|_| perr(line, "bad numerator"))?;
    let q: num_bigint::BigInt = q.parse().map_err(|_| perr(line, "bad denominator"))?;
    if q == 0.into() {
        return Err(perr(line, "zero denominator"));
    }
    Ok(Rational::new(p, q))
}

fn parse_args(body: &str, name: &str, n: usize, line: usize) -> Result<Vec<u32>, ParseError> {
    let inner = body
        .strip_prefix(name)
        .and_then(|r| r.strip_prefix('('))
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| perr(line, format!("malformed {name}(...)")))?;
    let args: Result<Vec<u32>, _> = inner.split(',').map(|a| a.trim().parse::<u32>()).collect();
    let args = args.map_err(|_| perr(line, "non-integer vertex argument"))?;
    if args.len() != n {
        return Err(perr(line, format!("{name} takes {n} arguments")));
    }
    Ok(args)
}

fn parse_endpoint(text: &str, line: usize) -> Result<(usize, u8), ParseError> {
    let (v, s) = text.split_once('.').ok_or_else(|| perr(line, "endpoint must be v.slot"))?;
    Ok((
        v.parse().map_err(|_| perr(line, "bad vertex index"))?,
        s.parse().map_err(|_| perr(line, "bad slot index"))?,
    ))
}

/// Parses one diagram block starting at `lines[0]`; returns it and the
/// number of lines consumed.
fn parse_block(lines: &[(usize, &str)]) -> Result<(Diagram, usize), ParseError> {
    let (ln, header) = *lines.first().ok_or_else(|| perr(0, "unexpected end of input"))?;
    let rest = header.strip_prefix("diagram ").ok_or_else(|| perr(ln, "expected `diagram`"))?;
    let mut chi = None;
    let mut coeff = None;
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix("chi=") {
            chi = Some(v.parse::<u32>().map_err(|_| perr(ln, "bad chi order"))?);
        } else if let Some(v) = tok.strip_prefix("coeff=") {
            coeff = Some(parse_rational(v, ln)?);
        } else {
            return Err(perr(ln, format!("unknown header field `{tok}`")));
        }
    }
    let mut d = Diagram {
        vertices: Vec::new(),
        edges: Vec::new(),
        coefficient: coeff.ok_or_else(|| perr(ln, "missing coeff"))?,
        chi_order: chi.ok_or_else(|| perr(ln, "missing chi"))?,
    };
    for (i, &(ln, l)) in lines.iter().enumerate().skip(1) {
        if l == "end" {
            return Ok((d, i + 1));
        }
        if let Some(rest) = l.strip_prefix("e ") {
            let (a, b) = rest.split_once(" -> ").ok_or_else(|| perr(ln, "edge needs ->"))?;
            let (src, src_slot) = parse_endpoint(a.trim(), ln)?;
            let (dst, dst_slot) = parse_endpoint(b.trim(), ln)?;
            d.edges.push(Edge { src, src_slot, dst, dst_slot });
        } else if let Some(rest) = l.strip_prefix('v') {
            let (idx, body) = rest.split_once(' ').ok_or_else(|| perr(ln, "vertex needs a kind"))?;
            let idx: usize = idx.parse().map_err(|_| perr(ln, "bad vertex id"))?;
            if idx != d.vertices.len() {
                return Err(perr(ln, "vertex ids must be consecutive from 0"));
            }
            let kind = if body.starts_with("ext") {
                let a = parse_args(body, "ext", 3, ln)?;
                VertexKind::External { slot: a[0] as usize, legs: a[1], snaky: a[2] }
            } else if body.starts_with("drift") {
                VertexKind::Drift { out: parse_args(body, "drift", 1, ln)?[0] }
            } else if body.starts_with("noise") {
                let a = parse_args(body, "noise", 2, ln)?;
                VertexKind::Noise { out: [a[0], a[1]] }
            } else if body.starts_with("corr") {
                let a = parse_args(body, "corr", 2, ln)?;
                VertexKind::Correction { out: [a[0], a[1]] }
            } else {
                return Err(perr(ln, format!("unknown vertex kind `{body}`")));
            };
            d.vertices.push(kind);
        } else {
            return Err(perr(ln, format!("unrecognised line `{l}`")));
        }
    }
    Err(perr(lines.last().map(|l| l.0).unwrap_or(0), "missing `end`"))
}

fn content_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

pub fn diagram_from_text(text: &str) -> Result<Diagram, ParseError> {
    let lines = content_lines(text);
    let (d, used) = parse_block(&lines)?;
    if let Some(&(ln, _)) = lines.get(used) {
        return Err(perr(ln, "trailing content after `end`"));
    }
    Ok(d)
}

pub fn sum_to_text(s: &DiagramSum) -> String {
    let mut out = format!("sum terms={}\n", s.len());
    for d in s.diagrams() {
        out.push_str(&diagram_to_text(d));
    }
    out
}

/// Parses a sum listing and re-collects it into canonical classes.
pub fn sum_from_text(text: &str) -> Result<DiagramSum, ParseError> {
    let lines = content_lines(text);
    let (ln, header) = *lines.first().ok_or_else(|| perr(0, "empty input"))?;
    let n: usize = header
        .strip_prefix("sum terms=")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| perr(ln, "expected `sum terms=N`"))?;
    let mut pos = 1;
    let mut sum = DiagramSum::new();
    for _ in 0..n {
        let (d, used) = parse_block(&lines[pos..])?;
        let line = lines[pos].0;
        sum.add(&d).map_err(|e| perr(line, e.to_string()))?;
        pos += used;
    }
    if pos != lines.len() {
        return Err(perr(lines[pos].0, "trailing content"));
    }
    Ok(sum)
}

/// Graphviz `digraph` rendering; external vertices are boxes labelled by slot.
pub fn diagram_to_dot(d: &Diagram, name: &str) -> String {
    let mut s = format!("digraph \"{name}\" {{\n  rankdir=LR;\n");
    writeln!(s, "  label=\"coeff {}/{}  chi^{}\";", d.coefficient.numer(), d.coefficient.denom(), d.chi_order).unwrap();
    for (i, v) in d.vertices.iter().enumerate() {
        let (label, shape) = match v {
            VertexKind::External { slot, legs, snaky } => {
                (format!("t{slot} x^{legs} xt^{snaky}"), "box")
            }
            VertexKind::Drift { out } => (format!("alpha_{out}"), "circle"),
            VertexKind::Noise { out } => (format!("beta_{}|beta_{}", out[0], out[1]), "doublecircle"),
            VertexKind::Correction { out } => {
                (format!("beta_{}|beta_{}'", out[0], out[1] + 1), "diamond")
            }
        };
        writeln!(s, "  v{i} [label=\"{label}\", shape={shape}];").unwrap();
    }
    for e in &d.edges {
        writeln!(s, "  v{} -> v{} [taillabel=\"{}\", headlabel=\"{}\"];", e.src, e.dst, e.src_slot, e.dst_slot)
            .unwrap();
    }
    s.push_str("}\n");
    s
}
