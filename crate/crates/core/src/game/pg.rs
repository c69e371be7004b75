//! PGSolver-style text format.
//!
//! ```text
//! parity 2;
//! start 1;
//! 0 1 0 1,0;
//! 1 0 1;
//! 2 0 0 "var:X";
//! ```
//!
//! Each vertex line is `ID PRIORITY OWNER SUCCESSORS ["NAME"];` with owner
//! 0 for Eva and 1 for Adam. The successor field is omitted for vertices
//! without moves; a repeated successor is a parallel move. A name of the
//! form `var:X` labels a leaf with the variable `X`.

use std::fmt::Write as _;

use thiserror::Error;

use super::{GameBuilder, ParityGame, Player};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct PgError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> PgError {
    PgError {
        line,
        message: message.into(),
    }
}

fn number(line: usize, s: &str, what: &str) -> Result<u32, PgError> {
    s.parse()
        .map_err(|_| err(line, format!("invalid {what} '{s}'")))
}

pub fn parse_pg(text: &str) -> Result<ParityGame, PgError> {
    let mut b = GameBuilder::new();
    let mut max_id = None;
    let mut start = None;
    let mut ids = Vec::new();
    let mut edges = Vec::new();
    let mut seen_vertex = false;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        let body = t
            .strip_suffix(';')
            .ok_or_else(|| err(line, "missing ';' at end of line"))?
            .trim_end();
        let (head, name) = match body.find('"') {
            Some(q) => {
                let rest = &body[q + 1..];
                let name = rest
                    .strip_suffix('"')
                    .ok_or_else(|| err(line, "unterminated name"))?;
                if name.contains('"') {
                    return Err(err(line, "names may not contain '\"'"));
                }
                (&body[..q], Some(name))
            }
            None => (body, None),
        };
        let fields: Vec<&str> = head.split_whitespace().collect();
        match fields.first() {
            Some(&"parity") => {
                if seen_vertex || max_id.is_some() || fields.len() != 2 || name.is_some() {
                    return Err(err(line, "malformed header"));
                }
                max_id = Some(number(line, fields[1], "maximal id")?);
                continue;
            }
            Some(&"start") => {
                if start.is_some() || fields.len() != 2 || name.is_some() {
                    return Err(err(line, "malformed start line"));
                }
                start = Some(number(line, fields[1], "start vertex")?);
                continue;
            }
            _ => {}
        }
        if fields.len() != 3 && fields.len() != 4 {
            return Err(err(
                line,
                "expected 'ID PRIORITY OWNER SUCCESSORS [\"NAME\"];'",
            ));
        }
        let id = number(line, fields[0], "vertex id")?;
        if let Some(m) = max_id {
            if id > m {
                return Err(err(
                    line,
                    format!("vertex {id} exceeds the declared maximum {m}"),
                ));
            }
        }
        let prio = number(line, fields[1], "priority")?;
        let owner = match fields[2] {
            "0" => Player::Eva,
            "1" => Player::Adam,
            o => return Err(err(line, format!("invalid owner '{o}'"))),
        };
        if ids.contains(&id) {
            return Err(err(line, format!("vertex {id} declared twice")));
        }
        ids.push(id);
        seen_vertex = true;
        b.vertex(id, owner, prio);
        if let Some(succ) = fields.get(3) {
            for s in succ.split(',') {
                edges.push((line, id, number(line, s, "successor")?));
            }
        }
        if let Some(n) = name {
            match n.strip_prefix("var:") {
                Some(x) => {
                    if !crate::term::is_valid_name(x) {
                        return Err(err(line, format!("invalid variable name '{x}'")));
                    }
                    b.label(id, x);
                }
                None => {
                    b.name(id, n);
                }
            }
        }
    }
    for &(line, src, tgt) in &edges {
        if !ids.contains(&tgt) {
            return Err(err(line, format!("successor {tgt} is not declared")));
        }
        b.edge(src, tgt);
    }
    if let Some(s) = start {
        if !ids.contains(&s) {
            return Err(err(0, format!("start vertex {s} is not declared")));
        }
        b.initial(s);
    }
    b.build().map_err(|e| err(0, e.to_string()))
}

/// Canonical text: vertices in id order, `start` only when the initial
/// vertex is not the first one.
pub fn print_pg(g: &ParityGame) -> String {
    let mut out = String::new();
    let vs = g.vertices();
    let Some(&last) = vs.last() else {
        return out;
    };
    writeln!(out, "parity {};", last.0).unwrap();
    if let Some(init) = g.initial() {
        if init != vs[0] {
            writeln!(out, "start {};", init.0).unwrap();
        }
    }
    for &v in vs {
        write!(out, "{} {} {}", v.0, g.priority(v), g.owner(v).code()).unwrap();
        let succ: Vec<String> = g.moves(v).iter().map(|(_, t)| t.0.to_string()).collect();
        if !succ.is_empty() {
            write!(out, " {}", succ.join(",")).unwrap();
        }
        if let Some(l) = g.label(v) {
            write!(out, " \"var:{l}\"").unwrap();
        } else if let Some(n) = g.name(v) {
            write!(out, " \"{n}\"").unwrap();
        }
        out.push_str(";\n");
    }
    out
}
