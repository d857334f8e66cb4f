//! Edge-path expression grammar, shared by the CLI and the document format.
//!
//! Whitespace-separated tokens. A token is a top-edge name, an inverted
//! top-edge name (uppercase shortcut for single letters, `name^-1` in
//! general), or a connector `{space: lp1 lp2 ...}`; the space prefix may be
//! omitted since it is determined by the preceding edge. Trivial connectors
//! may be omitted entirely.

use super::graph::{GraphOfSpaces, SpaceId};
use super::path::{ClosedPath, EdgePath, LocalPath};
use crate::{Error, Result};

enum Token {
    Edge(String),
    Conn(String),
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        if let Some(stripped) = rest.strip_prefix('{') {
            let end = stripped
                .find('}')
                .ok_or_else(|| Error::Parse("unterminated connector".into()))?;
            out.push(Token::Conn(stripped[..end].trim().to_string()));
            rest = stripped[end + 1..].trim_start();
        } else {
            let end = rest
                .find(|c: char| c.is_whitespace() || c == '{')
                .unwrap_or(rest.len());
            out.push(Token::Edge(rest[..end].to_string()));
            rest = rest[end..].trim_start();
        }
    }
    Ok(out)
}

fn parse_connector(
    g: &GraphOfSpaces,
    body: &str,
    space: SpaceId,
    from: u32,
) -> Result<LocalPath> {
    let (space_part, steps_part) = match body.split_once(':') {
        Some((sp, rest)) => (Some(sp.trim()), rest.trim()),
        None => (None, body.trim()),
    };
    if let Some(name) = space_part {
        if !name.is_empty() && g.space_by_name(name)? != space {
            return Err(Error::Parse(format!(
                "connector names space {name:?} but the path is in {:?} here",
                g.space(space)?.name
            )));
        }
    }
    let sp = g.space(space)?;
    let mut steps = Vec::new();
    for tok in steps_part.split_whitespace() {
        steps.push(sp.ledge_by_token(tok)?);
    }
    LocalPath::new(g, space, from, steps)
}

/// Parse an edge path; fails on empty input or endpoint mismatches.
pub fn parse_edge_path(g: &GraphOfSpaces, s: &str) -> Result<EdgePath> {
    let (edges, conns, trailing) = parse_sequence(g, s)?;
    if edges.is_empty() {
        return Err(Error::Parse("empty edge path".into()));
    }
    if trailing.is_some() {
        return Err(Error::Parse(
            "edge path must finish with a top edge".into(),
        ));
    }
    EdgePath::new(g, edges, conns)
}

/// Parse a closed path. A trailing connector token, if present, becomes the
/// wrap connector; otherwise the wrap is trivial.
pub fn parse_closed_path(g: &GraphOfSpaces, s: &str) -> Result<ClosedPath> {
    let (edges, mut conns, trailing) = parse_sequence(g, s)?;
    if edges.is_empty() {
        return Err(Error::Parse("empty closed path".into()));
    }
    let t = g.term(*edges.last().unwrap());
    let b = g.init(edges[0]);
    let wrap = match trailing {
        Some(body) => parse_connector(g, &body, t.space, t.vertex)?,
        None => LocalPath::trivial(t.space, t.vertex),
    };
    if wrap.space != b.space || wrap.to != b.vertex {
        return Err(Error::Parse(
            "closed path wrap connector does not return to the first edge".into(),
        ));
    }
    conns.push(wrap);
    ClosedPath::new(g, edges, conns)
}

type Parsed = (Vec<super::graph::OEdge>, Vec<LocalPath>, Option<String>);

fn parse_sequence(g: &GraphOfSpaces, s: &str) -> Result<Parsed> {
    let tokens = tokenize(s)?;
    let mut edges = Vec::new();
    let mut conns = Vec::new();
    let mut pending: Option<Option<String>> = None; // None: expect first edge
    for tok in tokens {
        match tok {
            Token::Edge(t) => {
                let e = g.top_by_token(&t)?;
                if let Some(conn_body) = pending.take() {
                    let prev = *edges.last().unwrap();
                    let a = g.term(prev);
                    let conn = match conn_body {
                        Some(body) => parse_connector(g, &body, a.space, a.vertex)?,
                        None => LocalPath::trivial(a.space, a.vertex),
                    };
                    let b = g.init(e);
                    if conn.space != b.space || conn.to != b.vertex {
                        return Err(Error::Parse(format!(
                            "edges {} and {} are not joined by the given connector",
                            g.top_token(prev),
                            g.top_token(e)
                        )));
                    }
                    conns.push(conn);
                }
                edges.push(e);
                pending = Some(None);
            }
            Token::Conn(body) => match pending {
                Some(None) => pending = Some(Some(body)),
                Some(Some(_)) => {
                    return Err(Error::Parse("two consecutive connectors".into()))
                }
                None => {
                    return Err(Error::Parse(
                        "edge path must start with a top edge".into(),
                    ))
                }
            },
        }
    }
    let trailing = match pending {
        Some(Some(body)) => Some(body),
        _ => None,
    };
    Ok((edges, conns, trailing))
}

pub fn format_local_path(g: &GraphOfSpaces, lp: &LocalPath) -> String {
    let sp = g.space(lp.space).expect("valid space");
    lp.steps
        .iter()
        .map(|&s| sp.ledge_token(s))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn format_edge_path(g: &GraphOfSpaces, p: &EdgePath) -> String {
    let mut out = String::new();
    for (i, &e) in p.edges.iter().enumerate() {
        if i > 0 {
            let c = &p.conns[i - 1];
            if !c.is_trivial() {
                out.push_str(&format!(" {{{}}}", format_local_path(g, c)));
            }
            out.push(' ');
        }
        out.push_str(&g.top_token(e));
    }
    out
}

pub fn format_closed_path(g: &GraphOfSpaces, p: &ClosedPath) -> String {
    let mut out = String::new();
    for (i, &e) in p.edges.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&g.top_token(e));
        let c = &p.conns[i];
        if !c.is_trivial() {
            out.push_str(&format!(" {{{}}}", format_local_path(g, c)));
        }
    }
    out
}

/// Parse a local path given its space and starting vertex (used by the
/// document format for vertex-map edge images).
pub fn parse_local_path(
    g: &GraphOfSpaces,
    space: SpaceId,
    from: u32,
    word: &str,
) -> Result<LocalPath> {
    let sp = g.space(space)?;
    let mut steps = Vec::new();
    for tok in word.split_whitespace() {
        steps.push(sp.ledge_by_token(tok)?);
    }
    LocalPath::new(g, space, from, steps)
}
