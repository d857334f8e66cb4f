//! The underlying combinatorial data: finite-graph vertex spaces glued by top
//! edges. Oriented edges are indexed so that `idx ^ 1` is the reverse; even
//! indices are the forward orientations given at construction time.

use crate::{Error, Result};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpaceId(pub u32);

/// Oriented top edge. `rev()` flips orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OEdge(pub u32);

impl OEdge {
    pub fn rev(self) -> OEdge {
        OEdge(self.0 ^ 1)
    }
    pub fn is_forward(self) -> bool {
        self.0 % 2 == 0
    }
    pub fn forward(self) -> OEdge {
        OEdge(self.0 & !1)
    }
}

/// Oriented local edge within one vertex space; `idx ^ 1` is the reverse.
pub type LocalEdge = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AttachPoint {
    pub space: SpaceId,
    pub vertex: u32,
}

#[derive(Debug, Clone)]
struct OrientedLocal {
    from: u32,
    to: u32,
}

/// A finite connected graph realizing one vertex group.
#[derive(Debug, Clone)]
pub struct VertexSpace {
    pub name: String,
    vertex_names: Vec<String>,
    vertex_index: HashMap<String, u32>,
    ledges: Vec<OrientedLocal>,
    ledge_names: Vec<String>, // per forward edge
    ledge_index: HashMap<String, LocalEdge>,
}

impl VertexSpace {
    pub fn new(name: &str) -> Self {
        VertexSpace {
            name: name.to_string(),
            vertex_names: Vec::new(),
            vertex_index: HashMap::new(),
            ledges: Vec::new(),
            ledge_names: Vec::new(),
            ledge_index: HashMap::new(),
        }
    }

    pub fn add_vertex(&mut self, name: &str) -> Result<u32> {
        if self.vertex_index.contains_key(name) {
            return Err(Error::Structural(format!(
                "duplicate local vertex {name:?} in space {:?}",
                self.name
            )));
        }
        let idx = self.vertex_names.len() as u32;
        self.vertex_names.push(name.to_string());
        self.vertex_index.insert(name.to_string(), idx);
        Ok(idx)
    }

    pub fn add_edge(&mut self, name: &str, from: &str, to: &str) -> Result<LocalEdge> {
        check_edge_name(name)?;
        if self.ledge_index.contains_key(name) {
            return Err(Error::Structural(format!(
                "duplicate local edge {name:?} in space {:?}",
                self.name
            )));
        }
        let f = self.vertex(from)?;
        let t = self.vertex(to)?;
        let idx = self.ledges.len() as LocalEdge;
        self.ledges.push(OrientedLocal { from: f, to: t });
        self.ledges.push(OrientedLocal { from: t, to: f });
        self.ledge_names.push(name.to_string());
        self.ledge_index.insert(name.to_string(), idx);
        Ok(idx)
    }

    pub fn vertex(&self, name: &str) -> Result<u32> {
        self.vertex_index.get(name).copied().ok_or_else(|| {
            Error::Structural(format!(
                "unknown local vertex {name:?} in space {:?}",
                self.name
            ))
        })
    }

    pub fn vertex_name(&self, v: u32) -> &str {
        &self.vertex_names[v as usize]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    /// Number of oriented local edges (twice the unoriented count).
    pub fn oriented_edge_count(&self) -> usize {
        self.ledges.len()
    }

    pub fn ledge_from(&self, e: LocalEdge) -> u32 {
        self.ledges[e as usize].from
    }

    pub fn ledge_to(&self, e: LocalEdge) -> u32 {
        self.ledges[e as usize].to
    }

    /// Resolve a local-edge token (case convention / `^-1` suffix).
    pub fn ledge_by_token(&self, token: &str) -> Result<LocalEdge> {
        resolve_token(token, |name| self.ledge_index.get(name).copied(), |e| e ^ 1).ok_or_else(
            || {
                Error::Parse(format!(
                    "unknown local edge token {token:?} in space {:?}",
                    self.name
                ))
            },
        )
    }

    pub fn ledge_token(&self, e: LocalEdge) -> String {
        edge_token(&self.ledge_names[(e / 2) as usize], e % 2 == 1)
    }

    pub fn first_betti(&self) -> i64 {
        self.ledges.len() as i64 / 2 - self.vertex_names.len() as i64 + 1
    }

    /// A vertex space is essential when its fundamental group is non-trivial.
    pub fn essential(&self) -> bool {
        self.first_betti() >= 1
    }

    pub fn is_point(&self) -> bool {
        self.vertex_names.len() == 1 && self.ledges.is_empty()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_names.is_empty() {
            return false;
        }
        let n = self.vertex_names.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0u32];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for (i, le) in self.ledges.iter().enumerate() {
                let _ = i;
                if le.from == v && !seen[le.to as usize] {
                    seen[le.to as usize] = true;
                    stack.push(le.to);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

#[derive(Debug, Clone)]
struct TopEdge {
    name: String, // of the forward orientation
    from: AttachPoint,
    to: AttachPoint,
}

/// A finite connected graph of spaces with trivial edge groups.
#[derive(Debug, Clone)]
pub struct GraphOfSpaces {
    spaces: Vec<VertexSpace>,
    space_index: HashMap<String, SpaceId>,
    tops: Vec<TopEdge>, // per forward edge; oriented index e: tops[e/2], flip if odd
    top_index: HashMap<String, OEdge>,
}

impl GraphOfSpaces {
    pub fn new() -> Self {
        GraphOfSpaces {
            spaces: Vec::new(),
            space_index: HashMap::new(),
            tops: Vec::new(),
            top_index: HashMap::new(),
        }
    }

    pub fn add_space(&mut self, space: VertexSpace) -> Result<SpaceId> {
        if self.space_index.contains_key(&space.name) {
            return Err(Error::Structural(format!(
                "duplicate vertex space {:?}",
                space.name
            )));
        }
        let id = SpaceId(self.spaces.len() as u32);
        self.space_index.insert(space.name.clone(), id);
        self.spaces.push(space);
        Ok(id)
    }

    pub fn add_top_edge(&mut self, name: &str, from: AttachPoint, to: AttachPoint) -> Result<OEdge> {
        check_edge_name(name)?;
        if self.top_index.contains_key(name) {
            return Err(Error::Structural(format!("duplicate top edge {name:?}")));
        }
        self.check_attach(from)?;
        self.check_attach(to)?;
        let e = OEdge(2 * self.tops.len() as u32);
        self.tops.push(TopEdge {
            name: name.to_string(),
            from,
            to,
        });
        self.top_index.insert(name.to_string(), e);
        Ok(e)
    }

    fn check_attach(&self, p: AttachPoint) -> Result<()> {
        let sp = self.space(p.space)?;
        if p.vertex as usize >= sp.vertex_count() {
            return Err(Error::Structural(format!(
                "attaching point names a missing vertex in space {:?}",
                sp.name
            )));
        }
        Ok(())
    }

    pub fn space(&self, id: SpaceId) -> Result<&VertexSpace> {
        self.spaces
            .get(id.0 as usize)
            .ok_or_else(|| Error::Structural(format!("unknown space id {}", id.0)))
    }

    pub fn space_by_name(&self, name: &str) -> Result<SpaceId> {
        self.space_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::Structural(format!("unknown vertex space {name:?}")))
    }

    pub fn spaces(&self) -> impl Iterator<Item = (SpaceId, &VertexSpace)> {
        self.spaces
            .iter()
            .enumerate()
            .map(|(i, s)| (SpaceId(i as u32), s))
    }

    pub fn space_count(&self) -> usize {
        self.spaces.len()
    }

    /// Number of oriented top edges.
    pub fn oriented_top_count(&self) -> usize {
        2 * self.tops.len()
    }

    pub fn oriented_tops(&self) -> impl Iterator<Item = OEdge> {
        (0..self.oriented_top_count() as u32).map(OEdge)
    }

    pub fn forward_tops(&self) -> impl Iterator<Item = OEdge> {
        (0..self.tops.len() as u32).map(|i| OEdge(2 * i))
    }

    pub fn init(&self, e: OEdge) -> AttachPoint {
        let t = &self.tops[(e.0 / 2) as usize];
        if e.is_forward() {
            t.from
        } else {
            t.to
        }
    }

    pub fn term(&self, e: OEdge) -> AttachPoint {
        self.init(e.rev())
    }

    pub fn top_by_token(&self, token: &str) -> Result<OEdge> {
        resolve_token(token, |name| self.top_index.get(name).copied(), OEdge::rev)
            .ok_or_else(|| Error::Parse(format!("unknown top edge token {token:?}")))
    }

    pub fn top_token(&self, e: OEdge) -> String {
        edge_token(&self.tops[(e.0 / 2) as usize].name, !e.is_forward())
    }

    /// Connectivity of the underlying graph: vertex spaces as nodes, top edges
    /// as arcs.
    pub fn is_connected(&self) -> bool {
        if self.spaces.is_empty() {
            return false;
        }
        let n = self.spaces.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(s) = stack.pop() {
            for t in &self.tops {
                for (a, b) in [(t.from, t.to), (t.to, t.from)] {
                    if a.space.0 as usize == s && !seen[b.space.0 as usize] {
                        seen[b.space.0 as usize] = true;
                        stack.push(b.space.0 as usize);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// True when every vertex space is a single point, i.e. the system is a
    /// plain finite graph.
    pub fn is_absolute(&self) -> bool {
        self.spaces.iter().all(|s| s.is_point())
    }
}

impl Default for GraphOfSpaces {
    fn default() -> Self {
        Self::new()
    }
}

/// Single lowercase letters use the case convention (`a` / `A`), so a
/// single uppercase letter is not a valid declared name. Multi-character
/// names get an explicit `^-1` suffix when reversed.
fn check_edge_name(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::Structural("empty edge name".into()));
    }
    let mut chars = name.chars();
    let c0 = chars.next().unwrap();
    if chars.next().is_none() && c0.is_ascii_uppercase() {
        return Err(Error::Structural(format!(
            "edge name {name:?} collides with the uppercase-inverse convention"
        )));
    }
    if name.contains(['{', '}', ':', ' ']) || name.ends_with("^-1") {
        return Err(Error::Structural(format!("invalid edge name {name:?}")));
    }
    Ok(())
}

pub(crate) fn edge_token(forward_name: &str, reversed: bool) -> String {
    if !reversed {
        return forward_name.to_string();
    }
    let mut chars = forward_name.chars();
    let c0 = chars.next().unwrap_or('?');
    if chars.as_str().is_empty() && c0.is_ascii_lowercase() {
        c0.to_ascii_uppercase().to_string()
    } else {
        format!("{forward_name}^-1")
    }
}

/// Resolve the three token spellings: plain forward name, `name^-1`, or the
/// single-letter uppercase shortcut.
pub(crate) fn resolve_token<T: Copy>(
    token: &str,
    lookup: impl Fn(&str) -> Option<T>,
    flip: impl Fn(T) -> T,
) -> Option<T> {
    if let Some(base) = token.strip_suffix("^-1") {
        return lookup(base).map(flip);
    }
    if let Some(e) = lookup(token) {
        return Some(e);
    }
    let mut chars = token.chars();
    let c0 = chars.next()?;
    if chars.next().is_none() && c0.is_ascii_uppercase() {
        let lower = c0.to_ascii_lowercase().to_string();
        return lookup(&lower).map(flip);
    }
    None
}
