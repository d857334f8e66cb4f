//! Paths: reduced local paths inside vertex spaces, edge paths alternating
//! top edges and connecting paths, closed paths up to cyclic rotation, and
//! partial paths whose extremal edges are trimmed to symbolic loci.

use super::graph::{GraphOfSpaces, LocalEdge, OEdge, SpaceId};
use crate::{Error, Result};

/// A reduced edge path inside one vertex space. Connecting paths are always
/// kept in this form: in a graph, reduced paths are the canonical
/// representatives of homotopy classes rel endpoints, so equality is literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalPath {
    pub space: SpaceId,
    pub from: u32,
    pub to: u32,
    pub steps: Vec<LocalEdge>,
}

impl LocalPath {
    pub fn trivial(space: SpaceId, at: u32) -> Self {
        LocalPath {
            space,
            from: at,
            to: at,
            steps: Vec::new(),
        }
    }

    /// Build from steps, checking endpoint compatibility and freely reducing.
    pub fn new(g: &GraphOfSpaces, space: SpaceId, from: u32, steps: Vec<LocalEdge>) -> Result<Self> {
        let sp = g.space(space)?;
        let mut out: Vec<LocalEdge> = Vec::with_capacity(steps.len());
        let mut at = from;
        for s in steps {
            if s as usize >= sp.oriented_edge_count() {
                return Err(Error::Structural(format!(
                    "local edge index {s} out of range in space {:?}",
                    sp.name
                )));
            }
            if sp.ledge_from(s) != at {
                return Err(Error::Structural(format!(
                    "local path step {} does not start where the previous one ended in space {:?}",
                    sp.ledge_token(s),
                    sp.name
                )));
            }
            at = sp.ledge_to(s);
            if out.last() == Some(&(s ^ 1)) {
                out.pop();
            } else {
                out.push(s);
            }
        }
        Ok(LocalPath {
            space,
            from,
            to: at,
            steps: out,
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn reversed(&self) -> LocalPath {
        LocalPath {
            space: self.space,
            from: self.to,
            to: self.from,
            steps: self.steps.iter().rev().map(|s| s ^ 1).collect(),
        }
    }

    /// Concatenate two reduced local paths, freely reducing at the seam.
    pub fn concat(&self, other: &LocalPath) -> Result<LocalPath> {
        if self.space != other.space || self.to != other.from {
            return Err(Error::Structural(
                "local path concatenation endpoint mismatch".into(),
            ));
        }
        let mut steps = self.steps.clone();
        for &s in &other.steps {
            if steps.last() == Some(&(s ^ 1)) {
                steps.pop();
            } else {
                steps.push(s);
            }
        }
        Ok(LocalPath {
            space: self.space,
            from: self.from,
            to: other.to,
            steps,
        })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// An edge path `e1 . x1 . e2 . ... . x(r-1) . er`: starts and finishes with a
/// top edge, length `r >= 1`, with a reduced connecting path between
/// consecutive top edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgePath {
    pub edges: Vec<OEdge>,
    /// `conns[i]` joins `term(edges[i])` to `init(edges[i+1])`.
    pub conns: Vec<LocalPath>,
}

impl EdgePath {
    pub fn single(e: OEdge) -> Self {
        EdgePath {
            edges: vec![e],
            conns: Vec::new(),
        }
    }

    pub fn new(g: &GraphOfSpaces, edges: Vec<OEdge>, conns: Vec<LocalPath>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::Structural("edge path must contain a top edge".into()));
        }
        if conns.len() + 1 != edges.len() {
            return Err(Error::Structural(
                "edge path needs exactly one connecting path between consecutive edges".into(),
            ));
        }
        let p = EdgePath { edges, conns };
        p.check(g)?;
        Ok(p)
    }

    pub fn check(&self, g: &GraphOfSpaces) -> Result<()> {
        for (i, c) in self.conns.iter().enumerate() {
            let a = g.term(self.edges[i]);
            let b = g.init(self.edges[i + 1]);
            if c.space != a.space || c.space != b.space || c.from != a.vertex || c.to != b.vertex {
                return Err(Error::Structural(format!(
                    "connecting path {i} does not join the adjacent attaching points"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> OEdge {
        self.edges[0]
    }

    pub fn last(&self) -> OEdge {
        *self.edges.last().unwrap()
    }

    pub fn reversed(&self) -> EdgePath {
        EdgePath {
            edges: self.edges.iter().rev().map(|e| e.rev()).collect(),
            conns: self.conns.iter().rev().map(|c| c.reversed()).collect(),
        }
    }

    /// Initial subpath consisting of the first `n` edges.
    pub fn prefix(&self, n: usize) -> EdgePath {
        assert!(n >= 1 && n <= self.edges.len());
        EdgePath {
            edges: self.edges[..n].to_vec(),
            conns: self.conns[..n - 1].to_vec(),
        }
    }

    /// Connector after the i-th edge (0-based), if any.
    pub fn conn_after(&self, i: usize) -> Option<&LocalPath> {
        self.conns.get(i)
    }

    /// Concatenate through a connecting path `mid` (joining the endpoint of
    /// `self` to the start of `other`).
    pub fn concat(&self, g: &GraphOfSpaces, mid: &LocalPath, other: &EdgePath) -> Result<EdgePath> {
        let a = g.term(self.last());
        let b = g.init(other.first());
        if mid.space != a.space || mid.from != a.vertex || mid.space != b.space || mid.to != b.vertex
        {
            return Err(Error::Structural(
                "edge path concatenation endpoint mismatch".into(),
            ));
        }
        let mut edges = self.edges.clone();
        let mut conns = self.conns.clone();
        conns.push(mid.clone());
        edges.extend_from_slice(&other.edges);
        conns.extend_from_slice(&other.conns);
        Ok(EdgePath { edges, conns })
    }

    /// The turn used at junction `i` (between edges `i` and `i+1`), as an
    /// (incoming, connector, outgoing) triple; not canonicalized.
    pub fn turn_at(&self, g: &GraphOfSpaces, i: usize) -> (OEdge, LocalPath, OEdge) {
        let conn = if i < self.conns.len() {
            self.conns[i].clone()
        } else {
            let a = g.term(self.edges[i]);
            LocalPath::trivial(a.space, a.vertex)
        };
        (self.edges[i], conn, self.edges[i + 1])
    }

    pub fn is_reduced(&self, g: &GraphOfSpaces) -> bool {
        for i in 0..self.edges.len().saturating_sub(1) {
            if self.edges[i + 1] == self.edges[i].rev() && self.conns[i].is_trivial() {
                return false;
            }
        }
        let _ = g;
        true
    }
}

/// A path that reduced to nothing: it lives inside a single vertex space.
/// Carries the residual reduced local path between the original endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroPath {
    pub residual: LocalPath,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReducedPath {
    Edge(EdgePath),
    Zero(ZeroPath),
}

impl ReducedPath {
    pub fn edge(self) -> Result<EdgePath> {
        match self {
            ReducedPath::Edge(p) => Ok(p),
            ReducedPath::Zero(_) => Err(Error::Domain("path reduced to a zero path".into())),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ReducedPath::Edge(p) => p.len(),
            ReducedPath::Zero(_) => 0,
        }
    }
}

/// Reduce an edge path by cancelling degenerate turns. Left-over connecting
/// paths at either end are dropped, so the result is again an edge path or a
/// zero path; endpoints are preserved up to homotopy within vertex spaces.
pub fn reduce(g: &GraphOfSpaces, path: &EdgePath) -> Result<ReducedPath> {
    reduce_items(
        g,
        LocalPath::trivial(g.init(path.first()).space, g.init(path.first()).vertex),
        path.edges.iter().copied().zip(conns_with_tail(g, path)),
    )
}

fn conns_with_tail<'a>(
    g: &'a GraphOfSpaces,
    path: &'a EdgePath,
) -> impl Iterator<Item = LocalPath> + 'a {
    (0..path.edges.len()).map(move |i| {
        if i < path.conns.len() {
            path.conns[i].clone()
        } else {
            let t = g.term(path.edges[i]);
            LocalPath::trivial(t.space, t.vertex)
        }
    })
}

/// Core reduction over a stream of (edge, connector-after-edge) items with an
/// explicit leading local path. Returns either an edge path (leading/trailing
/// leftovers dropped) or the fully cancelled residual.
pub(crate) fn reduce_items(
    g: &GraphOfSpaces,
    head: LocalPath,
    items: impl Iterator<Item = (OEdge, LocalPath)>,
) -> Result<ReducedPath> {
    // Stack entries: (edge, connector after that edge so far).
    let mut head = head;
    let mut stack: Vec<(OEdge, LocalPath)> = Vec::new();
    for (e, after) in items {
        // Connector currently sitting before `e`.
        let before = match stack.last() {
            Some((_, c)) => c.clone(),
            None => head.clone(),
        };
        let a = g.init(e);
        if before.space != a.space || before.to != a.vertex {
            return Err(Error::Structural(
                "connecting path does not reach the next edge".into(),
            ));
        }
        if let Some((top, _)) = stack.last() {
            if *top == e.rev() && before.is_trivial() {
                // Degenerate turn: cancel, merging the surrounding connectors.
                let (_, _) = stack.pop().unwrap();
                let prev = match stack.last() {
                    Some((_, c)) => c.clone(),
                    None => head.clone(),
                };
                let merged = prev.concat(&after)?;
                match stack.last_mut() {
                    Some((_, c)) => *c = merged,
                    None => head = merged,
                }
                continue;
            }
        }
        stack.push((e, after));
    }
    if stack.is_empty() {
        return Ok(ReducedPath::Zero(ZeroPath { residual: head }));
    }
    let edges: Vec<OEdge> = stack.iter().map(|(e, _)| *e).collect();
    let conns: Vec<LocalPath> = stack[..stack.len() - 1]
        .iter()
        .map(|(_, c)| c.clone())
        .collect();
    Ok(ReducedPath::Edge(EdgePath { edges, conns }))
}

/// A closed path `e1 . x1 . ... . eq . xq`, considered up to cyclic rotation.
#[derive(Debug, Clone)]
pub struct ClosedPath {
    pub edges: Vec<OEdge>,
    /// `conns[i]` follows `edges[i]`; the last one wraps around to `edges[0]`.
    pub conns: Vec<LocalPath>,
}

impl ClosedPath {
    pub fn new(g: &GraphOfSpaces, edges: Vec<OEdge>, conns: Vec<LocalPath>) -> Result<Self> {
        if edges.is_empty() || edges.len() != conns.len() {
            return Err(Error::Structural(
                "closed path needs one connecting path per edge".into(),
            ));
        }
        let p = ClosedPath { edges, conns };
        for i in 0..p.edges.len() {
            let a = g.term(p.edges[i]);
            let b = g.init(p.edges[(i + 1) % p.edges.len()]);
            let c = &p.conns[i];
            if c.space != a.space || c.from != a.vertex || c.space != b.space || c.to != b.vertex {
                return Err(Error::Structural(format!(
                    "closed path connector {i} does not join the adjacent attaching points"
                )));
            }
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn rotated(&self, k: usize) -> ClosedPath {
        let n = self.edges.len();
        let k = k % n;
        ClosedPath {
            edges: self.edges[k..].iter().chain(&self.edges[..k]).copied().collect(),
            conns: self.conns[k..].iter().chain(&self.conns[..k]).cloned().collect(),
        }
    }

    fn key(&self) -> Vec<(u32, Vec<LocalEdge>)> {
        self.edges
            .iter()
            .zip(&self.conns)
            .map(|(e, c)| (e.0, c.steps.clone()))
            .collect()
    }

    /// Canonical rotation: lexicographically minimal.
    pub fn canonical(&self) -> ClosedPath {
        let n = self.edges.len();
        let mut best = self.clone();
        let mut best_key = best.key();
        for k in 1..n {
            let r = self.rotated(k);
            let rk = r.key();
            if rk < best_key {
                best_key = rk;
                best = r;
            }
        }
        best
    }
}

impl PartialEq for ClosedPath {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.canonical().key() == other.canonical().key()
    }
}
impl Eq for ClosedPath {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReducedClosed {
    Closed(ClosedPath),
    /// The loop is freely homotopic into a vertex space; carries the
    /// cyclically reduced local loop (possibly trivial).
    VertexLoop { space: SpaceId, base: u32, steps: Vec<LocalEdge> },
}

/// Cyclic reduction of a closed path.
pub fn reduce_closed(g: &GraphOfSpaces, path: &ClosedPath) -> Result<ReducedClosed> {
    // Linear reduction of e1 x1 ... eq keeping the boundary leftovers, which
    // belong to the wrap connector in the cyclic reading.
    let old_wrap = path.conns.last().unwrap().clone();
    let a = g.init(path.edges[0]);
    let mut head = LocalPath::trivial(a.space, a.vertex);
    let mut stack: Vec<(OEdge, LocalPath)> = Vec::new();
    for i in 0..path.edges.len() {
        let e = path.edges[i];
        let after = if i + 1 < path.edges.len() {
            path.conns[i].clone()
        } else {
            let t = g.term(e);
            LocalPath::trivial(t.space, t.vertex)
        };
        let before = match stack.last() {
            Some((_, c)) => c.clone(),
            None => head.clone(),
        };
        if let Some((top, _)) = stack.last() {
            if *top == e.rev() && before.is_trivial() {
                stack.pop();
                let prev = match stack.last() {
                    Some((_, c)) => c.clone(),
                    None => head.clone(),
                };
                let merged = prev.concat(&after)?;
                match stack.last_mut() {
                    Some((_, c)) => *c = merged,
                    None => head = merged,
                }
                continue;
            }
        }
        stack.push((e, after));
    }
    if stack.is_empty() {
        let lp = head.concat(&old_wrap)?;
        let steps = cyclic_reduce_steps(lp.steps);
        return Ok(ReducedClosed::VertexLoop {
            space: lp.space,
            base: lp.from,
            steps,
        });
    }
    let tail = stack.last().unwrap().1.clone();
    let mut wrap = tail.concat(&old_wrap)?.concat(&head)?;
    let mut edges: Vec<OEdge> = stack.iter().map(|(e, _)| *e).collect();
    let mut conns: Vec<LocalPath> = stack[..stack.len() - 1]
        .iter()
        .map(|(_, c)| c.clone())
        .collect();
    // Cancellation across the wrap.
    while edges.len() >= 2 && *edges.last().unwrap() == edges[0].rev() && wrap.is_trivial() {
        edges.remove(0);
        edges.pop();
        let lead = conns.remove(0);
        let tail = conns
            .pop()
            .unwrap_or_else(|| LocalPath::trivial(lead.space, lead.from));
        if edges.is_empty() {
            let lp = tail.concat(&lead)?;
            let steps = cyclic_reduce_steps(lp.steps);
            return Ok(ReducedClosed::VertexLoop {
                space: lp.space,
                base: lp.from,
                steps,
            });
        }
        wrap = tail.concat(&lead)?;
    }
    conns.push(wrap);
    Ok(ReducedClosed::Closed(ClosedPath { edges, conns }))
}

fn cyclic_reduce_steps(mut steps: Vec<LocalEdge>) -> Vec<LocalEdge> {
    // Free reduction happened already; cancel across the wrap.
    while steps.len() >= 2 && *steps.first().unwrap() == steps.last().unwrap() ^ 1 {
        steps.remove(0);
        steps.pop();
    }
    steps
}

/// A symbolic description of a point inside an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSpec {
    /// Pullback of the image-edge boundary at `offset` under `f^power`.
    Pullback { power: u32, offset: u128 },
    /// The `f^period`-fixed point inside occurrence `occurrence` (1-based) of
    /// the edge in its own `f^period`-image.
    PeriodicFixed { period: u32, occurrence: u128 },
}

/// A path whose extremal edges may be trimmed to interior points. Length
/// equals the length of the canonical vertex-prolongation, i.e. of `core`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialPath {
    pub core: EdgePath,
    pub head_trimmed: bool,
    pub tail_trimmed: bool,
    pub head_locus: Option<PointSpec>,
    pub tail_locus: Option<PointSpec>,
}

impl PartialPath {
    pub fn whole(core: EdgePath) -> Self {
        PartialPath {
            core,
            head_trimmed: false,
            tail_trimmed: false,
            head_locus: None,
            tail_locus: None,
        }
    }

    pub fn len(&self) -> usize {
        self.core.len()
    }

    /// The canonical vertex-prolongation: the minimal edge path containing
    /// this path. Idempotent on untrimmed paths.
    pub fn vertex_prolongation(&self) -> EdgePath {
        self.core.clone()
    }
}

/// Reduce a partial path. Untrimmed inputs delegate to edge-path reduction;
/// trimmed inputs are only reduced when no cancellation reaches the trimmed
/// extremal edges (the pipeline never produces such inputs unreduced).
pub fn reduce_partial(g: &GraphOfSpaces, p: &PartialPath) -> Result<PartialPath> {
    if !p.head_trimmed && !p.tail_trimmed {
        return match reduce(g, &p.core)? {
            ReducedPath::Edge(e) => Ok(PartialPath::whole(e)),
            ReducedPath::Zero(_) => Err(Error::Domain(
                "edge path reduced to a zero path; no partial representative".into(),
            )),
        };
    }
    let r = reduce(g, &p.core)?.edge()?;
    if r.len() != p.core.len() || r.first() != p.core.first() || r.last() != p.core.last() {
        return Err(Error::Domain(
            "cannot reduce across a trimmed endpoint".into(),
        ));
    }
    Ok(p.clone())
}
