//! Turn calculus: the induced map on turns, preimage turns, the illegal turn
//! closure with its depth `t0`, special turns, and map profiling.

use crate::gos::{format_local_path, EdgePath, GraphOfSpaces, LocalPath, OEdge, SpaceId, System};
use crate::groupoid::{self, ImmersionFactorization};
use crate::{Error, Result};
use std::collections::{HashMap, HashSet, VecDeque};

/// A turn: an edge path `e . chi . e'` of length two, kept in canonical form
/// (the lexicographically smaller of the turn and its reverse), so a turn and
/// its reverse compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Turn {
    pub incoming: OEdge,
    pub connector: LocalPath,
    pub outgoing: OEdge,
}

impl Turn {
    pub fn new(g: &GraphOfSpaces, incoming: OEdge, connector: LocalPath, outgoing: OEdge) -> Result<Turn> {
        let a = g.term(incoming);
        let b = g.init(outgoing);
        if connector.space != a.space
            || connector.from != a.vertex
            || connector.space != b.space
            || connector.to != b.vertex
        {
            return Err(Error::Structural(
                "turn connector does not join its edges".into(),
            ));
        }
        Ok(Turn {
            incoming,
            connector,
            outgoing,
        }
        .canonical())
    }

    pub fn trivial(g: &GraphOfSpaces, incoming: OEdge, outgoing: OEdge) -> Result<Turn> {
        let a = g.term(incoming);
        Turn::new(g, incoming, LocalPath::trivial(a.space, a.vertex), outgoing)
    }

    fn key(&self) -> (u32, &[u32], u32) {
        (self.incoming.0, &self.connector.steps, self.outgoing.0)
    }

    pub fn reversed(&self) -> Turn {
        Turn {
            incoming: self.outgoing.rev(),
            connector: self.connector.reversed(),
            outgoing: self.incoming.rev(),
        }
    }

    pub fn canonical(self) -> Turn {
        let r = self.reversed();
        if r.key() < self.key() {
            r
        } else {
            self
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.outgoing == self.incoming.rev() && self.connector.is_trivial()
    }

    /// Canonical serialization `(<in> | {connector} | <out>)`, the connector
    /// omitted when trivial.
    pub fn display(&self, g: &GraphOfSpaces) -> String {
        if self.connector.is_trivial() {
            format!(
                "({} | {})",
                g.top_token(self.incoming),
                g.top_token(self.outgoing)
            )
        } else {
            format!(
                "({} | {{{}}} | {})",
                g.top_token(self.incoming),
                format_local_path(g, &self.connector),
                g.top_token(self.outgoing)
            )
        }
    }
}

/// The image turn: last edge of `f(incoming)`, the reduced image of the
/// connector, first edge of `f(outgoing)`.
pub fn image_turn(sys: &System, t: &Turn) -> Turn {
    let fin = sys.map.edge_image(t.incoming);
    let fout = sys.map.edge_image(t.outgoing);
    Turn {
        incoming: fin.last(),
        connector: sys.map.map_local(&t.connector),
        outgoing: fout.first(),
    }
    .canonical()
}

/// Context for preimage computations: the fold factorization of every vertex
/// space, computed once.
pub struct TurnContext {
    facts: Vec<ImmersionFactorization>,
}

impl TurnContext {
    pub fn new(sys: &System) -> Result<TurnContext> {
        let mut facts = Vec::new();
        for (sid, _) in sys.graph.spaces() {
            facts.push(groupoid::analyze_vertex_map(sys, sid)?);
        }
        Ok(TurnContext { facts })
    }

    pub fn fact(&self, v: SpaceId) -> &ImmersionFactorization {
        &self.facts[v.0 as usize]
    }
}

/// All turns whose image turn equals `t`: scan oriented-edge pairs whose
/// image boundary edges match, and solve the connector by unique lifting.
pub fn preimage_turns(sys: &System, ctx: &TurnContext, t: &Turn) -> Result<Vec<Turn>> {
    let g = &sys.graph;
    let mut out = HashSet::new();
    // Match against the stored orientation and its reverse.
    for target in [t.clone(), t.reversed()] {
        for p in g.oriented_tops() {
            if sys.map.edge_image(p).last() != target.incoming {
                continue;
            }
            for q in g.oriented_tops() {
                if sys.map.edge_image(q).first() != target.outgoing {
                    continue;
                }
                let a = g.term(p);
                let b = g.init(q);
                if a.space != b.space {
                    continue;
                }
                let fact = ctx.fact(a.space);
                if !fact.injective {
                    return Err(Error::Hypothesis(format!(
                        "preimage turns need an injective vertex map on space {:?}",
                        g.space(a.space)?.name
                    )));
                }
                if let Some(chi) =
                    groupoid::connecting_preimage(sys, fact, &target.connector, a.vertex, b.vertex)?
                {
                    out.insert(Turn::new(g, p, chi, q)?);
                }
            }
        }
    }
    let mut v: Vec<Turn> = out.into_iter().collect();
    v.sort();
    Ok(v)
}

/// The illegal turn closure: breadth-first preimage closure seeded at the
/// degenerate turns. For each illegal turn the number of iterations until its
/// image turn becomes degenerate is recorded; `t0` is the maximum.
#[derive(Debug, Clone)]
pub struct TurnClosure {
    /// Every illegal turn with its degeneration time (0 for degenerate).
    pub illegal: HashMap<Turn, u32>,
    pub t0: u32,
}

impl TurnClosure {
    pub fn is_legal(&self, t: &Turn) -> bool {
        !self.illegal.contains_key(&t.clone().canonical())
    }

    pub fn degeneration_time(&self, t: &Turn) -> Option<u32> {
        self.illegal.get(&t.clone().canonical()).copied()
    }

    pub fn non_degenerate(&self) -> Vec<&Turn> {
        let mut v: Vec<&Turn> = self.illegal.keys().filter(|t| !t.is_degenerate()).collect();
        v.sort();
        v
    }

    pub fn degenerate(&self) -> Vec<&Turn> {
        let mut v: Vec<&Turn> = self.illegal.keys().filter(|t| t.is_degenerate()).collect();
        v.sort();
        v
    }
}

pub fn illegal_turn_closure(sys: &System, ctx: &TurnContext) -> Result<TurnClosure> {
    let g = &sys.graph;
    let mut illegal: HashMap<Turn, u32> = HashMap::new();
    let mut frontier: VecDeque<Turn> = VecDeque::new();
    for e in g.oriented_tops() {
        let t = Turn::trivial(g, e, e.rev())?;
        if illegal.insert(t.clone(), 0).is_none() {
            frontier.push_back(t);
        }
    }
    // Level k holds the turns whose f^k-image is degenerate and which are not
    // already recorded at a smaller level; a non-degenerate periodic turn is
    // legal, so no turn recurs and the closure terminates.
    let mut level = 0u32;
    let mut t0 = 0u32;
    while !frontier.is_empty() {
        level += 1;
        let mut next = VecDeque::new();
        for t in frontier.drain(..) {
            for pre in preimage_turns(sys, ctx, &t)? {
                if !illegal.contains_key(&pre) {
                    illegal.insert(pre.clone(), level);
                    t0 = level;
                    next.push_back(pre);
                }
            }
        }
        frontier = next;
    }
    Ok(TurnClosure { illegal, t0 })
}

/// Turns used by an edge path (consecutive junctions), canonicalized.
pub fn turns_used(g: &GraphOfSpaces, path: &EdgePath) -> Vec<Turn> {
    let mut out = Vec::new();
    for i in 0..path.len().saturating_sub(1) {
        let (inc, conn, outg) = path.turn_at(g, i);
        out.push(
            Turn {
                incoming: inc,
                connector: conn,
                outgoing: outg,
            }
            .canonical(),
        );
    }
    out
}

/// The t-special turns: every turn used by some `f^t(e)`, together with every
/// turn used by `f^t(e1 . chi . e2)` where `chi` is the unique reduced
/// connecting path inside an inessential vertex space. Computed without
/// materializing any iterated image: the turns used by `f^t(e)` are the turns
/// used by the images of the edges of `f(e)` plus the (t-1)-fold image turns
/// of the junctions of `f(e)`.
pub fn special_turns(sys: &System, t: u32, _max_len: u128) -> Result<Vec<Turn>> {
    if t < 1 {
        return Err(Error::Domain("special turns need t >= 1".into()));
    }
    let g = &sys.graph;
    let mut memo: HashMap<(u32, u32), std::sync::Arc<HashSet<Turn>>> = HashMap::new();
    let mut set: HashSet<Turn> = HashSet::new();
    for e in g.forward_tops() {
        let turns = image_turn_set(sys, &mut memo, e, t)?;
        set.extend(turns.iter().cloned());
    }
    for (sid, sp) in g.spaces() {
        if sp.essential() {
            continue;
        }
        // Inessential space: a tree, so one reduced path per vertex pair. The
        // seam turn of f^t(e1 . chi . e2) is the t-fold image turn of the
        // junction; interior turns are already collected.
        for e1 in g.oriented_tops() {
            if g.term(e1).space != sid {
                continue;
            }
            for e2 in g.oriented_tops() {
                if g.init(e2).space != sid {
                    continue;
                }
                let chi = tree_path(sys, sid, g.term(e1).vertex, g.init(e2).vertex)?;
                let mut turn = Turn::new(g, e1, chi, e2)?;
                for _ in 0..t {
                    turn = image_turn(sys, &turn);
                }
                set.insert(turn);
            }
        }
    }
    let mut v: Vec<Turn> = set.into_iter().collect();
    v.sort();
    Ok(v)
}

/// Turns used by `f^t(e)`, memoized over (edge, power).
fn image_turn_set(
    sys: &System,
    memo: &mut HashMap<(u32, u32), std::sync::Arc<HashSet<Turn>>>,
    e: OEdge,
    t: u32,
) -> Result<std::sync::Arc<HashSet<Turn>>> {
    if t == 0 {
        return Ok(std::sync::Arc::new(HashSet::new()));
    }
    if let Some(hit) = memo.get(&(e.0, t)) {
        return Ok(hit.clone());
    }
    let g = &sys.graph;
    let img = sys.map.edge_image(e).clone();
    let mut set: HashSet<Turn> = HashSet::new();
    for &x in &img.edges {
        let sub = image_turn_set(sys, memo, x, t - 1)?;
        set.extend(sub.iter().cloned());
    }
    for i in 0..img.len() - 1 {
        let (inc, conn, out) = img.turn_at(g, i);
        let mut turn = Turn {
            incoming: inc,
            connector: conn,
            outgoing: out,
        }
        .canonical();
        for _ in 0..t - 1 {
            turn = image_turn(sys, &turn);
        }
        set.insert(turn);
    }
    let arc = std::sync::Arc::new(set);
    memo.insert((e.0, t), arc.clone());
    Ok(arc)
}

/// Unique reduced path between two vertices of an inessential (tree) space.
fn tree_path(sys: &System, sid: SpaceId, from: u32, to: u32) -> Result<LocalPath> {
    let sp = sys.graph.space(sid)?;
    let n = sp.vertex_count();
    let mut prev: Vec<Option<(u32, u32)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[from as usize] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for e in 0..sp.oriented_edge_count() as u32 {
            if sp.ledge_from(e) == v && !seen[sp.ledge_to(e) as usize] {
                seen[sp.ledge_to(e) as usize] = true;
                prev[sp.ledge_to(e) as usize] = Some((v, e));
                queue.push_back(sp.ledge_to(e));
            }
        }
    }
    let mut steps = Vec::new();
    let mut cur = to;
    while cur != from {
        let (p, e) = prev[cur as usize]
            .ok_or_else(|| Error::Structural("inessential space is not connected".into()))?;
        steps.push(e);
        cur = p;
    }
    steps.reverse();
    LocalPath::new(&sys.graph, sid, from, steps)
}

/// Summary of the map's train-track and expansion structure.
#[derive(Debug)]
pub struct MapProfile {
    pub is_train_track: bool,
    /// Least `t` with `|f^t(e)| >= 2` for every edge, when it exists.
    pub t_exp: Option<u32>,
    pub closure: TurnClosure,
}

impl MapProfile {
    pub fn is_expanding(&self) -> bool {
        self.t_exp.is_some()
    }

    pub fn is_legal_turn(&self, t: &Turn) -> bool {
        self.closure.is_legal(t)
    }

    /// Number of illegal turns used by a path.
    pub fn ilt(&self, g: &GraphOfSpaces, path: &EdgePath) -> usize {
        turns_used(g, path)
            .iter()
            .filter(|t| !self.closure.is_legal(t))
            .count()
    }

    /// Number of illegal turns used by a closed path, including the wrap.
    pub fn ilt_closed(&self, _g: &GraphOfSpaces, path: &crate::gos::ClosedPath) -> usize {
        let n = path.len();
        let mut count = 0;
        for i in 0..n {
            let t = Turn {
                incoming: path.edges[i],
                connector: path.conns[i].clone(),
                outgoing: path.edges[(i + 1) % n],
            }
            .canonical();
            if !self.closure.is_legal(&t) {
                count += 1;
            }
        }
        count
    }

    pub fn is_legal_path(&self, g: &GraphOfSpaces, path: &EdgePath) -> bool {
        self.ilt(g, path) == 0
    }
}

pub fn map_profile(sys: &System, ctx: &TurnContext) -> Result<MapProfile> {
    let g = &sys.graph;
    let closure = illegal_turn_closure(sys, ctx)?;
    let mut is_tt = true;
    'outer: for e in g.forward_tops() {
        for t in turns_used(g, sys.map.edge_image(e)) {
            if !closure.is_legal(&t) {
                is_tt = false;
                break 'outer;
            }
        }
    }
    // Expansion: image lengths are monotone; an edge stuck at length one for
    // more steps than there are oriented edges sits on a cycle of
    // single-edge images and never expands.
    let n = g.oriented_top_count();
    let mut lens: Vec<u128> = g
        .oriented_tops()
        .map(|e| sys.map.edge_image(e).len() as u128)
        .collect();
    let mut t_exp = None;
    for t in 1..=(n as u32 + 1) {
        if lens.iter().all(|&l| l >= 2) {
            t_exp = Some(t);
            break;
        }
        let prev = lens.clone();
        for e in g.oriented_tops() {
            lens[e.0 as usize] = sys
                .map
                .edge_image(e)
                .edges
                .iter()
                .map(|&x| prev[x.0 as usize])
                .sum();
        }
    }
    Ok(MapProfile {
        is_train_track: is_tt,
        t_exp,
        closure,
    })
}
