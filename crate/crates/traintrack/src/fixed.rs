//! Fixed and periodic conjugacy classes, and fixed subgroup generators via
//! the augmented periodic graph: the periodic part of the graph enlarged by
//! one edge per INP path, with its induced self-map and the evaluation map
//! back to the original graph.

use crate::absolute::{to_graph_of_spaces, transition_analysis, AbsMap, Growth};
use crate::bounds::compute_bounds;
use crate::gos::{ClosedPath, EdgePath, ReducedClosed, System};
use crate::inp::{
    compute_inps, legalize_closed, occurrence_at_power, EndpointData, InpSet,
};
use crate::{Caps, Error, Result, Session};
use serde::Serialize;
use std::collections::HashMap;

/// One edge of the augmented graph.
#[derive(Debug, Clone)]
pub enum XEdge {
    /// A forward edge of the subdivided graph fixed by the power map.
    Fixed { edge: u32 },
    /// The edge standing for one INP path; `h_path` is its image under the
    /// evaluation map, a reduced path in the subdivided graph.
    Inp {
        record: usize,
        from: u32,
        to: u32,
        h_path: Vec<u32>,
    },
}

/// Where an edge of the original graph was subdivided.
#[derive(Debug, Clone, Serialize)]
pub struct Subdivision {
    pub edge: String,
    /// Occurrence positions (in the power-map image of the edge) of the
    /// interior INP endpoints the edge was split at.
    pub positions: Vec<u64>,
}

/// The augmented periodic graph: `graph` is the subdivided original graph
/// carrying the images of `f^power_used`; every X* edge is fixed by the
/// induced self-map, and vertices map by `vertex_map`.
#[derive(Debug)]
pub struct XStar {
    pub graph: AbsMap,
    pub power_used: u32,
    pub edges: Vec<XEdge>,
    pub vertex_map: Vec<u32>,
    pub subdivisions: Vec<Subdivision>,
    /// Serialized prolongations of the INP records, for reporting.
    pub inp_words: Vec<String>,
    /// Forward piece edges of each original forward edge, in order.
    pub pieces: Vec<Vec<u32>>,
}

impl XStar {
    /// Express a word over the original oriented edges in the subdivided
    /// graph's oriented edges.
    pub fn embed_word(&self, original: &[u32]) -> Vec<u32> {
        let mut out = Vec::new();
        for &x in original {
            let i = (x / 2) as usize;
            if x % 2 == 0 {
                out.extend(self.pieces[i].iter().copied());
            } else {
                out.extend(self.pieces[i].iter().rev().map(|&p| p ^ 1));
            }
        }
        out
    }
}

fn free_reduce(mut w: Vec<u32>) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::with_capacity(w.len());
    for x in w.drain(..) {
        if out.last() == Some(&(x ^ 1)) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

fn map_word(images: &[Vec<u32>], w: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    for &x in w {
        out.extend_from_slice(&images[x as usize]);
    }
    free_reduce(out)
}

/// Build the augmented graph for an absolute map: raise to the least power
/// fixing all periodic edges and all INP paths, subdivide at interior INP
/// endpoints, and attach one edge per INP.
pub fn build_xstar(map: &AbsMap, caps: &Caps) -> Result<XStar> {
    let ta = transition_analysis(map);
    // Polynomially growing edges must be honestly periodic here.
    let n = map.forward_count();
    let mut edge_period: Vec<Option<u32>> = vec![None; n];
    for i in 0..n {
        if ta.growth[i] != Growth::Polynomial {
            continue;
        }
        let start = 2 * i as u32;
        let mut cur = start;
        for k in 1..=(2 * n as u32 + 2) {
            if map.images[cur as usize].len() != 1 {
                return Err(Error::Domain(format!(
                    "polynomially growing edge {} is not periodic",
                    map.edge_names[i]
                )));
            }
            cur = map.images[cur as usize][0];
            if cur == start {
                edge_period[i] = Some(k);
                break;
            }
        }
        if edge_period[i].is_none() {
            return Err(Error::Domain(format!(
                "polynomially growing edge {} is not periodic",
                map.edge_names[i]
            )));
        }
    }

    // INP data via the associated graph of spaces (empty when nothing grows).
    let has_exponential = ta.growth.contains(&Growth::Exponential);
    let (records, power_records): (Vec<RecordAtGamma>, u32) = if has_exponential {
        let (gos_sys, _) = to_graph_of_spaces(map)?;
        let sess = Session::new(&gos_sys, caps.clone())?;
        let bounds = compute_bounds(&sess)?;
        let inps = compute_inps(&sess, &bounds)?;
        let mut p = 1u32;
        for r in &inps.records {
            p = lcm(p, r.period);
        }
        let recs = translate_records(map, &gos_sys, &sess, &inps, p, caps)?;
        (recs, p)
    } else {
        (Vec::new(), 1)
    };

    let mut power = power_records;
    for p in edge_period.iter().flatten() {
        power = lcm(power, *p);
    }
    if power > caps.max_power {
        return Err(Error::Capacity {
            cap: "max_power in build_xstar",
            limit: caps.max_power as u128,
        });
    }

    // Images of the power map on the original graph, materialized.
    let mut gp: Vec<Vec<u32>> = (0..map.oriented_count())
        .map(|e| vec![e as u32])
        .collect();
    for _ in 0..power {
        gp = gp
            .iter()
            .map(|w| {
                let mut out = Vec::new();
                for &x in w {
                    out.extend_from_slice(&map.images[x as usize]);
                }
                out
            })
            .collect();
        if gp.iter().any(|w| w.len() as u128 > caps.max_image_len) {
            return Err(Error::Capacity {
                cap: "max_image_len in build_xstar",
                limit: caps.max_image_len,
            });
        }
    }
    // Records' occurrences at the common power: positions are stated in
    // gp-coordinates and must name the edge itself, forward.
    let mut splits: HashMap<u32, Vec<u128>> = HashMap::new();
    for rec in &records {
        for end in [&rec.head, &rec.tail] {
            if let GammaEndpoint::Interior { edge, position } = end {
                debug_assert_eq!(gp[2 * *edge as usize][*position as usize - 1], 2 * *edge);
                let list = splits.entry(*edge).or_default();
                if !list.contains(position) {
                    list.push(*position);
                }
            }
        }
    }
    for list in splits.values_mut() {
        list.sort_unstable();
    }

    // Subdivided graph: pieces named edge.1, edge.2, ...; new vertices
    // edge:1, ... at the split points.
    let mut vertex_names = map.vertex_names.clone();
    let mut edge_names: Vec<String> = Vec::new();
    let mut from: Vec<u32> = Vec::new();
    // pieces[i]: forward piece indices of original forward edge i.
    let mut pieces: Vec<Vec<u32>> = Vec::new();
    for i in 0..n {
        let cuts = splits.get(&(i as u32)).cloned().unwrap_or_default();
        let m = cuts.len();
        let mut ps = Vec::new();
        let mut at = map.from[2 * i];
        for j in 0..=m {
            let name = if m == 0 {
                map.edge_names[i].clone()
            } else {
                format!("{}.{}", map.edge_names[i], j + 1)
            };
            let to = if j == m {
                map.to_vertex(2 * i as u32)
            } else {
                vertex_names.push(format!("{}:{}", map.edge_names[i], j + 1));
                (vertex_names.len() - 1) as u32
            };
            ps.push(edge_names.len() as u32 * 2);
            edge_names.push(name);
            from.push(at);
            from.push(to);
            at = to;
        }
        pieces.push(ps);
    }
    let oriented_pieces = |x: u32| -> Vec<u32> {
        let i = (x / 2) as usize;
        if x % 2 == 0 {
            pieces[i].clone()
        } else {
            pieces[i].iter().rev().map(|&p| p ^ 1).collect()
        }
    };
    let rewrite = |w: &[u32]| -> Vec<u32> {
        let mut out = Vec::new();
        for &x in w {
            out.extend(oriented_pieces(x));
        }
        out
    };

    // Power-map images on the subdivided graph.
    let mut images: Vec<Vec<u32>> = vec![Vec::new(); 2 * edge_names.len()];
    for i in 0..n {
        let cuts = splits.get(&(i as u32)).cloned().unwrap_or_default();
        let w = &gp[2 * i];
        let ps = &pieces[i];
        if cuts.is_empty() {
            let img = rewrite(w);
            images[ps[0] as usize] = img.clone();
            images[(ps[0] ^ 1) as usize] = free_reduce(img.iter().rev().map(|&x| x ^ 1).collect());
            continue;
        }
        let m = cuts.len();
        for j in 0..=m {
            // Piece j+1 (1-based) runs between cut j and cut j+1.
            let mut img: Vec<u32> = Vec::new();
            if j > 0 {
                // Suffix pieces of the copy at occurrence cuts[j-1].
                img.extend(ps[j..=m].iter().copied());
            }
            let lo = if j == 0 { 0 } else { cuts[j - 1] as usize };
            let hi = if j == m { w.len() } else { cuts[j] as usize - 1 };
            img.extend(rewrite(&w[lo..hi]));
            if j < m {
                // Prefix pieces of the copy at occurrence cuts[j].
                img.extend(ps[..=j].iter().copied());
            }
            images[ps[j] as usize] = img.clone();
            images[(ps[j] ^ 1) as usize] =
                free_reduce(img.iter().rev().map(|&x| x ^ 1).collect());
        }
        // Consistency: the pieces compose to the rewritten image.
        let mut whole = Vec::new();
        for &p in ps {
            whole.extend_from_slice(&images[p as usize]);
        }
        if whole != rewrite(w) {
            return Err(Error::Internal(format!(
                "subdivision of {} is inconsistent with the split rule",
                map.edge_names[i]
            )));
        }
    }
    // Vertex images: original vertices iterate; split vertices are fixed.
    let mut vertex_map: Vec<u32> = Vec::with_capacity(vertex_names.len());
    for v in 0..map.vertex_names.len() as u32 {
        let mut cur = v;
        for _ in 0..power {
            cur = map.vertex_images[cur as usize];
        }
        vertex_map.push(cur);
    }
    for _ in map.vertex_names.len()..vertex_names.len() {
        vertex_map.push(vertex_map.len() as u32);
    }

    let gamma_prime = AbsMap {
        vertex_names,
        edge_names,
        from,
        images,
        vertex_images: vertex_map.clone(),
    };

    // X* edges: fixed pieces plus one edge per INP record.
    let mut edges = Vec::new();
    for i in 0..gamma_prime.forward_count() {
        let e = 2 * i as u32;
        if gamma_prime.images[e as usize] == vec![e] {
            edges.push(XEdge::Fixed { edge: e });
        }
    }
    let mut inp_words = Vec::new();
    for (ri, rec) in records.iter().enumerate() {
        // h(e_rec): the core path in the subdivided graph: expand the
        // prolongation into pieces and trim past the interior endpoints.
        let mut path: Vec<u32> = Vec::new();
        for &x in &rec.word {
            path.extend(oriented_pieces(x));
        }
        if let GammaEndpoint::Interior { edge, position } = rec.head {
            let first = rec.word[0];
            debug_assert_eq!(first / 2, edge);
            let rank = split_rank(&splits, edge, position)?;
            let m = splits[&edge].len();
            let drop = if first % 2 == 0 { rank } else { m + 1 - rank };
            path.drain(..drop);
        }
        if let GammaEndpoint::Interior { edge, position } = rec.tail {
            let last = *rec.word.last().unwrap();
            debug_assert_eq!(last / 2, edge);
            let rank = split_rank(&splits, edge, position)?;
            let m = splits[&edge].len();
            let drop = if last % 2 == 0 { m + 1 - rank } else { rank };
            let keep = path.len() - drop;
            path.truncate(keep);
        }
        if path.is_empty() {
            return Err(Error::Internal("INP core trimmed to nothing".into()));
        }
        // The core must be fixed by the power map: the alignment property of
        // the record, rechecked on the subdivided graph.
        let image = map_word(&gamma_prime.images, &path);
        if image != path {
            return Err(Error::Domain(format!(
                "INP endpoint occurrence could not be verified on the subdivided graph ({})",
                rec.display
            )));
        }
        let from_v = gamma_prime.from[path[0] as usize];
        let to_v = gamma_prime.to_vertex(*path.last().unwrap());
        inp_words.push(rec.display.clone());
        edges.push(XEdge::Inp {
            record: ri,
            from: from_v,
            to: to_v,
            h_path: path,
        });
    }

    let subdivisions = {
        let mut subs: Vec<Subdivision> = splits
            .iter()
            .map(|(&e, cuts)| Subdivision {
                edge: map.edge_names[e as usize].clone(),
                positions: cuts.iter().map(|&c| c as u64).collect(),
            })
            .collect();
        subs.sort_by(|a, b| a.edge.cmp(&b.edge));
        subs
    };

    Ok(XStar {
        graph: gamma_prime,
        power_used: power,
        edges,
        vertex_map,
        subdivisions,
        inp_words,
        pieces,
    })
}

fn split_rank(splits: &HashMap<u32, Vec<u128>>, edge: u32, position: u128) -> Result<usize> {
    splits
        .get(&edge)
        .and_then(|cuts| cuts.iter().position(|&c| c == position))
        .map(|r| r + 1)
        .ok_or_else(|| Error::Internal("endpoint position missing from splits".into()))
}

fn lcm(a: u32, b: u32) -> u32 {
    fn gcd(a: u32, b: u32) -> u32 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// An INP record translated to the coordinates of the original graph, with
/// endpoints at the common power.
struct RecordAtGamma {
    word: Vec<u32>,
    head: GammaEndpoint,
    tail: GammaEndpoint,
    display: String,
}

enum GammaEndpoint {
    Vertex,
    /// Interior fixed point inside occurrence `position` (1-based, forward
    /// coordinates) of the forward `edge` in its own power-map image.
    Interior { edge: u32, position: u128 },
}

fn translate_records(
    map: &AbsMap,
    gos_sys: &System,
    sess: &Session,
    inps: &InpSet,
    power: u32,
    caps: &Caps,
) -> Result<Vec<RecordAtGamma>> {
    let g = &gos_sys.graph;
    // Top edges of the realization carry the same names as the original
    // exponential edges; connectors flatten to polynomial edges.
    let flatten = |path: &EdgePath| -> Result<Vec<u32>> {
        let mut out = Vec::new();
        for (i, &e) in path.edges.iter().enumerate() {
            if i > 0 {
                let conn = &path.conns[i - 1];
                let sp = g.space(conn.space)?;
                for &s in &conn.steps {
                    out.push(map.edge_by_token(&sp.ledge_token(s))?);
                }
            }
            out.push(map.edge_by_token(&g.top_token(e))?);
        }
        Ok(out)
    };
    let mut out = Vec::new();
    for rec in &inps.records {
        if !rec.verified {
            return Err(Error::Domain(format!(
                "unverified INP record {}",
                crate::gos::format_edge_path(g, &rec.prolongation)
            )));
        }
        let entry = &inps.entries[rec.entry_index];
        let word = flatten(&rec.prolongation)?;
        let mut ends = [GammaEndpoint::Vertex, GammaEndpoint::Vertex];
        for (side, (end, branch)) in [
            (rec.head, &entry.branch1),
            (rec.tail, &entry.branch2),
        ]
        .into_iter()
        .enumerate()
        {
            if let EndpointData::Interior { period, occurrence } = end {
                // Occurrence at the common power, still indexed over top
                // edges of the realization.
                let eb = branch.last();
                let k_p = occurrence_at_power(sess, eb, period, occurrence, power)?;
                // Flat position: top edges interleave with connector letters.
                let img = gos_sys.iterate_edge_image(eb, power, caps.max_image_len)?;
                let mut flat: u128 = 0;
                for (i, _) in img.edges.iter().enumerate().take(k_p as usize - 1) {
                    flat += 1 + img.conns[i].len() as u128;
                }
                flat += 1;
                let gamma_edge = map.edge_by_token(&g.top_token(eb))?;
                // Normalize to the forward orientation of the edge.
                let (edge, position) = if gamma_edge % 2 == 0 {
                    (gamma_edge / 2, flat)
                } else {
                    let total = {
                        let w = flatten(&img)?;
                        w.len() as u128
                    };
                    (gamma_edge / 2, total + 1 - flat)
                };
                ends[side] = GammaEndpoint::Interior { edge, position };
            }
        }
        let [head, tail] = ends;
        out.push(RecordAtGamma {
            word,
            head,
            tail,
            display: crate::gos::format_edge_path(g, &rec.prolongation),
        });
    }
    Ok(out)
}

/// Spanning-tree basis loops of the component of `base`, pushed through the
/// evaluation map and reduced. Every generator is verified to be fixed by
/// the power map exactly.
pub fn fixed_subgroup_generators(xs: &XStar, base: &str) -> Result<Vec<String>> {
    let gp = &xs.graph;
    let base_v = gp
        .vertex_names
        .iter()
        .position(|n| n == base)
        .ok_or_else(|| Error::Domain(format!("unknown vertex {base:?}")))? as u32;
    if xs.vertex_map[base_v as usize] != base_v {
        return Err(Error::Domain(format!(
            "vertex {base:?} is not fixed by the induced map"
        )));
    }
    // Component of base over X* edges; BFS spanning tree.
    let nv = gp.vertex_names.len();
    let ends = |edge: &XEdge| -> (u32, u32) {
        match edge {
            XEdge::Fixed { edge } => (gp.from[*edge as usize], gp.to_vertex(*edge)),
            XEdge::Inp { from, to, .. } => (*from, *to),
        }
    };
    let mut tree: Vec<Option<(u32, usize, bool)>> = vec![None; nv];
    let mut seen = vec![false; nv];
    seen[base_v as usize] = true;
    let mut queue = std::collections::VecDeque::from([base_v]);
    while let Some(v) = queue.pop_front() {
        for (i, e) in xs.edges.iter().enumerate() {
            let (a, b) = ends(e);
            if a == v && !seen[b as usize] {
                seen[b as usize] = true;
                tree[b as usize] = Some((v, i, true));
                queue.push_back(b);
            } else if b == v && !seen[a as usize] {
                seen[a as usize] = true;
                tree[a as usize] = Some((v, i, false));
                queue.push_back(a);
            }
        }
    }
    let h_of = |i: usize, forward: bool| -> Vec<u32> {
        let w = match &xs.edges[i] {
            XEdge::Fixed { edge } => vec![*edge],
            XEdge::Inp { h_path, .. } => h_path.clone(),
        };
        if forward {
            w
        } else {
            w.iter().rev().map(|&x| x ^ 1).collect()
        }
    };
    let tree_word_to_root = |mut v: u32| -> Vec<(usize, bool)> {
        let mut up = Vec::new();
        while let Some((p, i, fwd)) = tree[v as usize] {
            up.push((i, !fwd));
            v = p;
        }
        up
    };
    let mut gens: Vec<Vec<u32>> = Vec::new();
    for (i, e) in xs.edges.iter().enumerate() {
        let (a, b) = ends(e);
        if !seen[a as usize] || !seen[b as usize] {
            continue;
        }
        let is_tree = tree
            .iter()
            .any(|t| matches!(t, Some((_, j, _)) if *j == i));
        if is_tree {
            continue;
        }
        // Loop: base -> a, edge i, b -> base, pushed through h.
        let mut down: Vec<(usize, bool)> = tree_word_to_root(a)
            .into_iter()
            .map(|(j, f)| (j, !f))
            .collect();
        down.reverse();
        let mut loop_edges = down;
        loop_edges.push((i, true));
        loop_edges.extend(tree_word_to_root(b));
        let mut word = Vec::new();
        for (j, fwd) in loop_edges {
            word.extend(h_of(j, fwd));
        }
        let word = free_reduce(word);
        if word.is_empty() {
            continue;
        }
        // Exact fixedness under the power map.
        let image = map_word(&gp.images, &word);
        if image != word {
            return Err(Error::Internal(format!(
                "generator {} is not fixed by the power map",
                word_tokens(gp, &word)
            )));
        }
        if !gens.contains(&word) {
            gens.push(word);
        }
    }
    let mut out: Vec<String> = gens.iter().map(|w| word_tokens(gp, w)).collect();
    out.sort();
    Ok(out)
}

pub fn word_tokens(gp: &AbsMap, w: &[u32]) -> String {
    w.iter()
        .map(|&x| gp.token(x))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parse a whitespace word over the subdivided graph's edge tokens.
pub fn parse_word(gp: &AbsMap, s: &str) -> Result<Vec<u32>> {
    s.split_whitespace().map(|t| gp.edge_by_token(t)).collect()
}

/// Membership in the subgroup generated by `gens`, by folding the wedge of
/// the generators and tracing the word.
pub fn subgroup_contains(gp: &AbsMap, gens: &[Vec<u32>], word: &[u32]) -> bool {
    // Stallings graph: vertices, edges labeled by oriented Gamma' letters.
    #[derive(Default)]
    struct Folded {
        // adjacency: vertex -> (label -> vertex)
        next: Vec<HashMap<u32, u32>>,
    }
    let mut f = Folded {
        next: vec![HashMap::new()],
    };
    let add_path = |f: &mut Folded, start: u32, w: &[u32]| -> u32 {
        let mut at = start;
        for &x in w {
            let to = match f.next[at as usize].get(&x) {
                Some(&t) => t,
                None => {
                    let t = f.next.len() as u32;
                    f.next.push(HashMap::new());
                    f.next[at as usize].insert(x, t);
                    f.next[t as usize].insert(x ^ 1, at);
                    t
                }
            };
            at = to;
        }
        at
    };
    for gen in gens {
        let end = add_path(&mut f, 0, &gen[..gen.len().saturating_sub(1)]);
        // Close the loop with the final letter: identify its target with 0.
        if let Some(&last) = gen.last() {
            // Add edge end --last--> 0, then fold to completion.
            if let Some(&t) = f.next[end as usize].get(&last) {
                // Identify t with 0 by folding below.
                if t != 0 {
                    merge(&mut f.next, t, 0);
                }
            } else {
                f.next[end as usize].insert(last, 0);
                f.next[0].insert(last ^ 1, end);
            }
        }
        fold(&mut f.next);
    }
    fn merge(next: &mut Vec<HashMap<u32, u32>>, a: u32, b: u32) {
        // Redirect all of a's edges into b.
        let moved: Vec<(u32, u32)> = next[a as usize].drain().collect();
        for (lab, to) in moved {
            let to = if to == a { b } else { to };
            if let Some(&existing) = next[b as usize].get(&lab) {
                if existing != to {
                    merge(next, existing.max(to), existing.min(to));
                }
            } else {
                next[b as usize].insert(lab, to);
                next[to as usize].insert(lab ^ 1, b);
            }
        }
        // Fix dangling references to a.
        for row in next.iter_mut() {
            for v in row.values_mut() {
                if *v == a {
                    *v = b;
                }
            }
        }
    }
    fn fold(next: &mut Vec<HashMap<u32, u32>>) {
        loop {
            let mut clash = None;
            'scan: for (v, row) in next.iter().enumerate() {
                let mut seen: HashMap<u32, u32> = HashMap::new();
                for (&lab, &to) in row.iter() {
                    if let Some(&other) = seen.get(&lab) {
                        if other != to {
                            clash = Some((v as u32, lab, to, other));
                            break 'scan;
                        }
                    }
                    seen.insert(lab, to);
                }
            }
            match clash {
                Some((_, _, a, b)) => merge(next, a.max(b), a.min(b)),
                None => break,
            }
        }
    }
    let _ = gp;
    // Trace the word.
    let mut at = 0u32;
    for &x in word {
        match f.next[at as usize].get(&x) {
            Some(&t) => at = t,
            None => return false,
        }
    }
    at == 0
}

/// Verify the twisted-lift case: given a representative differing from a
/// base lift by conjugation with `w`, its fixed subgroup is cyclic generated
/// by `w` provided `w` is fixed by the base lift.
pub fn certify_twisted_fix(xs: &XStar, w: &[u32]) -> Result<bool> {
    let image = map_word(&xs.graph.images, &free_reduce(w.to_vec()));
    Ok(image == free_reduce(w.to_vec()) && !w.is_empty())
}

/// How a conjugacy class sits with respect to the map.
#[derive(Debug, Clone, Serialize)]
pub enum FixKind {
    /// Represented by a loop inside a vertex space; delegated to the vertex
    /// dynamics.
    VertexSpace { space: String },
    /// A cyclically legal concatenation of INP pieces and connecting paths.
    InpConcatenation {
        pieces: Vec<usize>,
        /// Cyclic shift induced by the map itself, when the class is fixed.
        shift: Option<usize>,
        /// Least power acting as a cyclic permutation, when detected.
        period: Option<u32>,
    },
    NotPeriodic,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixCertificate {
    pub kind: FixKind,
    pub legalize_exponent: u32,
}

/// Classify the conjugacy class of a loop: contained in a vertex space,
/// periodic/fixed (an INP concatenation), or neither.
pub fn classify_conjugacy_class(
    sess: &Session,
    inps: &InpSet,
    loop_path: &ClosedPath,
) -> Result<FixCertificate> {
    let g = &sess.sys.graph;
    let reduced = match crate::gos::reduce_closed(g, loop_path)? {
        ReducedClosed::Closed(c) => c,
        ReducedClosed::VertexLoop { space, .. } => {
            return Ok(FixCertificate {
                kind: FixKind::VertexSpace {
                    space: g.space(space)?.name.clone(),
                },
                legalize_exponent: 0,
            })
        }
    };
    let (t, dec, final_loop) = legalize_closed(sess, inps, &reduced)?;
    if dec.occurrences.is_empty() {
        // Legal loop under an expanding map: grows without bound.
        return Ok(FixCertificate {
            kind: FixKind::NotPeriodic,
            legalize_exponent: t,
        });
    }
    // Periodic iff the decomposition is INP pieces and connectors only:
    // consecutive occurrences must touch, leaving no legal edge segment of
    // positive length between them.
    let n = final_loop.len() as i64;
    let k = dec.occurrences.len();
    for i in 0..k {
        let cur = &dec.occurrences[i];
        let (next_start, next_off) = if i + 1 < k {
            (dec.occurrences[i + 1].start_edge, dec.occurrences[i + 1].start)
        } else {
            (dec.occurrences[0].start_edge + n, dec.occurrences[0].start)
        };
        let gap = next_start - cur.end_edge - 1;
        let touches = if gap > 0 {
            false
        } else if gap == 0 {
            // Adjacent edges: the first must run to its far vertex and the
            // next must start at its near vertex.
            cur.end == crate::inp::Offset::End && next_off == crate::inp::Offset::Start
        } else {
            // Shared edge: the endpoints must be the same point.
            let edge = final_loop.edges[(cur.end_edge.rem_euclid(n)) as usize];
            crate::inp::cmp_offsets(sess, edge, cur.end, next_off)? == std::cmp::Ordering::Equal
        };
        if !touches {
            return Ok(FixCertificate {
                kind: FixKind::NotPeriodic,
                legalize_exponent: t,
            });
        }
    }
    // Fixed: the image loop equals the loop up to rotation.
    let image = iterate_closed(sess, &final_loop, 1)?;
    let shift = rotation_match(&final_loop, &image).map(|r| {
        dec.occurrences
            .iter()
            .filter(|o| (o.junction as i64) < r)
            .count()
    });
    // Periodic: some small power acts as a rotation.
    let mut period = None;
    if shift.is_some() {
        period = Some(1);
    } else {
        let mut cur = final_loop.clone();
        for kpow in 1..=sess.caps.max_power {
            cur = iterate_closed(sess, &cur, 1)?;
            if rotation_match(&final_loop, &cur).is_some() {
                period = Some(kpow);
                break;
            }
        }
    }
    Ok(FixCertificate {
        kind: FixKind::InpConcatenation {
            pieces: dec.occurrences.iter().map(|o| o.record).collect(),
            shift,
            period,
        },
        legalize_exponent: t,
    })
}

fn iterate_closed(sess: &Session, c: &ClosedPath, t: u32) -> Result<ClosedPath> {
    let g = &sess.sys.graph;
    let mut cur = c.clone();
    for _ in 0..t {
        let mut edges = Vec::new();
        let mut conns = Vec::new();
        for (i, &e) in cur.edges.iter().enumerate() {
            let img = sess.sys.map.edge_image(e);
            for (k, &x) in img.edges.iter().enumerate() {
                edges.push(x);
                if k + 1 < img.edges.len() {
                    conns.push(img.conns[k].clone());
                }
            }
            conns.push(sess.sys.map.map_local(&cur.conns[i]));
        }
        cur = match crate::gos::reduce_closed(g, &ClosedPath { edges, conns })? {
            ReducedClosed::Closed(c) => c,
            ReducedClosed::VertexLoop { .. } => {
                return Err(Error::Internal("loop collapsed into a vertex space".into()))
            }
        };
    }
    Ok(cur)
}

/// Rotation `r` with `rotate(a, r) == b`, if any.
fn rotation_match(a: &ClosedPath, b: &ClosedPath) -> Option<i64> {
    if a.len() != b.len() {
        return None;
    }
    for r in 0..a.len() {
        if &a.rotated(r) == b {
            // rotate moves index r to the front.
            return Some(r as i64);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gos::parse_closed_path;

    fn fixture_a_abs() -> AbsMap {
        let sys = System::rose(
            &["a", "b", "c", "d", "e", "f"],
            &[
                ("a", "b a c c d d e e f f"),
                ("b", "a"),
                ("c", "a c"),
                ("d", "d a"),
                ("e", "a e"),
                ("f", "f a"),
            ],
        )
        .unwrap();
        AbsMap::from_system(&sys).unwrap()
    }

    #[test]
    fn xstar_fixture_a() {
        let map = fixture_a_abs();
        let xs = build_xstar(&map, &Caps::default()).unwrap();
        assert_eq!(xs.power_used, 1);
        // The interior INP endpoints force one subdivision inside edge a.
        assert_eq!(xs.subdivisions.len(), 1);
        assert_eq!(xs.subdivisions[0].edge, "a");
        assert_eq!(xs.subdivisions[0].positions, vec![2]);
        // No fixed edges; one X* edge per INP record.
        let fixed_edges = xs
            .edges
            .iter()
            .filter(|e| matches!(e, XEdge::Fixed { .. }))
            .count();
        assert_eq!(fixed_edges, 0);
        let inp_edges = xs
            .edges
            .iter()
            .filter(|e| matches!(e, XEdge::Inp { .. }))
            .count();
        assert_eq!(inp_edges, xs.inp_words.len());
        assert!(inp_edges >= 2);
    }

    #[test]
    fn generators_fixture_a() {
        let map = fixture_a_abs();
        let xs = build_xstar(&map, &Caps::default()).unwrap();
        let gens = fixed_subgroup_generators(&xs, "v").unwrap();
        // Exactly the two independent fixed words; the extra INP edges hang
        // off the subdivision vertex and contribute nothing new.
        assert_eq!(gens, vec!["C e".to_string(), "d F".to_string()]);
        // Subgroup membership test agrees.
        let words: Vec<Vec<u32>> = gens
            .iter()
            .map(|g| parse_word(&xs.graph, g).unwrap())
            .collect();
        for target in ["C e", "d F", "C e d F", "E c f D"] {
            let w = parse_word(&xs.graph, target).unwrap();
            assert!(subgroup_contains(&xs.graph, &words, &w), "{target}");
        }
        let outside = parse_word(&xs.graph, "b").unwrap();
        assert!(!subgroup_contains(&xs.graph, &words, &outside));
    }

    #[test]
    fn xstar_mixed_fixture() {
        // a fixed loop, b exponential with no INPs: the component of the
        // vertex is the circle a, so the fixed subgroup is generated by a.
        let sys = System::rose(&["a", "b"], &[("a", "a"), ("b", "b a b")]).unwrap();
        let map = AbsMap::from_system(&sys).unwrap();
        let xs = build_xstar(&map, &Caps::default()).unwrap();
        assert_eq!(xs.power_used, 1);
        assert!(xs.inp_words.is_empty());
        let gens = fixed_subgroup_generators(&xs, "v").unwrap();
        assert_eq!(gens, vec!["a".to_string()]);
    }

    #[test]
    fn fibonacci_commutator_is_fixed_by_the_square() {
        // a -> ab, b -> a: the square fixes the commutator b^-1 a^-1 b a,
        // whose INP path the pipeline finds with period two.
        let sys = System::rose(&["a", "b"], &[("a", "a b"), ("b", "a")]).unwrap();
        let map = AbsMap::from_system(&sys).unwrap();
        let xs = build_xstar(&map, &Caps::default()).unwrap();
        assert_eq!(xs.power_used, 2);
        assert!(xs.subdivisions.is_empty());
        let gens = fixed_subgroup_generators(&xs, "v").unwrap();
        assert_eq!(gens, vec!["B A b a".to_string()]);
    }

    #[test]
    fn contractible_component_has_no_generators() {
        // Expanding injective map with no INPs and no periodic edges (all
        // image words have distinct first letters and distinct last letters,
        // so no non-degenerate turn ever degenerates): the augmented graph
        // is the vertex set alone.
        let sys = System::rose(&["a", "b"], &[("a", "a b"), ("b", "b b a")]).unwrap();
        let map = AbsMap::from_system(&sys).unwrap();
        let xs = build_xstar(&map, &Caps::default()).unwrap();
        let fixed_edges = xs
            .edges
            .iter()
            .filter(|e| matches!(e, XEdge::Fixed { .. }))
            .count();
        assert_eq!(fixed_edges, 0);
        assert!(xs.inp_words.is_empty(), "{:?}", xs.inp_words);
        let gens = fixed_subgroup_generators(&xs, "v").unwrap();
        assert!(gens.is_empty());
    }

    #[test]
    fn twisted_case_certificate() {
        let map = fixture_a_abs();
        let xs = build_xstar(&map, &Caps::default()).unwrap();
        let w = parse_word(&xs.graph, "C e").unwrap();
        assert!(certify_twisted_fix(&xs, &w).unwrap());
        let not_fixed = parse_word(&xs.graph, "b").unwrap();
        assert!(!certify_twisted_fix(&xs, &not_fixed).unwrap());
    }

    #[test]
    fn h_fstar_identity() {
        let map = fixture_a_abs();
        let xs = build_xstar(&map, &Caps::default()).unwrap();
        // Every X* edge is fixed, so h(f*(edge)) = h(edge) must equal the
        // reduced power-map image of h(edge).
        for e in &xs.edges {
            let h = match e {
                XEdge::Fixed { edge } => vec![*edge],
                XEdge::Inp { h_path, .. } => h_path.clone(),
            };
            assert_eq!(map_word(&xs.graph.images, &h), h);
        }
    }

    #[test]
    fn classify_fixture_a_loops() {
        let sys = System::rose(
            &["a", "b", "c", "d", "e", "f"],
            &[
                ("a", "b a c c d d e e f f"),
                ("b", "a"),
                ("c", "a c"),
                ("d", "d a"),
                ("e", "a e"),
                ("f", "f a"),
            ],
        )
        .unwrap();
        let sess = Session::new(&sys, Caps::default()).unwrap();
        let bounds = compute_bounds(&sess).unwrap();
        let inps = compute_inps(&sess, &bounds).unwrap();
        let g = &sess.sys.graph;
        // The INP loop is fixed with shift zero.
        let ce = parse_closed_path(g, "C e").unwrap();
        let cert = classify_conjugacy_class(&sess, &inps, &ce).unwrap();
        match cert.kind {
            FixKind::InpConcatenation { shift, period, ref pieces } => {
                assert_eq!(shift, Some(0));
                assert_eq!(period, Some(1));
                assert_eq!(pieces.len(), 1);
            }
            other => panic!("expected INP concatenation, got {other:?}"),
        }
        // A legal expanding loop is not periodic.
        let a = parse_closed_path(g, "a").unwrap();
        let cert = classify_conjugacy_class(&sess, &inps, &a).unwrap();
        assert!(matches!(cert.kind, FixKind::NotPeriodic));
        // Concatenation of the two INPs: f maps each piece to itself, so the
        // class is fixed with shift zero.
        let both = parse_closed_path(g, "C e d F").unwrap();
        let cert = classify_conjugacy_class(&sess, &inps, &both).unwrap();
        match cert.kind {
            FixKind::InpConcatenation { shift, ref pieces, .. } => {
                assert_eq!(pieces.len(), 2);
                assert_eq!(shift, Some(0));
            }
            other => panic!("expected INP concatenation, got {other:?}"),
        }
    }

    #[test]
    fn classify_vertex_space_loop() {
        use crate::gos::{AttachPoint, GosMorphism, GraphOfSpaces, LocalPath, VertexMap, VertexSpace};
        let mut sp = VertexSpace::new("v");
        sp.add_vertex("p").unwrap();
        sp.add_edge("x", "p", "p").unwrap();
        let mut g = GraphOfSpaces::new();
        let sid = g.add_space(sp).unwrap();
        let at = AttachPoint { space: sid, vertex: 0 };
        g.add_top_edge("b", at, at).unwrap();
        let x = LocalPath::new(&g, sid, 0, vec![0]).unwrap();
        let vm = VertexMap {
            target: sid,
            vertices: vec![0],
            edges: vec![x.clone(), x.reversed()],
        };
        let img = crate::gos::parse_edge_path(&g, "b {x} b").unwrap();
        let map = GosMorphism::new(&g, vec![vm], vec![img]).unwrap();
        let sys = System::new(g, map).unwrap();
        let sess = Session::new(&sys, Caps::default()).unwrap();
        let bounds = compute_bounds(&sess).unwrap();
        let inps = compute_inps(&sess, &bounds).unwrap();
        // Loop of the local edge: a vertex-space class. Encode it as the
        // closed top-edge path b . x . b^-1 reduced... simplest: b B is not
        // reduced; use the wrap connector on a length-one loop? A loop
        // within the vertex space cannot be written as a top-edge loop, so
        // feed the zero-loop via the closed path "b {x} B" wait that reduces
        // into the space. Use exactly that.
        let lp = crate::gos::parse_closed_path(&sys.graph, "b {x} B").unwrap();
        let cert = classify_conjugacy_class(&sess, &inps, &lp).unwrap();
        assert!(matches!(cert.kind, FixKind::VertexSpace { .. }));
        // The top loop b itself is not periodic.
        let lb = crate::gos::parse_closed_path(&sys.graph, "b").unwrap();
        let cert = classify_conjugacy_class(&sess, &inps, &lb).unwrap();
        assert!(matches!(cert.kind, FixKind::NotPeriodic));
    }
}
