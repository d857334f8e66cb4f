//! Front end for absolute maps (plain finite-graph self-maps): growth
//! classification, the transition matrix and primitivity, per-vertex
//! Whitehead graphs, and the construction of the associated graph of spaces
//! whose vertex spaces are the polynomially growing components.

use crate::gos::{
    AttachPoint, EdgePath, GosMorphism, GraphOfSpaces, LocalPath, System, VertexMap, VertexSpace,
};
use crate::{Error, Result};
use serde::Serialize;
use std::collections::HashMap;

/// A combinatorial self-map of a finite graph. Oriented edge `i ^ 1` is the
/// reverse of `i`; images of reverse orientations are reversed words.
#[derive(Debug, Clone)]
pub struct AbsMap {
    pub vertex_names: Vec<String>,
    pub edge_names: Vec<String>, // per forward edge
    pub from: Vec<u32>,          // per oriented edge
    pub images: Vec<Vec<u32>>,   // per oriented edge, a word of oriented edges
    pub vertex_images: Vec<u32>,
}

impl AbsMap {
    pub fn oriented_count(&self) -> usize {
        self.from.len()
    }

    pub fn forward_count(&self) -> usize {
        self.edge_names.len()
    }

    pub fn to_vertex(&self, e: u32) -> u32 {
        self.from[(e ^ 1) as usize]
    }

    pub fn token(&self, e: u32) -> String {
        crate::gos::graph::edge_token(&self.edge_names[(e / 2) as usize], e % 2 == 1)
    }

    pub fn edge_by_token(&self, token: &str) -> Result<u32> {
        let lookup = |name: &str| -> Option<u32> {
            self.edge_names
                .iter()
                .position(|n| n == name)
                .map(|i| 2 * i as u32)
        };
        crate::gos::graph::resolve_token(token, lookup, |e| e ^ 1)
            .ok_or_else(|| Error::Parse(format!("unknown edge token {token:?}")))
    }

    /// Extract from an absolute system (every vertex space a point).
    pub fn from_system(sys: &System) -> Result<AbsMap> {
        let g = &sys.graph;
        if !g.is_absolute() {
            return Err(Error::Domain(
                "system has non-trivial vertex spaces".into(),
            ));
        }
        let vertex_names: Vec<String> = g.spaces().map(|(_, s)| s.name.clone()).collect();
        let mut edge_names = Vec::new();
        let mut from = Vec::new();
        for e in g.forward_tops() {
            edge_names.push(g.top_token(e));
            from.push(g.init(e).space.0);
            from.push(g.term(e).space.0);
        }
        let mut images = Vec::new();
        for e in g.oriented_tops() {
            images.push(sys.map.edge_image(e).edges.iter().map(|x| x.0).collect());
        }
        let vertex_images = (0..vertex_names.len() as u32)
            .map(|v| sys.map.space_map[v as usize].0)
            .collect();
        Ok(AbsMap {
            vertex_names,
            edge_names,
            from,
            images,
            vertex_images,
        })
    }

    /// Realize as a graph of spaces with a point vertex space per vertex.
    pub fn realize(&self) -> Result<System> {
        let mut g = GraphOfSpaces::new();
        for name in &self.vertex_names {
            let mut sp = VertexSpace::new(name);
            sp.add_vertex("p")?;
            g.add_space(sp)?;
        }
        for (i, name) in self.edge_names.iter().enumerate() {
            let e = 2 * i as u32;
            g.add_top_edge(
                name,
                AttachPoint {
                    space: crate::gos::SpaceId(self.from[e as usize]),
                    vertex: 0,
                },
                AttachPoint {
                    space: crate::gos::SpaceId(self.from[(e ^ 1) as usize]),
                    vertex: 0,
                },
            )?;
        }
        let mut vms = Vec::new();
        for v in 0..self.vertex_names.len() {
            vms.push(VertexMap {
                target: crate::gos::SpaceId(self.vertex_images[v]),
                vertices: vec![0],
                edges: Vec::new(),
            });
        }
        let mut forward = Vec::new();
        for i in 0..self.forward_count() {
            let word = &self.images[2 * i];
            if word.is_empty() {
                return Err(Error::Structural("edge image is empty".into()));
            }
            let edges: Vec<crate::gos::OEdge> =
                word.iter().map(|&x| crate::gos::OEdge(x)).collect();
            let conns = edges
                .windows(2)
                .map(|w| {
                    let t = g.term(w[0]);
                    LocalPath::trivial(t.space, t.vertex)
                })
                .collect();
            forward.push(EdgePath { edges, conns });
        }
        let map = GosMorphism::new(&g, vms, forward)?;
        System::new(g, map)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Growth {
    Polynomial,
    Exponential,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitionAnalysis {
    /// Entry `[i][j]`: crossings of unoriented edge `i` (in either direction)
    /// by the image of unoriented edge `j`.
    pub matrix: Vec<Vec<u64>>,
    pub primitive: bool,
    /// Least power with an entrywise positive matrix, when primitive.
    pub witness: Option<u32>,
    pub growth: Vec<Growth>,
    /// Strongly connected components of the crossing digraph, as sorted
    /// lists of unoriented edge indices.
    pub scc: Vec<Vec<usize>>,
}

pub fn transition_analysis(map: &AbsMap) -> TransitionAnalysis {
    let n = map.forward_count();
    let mut matrix = vec![vec![0u64; n]; n];
    for j in 0..n {
        for &x in &map.images[2 * j] {
            matrix[(x / 2) as usize][j] += 1;
        }
    }
    // Digraph: j -> i when f(j) crosses i.
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|j| (0..n).filter(|&i| matrix[i][j] > 0).collect())
        .collect();
    let scc = kosaraju(n, &adj);
    // An SCC keeps polynomial growth iff its induced submatrix is a
    // permutation matrix (or it is a single edge not crossing itself): for a
    // non-negative integer irreducible block, spectral radius <= 1 forces a
    // permutation.
    let mut comp_of = vec![0usize; n];
    for (ci, comp) in scc.iter().enumerate() {
        for &e in comp {
            comp_of[e] = ci;
        }
    }
    let comp_poly: Vec<bool> = scc
        .iter()
        .map(|comp| {
            if comp.len() == 1 && matrix[comp[0]][comp[0]] == 0 {
                return true;
            }
            comp.iter().all(|&j| {
                let col: u64 = comp.iter().map(|&i| matrix[i][j]).sum();
                let row: u64 = comp.iter().map(|&i| matrix[j][i]).sum();
                col == 1 && row == 1
            })
        })
        .collect();
    // Growth: exponential iff some reachable SCC is non-permutation.
    let mut growth = vec![Growth::Polynomial; n];
    for e in 0..n {
        let mut stack = vec![e];
        let mut seen = vec![false; n];
        seen[e] = true;
        let mut exp = false;
        while let Some(v) = stack.pop() {
            if !comp_poly[comp_of[v]] {
                exp = true;
                break;
            }
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if exp {
            growth[e] = Growth::Exponential;
        }
    }
    // Primitivity by boolean powers up to the Wielandt bound (n-1)^2 + 1.
    let bound = if n <= 1 { 2 } else { ((n - 1) * (n - 1) + 1) as u32 };
    let mut primitive = false;
    let mut witness = None;
    let base: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| matrix[i][j] > 0).collect())
        .collect();
    let mut power = base.clone();
    for k in 1..=bound {
        if power.iter().all(|row| row.iter().all(|&b| b)) {
            primitive = true;
            witness = Some(k);
            break;
        }
        // power = power * base (boolean).
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for l in 0..n {
                if power[i][l] {
                    for j in 0..n {
                        if base[l][j] {
                            next[i][j] = true;
                        }
                    }
                }
            }
        }
        power = next;
    }
    TransitionAnalysis {
        matrix,
        primitive,
        witness,
        growth,
        scc,
    }
}

fn kosaraju(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    fn dfs1(v: usize, adj: &[Vec<usize>], seen: &mut [bool], order: &mut Vec<usize>) {
        seen[v] = true;
        for &w in &adj[v] {
            if !seen[w] {
                dfs1(w, adj, seen, order);
            }
        }
        order.push(v);
    }
    for v in 0..n {
        if !seen[v] {
            dfs1(v, adj, &mut seen, &mut order);
        }
    }
    let mut radj = vec![Vec::new(); n];
    for (v, ws) in adj.iter().enumerate() {
        for &w in ws {
            radj[w].push(v);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for &v in order.iter().rev() {
        if comp[v] != usize::MAX {
            continue;
        }
        let ci = comps.len();
        let mut stack = vec![v];
        let mut members = Vec::new();
        comp[v] = ci;
        while let Some(x) = stack.pop() {
            members.push(x);
            for &w in &radj[x] {
                if comp[w] == usize::MAX {
                    comp[w] = ci;
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps
}

/// Build the graph of spaces whose vertex spaces are the connected
/// components of the polynomially growing subgraph (with all vertices), and
/// whose top edges are the exponentially growing edges.
pub fn to_graph_of_spaces(map: &AbsMap) -> Result<(System, TransitionAnalysis)> {
    let ta = transition_analysis(map);
    if !ta.growth.contains(&Growth::Exponential) {
        return Err(Error::Domain(
            "no exponentially growing edges: the construction degenerates".into(),
        ));
    }
    let nv = map.vertex_names.len();
    // Components of (polynomial edges + all vertices).
    let mut dsu: Vec<u32> = (0..nv as u32).collect();
    fn find(p: &mut Vec<u32>, mut x: u32) -> u32 {
        while p[x as usize] != x {
            p[x as usize] = p[p[x as usize] as usize];
            x = p[x as usize];
        }
        x
    }
    for i in 0..map.forward_count() {
        if ta.growth[i] == Growth::Polynomial {
            let a = find(&mut dsu, map.from[2 * i]);
            let b = find(&mut dsu, map.to_vertex(2 * i as u32));
            if a != b {
                dsu[a as usize] = b;
            }
        }
    }
    let mut comp_id: HashMap<u32, usize> = HashMap::new();
    for v in 0..nv as u32 {
        let r = find(&mut dsu, v);
        let next = comp_id.len();
        comp_id.entry(r).or_insert(next);
    }
    let ncomp = comp_id.len();
    let comp_of = |v: u32, dsu: &mut Vec<u32>| -> usize { comp_id[&find(dsu, v)] };

    let mut g = GraphOfSpaces::new();
    let mut spaces: Vec<VertexSpace> = (0..ncomp)
        .map(|c| VertexSpace::new(&format!("X{c}")))
        .collect();
    // Local vertices: original vertex names.
    let mut local_idx: Vec<u32> = vec![0; nv];
    let mut dsu2 = dsu.clone();
    for v in 0..nv as u32 {
        let c = comp_of(v, &mut dsu2);
        local_idx[v as usize] = spaces[c].add_vertex(&map.vertex_names[v as usize])?;
    }
    for i in 0..map.forward_count() {
        if ta.growth[i] == Growth::Polynomial {
            let a = map.from[2 * i];
            let c = comp_of(a, &mut dsu2);
            spaces[c].add_edge(
                &map.edge_names[i],
                &map.vertex_names[a as usize],
                &map.vertex_names[map.to_vertex(2 * i as u32) as usize],
            )?;
        }
    }
    for sp in spaces {
        g.add_space(sp)?;
    }
    let attach = |v: u32, dsu2: &mut Vec<u32>| -> AttachPoint {
        AttachPoint {
            space: crate::gos::SpaceId(comp_id[&find(dsu2, v)] as u32),
            vertex: local_idx[v as usize],
        }
    };
    // Top edges: exponential edges, in original order.
    let mut top_of: HashMap<usize, crate::gos::OEdge> = HashMap::new();
    for i in 0..map.forward_count() {
        if ta.growth[i] == Growth::Exponential {
            let e = g.add_top_edge(
                &map.edge_names[i],
                attach(map.from[2 * i], &mut dsu2),
                attach(map.to_vertex(2 * i as u32), &mut dsu2),
            )?;
            top_of.insert(i, e);
        }
    }
    // Vertex maps: induced on the polynomial part.
    let mut vms = Vec::new();
    for c in 0..ncomp {
        // Target component: image of any vertex in c.
        let mut target = None;
        let mut vertices = Vec::new();
        let sid = crate::gos::SpaceId(c as u32);
        let sp = g.space(sid)?;
        for v in 0..nv as u32 {
            if comp_of(v, &mut dsu2) == c {
                let tv = map.vertex_images[v as usize];
                let tc = comp_of(tv, &mut dsu2);
                match target {
                    None => target = Some(tc),
                    Some(t) if t == tc => {}
                    Some(_) => {
                        return Err(Error::Structural(
                            "polynomial part is not preserved componentwise".into(),
                        ))
                    }
                }
            }
        }
        let target = target.unwrap_or(c);
        let tsid = crate::gos::SpaceId(target as u32);
        let tsp = g.space(tsid)?;
        for v in 0..nv as u32 {
            if comp_of(v, &mut dsu2) == c {
                let tv = map.vertex_images[v as usize];
                // vertices indexed in local order: collect pairs then sort.
                vertices.push((local_idx[v as usize], local_idx[tv as usize]));
            }
        }
        vertices.sort_unstable();
        let vertices: Vec<u32> = vertices.into_iter().map(|(_, t)| t).collect();
        // Local edges: images must stay in the polynomial part.
        let mut ledges = Vec::new();
        for le in 0..sp.oriented_edge_count() as u32 {
            if le % 2 == 1 {
                continue;
            }
            let token = sp.ledge_token(le);
            let orig = map.edge_by_token(&token)?;
            let word = &map.images[orig as usize];
            let mut steps = Vec::new();
            for &x in word {
                if ta.growth[(x / 2) as usize] == Growth::Exponential {
                    return Err(Error::Structural(
                        "polynomial edge image crosses an exponential edge".into(),
                    ));
                }
                let tok = map.token(x);
                steps.push(tsp.ledge_by_token(&tok)?);
            }
            let start = map.from[orig as usize];
            let lp = LocalPath::new(
                &g,
                tsid,
                local_idx[map.vertex_images[start as usize] as usize],
                steps,
            )?;
            ledges.push(lp.clone());
            ledges.push(lp.reversed());
        }
        vms.push(VertexMap {
            target: tsid,
            vertices,
            edges: ledges,
        });
    }
    // Top edge images: rebracket the image word into top edges joined by
    // maximal polynomial runs as connectors.
    let mut forward = Vec::new();
    for i in 0..map.forward_count() {
        if ta.growth[i] != Growth::Exponential {
            continue;
        }
        let word = &map.images[2 * i];
        let mut edges: Vec<crate::gos::OEdge> = Vec::new();
        let mut conns: Vec<LocalPath> = Vec::new();
        let mut run: Vec<u32> = Vec::new();
        let mut at = map.vertex_images[map.from[2 * i] as usize];
        for &x in word {
            if ta.growth[(x / 2) as usize] == Growth::Exponential {
                let sid = crate::gos::SpaceId(comp_of(at, &mut dsu2) as u32);
                let sp2 = g.space(sid)?;
                let steps: Result<Vec<u32>> = run
                    .iter()
                    .map(|&l| sp2.ledge_by_token(&map.token(l)))
                    .collect();
                let conn = LocalPath::new(&g, sid, local_idx[at as usize], steps?)?;
                let run_end = run
                    .last()
                    .map(|&l| map.to_vertex(l))
                    .unwrap_or(at);
                if !edges.is_empty() {
                    conns.push(conn);
                } else if !run.is_empty() {
                    return Err(Error::Structural(
                        "exponential edge image starts with a polynomial run".into(),
                    ));
                }
                run.clear();
                let te = top_of[&((x / 2) as usize)];
                edges.push(if x % 2 == 0 { te } else { te.rev() });
                at = map.to_vertex(x);
                let _ = run_end;
            } else {
                run.push(x);
                at = map.to_vertex(x);
            }
        }
        if !run.is_empty() {
            return Err(Error::Structural(
                "exponential edge image ends with a polynomial run".into(),
            ));
        }
        forward.push(EdgePath { edges, conns });
    }
    let morphism = GosMorphism::new(&g, vms, forward)?;
    let sys = System::new(g, morphism)?;
    Ok((sys, ta))
}

/// Per-vertex Whitehead graph: nodes are the directions at the vertex, arcs
/// are the turns taken there by the closure (under the induced turn map) of
/// the turns used by all edge images.
#[derive(Debug, Clone, Serialize)]
pub struct WhiteheadGraph {
    pub vertex: String,
    /// Directions (oriented edge tokens with this initial vertex).
    pub nodes: Vec<String>,
    /// Arcs as pairs of direction tokens.
    pub arcs: Vec<(String, String)>,
    pub connected: bool,
}

pub fn whitehead_graphs(map: &AbsMap) -> Vec<WhiteheadGraph> {
    // Turns as ordered pairs (a, b): the path a . b. Collect the turns used
    // by images and close under the induced map.
    let mut turns: std::collections::HashSet<(u32, u32)> = std::collections::HashSet::new();
    let canon = |a: u32, b: u32| -> (u32, u32) {
        let r = (b ^ 1, a ^ 1);
        if r < (a, b) {
            r
        } else {
            (a, b)
        }
    };
    for w in &map.images {
        for pair in w.windows(2) {
            turns.insert(canon(pair[0], pair[1]));
        }
    }
    loop {
        let mut added = false;
        for &(a, b) in turns.clone().iter() {
            let ia = *map.images[a as usize].last().unwrap();
            let ib = map.images[b as usize][0];
            if turns.insert(canon(ia, ib)) {
                added = true;
            }
        }
        if !added {
            break;
        }
    }
    let nv = map.vertex_names.len();
    let mut out = Vec::new();
    for v in 0..nv as u32 {
        let dirs: Vec<u32> = (0..map.oriented_count() as u32)
            .filter(|&e| map.from[e as usize] == v)
            .collect();
        let mut arcs = Vec::new();
        let mut dsu: HashMap<u32, u32> = dirs.iter().map(|&d| (d, d)).collect();
        fn find(dsu: &mut HashMap<u32, u32>, mut x: u32) -> u32 {
            while dsu[&x] != x {
                let nx = dsu[&dsu[&x]];
                dsu.insert(x, nx);
                x = nx;
            }
            x
        }
        for &(a, b) in &turns {
            // The turn a . b joins directions rev(a) and b at term(a).
            if map.to_vertex(a) == v {
                let d1 = a ^ 1;
                let d2 = b;
                arcs.push((map.token(d1), map.token(d2)));
                let ra = find(&mut dsu, d1);
                let rb = find(&mut dsu, d2);
                if ra != rb {
                    dsu.insert(ra, rb);
                }
            }
        }
        arcs.sort();
        arcs.dedup();
        let connected = if dirs.is_empty() {
            true
        } else {
            let r0 = find(&mut dsu, dirs[0]);
            dirs.iter().all(|&d| find(&mut dsu, d) == r0)
        };
        let mut nodes: Vec<String> = dirs.iter().map(|&d| map.token(d)).collect();
        nodes.sort();
        out.push(WhiteheadGraph {
            vertex: map.vertex_names[v as usize].clone(),
            nodes,
            arcs,
            connected,
        });
    }
    out
}
