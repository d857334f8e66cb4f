//! Stallings-folding machinery for the vertex-space graph maps: injectivity
//! on fundamental groups, unique lifting of connecting paths through the
//! fold factorization, and surjectivity of the induced map on the
//! fundamental group of the total graph.

use crate::gos::{LocalEdge, LocalPath, OEdge, SpaceId, System};
use crate::{Error, Result};
use std::collections::HashMap;

const COLLAPSED: u32 = u32::MAX;

/// A finite graph with labeled oriented edges; edge `i ^ 1` is the reverse of
/// edge `i` and carries the inverse label.
#[derive(Debug, Clone, Default)]
struct LabGraph {
    /// Per oriented edge: (origin vertex, label).
    edges: Vec<(u32, u32)>,
    vertex_count: u32,
}

impl LabGraph {
    fn add_vertex(&mut self) -> u32 {
        self.vertex_count += 1;
        self.vertex_count - 1
    }

    fn add_edge(&mut self, from: u32, to: u32, label: u32) -> u32 {
        let e = self.edges.len() as u32;
        let rlabel = if label == COLLAPSED { COLLAPSED } else { label ^ 1 };
        self.edges.push((from, label));
        self.edges.push((to, rlabel));
        e
    }

    fn oriented_count(&self) -> u32 {
        self.edges.len() as u32
    }

    fn from_vertex(&self, e: u32) -> u32 {
        self.edges[e as usize].0
    }

    fn to_vertex(&self, e: u32) -> u32 {
        self.edges[(e ^ 1) as usize].0
    }

    fn label(&self, e: u32) -> u32 {
        self.edges[e as usize].1
    }
}

/// Union-find over subdivided vertices carrying witness walks: `parent[u]`
/// holds the next vertex towards the root together with a trivial-image walk
/// realizing the identification.
#[derive(Debug, Default)]
struct WitnessClasses {
    parent: Vec<Option<(u32, Vec<u32>)>>,
}

impl WitnessClasses {
    fn new(n: usize) -> Self {
        WitnessClasses {
            parent: vec![None; n],
        }
    }

    fn find(&self, mut u: u32) -> u32 {
        while let Some((p, _)) = &self.parent[u as usize] {
            u = *p;
        }
        u
    }

    /// Walk (oriented subdivided edges) from `u` to its root; image trivial.
    fn walk_to_root(&self, mut u: u32) -> Vec<u32> {
        let mut out = Vec::new();
        while let Some((p, w)) = &self.parent[u as usize] {
            out.extend_from_slice(w);
            u = *p;
        }
        out
    }

    /// Walk from `u` to `v`, defined when they share a root.
    fn walk_between(&self, u: u32, v: u32) -> Option<Vec<u32>> {
        if self.find(u) != self.find(v) {
            return None;
        }
        let mut w = self.walk_to_root(u);
        let back = self.walk_to_root(v);
        w.extend(back.iter().rev().map(|&e| e ^ 1));
        Some(w)
    }

    /// Merge the classes of `u` and `v`; `walk` runs from `u` to `v` with
    /// trivial image. Returns false if they were already merged.
    fn union(&mut self, u: u32, v: u32, walk: Vec<u32>) -> bool {
        let ru = self.find(u);
        let rv = self.find(v);
        if ru == rv {
            return false;
        }
        // Witness from ru to rv: ru -> u -> v -> rv.
        let mut w: Vec<u32> = self
            .walk_to_root(u)
            .iter()
            .rev()
            .map(|&e| e ^ 1)
            .collect();
        w.extend(walk);
        w.extend(self.walk_to_root(v));
        self.parent[ru as usize] = Some((rv, w));
        true
    }
}

/// The fold factorization of one vertex-space graph map: the source is
/// subdivided so every edge maps to a single target edge or collapses, then
/// folded until the induced map to the target is an immersion.
#[derive(Debug)]
pub struct ImmersionFactorization {
    pub source: SpaceId,
    pub target: SpaceId,
    /// Whether the induced map on fundamental groups is injective. Folding
    /// never increases the first Betti number, and a surjection between free
    /// groups of equal finite rank is an isomorphism, so injectivity is
    /// equivalent to Betti preservation.
    pub injective: bool,
    pub source_betti: i64,
    pub folded_betti: i64,
    sub: LabGraph,
    classes: WitnessClasses,
    alive: Vec<bool>,
    /// Subdivided vertex of each original source vertex.
    source_vertex: Vec<u32>,
    /// Chain owner of each oriented subdivided edge:
    /// (source oriented local edge, position, chain length).
    owner: Vec<(LocalEdge, usize, usize)>,
}

/// Fold the graph map induced on vertex space `v`. Deterministic given the
/// input; results are pure data and safe to cache per space.
pub fn analyze_vertex_map(sys: &System, v: SpaceId) -> Result<ImmersionFactorization> {
    let g = &sys.graph;
    let sp = g.space(v)?;
    let vm = &sys.map.vertex_maps[v.0 as usize];

    // Subdivide: one subdivided edge per step of each image path; trivial
    // images become single collapsed edges.
    let mut sub = LabGraph::default();
    let mut owner: Vec<(LocalEdge, usize, usize)> = Vec::new();
    let source_vertex: Vec<u32> = (0..sp.vertex_count()).map(|_| sub.add_vertex()).collect();
    for le in (0..sp.oriented_edge_count() as LocalEdge).step_by(2) {
        let img = &vm.edges[le as usize];
        let from = source_vertex[sp.ledge_from(le) as usize];
        let to = source_vertex[sp.ledge_to(le) as usize];
        let n = img.steps.len().max(1);
        let mut at = from;
        for i in 0..n {
            let next = if i + 1 == n { to } else { sub.add_vertex() };
            let label = img.steps.get(i).copied().unwrap_or(COLLAPSED);
            sub.add_edge(at, next, label);
            owner.push((le, i, n));
            owner.push((le ^ 1, n - 1 - i, n));
            at = next;
        }
    }

    let mut classes = WitnessClasses::new(sub.vertex_count as usize);
    let mut alive = vec![true; sub.oriented_count() as usize];

    // Collapse trivial-image edges.
    for e in (0..sub.oriented_count()).step_by(2) {
        if sub.label(e) == COLLAPSED {
            classes.union(sub.from_vertex(e), sub.to_vertex(e), vec![e]);
            alive[e as usize] = false;
            alive[(e ^ 1) as usize] = false;
        }
    }

    // Fold until no two live edges share origin class and label.
    loop {
        let mut by_key: HashMap<(u32, u32), u32> = HashMap::new();
        let mut folded_one = false;
        for e in 0..sub.oriented_count() {
            if !alive[e as usize] {
                continue;
            }
            let key = (classes.find(sub.from_vertex(e)), sub.label(e));
            match by_key.get(&key) {
                Some(&keep) => {
                    // Identify e with keep: to(e) ~ to(keep) via
                    // e^-1 . (from(e) -> from(keep)) . keep.
                    let mut walk = vec![e ^ 1];
                    walk.extend(
                        classes
                            .walk_between(sub.from_vertex(e), sub.from_vertex(keep))
                            .expect("same origin class"),
                    );
                    walk.push(keep);
                    classes.union(sub.to_vertex(e), sub.to_vertex(keep), walk);
                    alive[e as usize] = false;
                    alive[(e ^ 1) as usize] = false;
                    folded_one = true;
                    break;
                }
                None => {
                    by_key.insert(key, e);
                }
            }
        }
        if !folded_one {
            break;
        }
    }

    // Betti number of the folded graph: live unoriented edges, root vertices.
    let mut roots: HashMap<u32, u32> = HashMap::new();
    for u in 0..sub.vertex_count {
        let r = classes.find(u);
        let next = roots.len() as u32;
        roots.entry(r).or_insert(next);
    }
    let nv = roots.len();
    let mut dsu: Vec<u32> = (0..nv as u32).collect();
    fn find(p: &mut Vec<u32>, mut x: u32) -> u32 {
        while p[x as usize] != x {
            p[x as usize] = p[p[x as usize] as usize];
            x = p[x as usize];
        }
        x
    }
    let mut live_pairs = 0i64;
    let mut comps = nv as i64;
    for e in (0..sub.oriented_count()).step_by(2) {
        if !alive[e as usize] {
            continue;
        }
        live_pairs += 1;
        let a = find(&mut dsu, roots[&classes.find(sub.from_vertex(e))]);
        let b = find(&mut dsu, roots[&classes.find(sub.to_vertex(e))]);
        if a != b {
            dsu[a as usize] = b;
            comps -= 1;
        }
    }
    let folded_betti = live_pairs - nv as i64 + comps;
    let source_betti = sp.first_betti();

    Ok(ImmersionFactorization {
        source: v,
        target: vm.target,
        injective: source_betti == folded_betti,
        source_betti,
        folded_betti,
        sub,
        classes,
        alive,
        source_vertex,
        owner,
    })
}

impl ImmersionFactorization {
    /// Folded-graph Betti number (the folded graph immerses in the target).
    pub fn folded_rank(&self) -> i64 {
        self.folded_betti
    }

    /// Unique live continuation with the given label out of a vertex class.
    fn continuation(&self, class_root: u32, label: u32) -> Option<u32> {
        (0..self.sub.oriented_count()).find(|&e| {
            self.alive[e as usize]
                && self.sub.label(e) == label
                && self.classes.find(self.sub.from_vertex(e)) == class_root
        })
    }
}

/// The unique reduced connecting path `chi` in the source space from `p` to
/// `q` with `[f(chi)] = psi`, or None. Requires pi1-injectivity of the vertex
/// map (which is what makes the lift unique).
pub fn connecting_preimage(
    sys: &System,
    fact: &ImmersionFactorization,
    psi: &LocalPath,
    p: u32,
    q: u32,
) -> Result<Option<LocalPath>> {
    let g = &sys.graph;
    let sp = g.space(fact.source)?;
    if !fact.injective {
        return Err(Error::Hypothesis(format!(
            "vertex map on space {:?} is not pi1-injective",
            sp.name
        )));
    }
    let vm = &sys.map.vertex_maps[fact.source.0 as usize];
    if psi.space != vm.target {
        return Err(Error::Structural(
            "connecting path lives in the wrong target space".into(),
        ));
    }
    if vm.vertices[p as usize] != psi.from || vm.vertices[q as usize] != psi.to {
        return Ok(None);
    }

    // Lift psi through the immersion, assembling a subdivided walk with
    // trivial-image detours between representatives.
    let start = fact.source_vertex[p as usize];
    let goal = fact.source_vertex[q as usize];
    let mut walk: Vec<u32> = Vec::new();
    let mut at = start; // a subdivided vertex
    for &step in &psi.steps {
        let e = match fact.continuation(fact.classes.find(at), step) {
            Some(e) => e,
            None => return Ok(None),
        };
        match fact.classes.walk_between(at, fact.sub.from_vertex(e)) {
            Some(w) => walk.extend(w),
            None => return Err(Error::Internal("broken class witness".into())),
        }
        walk.push(e);
        at = fact.sub.to_vertex(e);
    }
    match fact.classes.walk_between(at, goal) {
        Some(w) => walk.extend(w),
        None => return Ok(None),
    }

    // Free reduction in the subdivided graph; interior chain vertices have
    // degree two, so the reduced walk traverses chains completely.
    let mut red: Vec<u32> = Vec::new();
    for e in walk {
        if red.last() == Some(&(e ^ 1)) {
            red.pop();
        } else {
            red.push(e);
        }
    }
    let chi = subdivided_to_source(sys, fact, p, q, &red)?;
    let image = sys.map.map_local(&chi);
    if &image != psi {
        return Err(Error::Internal(
            "lifted connecting path does not map to the requested path".into(),
        ));
    }
    Ok(Some(chi))
}

/// Convert a reduced subdivided walk back to source local edges.
fn subdivided_to_source(
    sys: &System,
    fact: &ImmersionFactorization,
    p: u32,
    q: u32,
    walk: &[u32],
) -> Result<LocalPath> {
    let g = &sys.graph;
    let mut steps: Vec<LocalEdge> = Vec::new();
    let mut i = 0usize;
    while i < walk.len() {
        let (le, pos, n) = fact.owner[walk[i] as usize];
        if pos != 0 {
            return Err(Error::Internal("reduced walk enters a chain mid-way".into()));
        }
        for k in 0..n {
            match walk.get(i + k) {
                Some(&ee) if fact.owner[ee as usize] == (le, k, n) => {}
                _ => return Err(Error::Internal("reduced walk leaves a chain mid-way".into())),
            }
        }
        steps.push(le);
        i += n;
    }
    let lp = LocalPath::new(g, fact.source, p, steps)?;
    if lp.to != q {
        return Err(Error::Internal("lifted path ends at the wrong vertex".into()));
    }
    Ok(lp)
}

/// Decide whether the induced endomorphism of the total graph's fundamental
/// group is surjective (hence an automorphism on a free group of finite
/// rank): fold the images of a free basis and check that the based core is
/// the full rose.
pub fn is_surjective_on_pi1(sys: &System) -> Result<bool> {
    let words = total_graph_basis_images(sys)?;
    let n = words.len();
    let mut graph = LabGraph::default();
    let base = graph.add_vertex();
    for w in &words {
        let mut at = base;
        for (i, &lab) in w.iter().enumerate() {
            let to = if i + 1 == w.len() { base } else { graph.add_vertex() };
            graph.add_edge(at, to, lab);
            at = to;
        }
    }
    let mut classes = WitnessClasses::new(graph.vertex_count as usize);
    let mut alive = vec![true; graph.oriented_count() as usize];
    loop {
        let mut by_key: HashMap<(u32, u32), u32> = HashMap::new();
        let mut folded_one = false;
        for e in 0..graph.oriented_count() {
            if !alive[e as usize] {
                continue;
            }
            let key = (classes.find(graph.from_vertex(e)), graph.label(e));
            match by_key.get(&key) {
                Some(&keep) => {
                    classes.union(graph.to_vertex(e), graph.to_vertex(keep), Vec::new());
                    alive[e as usize] = false;
                    alive[(e ^ 1) as usize] = false;
                    folded_one = true;
                    break;
                }
                None => {
                    by_key.insert(key, e);
                }
            }
        }
        if !folded_one {
            break;
        }
    }
    // Trim hanging trees away from the base point.
    let base_c = classes.find(base);
    let mut live: Vec<u32> = (0..graph.oriented_count())
        .step_by(2)
        .filter(|&e| alive[e as usize])
        .collect();
    loop {
        let mut incident: HashMap<u32, Vec<u32>> = HashMap::new();
        for &e in &live {
            incident
                .entry(classes.find(graph.from_vertex(e)))
                .or_default()
                .push(e);
            incident
                .entry(classes.find(graph.to_vertex(e)))
                .or_default()
                .push(e);
        }
        let mut drop = None;
        for (v, inc) in &incident {
            let loops = inc
                .iter()
                .filter(|&&e| {
                    classes.find(graph.from_vertex(e)) == classes.find(graph.to_vertex(e))
                })
                .count();
            let degree = inc.len() + loops; // loops count twice
            if *v != base_c && degree == 1 {
                drop = Some(inc[0]);
                break;
            }
        }
        match drop {
            Some(e) => live.retain(|&x| x != e),
            None => break,
        }
    }
    if live.len() != n {
        return Ok(false);
    }
    let mut labels = std::collections::HashSet::new();
    for &e in &live {
        if classes.find(graph.from_vertex(e)) != base_c
            || classes.find(graph.to_vertex(e)) != base_c
        {
            return Ok(false);
        }
        labels.insert(graph.label(e) & !1);
    }
    Ok(labels.len() == n)
}

/// Images of a free basis of the total graph under the map, as reduced words
/// over the basis (letter `2i` = generator `i`, `2i+1` its inverse).
fn total_graph_basis_images(sys: &System) -> Result<Vec<Vec<u32>>> {
    let g = &sys.graph;
    #[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
    enum TEdge {
        Local(u32, LocalEdge), // space, forward local edge
        Top(u32),              // forward top edge index
    }
    let mut vid: HashMap<(u32, u32), u32> = HashMap::new();
    let mut next_v = 0u32;
    for (sid, sp) in g.spaces() {
        for v in 0..sp.vertex_count() as u32 {
            vid.insert((sid.0, v), next_v);
            next_v += 1;
        }
    }
    let mut tedges: Vec<(TEdge, u32, u32)> = Vec::new();
    for (sid, sp) in g.spaces() {
        for le in (0..sp.oriented_edge_count() as LocalEdge).step_by(2) {
            tedges.push((
                TEdge::Local(sid.0, le),
                vid[&(sid.0, sp.ledge_from(le))],
                vid[&(sid.0, sp.ledge_to(le))],
            ));
        }
    }
    for e in g.forward_tops() {
        let a = g.init(e);
        let b = g.term(e);
        tedges.push((
            TEdge::Top(e.0),
            vid[&(a.space.0, a.vertex)],
            vid[&(b.space.0, b.vertex)],
        ));
    }
    let nv = next_v as usize;
    let mut tree: Vec<Option<(u32, usize, bool)>> = vec![None; nv];
    let mut seen = vec![false; nv];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0u32]);
    while let Some(v) = queue.pop_front() {
        for (i, &(_, a, b)) in tedges.iter().enumerate() {
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
    if seen.iter().any(|s| !s) {
        return Err(Error::Structural("total graph is not connected".into()));
    }
    let tree_edge: std::collections::HashSet<usize> = tree
        .iter()
        .flatten()
        .map(|&(_, i, _)| i)
        .collect();
    let mut gen_index: HashMap<usize, u32> = HashMap::new();
    for i in 0..tedges.len() {
        if !tree_edge.contains(&i) {
            let k = gen_index.len() as u32;
            gen_index.insert(i, k);
        }
    }
    let edge_lookup: HashMap<TEdge, usize> = tedges
        .iter()
        .enumerate()
        .map(|(i, &(te, _, _))| (te, i))
        .collect();
    // Image of one oriented total edge as a walk of (edge index, forward).
    let image_walk = |te: TEdge| -> Vec<(usize, bool)> {
        let mut walk = Vec::new();
        match te {
            TEdge::Local(sid, le) => {
                let img = &sys.map.vertex_maps[sid as usize].edges[le as usize];
                for &s in &img.steps {
                    walk.push((edge_lookup[&TEdge::Local(img.space.0, s & !1)], s % 2 == 0));
                }
            }
            TEdge::Top(e) => {
                let img = sys.map.edge_image(OEdge(e));
                for (k, &ee) in img.edges.iter().enumerate() {
                    if k > 0 {
                        let c = &img.conns[k - 1];
                        for &s in &c.steps {
                            walk.push((edge_lookup[&TEdge::Local(c.space.0, s & !1)], s % 2 == 0));
                        }
                    }
                    walk.push((edge_lookup[&TEdge::Top(ee.forward().0)], ee.is_forward()));
                }
            }
        }
        walk
    };
    let tree_path_to_root = |mut v: u32| -> Vec<(usize, bool)> {
        let mut up = Vec::new();
        while let Some((p, i, fwd)) = tree[v as usize] {
            up.push((i, !fwd));
            v = p;
        }
        up
    };
    let word_of_walk = |walk: &[(usize, bool)]| -> Vec<u32> {
        let mut w: Vec<u32> = Vec::new();
        for &(i, fwd) in walk {
            if let Some(&k) = gen_index.get(&i) {
                let letter = 2 * k + if fwd { 0 } else { 1 };
                if w.last() == Some(&(letter ^ 1)) {
                    w.pop();
                } else {
                    w.push(letter);
                }
            }
        }
        w
    };
    let mut gens: Vec<usize> = gen_index.keys().copied().collect();
    gens.sort_unstable();
    let mut words = Vec::new();
    for i in gens {
        let (_, a, b) = tedges[i];
        let mut down: Vec<(usize, bool)> = tree_path_to_root(a)
            .into_iter()
            .map(|(j, f)| (j, !f))
            .collect();
        down.reverse();
        let mut loop_walk = down;
        loop_walk.push((i, true));
        loop_walk.extend(tree_path_to_root(b));
        let mut img_walk = Vec::new();
        for (j, fwd) in loop_walk {
            let mut w = image_walk(tedges[j].0);
            if !fwd {
                w.reverse();
                for (_, f) in w.iter_mut() {
                    *f = !*f;
                }
            }
            img_walk.extend(w);
        }
        words.push(word_of_walk(&img_walk));
    }
    Ok(words)
}
