//! Shared fixtures and helpers for the integration suites.
#![allow(dead_code)]

use traintrack::gos::{
    format_edge_path, parse_edge_path, reduce, EdgePath, LocalPath, OEdge, ReducedPath, System,
};
use traintrack::{Caps, Session};

pub fn fixture_a() -> System {
    System::rose(
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
    .unwrap()
}

pub fn fixture_b() -> System {
    System::rose(&["a", "b"], &[("a", "a b"), ("b", "a")]).unwrap()
}

/// The relative fixture: one essential circle vertex space, one top edge
/// with image b {x} b.
pub fn fixture_c() -> System {
    use traintrack::gos::{AttachPoint, GosMorphism, GraphOfSpaces, VertexMap, VertexSpace};
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
    let img = parse_edge_path(&g, "b {x} b").unwrap();
    let map = GosMorphism::new(&g, vec![vm], vec![img]).unwrap();
    System::new(g, map).unwrap()
}

pub fn session(sys: &System) -> Session<'_> {
    Session::new(sys, Caps::default()).unwrap()
}

pub fn path(sys: &System, s: &str) -> EdgePath {
    parse_edge_path(&sys.graph, s).unwrap()
}

pub fn fmt(sys: &System, p: &EdgePath) -> String {
    format_edge_path(&sys.graph, p)
}

/// Materialized reduced iterate, as an oracle-side helper.
pub fn reduced_pow(sys: &System, p: &EdgePath, t: u32) -> Option<EdgePath> {
    let mut cur = p.clone();
    for _ in 0..t {
        let img = sys.map.map_path(&sys.graph, &cur).unwrap();
        cur = match reduce(&sys.graph, &img).unwrap() {
            ReducedPath::Edge(q) => q,
            ReducedPath::Zero(_) => return None,
        };
    }
    Some(cur)
}

/// A deterministic splitmix generator so the suites need no external seeds.
pub struct Rng(pub u64);

impl Rng {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }
}

/// Random reduced edge path over the oriented top edges of a rose.
pub fn random_reduced_word(sys: &System, rng: &mut Rng, len: usize) -> EdgePath {
    let n = sys.graph.oriented_top_count();
    let mut edges: Vec<OEdge> = Vec::new();
    while edges.len() < len {
        let e = OEdge(rng.below(n) as u32);
        if edges.last() == Some(&e.rev()) {
            continue;
        }
        edges.push(e);
    }
    let conns = edges
        .windows(2)
        .map(|w| {
            let t = sys.graph.term(w[0]);
            LocalPath::trivial(t.space, t.vertex)
        })
        .collect();
    EdgePath { edges, conns }
}
