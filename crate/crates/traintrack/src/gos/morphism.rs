//! Graph-of-spaces self-maps: per-space graph maps plus top-edge images.

use super::graph::{GraphOfSpaces, LocalEdge, OEdge, SpaceId};
use super::path::{reduce, EdgePath, LocalPath, ReducedPath};
use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::RwLock;

/// The graph map induced on one vertex space.
#[derive(Debug, Clone)]
pub struct VertexMap {
    pub target: SpaceId,
    /// Image of each local vertex.
    pub vertices: Vec<u32>,
    /// Image of each oriented local edge, as a reduced local path in the
    /// target space. Reverse orientations are stored consistently.
    pub edges: Vec<LocalPath>,
}

/// A graph-of-spaces morphism. Edge images of reverse orientations are the
/// reverses of the forward images; every image has length >= 1.
#[derive(Debug, Clone)]
pub struct GosMorphism {
    pub space_map: Vec<SpaceId>,
    pub vertex_maps: Vec<VertexMap>,
    /// Indexed by oriented top edge.
    edge_images: Vec<EdgePath>,
}

impl GosMorphism {
    /// Assemble from forward edge images; reverse images are derived.
    pub fn new(
        g: &GraphOfSpaces,
        vertex_maps: Vec<VertexMap>,
        forward_images: Vec<EdgePath>,
    ) -> Result<Self> {
        if vertex_maps.len() != g.space_count() {
            return Err(Error::Structural(
                "morphism must assign a vertex map to every space".into(),
            ));
        }
        if forward_images.len() * 2 != g.oriented_top_count() {
            return Err(Error::Structural(
                "morphism must assign an image to every top edge".into(),
            ));
        }
        let space_map = vertex_maps.iter().map(|m| m.target).collect::<Vec<_>>();
        let mut edge_images = Vec::with_capacity(2 * forward_images.len());
        for img in forward_images {
            edge_images.push(img.clone());
            edge_images.push(img.reversed());
        }
        let m = GosMorphism {
            space_map,
            vertex_maps,
            edge_images,
        };
        m.check(g)?;
        Ok(m)
    }

    /// Endpoint compatibility of all images with the vertex maps.
    fn check(&self, g: &GraphOfSpaces) -> Result<()> {
        for (sid, vm) in self.vertex_maps.iter().enumerate() {
            let sp = g.space(SpaceId(sid as u32))?;
            let tgt = g.space(vm.target)?;
            if vm.vertices.len() != sp.vertex_count() {
                return Err(Error::Structural(format!(
                    "vertex map for space {:?} misses vertices",
                    sp.name
                )));
            }
            for &v in &vm.vertices {
                if v as usize >= tgt.vertex_count() {
                    return Err(Error::Structural(format!(
                        "vertex map for space {:?} hits a missing target vertex",
                        sp.name
                    )));
                }
            }
            if vm.edges.len() != sp.oriented_edge_count() {
                return Err(Error::Structural(format!(
                    "vertex map for space {:?} misses local edges",
                    sp.name
                )));
            }
            for le in 0..sp.oriented_edge_count() as LocalEdge {
                let img = &vm.edges[le as usize];
                if img.space != vm.target
                    || img.from != vm.vertices[sp.ledge_from(le) as usize]
                    || img.to != vm.vertices[sp.ledge_to(le) as usize]
                {
                    return Err(Error::Structural(format!(
                        "image of local edge {} in space {:?} has wrong endpoints",
                        sp.ledge_token(le),
                        sp.name
                    )));
                }
                if vm.edges[(le ^ 1) as usize] != img.reversed() {
                    return Err(Error::Structural(format!(
                        "local edge images in space {:?} do not respect the involution",
                        sp.name
                    )));
                }
            }
        }
        for e in g.oriented_tops() {
            let img = &self.edge_images[e.0 as usize];
            img.check(g)?;
            if self.edge_images[e.rev().0 as usize] != img.reversed() {
                return Err(Error::Structural(
                    "top edge images do not respect the involution".into(),
                ));
            }
            let a = g.init(e);
            let fa = self.apply_point(a.space, a.vertex);
            let b = g.init(img.first());
            if fa != (b.space, b.vertex) {
                return Err(Error::Structural(format!(
                    "image of top edge {} does not start at the image of its attaching point",
                    g.top_token(e)
                )));
            }
        }
        Ok(())
    }

    pub fn apply_point(&self, space: SpaceId, vertex: u32) -> (SpaceId, u32) {
        let vm = &self.vertex_maps[space.0 as usize];
        (vm.target, vm.vertices[vertex as usize])
    }

    pub fn edge_image(&self, e: OEdge) -> &EdgePath {
        &self.edge_images[e.0 as usize]
    }

    /// Image of a local path, reduced (connecting paths are homotopy classes).
    pub fn map_local(&self, lp: &LocalPath) -> LocalPath {
        let vm = &self.vertex_maps[lp.space.0 as usize];
        let mut out = LocalPath::trivial(vm.target, vm.vertices[lp.from as usize]);
        for &s in &lp.steps {
            out = out
                .concat(&vm.edges[s as usize])
                .expect("vertex map endpoint compatibility");
        }
        out
    }

    /// The unreduced image of an edge path: concatenation of the edge images
    /// joined by the mapped connecting paths. Its length is the sum of the
    /// image lengths of the traversed edges.
    pub fn map_path(&self, g: &GraphOfSpaces, path: &EdgePath) -> Result<EdgePath> {
        let total: usize = path.edges.iter().map(|&e| self.edge_image(e).len()).sum();
        let mut edges = Vec::with_capacity(total);
        let mut conns = Vec::with_capacity(total.saturating_sub(1));
        for (i, &e) in path.edges.iter().enumerate() {
            if i > 0 {
                conns.push(self.map_local(&path.conns[i - 1]));
            }
            let img = self.edge_image(e);
            edges.extend_from_slice(&img.edges);
            conns.extend_from_slice(&img.conns);
        }
        let out = EdgePath { edges, conns };
        debug_assert!(out.check(g).is_ok());
        Ok(out)
    }
}

/// A graph of spaces together with a self-map, plus the memo caches the
/// pipeline shares. All operations treat the pair as immutable.
pub struct System {
    pub graph: GraphOfSpaces,
    pub map: GosMorphism,
    iterates: RwLock<HashMap<(OEdge, u32), std::sync::Arc<EdgePath>>>,
}

impl System {
    pub fn new(graph: GraphOfSpaces, map: GosMorphism) -> Result<Self> {
        if map.space_map.len() != graph.space_count() {
            return Err(Error::Structural("morphism does not match the graph".into()));
        }
        Ok(System {
            graph,
            map,
            iterates: RwLock::new(HashMap::new()),
        })
    }

    /// Convenience constructor: a rose with one point vertex space and the
    /// given edges and image words (edge-path grammar).
    pub fn rose(edges: &[&str], images: &[(&str, &str)]) -> Result<System> {
        use super::graph::{AttachPoint, VertexSpace};
        let mut sp = VertexSpace::new("v");
        sp.add_vertex("p")?;
        let mut g = GraphOfSpaces::new();
        let sid = g.add_space(sp)?;
        let at = AttachPoint {
            space: sid,
            vertex: 0,
        };
        for e in edges {
            g.add_top_edge(e, at, at)?;
        }
        let vm = VertexMap {
            target: sid,
            vertices: vec![0],
            edges: Vec::new(),
        };
        let mut imgs: HashMap<&str, &str> = images.iter().copied().collect();
        let mut forward = Vec::new();
        for e in edges {
            let w = imgs.remove(e).ok_or_else(|| {
                Error::Structural(format!("missing image for edge {e:?}"))
            })?;
            forward.push(super::grammar::parse_edge_path(&g, w)?);
        }
        if !imgs.is_empty() {
            return Err(Error::Structural("image given for unknown edge".into()));
        }
        let map = GosMorphism::new(&g, vec![vm], forward)?;
        System::new(g, map)
    }

    /// Memoized `f^t(e)`, materialized, with a length cap. The cache is
    /// filled idempotently; concurrent fills of the same key agree.
    pub fn iterate_edge_image(&self, e: OEdge, t: u32, max_len: u128) -> Result<std::sync::Arc<EdgePath>> {
        if t == 0 {
            return Err(Error::Domain("iterate_edge_image needs t >= 1".into()));
        }
        if let Some(hit) = self.iterates.read().unwrap().get(&(e, t)) {
            return Ok(hit.clone());
        }
        let result = if t == 1 {
            self.map.edge_image(e).clone()
        } else {
            let prev = self.iterate_edge_image(e, t - 1, max_len)?;
            let img = self.map.map_path(&self.graph, &prev)?;
            if img.len() as u128 > max_len {
                return Err(Error::Capacity {
                    cap: "max_image_len",
                    limit: max_len,
                });
            }
            img
        };
        if result.len() as u128 > max_len {
            return Err(Error::Capacity {
                cap: "max_image_len",
                limit: max_len,
            });
        }
        let arc = std::sync::Arc::new(result);
        self.iterates
            .write()
            .unwrap()
            .entry((e, t))
            .or_insert_with(|| arc.clone());
        Ok(self.iterates.read().unwrap().get(&(e, t)).unwrap().clone())
    }

    /// Materialized `f^t(path)` (unreduced), with a cap.
    pub fn iterate_path(&self, path: &EdgePath, t: u32, max_len: u128) -> Result<EdgePath> {
        if t == 0 {
            return Ok(path.clone());
        }
        let mut total: u128 = 0;
        for &e in &path.edges {
            total += self.iterate_edge_image(e, t, max_len)?.len() as u128;
            if total > max_len {
                return Err(Error::Capacity {
                    cap: "max_image_len",
                    limit: max_len,
                });
            }
        }
        let conn_power = |lp: &LocalPath| -> LocalPath {
            let mut cur = lp.clone();
            for _ in 0..t {
                cur = self.map.map_local(&cur);
            }
            cur
        };
        let mut edges = Vec::with_capacity(total as usize);
        let mut conns = Vec::with_capacity(total as usize);
        for (i, &e) in path.edges.iter().enumerate() {
            if i > 0 {
                conns.push(conn_power(&path.conns[i - 1]));
            }
            let img = self.iterate_edge_image(e, t, max_len)?;
            edges.extend_from_slice(&img.edges);
            conns.extend_from_slice(&img.conns);
        }
        Ok(EdgePath { edges, conns })
    }

    /// `[f^t(path)]`: map and reduce.
    pub fn reduced_iterate(&self, path: &EdgePath, t: u32, max_len: u128) -> Result<ReducedPath> {
        let img = self.iterate_path(path, t, max_len)?;
        reduce(&self.graph, &img)
    }
}

impl std::fmt::Debug for System {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("System").finish_non_exhaustive()
    }
}
