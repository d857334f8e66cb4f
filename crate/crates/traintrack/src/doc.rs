//! The JSON document format for systems, and its translation to the internal
//! model. A rose shorthand covers the common one-vertex absolute case.

use crate::gos::{
    parse_edge_path, parse_local_path, AttachPoint, EdgePath, GosMorphism, GraphOfSpaces,
    LocalPath, System, VertexMap, VertexSpace,
};
use crate::{Caps, Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct SystemDocument {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub vertex_spaces: BTreeMap<String, SpaceDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub top_edges: Vec<TopEdgeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morphism: Option<MorphismDoc>,
    /// Shorthand: a one-point-space rose with plain image words.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rose: Option<RoseDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<OptionsDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct SpaceDoc {
    pub vertices: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<LocalEdgeDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalEdgeDoc {
    pub name: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopEdgeDoc {
    pub name: String,
    /// `space.vertex`.
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct MorphismDoc {
    pub vertex_maps: BTreeMap<String, VertexMapDoc>,
    /// Image edge-path expression per top edge.
    pub edge_maps: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct VertexMapDoc {
    pub to: String,
    #[serde(default)]
    pub vertices: BTreeMap<String, String>,
    /// Local-path word per local edge.
    #[serde(default)]
    pub edges: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoseDoc {
    pub edges: Vec<String>,
    pub images: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct OptionsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_image_len: Option<u128>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_v_entries: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_branch_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_legalize_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_power: Option<u32>,
}

impl OptionsDoc {
    pub fn caps(&self) -> Caps {
        let mut caps = Caps::default();
        if let Some(v) = self.max_image_len {
            caps.max_image_len = v;
        }
        if let Some(v) = self.max_v_entries {
            caps.max_v_entries = v;
        }
        if let Some(v) = self.max_branch_len {
            caps.max_branch_len = v;
        }
        if let Some(v) = self.max_legalize_iterations {
            caps.max_legalize_iterations = v;
        }
        if let Some(v) = self.max_power {
            caps.max_power = v;
        }
        caps
    }
}

impl SystemDocument {
    pub fn from_json(text: &str) -> Result<SystemDocument> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn caps(&self) -> Caps {
        self.options.as_ref().map(|o| o.caps()).unwrap_or_default()
    }

    /// Build the system, reporting the offending entity on failure.
    pub fn build(&self) -> Result<System> {
        if let Some(rose) = &self.rose {
            if !self.vertex_spaces.is_empty() || !self.top_edges.is_empty() {
                return Err(Error::Parse(
                    "document mixes the rose shorthand with explicit spaces".into(),
                ));
            }
            let edges: Vec<&str> = rose.edges.iter().map(|s| s.as_str()).collect();
            let images: Vec<(&str, &str)> = rose
                .images
                .iter()
                .map(|(k, v)| (k.as_str(), v.as_str()))
                .collect();
            return System::rose(&edges, &images);
        }
        let mut g = GraphOfSpaces::new();
        for (name, sp) in &self.vertex_spaces {
            let mut space = VertexSpace::new(name);
            for v in &sp.vertices {
                space.add_vertex(v).map_err(at(format!("vertex_spaces.{name}")))?;
            }
            for e in &sp.edges {
                space
                    .add_edge(&e.name, &e.from, &e.to)
                    .map_err(at(format!("vertex_spaces.{name}.edges.{}", e.name)))?;
            }
            g.add_space(space).map_err(at(format!("vertex_spaces.{name}")))?;
        }
        let attach = |g: &GraphOfSpaces, s: &str, ctx: &str| -> Result<AttachPoint> {
            let (space, vertex) = s.split_once('.').ok_or_else(|| {
                Error::Parse(format!("{ctx}: attaching point {s:?} is not space.vertex"))
            })?;
            let sid = g.space_by_name(space).map_err(at(ctx.to_string()))?;
            let v = g.space(sid)?.vertex(vertex).map_err(at(ctx.to_string()))?;
            Ok(AttachPoint { space: sid, vertex: v })
        };
        for e in &self.top_edges {
            let ctx = format!("top_edges.{}", e.name);
            let from = attach(&g, &e.from, &ctx)?;
            let to = attach(&g, &e.to, &ctx)?;
            g.add_top_edge(&e.name, from, to).map_err(at(ctx))?;
        }
        let morphism = self
            .morphism
            .as_ref()
            .ok_or_else(|| Error::Parse("document has no morphism".into()))?;
        let mut vms = Vec::new();
        for (_sid, sp) in g.spaces() {
            let vmd = morphism.vertex_maps.get(&sp.name).ok_or_else(|| {
                Error::Parse(format!("morphism.vertex_maps misses space {:?}", sp.name))
            })?;
            let target = g
                .space_by_name(&vmd.to)
                .map_err(at(format!("morphism.vertex_maps.{}.to", sp.name)))?;
            let tsp = g.space(target)?;
            let mut vertices = Vec::new();
            for v in 0..sp.vertex_count() as u32 {
                let vname = sp.vertex_name(v);
                let img = if sp.is_point() && vmd.vertices.is_empty() && tsp.vertex_count() == 1 {
                    tsp.vertex_name(0).to_string()
                } else {
                    vmd.vertices
                        .get(vname)
                        .cloned()
                        .ok_or_else(|| {
                            Error::Parse(format!(
                                "morphism.vertex_maps.{} misses vertex {vname:?}",
                                sp.name
                            ))
                        })?
                };
                vertices.push(tsp.vertex(&img).map_err(at(format!(
                    "morphism.vertex_maps.{}.vertices.{vname}",
                    sp.name
                )))?);
            }
            let mut ledges: Vec<LocalPath> = Vec::new();
            for le in (0..sp.oriented_edge_count() as u32).step_by(2) {
                let token = sp.ledge_token(le);
                let word = vmd.edges.get(&token).ok_or_else(|| {
                    Error::Parse(format!(
                        "morphism.vertex_maps.{} misses local edge {token:?}",
                        sp.name
                    ))
                })?;
                let start = vertices[sp.ledge_from(le) as usize];
                let lp = parse_local_path(&g, target, start, word)
                    .map_err(at(format!("morphism.vertex_maps.{}.edges.{token}", sp.name)))?;
                if lp.to != vertices[sp.ledge_to(le) as usize] {
                    return Err(Error::Parse(format!(
                        "morphism.vertex_maps.{}.edges.{token}: image has wrong endpoint",
                        sp.name
                    )));
                }
                ledges.push(lp.clone());
                ledges.push(lp.reversed());
            }
            vms.push(VertexMap {
                target,
                vertices,
                edges: ledges,
            });
        }
        let mut forward: Vec<EdgePath> = Vec::new();
        for e in g.forward_tops() {
            let token = g.top_token(e);
            let expr = morphism.edge_maps.get(&token).ok_or_else(|| {
                Error::Parse(format!("morphism.edge_maps misses top edge {token:?}"))
            })?;
            forward.push(
                parse_edge_path(&g, expr).map_err(at(format!("morphism.edge_maps.{token}")))?,
            );
        }
        let map = GosMorphism::new(&g, vms, forward).map_err(at("morphism".to_string()))?;
        System::new(g, map)
    }
}

fn at(ctx: String) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Parse(m) => Error::Parse(format!("{ctx}: {m}")),
        Error::Structural(m) => Error::Parse(format!("{ctx}: {m}")),
        other => other,
    }
}

/// Serialize a system back to the document form (used by the construction
/// command that emits graphs of spaces).
pub fn from_system(sys: &System) -> SystemDocument {
    let g = &sys.graph;
    let mut vertex_spaces = BTreeMap::new();
    for (_, sp) in g.spaces() {
        let mut edges = Vec::new();
        for le in (0..sp.oriented_edge_count() as u32).step_by(2) {
            edges.push(LocalEdgeDoc {
                name: sp.ledge_token(le),
                from: sp.vertex_name(sp.ledge_from(le)).to_string(),
                to: sp.vertex_name(sp.ledge_to(le)).to_string(),
            });
        }
        vertex_spaces.insert(
            sp.name.clone(),
            SpaceDoc {
                vertices: (0..sp.vertex_count() as u32)
                    .map(|v| sp.vertex_name(v).to_string())
                    .collect(),
                edges,
            },
        );
    }
    let mut top_edges = Vec::new();
    for e in g.forward_tops() {
        let a = g.init(e);
        let b = g.term(e);
        let point = |p: AttachPoint| {
            let sp = g.space(p.space).unwrap();
            format!("{}.{}", sp.name, sp.vertex_name(p.vertex))
        };
        top_edges.push(TopEdgeDoc {
            name: g.top_token(e),
            from: point(a),
            to: point(b),
        });
    }
    let mut vertex_maps = BTreeMap::new();
    for (sid, sp) in g.spaces() {
        let vm = &sys.map.vertex_maps[sid.0 as usize];
        let tsp = g.space(vm.target).unwrap();
        let vertices: BTreeMap<String, String> = (0..sp.vertex_count() as u32)
            .map(|v| {
                (
                    sp.vertex_name(v).to_string(),
                    tsp.vertex_name(vm.vertices[v as usize]).to_string(),
                )
            })
            .collect();
        let edges: BTreeMap<String, String> = (0..sp.oriented_edge_count() as u32)
            .step_by(2)
            .map(|le| {
                (
                    sp.ledge_token(le),
                    crate::gos::format_local_path(g, &vm.edges[le as usize]),
                )
            })
            .collect();
        vertex_maps.insert(
            sp.name.clone(),
            VertexMapDoc {
                to: tsp.name.clone(),
                vertices,
                edges,
            },
        );
    }
    let mut edge_maps = BTreeMap::new();
    for e in g.forward_tops() {
        edge_maps.insert(
            g.top_token(e),
            crate::gos::format_edge_path(g, sys.map.edge_image(e)),
        );
    }
    SystemDocument {
        vertex_spaces,
        top_edges,
        morphism: Some(MorphismDoc {
            vertex_maps,
            edge_maps,
        }),
        rose: None,
        options: None,
    }
}
