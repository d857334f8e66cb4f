//! Data model for graphs of spaces, paths, reduction, and morphism
//! application.

pub mod graph;
pub mod grammar;
pub mod morphism;
pub mod path;
pub mod validate;

pub use graph::{AttachPoint, GraphOfSpaces, LocalEdge, OEdge, SpaceId, VertexSpace};
pub use grammar::{
    format_closed_path, format_edge_path, format_local_path, parse_closed_path, parse_edge_path,
    parse_local_path,
};
pub use morphism::{GosMorphism, System, VertexMap};
pub use path::{
    reduce, reduce_closed, reduce_partial, ClosedPath, EdgePath, LocalPath, PartialPath,
    PointSpec, ReducedClosed, ReducedPath, ZeroPath,
};
pub use validate::{validate_system, ValidationReport};
