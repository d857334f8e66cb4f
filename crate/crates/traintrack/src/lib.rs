//! Train track maps on graphs of spaces with finite-graph vertex spaces.
//!
//! A self-map of a graph of spaces sends vertex spaces to vertex spaces and
//! top edges to edge paths. For expanding train track maps this crate computes
//! the full invariant pipeline: the illegal turn closure and its depth `t0`,
//! special turns, the finite candidate sets `V(f^t)`, the cancellation and
//! iteration constants (`C`, `C'`, `C_1`, `t_1`, `t_hat`), the complete set of
//! INP (irreducible Nielsen) paths with periods and endpoint data, legalization
//! of arbitrary paths, fixed/periodic conjugacy classes, and fixed subgroup
//! generators via the augmented periodic graph `X*`.
//!
//! The `absolute` module is a front end for plain graph self-maps: growth
//! classification of edges, the transition matrix and its primitivity, the
//! per-vertex Whitehead graphs, and the construction of the associated graph
//! of spaces whose vertex spaces are the polynomially growing components.

pub mod gos;
pub mod groupoid;
pub mod images;
pub mod turns;
pub mod vsets;
pub mod bounds;
pub mod inp;
pub mod fixed;
pub mod absolute;
pub mod doc;
pub mod report;

use images::ImageView;
use turns::{MapProfile, TurnContext};

/// Shared state for one analyzed system: fold factorizations, the illegal
/// turn closure, the map profile, and the lazy image caches.
pub struct Session<'a> {
    pub sys: &'a gos::System,
    pub caps: Caps,
    pub view: ImageView<'a>,
    pub turn_ctx: TurnContext,
    pub profile: MapProfile,
}

impl<'a> Session<'a> {
    pub fn new(sys: &'a gos::System, caps: Caps) -> Result<Session<'a>> {
        let turn_ctx = TurnContext::new(sys)?;
        let profile = turns::map_profile(sys, &turn_ctx)?;
        Ok(Session {
            sys,
            caps,
            view: ImageView::new(sys),
            turn_ctx,
            profile,
        })
    }

    /// Sessions for the INP pipeline require an expanding train track map.
    pub fn require_expanding_train_track(&self) -> Result<u32> {
        if !self.profile.is_train_track {
            return Err(Error::Hypothesis("map is not a train track map".into()));
        }
        self.profile
            .t_exp
            .ok_or_else(|| Error::Hypothesis("map is not expanding".into()))
    }
}

pub use gos::{
    AttachPoint, ClosedPath, EdgePath, GosMorphism, GraphOfSpaces, LocalPath, OEdge, PartialPath,
    ReducedClosed, ReducedPath, SpaceId, System, ValidationReport, ZeroPath,
};

/// Errors surfaced by the pipeline. Exit-code mapping in the CLI:
/// `Parse`/`Structural` are input problems, `Hypothesis` means the map does
/// not satisfy the standing assumptions (not a train track map, not expanding,
/// a non-injective vertex map), `Capacity` means a configured resource cap was
/// hit, and `Internal` signals a broken invariant of the pipeline itself.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),
    #[error("capacity exceeded: {cap} (limit {limit})")]
    Capacity { cap: &'static str, limit: u128 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Resource caps. Defaults are generous for desk-scale systems; the CLI
/// exposes them as flags.
#[derive(Debug, Clone)]
pub struct Caps {
    /// Longest materialized edge-path image, in top edges.
    pub max_image_len: u128,
    /// Most entries `enumerate_v` may produce before giving up.
    pub max_v_entries: usize,
    /// Longest branch considered while growing `V(f^t)` candidates.
    pub max_branch_len: usize,
    /// Most `reduce . f` steps in `legalize` before the derived cap is
    /// declared breached.
    pub max_legalize_iterations: usize,
    /// Largest power of `f` the image machinery will expand.
    pub max_power: u32,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_image_len: 1 << 24,
            max_v_entries: 1 << 14,
            max_branch_len: 64,
            max_legalize_iterations: 512,
            max_power: 64,
        }
    }
}
