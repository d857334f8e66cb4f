//! System validation: structural invariants plus the standing hypotheses
//! that the pipeline needs (essential spaces permuted, vertex maps injective
//! on fundamental groups). Violations are report entries, never errors.

use super::morphism::System;
use crate::groupoid;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub permutes_essential_spaces: bool,
    pub vertex_maps_injective: bool,
    pub surjective_on_pi1: Option<bool>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every structural invariant and the standing hypotheses. Never
/// mutates its input; structural problems become report entries.
pub fn validate_system(sys: &System) -> ValidationReport {
    let g = &sys.graph;
    let mut violations = Vec::new();

    if !g.is_connected() {
        violations.push("underlying graph is not connected".to_string());
    }
    for (_, sp) in g.spaces() {
        if !sp.is_connected() {
            violations.push(format!("vertex space {:?} is not connected", sp.name));
        }
    }
    for e in g.oriented_tops() {
        if sys.map.edge_image(e).len() < 1 {
            violations.push(format!(
                "image of top edge {} is empty",
                g.top_token(e)
            ));
        }
    }

    // Essential spaces must be permuted.
    let essential: Vec<bool> = g.spaces().map(|(_, sp)| sp.essential()).collect();
    let mut hit = vec![false; g.space_count()];
    let mut permutes = true;
    for (sid, _) in g.spaces() {
        if !essential[sid.0 as usize] {
            continue;
        }
        let t = sys.map.space_map[sid.0 as usize];
        if !essential[t.0 as usize] || hit[t.0 as usize] {
            permutes = false;
        }
        hit[t.0 as usize] = true;
    }
    if !permutes {
        violations.push("map does not permute the essential vertex spaces".to_string());
    }

    // Vertex maps injective on pi1.
    let mut injective = true;
    for (sid, sp) in g.spaces() {
        match groupoid::analyze_vertex_map(sys, sid) {
            Ok(fact) => {
                if !fact.injective {
                    injective = false;
                    violations.push(format!(
                        "vertex map on space {:?} is not injective on pi1 (rank {} folds to {})",
                        sp.name, fact.source_betti, fact.folded_betti
                    ));
                }
            }
            Err(e) => {
                injective = false;
                violations.push(format!(
                    "vertex map on space {:?} could not be analyzed: {e}",
                    sp.name
                ));
            }
        }
    }

    let surjective = groupoid::is_surjective_on_pi1(sys).ok();

    ValidationReport {
        violations,
        permutes_essential_spaces: permutes,
        vertex_maps_injective: injective,
        surjective_on_pi1: surjective,
    }
}
