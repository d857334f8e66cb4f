//! Report structures for the CLI: deterministic, sorted serializations of
//! every pipeline stage.

use crate::absolute::{AbsMap, Growth, TransitionAnalysis, WhiteheadGraph};
use crate::bounds::BoundsReport;
use crate::fixed::{FixCertificate, XEdge, XStar};
use crate::gos::{format_edge_path, System, ValidationReport};
use crate::inp::{Decomposition, EndpointData, FhatImage, InpSet, LegalizeResult};
use crate::turns::{Turn, TurnClosure};
use crate::vsets::VEntry;
use crate::{Result, Session};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct ProfileReport {
    pub is_train_track: bool,
    pub is_expanding: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_exp: Option<u32>,
    pub is_surjective_on_pi1: Option<bool>,
    pub illegal_turns: usize,
    pub t0: u32,
}

pub fn profile_report(sess: &Session) -> Result<ProfileReport> {
    let surj = crate::groupoid::is_surjective_on_pi1(sess.sys).ok();
    Ok(ProfileReport {
        is_train_track: sess.profile.is_train_track,
        is_expanding: sess.profile.is_expanding(),
        t_exp: sess.profile.t_exp,
        is_surjective_on_pi1: surj,
        illegal_turns: sess.profile.closure.non_degenerate().len(),
        t0: sess.profile.closure.t0,
    })
}

#[derive(Debug, Serialize)]
pub struct TurnsReport {
    pub t0: u32,
    pub degenerate: Vec<String>,
    pub illegal: Vec<TurnEntry>,
}

#[derive(Debug, Serialize)]
pub struct TurnEntry {
    pub turn: String,
    pub degeneration_time: u32,
}

pub fn turns_report(sys: &System, closure: &TurnClosure) -> TurnsReport {
    let g = &sys.graph;
    let mut illegal: Vec<TurnEntry> = closure
        .non_degenerate()
        .into_iter()
        .map(|t| TurnEntry {
            turn: t.display(g),
            degeneration_time: closure.degeneration_time(t).unwrap_or(0),
        })
        .collect();
    illegal.sort_by(|a, b| a.turn.cmp(&b.turn));
    let mut degenerate: Vec<String> = closure.degenerate().iter().map(|t| t.display(g)).collect();
    degenerate.sort();
    TurnsReport {
        t0: closure.t0,
        degenerate,
        illegal,
    }
}

#[derive(Debug, Serialize)]
pub struct SpecialTurnsReport {
    pub power: u32,
    pub turns: Vec<String>,
}

pub fn special_turns_report(sys: &System, power: u32, turns: &[Turn]) -> SpecialTurnsReport {
    let mut out: Vec<String> = turns.iter().map(|t| t.display(&sys.graph)).collect();
    out.sort();
    SpecialTurnsReport { power, turns: out }
}

#[derive(Debug, Serialize)]
pub struct VSetReport {
    pub power: u32,
    pub count: usize,
    pub max_length: usize,
    pub entries: Vec<VEntryReport>,
}

#[derive(Debug, Serialize)]
pub struct VEntryReport {
    pub path: String,
    pub branch1: String,
    pub branch2: String,
    pub prefix_len: u64,
    pub witness_partial: [bool; 2],
}

pub fn vset_report(sys: &System, power: u32, entries: &[VEntry]) -> VSetReport {
    let mut out: Vec<VEntryReport> = entries
        .iter()
        .map(|e| VEntryReport {
            path: e.display(sys),
            branch1: format_edge_path(&sys.graph, &e.branch1),
            branch2: format_edge_path(&sys.graph, &e.branch2),
            prefix_len: e.prefix_len as u64,
            witness_partial: [e.witness[0].partial, e.witness[1].partial],
        })
        .collect();
    out.sort_by(|a, b| a.path.cmp(&b.path));
    VSetReport {
        power,
        count: out.len(),
        max_length: entries.iter().map(|e| e.len()).max().unwrap_or(0),
        entries: out,
    }
}

#[derive(Debug, Serialize)]
pub struct InpReport {
    pub t_hat: u32,
    pub v_entries: usize,
    pub records: Vec<InpRecordReport>,
    pub t_plus: u32,
    pub t_star: u32,
    pub t_4: u32,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct InpRecordReport {
    pub prolongation: String,
    pub period: u32,
    pub head: String,
    pub tail: String,
    pub verified: bool,
}

fn endpoint_str(e: &EndpointData) -> String {
    match e {
        EndpointData::Vertex => "vertex".to_string(),
        EndpointData::Interior { period, occurrence } => {
            format!("interior(occurrence {occurrence} at power {period})")
        }
    }
}

pub fn inp_report(sys: &System, inps: &InpSet) -> InpReport {
    let g = &sys.graph;
    let mut records: Vec<InpRecordReport> = inps
        .records
        .iter()
        .map(|r| InpRecordReport {
            prolongation: format_edge_path(g, &r.prolongation),
            period: r.period,
            head: endpoint_str(&r.head),
            tail: endpoint_str(&r.tail),
            verified: r.verified,
        })
        .collect();
    records.sort_by(|a, b| a.prolongation.cmp(&b.prolongation));
    InpReport {
        t_hat: inps.bounds.t_hat,
        v_entries: inps.entries.len(),
        records,
        t_plus: inps.t_plus,
        t_star: inps.t_star,
        t_4: inps.t_4,
        diagnostics: inps.diagnostics.clone(),
    }
}

#[derive(Debug, Serialize)]
pub struct LegalizeReport {
    pub path: String,
    pub exponent: u32,
    pub ilt_before: usize,
    pub ilt_after: usize,
    pub final_form: String,
    pub pieces: Vec<String>,
}

pub fn legalize_report(sys: &System, inps: &InpSet, input: &str, res: &LegalizeResult) -> LegalizeReport {
    LegalizeReport {
        path: input.to_string(),
        exponent: res.exponent,
        ilt_before: res.ilt_before,
        ilt_after: res.ilt_after,
        final_form: res.final_form.clone(),
        pieces: decomposition_pieces(sys, inps, &res.decomposition),
    }
}

pub fn decomposition_pieces(sys: &System, inps: &InpSet, dec: &Decomposition) -> Vec<String> {
    dec.occurrences
        .iter()
        .map(|o| {
            format!(
                "INP {} at junction {}",
                format_edge_path(&sys.graph, &inps.records[o.record].prolongation),
                o.junction
            )
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct GrowthReport {
    pub edges: Vec<(String, Growth)>,
    pub transition: TransitionAnalysis,
    pub edge_order: Vec<String>,
}

pub fn growth_report(map: &AbsMap, ta: &TransitionAnalysis) -> GrowthReport {
    GrowthReport {
        edges: map
            .edge_names
            .iter()
            .cloned()
            .zip(ta.growth.iter().copied())
            .collect(),
        transition: ta.clone(),
        edge_order: map.edge_names.clone(),
    }
}

#[derive(Debug, Serialize)]
pub struct FixedReport {
    pub vertex: String,
    pub power_used: u32,
    pub generators: Vec<String>,
    pub inps: Vec<String>,
    pub subdivisions: Vec<crate::fixed::Subdivision>,
    pub fixed_edges: Vec<String>,
}

pub fn fixed_report(xs: &XStar, vertex: &str, generators: Vec<String>) -> FixedReport {
    let mut fixed_edges: Vec<String> = xs
        .edges
        .iter()
        .filter_map(|e| match e {
            XEdge::Fixed { edge } => Some(xs.graph.token(*edge)),
            XEdge::Inp { .. } => None,
        })
        .collect();
    fixed_edges.sort();
    FixedReport {
        vertex: vertex.to_string(),
        power_used: xs.power_used,
        generators,
        inps: xs.inp_words.clone(),
        subdivisions: xs.subdivisions.clone(),
        fixed_edges,
    }
}

/// The full pipeline report.
#[derive(Debug, Serialize)]
pub struct FullReport {
    pub validation: ValidationReport,
    pub profile: ProfileReport,
    pub turns: TurnsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_set: Option<VSetReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inp: Option<InpReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub whitehead: Option<Vec<WhiteheadGraph>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed: Option<Vec<FixedReport>>,
}

pub fn render_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

/// Plain-text rendering used by `--format text`.
pub fn render_text<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report serializes");
    let mut out = String::new();
    render_value(&v, 0, &mut out);
    out
}

fn render_value(v: &serde_json::Value, indent: usize, out: &mut String) {
    use serde_json::Value::*;
    let pad = "  ".repeat(indent);
    match v {
        Object(map) => {
            for (k, val) in map {
                match val {
                    Object(_) | Array(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_value(val, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(val))),
                }
            }
        }
        Array(items) => {
            if items.is_empty() {
                out.push_str(&format!("{pad}(none)\n"));
            }
            for item in items {
                match item {
                    Object(_) | Array(_) => {
                        out.push_str(&format!("{pad}-\n"));
                        render_value(item, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}- {}\n", scalar(item))),
                }
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", scalar(v))),
    }
}

fn scalar(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Classification rendering.
#[derive(Debug, Serialize)]
pub struct ClassifyReport {
    pub loop_path: String,
    pub certificate: FixCertificate,
}

/// Orbit table rendering for diagnostics.
pub fn fhat_table(sys: &System, inps: &InpSet) -> Vec<(String, String)> {
    let g = &sys.graph;
    inps.entries
        .iter()
        .zip(&inps.fhat)
        .map(|(e, img)| {
            let lhs = format_edge_path(g, &e.eta(sys));
            let rhs = match img {
                FhatImage::Star => "*".to_string(),
                FhatImage::Entry { index, flipped } => {
                    let mut s = format_edge_path(g, &inps.entries[*index].eta(sys));
                    if *flipped {
                        s.push_str(" (reversed)");
                    }
                    s
                }
            };
            (lhs, rhs)
        })
        .collect()
}
