//! The finite candidate sets `V(f^t)`: two-branch edge paths whose
//! `f^t`-images cancel across the tip into the last edges of both branches.

use crate::gos::{format_edge_path, EdgePath, LocalPath, System};
use crate::turns::{preimage_turns, special_turns, turns_used, Turn};
use crate::{Error, Result, Session};
use std::collections::{HashMap, HashSet};

/// Where the matched image prefix pulls back inside one branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchWitness {
    /// 0-based index of the branch edge containing the pullback of the
    /// common prefix boundary (always the last edge for members).
    pub edge_index: usize,
    /// True when the pullback lands strictly inside that edge; false when it
    /// is the edge's far endpoint.
    pub partial: bool,
}

/// A member of `V(f^t)`: branches run from the tip outward, so the path it
/// stands for is `reverse(branch1) . tip . branch2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VEntry {
    pub branch1: EdgePath,
    pub branch2: EdgePath,
    pub tip: LocalPath,
    pub power: u32,
    /// Length `L` of the common prefix of the branch images.
    pub prefix_len: u128,
    pub witness: [BranchWitness; 2],
}

impl VEntry {
    /// The edge path `reverse(branch1) . tip . branch2`.
    pub fn eta(&self, sys: &System) -> EdgePath {
        self.branch1
            .reversed()
            .concat(&sys.graph, &self.tip, &self.branch2)
            .expect("entry endpoints are compatible")
    }

    pub fn len(&self) -> usize {
        self.branch1.len() + self.branch2.len()
    }

    fn key_oriented(&self) -> (Vec<(u32, Vec<u32>)>, Vec<u32>, Vec<(u32, Vec<u32>)>) {
        let bkey = |b: &EdgePath| -> Vec<(u32, Vec<u32>)> {
            b.edges
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let conn = if i > 0 { b.conns[i - 1].steps.clone() } else { Vec::new() };
                    (e.0, conn)
                })
                .collect()
        };
        (bkey(&self.branch1), self.tip.steps.clone(), bkey(&self.branch2))
    }

    /// Entries are unoriented: swapping the branches (and reversing the tip)
    /// yields the same member.
    pub fn canonical(mut self) -> VEntry {
        let swapped = VEntry {
            branch1: self.branch2.clone(),
            branch2: self.branch1.clone(),
            tip: self.tip.reversed(),
            power: self.power,
            prefix_len: self.prefix_len,
            witness: [self.witness[1], self.witness[0]],
        };
        if swapped.key_oriented() < self.key_oriented() {
            self = swapped;
        }
        self
    }

    pub fn key(&self) -> String {
        format!("{:?}", self.key_oriented())
    }

    pub fn display(&self, sys: &System) -> String {
        format_edge_path(&sys.graph, &self.eta(sys))
    }
}

/// Test membership of the decomposition `reverse(branch1) . tip . branch2`
/// in `V(f^t)`. Returns the witness data when the path is a member.
pub fn v_membership(
    sess: &Session,
    t: u32,
    branch1: &EdgePath,
    branch2: &EdgePath,
    tip: &LocalPath,
) -> Result<Option<VEntry>> {
    if t < 1 {
        return Err(Error::Domain("membership needs t >= 1".into()));
    }
    let g = &sess.sys.graph;
    // Structural: both branches start in the tip's vertex space.
    let a = g.init(branch1.first());
    let b = g.init(branch2.first());
    if tip.space != a.space || tip.from != a.vertex || tip.space != b.space || tip.to != b.vertex {
        return Err(Error::Structural(
            "tip connector does not join the branch starting points".into(),
        ));
    }
    // Distinct first edges, legal branches.
    if branch1.first() == branch2.first() {
        return Ok(None);
    }
    if !sess.profile.is_legal_path(g, branch1) || !sess.profile.is_legal_path(g, branch2) {
        return Ok(None);
    }
    // The tip must die under f^t.
    if !sess.view.conn_image(tip, t).is_trivial() {
        return Ok(None);
    }
    let l = sess.view.common_prefix(branch1, branch2, t)?.edges;
    if l < 1 {
        return Ok(None);
    }
    let mut witness = [BranchWitness { edge_index: 0, partial: false }; 2];
    for (i, branch) in [branch1, branch2].into_iter().enumerate() {
        let total = sess.view.path_len(branch, t)?;
        let last = sess.view.edge_len(branch.last(), t)?;
        // Landing exactly on the start of the last edge counts as trivial
        // overlap and is rejected.
        if l <= total - last {
            return Ok(None);
        }
        witness[i] = BranchWitness {
            edge_index: branch.len() - 1,
            partial: l < total,
        };
    }
    Ok(Some(
        VEntry {
            branch1: branch1.clone(),
            branch2: branch2.clone(),
            tip: tip.clone(),
            power: t,
            prefix_len: l,
            witness,
        }
        .canonical(),
    ))
}

/// Turns whose t-fold image turn is t-special, minus the illegal ones: the
/// turns a member branch may use.
pub fn allowed_turns(sess: &Session, t: u32) -> Result<HashSet<Turn>> {
    let mut level: HashSet<Turn> = special_turns(sess.sys, t, sess.caps.max_image_len)?
        .into_iter()
        .collect();
    for _ in 0..t {
        let mut next = HashSet::new();
        for turn in &level {
            for pre in preimage_turns(sess.sys, &sess.turn_ctx, turn)? {
                next.insert(pre);
            }
        }
        level = next;
        if level.len() > 4 * sess.caps.max_v_entries {
            return Err(Error::Capacity {
                cap: "allowed turn set",
                limit: (4 * sess.caps.max_v_entries) as u128,
            });
        }
    }
    level.retain(|turn| sess.profile.closure.is_legal(turn));
    Ok(level)
}

/// Enumerate the complete set `V(f^t)`.
///
/// Seeds are the illegal turns whose image turn dies within `t` iterations
/// (the closure is the complete list of illegal turns, so no further preimage
/// lifting is needed). Branches then grow one edge at a time through allowed
/// turns; a member shrinks to a member by removing the terminal edge of the
/// branch with the longer image (or of both, when equal), so this search is
/// complete.
pub fn enumerate_v(sess: &Session, t: u32) -> Result<Vec<VEntry>> {
    if t < 1 {
        return Err(Error::Domain("enumerate_v needs t >= 1".into()));
    }
    let allowed = allowed_turns(sess, t)?;
    let mut found: HashMap<String, VEntry> = HashMap::new();
    let mut queue: Vec<VEntry> = Vec::new();

    for (turn, &time) in &sess.profile.closure.illegal {
        if time > t || turn.is_degenerate() {
            continue;
        }
        let b1 = EdgePath::single(turn.incoming.rev());
        let b2 = EdgePath::single(turn.outgoing);
        if let Some(entry) = v_membership(sess, t, &b1, &b2, &turn.connector)? {
            if found.insert(entry.key(), entry.clone()).is_none() {
                queue.push(entry);
            }
        }
    }

    // Extensions of one branch by one edge through an allowed turn.
    let extensions = |branch: &EdgePath| -> Vec<EdgePath> {
        let mut out = Vec::new();
        let last = branch.last();
        for turn in &allowed {
            for t2 in [turn.clone(), turn.reversed()] {
                if t2.incoming != last {
                    continue;
                }
                let mut edges = branch.edges.clone();
                let mut conns = branch.conns.clone();
                edges.push(t2.outgoing);
                conns.push(t2.connector.clone());
                out.push(EdgePath { edges, conns });
            }
        }
        out
    };

    while let Some(entry) = queue.pop() {
        if found.len() > sess.caps.max_v_entries {
            return Err(Error::Capacity {
                cap: "max_v_entries",
                limit: sess.caps.max_v_entries as u128,
            });
        }
        let ext1 = extensions(&entry.branch1);
        let ext2 = extensions(&entry.branch2);
        let mut candidates: Vec<(EdgePath, EdgePath)> = Vec::new();
        for b1 in &ext1 {
            candidates.push((b1.clone(), entry.branch2.clone()));
        }
        for b2 in &ext2 {
            candidates.push((entry.branch1.clone(), b2.clone()));
        }
        for b1 in &ext1 {
            for b2 in &ext2 {
                candidates.push((b1.clone(), b2.clone()));
            }
        }
        for (b1, b2) in candidates {
            if b1.len() > sess.caps.max_branch_len || b2.len() > sess.caps.max_branch_len {
                return Err(Error::Capacity {
                    cap: "max_branch_len",
                    limit: sess.caps.max_branch_len as u128,
                });
            }
            if let Some(next) = v_membership(sess, t, &b1, &b2, &entry.tip)? {
                if !found.contains_key(&next.key()) {
                    found.insert(next.key(), next.clone());
                    queue.push(next);
                }
            }
        }
    }

    let mut out: Vec<VEntry> = found.into_values().collect();
    out.sort_by_key(|e| e.key());
    Ok(out)
}

/// Canonically derive a member of `V(f^t)` from branch truncations of a
/// member: iteratively remove the terminal edge (with its connector) from the
/// branch whose image is longer, until the overlap condition holds.
pub fn trim_to_v(
    sess: &Session,
    t: u32,
    branch1: &EdgePath,
    branch2: &EdgePath,
    tip: &LocalPath,
) -> Result<VEntry> {
    let mut b1 = branch1.clone();
    let mut b2 = branch2.clone();
    loop {
        if let Some(entry) = v_membership(sess, t, &b1, &b2, tip)? {
            return Ok(entry);
        }
        let l1 = sess.view.path_len(&b1, t)?;
        let l2 = sess.view.path_len(&b2, t)?;
        let drop1 = l1 >= l2;
        let drop2 = l2 >= l1;
        let shrink = |b: &mut EdgePath| -> bool {
            if b.len() <= 1 {
                return false;
            }
            b.edges.pop();
            b.conns.pop();
            true
        };
        let mut progressed = false;
        if drop1 {
            progressed |= shrink(&mut b1);
        }
        if drop2 {
            progressed |= shrink(&mut b2);
        }
        if !progressed {
            return Err(Error::Domain(
                "input is not truncation-derived from a member".into(),
            ));
        }
    }
}

/// Check that every turn of every branch is legal and an f^t-preimage of a
/// t-special turn (used by tests and diagnostics).
pub fn branches_use_allowed_turns(sess: &Session, t: u32, entry: &VEntry) -> Result<bool> {
    let allowed = allowed_turns(sess, t)?;
    for b in [&entry.branch1, &entry.branch2] {
        for turn in turns_used(&sess.sys.graph, b) {
            if !allowed.contains(&turn) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gos::parse_edge_path;
    use crate::Caps;

    fn fixture_a() -> System {
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

    fn branch(sys: &System, s: &str) -> EdgePath {
        parse_edge_path(&sys.graph, s).unwrap()
    }

    fn tip(sys: &System) -> LocalPath {
        let at = sys.graph.init(sys.graph.top_by_token("a").unwrap());
        LocalPath::trivial(at.space, at.vertex)
    }

    #[test]
    fn membership_on_fixture_a() {
        let sys = fixture_a();
        let sess = Session::new(&sys, Caps::default()).unwrap();
        // eta = "C e": branches c, e; images a c / a e share "a".
        let m = v_membership(&sess, 1, &branch(&sys, "c"), &branch(&sys, "e"), &tip(&sys))
            .unwrap()
            .expect("member");
        assert_eq!(m.prefix_len, 1);
        assert!(m.witness[0].partial && m.witness[1].partial);
        // eta = "C b": images a c / a share "a", branch b fully matched.
        let m = v_membership(&sess, 1, &branch(&sys, "c"), &branch(&sys, "b"), &tip(&sys))
            .unwrap()
            .expect("member");
        assert_eq!(m.prefix_len, 1);
        // eta = "B a c^-1 ...": branch2 = "b a" has P2 = |f(b)| = 1 = L, so
        // the overlap with the last edge is trivial: not a member.
        let m = v_membership(&sess, 1, &branch(&sys, "b"), &branch(&sys, "b a"), &tip(&sys)).unwrap();
        assert!(m.is_none());
        let m = v_membership(&sess, 1, &branch(&sys, "e"), &branch(&sys, "b a"), &tip(&sys)).unwrap();
        assert!(m.is_none());
    }

    #[test]
    fn enumerate_v1_fixture_a() {
        let sys = fixture_a();
        let sess = Session::new(&sys, Caps::default()).unwrap();
        let v1 = enumerate_v(&sess, 1).unwrap();
        // The six canonical non-degenerate illegal turns as length-two
        // entries, plus "a b F" and "a b F A": f(B A) = A FFEEDDCCAB and
        // f(F A) = AF FFEEDDCCAB share the prefixes "A F" and "A F F", which
        // overlap the last edges of both branches non-trivially.
        assert_eq!(v1.len(), 8);
        let etas: Vec<String> = v1.iter().map(|e| e.display(&sys)).collect();
        for want in ["C e", "d F", "a b F", "a b F A"] {
            assert!(
                etas.iter().any(|s| s == want || s == &reverse_words(want)),
                "missing {want} in {etas:?}"
            );
        }
        assert_eq!(v1.iter().filter(|e| e.len() == 2).count(), 6);
        let c = v1.iter().map(|e| e.len()).max().unwrap();
        assert_eq!(c, 4);
    }

    fn reverse_words(s: &str) -> String {
        // Reverse of a trivial-connector path serialization over one-letter
        // edges: reverse token order and flip case.
        s.split_whitespace()
            .rev()
            .map(|t| {
                let c = t.chars().next().unwrap();
                if c.is_ascii_lowercase() {
                    c.to_ascii_uppercase().to_string()
                } else {
                    c.to_ascii_lowercase().to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    #[test]
    fn v1_subset_of_v2_fixture_a() {
        let sys = fixture_a();
        let sess = Session::new(&sys, Caps::default()).unwrap();
        let v1 = enumerate_v(&sess, 1).unwrap();
        let v2 = enumerate_v(&sess, 2).unwrap();
        let k2: HashSet<String> = v2
            .iter()
            .map(|e| format!("{:?}", e.eta(&sys)))
            .collect();
        for e in &v1 {
            assert!(
                k2.contains(&format!("{:?}", e.eta(&sys))),
                "V(f) entry {} missing from V(f^2)",
                e.display(&sys)
            );
        }
    }

    #[test]
    fn v4_fixture_a_contains_longer_entries() {
        let sys = fixture_a();
        let sess = Session::new(&sys, Caps::default()).unwrap();
        let v4 = enumerate_v(&sess, 4).unwrap();
        assert!(v4.len() >= 6);
        // The entry with branches "b a" and "c" (eta = "A B c") is a member
        // at power 4: images share f^3(a) . f^2(a) . f(a) . a.
        let found = v4.iter().any(|e| {
            let mut bs = [e.branch1.len(), e.branch2.len()];
            bs.sort();
            e.len() == 3 && bs == [1, 2]
        });
        assert!(found, "expected a length-3 entry in V(f^4)");
        // All branch turns are allowed.
        for e in &v4 {
            assert!(branches_use_allowed_turns(&sess, 4, e).unwrap());
        }
    }

    #[test]
    fn relative_fixture_has_empty_v() {
        use crate::gos::{AttachPoint, GosMorphism, GraphOfSpaces, VertexMap, VertexSpace};
        let mut sp = VertexSpace::new("v");
        sp.add_vertex("p").unwrap();
        sp.add_edge("x", "p", "p").unwrap();
        let mut g = GraphOfSpaces::new();
        let sid = g.add_space(sp).unwrap();
        let at = AttachPoint { space: sid, vertex: 0 };
        g.add_top_edge("b", at, at).unwrap();
        let x = crate::gos::LocalPath::new(&g, sid, 0, vec![0]).unwrap();
        let vm = VertexMap {
            target: sid,
            vertices: vec![0],
            edges: vec![x.clone(), x.reversed()],
        };
        let img = parse_edge_path(&g, "b {x} b").unwrap();
        let map = GosMorphism::new(&g, vec![vm], vec![img]).unwrap();
        let sys = System::new(g, map).unwrap();
        let sess = Session::new(&sys, Caps::default()).unwrap();
        assert!(enumerate_v(&sess, 1).unwrap().is_empty());
    }

    #[test]
    fn trim_roundtrip() {
        let sys = fixture_a();
        let sess = Session::new(&sys, Caps::default()).unwrap();
        // A member fed back unchanged returns itself.
        let m = v_membership(&sess, 1, &branch(&sys, "c"), &branch(&sys, "e"), &tip(&sys))
            .unwrap()
            .unwrap();
        let trimmed = trim_to_v(&sess, 1, &m.branch1, &m.branch2, &m.tip).unwrap();
        assert_eq!(trimmed, m);
        // Extended branches trim back to a member.
        let got = trim_to_v(&sess, 1, &branch(&sys, "c c"), &branch(&sys, "e"), &tip(&sys)).unwrap();
        assert_eq!(got.len(), 2);
    }
}
