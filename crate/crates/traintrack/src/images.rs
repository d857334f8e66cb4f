//! Lazy machinery for iterated images `f^t(path)`: exact lengths, common
//! prefixes, and item access, all without materializing the images. Image
//! blocks are compared with block skipping, so common prefixes of length
//! exponential in `t` cost only polynomial work.

use crate::gos::{EdgePath, LocalPath, OEdge, System};
use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

/// Shared memo tables over one system.
pub struct ImageView<'a> {
    pub sys: &'a System,
    lens: RwLock<Vec<Vec<u128>>>, // lens[t][oedge]
    conns: RwLock<HashMap<(LocalPath, u32), LocalPath>>,
    expansions: RwLock<HashMap<(u32, u32), Arc<Vec<Item>>>>,
}

/// One item of a partially expanded image stream. An `Edge(e, lvl)` stands
/// for the whole block `f^lvl(e)`; connectors are fully imaged local paths.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Item {
    Edge(OEdge, u32),
    Conn(LocalPath),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommonPrefix {
    /// Number of matching leading edges (connectors between them equal).
    pub edges: u128,
    pub left_exhausted: bool,
    pub right_exhausted: bool,
}

impl<'a> ImageView<'a> {
    pub fn new(sys: &'a System) -> Self {
        let base: Vec<u128> = sys.graph.oriented_tops().map(|_| 1).collect();
        ImageView {
            sys,
            lens: RwLock::new(vec![base]),
            conns: RwLock::new(HashMap::new()),
            expansions: RwLock::new(HashMap::new()),
        }
    }

    /// |f^t(e)| with exact overflow-checked arithmetic.
    pub fn edge_len(&self, e: OEdge, t: u32) -> Result<u128> {
        {
            let lens = self.lens.read().unwrap();
            if let Some(row) = lens.get(t as usize) {
                return Ok(row[e.0 as usize]);
            }
        }
        let mut lens = self.lens.write().unwrap();
        while lens.len() <= t as usize {
            let prev = lens.last().unwrap().clone();
            let mut next = Vec::with_capacity(prev.len());
            for oe in self.sys.graph.oriented_tops() {
                let mut total: u128 = 0;
                for &x in &self.sys.map.edge_image(oe).edges {
                    total = total.checked_add(prev[x.0 as usize]).ok_or(Error::Capacity {
                        cap: "image length overflow",
                        limit: u128::MAX,
                    })?;
                }
                next.push(total);
            }
            lens.push(next);
        }
        Ok(lens[t as usize][e.0 as usize])
    }

    /// |f^t(path)| = sum of the image lengths of its edges.
    pub fn path_len(&self, path: &EdgePath, t: u32) -> Result<u128> {
        let mut total: u128 = 0;
        for &e in &path.edges {
            total = total.checked_add(self.edge_len(e, t)?).ok_or(Error::Capacity {
                cap: "image length overflow",
                limit: u128::MAX,
            })?;
        }
        Ok(total)
    }

    /// Length of f^t over the first `j` edges of the path.
    pub fn prefix_len(&self, path: &EdgePath, j: usize, t: u32) -> Result<u128> {
        let mut total: u128 = 0;
        for &e in &path.edges[..j] {
            total += self.edge_len(e, t)?;
        }
        Ok(total)
    }

    /// `[f^t(chi)]` for a connecting path, memoized.
    pub fn conn_image(&self, chi: &LocalPath, t: u32) -> LocalPath {
        if t == 0 || chi.is_trivial() {
            let mut cur = chi.clone();
            for _ in 0..t {
                cur = self.sys.map.map_local(&cur);
            }
            return cur;
        }
        if let Some(hit) = self.conns.read().unwrap().get(&(chi.clone(), t)) {
            return hit.clone();
        }
        let prev = self.conn_image(chi, t - 1);
        let img = self.sys.map.map_local(&prev);
        self.conns
            .write()
            .unwrap()
            .insert((chi.clone(), t), img.clone());
        img
    }

    /// Children of the block `f^lvl(e)` at level `lvl - 1`, memoized.
    fn expand(&self, e: OEdge, lvl: u32) -> Arc<Vec<Item>> {
        debug_assert!(lvl >= 1);
        if let Some(hit) = self.expansions.read().unwrap().get(&(e.0, lvl)) {
            return hit.clone();
        }
        let img = self.sys.map.edge_image(e);
        let mut items = Vec::with_capacity(2 * img.edges.len());
        for (i, &x) in img.edges.iter().enumerate() {
            if i > 0 {
                items.push(Item::Conn(self.conn_image(&img.conns[i - 1], lvl - 1)));
            }
            items.push(Item::Edge(x, lvl - 1));
        }
        let arc = Arc::new(items);
        self.expansions
            .write()
            .unwrap()
            .insert((e.0, lvl), arc.clone());
        arc
    }

    fn path_items(&self, path: &EdgePath, t: u32) -> Vec<Item> {
        let mut items = Vec::with_capacity(2 * path.edges.len());
        for (i, &e) in path.edges.iter().enumerate() {
            if i > 0 {
                items.push(Item::Conn(self.conn_image(&path.conns[i - 1], t)));
            }
            items.push(Item::Edge(e, t));
        }
        items
    }

    /// Common prefix of `f^t(left)` and `f^t(right)` at full-edge granularity
    /// with literal connector comparison. The streams never materialize more
    /// than the divergence fringe.
    pub fn common_prefix(&self, left: &EdgePath, right: &EdgePath, t: u32) -> Result<CommonPrefix> {
        let mut ls = Stream::new(self.path_items(left, t));
        let mut rs = Stream::new(self.path_items(right, t));
        let mut edges: u128 = 0;
        let mut guard: u64 = 0;
        loop {
            guard += 1;
            if guard > 50_000_000 {
                return Err(Error::Capacity {
                    cap: "common prefix comparison steps",
                    limit: 50_000_000,
                });
            }
            let li = ls.peek().cloned();
            let ri = rs.peek().cloned();
            match (li, ri) {
                (None, None) => {
                    return Ok(CommonPrefix {
                        edges,
                        left_exhausted: true,
                        right_exhausted: true,
                    })
                }
                (None, Some(_)) => {
                    return Ok(CommonPrefix {
                        edges,
                        left_exhausted: true,
                        right_exhausted: false,
                    })
                }
                (Some(_), None) => {
                    return Ok(CommonPrefix {
                        edges,
                        left_exhausted: false,
                        right_exhausted: true,
                    })
                }
                (Some(Item::Conn(a)), Some(Item::Conn(b))) => {
                    if a == b {
                        ls.advance();
                        rs.advance();
                    } else {
                        return Ok(CommonPrefix {
                            edges,
                            left_exhausted: false,
                            right_exhausted: false,
                        });
                    }
                }
                (Some(Item::Edge(e, l)), Some(Item::Edge(e2, l2))) => {
                    if e == e2 && l == l2 {
                        edges += self.edge_len(e, l)?;
                        ls.advance();
                        rs.advance();
                    } else if l > l2 && l > 0 {
                        ls.descend(self.expand(e, l));
                    } else if l2 > l && l2 > 0 {
                        rs.descend(self.expand(e2, l2));
                    } else if l == 0 && l2 == 0 {
                        return Ok(CommonPrefix {
                            edges,
                            left_exhausted: false,
                            right_exhausted: false,
                        });
                    } else {
                        ls.descend(self.expand(e, l));
                        rs.descend(self.expand(e2, l2));
                    }
                }
                _ => {
                    return Err(Error::Internal(
                        "image streams lost edge/connector alignment".into(),
                    ))
                }
            }
        }
    }

    /// The k-th (1-based) edge of `f^t(path)`, without materializing.
    pub fn nth_edge(&self, path: &EdgePath, t: u32, k: u128) -> Result<OEdge> {
        if k == 0 || k > self.path_len(path, t)? {
            return Err(Error::Domain("edge index out of range".into()));
        }
        let mut k = k;
        for &e in &path.edges {
            let l = self.edge_len(e, t)?;
            if k <= l {
                return self.nth_edge_in(e, t, k);
            }
            k -= l;
        }
        unreachable!()
    }

    fn nth_edge_in(&self, e: OEdge, t: u32, mut k: u128) -> Result<OEdge> {
        let mut cur = e;
        let mut lvl = t;
        'down: while lvl > 0 {
            let img = self.sys.map.edge_image(cur);
            for &x in &img.edges.clone() {
                let l = self.edge_len(x, lvl - 1)?;
                if k <= l {
                    cur = x;
                    lvl -= 1;
                    continue 'down;
                }
                k -= l;
            }
            return Err(Error::Internal("edge index descent out of range".into()));
        }
        Ok(cur)
    }

    /// The connector after the k-th (1-based) edge of `f^t(path)`, for
    /// `1 <= k < |f^t(path)|`.
    pub fn conn_after(&self, path: &EdgePath, t: u32, k: u128) -> Result<LocalPath> {
        let total = self.path_len(path, t)?;
        if k == 0 || k >= total {
            return Err(Error::Domain("connector index out of range".into()));
        }
        let mut k = k;
        for (i, &e) in path.edges.iter().enumerate() {
            let l = self.edge_len(e, t)?;
            if k < l {
                return self.conn_after_in(e, t, k);
            }
            if k == l {
                return Ok(self.conn_image(&path.conns[i], t));
            }
            k -= l;
        }
        unreachable!()
    }

    fn conn_after_in(&self, e: OEdge, t: u32, mut k: u128) -> Result<LocalPath> {
        // 1 <= k < edge_len(e, t): strictly interior.
        let mut cur = e;
        let mut lvl = t;
        'down: loop {
            debug_assert!(lvl >= 1);
            let img = self.sys.map.edge_image(cur).clone();
            for (i, &x) in img.edges.iter().enumerate() {
                let l = self.edge_len(x, lvl - 1)?;
                if k < l {
                    cur = x;
                    lvl -= 1;
                    continue 'down;
                }
                if k == l {
                    return Ok(self.conn_image(&img.conns[i], lvl - 1));
                }
                k -= l;
            }
            return Err(Error::Internal("connector descent out of range".into()));
        }
    }
}

/// Lazy depth-first stream over nested image blocks.
struct Stream {
    stack: Vec<(Arc<Vec<Item>>, usize)>,
}

impl Stream {
    fn new(top: Vec<Item>) -> Stream {
        Stream {
            stack: vec![(Arc::new(top), 0)],
        }
    }

    fn normalize(&mut self) {
        while let Some((items, pos)) = self.stack.last() {
            if *pos >= items.len() {
                self.stack.pop();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<&Item> {
        self.normalize();
        let (items, pos) = self.stack.last()?;
        items.get(*pos)
    }

    fn advance(&mut self) {
        self.normalize();
        if let Some((_, pos)) = self.stack.last_mut() {
            *pos += 1;
        }
    }

    /// Replace the current Edge item by its expansion.
    fn descend(&mut self, children: Arc<Vec<Item>>) {
        self.normalize();
        if let Some((_, pos)) = self.stack.last_mut() {
            *pos += 1;
        }
        self.stack.push((children, 0));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gos::parse_edge_path;

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

    #[test]
    fn lengths_match_materialization() {
        let sys = fixture_a();
        let view = ImageView::new(&sys);
        let g = &sys.graph;
        for tok in ["a", "b", "c", "D", "E"] {
            let e = g.top_by_token(tok).unwrap();
            for t in 1..=4u32 {
                let img = sys.iterate_edge_image(e, t, 1 << 24).unwrap();
                assert_eq!(view.edge_len(e, t).unwrap(), img.len() as u128);
            }
        }
    }

    #[test]
    fn common_prefix_matches_materialization() {
        let sys = fixture_a();
        let view = ImageView::new(&sys);
        let g = &sys.graph;
        let pairs = [
            ("c", "e", 1),
            ("c", "e", 4),
            ("b a", "c", 4),
            ("b", "c", 4),
            ("b a", "e a", 3),
            ("d", "f", 2),
            ("c c", "c c", 2),
        ];
        for (l, r, t) in pairs {
            let lp = parse_edge_path(g, l).unwrap();
            let rp = parse_edge_path(g, r).unwrap();
            let li = sys.iterate_path(&lp, t, 1 << 24).unwrap();
            let ri = sys.iterate_path(&rp, t, 1 << 24).unwrap();
            let mut expect = 0u128;
            for i in 0..li.len().min(ri.len()) {
                if i > 0 && li.conns[i - 1] != ri.conns[i - 1] {
                    break;
                }
                if li.edges[i] != ri.edges[i] {
                    break;
                }
                expect = (i + 1) as u128;
            }
            let got = view.common_prefix(&lp, &rp, t).unwrap();
            assert_eq!(got.edges, expect, "common prefix of f^{t}({l}) vs f^{t}({r})");
            assert_eq!(got.left_exhausted, expect == li.len() as u128);
            assert_eq!(got.right_exhausted, expect == ri.len() as u128);
        }
    }

    #[test]
    fn fixture_a_known_prefixes() {
        let sys = fixture_a();
        let view = ImageView::new(&sys);
        let g = &sys.graph;
        let c = parse_edge_path(g, "c").unwrap();
        let e = parse_edge_path(g, "e").unwrap();
        // The matched prefix stops one edge short of |f^t(c)|.
        for t in 1..=4u32 {
            let got = view.common_prefix(&c, &e, t).unwrap();
            let lc = view.edge_len(g.top_by_token("c").unwrap(), t).unwrap();
            assert_eq!(got.edges, lc - 1);
        }
        // Full-branch match: f^4(b) is a prefix of f^4(c).
        let b = parse_edge_path(g, "b").unwrap();
        let got = view.common_prefix(&b, &c, 4).unwrap();
        assert!(got.left_exhausted);
        assert_eq!(
            got.edges,
            view.edge_len(g.top_by_token("b").unwrap(), 4).unwrap()
        );
    }

    #[test]
    fn nth_edge_and_conn_match_materialization() {
        let sys = fixture_a();
        let view = ImageView::new(&sys);
        let g = &sys.graph;
        let p = parse_edge_path(g, "b a").unwrap();
        for t in 1..=3u32 {
            let img = sys.iterate_path(&p, t, 1 << 24).unwrap();
            for k in 1..=img.len() as u128 {
                assert_eq!(view.nth_edge(&p, t, k).unwrap(), img.edges[k as usize - 1]);
            }
            for k in 1..img.len() as u128 {
                assert_eq!(
                    view.conn_after(&p, t, k).unwrap(),
                    img.conns[k as usize - 1]
                );
            }
        }
    }
}
