//! The walk-to-map procedure, its incremental builder state, and the
//! inverse map-to-walk encoding.

use crate::error::Error;
use crate::map::{BoundarySegments, Edge, EdgeId, OrientedMap, VertexId};
use crate::walk::{Step, Walk};
use crate::Result;
use std::collections::VecDeque;

/// Incremental construction state. After `j` steps the boundary stacks
/// satisfy L(j) = #UL - #LL - 1 and R(j) = #UR - #LR + 1.
#[derive(Debug, Clone)]
pub struct Builder {
    edges: Vec<Edge>,
    rotation: Vec<VecDeque<EdgeId>>,
    active: EdgeId,
    trace: Vec<EdgeId>,
    upper_left: Vec<EdgeId>,
    upper_right: VecDeque<EdgeId>,
    lower_left: VecDeque<EdgeId>,
    lower_right: Vec<EdgeId>,
}

impl Default for Builder {
    fn default() -> Self {
        Self::new()
    }
}

impl Builder {
    /// The initial map: a single directed active edge.
    pub fn new() -> Builder {
        let root = Edge { tail: 0, head: 1, missing: false };
        Builder {
            edges: vec![root],
            rotation: vec![VecDeque::from([0]), VecDeque::from([0])],
            active: 0,
            trace: vec![0],
            upper_left: vec![0],
            upper_right: VecDeque::new(),
            lower_left: VecDeque::new(),
            lower_right: vec![0],
        }
    }

    pub fn step_index(&self) -> usize {
        self.trace.len() - 1
    }

    pub fn active_edge(&self) -> EdgeId {
        self.active
    }

    fn new_vertex(&mut self) -> VertexId {
        self.rotation.push(VecDeque::new());
        self.rotation.len() - 1
    }

    fn push_edge(&mut self, tail: VertexId, head: VertexId, missing: bool) -> EdgeId {
        self.edges.push(Edge { tail, head, missing });
        self.edges.len() - 1
    }

    /// Applies one step of the procedure.
    pub fn extend(&mut self, step: Step) {
        let lambda = self.active;
        let (a, b) = (self.edges[lambda].tail, self.edges[lambda].head);
        match step {
            Step::A => {
                if let Some(e) = self.upper_right.pop_front() {
                    // Consume the missing edge immediately east of the
                    // active edge, orienting it west to east.
                    debug_assert_eq!(self.edges[e].tail, b);
                    self.edges[e].missing = false;
                    self.upper_left.push(e);
                    self.active = e;
                } else {
                    // Fresh edge hanging east of the active head; it lies
                    // on no triangle and extends the lower-right boundary.
                    let c = self.new_vertex();
                    let e = self.push_edge(b, c, false);
                    self.rotation[b].push_back(e);
                    self.rotation[c].push_back(e);
                    self.upper_left.push(e);
                    self.lower_right.push(e);
                    self.active = e;
                }
            }
            Step::B => {
                self.upper_left.pop();
                if let Some(&f) = self.upper_left.last() {
                    // Close a triangle over the upper-left edge west of the
                    // active edge.
                    let w = self.edges[f].tail;
                    let e = self.push_edge(w, b, false);
                    self.rotation[w].push_back(e);
                    self.rotation[b].push_front(e);
                    self.upper_left.pop();
                    self.upper_left.push(e);
                    self.active = e;
                } else {
                    // Close a triangle to the west with a new missing edge
                    // on the lower-left boundary.
                    let v = self.new_vertex();
                    let g = self.push_edge(v, a, true);
                    let e = self.push_edge(v, b, false);
                    self.rotation[a].push_back(g);
                    self.rotation[v].push_back(g);
                    self.rotation[v].push_back(e);
                    self.rotation[b].push_front(e);
                    self.upper_left.push(e);
                    self.lower_left.push_front(g);
                    self.active = e;
                }
            }
            Step::C => {
                // New triangle above the active edge with a new missing
                // edge on the upper-right boundary.
                let c = self.new_vertex();
                let e = self.push_edge(a, c, false);
                let h = self.push_edge(c, b, true);
                self.rotation[a].push_back(e);
                self.rotation[c].push_back(e);
                self.rotation[c].push_back(h);
                self.rotation[b].push_front(h);
                self.upper_left.pop();
                self.upper_left.push(e);
                self.upper_right.push_front(h);
                self.active = e;
            }
        }
        self.trace.push(self.active);
        debug_assert_eq!(
            self.boundary_segments().lengths(),
            (
                self.upper_left.len(),
                self.lower_left.len(),
                self.lower_right.len(),
                self.upper_right.len()
            )
        );
    }

    /// The boundary bookkeeping carried by the builder.
    pub fn boundary_segments(&self) -> BoundarySegments {
        BoundarySegments {
            upper_left: self.upper_left.clone(),
            lower_left: self.lower_left.iter().copied().collect(),
            lower_right: self.lower_right.clone(),
            upper_right: self.upper_right.iter().copied().collect(),
        }
    }

    /// Running boundary-length identity: (L(j), R(j)) recovered from the
    /// stack sizes.
    pub fn walk_position(&self) -> (i64, i64) {
        (
            self.upper_left.len() as i64 - self.lower_left.len() as i64 - 1,
            self.upper_right.len() as i64 - self.lower_right.len() as i64 + 1,
        )
    }

    pub fn finish(self) -> OrientedMap {
        OrientedMap {
            edges: self.edges,
            rotation: self.rotation.into_iter().map(|r| r.into_iter().collect()).collect(),
            root_edge: Some(0),
            active_trace: Some(self.trace),
        }
    }
}

/// Builds the triangulation of a walk. Only increments matter; the walk's
/// start point is ignored.
pub fn build(walk: &Walk) -> OrientedMap {
    let mut b = Builder::new();
    for &s in &walk.steps {
        b.extend(s);
    }
    b.finish()
}

/// Boundary segment lengths (UL, LL, LR, UR) read off the walk: with
/// minima over [0, n] including time 0,
/// UL = L(n) - min L + 1, LL = -min L, LR = -min R + 1, UR = R(n) - min R.
pub fn boundary_lengths_from_walk(walk: &Walk) -> (usize, usize, usize, usize) {
    assert_eq!(walk.start, (0, 0));
    let mut min_l = 0i64;
    let mut min_r = 0i64;
    let (mut l, mut r) = (0i64, 0i64);
    for s in &walk.steps {
        let (dl, dr) = s.increment();
        l += dl;
        r += dr;
        min_l = min_l.min(l);
        min_r = min_r.min(r);
    }
    (
        (l - min_l + 1) as usize,
        (-min_l) as usize,
        (-min_r + 1) as usize,
        (r - min_r) as usize,
    )
}

/// The inverse encoding: recovers the walk from a finite bipolar-oriented
/// triangulation with no missing edges.
///
/// The left tree keeps the leftmost incoming edge at each vertex, the
/// right tree the rightmost outgoing edge; edges are ordered by the
/// counterclockwise contour of the left tree, and the walk reads off tree
/// heights of the consecutive edge endpoints.
pub fn invert(map: &OrientedMap) -> Result<Walk> {
    if map.edges.iter().any(|e| e.missing) {
        return Err(Error::NotBipolar("map has missing edges".into()));
    }
    let n = map.edge_count();
    if n == 0 {
        return Err(Error::NotBipolar("empty edge set".into()));
    }
    let nv = map.vertex_count();
    let mut has_in = vec![false; nv];
    let mut has_out = vec![false; nv];
    for e in &map.edges {
        has_out[e.tail] = true;
        has_in[e.head] = true;
    }
    let sources: Vec<_> = (0..nv).filter(|&v| !has_in[v] && has_out[v]).collect();
    let sinks: Vec<_> = (0..nv).filter(|&v| has_in[v] && !has_out[v]).collect();
    if sources.len() != 1 || sinks.len() != 1 {
        return Err(Error::NotBipolar(format!(
            "{} sources and {} sinks",
            sources.len(),
            sinks.len()
        )));
    }
    let source = sources[0];
    let sink = sinks[0];

    // Left tree: parent edge of v is its leftmost incoming edge.
    let mut left_parent = vec![None; nv];
    // Right tree: parent edge of v is its rightmost outgoing edge.
    let mut right_parent = vec![None; nv];
    for v in 0..nv {
        if v != source {
            left_parent[v] = map.leftmost_incoming(v);
            if left_parent[v].is_none() {
                return Err(Error::NotBipolar(format!("vertex {v} has no incoming edge")));
            }
        }
        if v != sink {
            right_parent[v] = map.rightmost_outgoing(v);
            if right_parent[v].is_none() {
                return Err(Error::NotBipolar(format!("vertex {v} has no outgoing edge")));
            }
        }
    }
    let left_height = tree_heights(nv, &left_parent, |e| map.edges[e].tail, source)?;
    let right_height = tree_heights(nv, &right_parent, |e| map.edges[e].head, sink)?;

    // Counterclockwise contour of the left tree, visiting all n edges.
    // Disconnected incoming edges dangle at their tails, so at each vertex
    // the tree-incident items are its outgoing edges plus its parent edge.
    let mut order = Vec::with_capacity(n);
    // Stack entries: (vertex, rotation index offset, anchor position, len).
    let rot_pos = |v: VertexId, e: EdgeId| {
        map.rotation[v].iter().position(|&x| x == e).expect("edge in rotation")
    };
    let mut stack: Vec<(VertexId, usize, usize)> = Vec::new();
    // At the root the contour starts at the linear start of the rotation
    // (the external gap); elsewhere just after the parent edge.
    stack.push((source, 0, 0));
    while let Some((v, anchor, consumed)) = stack.pop() {
        let deg = map.rotation[v].len();
        let mut advanced = false;
        for i in consumed..deg {
            let e = map.rotation[v][(anchor + i) % deg];
            let rec = &map.edges[e];
            if rec.tail != v {
                continue; // disconnected incoming edge, attached elsewhere
            }
            order.push(e);
            if left_parent[rec.head] == Some(e) {
                stack.push((v, anchor, i + 1));
                let child_anchor = (rot_pos(rec.head, e) + 1) % map.rotation[rec.head].len();
                stack.push((rec.head, child_anchor, 0));
                advanced = true;
                break;
            }
        }
        let _ = advanced;
    }
    if order.len() != n {
        return Err(Error::NotBipolar(format!(
            "contour visited {} of {} edges",
            order.len(),
            n
        )));
    }

    // Right boundary length fixes the vertical normalization.
    let r_len = right_height[source] as i64;
    let mut coords = Vec::with_capacity(n);
    for &e in &order {
        let l = left_height[map.edges[e].tail] as i64;
        let r = right_height[map.edges[e].head] as i64 - (r_len - 1);
        coords.push((l, r));
    }
    if coords[0] != (0, 0) {
        return Err(Error::NotBipolar(format!(
            "contour does not start at the origin: {:?}",
            coords[0]
        )));
    }
    let mut steps = Vec::with_capacity(n - 1);
    for w in coords.windows(2) {
        let d = (w[1].0 - w[0].0, w[1].1 - w[0].1);
        let step = match d {
            (1, -1) => Step::A,
            (-1, 0) => Step::B,
            (0, 1) => Step::C,
            _ => {
                return Err(Error::NotBipolar(format!(
                    "contour increment {d:?} outside the step set"
                )))
            }
        };
        steps.push(step);
    }
    Ok(Walk::from_origin(steps))
}

fn tree_heights(
    nv: usize,
    parent: &[Option<EdgeId>],
    parent_vertex: impl Fn(EdgeId) -> VertexId,
    root: VertexId,
) -> Result<Vec<u32>> {
    let mut height = vec![u32::MAX; nv];
    height[root] = 0;
    for v in 0..nv {
        if height[v] != u32::MAX {
            continue;
        }
        let mut chain = vec![v];
        let mut cur = v;
        while height[cur] == u32::MAX {
            match parent[cur] {
                Some(e) => {
                    cur = parent_vertex(e);
                    if height[cur] == u32::MAX {
                        chain.push(cur);
                    }
                }
                None => {
                    return Err(Error::NotBipolar(
                        "tree chain reached a parentless non-root vertex".into(),
                    ))
                }
            }
            if chain.len() > nv {
                return Err(Error::NotBipolar("parent chain contains a cycle".into()));
            }
        }
        let mut h = height[cur];
        for &u in chain.iter().rev() {
            h += 1;
            height[u] = h;
        }
    }
    Ok(height)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::isomorphic;

    #[test]
    fn empty_walk_is_single_edge() {
        let m = build(&Walk::from_origin(vec![]));
        assert_eq!(m.edge_count(), 1);
        assert_eq!(m.vertex_count(), 2);
        assert!(m.validate().is_valid());
        assert_eq!(m.boundary_segments().unwrap().lengths(), (1, 0, 1, 0));
    }

    #[test]
    fn walk_b_builds_one_triangle() {
        let m = build(&Walk::from_origin(vec![Step::B]));
        assert_eq!(m.vertex_count(), 3);
        assert_eq!(m.edge_count(), 3);
        assert_eq!(m.edges.iter().filter(|e| e.missing).count(), 1);
        assert!(m.validate().is_valid(), "{:?}", m.validate());
        let seg = m.boundary_segments().unwrap();
        assert_eq!(seg.lengths(), (1, 1, 1, 0));
    }

    #[test]
    fn walk_ccc_boundary() {
        let w = Walk::from_origin(vec![Step::C, Step::C, Step::C]);
        let m = build(&w);
        assert!(m.validate().is_valid(), "{:?}", m.validate());
        assert_eq!(m.boundary_segments().unwrap().lengths(), (1, 0, 1, 3));
        assert_eq!(boundary_lengths_from_walk(&w), (1, 0, 1, 3));
    }

    #[test]
    fn walk_ca_is_all_oriented_triangle() {
        let m = build(&Walk::from_origin(vec![Step::C, Step::A]));
        assert_eq!(m.edge_count(), 3);
        assert!(m.edges.iter().all(|e| !e.missing));
        let seg = m.boundary_segments().unwrap();
        assert_eq!(seg.lengths(), (2, 0, 1, 0));
    }

    #[test]
    fn extend_equals_build() {
        use crate::walk::sample_uibot_walk;
        for seed in 0..5 {
            let w = sample_uibot_walk(200, seed);
            let mut b = Builder::new();
            for &s in &w.steps {
                b.extend(s);
            }
            let m1 = b.finish();
            let m2 = build(&w);
            assert_eq!(m1, m2);
        }
    }

    #[test]
    fn builder_walk_position_tracks_walk() {
        use crate::walk::sample_uibot_walk;
        let w = sample_uibot_walk(500, 3);
        let mut b = Builder::new();
        let pos = w.positions();
        for (j, &s) in w.steps.iter().enumerate() {
            b.extend(s);
            assert_eq!(b.walk_position(), pos[j + 1]);
        }
    }

    #[test]
    fn invert_single_edge() {
        let m = build(&Walk::from_origin(vec![]));
        assert_eq!(invert(&m).unwrap(), Walk::from_origin(vec![]));
    }

    #[test]
    fn invert_ca_triangle() {
        let m = build(&Walk::from_origin(vec![Step::C, Step::A]));
        assert_eq!(invert(&m).unwrap(), Walk::from_origin(vec![Step::C, Step::A]));
    }

    #[test]
    fn invert_rejects_missing_edges() {
        let m = build(&Walk::from_origin(vec![Step::B]));
        assert!(invert(&m).is_err());
    }

    #[test]
    fn roundtrip_random_cone_walks() {
        use crate::enumerate::{enum_walks_in_cone, ConeSpec};
        // All admissible cone walks of length <= 6 round-trip exactly.
        for n in 0..=6usize {
            for walk in enum_walks_in_cone(n, (0, 0), None, ConeSpec::quadrant()).unwrap() {
                let m = build(&walk);
                if m.edges.iter().any(|e| e.missing) {
                    continue;
                }
                let back = invert(&m).expect("invertible");
                assert_eq!(back.steps, walk.steps, "walk {:?}", walk.steps);
            }
        }
    }

    #[test]
    fn build_invert_build_isomorphic() {
        use crate::walk::sample_uibot_walk;
        for seed in 0..10 {
            let w = sample_uibot_walk(60, seed);
            let m = build(&w);
            if m.edges.iter().any(|e| e.missing) {
                continue;
            }
            let w2 = invert(&m).unwrap();
            let m2 = build(&w2);
            assert!(isomorphic(&m, &m2));
        }
    }
}
