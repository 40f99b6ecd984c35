//! Planar maps with directed edges, missing boundary edges, and per-vertex
//! rotation systems.
//!
//! Rotations are stored counterclockwise. For a vertex on the external face
//! the vector is cut so that the external face sits at the linear
//! wraparound; all constructors in this crate maintain that convention.
//! "Left of a directed edge" means the face on the counterclockwise side
//! from tail to head.

use crate::error::Error;
use crate::Result;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub tail: VertexId,
    pub head: VertexId,
    pub missing: bool,
}

impl Edge {
    pub fn other(&self, v: VertexId) -> VertexId {
        if self.tail == v {
            self.head
        } else {
            self.tail
        }
    }
}

/// A planar map with an acyclic orientation on its non-missing edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientedMap {
    pub edges: Vec<Edge>,
    /// Counterclockwise cyclic order of incident edge ids per vertex.
    pub rotation: Vec<Vec<EdgeId>>,
    /// The root edge; `None` only for a single-vertex map.
    pub root_edge: Option<EdgeId>,
    /// Active edge id per construction step, when built incrementally.
    pub active_trace: Option<Vec<EdgeId>>,
}

/// A dart is one of the two ends of an edge: `positive` darts are based at
/// the tail and point along the orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dart {
    pub edge: EdgeId,
    pub positive: bool,
}

impl Dart {
    pub fn pos(edge: EdgeId) -> Dart {
        Dart { edge, positive: true }
    }
    pub fn neg(edge: EdgeId) -> Dart {
        Dart { edge, positive: false }
    }
    pub fn reversed(self) -> Dart {
        Dart { edge: self.edge, positive: !self.positive }
    }
    pub fn index(self) -> usize {
        2 * self.edge + usize::from(!self.positive)
    }
}

/// The four boundary segments of the external face, each in west-to-east
/// order. Oriented edges sit on the upper-left and lower-right segments,
/// missing edges on the lower-left and upper-right.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundarySegments {
    pub upper_left: Vec<EdgeId>,
    pub lower_left: Vec<EdgeId>,
    pub lower_right: Vec<EdgeId>,
    pub upper_right: Vec<EdgeId>,
}

impl BoundarySegments {
    pub fn lengths(&self) -> (usize, usize, usize, usize) {
        (
            self.upper_left.len(),
            self.lower_left.len(),
            self.lower_right.len(),
            self.upper_right.len(),
        )
    }
}

/// Signed boundary-vertex indexing: `vertex(k)` is defined for
/// `-lower_left.len() <= k <= lower_right.len()`, with `vertex(0)` and
/// `vertex(1)` the tail and head of the root edge.
#[derive(Debug, Clone)]
pub struct BoundaryIndexing {
    /// Vertices along the lower boundary west to east; `offset` is the
    /// position of x_0 in this list.
    pub vertices: Vec<VertexId>,
    pub offset: usize,
}

impl BoundaryIndexing {
    pub fn vertex(&self, k: i64) -> Option<VertexId> {
        let idx = self.offset as i64 + k;
        if idx < 0 || idx as usize >= self.vertices.len() {
            None
        } else {
            Some(self.vertices[idx as usize])
        }
    }

    pub fn min_index(&self) -> i64 {
        -(self.offset as i64)
    }

    pub fn max_index(&self) -> i64 {
        (self.vertices.len() - 1 - self.offset) as i64
    }
}

/// One violated invariant together with a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Directed cycle (edge ids along the cycle).
    Cycle(Vec<EdgeId>),
    /// Bounded face with a boundary length other than 3 that is not a bare
    /// edge (edge ids along the face).
    NonTriangleFace(Vec<EdgeId>),
    /// Vertex whose non-missing incident edges do not split into one
    /// contiguous incoming and one contiguous outgoing block.
    NonContiguousBlocks(VertexId),
    /// Missing edge not on the external face.
    MissingEdgeInterior(EdgeId),
    /// Rotation system inconsistent with the edge list.
    BadRotation(String),
    /// The embedding is not planar or not connected.
    NotPlanar { vertices: usize, edges: usize, faces: usize },
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl OrientedMap {
    pub fn vertex_count(&self) -> usize {
        self.rotation.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn oriented_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| !e.missing).count()
    }

    pub fn single_vertex() -> OrientedMap {
        OrientedMap {
            edges: Vec::new(),
            rotation: vec![Vec::new()],
            root_edge: None,
            active_trace: None,
        }
    }

    /// The dart of `e` based at `v`.
    pub fn dart_at(&self, e: EdgeId, v: VertexId) -> Dart {
        debug_assert!(self.edges[e].tail == v || self.edges[e].head == v);
        Dart { edge: e, positive: self.edges[e].tail == v }
    }

    pub fn dart_base(&self, d: Dart) -> VertexId {
        if d.positive {
            self.edges[d.edge].tail
        } else {
            self.edges[d.edge].head
        }
    }

    /// Next dart counterclockwise around the base vertex of `d`.
    pub fn rotation_next(&self, d: Dart) -> Dart {
        let v = self.dart_base(d);
        let rot = &self.rotation[v];
        let i = rot
            .iter()
            .position(|&e| e == d.edge)
            .expect("dart edge present in rotation");
        let e2 = rot[(i + 1) % rot.len()];
        self.dart_at(e2, v)
    }

    /// Next dart of the face to the right of `d`. Under the CCW rotation
    /// convention bounded faces traverse clockwise; the face to the left of
    /// a directed edge `e` is the orbit of its reverse dart.
    pub fn face_next(&self, d: Dart) -> Dart {
        self.rotation_next(d.reversed())
    }

    /// All faces as dart cycles. Each inner vector lists the darts of one
    /// face in traversal order.
    pub fn faces(&self) -> Vec<Vec<Dart>> {
        let n = self.edges.len();
        let mut seen = vec![false; 2 * n];
        let mut out = Vec::new();
        for e in 0..n {
            for d in [Dart::pos(e), Dart::neg(e)] {
                if seen[d.index()] {
                    continue;
                }
                let mut cycle = Vec::new();
                let mut cur = d;
                while !seen[cur.index()] {
                    seen[cur.index()] = true;
                    cycle.push(cur);
                    cur = self.face_next(cur);
                }
                out.push(cycle);
            }
        }
        out
    }

    /// Darts of the external face, starting from the forward dart of the
    /// root edge (the root lies on the lower-right boundary, so the
    /// external face is to its right).
    pub fn external_face(&self) -> Result<Vec<Dart>> {
        let root = self.root_edge.ok_or_else(|| {
            Error::InvalidMap("single-vertex map has no external face contour".into())
        })?;
        let start = Dart::pos(root);
        let mut cycle = Vec::new();
        let mut cur = start;
        loop {
            cycle.push(cur);
            cur = self.face_next(cur);
            if cur == start {
                break;
            }
            if cycle.len() > 2 * self.edges.len() {
                return Err(Error::InvalidMap("external face does not close".into()));
            }
        }
        Ok(cycle)
    }

    pub fn incoming(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.rotation[v]
            .iter()
            .copied()
            .filter(move |&e| !self.edges[e].missing && self.edges[e].head == v)
    }

    pub fn outgoing(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.rotation[v]
            .iter()
            .copied()
            .filter(move |&e| !self.edges[e].missing && self.edges[e].tail == v)
    }

    fn edge_kind(&self, v: VertexId, e: EdgeId) -> EdgeKind {
        let rec = &self.edges[e];
        if rec.missing {
            EdgeKind::Missing
        } else if rec.tail == v {
            EdgeKind::Out
        } else {
            EdgeKind::In
        }
    }

    /// The outgoing edge at `v` whose counterclockwise neighbor is incoming
    /// or external; the first edge of the leftmost directed path from `v`.
    pub fn leftmost_outgoing(&self, v: VertexId) -> Option<EdgeId> {
        self.extreme_edge(v, EdgeKind::Out, true)
    }

    /// The outgoing edge at `v` whose clockwise neighbor is incoming or
    /// external.
    pub fn rightmost_outgoing(&self, v: VertexId) -> Option<EdgeId> {
        self.extreme_edge(v, EdgeKind::Out, false)
    }

    /// The incoming edge at `v` whose clockwise neighbor is outgoing or
    /// external (the edge kept by the left tree of the inverse encoding).
    pub fn leftmost_incoming(&self, v: VertexId) -> Option<EdgeId> {
        self.extreme_edge(v, EdgeKind::In, false)
    }

    pub fn rightmost_incoming(&self, v: VertexId) -> Option<EdgeId> {
        self.extreme_edge(v, EdgeKind::In, true)
    }

    /// Extreme edge of `kind` at `v`. With `ccw_side` the returned edge is
    /// the one whose counterclockwise successor (skipping nothing) leaves
    /// the kind's block; otherwise the clockwise one. Falls back to the
    /// linear gap convention when the opposite block is empty.
    fn extreme_edge(&self, v: VertexId, kind: EdgeKind, ccw_side: bool) -> Option<EdgeId> {
        let rot = &self.rotation[v];
        let n = rot.len();
        let opposite = match kind {
            EdgeKind::Out => EdgeKind::In,
            EdgeKind::In => EdgeKind::Out,
            EdgeKind::Missing => unreachable!(),
        };
        let has_opposite = rot.iter().any(|&e| self.edge_kind(v, e) == opposite);
        if has_opposite {
            for i in 0..n {
                if self.edge_kind(v, rot[i]) != kind {
                    continue;
                }
                // Next entry of a non-missing kind in the requested direction.
                let mut j = i;
                loop {
                    j = if ccw_side { (j + 1) % n } else { (j + n - 1) % n };
                    match self.edge_kind(v, rot[j]) {
                        EdgeKind::Missing => continue,
                        k => {
                            if k == opposite {
                                return Some(rot[i]);
                            }
                            break;
                        }
                    }
                }
            }
            None
        } else {
            // No opposite block: the linear wraparound marks the external
            // face; the extreme edge is the last (ccw) or first (cw) entry
            // of the requested kind.
            let it: Box<dyn Iterator<Item = &EdgeId>> = if ccw_side {
                Box::new(rot.iter().rev())
            } else {
                Box::new(rot.iter())
            };
            for &e in it {
                if self.edge_kind(v, e) == kind {
                    return Some(e);
                }
            }
            None
        }
    }

    /// Follows leftmost outgoing edges from `v`, up to `max_len` edges or
    /// until a vertex without outgoing edges.
    pub fn leftmost_directed_path(&self, v: VertexId, max_len: usize) -> Vec<EdgeId> {
        self.directed_path_by(v, max_len, |u| self.leftmost_outgoing(u))
    }

    /// Follows rightmost outgoing edges from `v`.
    pub fn rightmost_directed_path(&self, v: VertexId, max_len: usize) -> Vec<EdgeId> {
        self.directed_path_by(v, max_len, |u| self.rightmost_outgoing(u))
    }

    fn directed_path_by(
        &self,
        v: VertexId,
        max_len: usize,
        next: impl Fn(VertexId) -> Option<EdgeId>,
    ) -> Vec<EdgeId> {
        let mut path = Vec::new();
        let mut cur = v;
        while path.len() < max_len {
            match next(cur) {
                Some(e) => {
                    path.push(e);
                    cur = self.edges[e].head;
                }
                None => break,
            }
        }
        path
    }

    /// Checks every invariant and reports violations with witnesses.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();

        // Rotation consistency.
        let mut counts = vec![0usize; self.edges.len()];
        for (v, rot) in self.rotation.iter().enumerate() {
            for &e in rot {
                if e >= self.edges.len() {
                    report
                        .violations
                        .push(Violation::BadRotation(format!("vertex {v} lists edge {e}")));
                    return report;
                }
                if self.edges[e].tail != v && self.edges[e].head != v {
                    report.violations.push(Violation::BadRotation(format!(
                        "edge {e} in rotation of non-endpoint vertex {v}"
                    )));
                }
                counts[e] += 1;
            }
        }
        for (e, c) in counts.iter().enumerate() {
            if *c != 2 {
                report.violations.push(Violation::BadRotation(format!(
                    "edge {e} appears {c} times in rotations (expected 2)"
                )));
            }
        }
        if !report.violations.is_empty() {
            return report;
        }

        // Acyclicity of non-missing edges.
        if let Some(cycle) = self.find_cycle() {
            report.violations.push(Violation::Cycle(cycle));
        }

        // Planarity and connectivity via Euler's formula.
        let faces = self.faces();
        let reachable = self.undirected_component_size();
        let v = self.vertex_count();
        let e = self.edge_count();
        let f = faces.len().max(1);
        if reachable != v || (e > 0 && v + f != e + 2) {
            report.violations.push(Violation::NotPlanar { vertices: v, edges: e, faces: f });
            return report;
        }

        // Faces: every face except the external one has degree 3, except
        // that an edge with the external face on both sides is permitted
        // (it contributes no bounded face).
        if let Some(_root) = self.root_edge {
            match self.external_face() {
                Ok(external) => {
                    let ext_first = external[0];
                    for face in &faces {
                        if face.contains(&ext_first) {
                            continue;
                        }
                        // A face consisting of darts that all appear in the
                        // external cycle is the same orbit; others are bounded.
                        if face.len() != 3 {
                            report.violations.push(Violation::NonTriangleFace(
                                face.iter().map(|d| d.edge).collect(),
                            ));
                        }
                    }
                    // Missing edges must lie on the external face.
                    for (e, rec) in self.edges.iter().enumerate() {
                        if rec.missing
                            && !external.iter().any(|d| d.edge == e)
                        {
                            report.violations.push(Violation::MissingEdgeInterior(e));
                        }
                    }
                }
                Err(_) => {
                    report
                        .violations
                        .push(Violation::BadRotation("external face does not close".into()));
                }
            }
        }

        // Contiguity of in/out blocks.
        for v in 0..self.vertex_count() {
            let kinds: Vec<EdgeKind> = self.rotation[v]
                .iter()
                .map(|&e| self.edge_kind(v, e))
                .filter(|k| *k != EdgeKind::Missing)
                .collect();
            if !blocks_contiguous(&kinds) {
                report.violations.push(Violation::NonContiguousBlocks(v));
            }
        }

        report
    }

    fn undirected_component_size(&self) -> usize {
        if self.vertex_count() == 0 {
            return 0;
        }
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &e in &self.rotation[v] {
                let w = self.edges[e].other(v);
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count
    }

    fn find_cycle(&self) -> Option<Vec<EdgeId>> {
        // Iterative DFS with colors; returns the edge ids of a directed cycle.
        let n = self.vertex_count();
        let mut color = vec![0u8; n]; // 0 white, 1 gray, 2 black
        let mut parent_edge: Vec<Option<EdgeId>> = vec![None; n];
        for start in 0..n {
            if color[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, self.out_edges(start), None::<EdgeId>)];
            color[start] = 1;
            while let Some((v, iter, _pe)) = stack.last_mut() {
                if let Some(e) = iter.next() {
                    let w = self.edges[e].head;
                    match color[w] {
                        0 => {
                            color[w] = 1;
                            parent_edge[w] = Some(e);
                            let it = self.out_edges(w);
                            stack.push((w, it, Some(e)));
                        }
                        1 => {
                            // Found a cycle: walk parents from v back to w.
                            let mut cycle = vec![e];
                            let mut cur = *v;
                            while cur != w {
                                let pe = parent_edge[cur].expect("parent on gray path");
                                cycle.push(pe);
                                cur = self.edges[pe].tail;
                            }
                            cycle.reverse();
                            return Some(cycle);
                        }
                        _ => {}
                    }
                } else {
                    color[*v] = 2;
                    stack.pop();
                }
            }
        }
        None
    }

    fn out_edges(&self, v: VertexId) -> std::vec::IntoIter<EdgeId> {
        self.outgoing(v).collect::<Vec<_>>().into_iter()
    }

    /// The four external-face segments. Requires the map to be one of the
    /// family built by the walk encoding (upper-left and lower-right
    /// oriented, lower-left and upper-right missing).
    pub fn boundary_segments(&self) -> Result<BoundarySegments> {
        let root = self
            .root_edge
            .ok_or_else(|| Error::InvalidMap("no root edge".into()))?;
        let external = self.external_face()?;
        let mut seg = BoundarySegments::default();
        // The contour from the forward root dart runs east along the
        // lower-right boundary, up and west along the upper-right missing
        // edges, west along the upper-left boundary (reverse darts), and
        // back east along the lower-left missing edges.
        #[derive(PartialEq, Clone, Copy)]
        enum Phase {
            LowerRight,
            UpperRight,
            UpperLeft,
            LowerLeft,
        }
        let mut phase = Phase::LowerRight;
        debug_assert_eq!(external[0], Dart::pos(root));
        for d in &external {
            let missing = self.edges[d.edge].missing;
            let next = match (phase, missing, d.positive) {
                (Phase::LowerRight, false, true) => Phase::LowerRight,
                (Phase::LowerRight, true, false) => Phase::UpperRight,
                (Phase::LowerRight, false, false) => Phase::UpperLeft,
                (Phase::UpperRight, true, false) => Phase::UpperRight,
                (Phase::UpperRight, false, false) => Phase::UpperLeft,
                (Phase::UpperLeft, false, false) => Phase::UpperLeft,
                (Phase::UpperLeft, true, true) => Phase::LowerLeft,
                (Phase::LowerLeft, true, true) => Phase::LowerLeft,
                _ => {
                    return Err(Error::InvalidMap(format!(
                        "malformed external contour at edge {}",
                        d.edge
                    )))
                }
            };
            phase = next;
            match phase {
                Phase::LowerRight => seg.lower_right.push(d.edge),
                Phase::UpperRight => seg.upper_right.push(d.edge),
                Phase::UpperLeft => seg.upper_left.push(d.edge),
                Phase::LowerLeft => seg.lower_left.push(d.edge),
            }
        }
        seg.upper_right.reverse();
        seg.upper_left.reverse();
        Ok(seg)
    }

    /// Signed indexing of the lower-boundary vertices with x_0 the root
    /// tail, positive indices east along the lower-right boundary and
    /// negative indices west along the lower-left boundary.
    pub fn boundary_indexing(&self) -> Result<BoundaryIndexing> {
        let seg = self.boundary_segments()?;
        let root = self.root_edge.expect("segments imply a root");
        let x0 = self.edges[root].tail;
        let mut vertices = Vec::new();
        // Lower-left edges west to east end at x0; each stored tail is the
        // west endpoint.
        for &e in &seg.lower_left {
            vertices.push(self.edges[e].tail);
        }
        let offset = vertices.len();
        vertices.push(x0);
        for &e in &seg.lower_right {
            vertices.push(self.edges[e].head);
        }
        Ok(BoundaryIndexing { vertices, offset })
    }

    /// Induced submap on the vertices reachable from `v` by directed paths,
    /// with missing edges dropped. Vertex and edge ids are compacted in
    /// increasing original order; the root becomes the rightmost outgoing
    /// edge at `v` (falling back to the original root when `v` is its tail).
    pub fn reachable_submap(&self, v: VertexId) -> OrientedMap {
        let mut keep_v = vec![false; self.vertex_count()];
        let mut queue = VecDeque::from([v]);
        keep_v[v] = true;
        while let Some(u) = queue.pop_front() {
            for e in self.outgoing(u) {
                let w = self.edges[e].head;
                if !keep_v[w] {
                    keep_v[w] = true;
                    queue.push_back(w);
                }
            }
        }
        let mut vmap = vec![usize::MAX; self.vertex_count()];
        let mut next = 0;
        for (u, keep) in keep_v.iter().enumerate() {
            if *keep {
                vmap[u] = next;
                next += 1;
            }
        }
        let mut emap = vec![usize::MAX; self.edge_count()];
        let mut edges = Vec::new();
        for (e, rec) in self.edges.iter().enumerate() {
            if !rec.missing && keep_v[rec.tail] && keep_v[rec.head] {
                emap[e] = edges.len();
                edges.push(Edge { tail: vmap[rec.tail], head: vmap[rec.head], missing: false });
            }
        }
        let mut rotation = vec![Vec::new(); next];
        for (u, keep) in keep_v.iter().enumerate() {
            if *keep {
                rotation[vmap[u]] = self.rotation[u]
                    .iter()
                    .filter(|&&e| emap[e] != usize::MAX)
                    .map(|&e| emap[e])
                    .collect();
            }
        }
        let root_edge = self
            .root_edge
            .filter(|&r| emap[r] != usize::MAX && self.edges[r].tail == v)
            .map(|r| emap[r])
            .or_else(|| {
                self.rightmost_outgoing(v)
                    .filter(|&e| emap[e] != usize::MAX)
                    .map(|e| emap[e])
            });
        OrientedMap { edges, rotation, root_edge, active_trace: None }
    }

    /// Vertices lying on both the left (upper-left) and right (lower-right)
    /// boundary of a quadrant map, ordered along the right boundary.
    pub fn cut_vertices(&self) -> Result<Vec<VertexId>> {
        let seg = self.boundary_segments()?;
        let root = self.root_edge.expect("segments imply a root");
        let mut on_left = vec![false; self.vertex_count()];
        for &e in &seg.upper_left {
            on_left[self.edges[e].tail] = true;
            on_left[self.edges[e].head] = true;
        }
        let mut out = Vec::new();
        let mut right_vertices = vec![self.edges[root].tail];
        for &e in &seg.lower_right {
            right_vertices.push(self.edges[e].head);
        }
        for v in right_vertices {
            if on_left[v] {
                out.push(v);
            }
        }
        Ok(out)
    }

    /// Canonical relabeling by a breadth-first traversal from the root
    /// edge along rotations. Two maps are isomorphic iff their canonical
    /// forms are equal.
    pub fn canonical_form(&self) -> OrientedMap {
        let Some(root) = self.root_edge else {
            return OrientedMap {
                edges: Vec::new(),
                rotation: vec![Vec::new(); self.vertex_count().min(1)],
                root_edge: None,
                active_trace: None,
            };
        };
        let mut vmap = vec![usize::MAX; self.vertex_count()];
        let mut emap = vec![usize::MAX; self.edge_count()];
        let mut e_next = 0usize;
        // Each visited vertex is anchored by the edge through which it was
        // first reached; its canonical rotation starts at that anchor.
        let start = self.edges[root].tail;
        vmap[start] = 0;
        let mut v_next = 1usize;
        let mut queue = VecDeque::from([(start, root)]);
        let mut order: Vec<(VertexId, EdgeId)> = Vec::new();
        while let Some((v, anchor)) = queue.pop_front() {
            order.push((v, anchor));
            let rot = &self.rotation[v];
            let a = rot.iter().position(|&e| e == anchor).expect("anchor incident");
            for i in 0..rot.len() {
                let e = rot[(a + i) % rot.len()];
                if emap[e] == usize::MAX {
                    emap[e] = e_next;
                    e_next += 1;
                }
                let w = self.edges[e].other(v);
                if vmap[w] == usize::MAX {
                    vmap[w] = v_next;
                    v_next += 1;
                    queue.push_back((w, e));
                }
            }
        }
        let mut edges = vec![
            Edge { tail: usize::MAX, head: usize::MAX, missing: false };
            e_next
        ];
        for (e, rec) in self.edges.iter().enumerate() {
            if emap[e] != usize::MAX {
                edges[emap[e]] = Edge {
                    tail: vmap[rec.tail],
                    head: vmap[rec.head],
                    missing: rec.missing,
                };
            }
        }
        let mut rotation = vec![Vec::new(); v_next];
        for (v, anchor) in order {
            let rot = &self.rotation[v];
            let a = rot.iter().position(|&e| e == anchor).unwrap();
            rotation[vmap[v]] = (0..rot.len()).map(|i| emap[rot[(a + i) % rot.len()]]).collect();
        }
        OrientedMap {
            edges,
            rotation,
            root_edge: Some(emap[root]),
            active_trace: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EdgeKind {
    In,
    Out,
    Missing,
}

fn blocks_contiguous(kinds: &[EdgeKind]) -> bool {
    // Cyclic sequence over {In, Out}: at most one In->Out and one Out->In
    // transition.
    let n = kinds.len();
    if n < 2 {
        return true;
    }
    let mut transitions = 0;
    for i in 0..n {
        if kinds[i] != kinds[(i + 1) % n] {
            transitions += 1;
        }
    }
    transitions <= 2
}

/// Root-preserving, rotation-preserving isomorphism of directed planar maps
/// with missing-edge status respected.
pub fn isomorphic(a: &OrientedMap, b: &OrientedMap) -> bool {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let ca = a.canonical_form();
    let cb = b.canonical_form();
    ca.edges == cb.edges && ca.rotation == cb.rotation && ca.root_edge == cb.root_edge
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The map of the empty walk: a single oriented root edge.
    pub fn single_edge() -> OrientedMap {
        OrientedMap {
            edges: vec![Edge { tail: 0, head: 1, missing: false }],
            rotation: vec![vec![0], vec![0]],
            root_edge: Some(0),
            active_trace: Some(vec![0]),
        }
    }

    #[test]
    fn single_edge_is_valid() {
        let m = single_edge();
        assert!(m.validate().is_valid(), "{:?}", m.validate());
        let seg = m.boundary_segments().unwrap();
        assert_eq!(seg.lengths(), (1, 0, 1, 0));
        assert_eq!(seg.upper_left, vec![0]);
        assert_eq!(seg.lower_right, vec![0]);
    }

    #[test]
    fn two_cycle_reports_cycle() {
        let m = OrientedMap {
            edges: vec![
                Edge { tail: 0, head: 1, missing: false },
                Edge { tail: 1, head: 0, missing: false },
            ],
            rotation: vec![vec![0, 1], vec![0, 1]],
            root_edge: Some(0),
            active_trace: None,
        };
        let report = m.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Cycle(c) if c.len() == 2)));
    }

    #[test]
    fn canonical_form_ignores_labels() {
        let m = single_edge();
        let relabeled = OrientedMap {
            edges: vec![Edge { tail: 1, head: 0, missing: false }],
            rotation: vec![vec![0], vec![0]],
            root_edge: Some(0),
            active_trace: None,
        };
        assert!(isomorphic(&m, &relabeled));
        assert!(isomorphic(&m, &m));
    }

    #[test]
    fn single_vertex_reachable_from_sink() {
        let m = single_edge();
        let sub = m.reachable_submap(1);
        assert_eq!(sub.vertex_count(), 1);
        assert_eq!(sub.edge_count(), 0);
        assert_eq!(sub.root_edge, None);
    }
}
