//! Directed-distance dynamic programming, leftmost geodesics, and geodesic
//! slices.

use crate::error::Error;
use crate::map::{EdgeId, OrientedMap, VertexId};
use crate::Result;
use serde::{Deserialize, Serialize};

/// Longest or shortest directed path length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Ldp,
    Sdp,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Ldp => "ldp",
            Mode::Sdp => "sdp",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s.to_ascii_lowercase().as_str() {
            "ldp" => Some(Mode::Ldp),
            "sdp" => Some(Mode::Sdp),
            _ => None,
        }
    }

    fn better(self, a: u32, b: u32) -> u32 {
        match self {
            Mode::Ldp => a.max(b),
            Mode::Sdp => a.min(b),
        }
    }
}

/// Per-vertex optimal directed-path lengths from a source; `None` marks
/// unreachable vertices (the infinite sentinels never enter arithmetic).
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub source: VertexId,
    pub mode: Mode,
    pub value: Vec<Option<u32>>,
}

impl DistanceField {
    pub fn get(&self, v: VertexId) -> Option<u32> {
        self.value[v]
    }
}

/// Vertex order in which every non-missing edge goes forward.
pub fn topological_order(map: &OrientedMap) -> Result<Vec<VertexId>> {
    let n = map.vertex_count();
    let mut indegree = vec![0usize; n];
    let mut edge_count = 0usize;
    for e in &map.edges {
        if !e.missing {
            indegree[e.head] += 1;
            edge_count += 1;
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut queue: Vec<VertexId> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut processed_edges = 0usize;
    while let Some(v) = queue.pop() {
        order.push(v);
        for e in map.outgoing(v) {
            let w = map.edges[e].head;
            indegree[w] -= 1;
            processed_edges += 1;
            if indegree[w] == 0 {
                queue.push(w);
            }
        }
    }
    if order.len() != n {
        // A cycle remains among unprocessed vertices; extract a witness.
        let report = map.validate();
        for v in report.violations {
            if let crate::map::Violation::Cycle(c) = v {
                return Err(Error::CycleDetected(c));
            }
        }
        return Err(Error::CycleDetected(Vec::new()));
    }
    debug_assert_eq!(processed_edges, edge_count);
    Ok(order)
}

/// Single-source optimal lengths over the topological order.
pub fn distance_field(map: &OrientedMap, mode: Mode, src: VertexId) -> Result<DistanceField> {
    let order = topological_order(map)?;
    let mut value: Vec<Option<u32>> = vec![None; map.vertex_count()];
    value[src] = Some(0);
    for &v in &order {
        let Some(dv) = value[v] else { continue };
        for e in map.outgoing(v) {
            let w = map.edges[e].head;
            value[w] = Some(match value[w] {
                None => dv + 1,
                Some(dw) => mode.better(dw, dv + 1),
            });
        }
    }
    Ok(DistanceField { source: src, mode, value })
}

/// Single-target optimal lengths (distance from each vertex to `dst`).
pub fn distance_field_to(map: &OrientedMap, mode: Mode, dst: VertexId) -> Result<DistanceField> {
    let order = topological_order(map)?;
    let mut value: Vec<Option<u32>> = vec![None; map.vertex_count()];
    value[dst] = Some(0);
    for &v in order.iter().rev() {
        for e in map.outgoing(v) {
            let w = map.edges[e].head;
            if let Some(dw) = value[w] {
                value[v] = Some(match value[v] {
                    None => dw + 1,
                    Some(dv) => mode.better(dv, dw + 1),
                });
            }
        }
    }
    Ok(DistanceField { source: dst, mode, value })
}

/// Exact optimum over directed paths from `src` to `dst`, or `None` when
/// no directed path exists.
pub fn xdp(map: &OrientedMap, mode: Mode, src: VertexId, dst: VertexId) -> Result<Option<u32>> {
    if src >= map.vertex_count() {
        return Err(Error::NoSuchVertex(src));
    }
    if dst >= map.vertex_count() {
        return Err(Error::NoSuchVertex(dst));
    }
    Ok(distance_field(map, mode, src)?.get(dst))
}

/// The geodesic such that every geodesic from `src` to `dst` lies weakly to
/// its right: greedy leftmost-optimal edge selection over the distance
/// fields.
pub fn leftmost_geodesic(
    map: &OrientedMap,
    mode: Mode,
    src: VertexId,
    dst: VertexId,
) -> Result<Vec<EdgeId>> {
    let to_dst = distance_field_to(map, mode, dst)?;
    leftmost_geodesic_with(map, &to_dst, src, dst)
}

/// Greedy leftmost geodesic reusing a precomputed distance-to-target field.
pub fn leftmost_geodesic_with(
    map: &OrientedMap,
    to_dst: &DistanceField,
    src: VertexId,
    dst: VertexId,
) -> Result<Vec<EdgeId>> {
    let Some(total) = to_dst.get(src) else {
        return Err(Error::Unreachable { src, dst });
    };
    let mut path = Vec::with_capacity(total as usize);
    let mut cur = src;
    let mut remaining = total;
    while cur != dst || remaining > 0 {
        let e = leftmost_optimal_edge(map, to_dst, cur, remaining)
            .ok_or(Error::Unreachable { src, dst })?;
        path.push(e);
        cur = map.edges[e].head;
        remaining -= 1;
    }
    Ok(path)
}

/// Among the outgoing edges of `v` on an optimal continuation (head value
/// exactly `remaining - 1`), the leftmost in rotation order.
fn leftmost_optimal_edge(
    map: &OrientedMap,
    to_dst: &DistanceField,
    v: VertexId,
    remaining: u32,
) -> Option<EdgeId> {
    // Walk the outgoing block from its leftmost end toward the right and
    // return the first optimal edge.
    let mut cur = map.leftmost_outgoing(v)?;
    loop {
        if to_dst.get(map.edges[cur].head) == Some(remaining - 1) {
            return Some(cur);
        }
        // Step clockwise within the outgoing block.
        cur = next_outgoing_clockwise(map, v, cur)?;
    }
}

pub(crate) fn next_outgoing_clockwise(map: &OrientedMap, v: VertexId, e: EdgeId) -> Option<EdgeId> {
    let rot = &map.rotation[v];
    let n = rot.len();
    let i = rot.iter().position(|&x| x == e)?;
    let mut j = i;
    loop {
        j = (j + n - 1) % n;
        if j == i {
            return None;
        }
        let cand = rot[j];
        let rec = &map.edges[cand];
        if rec.missing {
            continue;
        }
        if rec.tail == v {
            return Some(cand);
        }
        return None; // left the outgoing block
    }
}

/// A slice between consecutive leftmost geodesics: the coalescence offsets
/// are the minimal indices after which the two edge paths agree forever.
#[derive(Debug, Clone)]
pub struct GeodesicSlice {
    pub index: i64,
    /// Edges of the left bounding geodesic before coalescence.
    pub left_segment: Vec<EdgeId>,
    /// Edges of the right bounding geodesic before coalescence.
    pub right_segment: Vec<EdgeId>,
    /// Offset into the geodesic from x_{k-1}.
    pub theta_minus: usize,
    /// Offset into the geodesic from x_k.
    pub theta: usize,
}

impl GeodesicSlice {
    /// The boundary-distance increment carried by this slice.
    pub fn increment(&self) -> i64 {
        self.theta as i64 - self.theta_minus as i64
    }
}

/// Minimal offsets (theta_minus, theta) such that the two edge paths agree
/// from those offsets on; both paths must end identically (coalesced within
/// the window).
pub fn coalescence_offsets(p_prev: &[EdgeId], p_cur: &[EdgeId]) -> Result<(usize, usize)> {
    let mut i = p_prev.len();
    let mut j = p_cur.len();
    while i > 0 && j > 0 && p_prev[i - 1] == p_cur[j - 1] {
        i -= 1;
        j -= 1;
    }
    if i == p_prev.len() || j == p_cur.len() {
        // No common suffix at all: the paths never coalesce in the window,
        // unless both are empty.
        if p_prev.is_empty() && p_cur.is_empty() {
            return Ok((0, 0));
        }
        return Err(Error::NotCoalesced);
    }
    Ok((i, j))
}

/// Geodesic slices for consecutive boundary vertices `x_{k-1}, x_k` with
/// `k` in `k_range`, using leftmost geodesics to a common far target.
pub fn geodesic_slices(
    map: &OrientedMap,
    mode: Mode,
    boundary: &crate::map::BoundaryIndexing,
    target: VertexId,
    k_range: std::ops::RangeInclusive<i64>,
) -> Result<Vec<GeodesicSlice>> {
    let to_dst = distance_field_to(map, mode, target)?;
    let mut out = Vec::new();
    let mut prev_path: Option<Vec<EdgeId>> = None;
    let mut prev_k = 0i64;
    for k in (*k_range.start() - 1)..=*k_range.end() {
        let v = boundary
            .vertex(k)
            .ok_or_else(|| Error::Precondition(format!("boundary index {k} out of window")))?;
        let path = leftmost_geodesic_with(map, &to_dst, v, target)?;
        if let Some(prev) = prev_path.take() {
            debug_assert_eq!(k, prev_k + 1);
            let (theta_minus, theta) = coalescence_offsets(&prev, &path)?;
            out.push(GeodesicSlice {
                index: k,
                left_segment: prev[..theta_minus].to_vec(),
                right_segment: path[..theta].to_vec(),
                theta_minus,
                theta,
            });
        }
        prev_path = Some(path);
        prev_k = k;
    }
    Ok(out)
}

/// Largest optimal value over ordered vertex pairs. For longest paths this
/// is the global maximum; for shortest paths it is the boundary statistic
/// max over lower-boundary sources of the min over upper-boundary targets.
pub fn max_xdp(map: &OrientedMap, mode: Mode) -> Result<u32> {
    match mode {
        Mode::Ldp => {
            let order = topological_order(map)?;
            let mut value = vec![0u32; map.vertex_count()];
            let mut best = 0;
            for &v in &order {
                for e in map.outgoing(v) {
                    let w = map.edges[e].head;
                    value[w] = value[w].max(value[v] + 1);
                    best = best.max(value[w]);
                }
            }
            Ok(best)
        }
        Mode::Sdp => {
            let seg = map.boundary_segments()?;
            let mut upper = vec![false; map.vertex_count()];
            for &e in seg.upper_left.iter().chain(seg.upper_right.iter()) {
                upper[map.edges[e].tail] = true;
                upper[map.edges[e].head] = true;
            }
            let mut lower = vec![false; map.vertex_count()];
            for &e in seg.lower_left.iter().chain(seg.lower_right.iter()) {
                lower[map.edges[e].tail] = true;
                lower[map.edges[e].head] = true;
            }
            min_to_set_max_over(map, &upper, &lower)
        }
    }
}

/// max over flagged sources of the min directed distance to the flagged
/// target set (both must be non-empty and every source must reach the set).
pub fn min_to_set_max_over(
    map: &OrientedMap,
    targets: &[bool],
    sources: &[bool],
) -> Result<u32> {
    let order = topological_order(map)?;
    let mut value: Vec<Option<u32>> = vec![None; map.vertex_count()];
    for (v, &t) in targets.iter().enumerate() {
        if t {
            value[v] = Some(0);
        }
    }
    for &v in order.iter().rev() {
        for e in map.outgoing(v) {
            let w = map.edges[e].head;
            if let Some(dw) = value[w] {
                value[v] = Some(match value[v] {
                    None => dw + 1,
                    Some(dv) => dv.min(dw + 1),
                });
            }
        }
    }
    let mut best = None;
    for (v, &s) in sources.iter().enumerate() {
        if s {
            match value[v] {
                Some(d) => best = Some(best.map_or(d, |b: u32| b.max(d))),
                None => {
                    return Err(Error::Unreachable { src: v, dst: usize::MAX });
                }
            }
        }
    }
    best.ok_or_else(|| Error::Precondition("no sources flagged".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmsw::build;
    use crate::walk::{Step, Walk};

    fn triangle_l2_r1() -> OrientedMap {
        build(&Walk::from_origin(vec![Step::C, Step::A]))
    }

    #[test]
    fn topo_order_single_edge() {
        let m = build(&Walk::from_origin(vec![]));
        assert_eq!(topological_order(&m).unwrap(), vec![0, 1]);
    }

    #[test]
    fn triangle_distances() {
        let m = triangle_l2_r1();
        // Source 0, sink 1, middle 2 (creation order: root (0,1), C adds 2).
        assert_eq!(xdp(&m, Mode::Ldp, 0, 1).unwrap(), Some(2));
        assert_eq!(xdp(&m, Mode::Sdp, 0, 1).unwrap(), Some(1));
        assert_eq!(xdp(&m, Mode::Ldp, 0, 0).unwrap(), Some(0));
        assert_eq!(xdp(&m, Mode::Ldp, 1, 0).unwrap(), None);
    }

    #[test]
    fn triangle_geodesics() {
        let m = triangle_l2_r1();
        let ldp = leftmost_geodesic(&m, Mode::Ldp, 0, 1).unwrap();
        assert_eq!(ldp.len(), 2);
        let sdp = leftmost_geodesic(&m, Mode::Sdp, 0, 1).unwrap();
        assert_eq!(sdp, vec![0]);
    }

    #[test]
    fn max_xdp_values() {
        let single = build(&Walk::from_origin(vec![]));
        assert_eq!(max_xdp(&single, Mode::Ldp).unwrap(), 1);
        assert_eq!(max_xdp(&triangle_l2_r1(), Mode::Ldp).unwrap(), 2);
    }

    #[test]
    fn sdp_never_exceeds_ldp() {
        use crate::walk::sample_uibot_walk;
        let m = build(&sample_uibot_walk(300, 5));
        let ldp = distance_field(&m, Mode::Ldp, 0).unwrap();
        let sdp = distance_field(&m, Mode::Sdp, 0).unwrap();
        for v in 0..m.vertex_count() {
            if let (Some(l), Some(s)) = (ldp.get(v), sdp.get(v)) {
                assert!(s <= l);
            }
        }
    }

    #[test]
    fn geodesics_have_reported_length_and_are_paths() {
        use crate::walk::sample_uibot_walk;
        let m = build(&sample_uibot_walk(200, 8));
        let field = distance_field(&m, Mode::Ldp, 0).unwrap();
        for v in 0..m.vertex_count() {
            if let Some(d) = field.get(v) {
                let g = leftmost_geodesic(&m, Mode::Ldp, 0, v).unwrap();
                assert_eq!(g.len() as u32, d);
                let mut cur = 0;
                for &e in &g {
                    assert_eq!(m.edges[e].tail, cur);
                    cur = m.edges[e].head;
                }
                assert_eq!(cur, v);
            }
        }
    }

    #[test]
    fn coalescence_offsets_examples() {
        // Shared first vertex after one step each.
        assert_eq!(coalescence_offsets(&[1, 5, 6], &[2, 5, 6]).unwrap(), (1, 1));
        assert_eq!(coalescence_offsets(&[1, 2, 5], &[5]).unwrap(), (2, 0));
        assert!(coalescence_offsets(&[1], &[2]).is_err());
    }
}
