//! Exact samplers for the random-map models, built on the walk samplers
//! and the map builder.

use crate::enumerate::{enum_walks_in_cone, ConeSpec};
use crate::error::Error;
use crate::kmsw::build;
use crate::map::{BoundaryIndexing, Edge, EdgeId, OrientedMap, VertexId};
use crate::rng::stream_rng;
use crate::walk::{
    sample_conditioned_walk_with, sample_uibhbot_walk_with, sample_uibot_walk_with,
    conditioned_step, AnchoredWalk, Step, Walk,
};
use crate::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Size-`n` cell of the infinite-volume map: the triangulation of `n`
/// i.i.d. uniform steps.
pub fn sample_cell(n: usize, seed: u64) -> OrientedMap {
    sample_cell_stream(n, seed, 0)
}

pub fn sample_cell_stream(n: usize, seed: u64, stream: u64) -> OrientedMap {
    let mut rng = stream_rng(seed, stream);
    build(&sample_uibot_walk_with(n, &mut rng))
}

/// Window of the quarter-plane map: the triangulation of the conditioned
/// walk. Its unique source is the root tail.
pub fn sample_uiqbot_window(n_steps: usize, seed: u64) -> OrientedMap {
    sample_uiqbot_window_stream(n_steps, seed, 0)
}

pub fn sample_uiqbot_window_stream(n_steps: usize, seed: u64, stream: u64) -> OrientedMap {
    let mut rng = stream_rng(seed, stream);
    build(&sample_conditioned_walk_with(n_steps, 0, &mut rng))
}

/// Boltzmann triangulation with right boundary length `r` by rejection:
/// run the uniform walk to the first second-coordinate hit of `-r` and
/// accept when the first coordinate stayed non-negative throughout.
pub fn sample_boltzmann_right(
    r: usize,
    seed: u64,
    max_attempts: usize,
) -> Result<OrientedMap> {
    sample_boltzmann_right_stream(r, seed, 0, max_attempts)
}

pub fn sample_boltzmann_right_stream(
    r: usize,
    seed: u64,
    stream: u64,
    max_attempts: usize,
) -> Result<OrientedMap> {
    assert!(r >= 1);
    let mut rng = stream_rng(seed, stream);
    for _ in 0..max_attempts {
        if let Some(steps) = boltzmann_attempt(r as i64, &mut rng) {
            let map = build(&Walk::from_origin(steps));
            debug_assert!(map.edges.iter().all(|e| !e.missing));
            return Ok(map);
        }
    }
    Err(Error::BudgetExhausted(max_attempts))
}

/// One rejection attempt: `Some(prefix)` holds the steps strictly before
/// the hitting time when the first coordinate never went negative.
fn boltzmann_attempt(r: i64, rng: &mut ChaCha8Rng) -> Option<Vec<Step>> {
    let mut steps = Vec::new();
    let (mut l, mut rr) = (0i64, 0i64);
    loop {
        let s = crate::walk::STEPS[rng.gen_range(0..3)];
        let (dl, dr) = s.increment();
        l += dl;
        rr += dr;
        if l < 0 {
            return None;
        }
        if rr == -r {
            return Some(steps);
        }
        steps.push(s);
    }
}

/// Boltzmann triangulation with right boundary length `r` and a marked
/// left-boundary vertex, sampled exactly (no rejection): the conditioned
/// walk is run to its first second-coordinate hit of `-r`, and the mark is
/// uniform on the left-boundary vertex positions.
pub fn sample_boltzmann_marked(r: usize, seed: u64) -> Result<(OrientedMap, VertexId)> {
    sample_boltzmann_marked_stream(r, seed, 0)
}

pub fn sample_boltzmann_marked_stream(
    r: usize,
    seed: u64,
    stream: u64,
) -> Result<(OrientedMap, VertexId)> {
    assert!(r >= 1);
    let mut rng = stream_rng(seed, stream);
    let cap = 10_000_000usize.max(20_000 * r * r);
    let mut steps = Vec::new();
    let (mut l, mut rr) = (0i64, 0i64);
    while rr > -(r as i64) {
        if steps.len() > cap {
            return Err(Error::BudgetExhausted(cap));
        }
        let s = conditioned_step(l, &mut rng);
        let (dl, dr) = s.increment();
        l += dl;
        rr += dr;
        if rr > -(r as i64) {
            steps.push(s);
        }
    }
    let map = build(&Walk::from_origin(steps));
    // l is the first coordinate at the hitting time; the left boundary has
    // l edges, hence l + 1 vertex positions.
    let position = rng.gen_range(0..=l) as usize;
    let seg = map.boundary_segments()?;
    debug_assert_eq!(seg.upper_left.len(), l as usize);
    let marked = if position == 0 {
        map.edges[seg.upper_left[0]].tail
    } else {
        map.edges[seg.upper_left[position - 1]].head
    };
    Ok((map, marked))
}

/// How boundary-channeled maps are drawn uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BridgeMode {
    /// Enumerate all admissible walks (small sizes).
    ExactSmall,
    /// Uniform steps filtered by the endpoint and quadrant constraints.
    Rejection { max_attempts: usize },
}

/// Uniform element of the boundary-channeled family with left boundary
/// length `l` and a single right boundary edge: the triangulation of a
/// uniform `n`-step walk from (l-1, 0) to (0, 0) staying in the quadrant,
/// whose lower-left missing edges are the channeled left boundary.
pub fn sample_boundary_channeled(
    l: usize,
    n: usize,
    mode: BridgeMode,
    seed: u64,
) -> Result<OrientedMap> {
    assert!(l >= 1 && n >= 1);
    let start = (l as i64 - 1, 0i64);
    let mut rng = stream_rng(seed, 0);
    let walk = match mode {
        BridgeMode::ExactSmall => {
            let all = enum_walks_in_cone(n, start, Some((0, 0)), ConeSpec::quadrant())?;
            if all.is_empty() {
                return Err(Error::EmptyFamily);
            }
            all[rng.gen_range(0..all.len())].clone()
        }
        BridgeMode::Rejection { max_attempts } => {
            let mut found = None;
            'attempts: for _ in 0..max_attempts {
                let mut pos = start;
                let mut steps = Vec::with_capacity(n);
                for _ in 0..n {
                    let s = crate::walk::STEPS[rng.gen_range(0..3)];
                    let (dl, dr) = s.increment();
                    pos = (pos.0 + dl, pos.1 + dr);
                    if pos.0 < 0 || pos.1 < 0 {
                        continue 'attempts;
                    }
                    steps.push(s);
                }
                if pos == (0, 0) {
                    found = Some(Walk::new(start, steps));
                    break;
                }
            }
            found.ok_or(Error::BudgetExhausted(match mode {
                BridgeMode::Rejection { max_attempts } => max_attempts,
                _ => unreachable!(),
            }))?
        }
    };
    Ok(build(&walk))
}

/// Fixes an orientation on every missing edge so that all of them join the
/// left boundary of the completed bipolar map: lower-left edges point east
/// to west (endpoints swapped), upper-right edges keep their stored west to
/// east direction.
pub fn orient_missing(map: &OrientedMap) -> Result<OrientedMap> {
    let seg = map.boundary_segments()?;
    let mut out = map.clone();
    for &e in &seg.lower_left {
        let Edge { tail, head, .. } = out.edges[e];
        out.edges[e] = Edge { tail: head, head: tail, missing: false };
    }
    for &e in &seg.upper_right {
        out.edges[e].missing = false;
    }
    out.active_trace = None;
    Ok(out)
}

/// Whether the map is boundary-channeled with no edge shared between its
/// left and right boundaries. The edge-reversal bijection needs the
/// disjointness: reversing a shared edge would strand its far endpoint
/// with no outgoing edge.
pub fn is_strictly_channeled(map: &OrientedMap) -> Result<bool> {
    if !is_boundary_channeled(map)? {
        return Ok(false);
    }
    let seg = map.boundary_segments()?;
    let mut on_left = vec![false; map.edge_count()];
    for &e in &seg.upper_left {
        on_left[e] = true;
    }
    Ok(!seg.lower_right.iter().any(|&e| on_left[e]))
}

/// Whether every boundary vertex other than the source and the sink has
/// exactly one incoming edge (all its incoming edges are boundary edges).
pub fn is_boundary_channeled(map: &OrientedMap) -> Result<bool> {
    let external = map.external_face()?;
    let mut on_boundary = vec![false; map.vertex_count()];
    for d in &external {
        on_boundary[map.edges[d.edge].tail] = true;
        on_boundary[map.edges[d.edge].head] = true;
    }
    let mut indeg = vec![0usize; map.vertex_count()];
    let mut outdeg = vec![0usize; map.vertex_count()];
    for e in &map.edges {
        if !e.missing {
            indeg[e.head] += 1;
            outdeg[e.tail] += 1;
        }
    }
    for v in 0..map.vertex_count() {
        if on_boundary[v] && indeg[v] != 0 && outdeg[v] != 0 && indeg[v] != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Right-boundary vertices source..sink of a bipolar map with no missing
/// edges.
pub fn right_boundary_vertices(map: &OrientedMap) -> Result<Vec<VertexId>> {
    let seg = map.boundary_segments()?;
    let mut out = Vec::with_capacity(seg.lower_right.len() + 1);
    if let Some(&first) = seg.lower_right.first() {
        out.push(map.edges[first].tail);
    }
    for &e in &seg.lower_right {
        out.push(map.edges[e].head);
    }
    Ok(out)
}

/// Left-boundary vertices source..sink.
pub fn left_boundary_vertices(map: &OrientedMap) -> Result<Vec<VertexId>> {
    let seg = map.boundary_segments()?;
    let mut out = Vec::with_capacity(seg.upper_left.len() + 1);
    if let Some(&first) = seg.upper_left.first() {
        out.push(map.edges[first].tail);
    }
    for &e in &seg.upper_left {
        out.push(map.edges[e].head);
    }
    Ok(out)
}

/// Reverses the first `k` right-boundary edges of a boundary-channeled
/// bipolar map, moving the source `k` vertices along the old right
/// boundary. The result is boundary-channeled with boundary lengths
/// (l + k, r - k); the root becomes the first remaining right-boundary
/// edge.
pub fn apply_phi(map: &OrientedMap, k: usize) -> Result<OrientedMap> {
    let right = right_boundary_vertices(map)?;
    let r = right.len() - 1;
    if k == 0 || k >= r {
        return Err(Error::Precondition(format!(
            "phi requires 1 <= k <= r-1 (k = {k}, r = {r})"
        )));
    }
    if !is_strictly_channeled(map)? {
        return Err(Error::Precondition(
            "map is not boundary-channeled with disjoint side boundaries".into(),
        ));
    }
    let seg = map.boundary_segments()?;
    let mut out = map.clone();
    for &e in seg.lower_right.iter().take(k) {
        let Edge { tail, head, missing } = out.edges[e];
        out.edges[e] = Edge { tail: head, head: tail, missing };
    }
    out.root_edge = Some(seg.lower_right[k]);
    out.active_trace = None;
    Ok(out)
}

/// The mirrored inverse: reverses the first `k` left-boundary edges,
/// moving the source back along the left boundary.
pub fn apply_phi_inverse(map: &OrientedMap, k: usize) -> Result<OrientedMap> {
    let left = left_boundary_vertices(map)?;
    let l = left.len() - 1;
    if k == 0 || k >= l {
        return Err(Error::Precondition(format!(
            "inverse phi requires 1 <= k <= l-1 (k = {k}, l = {l})"
        )));
    }
    if !is_strictly_channeled(map)? {
        return Err(Error::Precondition(
            "map is not boundary-channeled with disjoint side boundaries".into(),
        ));
    }
    let seg = map.boundary_segments()?;
    let mut out = map.clone();
    for &e in seg.upper_left.iter().take(k) {
        let Edge { tail, head, missing } = out.edges[e];
        out.edges[e] = Edge { tail: head, head: tail, missing };
    }
    // The reversed chain now runs from the new source back to the old one
    // and becomes the start of the right boundary; its first edge is the
    // formerly k-th left-boundary edge.
    out.root_edge = Some(seg.upper_left[k - 1]);
    out.active_trace = None;
    Ok(out)
}

/// A window of the half-plane model: the triangulation of the anchored
/// walk together with its boundary indexing and the boundary index of the
/// walk's time origin.
pub struct UibhbotWindow {
    pub map: OrientedMap,
    pub walk: AnchoredWalk,
    pub indexing: BoundaryIndexing,
    /// Window boundary index corresponding to half-plane index 0: the
    /// half-plane boundary vertex k sits at window index k + origin_shift.
    pub origin_shift: i64,
}

pub fn sample_uibhbot_window(
    n_neg_segments: usize,
    n_pos_steps: usize,
    seed: u64,
) -> Result<UibhbotWindow> {
    sample_uibhbot_window_stream(n_neg_segments, n_pos_steps, seed, 0)
}

pub fn sample_uibhbot_window_stream(
    n_neg_segments: usize,
    n_pos_steps: usize,
    seed: u64,
    stream: u64,
) -> Result<UibhbotWindow> {
    let mut rng = stream_rng(seed, stream);
    let walk = sample_uibhbot_walk_with(n_neg_segments, n_pos_steps, &mut rng);
    let map = build(&walk.walk);
    let indexing = map.boundary_indexing()?;
    Ok(UibhbotWindow { map, walk, indexing, origin_shift: -(n_neg_segments as i64) })
}

impl UibhbotWindow {
    /// The half-plane boundary vertex x^b_k, when inside the window.
    pub fn boundary_vertex(&self, k: i64) -> Option<VertexId> {
        self.indexing.vertex(k + self.origin_shift)
    }
}

/// All lower-left missing edges of the window (the certified half-plane
/// boundary is the portion created before the origin).
pub fn lower_left_edges(map: &OrientedMap) -> Result<Vec<EdgeId>> {
    Ok(map.boundary_segments()?.lower_left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{topological_order, Mode};
    use crate::enumerate::count_triangulations;
    use crate::map::isomorphic;

    #[test]
    fn cell_edge_count_and_boundary() {
        use crate::kmsw::boundary_lengths_from_walk;
        use crate::walk::sample_uibot_walk;
        for seed in 0..50 {
            let n = 200;
            let w = sample_uibot_walk(n, seed);
            let m = build(&w);
            assert_eq!(m.oriented_edge_count(), n + 1);
            let seg = m.boundary_segments().unwrap();
            let (ul, ll, lr, ur) = boundary_lengths_from_walk(&w);
            assert_eq!(seg.lengths(), (ul, ll, lr, ur), "seed {seed}");
            assert!(m.validate().is_valid());
        }
    }

    #[test]
    fn uiqbot_has_unique_source_at_root_tail() {
        for seed in 0..20 {
            let m = sample_uiqbot_window(300, seed);
            let root_tail = m.edges[m.root_edge.unwrap()].tail;
            let mut indeg = vec![0usize; m.vertex_count()];
            for e in &m.edges {
                if !e.missing {
                    indeg[e.head] += 1;
                }
            }
            // No missing lower-left edges: the conditioned first coordinate
            // never dips below zero.
            assert!(m.boundary_segments().unwrap().lower_left.is_empty());
            assert_eq!(indeg[root_tail], 0);
            // Sources of the window other than the root tail must lie on
            // the upper boundary (horizon artifacts of the window).
            let seg = m.boundary_segments().unwrap();
            let mut upper = vec![false; m.vertex_count()];
            for &e in seg.upper_left.iter().chain(seg.upper_right.iter()) {
                upper[m.edges[e].tail] = true;
                upper[m.edges[e].head] = true;
            }
            for v in 0..m.vertex_count() {
                if indeg[v] == 0 && v != root_tail {
                    assert!(upper[v], "interior extra source {v}");
                }
            }
        }
    }

    #[test]
    fn boltzmann_right_has_r_right_edges_no_missing() {
        for (r, seed) in [(1usize, 1u64), (2, 2), (3, 3), (4, 4)] {
            let m = sample_boltzmann_right(r, seed, 1_000_000).unwrap();
            assert!(m.edges.iter().all(|e| !e.missing));
            let seg = m.boundary_segments().unwrap();
            assert_eq!(seg.lower_right.len(), r);
            assert!(m.validate().is_valid());
            assert!(crate::kmsw::invert(&m).is_ok());
        }
    }

    #[test]
    fn boltzmann_r1_law_matches_enumeration() {
        // Conditional on having at most 5 edges, the law is exactly
        // 3^{-n} / (sum over maps with <= 5 edges of 3^{-n}); compare
        // per-edge-count frequencies against that.
        let trials = 40_000;
        let cap = 5usize;
        let mut counts = vec![0usize; cap + 1];
        let mut kept = 0usize;
        for t in 0..trials {
            let m = sample_boltzmann_right_stream(1, 99, t as u64, 1_000_000).unwrap();
            let n = m.edge_count();
            if n <= cap {
                counts[n] += 1;
                kept += 1;
            }
        }
        let mut mass = vec![0.0f64; cap + 1];
        let mut total = 0.0;
        for n in 1..=cap {
            let mut a_n = 0usize;
            for l in 1..=n as i64 {
                a_n += count_triangulations(n, l, 1).unwrap();
            }
            mass[n] = a_n as f64 / 3f64.powi(n as i32);
            total += mass[n];
        }
        for n in 1..=cap {
            let p_exp = mass[n] / total;
            let p_hat = counts[n] as f64 / kept as f64;
            let se = (p_exp * (1.0 - p_exp) / kept as f64).sqrt().max(1e-9);
            assert!(
                (p_hat - p_exp).abs() < 4.0 * se,
                "n={n}: p_hat {p_hat} vs {p_exp} (se {se})"
            );
        }
    }

    #[test]
    fn marked_boltzmann_mark_on_left_boundary() {
        for seed in 0..20u64 {
            let (m, z) = sample_boltzmann_marked(3, seed).unwrap();
            let left = left_boundary_vertices(&m).unwrap();
            assert!(left.contains(&z));
            assert!(m.validate().is_valid());
        }
    }

    #[test]
    fn channeled_family_and_phi_roundtrip() {
        // All maps from walks (l-1,0) -> (0,0) in the quadrant, oriented,
        // are boundary-channeled with r = 1... after orienting the missing
        // lower-left edges.
        for l in 2..=4usize {
            for n in 1..=6usize {
                let Ok(all) = enum_walks_in_cone(
                    n,
                    (l as i64 - 1, 0),
                    Some((0, 0)),
                    ConeSpec::quadrant(),
                ) else {
                    continue;
                };
                for w in all {
                    let m0 = build(&w);
                    let m = orient_missing(&m0).unwrap();
                    assert!(m.validate().is_valid());
                    assert!(topological_order(&m).is_ok());
                    assert!(is_boundary_channeled(&m).unwrap(), "walk {:?}", w.steps);
                    let left = left_boundary_vertices(&m).unwrap();
                    assert_eq!(left.len() - 1, l, "left boundary length");
                    // Move the source along the left boundary and back.
                    for k in 1..l {
                        let phi = apply_phi_inverse(&m, k).unwrap();
                        assert!(phi.validate().is_valid());
                        assert!(is_boundary_channeled(&phi).unwrap());
                        let back = apply_phi(&phi, k).unwrap();
                        assert!(isomorphic(&back, &m));
                    }
                }
            }
        }
    }

    #[test]
    fn interior_boundary_vertices_have_one_incoming() {
        let m = sample_boundary_channeled(3, 5, BridgeMode::ExactSmall, 5).unwrap();
        let oriented = orient_missing(&m).unwrap();
        assert!(is_boundary_channeled(&oriented).unwrap());
    }

    #[test]
    fn uibhbot_boundary_edges_missing_no_incoming() {
        let win = sample_uibhbot_window(12, 40, 7).unwrap();
        let m = &win.map;
        let seg = m.boundary_segments().unwrap();
        // The certified region: lower-left edges created before the origin.
        assert!(seg.lower_left.len() >= 12);
        let mut indeg = vec![0usize; m.vertex_count()];
        for e in &m.edges {
            if !e.missing {
                indeg[e.head] += 1;
            }
        }
        for k in -12i64..=0 {
            if let Some(v) = win.boundary_vertex(k) {
                assert_eq!(indeg[v], 0, "boundary vertex {v} has incoming edges");
            }
        }
    }

    #[test]
    fn samplers_validate() {
        assert!(sample_cell(150, 1).validate().is_valid());
        assert!(sample_uiqbot_window(150, 2).validate().is_valid());
        assert!(sample_boltzmann_right(2, 3, 100_000).unwrap().validate().is_valid());
        assert!(sample_boltzmann_marked(2, 4).unwrap().0.validate().is_valid());
        assert!(sample_uibhbot_window(5, 30, 5).unwrap().map.validate().is_valid());
        let _ = Mode::Ldp;
    }
}
