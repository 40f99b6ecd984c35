//! Exhaustive small-instance oracles in exact rational arithmetic.

use crate::distance::Mode;
use crate::error::Error;
use crate::map::{EdgeId, OrientedMap, VertexId};
use crate::walk::{Step, Walk, STEPS};
use crate::Result;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Default cap on enumerated walk lengths (3^n sequences).
pub const DEFAULT_WALK_CAP: usize = 12;
/// Default cap on edges for exhaustive path enumeration.
pub const DEFAULT_EDGE_CAP: usize = 40;

/// Half-plane constraints for walk enumeration: coordinatewise lower
/// bounds, each optional.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConeSpec {
    pub min_first: Option<i64>,
    pub min_second: Option<i64>,
}

impl ConeSpec {
    pub fn quadrant() -> ConeSpec {
        ConeSpec { min_first: Some(0), min_second: Some(0) }
    }

    /// The admissible region for maps with right boundary length `r`:
    /// first coordinate non-negative, second at least -r+1.
    pub fn bipolar(r: i64) -> ConeSpec {
        ConeSpec { min_first: Some(0), min_second: Some(-r + 1) }
    }

    pub fn none() -> ConeSpec {
        ConeSpec { min_first: None, min_second: None }
    }

    fn admits(&self, p: (i64, i64)) -> bool {
        self.min_first.map_or(true, |m| p.0 >= m) && self.min_second.map_or(true, |m| p.1 >= m)
    }
}

/// All `n`-step walks from `start`, filtered by an optional endpoint and
/// the cone constraint (applied to every position including the start).
pub fn enum_walks_in_cone(
    n: usize,
    start: (i64, i64),
    end: Option<(i64, i64)>,
    cone: ConeSpec,
) -> Result<Vec<Walk>> {
    if n > DEFAULT_WALK_CAP {
        return Err(Error::CapExceeded(format!("{n} > {DEFAULT_WALK_CAP} walk steps")));
    }
    if !cone.admits(start) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut steps = Vec::with_capacity(n);
    enum_rec(n, start, end, cone, &mut steps, &mut out);
    Ok(out)
}

fn enum_rec(
    remaining: usize,
    pos: (i64, i64),
    end: Option<(i64, i64)>,
    cone: ConeSpec,
    steps: &mut Vec<Step>,
    out: &mut Vec<Walk>,
) {
    if remaining == 0 {
        if end.map_or(true, |e| e == pos) {
            let start = {
                let mut p = pos;
                for s in steps.iter().rev() {
                    let (dl, dr) = s.increment();
                    p.0 -= dl;
                    p.1 -= dr;
                }
                p
            };
            out.push(Walk::new(start, steps.clone()));
        }
        return;
    }
    for s in STEPS {
        let (dl, dr) = s.increment();
        let next = (pos.0 + dl, pos.1 + dr);
        if !cone.admits(next) {
            continue;
        }
        steps.push(s);
        enum_rec(remaining - 1, next, end, cone, steps, out);
        steps.pop();
    }
}

/// Number of bipolar-oriented triangulations with `n` edges, `l` left
/// boundary edges, and `r` right boundary edges, counted on the walk side:
/// walks with n-1 steps from (0,0) to (l-1, -r+1) staying in
/// [0, inf) x [-r+1, inf).
pub fn count_triangulations(n: usize, l: i64, r: i64) -> Result<usize> {
    if n == 0 || l < 1 || r < 1 {
        return Ok(0);
    }
    if n > 13 {
        return Err(Error::CapExceeded(format!("{n} > 13 edges")));
    }
    let walks = enum_walks_in_cone(n - 1, (0, 0), Some((l - 1, -r + 1)), ConeSpec::bipolar(r))?;
    Ok(walks.len())
}

/// Weighting applied to a path law over all 3^n step sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Uniform 3^{-n} on every sequence.
    Plain,
    /// The h-transform law from first coordinate `start`: weight
    /// (L(n)+1)/(start+1) on sequences whose first coordinate stays
    /// non-negative, 0 otherwise.
    ConditionedNonnegative { start: i64 },
    /// Pushforward of the uniform lazy-walk law under the running-minimum
    /// step flip, as a law on non-negative lazy paths.
    FlippedLazy,
}

/// Exact probability mass function over paths. Keys are step sequences for
/// walk laws and increment sequences (as +1/0/-1 runs encoded in i8) for
/// lazy-walk laws.
pub type ExactPmf = std::collections::BTreeMap<Vec<i8>, BigRational>;

/// Exact pmf over all relevant length-`n` paths under the given weighting.
pub fn exact_weighted_law(n: usize, weighting: Weighting) -> Result<ExactPmf> {
    if n > 9 {
        return Err(Error::CapExceeded(format!("{n} > 9 steps for the exact law")));
    }
    let mut pmf = ExactPmf::new();
    match weighting {
        Weighting::Plain => {
            let third = BigRational::new(BigInt::one(), BigInt::from(3));
            let mass = pow(&third, n);
            for seq in all_sequences(n) {
                pmf.insert(seq.iter().map(|s| *s as i8).collect(), mass.clone());
            }
        }
        Weighting::ConditionedNonnegative { start } => {
            // Weight by (L(n)+1) 1{L >= 0} / normalization; the
            // normalization equals (start+1) by the harmonic property,
            // which the oracle verifies by summing.
            let third = BigRational::new(BigInt::one(), BigInt::from(3));
            let base = pow(&third, n);
            let mut total = BigRational::zero();
            let mut weights = Vec::new();
            for seq in all_sequences(n) {
                let mut l = start;
                let mut ok = true;
                for s in &seq {
                    l += s.increment().0;
                    if l < 0 {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    continue;
                }
                let w = &base * BigRational::from(BigInt::from(l + 1));
                total += &w;
                weights.push((seq, w));
            }
            for (seq, w) in weights {
                pmf.insert(seq.iter().map(|s| *s as i8).collect(), w / &total);
            }
        }
        Weighting::FlippedLazy => {
            // Enumerate all 3^n lazy paths, flip each, and accumulate mass.
            let third = BigRational::new(BigInt::one(), BigInt::from(3));
            let mass = pow(&third, n);
            for code in 0..3usize.pow(n as u32) {
                let mut c = code;
                let mut incs = Vec::with_capacity(n);
                for _ in 0..n {
                    incs.push((c % 3) as i64 - 1);
                    c /= 3;
                }
                let mut path = vec![0i64];
                for d in &incs {
                    path.push(path.last().unwrap() + d);
                }
                let flipped = crate::walk::pitman_flip(&path).expect("valid lazy path");
                let key: Vec<i8> =
                    flipped.windows(2).map(|w| (w[1] - w[0]) as i8).collect();
                *pmf.entry(key).or_insert_with(BigRational::zero) += mass.clone();
            }
        }
    }
    Ok(pmf)
}

/// The h-transform law of the first coordinate as a lazy walk: exact pmf
/// over increment sequences of length `n` started from 0.
pub fn exact_conditioned_lazy_law(n: usize) -> Result<ExactPmf> {
    if n > 9 {
        return Err(Error::CapExceeded(format!("{n} > 9 steps for the exact law")));
    }
    let mut pmf = ExactPmf::new();
    let mut stack: Vec<(Vec<i8>, i64, BigRational)> = vec![(Vec::new(), 0, BigRational::one())];
    while let Some((prefix, x, mass)) = stack.pop() {
        if prefix.len() == n {
            pmf.insert(prefix, mass);
            continue;
        }
        let denom = BigRational::from(BigInt::from(3 * (x + 1)));
        for (inc, num) in [(1i8, x + 2), (-1, x), (0, x + 1)] {
            if num == 0 {
                continue;
            }
            let p = BigRational::from(BigInt::from(num)) / denom.clone();
            let mut next = prefix.clone();
            next.push(inc);
            stack.push((next, x + i64::from(inc), mass.clone() * p));
        }
    }
    Ok(pmf)
}

/// Exact probability that the lazy walk started from `s` hits `target_high`
/// before -1, computed by a linear-system-free first-step recursion on the
/// finite state space.
pub fn exact_ruin_probability(s: i64, target_high: i64) -> BigRational {
    assert!(s >= 0 && target_high > 0 && s <= target_high);
    // p(x) satisfies p(x) = (p(x-1) + p(x) + p(x+1))/3, p(-1) = 0,
    // p(K) = 1, so p is linear; solve by forward substitution to stay
    // honest to the DP rather than assuming linearity: p(x+1) =
    // 2 p(x) - p(x-1) with p(-1) = 0 and unknown p(0) = t fixed by
    // p(K) = 1. Represent p(x) = a_x * t with a_{-1} = 0, a_0 = 1.
    let mut a_prev = BigRational::zero(); // a_{-1}
    let mut a_cur = BigRational::one(); // a_0
    for _ in 0..target_high {
        let next = BigRational::from(BigInt::from(2)) * &a_cur - &a_prev;
        a_prev = a_cur;
        a_cur = next;
    }
    // a_K * t = 1 so t = 1/a_K; p(s) = a_s / a_K.
    let a_k = a_cur;
    let mut b_prev = BigRational::zero();
    let mut b_cur = BigRational::one();
    for _ in 0..s {
        let next = BigRational::from(BigInt::from(2)) * &b_cur - &b_prev;
        b_prev = b_cur;
        b_cur = next;
    }
    b_cur / a_k
}

fn all_sequences(n: usize) -> Vec<Vec<Step>> {
    let mut out = Vec::with_capacity(3usize.pow(n as u32));
    let mut cur = Vec::with_capacity(n);
    fn rec(remaining: usize, cur: &mut Vec<Step>, out: &mut Vec<Vec<Step>>) {
        if remaining == 0 {
            out.push(cur.clone());
            return;
        }
        for s in STEPS {
            cur.push(s);
            rec(remaining - 1, cur, out);
            cur.pop();
        }
    }
    rec(n, &mut cur, &mut out);
    out
}

fn pow(base: &BigRational, n: usize) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..n {
        out *= base;
    }
    out
}

/// All directed paths from `src` to `dst` of optimal length, together with
/// the leftmost one identified by pairwise dominance.
#[derive(Debug, Clone)]
pub struct GeodesicSet {
    pub length: usize,
    pub geodesics: Vec<Vec<EdgeId>>,
    /// Index into `geodesics` of the path all others lie weakly right of.
    pub leftmost: Option<usize>,
}

/// Brute-force geodesic oracle: enumerates every directed path.
pub fn brute_force_geodesics(
    map: &OrientedMap,
    mode: Mode,
    src: VertexId,
    dst: VertexId,
) -> Result<GeodesicSet> {
    if map.edge_count() > DEFAULT_EDGE_CAP {
        return Err(Error::CapExceeded(format!(
            "{} > {DEFAULT_EDGE_CAP} edges for path enumeration",
            map.edge_count()
        )));
    }
    let mut all_paths = Vec::new();
    let mut stack: Vec<EdgeId> = Vec::new();
    collect_paths(map, src, dst, &mut stack, &mut all_paths);
    if src == dst {
        all_paths.push(Vec::new());
    }
    if all_paths.is_empty() {
        return Err(Error::Unreachable { src, dst });
    }
    let length = match mode {
        Mode::Ldp => all_paths.iter().map(|p| p.len()).max().unwrap(),
        Mode::Sdp => all_paths.iter().map(|p| p.len()).min().unwrap(),
    };
    let geodesics: Vec<Vec<EdgeId>> =
        all_paths.into_iter().filter(|p| p.len() == length).collect();
    let mut leftmost = None;
    'outer: for (i, cand) in geodesics.iter().enumerate() {
        for other in &geodesics {
            if !weakly_right_of(map, other, cand) {
                continue 'outer;
            }
        }
        leftmost = Some(i);
        break;
    }
    Ok(GeodesicSet { length, geodesics, leftmost })
}

fn collect_paths(
    map: &OrientedMap,
    cur: VertexId,
    dst: VertexId,
    stack: &mut Vec<EdgeId>,
    out: &mut Vec<Vec<EdgeId>>,
) {
    if cur == dst && !stack.is_empty() {
        out.push(stack.clone());
        return;
    }
    for e in map.outgoing(cur) {
        stack.push(e);
        collect_paths(map, map.edges[e].head, dst, stack, out);
        stack.pop();
    }
}

/// Whether path `q` lies weakly to the right of path `p`. Both run between
/// the same endpoints. In a planar embedding two paths can only cross at a
/// common vertex, so it suffices to compare, at every common vertex, how
/// far each path's darts sit from the leftmost position of their blocks.
pub fn weakly_right_of(map: &OrientedMap, q: &[EdgeId], p: &[EdgeId]) -> bool {
    use std::collections::HashMap;
    if p.is_empty() || q.is_empty() {
        return true;
    }
    let mut p_out: HashMap<VertexId, EdgeId> = HashMap::new();
    let mut p_in: HashMap<VertexId, EdgeId> = HashMap::new();
    for &e in p {
        p_out.insert(map.edges[e].tail, e);
        p_in.insert(map.edges[e].head, e);
    }
    for (i, &e) in q.iter().enumerate() {
        let tail = map.edges[e].tail;
        if let Some(&pe) = p_out.get(&tail) {
            if out_leftness(map, tail, e) > out_leftness(map, tail, pe) {
                return false;
            }
        }
        let head = map.edges[e].head;
        if i + 1 == q.len() || p_in.contains_key(&head) {
            if let Some(&pe) = p_in.get(&head) {
                if in_leftness(map, head, e) > in_leftness(map, head, pe) {
                    return false;
                }
            }
        }
    }
    true
}

/// Position of an outgoing edge within the outgoing block at `v`, counted
/// from the rightmost outgoing edge (0 = rightmost).
fn out_leftness(map: &OrientedMap, v: VertexId, e: EdgeId) -> usize {
    let order = block_order(map, v, true);
    order.iter().position(|&x| x == e).expect("edge in out block")
}

/// Position of an incoming edge within the incoming block at `v`, counted
/// from the rightmost incoming edge (0 = rightmost).
fn in_leftness(map: &OrientedMap, v: VertexId, e: EdgeId) -> usize {
    let order = block_order(map, v, false);
    order.iter().position(|&x| x == e).expect("edge in in block")
}

/// The outgoing (or incoming) block at `v` ordered from rightmost to
/// leftmost.
fn block_order(map: &OrientedMap, v: VertexId, outgoing: bool) -> Vec<EdgeId> {
    let rot = &map.rotation[v];
    let n = rot.len();
    let is_kind = |e: EdgeId| {
        let rec = &map.edges[e];
        !rec.missing && (if outgoing { rec.tail == v } else { rec.head == v })
    };
    let members: Vec<EdgeId> = rot.iter().copied().filter(|&e| is_kind(e)).collect();
    if members.len() <= 1 {
        return members;
    }
    // Find the cyclic start of the block: the member whose cyclic
    // predecessor (skipping nothing) is not a member; fall back to the
    // linear order when the block wraps the whole rotation.
    let mut start = None;
    for i in 0..n {
        if is_kind(rot[i]) && !is_kind(rot[(i + n - 1) % n]) {
            start = Some(i);
            break;
        }
    }
    match start {
        Some(s) => {
            let mut out = Vec::new();
            for i in 0..n {
                let e = rot[(s + i) % n];
                if is_kind(e) {
                    out.push(e);
                }
            }
            if outgoing {
                // Outgoing blocks run rightmost..leftmost counterclockwise.
                out
            } else {
                // Incoming blocks run leftmost..rightmost counterclockwise.
                out.reverse();
                out
            }
        }
        None => {
            // Entire rotation is one block: linear order is the convention.
            let out = members;
            if outgoing {
                out
            } else {
                let mut o = out;
                o.reverse();
                o
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn zero_step_enumeration() {
        let walks = enum_walks_in_cone(0, (0, 0), Some((0, 0)), ConeSpec::quadrant()).unwrap();
        assert_eq!(walks.len(), 1);
        assert!(walks[0].is_empty());
    }

    #[test]
    fn two_step_quadrant_to_one_zero() {
        let walks = enum_walks_in_cone(2, (0, 0), Some((1, 0)), ConeSpec::quadrant()).unwrap();
        assert_eq!(walks.len(), 1);
        assert_eq!(walks[0].steps, vec![Step::C, Step::A]);
        let empty = enum_walks_in_cone(2, (0, 0), Some((0, 0)), ConeSpec::quadrant()).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn triangulation_counts_small() {
        assert_eq!(count_triangulations(1, 1, 1).unwrap(), 1);
        assert_eq!(count_triangulations(3, 2, 1).unwrap(), 1);
        assert_eq!(count_triangulations(3, 1, 2).unwrap(), 1);
        assert_eq!(count_triangulations(3, 1, 1).unwrap(), 0);
    }

    #[test]
    fn count_symmetry_under_reversal() {
        for n in 1..=9usize {
            for l in 1..=4 {
                for r in 1..=4 {
                    assert_eq!(
                        count_triangulations(n, l, r).unwrap(),
                        count_triangulations(n, r, l).unwrap(),
                        "n={n} l={l} r={r}"
                    );
                }
            }
        }
    }

    #[test]
    fn plain_law_uniform() {
        let pmf = exact_weighted_law(3, Weighting::Plain).unwrap();
        assert_eq!(pmf.len(), 27);
        let total: BigRational = pmf.values().cloned().sum();
        assert!(total.is_one());
    }

    #[test]
    fn conditioned_law_sums_to_one_and_matches_transitions() {
        for n in 1..=5usize {
            let pmf = exact_weighted_law(n, Weighting::ConditionedNonnegative { start: 0 })
                .unwrap();
            let total: BigRational = pmf.values().cloned().sum();
            assert!(total.is_one());
            let lazy = exact_conditioned_lazy_law(n).unwrap();
            let total2: BigRational = lazy.values().cloned().sum();
            assert!(total2.is_one());
        }
    }

    #[test]
    fn flip_pushforward_equals_h_transform() {
        // Exact pmf equality between the flip pushforward and the
        // h-transform law of the lazy first coordinate, n <= 7 here.
        for n in 0..=7usize {
            let flipped = exact_weighted_law(n, Weighting::FlippedLazy).unwrap();
            let cond = exact_conditioned_lazy_law(n).unwrap();
            assert_eq!(flipped, cond, "n = {n}");
        }
    }

    #[test]
    fn ruin_probability_closed_form() {
        for k in 1..=20i64 {
            for s in 0..=k {
                let p = exact_ruin_probability(s, k);
                let expected =
                    BigRational::new(BigInt::from(s + 1), BigInt::from(k + 1));
                assert_eq!(p, expected, "s={s} K={k}");
            }
        }
    }

    #[test]
    fn ruin_probability_value() {
        let p = exact_ruin_probability(2, 5);
        assert!((p.to_f64().unwrap() - 0.5).abs() < 1e-12);
    }
}
