//! Lattice walks with the three-step alphabet, their samplers, stopping
//! times, the lazy-walk step flip, and the quadrant time decomposition.

use crate::error::Error;
use crate::rng::stream_rng;
use crate::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One step of the encoding walk.
///
/// `A` moves by (1,-1), `B` by (-1,0), `C` by (0,1). The first coordinate
/// tracks the left boundary, the second the right boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    A,
    B,
    C,
}

pub const STEPS: [Step; 3] = [Step::A, Step::B, Step::C];

impl Step {
    /// Lattice increment (dl, dr).
    pub fn increment(self) -> (i64, i64) {
        match self {
            Step::A => (1, -1),
            Step::B => (-1, 0),
            Step::C => (0, 1),
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Step::A => 'a',
            Step::B => 'b',
            Step::C => 'c',
        }
    }

    pub fn from_char(c: char) -> Option<Step> {
        match c {
            'a' => Some(Step::A),
            'b' => Some(Step::B),
            'c' => Some(Step::C),
            _ => None,
        }
    }

    fn uniform(rng: &mut ChaCha8Rng) -> Step {
        STEPS[rng.gen_range(0..3)]
    }
}

/// A finite walk: a start point plus a step sequence. Positions are
/// recomputed on demand; only the tags are stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Walk {
    pub start: (i64, i64),
    pub steps: Vec<Step>,
}

impl Walk {
    pub fn new(start: (i64, i64), steps: Vec<Step>) -> Self {
        Walk { start, steps }
    }

    pub fn from_origin(steps: Vec<Step>) -> Self {
        Walk { start: (0, 0), steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Position after `j` steps; `position(0)` is the start.
    pub fn position(&self, j: usize) -> (i64, i64) {
        let mut p = self.start;
        for s in &self.steps[..j] {
            let (dl, dr) = s.increment();
            p.0 += dl;
            p.1 += dr;
        }
        p
    }

    /// All positions 0..=len, materialized.
    pub fn positions(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut p = self.start;
        out.push(p);
        for s in &self.steps {
            let (dl, dr) = s.increment();
            p.0 += dl;
            p.1 += dr;
            out.push(p);
        }
        out
    }

    /// First coordinate after `j` steps.
    pub fn first_coord(&self, j: usize) -> i64 {
        self.position(j).0
    }

    pub fn end(&self) -> (i64, i64) {
        self.position(self.len())
    }
}

/// Boundary hit times: for `k >= 1` the first time the second coordinate
/// reaches `-k`, for `k <= -1` the first time the first coordinate reaches
/// `k`, and `tau(0) = 0`. Absent when never hit within the walk.
#[derive(Debug, Clone, Default)]
pub struct StoppingTimeSet {
    entries: Vec<(i64, Option<usize>)>,
}

impl StoppingTimeSet {
    pub fn get(&self, k: i64) -> Option<usize> {
        self.entries.iter().find(|(kk, _)| *kk == k).and_then(|(_, t)| *t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Option<usize>)> + '_ {
        self.entries.iter().copied()
    }
}

/// Hit times `tau_k` for the requested indices, relative to the walk start.
pub fn first_hit_times(walk: &Walk, indices: &[i64]) -> StoppingTimeSet {
    let mut entries = Vec::with_capacity(indices.len());
    let positions = walk.positions();
    let (l0, r0) = walk.start;
    for &k in indices {
        let t = if k == 0 {
            Some(0)
        } else if k >= 1 {
            positions
                .iter()
                .enumerate()
                .skip(1)
                .find(|(_, (_, r))| r - r0 == -k)
                .map(|(n, _)| n)
        } else {
            positions
                .iter()
                .enumerate()
                .skip(1)
                .find(|(_, (l, _))| l - l0 == k)
                .map(|(n, _)| n)
        };
        entries.push((k, t));
    }
    StoppingTimeSet { entries }
}

/// I.i.d. uniform steps; the infinite-volume encoding truncated to a window.
pub fn sample_uibot_walk(n_steps: usize, seed: u64) -> Walk {
    let mut rng = stream_rng(seed, 0);
    sample_uibot_walk_with(n_steps, &mut rng)
}

pub fn sample_uibot_walk_with(n_steps: usize, rng: &mut ChaCha8Rng) -> Walk {
    let steps = (0..n_steps).map(|_| Step::uniform(rng)).collect();
    Walk::from_origin(steps)
}

/// One step of the walk conditioned to keep its first coordinate
/// non-negative, from first-coordinate value `x`: the harmonic weight
/// h(x) = x + 1 gives transitions (x+2)/(3(x+1)), x/(3(x+1)), 1/3 for
/// A, B, C respectively.
pub fn conditioned_step(x: i64, rng: &mut ChaCha8Rng) -> Step {
    debug_assert!(x >= 0);
    // Draw u uniform in [0, 3(x+1)) and split by integer thresholds.
    let denom = 3 * (x + 1) as u64;
    let u = rng.gen_range(0..denom);
    if u < (x + 2) as u64 {
        Step::A
    } else if u < (2 * x + 2) as u64 {
        Step::B
    } else {
        Step::C
    }
}

/// Walk conditioned to keep its first coordinate non-negative, realized by
/// the exact h-transform transitions (no rejection).
pub fn sample_conditioned_walk(n_steps: usize, start_first_coord: i64, seed: u64) -> Walk {
    let mut rng = stream_rng(seed, 0);
    sample_conditioned_walk_with(n_steps, start_first_coord, &mut rng)
}

pub fn sample_conditioned_walk_with(
    n_steps: usize,
    start_first_coord: i64,
    rng: &mut ChaCha8Rng,
) -> Walk {
    assert!(start_first_coord >= 0);
    let mut steps = Vec::with_capacity(n_steps);
    let mut x = start_first_coord;
    for _ in 0..n_steps {
        let s = conditioned_step(x, rng);
        x += s.increment().0;
        steps.push(s);
    }
    Walk::new((start_first_coord, 0), steps)
}

/// Reflects a lazy walk (increments in {-1,0,1}, started at 0) off its
/// running minimum: out(n) = in(n) - 2 min_{j<=n} in(j). Every -1 step taken
/// at a new running minimum becomes a +1 step; the result is non-negative.
pub fn pitman_flip(lazy_walk: &[i64]) -> Result<Vec<i64>> {
    if let Some(&first) = lazy_walk.first() {
        if first != 0 {
            return Err(Error::Precondition("lazy walk must start at 0".into()));
        }
    }
    for (i, w) in lazy_walk.windows(2).enumerate() {
        let d = w[1] - w[0];
        if !(-1..=1).contains(&d) {
            return Err(Error::InvalidLazyIncrement(i + 1));
        }
    }
    let mut min = 0;
    Ok(lazy_walk
        .iter()
        .map(|&v| {
            min = min.min(v);
            v - 2 * min
        })
        .collect())
}

/// Inverse of [`pitman_flip`] given the terminal running minimum `k`:
/// for r in 0..k, the +1 step at the last time the path sits at r is
/// flipped back to a -1 step.
pub fn pitman_unflip(flipped: &[i64], k: i64) -> Result<Vec<i64>> {
    if flipped.iter().any(|&v| v < 0) {
        return Err(Error::Precondition("flipped path must be non-negative".into()));
    }
    let n = flipped.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if k < 0 || k > *flipped.last().unwrap() {
        return Err(Error::Precondition("unflip level out of range".into()));
    }
    let mut suffix_min = vec![0i64; n];
    let mut m = i64::MAX;
    for j in (0..n).rev() {
        m = m.min(flipped[j]);
        suffix_min[j] = m;
    }
    Ok((0..n).map(|j| flipped[j] - 2 * k.min(suffix_min[j])).collect())
}

/// Which side of the quadrant decomposition a time belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadrantSide {
    /// Times `N_k^R`: the exploration re-enters the reachable part.
    EnterReachable,
    /// Times `N_k^L`: the exploration leaves the reachable part.
    LeaveReachable,
}

/// The alternating times N_1^R = 0 < N_1^L < N_2^R < ... at which the
/// exploration crosses between the reachable quadrant and its complement.
#[derive(Debug, Clone)]
pub struct QuadrantTimes {
    /// Alternating (side, time) pairs, starting with `(EnterReachable, 0)`.
    pub times: Vec<(QuadrantSide, usize)>,
    /// True when the final interval is cut off by the end of the walk
    /// (the next alternation time was not reached).
    pub open_end: bool,
}

/// Computes the alternation times on a finite window: N_k^L is the first
/// n >= N_k^R + 1 with L(n) = L(N_k^R) - 1, and N_{k+1}^R the first
/// n >= N_k^L + 1 with R(n) = R(N_k^L) - 1.
pub fn quadrant_decomposition_times(walk: &Walk) -> QuadrantTimes {
    assert_eq!(walk.start, (0, 0), "decomposition is defined from the origin");
    let pos = walk.positions();
    let n = walk.len();
    let mut times = vec![(QuadrantSide::EnterReachable, 0usize)];
    let mut cur = 0usize;
    loop {
        let side = if times.len() % 2 == 1 {
            QuadrantSide::LeaveReachable
        } else {
            QuadrantSide::EnterReachable
        };
        let target = match side {
            QuadrantSide::LeaveReachable => pos[cur].0 - 1,
            QuadrantSide::EnterReachable => pos[cur].1 - 1,
        };
        let next = (cur + 1..=n).find(|&m| match side {
            QuadrantSide::LeaveReachable => pos[m].0 == target,
            QuadrantSide::EnterReachable => pos[m].1 == target,
        });
        match next {
            Some(m) => {
                times.push((side, m));
                cur = m;
            }
            None => return QuadrantTimes { times, open_end: true },
        }
    }
}

/// The two complementary step sequences of the quadrant decomposition.
///
/// `walk_hat` collects the increments at times inside the reachable
/// quadrant; `walk_hat_prime` the complementary ones, with the B step at
/// each leave-time replaced by C.
pub fn split_quadrant_walks(walk: &Walk) -> (Walk, Walk) {
    let qt = quadrant_decomposition_times(walk);
    let mut hat = Vec::new();
    let mut hat_prime = Vec::new();
    // Steps are indexed 1..=len; step n is in the hat part iff
    // N_k^R <= n <= N_k^L - 1 for some k.
    let mut side = QuadrantSide::EnterReachable;
    let mut boundaries = qt.times.iter().skip(1).peekable();
    let mut leave_times = Vec::new();
    for n in 1..=walk.len() {
        if let Some(&&(s, t)) = boundaries.peek() {
            if n == t {
                side = s;
                if s == QuadrantSide::LeaveReachable {
                    leave_times.push(t);
                }
                boundaries.next();
            }
        }
        let step = walk.steps[n - 1];
        match side {
            QuadrantSide::EnterReachable => hat.push(step),
            QuadrantSide::LeaveReachable => {
                if leave_times.last() == Some(&n) {
                    debug_assert_eq!(step, Step::B);
                    hat_prime.push(Step::C);
                } else {
                    hat_prime.push(step);
                }
            }
        }
    }
    (Walk::from_origin(hat), Walk::from_origin(hat_prime))
}

/// A window of the half-plane model's encoding walk: `origin` marks time 0;
/// everything before it is a concatenation of i.i.d. segments, each the walk
/// stopped when its first coordinate first hits -1 (re-rooted).
#[derive(Debug, Clone)]
pub struct AnchoredWalk {
    pub walk: Walk,
    /// Index into the step sequence at which time 0 sits.
    pub origin: usize,
}

/// Samples the half-plane window: `n_negative_segments` hitting-time
/// excursions before the origin, then `n_positive_steps` unconditioned
/// steps.
pub fn sample_uibhbot_walk(
    n_negative_segments: usize,
    n_positive_steps: usize,
    seed: u64,
) -> AnchoredWalk {
    let mut rng = stream_rng(seed, 0);
    sample_uibhbot_walk_with(n_negative_segments, n_positive_steps, &mut rng)
}

pub fn sample_uibhbot_walk_with(
    n_negative_segments: usize,
    n_positive_steps: usize,
    rng: &mut ChaCha8Rng,
) -> AnchoredWalk {
    let mut steps = Vec::new();
    for _ in 0..n_negative_segments {
        steps.extend(sample_hitting_segment(rng));
    }
    let origin = steps.len();
    for _ in 0..n_positive_steps {
        steps.push(Step::uniform(rng));
    }
    AnchoredWalk { walk: Walk::from_origin(steps), origin }
}

/// One i.i.d. segment: the uniform walk run until its first coordinate
/// first hits -1 (the final step is necessarily B).
pub fn sample_hitting_segment(rng: &mut ChaCha8Rng) -> Vec<Step> {
    let mut steps = Vec::new();
    let mut l = 0i64;
    loop {
        let s = Step::uniform(rng);
        l += s.increment().0;
        steps.push(s);
        if l == -1 {
            return steps;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_length_walk() {
        let w = sample_uibot_walk(0, 7);
        assert!(w.is_empty());
        assert_eq!(w.end(), (0, 0));
    }

    #[test]
    fn step_increments_sum_to_zero() {
        let sum = STEPS.iter().fold((0, 0), |acc, s| {
            let (dl, dr) = s.increment();
            (acc.0 + dl, acc.1 + dr)
        });
        assert_eq!(sum, (0, 0));
    }

    #[test]
    fn uibot_frequencies_near_uniform() {
        let w = sample_uibot_walk(300_000, 1);
        let mut counts = [0usize; 3];
        for s in &w.steps {
            counts[*s as usize] += 1;
        }
        for c in counts {
            let freq = c as f64 / 300_000.0;
            assert!((freq - 1.0 / 3.0).abs() < 0.01, "freq {freq}");
        }
    }

    #[test]
    fn uibot_walk_deterministic() {
        assert_eq!(sample_uibot_walk(1000, 42), sample_uibot_walk(1000, 42));
        assert_ne!(sample_uibot_walk(1000, 42), sample_uibot_walk(1000, 43));
    }

    #[test]
    fn conditioned_never_steps_below_zero() {
        let w = sample_conditioned_walk(10_000, 0, 3);
        for p in w.positions() {
            assert!(p.0 >= 0);
        }
    }

    #[test]
    fn conditioned_from_zero_never_takes_b() {
        // h(-1) = 0: from x = 0 the B transition has probability 0.
        let w = sample_conditioned_walk(50_000, 0, 9);
        let mut x = 0i64;
        for s in &w.steps {
            if x == 0 {
                assert_ne!(*s, Step::B);
            }
            x += s.increment().0;
        }
    }

    #[test]
    fn hit_times_match_definition() {
        // walk [A]: R hits -1 at step 1.
        let w = Walk::from_origin(vec![Step::A]);
        assert_eq!(first_hit_times(&w, &[1]).get(1), Some(1));
        // walk [C, C]: R is nondecreasing, tau_1 absent.
        let w = Walk::from_origin(vec![Step::C, Step::C]);
        assert_eq!(first_hit_times(&w, &[1]).get(1), None);
        // walk [B, B, A]: L path 0,-1,-2,-1 so tau_{-2} = 2.
        let w = Walk::from_origin(vec![Step::B, Step::B, Step::A]);
        assert_eq!(first_hit_times(&w, &[-2]).get(-2), Some(2));
        assert_eq!(first_hit_times(&w, &[0]).get(0), Some(0));
    }

    #[test]
    fn pitman_flip_examples() {
        assert_eq!(pitman_flip(&[0, -1, -2]).unwrap(), vec![0, 1, 2]);
        assert_eq!(pitman_flip(&[0, 0, 0]).unwrap(), vec![0, 0, 0]);
        assert!(pitman_flip(&[0, 2]).is_err());
    }

    #[test]
    fn pitman_unflip_recovers_input_exhaustively() {
        // All lazy walks of length <= 8: flip then unflip at the realized
        // terminal minimum recovers the original path.
        for n in 0..=8usize {
            for code in 0..3usize.pow(n as u32) {
                let mut c = code;
                let mut path = vec![0i64];
                for _ in 0..n {
                    let d = (c % 3) as i64 - 1;
                    c /= 3;
                    path.push(path.last().unwrap() + d);
                }
                let flipped = pitman_flip(&path).unwrap();
                assert!(flipped.iter().all(|&v| v >= 0));
                let k = -*path.iter().min().unwrap();
                let back = pitman_unflip(&flipped, k).unwrap();
                assert_eq!(back, path);
            }
        }
    }

    #[test]
    fn quadrant_times_basic() {
        // walk [B]: L drops immediately, N_1^L = 1.
        let w = Walk::from_origin(vec![Step::B]);
        let qt = quadrant_decomposition_times(&w);
        assert_eq!(qt.times, vec![
            (QuadrantSide::EnterReachable, 0),
            (QuadrantSide::LeaveReachable, 1)
        ]);
        assert!(qt.open_end);

        // walk [A, B, A]: L = 0,1,0,1; R = 0,-1,-1,-2.
        // N_1^L = first L == -1: never... L(N_1^R)=0, target -1: L never hits -1.
        let w = Walk::from_origin(vec![Step::A, Step::B, Step::A]);
        let qt = quadrant_decomposition_times(&w);
        assert_eq!(qt.times.len(), 1);
        assert!(qt.open_end);
    }

    #[test]
    fn quadrant_times_hand_case() {
        // walk [B, A, C, B]: L = 0,-1,0,0,-1; R = 0,0,-1,0,0.
        // N_1^R = 0; N_1^L = 1 (L hits -1); N_2^R = 2 (R hits R(1)-1 = -1);
        // N_2^L = 4 (first n >= 3 with L = L(2)-1 = -1).
        let w = Walk::from_origin(vec![Step::B, Step::A, Step::C, Step::B]);
        let qt = quadrant_decomposition_times(&w);
        assert_eq!(qt.times, vec![
            (QuadrantSide::EnterReachable, 0),
            (QuadrantSide::LeaveReachable, 1),
            (QuadrantSide::EnterReachable, 2),
            (QuadrantSide::LeaveReachable, 4),
        ]);
        assert!(qt.open_end);
    }

    #[test]
    fn quadrant_times_alternate_strictly() {
        let w = sample_uibot_walk(2000, 11);
        let qt = quadrant_decomposition_times(&w);
        for pair in qt.times.windows(2) {
            assert!(pair[0].1 < pair[1].1);
            assert_ne!(pair[0].0, pair[1].0);
        }
    }

    #[test]
    fn split_examples() {
        let (hat, hatp) = split_quadrant_walks(&Walk::from_origin(vec![Step::A, Step::A]));
        assert_eq!(hat.steps, vec![Step::A, Step::A]);
        assert!(hatp.is_empty());

        let (hat, hatp) = split_quadrant_walks(&Walk::from_origin(vec![Step::B]));
        assert!(hat.is_empty());
        assert_eq!(hatp.steps, vec![Step::C]);
    }

    #[test]
    fn split_preserves_step_count_and_hat_stays_nonnegative() {
        for seed in 0..20 {
            let w = sample_uibot_walk(1000, seed);
            let (hat, hatp) = split_quadrant_walks(&w);
            assert_eq!(hat.len() + hatp.len(), w.len());
            for p in hat.positions() {
                assert!(p.0 >= 0, "hat first coordinate dipped below 0");
            }
            if !hatp.is_empty() {
                assert_eq!(hatp.steps[0], Step::C);
            }
        }
    }

    #[test]
    fn uibhbot_segments_end_with_b_and_stay_positive_before() {
        let mut rng = stream_rng(5, 0);
        for _ in 0..200 {
            let seg = sample_hitting_segment(&mut rng);
            assert_eq!(*seg.last().unwrap(), Step::B);
            let mut l = 0i64;
            for (i, s) in seg.iter().enumerate() {
                l += s.increment().0;
                if i + 1 < seg.len() {
                    assert!(l >= 0);
                }
            }
            assert_eq!(l, -1);
        }
    }

    #[test]
    fn uibhbot_zero_segments_is_plain_walk() {
        let aw = sample_uibhbot_walk(0, 500, 77);
        assert_eq!(aw.origin, 0);
        assert_eq!(aw.walk, sample_uibot_walk(500, 77));
    }

    #[test]
    fn uibhbot_backward_reading_stays_positive_within_segments() {
        // Read backwards from the origin: within each negative segment the
        // first coordinate, relative to the segment end, stays >= 1 until
        // the segment boundary.
        let aw = sample_uibhbot_walk(10, 0, 13);
        let pos = aw.walk.positions();
        // Segment boundaries: times where L hits a new minimum.
        let mut boundaries = vec![aw.origin];
        let mut min = pos[aw.origin].0;
        for t in (0..aw.origin).rev() {
            if pos[t].0 < min {
                // t is inside the previous segment; boundary at t+1.
                min = pos[t].0;
            }
        }
        // Walk forward through segments instead: each segment ends when L
        // drops to one below its value at the segment start.
        let mut t = 0usize;
        while t < aw.origin {
            let l0 = pos[t].0;
            let mut u = t + 1;
            while pos[u].0 != l0 - 1 {
                assert!(pos[u].0 >= l0, "within-segment first coordinate dipped");
                u += 1;
            }
            boundaries.push(t);
            t = u;
        }
        assert_eq!(t, aw.origin);
    }
}
