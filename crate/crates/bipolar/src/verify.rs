//! Exhaustive and randomized verification suites behind the `verify` CLI
//! subcommand. The acceptance tests drive the same functions at their
//! pinned scales.

use crate::busemann::detect_cut_events;
use crate::distance::{leftmost_geodesic, max_xdp, xdp, Mode};
use crate::enumerate::{
    brute_force_geodesics, count_triangulations, enum_walks_in_cone, exact_conditioned_lazy_law,
    exact_ruin_probability, exact_weighted_law, ConeSpec, Weighting,
};
use crate::kmsw::{build, invert};
use crate::map::{isomorphic, OrientedMap};
use crate::sampler;
use crate::walk::{
    sample_conditioned_walk, sample_uibot_walk, split_quadrant_walks, Walk,
};
use crate::Result;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn push(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(Check { name: name.into(), pass, detail });
    }
}

/// Every admissible encoding walk with up to `max_steps` steps: those whose
/// triangulation has no missing edges (equivalently, the first coordinate
/// stays non-negative and the second attains its minimum at the end).
pub fn admissible_walks(max_steps: usize) -> Result<Vec<Walk>> {
    let mut out = Vec::new();
    for n in 0..=max_steps {
        for w in enum_walks_in_cone(n, (0, 0), None, ConeSpec { min_first: Some(0), min_second: None })? {
            let pos = w.positions();
            let end_y = pos[n].1;
            if pos.iter().all(|p| p.1 >= end_y) {
                out.push(w);
            }
        }
    }
    Ok(out)
}

/// Round trip both ways plus the count agreement between cone walks and
/// isomorphism classes of built maps.
pub fn suite_roundtrip(max_steps_exhaustive: usize, random_len: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport { suite: "roundtrip".into(), checks: Vec::new() };

    let walks = admissible_walks(max_steps_exhaustive)?;
    let mut forward_ok = 0usize;
    let mut forward_total = 0usize;
    for w in &walks {
        forward_total += 1;
        let m = build(w);
        if invert(&m).map(|back| back.steps == w.steps).unwrap_or(false) {
            forward_ok += 1;
        }
    }
    report.push(
        "invert_build_identity",
        forward_ok == forward_total,
        format!("{forward_ok}/{forward_total} admissible walks up to {max_steps_exhaustive} steps"),
    );

    // build(invert(m)) isomorphic to m over all maps with <= max+1 edges,
    // using canonical dedup for the class count as well.
    let mut classes: std::collections::BTreeMap<(usize, usize, usize), Vec<OrientedMap>> =
        Default::default();
    let mut back_ok = 0usize;
    let mut back_total = 0usize;
    for w in &walks {
        let m = build(w);
        back_total += 1;
        if let Ok(w2) = invert(&m) {
            if isomorphic(&build(&w2), &m) {
                back_ok += 1;
            }
        }
        let seg = m.boundary_segments()?;
        classes
            .entry((m.edge_count(), seg.upper_left.len(), seg.lower_right.len()))
            .or_default()
            .push(m);
    }
    report.push(
        "build_invert_isomorphic",
        back_ok == back_total,
        format!("{back_ok}/{back_total} maps"),
    );

    // Count agreement: the number of walks per (n, l, r) equals the number
    // of distinct maps (no two distinct admissible walks build isomorphic
    // maps).
    let mut count_ok = true;
    let mut detail = String::new();
    for ((n, l, r), maps) in &classes {
        let mut canon: Vec<String> = maps
            .iter()
            .map(|m| crate::io::map_to_json(&m.canonical_form()))
            .collect();
        canon.sort();
        canon.dedup();
        let expected = count_triangulations(*n, *l as i64, *r as i64)?;
        if canon.len() != maps.len() || maps.len() != expected {
            count_ok = false;
            detail = format!(
                "(n={n}, l={l}, r={r}): {} walks, {} classes, count {}",
                maps.len(),
                canon.len(),
                expected
            );
            break;
        }
    }
    report.push(
        "walk_map_count_agreement",
        count_ok,
        if count_ok {
            format!("{} (n, l, r) classes agree", classes.len())
        } else {
            detail
        },
    );

    // Randomized long round trips on admissible prefixes.
    let mut rand_ok = 0usize;
    let mut rand_total = 0usize;
    for s in 0..24u64 {
        let w = sample_uibot_walk(random_len, seed ^ s);
        let m = build(&w);
        if m.edges.iter().any(|e| e.missing) {
            // Condition the sample by trimming to the longest admissible
            // prefix: recompute from the walk.
            let pos = w.positions();
            let mut best = 0usize;
            for j in 0..=w.len() {
                let endy = pos[j].1;
                if pos[..=j].iter().all(|p| p.0 >= 0 && p.1 >= endy) {
                    best = j;
                }
            }
            let trimmed = Walk::from_origin(w.steps[..best].to_vec());
            let m2 = build(&trimmed);
            if !m2.edges.iter().any(|e| e.missing) {
                rand_total += 1;
                if invert(&m2).map(|b| b.steps == trimmed.steps).unwrap_or(false) {
                    rand_ok += 1;
                }
            }
        } else {
            rand_total += 1;
            if invert(&m).map(|b| b.steps == w.steps).unwrap_or(false) {
                rand_ok += 1;
            }
        }
    }
    report.push(
        "randomized_roundtrip",
        rand_ok == rand_total && rand_total > 0,
        format!("{rand_ok}/{rand_total} randomized walks (target length {random_len})"),
    );
    Ok(report)
}

/// Exact pmf equality between the flip pushforward and the conditioned
/// lazy-walk law, in rational arithmetic.
pub fn suite_pitman(max_n: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport { suite: "pitman".into(), checks: Vec::new() };
    let mut ok = true;
    for n in 0..=max_n {
        let flipped = exact_weighted_law(n, Weighting::FlippedLazy)?;
        let cond = exact_conditioned_lazy_law(n)?;
        if flipped != cond {
            ok = false;
            report.push("flip_pushforward_pmf", false, format!("mismatch at n={n}"));
            break;
        }
    }
    if ok {
        report.push("flip_pushforward_pmf", true, format!("exact equality for n <= {max_n}"));
    }
    Ok(report)
}

/// Exact hitting probabilities (s+1)/(K+1).
pub fn suite_ruin(max_level: i64) -> Result<SuiteReport> {
    let mut report = SuiteReport { suite: "ruin".into(), checks: Vec::new() };
    let mut ok = true;
    'outer: for k in 1..=max_level {
        for s in 0..=k {
            let p = exact_ruin_probability(s, k);
            let expected = BigRational::new(BigInt::from(s + 1), BigInt::from(k + 1));
            if p != expected {
                ok = false;
                report.push("gamblers_ruin", false, format!("mismatch at s={s}, K={k}"));
                break 'outer;
            }
        }
    }
    if ok {
        report.push(
            "gamblers_ruin",
            true,
            format!("exact (s+1)/(K+1) for all 0 <= s <= K <= {max_level}"),
        );
    }
    Ok(report)
}

/// All boundary-channeled maps with the given boundary perimeter and
/// interior budget, as canonical forms keyed by (l, r, interior edges).
fn channeled_family(
    l_plus_r: usize,
    max_interior: usize,
) -> Result<std::collections::BTreeMap<(usize, usize, usize), Vec<OrientedMap>>> {
    let mut out: std::collections::BTreeMap<(usize, usize, usize), Vec<OrientedMap>> =
        Default::default();
    for l in 1..l_plus_r {
        let r = l_plus_r - l;
        for n in 1..=(max_interior + l_plus_r) {
            let n_steps = n.checked_sub(1).unwrap();
            if n_steps > crate::enumerate::DEFAULT_WALK_CAP {
                continue;
            }
            let walks = enum_walks_in_cone(
                n_steps,
                (0, 0),
                Some((l as i64 - 1, -(r as i64) + 1)),
                ConeSpec::bipolar(r as i64),
            )?;
            for w in walks {
                let m = build(&w);
                debug_assert!(m.edges.iter().all(|e| !e.missing));
                if sampler::is_strictly_channeled(&m)? {
                    let interior = m.edge_count() - l_plus_r;
                    if interior <= max_interior {
                        out.entry((l, r, interior)).or_default().push(m);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Exact count equality between the channeled families related by moving
/// the source along the boundary, plus the involution check.
pub fn suite_phi(max_perimeter: usize, max_interior: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport { suite: "phi".into(), checks: Vec::new() };
    let mut counts_ok = true;
    let mut involution_ok = true;
    let mut images_ok = true;
    let mut detail = String::new();
    for perimeter in 2..=max_perimeter {
        let family = channeled_family(perimeter, max_interior)?;
        for interior in 0..=max_interior {
            // Count equality across all (l, r) with l + r fixed.
            let counts: Vec<usize> = (1..perimeter)
                .map(|l| {
                    family
                        .get(&(l, perimeter - l, interior))
                        .map_or(0, |v| v.len())
                })
                .collect();
            if counts.windows(2).any(|w| w[0] != w[1]) {
                counts_ok = false;
                detail = format!("perimeter {perimeter}, interior {interior}: counts {counts:?}");
            }
            // Phi maps each family bijectively onto the next and inverts.
            for l in 1..perimeter {
                let r = perimeter - l;
                let Some(maps) = family.get(&(l, r, interior)) else { continue };
                for m in maps {
                    for k in 1..r {
                        let img = sampler::apply_phi(m, k)?;
                        if !img.validate().is_valid()
                            || !sampler::is_strictly_channeled(&img)?
                        {
                            images_ok = false;
                        }
                        let back = sampler::apply_phi_inverse(&img, k)?;
                        if !isomorphic(&back, m) {
                            involution_ok = false;
                        }
                        // The image lands in the (l+k, r-k) family.
                        let target = family.get(&(l + k, r - k, interior));
                        if !target
                            .map(|t| t.iter().any(|cand| isomorphic(cand, &img)))
                            .unwrap_or(false)
                        {
                            images_ok = false;
                        }
                    }
                }
            }
        }
    }
    report.push(
        "family_counts_invariant",
        counts_ok,
        if counts_ok { format!("perimeters <= {max_perimeter}") } else { detail },
    );
    report.push("phi_involution", involution_ok, "phi then mirrored phi is the identity".into());
    report.push("phi_images_in_family", images_ok, "images stay boundary-channeled".into());
    Ok(report)
}

/// Greedy leftmost geodesics equal the dominance-leftmost brute force, and
/// optimal lengths match exhaustive path enumeration.
pub fn suite_geodesics(
    exhaustive_max_edges: usize,
    random_maps: usize,
    seed: u64,
) -> Result<SuiteReport> {
    let mut report = SuiteReport { suite: "geodesics".into(), checks: Vec::new() };
    let mut checked_pairs = 0usize;
    let mut ok = true;
    let mut detail = String::new();
    let walks = admissible_walks(exhaustive_max_edges.saturating_sub(1))?;
    let mut maps: Vec<OrientedMap> = walks.iter().map(build).collect();
    // Random bipolar maps via the rejection sampler, capped at 40 edges.
    let mut added = 0usize;
    let mut stream = 0u64;
    while added < random_maps {
        stream += 1;
        if let Ok(m) = sampler::sample_boltzmann_right_stream(
            1 + (stream % 4) as usize,
            seed,
            stream,
            100_000,
        ) {
            if m.edge_count() <= crate::enumerate::DEFAULT_EDGE_CAP {
                maps.push(m);
                added += 1;
            }
        }
    }
    for (mi, m) in maps.iter().enumerate() {
        for mode in [Mode::Ldp, Mode::Sdp] {
            let mut brute_max = 0u32;
            for src in 0..m.vertex_count() {
                for dst in 0..m.vertex_count() {
                    let dp = xdp(m, mode, src, dst)?;
                    let brute = brute_force_geodesics(m, mode, src, dst);
                    match (dp, brute) {
                        (Some(len), Ok(set)) => {
                            checked_pairs += 1;
                            if set.length != len as usize {
                                ok = false;
                                detail = format!("map {mi} {mode:?} {src}->{dst}: length");
                            }
                            if mode == Mode::Ldp {
                                brute_max = brute_max.max(len);
                            }
                            let greedy = leftmost_geodesic(m, mode, src, dst)?;
                            match set.leftmost {
                                Some(ix) => {
                                    if set.geodesics[ix] != greedy {
                                        ok = false;
                                        detail = format!(
                                            "map {mi} {mode:?} {src}->{dst}: leftmost mismatch"
                                        );
                                    }
                                }
                                None => {
                                    ok = false;
                                    detail = format!(
                                        "map {mi} {mode:?} {src}->{dst}: no dominance-leftmost"
                                    );
                                }
                            }
                        }
                        (None, Err(_)) => {}
                        _ => {
                            ok = false;
                            detail = format!("map {mi} {mode:?} {src}->{dst}: reachability");
                        }
                    }
                }
            }
            if mode == Mode::Ldp {
                let reported = max_xdp(m, Mode::Ldp)?;
                if reported != brute_max {
                    ok = false;
                    detail = format!("map {mi}: max_xdp {reported} vs brute {brute_max}");
                }
            }
        }
    }
    report.push(
        "greedy_equals_dominance_leftmost",
        ok,
        if ok {
            format!("{checked_pairs} reachable pairs over {} maps", maps.len())
        } else {
            detail
        },
    );
    Ok(report)
}

/// Conditional law of the rejection sampler against exact enumeration.
pub fn suite_boltzmann_law(trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport { suite: "boltzmann-law".into(), checks: Vec::new() };
    let cap = 7usize;
    let mut by_canon: std::collections::BTreeMap<String, usize> = Default::default();
    let mut kept = 0usize;
    for t in 0..trials {
        let m = sampler::sample_boltzmann_right_stream(1, seed, t as u64, 1_000_000)?;
        if m.edge_count() <= cap {
            *by_canon
                .entry(crate::io::map_to_json(&m.canonical_form()))
                .or_default() += 1;
            kept += 1;
        }
    }
    // Exact conditional law on maps with <= cap edges.
    let mut total_mass = 0.0f64;
    let mut expected: Vec<(String, f64)> = Vec::new();
    for w in admissible_walks(cap - 1)? {
        let m = build(&w);
        let seg = m.boundary_segments()?;
        if seg.lower_right.len() != 1 {
            continue;
        }
        let mass = 3f64.powi(-(m.edge_count() as i32));
        total_mass += mass;
        expected.push((crate::io::map_to_json(&m.canonical_form()), mass));
    }
    let mut ok = true;
    let mut detail = format!("{kept} draws on {} maps", expected.len());
    let mut worst = 0.0f64;
    for (canon, mass) in &expected {
        let p_exp = mass / total_mass;
        let p_hat = by_canon.get(canon).copied().unwrap_or(0) as f64 / kept as f64;
        let se = (p_exp * (1.0 - p_exp) / kept as f64).sqrt().max(1e-9);
        let z = (p_hat - p_exp).abs() / se;
        worst = worst.max(z);
        if z > 4.0 {
            ok = false;
            detail = format!("map frequency off by {z:.2} se (expected {p_exp:.5}, got {p_hat:.5})");
        }
    }
    if ok {
        detail.push_str(&format!(", worst deviation {worst:.2} se"));
    }
    report.push("boltzmann_conditional_law", ok, detail);
    Ok(report)
}

/// Walk events against map cut vertices: detected events whose verified
/// guard reaches a prefix horizon coincide with the cut vertices of the
/// prefix map, first-visit for first-visit.
pub fn suite_cutequiv(windows: usize, window_len: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport { suite: "cutequiv".into(), checks: Vec::new() };
    let guard = window_len / 4;
    let mut ok = true;
    let mut detail = String::new();
    let mut events_checked = 0usize;
    for wdx in 0..windows as u64 {
        let w = sample_conditioned_walk(window_len, 0, seed ^ wdx);
        let events = detect_cut_events(&w, guard);
        // Map side: cut vertices of the prefix maps at each event horizon.
        let m = build(&w);
        let trace = m.active_trace.as_ref().expect("built map has a trace");
        // Events detected with band guard must be cut vertices of the map
        // explored to time + guard; conversely every first-visit cut vertex
        // of that prefix map at a time within the band must be detected.
        let detected: std::collections::BTreeSet<usize> =
            events.iter().map(|e| e.time).collect();
        events_checked += detected.len();
        // Build each prefix once per distinct horizon; horizons are
        // event-time + guard.
        for e in &events {
            let horizon = e.time + guard;
            let prefix = build(&Walk::from_origin(w.steps[..horizon].to_vec()));
            let cuts = prefix.cut_vertices()?;
            let v = m.edges[trace[e.time]].tail;
            // Vertex ids agree between prefix and full map because the
            // builder allocates ids in creation order.
            if !cuts.contains(&v) {
                ok = false;
                detail = format!("window {wdx}: event at {} not a prefix cut vertex", e.time);
            }
        }
        // Converse on a sampled horizon: every first-visit cut vertex of
        // the half-window prefix map with time in the band is detected.
        let horizon = window_len / 2 + guard;
        let prefix = build(&Walk::from_origin(w.steps[..horizon].to_vec()));
        let cuts = prefix.cut_vertices()?;
        for &v in &cuts {
            let Some(t) = trace[..=horizon]
                .iter()
                .position(|&e| m.edges[e].tail == v)
            else {
                continue;
            };
            if t >= 1 && t + guard <= horizon && t <= window_len / 2 && !detected.contains(&t) {
                ok = false;
                detail = format!("window {wdx}: prefix cut vertex at {t} not detected");
            }
        }
    }
    report.push(
        "cut_event_equivalence",
        ok,
        if ok {
            format!("{events_checked} events across {windows} windows of {window_len}")
        } else {
            detail
        },
    );
    Ok(report)
}

/// The reachable submap of a window equals the triangulation of the
/// reachable part of the decomposition, as rooted maps.
pub fn suite_quadrant_split(windows: usize, window_len: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport { suite: "quadrant-split".into(), checks: Vec::new() };
    let mut ok = true;
    let mut detail = String::new();
    for s in 0..windows as u64 {
        let w = sample_uibot_walk(window_len, seed ^ s);
        let (hat, hat_prime) = split_quadrant_walks(&w);
        if hat.len() + hat_prime.len() != w.len() {
            ok = false;
            detail = format!("seed {s}: split loses steps");
            break;
        }
        let m_full = build(&w);
        let x0 = m_full.edges[m_full.root_edge.unwrap()].tail;
        let sub = m_full.reachable_submap(x0);
        let m_hat = build(&hat);
        let hat_tail = m_hat.edges[m_hat.root_edge.unwrap()].tail;
        let hat_clean = m_hat.reachable_submap(hat_tail);
        if !isomorphic(&sub, &hat_clean) {
            ok = false;
            detail = format!(
                "seed {s}: submap V={} E={} vs rebuilt V={} E={}",
                sub.vertex_count(),
                sub.edge_count(),
                hat_clean.vertex_count(),
                hat_clean.edge_count()
            );
            break;
        }
    }
    report.push(
        "reachable_equals_hat_walk_map",
        ok,
        if ok {
            format!("{windows} windows of {window_len} steps")
        } else {
            detail
        },
    );
    Ok(report)
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    match name {
        "roundtrip" => suite_roundtrip(8, 2_000, seed),
        "pitman" => suite_pitman(9),
        "ruin" => suite_ruin(20),
        "phi" => suite_phi(6, 8),
        "geodesics" => suite_geodesics(6, 60, seed),
        "boltzmann-law" => suite_boltzmann_law(20_000, seed),
        "cutequiv" => suite_cutequiv(50, 2_000, seed),
        "quadrant-split" => suite_quadrant_split(100, 1_000, seed),
        other => Err(crate::error::Error::Precondition(format!(
            "unknown suite {other}; expected one of roundtrip|pitman|ruin|phi|geodesics|boltzmann-law|cutequiv|quadrant-split"
        ))),
    }
}
