//! Monte Carlo estimators for the crossing events, the scale sequences
//! `u_n`, `alpha_n`, `y_n`, the square-root trick and `p_c` sweeps.
//!
//! Every comparison between two estimated probabilities is made on one shared
//! sample set, so inclusions between events hold sample by sample.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::connectivity::{Connection, LiftedRegion, ReachProfile, Scratch, UnionFind};
use crate::error::{Error, Result};
use crate::exec::{map_stream_chunks, Executor};
use crate::lattice::{BoxFamily, PlanarBox, Point, Region, SlabGeometry};
use crate::sampler::{check_probability, fill_uniforms, sample_into, Configuration, SeedSpec};
use crate::stats::wilson;

/// Point estimate with a 95% Wilson interval and its sample provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub p_hat: f64,
    pub hits: u64,
    pub n_samples: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub streams: Range<u64>,
}

impl Estimate {
    pub fn from_counts(hits: u64, n_samples: u64, seed: u64, streams: Range<u64>) -> Self {
        let (ci_low, ci_high) = wilson(hits, n_samples);
        let p_hat = if n_samples == 0 { 0.0 } else { hits as f64 / n_samples as f64 };
        Estimate { p_hat, hits, n_samples, ci_low, ci_high, seed, streams }
    }

    pub fn width(&self) -> f64 {
        self.ci_high - self.ci_low
    }
}

/// `E_n(alpha, beta)`: `S_n` joined inside `B_n` to `{n} x [alpha, beta]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingSpec {
    pub n: i32,
    pub alpha: i32,
    pub beta: i32,
}

impl CrossingSpec {
    pub fn new(n: i32, alpha: i32, beta: i32) -> Result<Self> {
        if n < 1 || alpha < 0 || alpha > beta || beta > n {
            return Err(Error::InvalidParameter(alloc::format!(
                "crossing spec needs 0 <= alpha <= beta <= n, n >= 1; got n={n} alpha={alpha} beta={beta}"
            )));
        }
        Ok(CrossingSpec { n, alpha, beta })
    }

    pub fn target(&self) -> Region {
        Region::segment(self.n, self.alpha, self.beta)
    }
}

fn check_scale(n: i32, u: i32) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidParameter(alloc::format!("scale n={n} must be >= 1")));
    }
    if u < 0 || u > n / 3 {
        return Err(Error::InvalidParameter(alloc::format!("u={u} must lie in [0, floor(n/3)] for n={n}")));
    }
    Ok(())
}

/// Runs `step` on the configurations of streams `0..samples` at `p`; one
/// accumulator per stream chunk, in chunk order.
pub fn fold_configs<X, S, I, F>(
    exec: &X,
    geometry: &SlabGeometry,
    p: f64,
    seed: u64,
    samples: u64,
    init: I,
    step: F,
) -> Result<Vec<S>>
where
    X: Executor + ?Sized,
    S: Send,
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &Configuration) + Sync,
{
    check_probability(p)?;
    let edges = geometry.edge_count();
    Ok(map_stream_chunks(exec, samples, |r| {
        let mut state = init();
        let mut c = Configuration::all_closed(edges);
        for stream in r {
            sample_into(p, SeedSpec::new(seed, stream), &mut c);
            step(&mut state, &c);
        }
        state
    }))
}

/// Per-slot hit counters summed over chunks.
fn count_slots<X, F>(
    exec: &X,
    geometry: &SlabGeometry,
    p: f64,
    seed: u64,
    samples: u64,
    slots: usize,
    eval: F,
) -> Result<Vec<u64>>
where
    X: Executor + ?Sized,
    F: Fn(&Configuration, &mut Scratch, &mut Vec<bool>, &mut [u64]) + Sync,
{
    let parts = fold_configs(
        exec,
        geometry,
        p,
        seed,
        samples,
        || (Scratch::new(geometry), Vec::new(), alloc::vec![0u64; slots]),
        |(scratch, buf, counts), c| eval(c, scratch, buf, counts),
    )?;
    let mut total = alloc::vec![0u64; slots];
    for (_, _, counts) in parts {
        for (t, c) in total.iter_mut().zip(counts) {
            *t += c;
        }
    }
    Ok(total)
}

fn estimates(counts: &[u64], samples: u64, seed: u64) -> Vec<Estimate> {
    counts.iter().map(|&h| Estimate::from_counts(h, samples, seed, 0..samples)).collect()
}

/// Estimate of an arbitrary event evaluated with per-worker scratch state.
pub fn estimate_event<X, F>(
    exec: &X,
    geometry: &SlabGeometry,
    event: F,
    p: f64,
    samples: u64,
    seed: u64,
) -> Result<Estimate>
where
    X: Executor + ?Sized,
    F: Fn(&Configuration, &mut Scratch) -> bool + Sync,
{
    let counts = count_slots(exec, geometry, p, seed, samples, 1, |c, s, _, out| {
        out[0] += event(c, s) as u64;
    })?;
    Ok(Estimate::from_counts(counts[0], samples, seed, 0..samples))
}

pub fn crossing_geometry(k: u32, n: i32) -> Result<SlabGeometry> {
    SlabGeometry::new(k, PlanarBox::centered(n))
}

pub fn estimate_crossing<X: Executor + ?Sized>(
    exec: &X,
    k: u32,
    spec: CrossingSpec,
    u: i32,
    p: f64,
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    let spec = CrossingSpec::new(spec.n, spec.alpha, spec.beta)?;
    check_scale(spec.n, u)?;
    let g = crossing_geometry(k, spec.n)?;
    let q = Connection::new(&g, &Region::square(u), &spec.target(), &Region::square(spec.n))?;
    estimate_event(exec, &g, |c, s| q.connected(c, s), p, samples, seed)
}

/// `B_u ↔!_{B_n}! ∂B_n` together with the plain connection on the same samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessCrossing {
    pub unique: Estimate,
    pub connected: Estimate,
}

pub fn uniqueness_crossing_pair<X: Executor + ?Sized>(
    exec: &X,
    k: u32,
    n: i32,
    u: i32,
    p: f64,
    samples: u64,
    seed: u64,
) -> Result<UniquenessCrossing> {
    check_scale(n, u)?;
    let g = crossing_geometry(k, n)?;
    let q = Connection::new(&g, &Region::square(u), &Region::square_boundary(n), &Region::square(n))?;
    let counts = count_slots(exec, &g, p, seed, samples, 2, |c, s, _, out| {
        let m = q.count(c, s, 2);
        out[0] += (m == 1) as u64;
        out[1] += (m >= 1) as u64;
    })?;
    let e = estimates(&counts, samples, seed);
    Ok(UniquenessCrossing { unique: e[0].clone(), connected: e[1].clone() })
}

pub fn estimate_uniqueness_crossing<X: Executor + ?Sized>(
    exec: &X,
    k: u32,
    n: i32,
    u: i32,
    p: f64,
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    Ok(uniqueness_crossing_pair(exec, k, n, u, p, samples, seed)?.unique)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectU {
    pub u: i32,
    pub flagged: bool,
    /// Uniqueness-crossing estimates for `u = 0, ..., floor(n/3)`.
    pub estimates: Vec<Estimate>,
}

/// The smallest `u` whose estimate reaches `target`, else the best `u`, flagged.
pub fn u_from_estimates(estimates: &[f64], target: f64) -> (usize, bool) {
    if let Some(u) = estimates.iter().position(|&e| e >= target) {
        return (u, false);
    }
    let mut best = 0;
    for (i, &e) in estimates.iter().enumerate() {
        if e > estimates[best] {
            best = i;
        }
    }
    (best, true)
}

pub fn select_u<X: Executor + ?Sized>(
    exec: &X,
    k: u32,
    n: i32,
    p: f64,
    target: f64,
    samples: u64,
    seed: u64,
) -> Result<SelectU> {
    check_scale(n, 0)?;
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("target {target} must lie in (0, 1)")));
    }
    let g = crossing_geometry(k, n)?;
    let region = LiftedRegion::new(&g, &Region::square(n));
    let boundary = g.lifted_ids(&Region::square_boundary(n));
    let sources: Vec<Vec<u32>> = (0..=n / 3).map(|u| g.lifted_ids(&Region::square(u))).collect();
    let counts = count_slots(exec, &g, p, seed, samples, sources.len(), |c, s, _, out| {
        s.label(&region, c);
        for (slot, src) in out.iter_mut().zip(&sources) {
            *slot += (s.meeting_count(src, &boundary, 2) == 1) as u64;
        }
    })?;
    let est = estimates(&counts, samples, seed);
    let values: Vec<f64> = est.iter().map(|e| e.p_hat).collect();
    let (u, flagged) = u_from_estimates(&values, target);
    Ok(SelectU { u: u as i32, flagged, estimates: est })
}

/// Reach profile of `S_n = B_u` against the columns `(n, y)`, `y = 0..=n`.
fn right_profile(g: &SlabGeometry, n: i32, u: i32) -> Result<ReachProfile> {
    let targets: Vec<Region> = (0..=n).map(|y| Region::point(Point::new(n, y))).collect();
    ReachProfile::new(g, &Region::square(u), &targets, &Region::square(n))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectAlpha {
    pub alpha: i32,
    pub flagged: bool,
    /// `left[i]` estimates `E_n(0, alpha - 1)` and `right[i]` estimates
    /// `E_n(alpha, n)`, both at `alpha = i + 1`.
    pub left: Vec<Estimate>,
    pub right: Vec<Estimate>,
}

/// `max { alpha <= n - 1 : left(alpha) < right(alpha) }` where index `i`
/// holds `alpha = i + 1`; an empty set gives `(1, true)`.
pub fn alpha_from_table(left: &[f64], right: &[f64]) -> (i32, bool) {
    let found = left.iter().zip(right).rposition(|(l, r)| l < r);
    match found {
        Some(i) => (i as i32 + 1, false),
        None => (1, true),
    }
}

pub fn select_alpha<X: Executor + ?Sized>(
    exec: &X,
    k: u32,
    n: i32,
    u: i32,
    p: f64,
    samples: u64,
    seed: u64,
) -> Result<SelectAlpha> {
    if n < 2 {
        return Err(Error::InvalidParameter(alloc::format!("select_alpha needs n >= 2, got {n}")));
    }
    check_scale(n, u)?;
    let g = crossing_geometry(k, n)?;
    let prof = right_profile(&g, n, u)?;
    let m = (n - 1) as usize;
    // slots [0, m): left at alpha = i + 1, [m, 2m): right
    let counts = count_slots(exec, &g, p, seed, samples, 2 * m, |c, s, buf, out| {
        prof.eval(c, s, buf);
        let lo = buf.iter().position(|&b| b);
        let hi = buf.iter().rposition(|&b| b);
        if let (Some(lo), Some(hi)) = (lo, hi) {
            for a in 1..=m {
                out[a - 1] += (lo < a) as u64;
                out[m + a - 1] += (hi >= a) as u64;
            }
        }
    })?;
    let est = estimates(&counts, samples, seed);
    let (left, right) = (est[..m].to_vec(), est[m..].to_vec());
    let lv: Vec<f64> = left.iter().map(|e| e.p_hat).collect();
    let rv: Vec<f64> = right.iter().map(|e| e.p_hat).collect();
    let (alpha, flagged) = alpha_from_table(&lv, &rv);
    Ok(SelectAlpha { alpha, flagged, left, right })
}

/// `1 - (1 - p_union)^(1/m)`.
pub fn sqrt_trick_bound(p_union: f64, m: u32) -> f64 {
    let q = (1.0 - p_union.clamp(0.0, 1.0)).max(0.0);
    if q == 0.0 {
        return 1.0;
    }
    1.0 - libm::pow(q, 1.0 / m.max(1) as f64)
}

/// The square-root trick comparison on shared samples: holds when
/// `max >= bound(union) - (width(max) + width(union))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqrtCheck {
    pub m: u32,
    pub max_hat: f64,
    pub union_hat: f64,
    pub bound: f64,
    pub slack: f64,
    pub holds: bool,
}

pub fn sqrt_trick_check(max: &Estimate, union: &Estimate, m: u32) -> SqrtCheck {
    let bound = sqrt_trick_bound(union.p_hat, m);
    let slack = max.width() + union.width();
    SqrtCheck { m, max_hat: max.p_hat, union_hat: union.p_hat, bound, slack, holds: max.p_hat >= bound - slack }
}

fn argmax(est: &[Estimate]) -> usize {
    let mut best = 0;
    for (i, e) in est.iter().enumerate() {
        if e.hits > est[best].hits {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectY {
    pub y: i32,
    pub candidates: [i32; 2],
    /// Estimates of `E_n(y - floor(alpha/4), y + floor(alpha/4))` per candidate.
    pub estimates: Vec<Estimate>,
    /// Union of the two candidate events.
    pub union: Estimate,
    /// `E_n(0, alpha)`.
    pub full: Estimate,
    pub check: SqrtCheck,
    /// The comparison against `E_n(0, alpha)` instead of the candidates' union.
    pub check_full: SqrtCheck,
}

/// The candidate with the larger estimate; ties go to the smaller `y`.
pub fn y_from_estimates(candidates: [i32; 2], estimates: [f64; 2]) -> i32 {
    let (a, b) = if candidates[0] <= candidates[1] { (0, 1) } else { (1, 0) };
    if estimates[b] > estimates[a] {
        candidates[b]
    } else {
        candidates[a]
    }
}

#[allow(clippy::too_many_arguments)]
pub fn select_y<X: Executor + ?Sized>(
    exec: &X,
    k: u32,
    n: i32,
    u: i32,
    alpha: i32,
    p: f64,
    samples: u64,
    seed: u64,
) -> Result<SelectY> {
    check_scale(n, u)?;
    if alpha < 0 || alpha > n {
        return Err(Error::InvalidParameter(alloc::format!("alpha={alpha} outside [0, n]")));
    }
    let h = alpha / 4;
    let candidates = [alpha / 4, 3 * alpha / 4];
    let g = crossing_geometry(k, n)?;
    let prof = right_profile(&g, n, u)?;
    let any = |buf: &[bool], a: i32, b: i32| (a..=b).any(|y| buf[y as usize]);
    // slots: candidate 0, candidate 1, union, full
    let counts = count_slots(exec, &g, p, seed, samples, 4, |c, s, buf, out| {
        prof.eval(c, s, buf);
        let e0 = any(buf, candidates[0] - h, candidates[0] + h);
        let e1 = any(buf, candidates[1] - h, candidates[1] + h);
        out[0] += e0 as u64;
        out[1] += e1 as u64;
        out[2] += (e0 || e1) as u64;
        out[3] += any(buf, 0, alpha) as u64;
    })?;
    let est = estimates(&counts, samples, seed);
    let y = y_from_estimates(candidates, [est[0].p_hat, est[1].p_hat]);
    let best = &est[argmax(&est[..2])];
    let check = sqrt_trick_check(best, &est[2], 2);
    let check_full = sqrt_trick_check(best, &est[3], 2);
    Ok(SelectY {
        y,
        candidates,
        estimates: est[..2].to_vec(),
        union: est[2].clone(),
        full: est[3].clone(),
        check,
        check_full,
    })
}

/// The eight half-sides of `∂B_n`, images of `{n} x [0, n]` under the box symmetries.
pub fn boundary_halves(n: i32) -> Vec<(&'static str, Region)> {
    alloc::vec![
        ("east_upper", Region::segment(n, 0, n)),
        ("east_lower", Region::segment(n, -n, 0)),
        ("west_upper", Region::segment(-n, 0, n)),
        ("west_lower", Region::segment(-n, -n, 0)),
        ("north_right", Region::hsegment(n, 0, n)),
        ("north_left", Region::hsegment(n, -n, 0)),
        ("south_right", Region::hsegment(-n, 0, n)),
        ("south_left", Region::hsegment(-n, -n, 0)),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmSuite {
    pub names: Vec<String>,
    pub events: Vec<Estimate>,
    pub union: Estimate,
    pub check: SqrtCheck,
}

pub fn boundary_arm_suite<X: Executor + ?Sized>(
    exec: &X,
    k: u32,
    n: i32,
    u: i32,
    p: f64,
    samples: u64,
    seed: u64,
) -> Result<ArmSuite> {
    check_scale(n, u)?;
    let g = crossing_geometry(k, n)?;
    let halves = boundary_halves(n);
    let targets: Vec<Region> = halves.iter().map(|(_, r)| r.clone()).collect();
    let prof = ReachProfile::new(&g, &Region::square(u), &targets, &Region::square(n))?;
    let counts = count_slots(exec, &g, p, seed, samples, 9, |c, s, buf, out| {
        prof.eval(c, s, buf);
        for (o, &b) in out.iter_mut().zip(buf.iter()) {
            *o += b as u64;
        }
        out[8] += buf.iter().any(|&b| b) as u64;
    })?;
    let est = estimates(&counts, samples, seed);
    let events = est[..8].to_vec();
    let check = sqrt_trick_check(&events[argmax(&events)], &est[8], 8);
    Ok(ArmSuite {
        names: halves.iter().map(|(n, _)| String::from(*n)).collect(),
        events,
        union: est[8].clone(),
        check,
    })
}

/// Scale data feeding the triple event at scale `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleInputs {
    pub n: i32,
    pub u_n: i32,
    pub alpha_n: i32,
    pub u_3n: i32,
    pub alpha_3n: i32,
    pub y_3n: i32,
}

impl TripleInputs {
    pub fn family(&self) -> BoxFamily {
        BoxFamily { n: self.n, u_n: self.u_n, u_3n: self.u_3n, alpha_n: self.alpha_n, y: self.y_3n }
    }

    /// `alpha_3n <= 4 alpha_n`.
    pub fn feasible(&self) -> bool {
        self.alpha_3n <= 4 * self.alpha_n
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub inputs: TripleInputs,
    pub feasible: bool,
    pub joint: Estimate,
    /// `S_3n ↔ Z_n` in `B_3n`.
    pub to_z: Estimate,
    /// `S'_n ↔ Y_n^-` in `B'_n`.
    pub to_y_minus: Estimate,
    /// `S'_n ↔ Y_n^+` in `B'_n`.
    pub to_y_plus: Estimate,
    /// The translate of `E_n(0, alpha_n)` to `B'_n`.
    pub lower_arm: Estimate,
    /// Product of the three marginal estimates.
    pub harris_product: f64,
    /// `P[S_3n ↔ Z_n] P[E_n(0, alpha_n)]^2`.
    pub symmetric_product: f64,
    pub harris_holds: bool,
    pub inclusion_holds: bool,
}

pub fn estimate_triple<X: Executor + ?Sized>(
    exec: &X,
    k: u32,
    inputs: TripleInputs,
    p: f64,
    samples: u64,
    seed: u64,
) -> Result<Triple> {
    let f = inputs.family();
    check_scale(inputs.n, inputs.u_n)?;
    check_scale(3 * inputs.n, inputs.u_3n)?;
    if inputs.alpha_n < 0 || inputs.alpha_n > inputs.n {
        return Err(Error::InvalidParameter(alloc::format!("alpha_n={} outside [0, n]", inputs.alpha_n)));
    }
    let g = SlabGeometry::new(k, f.window())?;
    let a = Connection::new(&g, &f.s3(), &f.z(), &f.b3())?;
    let lower = Region::segment(3 * f.n, f.y, f.y + f.alpha_n);
    let arms = ReachProfile::new(&g, &f.s_prime(), &[f.y_minus(), f.y_plus(), lower], &f.b_prime())?;
    // slots: joint, a, minus, plus, lower arm
    let counts = count_slots(exec, &g, p, seed, samples, 5, |c, s, buf, out| {
        let ea = a.connected(c, s);
        arms.eval(c, s, buf);
        out[0] += (ea && buf[0] && buf[1]) as u64;
        out[1] += ea as u64;
        out[2] += buf[0] as u64;
        out[3] += buf[1] as u64;
        out[4] += buf[2] as u64;
    })?;
    let e = estimates(&counts, samples, seed);
    let harris_product = e[1].p_hat * e[2].p_hat * e[3].p_hat;
    let symmetric_product = e[1].p_hat * e[4].p_hat * e[4].p_hat;
    Ok(Triple {
        inputs,
        feasible: inputs.feasible(),
        harris_holds: e[0].p_hat >= harris_product - e[0].width(),
        inclusion_holds: counts[0] <= counts[1].min(counts[2]).min(counts[3]),
        joint: e[0].clone(),
        to_z: e[1].clone(),
        to_y_minus: e[2].clone(),
        to_y_plus: e[3].clone(),
        lower_arm: e[4].clone(),
        harris_product,
        symmetric_product,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceRow {
    pub n: i32,
    pub u: SelectU,
    pub alpha: SelectAlpha,
    pub y: SelectY,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceTable {
    pub k: u32,
    pub p: f64,
    pub target: f64,
    pub rows: Vec<SequenceRow>,
}

impl SequenceTable {
    pub fn row(&self, n: i32) -> Option<&SequenceRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    /// Inputs for the triple event at `n`, if both `n` and `3n` are tabulated.
    pub fn triple_inputs(&self, n: i32) -> Option<TripleInputs> {
        let a = self.row(n)?;
        let b = self.row(3 * n)?;
        Some(TripleInputs {
            n,
            u_n: a.u.u,
            alpha_n: a.alpha.alpha,
            u_3n: b.u.u,
            alpha_3n: b.alpha.alpha,
            y_3n: b.y.y,
        })
    }
}

/// `u_n`, `alpha_n`, `y_n` per scale; each scale uses its own shared sample set.
pub fn build_sequences<X: Executor + ?Sized>(
    exec: &X,
    k: u32,
    scales: &[i32],
    p: f64,
    target: f64,
    samples: u64,
    seed: u64,
) -> Result<SequenceTable> {
    let mut rows = Vec::new();
    for &n in scales {
        let u = select_u(exec, k, n, p, target, samples, seed)?;
        let alpha = select_alpha(exec, k, n, u.u, p, samples, seed)?;
        let y = select_y(exec, k, n, u.u, alpha.alpha, p, samples, seed)?;
        rows.push(SequenceRow { n, u, alpha, y });
    }
    Ok(SequenceTable { k, p, target, rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: i32,
    pub alpha_n: i32,
    pub alpha_3n: i32,
    pub feasible: bool,
}

/// Every tabulated `n` with `3n` also tabulated, and whether `alpha_3n <= 4 alpha_n`.
pub fn alpha_growth_scan(table: &SequenceTable) -> Vec<ScanRow> {
    table
        .rows
        .iter()
        .filter_map(|r| {
            let t = table.row(3 * r.n)?;
            Some(ScanRow {
                n: r.n,
                alpha_n: r.alpha.alpha,
                alpha_3n: t.alpha.alpha,
                feasible: t.alpha.alpha <= 4 * r.alpha.alpha,
            })
        })
        .collect()
}

/// Evenly spaced grid `lo, lo + step, ...` up to `hi` (inclusive, with rounding slack).
pub fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || hi < lo || lo < 0.0 || hi > 1.0 {
        return Err(Error::InvalidParameter(alloc::format!("bad grid {lo}:{hi}:{step}")));
    }
    let count = libm::floor((hi - lo) / step + 1e-9) as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

/// The rectangle `[0, 2L] x [0, L]` used for `p_c` sweeps.
pub fn pc_geometry(k: u32, l: i32) -> Result<SlabGeometry> {
    SlabGeometry::new(k, PlanarBox::new(0, 2 * l, 0, l))
}

/// Bottleneck threshold of the left-right crossing: the largest uniform on
/// the best path, so the rectangle is crossed at `p` iff the result is `< p`.
pub struct CrossingThreshold {
    order: Vec<u32>,
    uniforms: Vec<f64>,
    uf: UnionFind,
    left: Vec<u32>,
    right: Vec<u32>,
    endpoints: Vec<(u32, u32)>,
    vertices: u32,
}

impl CrossingThreshold {
    pub fn new(g: &SlabGeometry) -> Self {
        let w = g.window();
        let left = g.lifted_ids(&Region::segment(w.xmin, w.ymin, w.ymax));
        let right = g.lifted_ids(&Region::segment(w.xmax, w.ymin, w.ymax));
        CrossingThreshold {
            order: (0..g.edge_count() as u32).collect(),
            uniforms: alloc::vec![0.0; g.edge_count()],
            uf: UnionFind::new(g.vertex_count() + 2),
            left,
            right,
            endpoints: (0..g.edge_count() as u32).map(|e| g.edge_endpoint_ids(e)).collect(),
            vertices: g.vertex_count() as u32,
        }
    }

    pub fn threshold(&mut self, spec: SeedSpec) -> f64 {
        fill_uniforms(spec, &mut self.uniforms);
        self.threshold_of_field()
    }

    fn threshold_of_field(&mut self) -> f64 {
        let (sl, sr) = (self.vertices, self.vertices + 1);
        for v in 0..self.vertices + 2 {
            self.uf.reset(v);
        }
        for &v in &self.left {
            self.uf.union(v, sl);
        }
        for &v in &self.right {
            self.uf.union(v, sr);
        }
        let u = &self.uniforms;
        self.order.sort_unstable_by(|&a, &b| u[a as usize].total_cmp(&u[b as usize]).then(a.cmp(&b)));
        for &e in &self.order {
            let (a, b) = self.endpoints[e as usize];
            if self.uf.union(a, b) && self.uf.find(sl) == self.uf.find(sr) {
                return self.uniforms[e as usize];
            }
        }
        f64::INFINITY
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcCurve {
    pub l: i32,
    pub streams: Range<u64>,
    /// Crossing hits per grid point.
    pub hits: Vec<u64>,
    pub p_hat: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcPair {
    pub l1: i32,
    pub l2: i32,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub flagged: bool,
    /// Bootstrap resamples without a sign change.
    pub bootstrap_failures: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcEstimate {
    pub k: u32,
    pub grid: Vec<f64>,
    pub n_samples: u64,
    pub seed: u64,
    pub curves: Vec<PcCurve>,
    pub pairs: Vec<PcPair>,
    /// From the largest pair of successive scales.
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub flagged: bool,
}

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// First sign change of `b - a` from negative to non-negative, linearly interpolated.
pub fn curve_intersection(grid: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    for i in 0..d.len().saturating_sub(1) {
        if d[i] < 0.0 && d[i + 1] >= 0.0 {
            let t = -d[i] / (d[i + 1] - d[i]);
            return Some(grid[i] + t * (grid[i + 1] - grid[i]));
        }
    }
    None
}

/// Cumulative hits per grid point; `bins[j]` counts samples first crossed at index `j`.
fn hits_from_bins(bins: &[u64]) -> Vec<u64> {
    let mut acc = 0;
    bins[..bins.len() - 1]
        .iter()
        .map(|&b| {
            acc += b;
            acc
        })
        .collect()
}

fn curve_from_bins(bins: &[u64], samples: u64) -> Vec<f64> {
    hits_from_bins(bins).into_iter().map(|h| h as f64 / samples as f64).collect()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let i = libm::floor(q * (sorted.len() - 1) as f64 + 0.5) as usize;
    sorted[i.min(sorted.len() - 1)]
}

pub fn estimate_pc<X: Executor + ?Sized>(
    exec: &X,
    k: u32,
    scales: &[i32],
    grid: &[f64],
    samples: u64,
    seed: u64,
) -> Result<PcEstimate> {
    if scales.len() < 2 {
        return Err(Error::InvalidParameter("estimate_pc needs at least two scales".into()));
    }
    if grid.len() < 2 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("grid must be increasing with >= 2 points".into()));
    }
    for &p in grid {
        check_probability(p)?;
    }
    let gp = grid.len();
    let mut curves = Vec::new();
    let mut sample_bins: Vec<Vec<u16>> = Vec::new();
    for (j, &l) in scales.iter().enumerate() {
        if l < 1 {
            return Err(Error::InvalidParameter(alloc::format!("scale {l} must be >= 1")));
        }
        let g = pc_geometry(k, l)?;
        let offset = j as u64 * samples;
        let parts = map_stream_chunks(exec, samples, |r| {
            let mut ct = CrossingThreshold::new(&g);
            r.map(|s| {
                let tau = ct.threshold(SeedSpec::new(seed, offset + s));
                // number of grid points p <= tau: crossing holds from that index on
                grid.partition_point(|&p| p <= tau) as u16
            })
            .collect::<Vec<u16>>()
        });
        let bins_per_sample: Vec<u16> = parts.into_iter().flatten().collect();
        let mut bins = alloc::vec![0u64; gp + 1];
        for &b in &bins_per_sample {
            bins[b as usize] += 1;
        }
        let p_hat = curve_from_bins(&bins, samples);
        let hits = hits_from_bins(&bins);
        curves.push(PcCurve { l, streams: offset..offset + samples, hits, p_hat });
        sample_bins.push(bins_per_sample);
    }
    let mut pairs = Vec::new();
    for j in 0..scales.len() - 1 {
        let est = curve_intersection(grid, &curves[j].p_hat, &curves[j + 1].p_hat);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX - j as u64);
        let mut boots = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
        let mut failures = 0;
        let mut bins = [alloc::vec![0u64; gp + 1], alloc::vec![0u64; gp + 1]];
        for _ in 0..BOOTSTRAP_RESAMPLES {
            for (side, b) in bins.iter_mut().enumerate() {
                b.iter_mut().for_each(|x| *x = 0);
                let src = &sample_bins[j + side];
                for _ in 0..samples {
                    let i = ((rng.next_u64() as u128 * samples as u128) >> 64) as usize;
                    b[src[i] as usize] += 1;
                }
            }
            let a = curve_from_bins(&bins[0], samples);
            let b = curve_from_bins(&bins[1], samples);
            match curve_intersection(grid, &a, &b) {
                Some(x) => boots.push(x),
                None => failures += 1,
            }
        }
        boots.sort_unstable_by(f64::total_cmp);
        pairs.push(PcPair {
            l1: scales[j],
            l2: scales[j + 1],
            estimate: est.unwrap_or(f64::NAN),
            ci_low: quantile(&boots, 0.025),
            ci_high: quantile(&boots, 0.975),
            flagged: est.is_none(),
            bootstrap_failures: failures,
        });
    }
    let last = pairs.last().expect("at least one pair").clone();
    Ok(PcEstimate {
        k,
        grid: grid.to_vec(),
        n_samples: samples,
        seed,
        curves,
        estimate: last.estimate,
        ci_low: last.ci_low,
        ci_high: last.ci_high,
        flagged: pairs.iter().any(|p| p.flagged),
        pairs,
    })
}
