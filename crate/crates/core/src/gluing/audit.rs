//! Exhaustive audits of the two surgeries on micro-instances.
//!
//! An instance pins a background configuration and frees at most
//! [`ENUMERATION_CAP`](crate::oracle::ENUMERATION_CAP) edges. Every
//! configuration is visited; each claim about the surgeries is tallied with a
//! few witness configurations, and the counting inequality of the gluing
//! lemma is checked in exact arithmetic on the image sets.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::connectivity::{Connection, Scratch};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::lattice::{PlanarBox, Point, Region, SlabGeometry, Vertex};
use crate::oracle::{ratio_string, ConfigSpace, Histogram, RationalP, INDEX_CHUNK};
use crate::sampler::Configuration;

use super::columns::{brute_u, compute_u};
use super::order::{brute_min_path, to_path, MinPathSearch, Path};
use super::phi::surgery_phi;
use super::psi::{center_vertex, marked_points, surgery_psi, surgery_support};

/// A finite stand-in for the gluing geometry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlueInstance {
    pub name: String,
    pub k: u32,
    pub window: PlanarBox,
    /// Start region `S` of the crossing path.
    pub source: Region,
    /// End region `Z` of the crossing path.
    pub target: Region,
    /// The box in which the crossing path lives.
    pub outer: Region,
    pub b_prime: Region,
    pub s_prime: Region,
    pub y_minus: Region,
    pub y_plus: Region,
    /// Radius of the rewiring surgery; `None` skips it.
    pub radius: Option<u32>,
    pub pinned_open: Vec<[Vertex; 2]>,
    pub free: Vec<[Vertex; 2]>,
}

fn pt(x: i32, y: i32) -> Region {
    Region::point(Point::new(x, y))
}

fn e(a: (i32, i32, u32), b: (i32, i32, u32)) -> [Vertex; 2] {
    [Vertex::new(a.0, a.1, a.2), Vertex::new(b.0, b.1, b.2)]
}

impl GlueInstance {
    /// Three-by-three window. The layer-1 edges at the source column and the
    /// vertical edge under `S'` are closed; the other 24 edges are free.
    pub fn micro(k: u32) -> Self {
        let window = PlanarBox::new(0, 2, -1, 1);
        let mut free = Vec::new();
        for l in 0..=1 {
            for x in 0..2 {
                for y in -1..=1 {
                    if !(l == 1 && x == 0) {
                        free.push(e((x, y, l), (x + 1, y, l)));
                    }
                }
            }
            for x in 0..=2 {
                for y in -1..1 {
                    if !(l == 1 && x == 0) {
                        free.push(e((x, y, l), (x, y + 1, l)));
                    }
                }
            }
        }
        for x in 1..=2 {
            for y in -1..=1 {
                if (x, y) != (1, 0) {
                    free.push(e((x, y, 0), (x, y, 1)));
                }
            }
        }
        GlueInstance {
            name: "micro".into(),
            k,
            window,
            source: pt(0, 0),
            target: pt(2, 0),
            outer: Region::rect(window),
            b_prime: Region::rect(PlanarBox::new(1, 2, -1, 1)),
            s_prime: pt(1, 0),
            y_minus: pt(2, -1),
            y_plus: pt(2, 1),
            radius: None,
            pinned_open: Vec::new(),
            free,
        }
    }

    /// The micro window with layer 0 free and, in layer 1, only the four
    /// edges around the `S'` column that let the arms pass over the path.
    pub fn tiny(k: u32) -> Self {
        let mut m = GlueInstance::micro(k);
        m.name = "tiny".into();
        let arm_cells = [(1, -1), (1, 0), (1, 1), (2, -1), (2, 1)];
        let on_arm = |v: &Vertex| v.layer == 1 && arm_cells.contains(&(v.x, v.y));
        m.free.retain(|[a, b]| (a.layer == 0 && b.layer == 0) || (on_arm(a) && on_arm(b)));
        m
    }

    /// A window that fits the rewiring ball of radius `r` around each of the
    /// three marked sites `(-1, 0), (0, 0), (1, 0)`. The crossing path runs
    /// along row 0 in layer 0, and the `S'` arm descends column 0 in layer 1.
    pub fn ball(k: u32, r: u32) -> Self {
        let (a, h) = (r as i32 + 2, r as i32 + 1);
        let window = PlanarBox::new(-a, a, -h, h);
        let mut pinned_open = Vec::new();
        for x in -a..a {
            if x != 0 {
                pinned_open.push(e((x, 0, 0), (x + 1, 0, 0)));
            }
        }
        pinned_open.push(e((0, h, 1), (1, h, 1)));
        let mut free = Vec::new();
        for x in -2..=2 {
            free.push(e((x, 0, 0), (x, 0, 1)));
        }
        for x in -2..2 {
            free.push(e((x, 0, 1), (x + 1, 0, 1)));
        }
        for y in -h..h {
            free.push(e((0, y, 1), (0, y + 1, 1)));
        }
        free.push(e((0, 0, 0), (1, 0, 0)));
        free.push(e((0, 0, 0), (0, -1, 0)));
        free.push(e((0, -1, 0), (1, -1, 0)));
        free.push(e((1, -1, 0), (1, 0, 0)));
        free.push(e((0, 1, 1), (1, 1, 1)));
        free.push(e((1, 1, 1), (1, 2, 1)));
        GlueInstance {
            name: "ball".into(),
            k,
            window,
            source: pt(-a, 0),
            target: pt(a, 0),
            outer: Region::rect(window),
            b_prime: Region::rect(PlanarBox::new(-1, 1, -h, h)),
            s_prime: pt(0, h),
            y_minus: pt(0, -h),
            y_plus: pt(1, h),
            radius: Some(r),
            pinned_open,
            free,
        }
    }

    /// The ball window with the layer-1 detours removed.
    pub fn tiny_ball(k: u32, r: u32) -> Self {
        let mut b = GlueInstance::ball(k, r);
        b.name = "tiny-ball".into();
        b.free.retain(|[p, q]| {
            let vertical = p.column() == q.column();
            let row1 = p.layer == 1 && q.layer == 1 && p.y == 0 && q.y == 0;
            let branch = p.layer == 1 && q.layer == 1 && p.x + q.x >= 1;
            !(row1 || branch || (vertical && p.x.abs() == 2))
        });
        b
    }

    pub fn geometry(&self) -> Result<SlabGeometry> {
        SlabGeometry::new(self.k, self.window)
    }

    /// Connections of the `S'` cluster are read inside `outer ∪ B'`.
    pub fn domain(&self) -> Region {
        self.outer.union(&self.b_prime)
    }

    pub fn space(&self, g: &SlabGeometry) -> Result<ConfigSpace> {
        let id = |[a, b]: &[Vertex; 2]| {
            g.edge_between_vertices(*a, *b)
                .ok_or_else(|| Error::InvalidParameter(alloc::format!("no edge {a:?} - {b:?}")))
        };
        let mut base = Configuration::all_closed(g.edge_count());
        for pair in &self.pinned_open {
            base.set(id(pair)?, true);
        }
        let mut free = Vec::new();
        for pair in &self.free {
            let f = id(pair)?;
            base.set(f, false);
            free.push(f);
        }
        ConfigSpace::new(base, free)
    }
}

/// Witnesses kept per check.
pub const MAX_WITNESSES: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub config: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub check: String,
    pub checked: u64,
    pub failed: u64,
    pub witnesses: Vec<Witness>,
}

impl Tally {
    fn new(check: &str) -> Self {
        Tally { check: check.into(), checked: 0, failed: 0, witnesses: Vec::new() }
    }

    fn record(&mut self, ok: bool, c: &Configuration, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(Witness { config: c.to_hex(), detail: detail() });
            }
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.checked += other.checked;
        self.failed += other.failed;
        for w in &other.witnesses {
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w.clone());
            }
        }
    }
}

pub const CHECKS: [&str; 12] = [
    "min_path_oracle",
    "u_oracle",
    "phi_destroys_two_arm",
    "phi_keeps_path",
    "phi_keeps_marks",
    "phi_budget",
    "psi_preconditions",
    "psi_target",
    "psi_locality",
    "psi_path",
    "psi_unique_mark",
    "psi_injective",
];

fn slot(name: &str) -> usize {
    CHECKS.iter().position(|c| *c == name).expect("known check")
}

#[derive(Clone, Debug, Default)]
struct ImageInfo {
    union: Vec<u64>,
    preimages: u64,
    structural: usize,
}

impl ImageInfo {
    fn absorb(&mut self, diff: &[u64], structural: usize) {
        if self.union.is_empty() {
            self.union = diff.to_vec();
        } else {
            for (a, b) in self.union.iter_mut().zip(diff) {
                *a |= b;
            }
        }
        self.preimages += 1;
        self.structural = self.structural.max(structural);
    }

    fn merge(&mut self, other: &ImageInfo) {
        if self.union.is_empty() {
            self.union = other.union.clone();
        } else {
            for (a, b) in self.union.iter_mut().zip(&other.union) {
                *a |= b;
            }
        }
        self.preimages += other.preimages;
        self.structural = self.structural.max(other.structural);
    }

    fn size(&self) -> usize {
        self.union.iter().map(|w| w.count_ones() as usize).sum()
    }
}

#[derive(Clone, Debug)]
struct MapTally {
    a: Histogram,
    images: BTreeMap<Vec<u64>, ImageInfo>,
    min_multiplicity: Option<u64>,
}

impl MapTally {
    fn new(edges: usize) -> Self {
        MapTally { a: Histogram::new(edges), images: BTreeMap::new(), min_multiplicity: None }
    }

    fn merge(&mut self, other: MapTally) {
        self.a.merge(&other.a);
        for (k, v) in other.images {
            self.images.entry(k).or_default().merge(&v);
        }
        self.min_multiplicity = match (self.min_multiplicity, other.min_multiplicity) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

/// The result of one chunk; merging is associative and order-preserving.
#[derive(Clone, Debug)]
struct Partial {
    configurations: u64,
    in_x: u64,
    u_sizes: BTreeMap<usize, u64>,
    tallies: Vec<Tally>,
    phi: MapTally,
    psi: MapTally,
}

impl Partial {
    fn new(edges: usize) -> Self {
        Partial {
            configurations: 0,
            in_x: 0,
            u_sizes: BTreeMap::new(),
            tallies: CHECKS.iter().map(|c| Tally::new(c)).collect(),
            phi: MapTally::new(edges),
            psi: MapTally::new(edges),
        }
    }

    fn merge(&mut self, other: Partial) {
        self.configurations += other.configurations;
        self.in_x += other.in_x;
        for (k, v) in other.u_sizes {
            *self.u_sizes.entry(k).or_default() += v;
        }
        for (a, b) in self.tallies.iter_mut().zip(&other.tallies) {
            a.merge(b);
        }
        self.phi.merge(other.phi);
        self.psi.merge(other.psi);
    }
}

/// Exact check of `P[A] <= (2 / min(p, 1-p))^s / t * P[B]`, written as
/// `t * P[A] * m^s <= (2 d)^s * P[B]` for `p = a / d` and `m = min(a, d - a)`.
/// Degenerate `p` makes the right side infinite.
pub fn counting_bound_holds(p: RationalP, mass_a: &BigRational, mass_b: &BigRational, s: u32, t: u64) -> bool {
    let m = p.num.min(p.den - p.num);
    if m == 0 {
        return true;
    }
    let lhs = mass_a * BigRational::from_integer(BigInt::from(t) * num_traits::pow(BigInt::from(m), s as usize));
    let rhs = mass_b * BigRational::from_integer(num_traits::pow(BigInt::from(2 * p.den), s as usize));
    lhs <= rhs
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingBound {
    pub map: String,
    /// Preimages (configurations of `A`) and distinct images.
    pub preimages: u64,
    pub images: u64,
    /// Guaranteed number of images per configuration of `A`.
    pub t: u64,
    /// Largest set of edges on which the preimages of one image disagree.
    pub s_tight: u32,
    /// The locality budget the construction guarantees.
    pub s_structural: u32,
    /// Smallest `s` for which the inequality holds at this `t`.
    pub s_needed: Option<u32>,
    pub mass_a: String,
    pub mass_image: String,
    pub holds_tight: bool,
    pub holds_structural: bool,
}

fn counting_report(name: &str, p: RationalP, edges: usize, m: &MapTally, t: u64) -> CountingBound {
    let mass_a = m.a.mass(p);
    let mut hist = Histogram::new(edges);
    let mut s_tight = 0usize;
    let mut s_struct = 0usize;
    for (k, info) in &m.images {
        hist.add(k.iter().map(|w| w.count_ones() as usize).sum());
        s_tight = s_tight.max(info.size());
        s_struct = s_struct.max(info.structural);
    }
    let mass_b = hist.mass(p);
    let (s_tight, s_struct) = (s_tight as u32, s_struct as u32);
    let s_needed = (0..=s_struct.max(s_tight)).find(|&s| counting_bound_holds(p, &mass_a, &mass_b, s, t.max(1)));
    let empty = m.a.is_empty();
    CountingBound {
        map: name.into(),
        preimages: m.a.total(),
        images: m.images.len() as u64,
        t,
        s_tight,
        s_structural: s_struct,
        s_needed,
        mass_a: ratio_string(&mass_a),
        mass_image: ratio_string(&mass_b),
        holds_tight: empty || (t > 0 && counting_bound_holds(p, &mass_a, &mass_b, s_tight, t)),
        holds_structural: empty || (t > 0 && counting_bound_holds(p, &mass_a, &mass_b, s_struct, t)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub instance: GlueInstance,
    pub p: RationalP,
    pub edges: usize,
    pub free_edges: usize,
    pub configurations: u64,
    /// Configurations crossing `S -> Z` with both `S'` arms and no gluing.
    pub in_x: u64,
    /// Histogram of `|U|` over those configurations.
    pub u_sizes: BTreeMap<usize, u64>,
    pub checks: Vec<Tally>,
    pub counting: Vec<CountingBound>,
    pub violations: u64,
}

impl AuditReport {
    pub fn tally(&self, check: &str) -> Option<&Tally> {
        self.checks.iter().find(|t| t.check == check)
    }
}

struct Prepared<'a> {
    inst: &'a GlueInstance,
    g: &'a SlabGeometry,
    crossing: Connection,
    arm_minus: Connection,
    arm_plus: Connection,
    glued: Connection,
    search: MinPathSearch,
    domain: Region,
}

impl<'a> Prepared<'a> {
    fn new(inst: &'a GlueInstance, g: &'a SlabGeometry) -> Result<Self> {
        let domain = inst.domain();
        Ok(Prepared {
            inst,
            g,
            crossing: Connection::new(g, &inst.source, &inst.target, &inst.outer)?,
            arm_minus: Connection::new(g, &inst.s_prime, &inst.y_minus, &inst.b_prime)?,
            arm_plus: Connection::new(g, &inst.s_prime, &inst.y_plus, &inst.b_prime)?,
            glued: Connection::new(g, &inst.source, &inst.s_prime, &domain)?,
            search: MinPathSearch::new(g, &inst.source, &inst.target, &inst.outer),
            domain,
        })
    }

    fn two_arm(&self, c: &Configuration, sc: &mut Scratch) -> bool {
        self.arm_minus.connected(c, sc) && self.arm_plus.connected(c, sc)
    }

    fn gamma(&self, c: &Configuration, sc: &mut Scratch) -> Option<Path> {
        self.search.run(self.g, c, sc).map(|ids| to_path(self.g, &ids))
    }

    fn u(&self, c: &Configuration, gamma: &Path) -> Region {
        compute_u(self.g, c, gamma, &self.inst.b_prime, &self.inst.s_prime, &self.domain)
    }

    fn visit(&self, c: &Configuration, sc: &mut Scratch, out: &mut Partial) {
        let inst = self.inst;
        let g = self.g;
        out.configurations += 1;
        let gamma = self.gamma(c, sc);
        let brute = brute_min_path(g, c, &inst.source, &inst.target, &inst.outer);
        out.tallies[0].record(gamma == brute, c, || alloc::format!("search {gamma:?}, brute force {brute:?}"));
        let in_x = self.crossing.connected(c, sc) && self.two_arm(c, sc) && !self.glued.connected(c, sc);
        if !in_x {
            return;
        }
        out.in_x += 1;
        let gamma = gamma.expect("crossing implies a path");
        let u = self.u(c, &gamma);
        let ub = brute_u(g, c, &gamma, &inst.b_prime, &inst.s_prime, &self.domain);
        out.tallies[1].record(u == ub, c, || alloc::format!("U {:?} vs {:?}", u.cells(), ub.cells()));
        *out.u_sizes.entry(u.len()).or_default() += 1;

        // closing surgery
        let phi = surgery_phi(g, c, &u, &inst.s_prime, &self.domain);
        let img = &phi.config;
        let arms_after = self.two_arm(img, sc);
        out.tallies[slot("phi_destroys_two_arm")].record(!arms_after, c, || alloc::format!("U = {:?}", u.cells()));
        let g2 = self.gamma(img, sc);
        out.tallies[slot("phi_keeps_path")].record(g2.as_ref() == Some(&gamma), c, || alloc::format!("{g2:?}"));
        let u2 = self.u(img, &gamma);
        out.tallies[slot("phi_keeps_marks")].record(u2 == u, c, || alloc::format!("{:?} -> {:?}", u.cells(), u2.cells()));
        let support = g.incident_edges(&u);
        let within = phi.closed.iter().all(|e| support.binary_search(e).is_ok());
        out.tallies[slot("phi_budget")].record(within, c, || alloc::format!("closed {:?}", phi.closed));
        out.phi.a.add(c.open_count());
        let diff = xor_words(c, img);
        out.phi.images.entry(img.words().to_vec()).or_default().absorb(&diff, support.len());

        // rewiring surgery
        let Some(r) = inst.radius else { return };
        if u.is_empty() {
            return;
        }
        let mut images: Vec<Configuration> = Vec::new();
        for z in u.iter() {
            let res = surgery_psi(g, c, &gamma, z, &inst.s_prime, &self.domain, r);
            out.tallies[slot("psi_preconditions")].record(res.is_ok(), c, || match &res {
                Err(err) => alloc::format!("{err}"),
                Ok(_) => String::new(),
            });
            let Ok((img, rec)) = res else { continue };
            out.tallies[slot("psi_target")].record(self.glued.connected(&img, sc), c, || alloc::format!("z = {z:?}"));
            let support = surgery_support(g, z, r);
            let local = c.difference(&img).iter().all(|e| support.binary_search(e).is_ok());
            out.tallies[slot("psi_locality")].record(local, c, || alloc::format!("z = {z:?}"));
            let expect = rec.expected_path(&gamma);
            let got = self.gamma(&img, sc);
            out.tallies[slot("psi_path")].record(got.as_ref() == Some(&expect), c, || {
                alloc::format!("z = {z:?}: expected {expect:?}, got {got:?}")
            });
            if let Some(new_gamma) = &got {
                let marks = marked_points(g, &img, new_gamma, &inst.s_prime, &self.domain);
                out.tallies[slot("psi_unique_mark")].record(marks == [center_vertex(z)], c, || {
                    alloc::format!("z = {z:?}: marks {marks:?}")
                });
            }
            let diff = xor_words(c, &img);
            out.psi.images.entry(img.words().to_vec()).or_default().absorb(&diff, support.len());
            images.push(img);
        }
        let mut keys: Vec<&[u64]> = images.iter().map(|c| c.words()).collect();
        keys.sort_unstable();
        keys.dedup();
        out.tallies[slot("psi_injective")].record(keys.len() == images.len(), c, || {
            alloc::format!("{} images for {} sites", keys.len(), images.len())
        });
        out.psi.a.add(c.open_count());
        let m = keys.len() as u64;
        out.psi.min_multiplicity = Some(out.psi.min_multiplicity.map_or(m, |x| x.min(m)));
    }
}

fn xor_words(a: &Configuration, b: &Configuration) -> Vec<u64> {
    a.words().iter().zip(b.words()).map(|(x, y)| x ^ y).collect()
}

/// Visits every configuration of the instance at parameter `p`.
pub fn audit<X: Executor + ?Sized>(exec: &X, inst: &GlueInstance, p: RationalP) -> Result<AuditReport> {
    let g = inst.geometry()?;
    let space = inst.space(&g)?;
    let prep = Prepared::new(inst, &g)?;
    let edges = g.edge_count();
    let total = space.size();
    let jobs = total.div_ceil(INDEX_CHUNK) as usize;
    let parts = exec.map_collect(jobs, |j| {
        let lo = j as u64 * INDEX_CHUNK;
        let hi = (lo + INDEX_CHUNK).min(total);
        let mut part = Partial::new(edges);
        let mut sc = Scratch::new(&g);
        let mut c = space.base().clone();
        for i in lo..hi {
            space.write_config(i, &mut c);
            prep.visit(&c, &mut sc, &mut part);
        }
        part
    });
    let mut acc = Partial::new(edges);
    for part in parts {
        acc.merge(part);
    }
    let mut counting = alloc::vec![counting_report("phi", p, edges, &acc.phi, 1)];
    if inst.radius.is_some() {
        let t = acc.psi.min_multiplicity.unwrap_or(0);
        counting.push(counting_report("psi", p, edges, &acc.psi, t));
    }
    let violations = acc.tallies.iter().map(|t| t.failed).sum::<u64>()
        + counting.iter().filter(|l| !(l.holds_tight && l.holds_structural)).count() as u64;
    Ok(AuditReport {
        instance: inst.clone(),
        p,
        edges,
        free_edges: space.free_edges().len(),
        configurations: acc.configurations,
        in_x: acc.in_x,
        u_sizes: acc.u_sizes,
        checks: acc.tallies,
        counting,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;

    #[test]
    fn identity_map_satisfies_the_counting_bound() {
        // A ⊆ B with s = 0, t = 1
        let p = RationalP::new(1, 3).unwrap();
        let mut a = Histogram::new(4);
        a.add(1);
        let mut b = a.clone();
        b.add(3);
        assert!(counting_bound_holds(p, &a.mass(p), &b.mass(p), 0, 1));
        assert!(!counting_bound_holds(p, &b.mass(p), &a.mass(p), 0, 1));
        // doubling t needs room, which one free edge provides
        assert!(!counting_bound_holds(p, &b.mass(p), &b.mass(p), 0, 2));
        assert!(counting_bound_holds(p, &b.mass(p), &b.mass(p), 1, 2));
    }

    #[test]
    fn instance_sizes() {
        for inst in [GlueInstance::micro(1), GlueInstance::tiny(1), GlueInstance::ball(1, 2), GlueInstance::tiny_ball(1, 2)] {
            let g = inst.geometry().unwrap();
            let space = inst.space(&g).unwrap();
            std::println!("{} edges {} free {}", inst.name, g.edge_count(), space.free_edges().len());
        }
        let g = GlueInstance::micro(1).geometry().unwrap();
        assert_eq!(g.edge_count(), 33);
        assert_eq!(GlueInstance::micro(1).space(&g).unwrap().free_edges().len(), 24);
        let b = GlueInstance::ball(1, 2);
        assert_eq!(b.space(&b.geometry().unwrap()).unwrap().free_edges().len(), 21);
        assert_eq!(GlueInstance::tiny(1).space(&g).unwrap().free_edges().len(), 16);
    }

    #[test]
    fn tiny_audits_are_clean() {
        let p = RationalP::new(1, 2).unwrap();
        for inst in [GlueInstance::tiny(1), GlueInstance::tiny_ball(1, 2)] {
            let rep = audit(&Sequential, &inst, p).unwrap();
            for t in &rep.checks {
                assert_eq!(t.failed, 0, "{}: {:?}", t.check, t.witnesses);
            }
            assert!(rep.in_x > 0, "{}", inst.name);
            assert_eq!(rep.violations, 0, "{:?}", rep.counting);
        }
    }
}
