//! Exhaustive enumeration and exact event probabilities at rational `p`.
//!
//! A [`ConfigSpace`] fixes a background configuration and lets a subset of at
//! most [`ENUMERATION_CAP`] edges vary. Weights always run over every edge of
//! the geometry, so the probability of a set of enumerated configurations is
//! its true mass under the product measure.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::connectivity::{Connection, LiftedRegion, Scratch};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::lattice::{GeometryDescriptor, PlanarBox, Point, Region, SlabGeometry, Vertex};
use crate::sampler::Configuration;

pub const ENUMERATION_CAP: usize = 24;

/// Configuration indices per enumeration job.
pub const INDEX_CHUNK: u64 = 1 << 14;

/// A rational probability `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RationalP {
    pub num: u64,
    pub den: u64,
}

impl RationalP {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num > den {
            return Err(Error::InvalidParameter(format!("probability {num}/{den} outside [0, 1]")));
        }
        Ok(RationalP { num, den })
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn to_big(self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }
}

impl FromStr for RationalP {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("expected a/b, got {s:?}"));
        let (a, b) = match s.trim().split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s.trim(), "1"),
        };
        RationalP::new(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)
    }
}

impl TryFrom<String> for RationalP {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<RationalP> for String {
    fn from(p: RationalP) -> String {
        format!("{}/{}", p.num, p.den)
    }
}

impl fmt::Display for RationalP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactProbability {
    pub value: BigRational,
    pub edges: usize,
    pub event: String,
}

impl ExactProbability {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }

    /// `"num/den"` in lowest terms.
    pub fn ratio_string(&self) -> String {
        ratio_string(&self.value)
    }
}

pub fn ratio_string(v: &BigRational) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidParameter(format!("expected num/den, got {s:?}"));
    let (a, b) = s.split_once('/').ok_or_else(bad)?;
    let a: BigInt = a.trim().parse().map_err(|_| bad())?;
    let b: BigInt = b.trim().parse().map_err(|_| bad())?;
    if b.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(a, b))
}

/// Counts of configurations by their total number of open edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(edges: usize) -> Self {
        Histogram { counts: alloc::vec![0; edges + 1] }
    }

    #[inline]
    pub fn add(&mut self, open: usize) {
        self.counts[open] += 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// `Σ_j counts[j] p^j (1-p)^(E-j)`, exactly.
    pub fn mass(&self, p: RationalP) -> BigRational {
        let edges = self.counts.len() - 1;
        let a = BigInt::from(p.num);
        let c = BigInt::from(p.den - p.num);
        let mut apow = alloc::vec![BigInt::one(); edges + 1];
        let mut cpow = alloc::vec![BigInt::one(); edges + 1];
        for j in 1..=edges {
            apow[j] = &apow[j - 1] * &a;
            cpow[j] = &cpow[j - 1] * &c;
        }
        let mut num = BigInt::zero();
        for (j, &cnt) in self.counts.iter().enumerate() {
            if cnt != 0 {
                num += BigInt::from(cnt) * &apow[j] * &cpow[edges - j];
            }
        }
        let den = num_traits::pow(BigInt::from(p.den), edges);
        BigRational::new(num, den)
    }
}

/// Configurations agreeing with `base` off the `free` edges.
#[derive(Clone, Debug)]
pub struct ConfigSpace {
    base: Configuration,
    free: Vec<u32>,
}

impl ConfigSpace {
    /// Every configuration of the geometry.
    pub fn full(geometry: &SlabGeometry) -> Result<Self> {
        ConfigSpace::new(Configuration::all_closed(geometry.edge_count()), (0..geometry.edge_count() as u32).collect())
    }

    pub fn new(base: Configuration, mut free: Vec<u32>) -> Result<Self> {
        free.sort_unstable();
        free.dedup();
        if free.len() > ENUMERATION_CAP {
            return Err(Error::EnumerationCap { edges: free.len(), cap: ENUMERATION_CAP });
        }
        if free.iter().any(|&e| e as usize >= base.len()) {
            return Err(Error::EdgeCountMismatch { expected: base.len(), got: free.len() });
        }
        Ok(ConfigSpace { base, free })
    }

    pub fn edges(&self) -> usize {
        self.base.len()
    }

    pub fn free_edges(&self) -> &[u32] {
        &self.free
    }

    pub fn base(&self) -> &Configuration {
        &self.base
    }

    pub fn size(&self) -> u64 {
        1u64 << self.free.len()
    }

    /// Configuration number `index`; bit `i` of the index drives `free[i]`.
    pub fn config_at(&self, index: u64) -> Configuration {
        let mut c = self.base.clone();
        self.write_config(index, &mut c);
        c
    }

    pub fn write_config(&self, index: u64, out: &mut Configuration) {
        for (i, &e) in self.free.iter().enumerate() {
            out.set(e, (index >> i) & 1 == 1);
        }
    }

    pub fn contains(&self, c: &Configuration) -> bool {
        let mut probe = c.clone();
        for &e in &self.free {
            probe.set(e, false);
        }
        let mut base = self.base.clone();
        for &e in &self.free {
            base.set(e, false);
        }
        probe == base
    }

    pub fn iter(&self) -> impl Iterator<Item = Configuration> + '_ {
        (0..self.size()).map(move |i| self.config_at(i))
    }

    /// Index of `c` in the enumeration, if it belongs to the space.
    pub fn index_of(&self, c: &Configuration) -> Option<u64> {
        if !self.contains(c) {
            return None;
        }
        Some(self.free.iter().enumerate().fold(0u64, |acc, (i, &e)| acc | ((c.is_open(e) as u64) << i)))
    }

    /// Histogram of the configurations satisfying `event`, enumerated in
    /// index blocks across the executor.
    pub fn histogram<X, F>(&self, exec: &X, event: F) -> Histogram
    where
        X: Executor + ?Sized,
        F: Fn(&Configuration) -> bool + Sync,
    {
        self.histogram_with(exec, || (), |c, _| event(c))
    }

    /// As [`ConfigSpace::histogram`], with per-job scratch state from `init`.
    pub fn histogram_with<X, S, I, F>(&self, exec: &X, init: I, event: F) -> Histogram
    where
        X: Executor + ?Sized,
        I: Fn() -> S + Sync,
        F: Fn(&Configuration, &mut S) -> bool + Sync,
    {
        let total = self.size();
        let jobs = total.div_ceil(INDEX_CHUNK) as usize;
        let parts = exec.map_collect(jobs, |j| {
            let lo = j as u64 * INDEX_CHUNK;
            let hi = (lo + INDEX_CHUNK).min(total);
            let mut h = Histogram::new(self.edges());
            let mut c = self.base.clone();
            let mut state = init();
            for i in lo..hi {
                self.write_config(i, &mut c);
                if event(&c, &mut state) {
                    h.add(c.open_count());
                }
            }
            h
        });
        let mut h = Histogram::new(self.edges());
        for part in &parts {
            h.merge(part);
        }
        h
    }
}

/// All `2^E` configurations of the geometry.
pub fn enumerate_configs(geometry: &SlabGeometry) -> Result<impl Iterator<Item = Configuration>> {
    let space = ConfigSpace::full(geometry)?;
    Ok((0..space.size()).map(move |i| space.config_at(i)))
}

pub fn exact_probability<F>(geometry: &SlabGeometry, p: RationalP, event: F) -> Result<ExactProbability>
where
    F: Fn(&Configuration) -> bool + Sync,
{
    exact_probability_with(&crate::exec::Sequential, &ConfigSpace::full(geometry)?, p, "event", event)
}

pub fn exact_probability_with<X, F>(
    exec: &X,
    space: &ConfigSpace,
    p: RationalP,
    label: &str,
    event: F,
) -> Result<ExactProbability>
where
    X: Executor + ?Sized,
    F: Fn(&Configuration) -> bool + Sync,
{
    let h = space.histogram(exec, event);
    Ok(ExactProbability { value: h.mass(p), edges: space.edges(), event: label.into() })
}

/// Serializable description of the events used by micro-instance tables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Connected { x: Region, y: Region, b: Region },
    Unique { x: Region, y: Region, b: Region },
    /// All of lifted `b` is a single cluster of `b`.
    Spanning { b: Region },
    EdgeOpen { a: Vertex, b: Vertex },
    All(Vec<EventKind>),
}

/// An [`EventKind`] compiled against a geometry.
#[derive(Clone, Debug)]
pub enum CompiledEvent {
    Connected(Connection),
    Unique(Connection),
    Spanning(LiftedRegion),
    EdgeOpen(u32),
    All(Vec<CompiledEvent>),
}

impl EventKind {
    pub fn compile(&self, g: &SlabGeometry) -> Result<CompiledEvent> {
        Ok(match self {
            EventKind::Connected { x, y, b } => CompiledEvent::Connected(Connection::new(g, x, y, b)?),
            EventKind::Unique { x, y, b } => CompiledEvent::Unique(Connection::new(g, x, y, b)?),
            EventKind::Spanning { b } => {
                if !g.contains_region(b) {
                    return Err(Error::RegionOutsideWindow);
                }
                CompiledEvent::Spanning(LiftedRegion::new(g, b))
            }
            EventKind::EdgeOpen { a, b } => {
                CompiledEvent::EdgeOpen(g.edge_between_vertices(*a, *b).ok_or(Error::RegionOutsideWindow)?)
            }
            EventKind::All(parts) => {
                CompiledEvent::All(parts.iter().map(|e| e.compile(g)).collect::<Result<_>>()?)
            }
        })
    }
}

impl CompiledEvent {
    pub fn holds(&self, c: &Configuration, scratch: &mut Scratch) -> bool {
        match self {
            CompiledEvent::Connected(q) => q.connected(c, scratch),
            CompiledEvent::Unique(q) => q.unique(c, scratch),
            CompiledEvent::Spanning(r) => {
                scratch.label(r, c);
                let vs = r.vertices();
                let root = scratch.uf.find(vs[0]);
                vs.iter().all(|&v| scratch.uf.find(v) == root)
            }
            CompiledEvent::EdgeOpen(e) => c.is_open(*e),
            CompiledEvent::All(parts) => parts.iter().all(|e| e.holds(c, scratch)),
        }
    }
}

/// A named event on a fixed micro-geometry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicroEvent {
    pub id: String,
    pub geometry: GeometryDescriptor,
    pub event: EventKind,
}

impl MicroEvent {
    pub fn exact(&self, p: RationalP) -> Result<ExactProbability> {
        let g = SlabGeometry::from_descriptor(&self.geometry)?;
        let ev = self.event.compile(&g)?;
        let space = ConfigSpace::full(&g)?;
        let h = space.histogram_with(&crate::exec::Sequential, || Scratch::new(&g), |c, s| ev.holds(c, s));
        Ok(ExactProbability { value: h.mass(p), edges: g.edge_count(), event: self.id.clone() })
    }
}

fn pt(x: i32, y: i32) -> Region {
    Region::point(Point::new(x, y))
}

/// The frozen micro-event suite: `k = 1` windows with at most 12 edges.
pub fn micro_events() -> Vec<MicroEvent> {
    let square = GeometryDescriptor { k: 1, window: PlanarBox::new(0, 1, 0, 1) };
    let strip = |len: i32| GeometryDescriptor { k: 1, window: PlanarBox::new(0, len - 1, 0, 0) };
    let sq = Region::rect(square.window);
    let left = Region::segment(0, 0, 1);
    let right = Region::segment(1, 0, 1);
    let row = |len: i32| Region::hsegment(0, 0, len - 1);
    let ev = |id: &str, geometry, event| MicroEvent { id: id.into(), geometry, event };
    alloc::vec![
        ev("square_left_right", square, EventKind::Connected { x: left.clone(), y: right.clone(), b: sq.clone() }),
        ev("square_left_right_unique", square, EventKind::Unique { x: left.clone(), y: right.clone(), b: sq.clone() }),
        ev("square_corners", square, EventKind::Connected { x: pt(0, 0), y: pt(1, 1), b: sq.clone() }),
        ev("square_corners_unique", square, EventKind::Unique { x: pt(0, 0), y: pt(1, 1), b: sq.clone() }),
        ev("square_left_column_internal", square, EventKind::Connected { x: pt(0, 0), y: pt(0, 1), b: left.clone() }),
        ev("square_spanning", square, EventKind::Spanning { b: sq.clone() }),
        ev(
            "square_single_edge",
            square,
            EventKind::EdgeOpen { a: Vertex::new(0, 0, 0), b: Vertex::new(1, 0, 0) }
        ),
        ev("strip4_ends", strip(4), EventKind::Connected { x: pt(0, 0), y: pt(3, 0), b: row(4) }),
        ev("strip4_ends_unique", strip(4), EventKind::Unique { x: pt(0, 0), y: pt(3, 0), b: row(4) }),
        ev("strip3_ends", strip(3), EventKind::Connected { x: pt(0, 0), y: pt(2, 0), b: row(3) }),
        ev(
            "strip3_middle_to_both_ends",
            strip(3),
            EventKind::All(alloc::vec![
                EventKind::Connected { x: pt(1, 0), y: pt(0, 0), b: row(3) },
                EventKind::Connected { x: pt(1, 0), y: pt(2, 0), b: row(3) },
            ])
        ),
        ev("strip2_unique", strip(2), EventKind::Unique { x: pt(0, 0), y: pt(1, 0), b: row(2) }),
    ]
}
