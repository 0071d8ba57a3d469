//! Bernoulli edge configurations with counter-based seeding.
//!
//! The uniform attached to edge `e` under `(seed, stream)` is the `e`-th 64-bit
//! word of the ChaCha8 keystream keyed by `seed` on stream `stream`, so every
//! edge state is a pure function of `(seed, stream, e)` and any range of
//! streams can be produced independently of the others.

use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{EdgeId, SlabGeometry};

const TWO_POW_53: f64 = 9_007_199_254_740_992.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub seed: u64,
    pub stream: u64,
}

impl SeedSpec {
    pub const fn new(seed: u64, stream: u64) -> Self {
        SeedSpec { seed, stream }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub p: f64,
    pub seed: u64,
    pub stream: u64,
}

/// One open/closed bit per edge index.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Configuration {
    words: Vec<u64>,
    len: usize,
    pub provenance: Option<Provenance>,
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.words == other.words
    }
}

impl Eq for Configuration {}

impl PartialOrd for Configuration {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Configuration {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        (self.len, &self.words).cmp(&(other.len, &other.words))
    }
}

impl core::hash::Hash for Configuration {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        self.len.hash(state);
        self.words.hash(state);
    }
}

impl Configuration {
    pub fn all_closed(edges: usize) -> Self {
        Configuration { words: alloc::vec![0; edges.div_ceil(64)], len: edges, provenance: None }
    }

    pub fn all_open(edges: usize) -> Self {
        let mut c = Configuration::all_closed(edges);
        for e in 0..edges {
            c.set(e as EdgeId, true);
        }
        c
    }

    pub fn from_open_edges(edges: usize, open: impl IntoIterator<Item = EdgeId>) -> Self {
        let mut c = Configuration::all_closed(edges);
        for e in open {
            c.set(e, true);
        }
        c
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn is_open(&self, e: EdgeId) -> bool {
        let e = e as usize;
        (self.words[e >> 6] >> (e & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, e: EdgeId, open: bool) {
        let e = e as usize;
        let bit = 1u64 << (e & 63);
        if open {
            self.words[e >> 6] |= bit;
        } else {
            self.words[e >> 6] &= !bit;
        }
    }

    pub fn open_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn open_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.len as EdgeId).filter(|&e| self.is_open(e))
    }

    pub fn hamming(&self, other: &Configuration) -> usize {
        self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    /// Edges on which the two configurations differ.
    pub fn difference(&self, other: &Configuration) -> Vec<EdgeId> {
        let mut out = Vec::new();
        for (i, (a, b)) in self.words.iter().zip(&other.words).enumerate() {
            let mut x = a ^ b;
            while x != 0 {
                let t = x.trailing_zeros() as usize;
                out.push((i * 64 + t) as EdgeId);
                x &= x - 1;
            }
        }
        out
    }

    /// Hex digits, most significant nibble first, edge 0 in the last nibble.
    pub fn to_hex(&self) -> String {
        let nibbles = self.len.div_ceil(4).max(1);
        let mut s = String::with_capacity(nibbles);
        for i in (0..nibbles).rev() {
            let mut v = 0u8;
            for b in 0..4 {
                let e = i * 4 + b;
                if e < self.len && self.is_open(e as EdgeId) {
                    v |= 1 << b;
                }
            }
            s.push(char::from_digit(v as u32, 16).unwrap());
        }
        s
    }

    pub fn from_hex(hex: &str, edges: usize) -> Result<Self> {
        let mut c = Configuration::all_closed(edges);
        let digits: Vec<char> = hex.trim().chars().collect();
        for (pos, ch) in digits.iter().rev().enumerate() {
            let v = ch
                .to_digit(16)
                .ok_or_else(|| Error::InvalidParameter(alloc::format!("bad hex digit {ch:?}")))?;
            for b in 0..4 {
                if v & (1 << b) != 0 {
                    let e = pos * 4 + b;
                    if e >= edges {
                        return Err(Error::EdgeCountMismatch { expected: edges, got: e + 1 });
                    }
                    c.set(e as EdgeId, true);
                }
            }
        }
        Ok(c)
    }
}

/// Per-edge uniforms in `[0, 1)` used for monotone couplings across `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformField {
    pub values: Vec<f64>,
    pub seed: SeedSpec,
}

fn generator(spec: SeedSpec) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(spec.stream);
    rng
}

#[inline]
fn to_unit(word: u64) -> f64 {
    (word >> 11) as f64 / TWO_POW_53
}

/// Random access to the uniform of one edge.
pub fn uniform_at(spec: SeedSpec, edge: EdgeId) -> f64 {
    let mut rng = generator(spec);
    rng.set_word_pos(2 * edge as u128);
    to_unit(rng.next_u64())
}

pub fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange(p))
    }
}

/// Each edge open independently with probability `p`.
pub fn sample(geometry: &SlabGeometry, p: f64, spec: SeedSpec) -> Result<Configuration> {
    check_probability(p)?;
    let mut c = Configuration::all_closed(geometry.edge_count());
    sample_into(p, spec, &mut c);
    c.provenance = Some(Provenance { p, seed: spec.seed, stream: spec.stream });
    Ok(c)
}

/// Overwrites `out` with the configuration of `(p, spec)`; `p` must be valid.
pub fn sample_into(p: f64, spec: SeedSpec, out: &mut Configuration) {
    let threshold = p * TWO_POW_53;
    let mut rng = generator(spec);
    let len = out.len;
    for (i, word) in out.words.iter_mut().enumerate() {
        let mut w = 0u64;
        let n = (len - i * 64).min(64);
        for b in 0..n {
            if ((rng.next_u64() >> 11) as f64) < threshold {
                w |= 1 << b;
            }
        }
        *word = w;
    }
}

pub fn sample_coupled(geometry: &SlabGeometry, spec: SeedSpec) -> UniformField {
    let mut values = alloc::vec![0.0; geometry.edge_count()];
    fill_uniforms(spec, &mut values);
    UniformField { values, seed: spec }
}

pub fn fill_uniforms(spec: SeedSpec, out: &mut [f64]) {
    let mut rng = generator(spec);
    for v in out.iter_mut() {
        *v = to_unit(rng.next_u64());
    }
}

/// Opens edge `e` iff `u(e) < p`.
pub fn threshold(field: &UniformField, p: f64) -> Configuration {
    let mut c = Configuration::all_closed(field.values.len());
    for (e, &u) in field.values.iter().enumerate() {
        if u < p {
            c.set(e as EdgeId, true);
        }
    }
    c.provenance = Some(Provenance { p, seed: field.seed.seed, stream: field.seed.stream });
    c
}

/// Returns `config` with `open_set` opened and `close_set` closed.
pub fn mutate(config: &Configuration, open_set: &[EdgeId], close_set: &[EdgeId]) -> Result<Configuration> {
    for e in open_set {
        if close_set.contains(e) {
            return Err(Error::OverlappingSets(*e));
        }
    }
    let mut c = config.clone();
    for &e in open_set {
        c.set(e, true);
    }
    for &e in close_set {
        c.set(e, false);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_geometry, PlanarBox};

    fn geo() -> SlabGeometry {
        build_geometry(1, PlanarBox::centered(2)).unwrap()
    }

    #[test]
    fn degenerate_probabilities() {
        let g = geo();
        let s = SeedSpec::new(3, 0);
        assert_eq!(sample(&g, 1.0, s).unwrap().open_count(), g.edge_count());
        assert_eq!(sample(&g, 0.0, s).unwrap().open_count(), 0);
        assert_eq!(sample(&g, 1.5, s), Err(Error::ProbabilityOutOfRange(1.5)));
        assert!(sample(&g, -0.1, s).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = geo();
        let s = SeedSpec::new(11, 4);
        assert_eq!(sample(&g, 0.4, s).unwrap(), sample(&g, 0.4, s).unwrap());
        assert_ne!(sample(&g, 0.4, s).unwrap(), sample(&g, 0.4, SeedSpec::new(11, 5)).unwrap());
    }

    #[test]
    fn states_are_pure_functions_of_edge_index() {
        let g = geo();
        let s = SeedSpec::new(99, 7);
        let field = sample_coupled(&g, s);
        for e in [0u32, 1, 17, 63, 64, 100] {
            assert_eq!(field.values[e as usize], uniform_at(s, e));
        }
        let direct = sample(&g, 0.37, s).unwrap();
        assert_eq!(direct, threshold(&field, 0.37));
    }

    #[test]
    fn thresholds_are_nested() {
        let g = geo();
        for stream in 0..20 {
            let field = sample_coupled(&g, SeedSpec::new(5, stream));
            assert_eq!(threshold(&field, 0.0).open_count(), 0);
            assert_eq!(threshold(&field, 1.0).open_count(), g.edge_count());
            let mut prev = threshold(&field, 0.1);
            for i in 2..10 {
                let next = threshold(&field, i as f64 / 10.0);
                assert!(prev.open_edges().all(|e| next.is_open(e)));
                prev = next;
            }
        }
    }

    #[test]
    fn mutate_contract() {
        let g = geo();
        let c = sample(&g, 0.5, SeedSpec::new(1, 1)).unwrap();
        assert_eq!(mutate(&c, &[], &[]).unwrap(), c);
        let closed: Vec<_> = (0..g.edge_count() as u32).filter(|&e| !c.is_open(e)).take(3).collect();
        let open: Vec<_> = c.open_edges().take(2).collect();
        let m = mutate(&c, &closed, &open).unwrap();
        assert_eq!(m.hamming(&c), 5);
        assert_eq!(mutate(&m, &open, &closed).unwrap(), c);
        assert_eq!(mutate(&c, &[3], &[3]), Err(Error::OverlappingSets(3)));
    }

    #[test]
    fn hex_round_trip() {
        let g = geo();
        let c = sample(&g, 0.5, SeedSpec::new(2, 9)).unwrap();
        let back = Configuration::from_hex(&c.to_hex(), g.edge_count()).unwrap();
        assert_eq!(back, c);
        assert_eq!(Configuration::from_open_edges(5, [0, 4]).to_hex(), "11");
    }
}
