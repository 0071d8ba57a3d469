//! The closing surgery: cut every open edge between the lifted `U` columns
//! and the cluster of `S'`.

use alloc::vec::Vec;

use crate::connectivity::{LiftedRegion, Scratch};
use crate::lattice::{EdgeId, Region, SlabGeometry};
use crate::sampler::Configuration;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiOutcome {
    pub config: Configuration,
    /// Edges closed by the surgery, ascending.
    pub closed: Vec<EdgeId>,
}

/// Closes each open edge `{a, b}` with `a` over a column of `u` and `b`
/// connected to lifted `s_prime` inside `domain`.
pub fn surgery_phi(g: &SlabGeometry, c: &Configuration, u: &Region, s_prime: &Region, domain: &Region) -> PhiOutcome {
    let region = LiftedRegion::new(g, domain);
    let mut scratch = Scratch::new(g);
    scratch.label(&region, c);
    let sp = g.lifted_ids(&s_prime.intersection(domain));
    let stamp = scratch.mark_sources(&sp);
    let mut out = c.clone();
    let mut closed = Vec::new();
    for a in g.lifted_ids(u) {
        for (_, b, e) in g.neighbors(a) {
            if c.is_open(e) && region.contains(b) && scratch.reaches(b, stamp) {
                out.set(e, false);
                closed.push(e);
            }
        }
    }
    closed.sort_unstable();
    closed.dedup();
    PhiOutcome { config: out, closed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{PlanarBox, Point, Vertex};

    #[test]
    fn cuts_only_edges_towards_s_prime() {
        let g = SlabGeometry::new(0, PlanarBox::new(0, 2, 0, 0)).unwrap();
        let c = Configuration::all_open(g.edge_count());
        let domain = Region::rect(g.window());
        let u = Region::point(Point::new(1, 0));
        let out = surgery_phi(&g, &c, &u, &Region::point(Point::new(2, 0)), &domain);
        // both edges at the middle vertex lead into the S' cluster before the cut
        assert_eq!(out.closed.len(), 2);
        assert_eq!(out.config.open_count(), 0);
        let mut c = c;
        let e = g.edge_between_vertices(Vertex::new(0, 0, 0), Vertex::new(1, 0, 0)).unwrap();
        c.set(e, false);
        let out = surgery_phi(&g, &c, &u, &Region::point(Point::new(0, 0)), &domain);
        assert!(out.closed.is_empty());
        assert_eq!(out.config, c);
    }
}
