//! Clusters of a configuration restricted to a lifted region, and the
//! connection / uniqueness events built from them.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::{Direction, Region, SlabGeometry, Vertex, VertexId};
use crate::sampler::Configuration;

/// Union-find with path compression and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), size: alloc::vec![1; n] }
    }

    #[inline]
    pub fn reset(&mut self, x: u32) {
        self.parent[x as usize] = x;
        self.size[x as usize] = 1;
    }

    #[inline]
    pub fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    #[inline]
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }
}

/// A lifted region with its induced edge list, prepared for repeated labeling.
#[derive(Clone, Debug)]
pub struct LiftedRegion {
    vertices: Vec<VertexId>,
    // (a, b, edge) with both endpoints in the region
    edges: Vec<(u32, u32, u32)>,
    member: Vec<bool>,
}

impl LiftedRegion {
    pub fn new(geometry: &SlabGeometry, region: &Region) -> Self {
        let vertices = geometry.lifted_ids(region);
        let mut member = alloc::vec![false; geometry.vertex_count()];
        for &v in &vertices {
            member[v as usize] = true;
        }
        let mut edges = Vec::new();
        for &v in &vertices {
            for (d, w, e) in geometry.neighbors(v) {
                if matches!(d, Direction::PlusX | Direction::PlusY | Direction::Up) && member[w as usize] {
                    edges.push((v, w, e));
                }
            }
        }
        LiftedRegion { vertices, edges, member }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.edges.iter().map(|t| t.2)
    }

    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        self.member[v as usize]
    }
}

/// Per-worker scratch state for labelings.
#[derive(Clone, Debug)]
pub struct Scratch {
    pub uf: UnionFind,
    mark: Vec<u32>,
    stamp: u32,
}

impl Scratch {
    pub fn new(geometry: &SlabGeometry) -> Self {
        let n = geometry.vertex_count();
        Scratch { uf: UnionFind::new(n), mark: alloc::vec![0; n], stamp: 0 }
    }

    /// Unions the open induced edges of `region`.
    pub fn label(&mut self, region: &LiftedRegion, config: &Configuration) {
        for &v in &region.vertices {
            self.uf.reset(v);
        }
        for &(a, b, e) in &region.edges {
            if config.is_open(e) {
                self.uf.union(a, b);
            }
        }
    }

    pub(crate) fn fresh_stamp(&mut self) -> u32 {
        if self.stamp >= u32::MAX - 4 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.stamp = 0;
        }
        self.stamp += 1;
        self.stamp
    }

    #[inline]
    pub(crate) fn mark(&mut self, root: u32, stamp: u32) {
        self.mark[root as usize] = stamp;
    }

    #[inline]
    pub(crate) fn marked(&self, root: u32, stamp: u32) -> bool {
        self.mark[root as usize] == stamp
    }

    /// Marks the clusters (of the last labeling) meeting `sources`; query with [`Scratch::reaches`].
    pub fn mark_sources(&mut self, sources: &[VertexId]) -> u32 {
        let s = self.fresh_stamp();
        for &v in sources {
            let r = self.uf.find(v);
            self.mark(r, s);
        }
        s
    }

    #[inline]
    pub fn reaches(&mut self, v: VertexId, stamp: u32) -> bool {
        let r = self.uf.find(v);
        self.marked(r, stamp)
    }

    pub fn reaches_any(&mut self, vs: &[VertexId], stamp: u32) -> bool {
        vs.iter().any(|&v| self.reaches(v, stamp))
    }

    /// Number of distinct clusters (of the last labeling) meeting both vertex sets.
    pub fn meeting_count(&mut self, x: &[VertexId], y: &[VertexId], limit: usize) -> usize {
        let sx = self.fresh_stamp();
        for &v in x {
            let r = self.uf.find(v);
            self.mark(r, sx);
        }
        let sy = self.fresh_stamp();
        let mut count = 0;
        for &v in y {
            let r = self.uf.find(v);
            if self.marked(r, sx) {
                self.mark(r, sy);
                count += 1;
                if count >= limit {
                    break;
                }
            }
        }
        count
    }
}

/// A prepared `X ↔_B Y` query.
#[derive(Clone, Debug)]
pub struct Connection {
    pub region: LiftedRegion,
    pub x: Vec<VertexId>,
    pub y: Vec<VertexId>,
}

impl Connection {
    pub fn new(geometry: &SlabGeometry, x: &Region, y: &Region, b: &Region) -> Result<Self> {
        if !geometry.contains_region(b) {
            return Err(Error::RegionOutsideWindow);
        }
        if !x.is_subset_of(b) {
            return Err(Error::NotSubset { what: "X" });
        }
        if !y.is_subset_of(b) {
            return Err(Error::NotSubset { what: "Y" });
        }
        Ok(Connection {
            region: LiftedRegion::new(geometry, b),
            x: geometry.lifted_ids(x),
            y: geometry.lifted_ids(y),
        })
    }

    /// Distinct clusters meeting both lifted sets, counting at most `limit`.
    pub fn count(&self, config: &Configuration, scratch: &mut Scratch, limit: usize) -> usize {
        scratch.label(&self.region, config);
        scratch.meeting_count(&self.x, &self.y, limit)
    }

    pub fn connected(&self, config: &Configuration, scratch: &mut Scratch) -> bool {
        self.count(config, scratch, 1) >= 1
    }

    pub fn unique(&self, config: &Configuration, scratch: &mut Scratch) -> bool {
        self.count(config, scratch, 2) == 1
    }
}

/// Which lifted target sets meet the clusters of a fixed source set.
#[derive(Clone, Debug)]
pub struct ReachProfile {
    pub region: LiftedRegion,
    pub source: Vec<VertexId>,
    pub targets: Vec<Vec<VertexId>>,
}

impl ReachProfile {
    pub fn new(geometry: &SlabGeometry, source: &Region, targets: &[Region], b: &Region) -> Result<Self> {
        if !geometry.contains_region(b) {
            return Err(Error::RegionOutsideWindow);
        }
        if !source.is_subset_of(b) {
            return Err(Error::NotSubset { what: "X" });
        }
        if targets.iter().any(|t| !t.is_subset_of(b)) {
            return Err(Error::NotSubset { what: "Y" });
        }
        Ok(ReachProfile {
            region: LiftedRegion::new(geometry, b),
            source: geometry.lifted_ids(source),
            targets: targets.iter().map(|t| geometry.lifted_ids(t)).collect(),
        })
    }

    /// `out[i]` is set iff target `i` is joined to the source inside the region.
    pub fn eval(&self, config: &Configuration, scratch: &mut Scratch, out: &mut Vec<bool>) {
        scratch.label(&self.region, config);
        let stamp = scratch.mark_sources(&self.source);
        out.clear();
        for t in &self.targets {
            out.push(scratch.reaches_any(t, stamp));
        }
    }
}

/// Cluster ids for every vertex of a lifted region; each id is the smallest
/// (in `≪`) member of its cluster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterLabeling {
    pub vertices: Vec<Vertex>,
    pub ids: Vec<Vertex>,
    pub count: usize,
}

impl ClusterLabeling {
    pub fn id_of(&self, v: Vertex) -> Option<Vertex> {
        self.vertices.binary_search(&v).ok().map(|i| self.ids[i])
    }
}

pub fn clusters(geometry: &SlabGeometry, config: &Configuration, b: &Region) -> ClusterLabeling {
    let region = LiftedRegion::new(geometry, b);
    let mut scratch = Scratch::new(geometry);
    scratch.label(&region, config);
    // vertices are ascending, so the first member seen fixes the canonical id
    let mut canon = alloc::vec![u32::MAX; geometry.vertex_count()];
    let mut ids = Vec::with_capacity(region.vertices.len());
    let mut count = 0;
    for &v in &region.vertices {
        let r = scratch.uf.find(v) as usize;
        if canon[r] == u32::MAX {
            canon[r] = v;
            count += 1;
        }
        ids.push(geometry.vertex(canon[r]));
    }
    ClusterLabeling {
        vertices: region.vertices.iter().map(|&v| geometry.vertex(v)).collect(),
        ids,
        count,
    }
}

pub fn connected(
    geometry: &SlabGeometry,
    config: &Configuration,
    x: &Region,
    y: &Region,
    b: &Region,
) -> Result<bool> {
    let q = Connection::new(geometry, x, y, b)?;
    Ok(q.connected(config, &mut Scratch::new(geometry)))
}

pub fn unique_cluster(
    geometry: &SlabGeometry,
    config: &Configuration,
    x: &Region,
    y: &Region,
    b: &Region,
) -> Result<bool> {
    let q = Connection::new(geometry, x, y, b)?;
    Ok(q.unique(config, &mut Scratch::new(geometry)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_geometry, PlanarBox, Point};

    #[test]
    fn trivial_labelings() {
        let g = build_geometry(1, PlanarBox::centered(1)).unwrap();
        let b = Region::square(1);
        let open = Configuration::all_open(g.edge_count());
        assert_eq!(clusters(&g, &open, &b).count, 1);
        let closed = Configuration::all_closed(g.edge_count());
        assert_eq!(clusters(&g, &closed, &b).count, 18);
    }

    #[test]
    fn overlapping_sets_always_connect() {
        let g = build_geometry(1, PlanarBox::centered(1)).unwrap();
        let b = Region::square(1);
        let x = Region::segment(0, -1, 0);
        let y = Region::segment(0, 0, 1);
        let closed = Configuration::all_closed(g.edge_count());
        assert!(connected(&g, &closed, &x, &y, &b).unwrap());
        let far = Region::point(Point::new(1, 1));
        assert!(!connected(&g, &closed, &x, &far, &b).unwrap());
    }

    #[test]
    fn subset_violations_rejected() {
        let g = build_geometry(0, PlanarBox::centered(2)).unwrap();
        let b = Region::square(1);
        let x = Region::point(Point::new(2, 2));
        let e = connected(&g, &Configuration::all_closed(g.edge_count()), &x, &b, &b);
        assert_eq!(e, Err(Error::NotSubset { what: "X" }));
    }

    #[test]
    fn two_unlinked_paths_are_not_unique() {
        // k = 1 strip 3 long; one open path per layer, no vertical edges.
        let g = build_geometry(1, PlanarBox::new(0, 2, 0, 0)).unwrap();
        let mut c = Configuration::all_closed(g.edge_count());
        for l in 0..2 {
            for x in 0..2 {
                let e = g.edge_between_vertices(Vertex::new(x, 0, l), Vertex::new(x + 1, 0, l)).unwrap();
                c.set(e, true);
            }
        }
        let b = Region::hsegment(0, 0, 2);
        let x = Region::point(Point::new(0, 0));
        let y = Region::point(Point::new(2, 0));
        assert!(connected(&g, &c, &x, &y, &b).unwrap());
        assert!(!unique_cluster(&g, &c, &x, &y, &b).unwrap());
        // linking the layers restores uniqueness
        let v = g.edge_between_vertices(Vertex::new(1, 0, 0), Vertex::new(1, 0, 1)).unwrap();
        c.set(v, true);
        assert!(unique_cluster(&g, &c, &x, &y, &b).unwrap());
    }

    #[test]
    fn canonical_ids_are_minimal_members() {
        let g = build_geometry(0, PlanarBox::new(0, 2, 0, 0)).unwrap();
        let mut c = Configuration::all_closed(g.edge_count());
        c.set(g.edge_between_vertices(Vertex::new(1, 0, 0), Vertex::new(2, 0, 0)).unwrap(), true);
        let lab = clusters(&g, &c, &Region::hsegment(0, 0, 2));
        assert_eq!(lab.count, 2);
        assert_eq!(lab.id_of(Vertex::new(2, 0, 0)), Some(Vertex::new(1, 0, 0)));
        assert_eq!(lab.id_of(Vertex::new(0, 0, 0)), Some(Vertex::new(0, 0, 0)));
    }
}
