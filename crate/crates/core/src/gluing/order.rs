//! The lexicographic order on self-avoiding paths and the minimal open path.

use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::connectivity::{LiftedRegion, Scratch};
use crate::lattice::{Direction, EdgeId, Region, SlabGeometry, Vertex, VertexId};
use crate::sampler::Configuration;

/// A vertex sequence in the slab.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path(pub Vec<Vertex>);

impl Path {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn is_self_avoiding(&self) -> bool {
        let mut v = self.0.clone();
        v.sort_unstable();
        v.windows(2).all(|w| w[0] != w[1])
    }

    /// Edge ids of consecutive steps; `None` if a step is not an edge of `g`.
    pub fn edges(&self, g: &SlabGeometry) -> Option<Vec<EdgeId>> {
        self.0.windows(2).map(|w| g.edge_between_vertices(w[0], w[1])).collect()
    }

    pub fn is_open(&self, g: &SlabGeometry, c: &Configuration) -> bool {
        self.edges(g).is_some_and(|es| es.iter().all(|&e| c.is_open(e)))
    }

    pub fn columns(&self) -> Region {
        self.0.iter().map(|v| v.column()).collect()
    }

    pub fn position(&self, v: Vertex) -> Option<usize> {
        self.0.iter().position(|&x| x == v)
    }
}

fn step_rank(a: Vertex, b: Vertex) -> usize {
    Direction::between(a, b).map_or(usize::MAX, Direction::rank)
}

/// The path order: start vertices by `≪`, then a strict prefix before its
/// extensions, then the `≺` rank of the first divergent step.
pub fn compare_paths(a: &Path, b: &Path) -> Ordering {
    let (a, b) = (&a.0, &b.0);
    match (a.first(), b.first()) {
        (None, None) => return Ordering::Equal,
        (None, Some(_)) => return Ordering::Less,
        (Some(_), None) => return Ordering::Greater,
        (Some(x), Some(y)) if x != y => return x.cmp(y),
        _ => {}
    }
    let common = a.len().min(b.len());
    for j in 1..common {
        if a[j] != b[j] {
            return step_rank(a[j - 1], a[j]).cmp(&step_rank(b[j - 1], b[j]));
        }
    }
    a.len().cmp(&b.len())
}

/// Prepared minimal-path search from lifted `source` to lifted `target` in lifted `b`.
#[derive(Clone, Debug)]
pub struct MinPathSearch {
    region: LiftedRegion,
    source: Vec<VertexId>,
    target: Vec<VertexId>,
    is_target: Vec<bool>,
}

impl MinPathSearch {
    pub fn new(g: &SlabGeometry, source: &Region, target: &Region, b: &Region) -> Self {
        let target_ids = g.lifted_ids(&target.intersection(b));
        let mut is_target = alloc::vec![false; g.vertex_count()];
        for &v in &target_ids {
            is_target[v as usize] = true;
        }
        MinPathSearch {
            region: LiftedRegion::new(g, b),
            source: g.lifted_ids(&source.intersection(b)),
            target: target_ids,
            is_target,
        }
    }

    /// Ordered depth-first search: starts in `≪` order, edges in `≺` order,
    /// first touch of the target wins; branches whose head lies in a cluster
    /// missing the target are pruned.
    pub fn run(&self, g: &SlabGeometry, c: &Configuration, scratch: &mut Scratch) -> Option<Vec<VertexId>> {
        scratch.label(&self.region, c);
        let good = scratch.mark_sources(&self.target);
        let mut on_path = alloc::vec![false; g.vertex_count()];
        let mut path = Vec::new();
        for &s in &self.source {
            if !scratch.reaches(s, good) {
                continue;
            }
            path.clear();
            path.push(s);
            on_path[s as usize] = true;
            if self.dfs(g, c, scratch, good, &mut on_path, &mut path) {
                return Some(path);
            }
            on_path[s as usize] = false;
        }
        None
    }

    fn dfs(
        &self,
        g: &SlabGeometry,
        c: &Configuration,
        scratch: &mut Scratch,
        good: u32,
        on_path: &mut [bool],
        path: &mut Vec<VertexId>,
    ) -> bool {
        let head = *path.last().expect("nonempty");
        if self.is_target[head as usize] {
            return true;
        }
        for &(w, e) in g.adjacency_row(head) {
            if w == crate::lattice::NONE
                || !c.is_open(e)
                || on_path[w as usize]
                || !self.region.contains(w)
                || !scratch.reaches(w, good)
            {
                continue;
            }
            on_path[w as usize] = true;
            path.push(w);
            if self.dfs(g, c, scratch, good, on_path, path) {
                return true;
            }
            path.pop();
            on_path[w as usize] = false;
        }
        false
    }

    pub fn target_ids(&self) -> &[VertexId] {
        &self.target
    }
}

pub fn to_path(g: &SlabGeometry, ids: &[VertexId]) -> Path {
    Path(ids.iter().map(|&v| g.vertex(v)).collect())
}

/// `γ_min`: the minimal open self-avoiding path from lifted `source` to lifted `target` inside lifted `b`.
pub fn min_path(g: &SlabGeometry, c: &Configuration, source: &Region, target: &Region, b: &Region) -> Option<Path> {
    let search = MinPathSearch::new(g, source, target, b);
    search.run(g, c, &mut Scratch::new(g)).map(|ids| to_path(g, &ids))
}

/// Brute-force minimum over every open self-avoiding path from lifted
/// `source` to lifted `target` in lifted `b`, compared with [`compare_paths`].
/// Paths stop at their first target vertex, since a later touch always has a
/// smaller prefix.
pub fn brute_min_path(g: &SlabGeometry, c: &Configuration, source: &Region, target: &Region, b: &Region) -> Option<Path> {
    fn extend(
        g: &SlabGeometry,
        c: &Configuration,
        target: &Region,
        b: &Region,
        path: &mut Vec<Vertex>,
        best: &mut Option<Path>,
    ) {
        let head = *path.last().unwrap();
        if target.contains(head.column()) {
            let cand = Path(path.clone());
            if best.as_ref().is_none_or(|bp| compare_paths(&cand, bp) == Ordering::Less) {
                *best = Some(cand);
            }
            return;
        }
        let (x, y, l) = (head.x, head.y, head.layer as i64);
        let steps = [(x + 1, y, l), (x - 1, y, l), (x, y + 1, l), (x, y - 1, l), (x, y, l + 1), (x, y, l - 1)];
        for (nx, ny, nl) in steps {
            if nl < 0 || nl > g.k() as i64 {
                continue;
            }
            let w = Vertex::new(nx, ny, nl as u32);
            if !b.contains(w.column()) || path.contains(&w) {
                continue;
            }
            match g.edge_between_vertices(head, w) {
                Some(e) if c.is_open(e) => {
                    path.push(w);
                    extend(g, c, target, b, path, best);
                    path.pop();
                }
                _ => {}
            }
        }
    }
    let mut best = None;
    for cell in source.iter().filter(|p| b.contains(*p)) {
        for l in 0..=g.k() {
            let mut path = alloc::vec![Vertex::new(cell.x, cell.y, l)];
            extend(g, c, target, b, &mut path, &mut best);
        }
    }
    best
}
