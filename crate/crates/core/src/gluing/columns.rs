//! The marked set `U`: columns of `γ_min` inside `B'` that an open path,
//! staying at planar distance one from `γ_min` on its way, links to `S'`.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::connectivity::UnionFind;
use crate::lattice::{Point, Region, SlabGeometry, Vertex, VertexId};
use crate::sampler::Configuration;

use super::order::Path;

const PLANAR: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

fn ball1(z: Point) -> impl Iterator<Item = Point> {
    (-1..=1).flat_map(move |dx| (-1..=1).map(move |dy| Point::new(z.x + dx, z.y + dy)))
}

/// Cell classes for one path: allowed (in `domain`, column off the path) and
/// near (allowed and planar-adjacent to the path).
struct Classes {
    allowed: Vec<bool>,
    near: Vec<bool>,
}

fn classify(g: &SlabGeometry, gamma: &Path, domain: &Region) -> Classes {
    let n = g.cell_count();
    let mut on_path = alloc::vec![false; n];
    for v in gamma.vertices() {
        if let Some(i) = g.cell_index(v.column()) {
            on_path[i] = true;
        }
    }
    let in_domain = g.cell_mask(domain);
    let mut allowed = alloc::vec![false; n];
    let mut near = alloc::vec![false; n];
    for i in 0..n {
        allowed[i] = in_domain[i] && !on_path[i];
        if allowed[i] {
            let p = g.cell(i);
            near[i] = PLANAR.iter().any(|&(dx, dy)| {
                g.cell_index(Point::new(p.x + dx, p.y + dy)).is_some_and(|j| on_path[j])
            });
        }
    }
    Classes { allowed, near }
}

/// `U(ω)` for the path `gamma`, with every connection taken inside `domain`.
///
/// Condition P2 is read with walk semantics: some open cluster of the
/// off-path part of `domain` meets `lifted(z + B_1)`, the lifted `S'` and a
/// column at planar distance exactly one from the path.
pub fn compute_u(g: &SlabGeometry, c: &Configuration, gamma: &Path, b_prime: &Region, s_prime: &Region, domain: &Region) -> Region {
    let cls = classify(g, gamma, domain);
    let layers = g.layers();
    let nv = g.vertex_count();
    let mut uf = UnionFind::new(nv);
    for v in 0..nv as VertexId {
        let cv = v as usize / layers;
        if !cls.allowed[cv] {
            continue;
        }
        for (_, w, e) in g.neighbors(v) {
            if w > v && cls.allowed[w as usize / layers] && c.is_open(e) {
                uf.union(v, w);
            }
        }
    }
    let mut has_s = alloc::vec![false; nv];
    let mut has_near = alloc::vec![false; nv];
    for v in 0..nv as VertexId {
        let cv = v as usize / layers;
        if !cls.allowed[cv] {
            continue;
        }
        let r = uf.find(v) as usize;
        if cls.near[cv] {
            has_near[r] = true;
        }
        if s_prime.contains(g.cell(cv)) {
            has_s[r] = true;
        }
    }
    let mut out = Vec::new();
    for z in gamma.columns().intersection(b_prime).iter() {
        let hit = ball1(z).any(|q| match g.cell_index(q) {
            Some(i) if cls.allowed[i] => g.column_ids(q).any(|v| {
                let r = uf.find(v) as usize;
                has_s[r] && has_near[r]
            }),
            _ => false,
        });
        if hit {
            out.push(z);
        }
    }
    Region::new(out)
}

/// Independent reading of `U`: breadth-first searches over vertex
/// coordinates, one per candidate column, from `z + B_1` to a near vertex and
/// from there to `S'`.
pub fn brute_u(g: &SlabGeometry, c: &Configuration, gamma: &Path, b_prime: &Region, s_prime: &Region, domain: &Region) -> Region {
    let path_cols = gamma.columns();
    let allowed = |v: Vertex| domain.contains(v.column()) && !path_cols.contains(v.column());
    let near = |v: Vertex| {
        PLANAR.iter().any(|&(dx, dy)| path_cols.contains(Point::new(v.x + dx, v.y + dy)))
    };
    let reach = |starts: Vec<Vertex>| -> Vec<Vertex> {
        let mut seen: Vec<Vertex> = starts.clone();
        let mut queue: VecDeque<Vertex> = starts.into_iter().collect();
        while let Some(v) = queue.pop_front() {
            let mut nbrs = Vec::new();
            for &(dx, dy) in &PLANAR {
                nbrs.push(Vertex::new(v.x + dx, v.y + dy, v.layer));
            }
            if v.layer < g.k() {
                nbrs.push(Vertex::new(v.x, v.y, v.layer + 1));
            }
            if v.layer > 0 {
                nbrs.push(Vertex::new(v.x, v.y, v.layer - 1));
            }
            for w in nbrs {
                if !allowed(w) || seen.contains(&w) {
                    continue;
                }
                if g.edge_between_vertices(v, w).is_some_and(|e| c.is_open(e)) {
                    seen.push(w);
                    queue.push_back(w);
                }
            }
        }
        seen
    };
    let mut out = Vec::new();
    for z in path_cols.intersection(b_prime).iter() {
        let starts: Vec<Vertex> = ball1(z)
            .filter(|q| g.window().contains(*q))
            .flat_map(|q| (0..=g.k()).map(move |l| Vertex::new(q.x, q.y, l)))
            .filter(|v| allowed(*v))
            .collect();
        let nears: Vec<Vertex> = reach(starts).into_iter().filter(|v| near(*v)).collect();
        if nears.is_empty() {
            continue;
        }
        if reach(nears).iter().any(|v| s_prime.contains(v.column())) {
            out.push(z);
        }
    }
    Region::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::PlanarBox;

    #[test]
    fn arm_beside_the_path_marks_adjacent_columns() {
        // path along y = 0 in layer 0, arm along y = 1 in layer 0 ending in S' = (3, 1)
        let g = SlabGeometry::new(1, PlanarBox::new(0, 4, 0, 2)).unwrap();
        let v = Vertex::new;
        let gamma = Path((0..5).map(|x| v(x, 0, 0)).collect());
        let mut c = Configuration::all_closed(g.edge_count());
        for w in gamma.0.windows(2) {
            c.set(g.edge_between_vertices(w[0], w[1]).unwrap(), true);
        }
        c.set(g.edge_between_vertices(v(1, 1, 0), v(2, 1, 0)).unwrap(), true);
        c.set(g.edge_between_vertices(v(2, 1, 0), v(3, 1, 0)).unwrap(), true);
        let domain = Region::rect(g.window());
        let b_prime = Region::rect(PlanarBox::new(1, 4, 0, 2));
        let s_prime = Region::point(Point::new(3, 1));
        let u = compute_u(&g, &c, &gamma, &b_prime, &s_prime, &domain);
        assert_eq!(u.cells(), &[Point::new(1, 0), Point::new(2, 0), Point::new(3, 0), Point::new(4, 0)]);
        assert_eq!(u, brute_u(&g, &c, &gamma, &b_prime, &s_prime, &domain));
        // moving S' to distance two keeps the arm's near columns, so U is unchanged
        let far = Region::point(Point::new(3, 2));
        c.set(g.edge_between_vertices(v(3, 1, 0), v(3, 2, 0)).unwrap(), true);
        assert_eq!(compute_u(&g, &c, &gamma, &b_prime, &far, &domain), u);
        // an isolated S' marks nothing
        let lone = Region::point(Point::new(0, 2));
        assert!(compute_u(&g, &c, &gamma, &b_prime, &lone, &domain).is_empty());
        assert!(brute_u(&g, &c, &gamma, &b_prime, &lone, &domain).is_empty());
    }
}
