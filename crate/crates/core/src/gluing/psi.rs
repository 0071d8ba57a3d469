//! The rewiring surgery around a marked site `z`.
//!
//! Inside the lifted ball `B_{R+1}(z)` every edge is closed except the shell
//! edges (those leaving `B_R(z)`) used by `γ_min` or by the exit path `π`.
//! Then `z` is joined to its first three neighbors, which are linked by three
//! disjoint paths in `B_R(z) \ {z}` to the entry `u'` and exit `v'` of
//! `γ_min` and to the exit `w'` of the `S'` cluster.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::lattice::{EdgeId, PlanarBox, Point, Region, SlabGeometry, Vertex, VertexId};
use crate::sampler::Configuration;

use super::linkage::{linkage, Ball, Linkage};
use super::order::Path;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SurgeryError {
    #[error("ball B_(R+1) around {0:?} leaves the window")]
    BallOutsideWindow(Point),
    #[error("S' meets the ball around {0:?}")]
    SPrimeInBall(Point),
    #[error("the site {0:?} has fewer than three neighbors")]
    TooFewNeighbors(Point),
    #[error("the path does not enter the ball around {0:?}")]
    PathMissesBall(Point),
    #[error("the path enters or leaves the ball around {0:?} off its boundary")]
    EndpointOffRing(Point),
    #[error("the path touches the ball around {0:?} only once")]
    SingleTouch(Point),
    #[error("no open exit from the S' cluster reaches the ball around {0:?}")]
    NoExit(Point),
    #[error("the S' exit coincides with a path endpoint at {0:?}")]
    ExitCollision(Point),
    #[error("no disjoint linkage inside the ball around {0:?}")]
    NoLinkage(Point),
}

/// What the surgery chose and changed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurgeryRecord {
    pub z: Point,
    pub r: u32,
    pub center: Vertex,
    pub u: Vertex,
    pub v: Vertex,
    pub w: Vertex,
    pub u_prime: Vertex,
    pub v_prime: Vertex,
    pub w_prime: Vertex,
    pub exit: Path,
    /// Paths `u -> u'`, `v -> v'`, `w -> w'`.
    pub links: [Path; 3],
    pub closed: Vec<EdgeId>,
    pub opened: Vec<EdgeId>,
}

impl SurgeryRecord {
    /// The path `γ_min` is expected to follow after the surgery.
    pub fn expected_path(&self, gamma: &Path) -> Path {
        let iu = gamma.position(self.u_prime).expect("entry on path");
        let iv = gamma.position(self.v_prime).expect("exit on path");
        let mut out: Vec<Vertex> = gamma.0[..iu].to_vec();
        out.extend(self.links[0].0.iter().rev());
        out.push(self.center);
        out.extend(self.links[1].0.iter());
        out.extend(gamma.0[iv + 1..].iter());
        Path(out)
    }
}

pub fn ball_region(z: Point, r: u32) -> Region {
    let r = r as i32;
    Region::rect(PlanarBox::new(z.x - r, z.x + r, z.y - r, z.y + r))
}

/// Edges changed by the surgery at `z` are confined to this set.
pub fn surgery_support(g: &SlabGeometry, z: Point, r: u32) -> Vec<EdgeId> {
    g.induced_edges(&ball_region(z, r + 1))
}

/// The vertex of the site used as the center of the rewiring.
pub fn center_vertex(z: Point) -> Vertex {
    Vertex::new(z.x, z.y, 0)
}

/// Applies the surgery at site `z` with radius `r`. Connections of the `S'`
/// cluster are computed inside `domain`.
pub fn surgery_psi(
    g: &SlabGeometry,
    c: &Configuration,
    gamma: &Path,
    z: Point,
    s_prime: &Region,
    domain: &Region,
    r: u32,
) -> Result<(Configuration, SurgeryRecord), SurgeryError> {
    let ball = ball_region(z, r);
    let outer = ball_region(z, r + 1);
    if !g.contains_region(&outer) {
        return Err(SurgeryError::BallOutsideWindow(z));
    }
    if s_prime.intersects(&ball) {
        return Err(SurgeryError::SPrimeInBall(z));
    }
    let center = center_vertex(z);
    let zid = g.vertex_id(center).expect("center in window");
    let nbrs: Vec<VertexId> = g.neighbors(zid).map(|(_, w, _)| w).collect();
    if nbrs.len() < 3 {
        return Err(SurgeryError::TooFewNeighbors(z));
    }
    let (v, w, u) = (nbrs[0], nbrs[1], nbrs[2]);

    let in_ball = |x: Vertex| x.column().linf(z) <= r;
    let on_ring = |x: Vertex| x.column().linf(z) == r;
    let first = gamma.vertices().iter().position(|&x| in_ball(x)).ok_or(SurgeryError::PathMissesBall(z))?;
    let last = gamma.vertices().iter().rposition(|&x| in_ball(x)).unwrap();
    let (u_prime, v_prime) = (gamma.0[first], gamma.0[last]);
    if !on_ring(u_prime) || !on_ring(v_prime) {
        return Err(SurgeryError::EndpointOffRing(z));
    }
    if first == last {
        return Err(SurgeryError::SingleTouch(z));
    }

    // the S' cluster outside the ball, inside the domain
    let dmask = g.cell_mask(domain);
    let layers = g.layers();
    let outside = |id: VertexId| {
        let cell = id as usize / layers;
        dmask[cell] && g.cell(cell).linf(z) > r
    };
    let nv = g.vertex_count();
    let mut prev = alloc::vec![u32::MAX; nv];
    let mut queue = VecDeque::new();
    for s in g.lifted_ids(&s_prime.intersection(domain)) {
        prev[s as usize] = s;
        queue.push_back(s);
    }
    while let Some(a) = queue.pop_front() {
        for (_, b, e) in g.neighbors(a) {
            if prev[b as usize] == u32::MAX && outside(b) && c.is_open(e) {
                prev[b as usize] = a;
                queue.push_back(b);
            }
        }
    }
    let mut exit = None;
    'scan: for id in g.lifted_ids(&ball) {
        let x = g.vertex(id);
        if !on_ring(x) || !dmask[id as usize / layers] {
            continue;
        }
        for (_, b, e) in g.neighbors(id) {
            if c.is_open(e) && prev[b as usize] != u32::MAX && outside(b) {
                exit = Some((id, b));
                break 'scan;
            }
        }
    }
    let (w_prime_id, step) = exit.ok_or(SurgeryError::NoExit(z))?;
    let w_prime = g.vertex(w_prime_id);
    if w_prime == u_prime || w_prime == v_prime {
        return Err(SurgeryError::ExitCollision(z));
    }
    // the search tree points towards S', so following parents gives a shortest route
    let mut pi = alloc::vec![w_prime_id, step];
    let mut x = step;
    while prev[x as usize] != x {
        x = prev[x as usize];
        pi.push(x);
    }
    let pi_path = Path(pi.iter().map(|&i| g.vertex(i)).collect());

    // step 2: clear the closed ball, sparing shell edges of the path and of π
    let mut keep = Vec::new();
    for path in [gamma, &pi_path] {
        for s in path.0.windows(2) {
            if !(in_ball(s[0]) && in_ball(s[1])) {
                if let Some(e) = g.edge_between_vertices(s[0], s[1]) {
                    keep.push(e);
                }
            }
        }
    }
    let mut out = c.clone();
    for e in g.induced_edges(&outer) {
        if !keep.contains(&e) {
            out.set(e, false);
        }
    }

    // step 3: the three spokes and the linkage
    let local = Ball::new(z, r, g.k());
    let li = |x: Vertex| local.index(x).expect("ball vertex");
    let pairs = [(li(g.vertex(u)), li(u_prime)), (li(g.vertex(v)), li(v_prime)), (li(g.vertex(w)), li(w_prime))];
    let mut blocked = alloc::vec![false; local.len()];
    blocked[li(center)] = true;
    // prefer routes that avoid ring vertices still attached to kept shell edges
    let mut strict = blocked.clone();
    for &e in &keep {
        let (a, b) = g.edge_endpoints(e);
        for x in [a, b] {
            if on_ring(x) && ![u_prime, v_prime, w_prime].contains(&x) {
                strict[li(x)] = true;
            }
        }
    }
    let links = match linkage(&local, &strict, &pairs) {
        Linkage::Found(p) => p,
        _ => match linkage(&local, &blocked, &pairs) {
            Linkage::Found(p) => p,
            _ => return Err(SurgeryError::NoLinkage(z)),
        },
    };
    let links: [Path; 3] = links.map(|p| Path(p.into_iter().map(|i| local.vertex(i)).collect()));
    for x in [u, v, w] {
        out.set(g.edge_between(zid, x).expect("spoke"), true);
    }
    for p in &links {
        for e in p.edges(g).expect("ball path") {
            out.set(e, true);
        }
    }
    let mut closed = Vec::new();
    let mut opened = Vec::new();
    for e in c.difference(&out) {
        if out.is_open(e) {
            opened.push(e);
        } else {
            closed.push(e);
        }
    }
    let record = SurgeryRecord {
        z,
        r,
        center,
        u: g.vertex(u),
        v: g.vertex(v),
        w: g.vertex(w),
        u_prime,
        v_prime,
        w_prime,
        exit: pi_path,
        links,
        closed,
        opened,
    };
    Ok((out, record))
}

/// Vertices of `gamma` joined to lifted `s_prime` inside `domain` by open
/// edges other than those of `gamma`.
pub fn marked_points(g: &SlabGeometry, c: &Configuration, gamma: &Path, s_prime: &Region, domain: &Region) -> Vec<Vertex> {
    let mut off = c.clone();
    for e in gamma.edges(g).unwrap_or_default() {
        off.set(e, false);
    }
    let region = crate::connectivity::LiftedRegion::new(g, domain);
    let mut scratch = crate::connectivity::Scratch::new(g);
    scratch.label(&region, &off);
    let stamp = scratch.mark_sources(&g.lifted_ids(&s_prime.intersection(domain)));
    gamma
        .vertices()
        .iter()
        .copied()
        .filter(|&x| g.vertex_id(x).is_some_and(|id| region.contains(id) && scratch.reaches(id, stamp)))
        .collect()
}
