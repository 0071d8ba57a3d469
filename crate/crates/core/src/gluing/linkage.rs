//! Vertex-disjoint routing inside a lifted ball `B_R x {0..k}`.
//!
//! Two certificates are computed for each terminal assignment: the value of a
//! unit-vertex-capacity flow (unpaired disjoint paths) and an explicit paired
//! linkage, each source joined to its own target.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Direction, Point, Vertex};

/// The lifted ball around a column, with local indices.
#[derive(Clone, Debug)]
pub struct Ball {
    pub center: Point,
    pub r: i32,
    pub k: u32,
    side: usize,
    layers: usize,
    /// Neighbors in `≺` order.
    adj: Vec<Vec<usize>>,
}

impl Ball {
    pub fn new(center: Point, r: u32, k: u32) -> Self {
        let r = r as i32;
        let side = (2 * r + 1) as usize;
        let layers = k as usize + 1;
        let mut b = Ball { center, r, k, side, layers, adj: Vec::new() };
        let n = side * side * layers;
        let mut adj = alloc::vec![Vec::new(); n];
        for (i, row) in adj.iter_mut().enumerate() {
            let v = b.vertex(i);
            for d in Direction::ALL {
                let (dx, dy, dl) = d.delta();
                let l = v.layer as i32 + dl;
                if l < 0 || l > k as i32 {
                    continue;
                }
                if let Some(j) = b.index(Vertex::new(v.x + dx, v.y + dy, l as u32)) {
                    row.push(j);
                }
            }
        }
        b.adj = adj;
        b
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn index(&self, v: Vertex) -> Option<usize> {
        let dx = v.x - self.center.x + self.r;
        let dy = v.y - self.center.y + self.r;
        let s = self.side as i32;
        if dx < 0 || dy < 0 || dx >= s || dy >= s || v.layer > self.k {
            return None;
        }
        Some((dx as usize * self.side + dy as usize) * self.layers + v.layer as usize)
    }

    pub fn vertex(&self, i: usize) -> Vertex {
        let l = (i % self.layers) as u32;
        let c = i / self.layers;
        let dx = (c / self.side) as i32 - self.r;
        let dy = (c % self.side) as i32 - self.r;
        Vertex::new(self.center.x + dx, self.center.y + dy, l)
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    /// Planar L-infinity distance from the center column.
    pub fn radius_of(&self, i: usize) -> u32 {
        self.vertex(i).column().linf(self.center)
    }

    /// Vertices at distance exactly `r`, ascending.
    pub fn ring(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.radius_of(i) == self.r as u32).collect()
    }
}

/// Maximum number of vertex-disjoint paths from `sources` to `sinks` avoiding `blocked`.
pub fn disjoint_path_count(ball: &Ball, blocked: &[bool], sources: &[usize], sinks: &[usize]) -> usize {
    // split node i into 2i (in) and 2i+1 (out); source 2n, sink 2n+1
    let n = ball.len();
    let s = 2 * n;
    let t = 2 * n + 1;
    let mut head: Vec<Vec<usize>> = alloc::vec![Vec::new(); 2 * n + 2];
    let mut to: Vec<usize> = Vec::new();
    let mut cap: Vec<u8> = Vec::new();
    let mut add = |head: &mut Vec<Vec<usize>>, a: usize, b: usize| {
        head[a].push(to.len());
        to.push(b);
        cap.push(1);
        head[b].push(to.len());
        to.push(a);
        cap.push(0);
    };
    for i in 0..n {
        if blocked[i] {
            continue;
        }
        add(&mut head, 2 * i, 2 * i + 1);
        for &j in ball.neighbors(i) {
            if !blocked[j] {
                add(&mut head, 2 * i + 1, 2 * j);
            }
        }
    }
    for &i in sources {
        add(&mut head, s, 2 * i);
    }
    for &i in sinks {
        add(&mut head, 2 * i + 1, t);
    }
    let mut flow = 0;
    let mut prev = alloc::vec![usize::MAX; 2 * n + 2];
    loop {
        prev.iter_mut().for_each(|p| *p = usize::MAX);
        let mut queue = VecDeque::new();
        queue.push_back(s);
        prev[s] = usize::MAX - 1;
        while let Some(a) = queue.pop_front() {
            if a == t {
                break;
            }
            for &arc in &head[a] {
                let b = to[arc];
                if cap[arc] > 0 && prev[b] == usize::MAX {
                    prev[b] = arc;
                    queue.push_back(b);
                }
            }
        }
        if prev[t] == usize::MAX {
            return flow;
        }
        let mut b = t;
        while b != s {
            let arc = prev[b];
            cap[arc] -= 1;
            cap[arc ^ 1] += 1;
            b = to[arc ^ 1];
        }
        flow += 1;
    }
}

fn bfs_route(ball: &Ball, used: &[bool], s: usize, t: usize) -> Option<Vec<usize>> {
    let mut prev = alloc::vec![usize::MAX; ball.len()];
    prev[s] = s;
    let mut queue = VecDeque::new();
    queue.push_back(s);
    while let Some(a) = queue.pop_front() {
        if a == t {
            let mut path = alloc::vec![t];
            let mut x = t;
            while x != s {
                x = prev[x];
                path.push(x);
            }
            path.reverse();
            return Some(path);
        }
        for &b in ball.neighbors(a) {
            if prev[b] == usize::MAX && (!used[b] || b == t) {
                prev[b] = a;
                queue.push_back(b);
            }
        }
    }
    None
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Path extensions allowed to the backtracking fallback of [`linkage`].
pub const LINKAGE_BUDGET: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Linkage {
    Found([Vec<usize>; 3]),
    Absent,
    /// The backtracking budget ran out.
    Undecided,
}

/// Three vertex-disjoint paths joining `pairs[i].0` to `pairs[i].1`, avoiding `blocked`.
///
/// Shortest paths routed one after another in each of the six pair orders;
/// failing that, a budgeted exhaustive search.
pub fn linkage(ball: &Ball, blocked: &[bool], pairs: &[(usize, usize); 3]) -> Linkage {
    let terminals: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    for order in PERMUTATIONS {
        let mut used = blocked.to_vec();
        for &x in &terminals {
            used[x] = true;
        }
        let mut paths: [Vec<usize>; 3] = Default::default();
        let mut ok = true;
        for &i in &order {
            let (s, t) = pairs[i];
            match bfs_route(ball, &used, s, t) {
                Some(p) => {
                    for &x in &p {
                        used[x] = true;
                    }
                    paths[i] = p;
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Linkage::Found(paths);
        }
    }
    // exact search: simple paths pair by pair, pruned as soon as some
    // remaining pair is disconnected
    let mut used = blocked.to_vec();
    for &x in &terminals {
        used[x] = true;
    }
    let mut budget = LINKAGE_BUDGET;
    let mut out: [Vec<usize>; 3] = Default::default();
    let mut path = Vec::new();
    if route(ball, &mut used, pairs, 0, &mut path, &mut out, &mut budget) {
        Linkage::Found(out)
    } else if budget == 0 {
        Linkage::Undecided
    } else {
        Linkage::Absent
    }
}

/// Whether `a` reaches `b` through vertices not in `used` (endpoints exempt).
fn joined(ball: &Ball, used: &[bool], a: usize, b: usize) -> bool {
    let mut seen = alloc::vec![false; ball.len()];
    seen[a] = true;
    let mut stack = alloc::vec![a];
    while let Some(x) = stack.pop() {
        if x == b {
            return true;
        }
        for &y in ball.neighbors(x) {
            if !seen[y] && (!used[y] || y == b) {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    false
}

fn route(
    ball: &Ball,
    used: &mut [bool],
    pairs: &[(usize, usize); 3],
    i: usize,
    path: &mut Vec<usize>,
    out: &mut [Vec<usize>; 3],
    budget: &mut usize,
) -> bool {
    if i == 3 {
        return true;
    }
    let (s, t) = pairs[i];
    if path.is_empty() {
        path.push(s);
    }
    let head = *path.last().unwrap();
    if head == t {
        out[i] = core::mem::take(path);
        if route(ball, used, pairs, i + 1, path, out, budget) {
            return true;
        }
        *path = core::mem::take(&mut out[i]);
        return false;
    }
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    if !joined(ball, used, head, t) || pairs[i + 1..].iter().any(|&(a, b)| !joined(ball, used, a, b)) {
        return false;
    }
    for &y in ball.neighbors(head) {
        if used[y] && y != t {
            continue;
        }
        let was = used[y];
        used[y] = true;
        path.push(y);
        if route(ball, used, pairs, i, path, out, budget) {
            return true;
        }
        path.pop();
        used[y] = was;
        if *budget == 0 {
            return false;
        }
    }
    if path.len() == 1 {
        path.clear();
    }
    false
}

/// Outcome of the exhaustive check at one radius.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub k: u32,
    pub r: u32,
    pub cases: u64,
    /// Cases where the unpaired flow value was below three.
    pub flow_failures: u64,
    /// Cases with no paired linkage, or an undecided search.
    pub linkage_failures: u64,
}

impl RadiusReport {
    pub fn holds(&self) -> bool {
        self.flow_failures == 0 && self.linkage_failures == 0
    }
}

/// Every center layer, every unordered triple of center neighbors and every
/// ordered triple of distinct ring vertices.
pub fn check_radius(k: u32, r: u32) -> RadiusReport {
    let ball = Ball::new(Point::new(0, 0), r, k);
    let ring = ball.ring();
    let mut rep = RadiusReport { k, r, cases: 0, flow_failures: 0, linkage_failures: 0 };
    for layer in 0..=k {
        let z = ball.index(Vertex::new(0, 0, layer)).unwrap();
        let mut blocked = alloc::vec![false; ball.len()];
        blocked[z] = true;
        let nb = ball.neighbors(z).to_vec();
        for a in 0..nb.len() {
            for b in a + 1..nb.len() {
                for c in b + 1..nb.len() {
                    let src = [nb[a], nb[b], nb[c]];
                    for &t0 in &ring {
                        for &t1 in &ring {
                            if t1 == t0 {
                                continue;
                            }
                            for &t2 in &ring {
                                if t2 == t0 || t2 == t1 {
                                    continue;
                                }
                                rep.cases += 1;
                                if disjoint_path_count(&ball, &blocked, &src, &[t0, t1, t2]) < 3 {
                                    rep.flow_failures += 1;
                                }
                                let pairs = [(src[0], t0), (src[1], t1), (src[2], t2)];
                                let res = linkage(&ball, &blocked, &pairs);
                                if !matches!(res, Linkage::Found(_)) {
                                    rep.linkage_failures += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    rep
}

/// Smallest `R` in `2..=r_max` for which [`check_radius`] holds, with the
/// reports of every radius tried. Width `k = 0` has no room for three
/// disjoint paths around a site.
pub fn feasible_r(k: u32, r_max: u32) -> Result<(Option<u32>, Vec<RadiusReport>)> {
    if k == 0 {
        return Err(Error::TrivialWidth);
    }
    let mut reports = Vec::new();
    for r in 2..=r_max {
        let rep = check_radius(k, r);
        let ok = rep.holds();
        reports.push(rep);
        if ok {
            return Ok((Some(r), reports));
        }
    }
    Ok((None, reports))
}
