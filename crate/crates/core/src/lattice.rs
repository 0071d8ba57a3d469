//! Geometry of the slab `Z^2 x {0, ..., k}` restricted to a finite planar window.
//!
//! Vertices are indexed so that the numeric id order coincides with the
//! lexicographic order on `(x, y, layer)`, which is the vertex order used by
//! the minimal-path machinery. Edges are indexed in three blocks (x-edges,
//! y-edges, vertical edges), each in the same lexicographic order of their
//! lower endpoint.

use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = u32;
pub type EdgeId = u32;

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl Point {
    pub const fn new(x: i32, y: i32) -> Self {
        Point { x, y }
    }

    pub fn offset(self, v: Point) -> Point {
        Point::new(self.x + v.x, self.y + v.y)
    }

    pub fn l1(self, other: Point) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    pub fn linf(self, other: Point) -> u32 {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }
}

impl From<[i32; 2]> for Point {
    fn from(a: [i32; 2]) -> Self {
        Point::new(a[0], a[1])
    }
}

impl From<Point> for [i32; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// A vertex of the slab. The derived order is lexicographic on `(x, y, layer)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[i32; 3]", into = "[i32; 3]")]
pub struct Vertex {
    pub x: i32,
    pub y: i32,
    pub layer: u32,
}

impl Vertex {
    pub const fn new(x: i32, y: i32, layer: u32) -> Self {
        Vertex { x, y, layer }
    }

    pub fn column(self) -> Point {
        Point::new(self.x, self.y)
    }
}

impl From<[i32; 3]> for Vertex {
    fn from(a: [i32; 3]) -> Self {
        Vertex::new(a[0], a[1], a[2] as u32)
    }
}

impl From<Vertex> for [i32; 3] {
    fn from(v: Vertex) -> Self {
        [v.x, v.y, v.layer as i32]
    }
}

/// Directions of the edges emanating from a vertex, in their `≺` rank order.
///
/// The rank depends only on the direction, so the edge order is invariant
/// under translations of `Z^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    PlusX,
    MinusX,
    PlusY,
    MinusY,
    Up,
    Down,
}

impl Direction {
    pub const ALL: [Direction; 6] = [
        Direction::PlusX,
        Direction::MinusX,
        Direction::PlusY,
        Direction::MinusY,
        Direction::Up,
        Direction::Down,
    ];

    pub fn rank(self) -> usize {
        self as usize
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::PlusX => Direction::MinusX,
            Direction::MinusX => Direction::PlusX,
            Direction::PlusY => Direction::MinusY,
            Direction::MinusY => Direction::PlusY,
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    /// `(dx, dy, dlayer)`.
    pub fn delta(self) -> (i32, i32, i32) {
        match self {
            Direction::PlusX => (1, 0, 0),
            Direction::MinusX => (-1, 0, 0),
            Direction::PlusY => (0, 1, 0),
            Direction::MinusY => (0, -1, 0),
            Direction::Up => (0, 0, 1),
            Direction::Down => (0, 0, -1),
        }
    }

    pub fn between(a: Vertex, b: Vertex) -> Option<Direction> {
        let d = (b.x - a.x, b.y - a.y, b.layer as i64 - a.layer as i64);
        match d {
            (1, 0, 0) => Some(Direction::PlusX),
            (-1, 0, 0) => Some(Direction::MinusX),
            (0, 1, 0) => Some(Direction::PlusY),
            (0, -1, 0) => Some(Direction::MinusY),
            (0, 0, 1) => Some(Direction::Up),
            (0, 0, -1) => Some(Direction::Down),
            _ => None,
        }
    }
}

/// Axis-aligned planar box `[xmin, xmax] x [ymin, ymax]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[i32; 4]", into = "[i32; 4]")]
pub struct PlanarBox {
    pub xmin: i32,
    pub xmax: i32,
    pub ymin: i32,
    pub ymax: i32,
}

impl PlanarBox {
    pub const fn new(xmin: i32, xmax: i32, ymin: i32, ymax: i32) -> Self {
        PlanarBox { xmin, xmax, ymin, ymax }
    }

    /// `B_n = [-n, n]^2`.
    pub const fn centered(n: i32) -> Self {
        PlanarBox::new(-n, n, -n, n)
    }

    pub fn is_empty(&self) -> bool {
        self.xmin > self.xmax || self.ymin > self.ymax
    }

    pub fn width(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.xmax - self.xmin + 1) as usize
        }
    }

    pub fn height(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.ymax - self.ymin + 1) as usize
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    pub fn hull(&self, other: &PlanarBox) -> PlanarBox {
        PlanarBox::new(
            self.xmin.min(other.xmin),
            self.xmax.max(other.xmax),
            self.ymin.min(other.ymin),
            self.ymax.max(other.ymax),
        )
    }
}

impl From<[i32; 4]> for PlanarBox {
    fn from(a: [i32; 4]) -> Self {
        PlanarBox::new(a[0], a[1], a[2], a[3])
    }
}

impl From<PlanarBox> for [i32; 4] {
    fn from(b: PlanarBox) -> Self {
        [b.xmin, b.xmax, b.ymin, b.ymax]
    }
}

/// A finite subset of `Z^2`, stored as a sorted list of cells.
///
/// The lifted set is `cells x {0, ..., k}`; it only materializes against a
/// [`SlabGeometry`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<Point>", into = "Vec<Point>")]
pub struct Region {
    cells: Vec<Point>,
}

impl From<Vec<Point>> for Region {
    fn from(cells: Vec<Point>) -> Self {
        Region::new(cells)
    }
}

impl From<Region> for Vec<Point> {
    fn from(r: Region) -> Self {
        r.cells
    }
}

impl FromIterator<Point> for Region {
    fn from_iter<I: IntoIterator<Item = Point>>(iter: I) -> Self {
        Region::new(iter.into_iter().collect())
    }
}

impl Region {
    pub fn new(mut cells: Vec<Point>) -> Self {
        cells.sort_unstable();
        cells.dedup();
        Region { cells }
    }

    pub fn empty() -> Self {
        Region { cells: Vec::new() }
    }

    pub fn point(p: Point) -> Self {
        Region { cells: alloc::vec![p] }
    }

    pub fn rect(b: PlanarBox) -> Self {
        let mut cells = Vec::with_capacity(b.width() * b.height());
        for x in b.xmin..=b.xmax {
            for y in b.ymin..=b.ymax {
                cells.push(Point::new(x, y));
            }
        }
        Region { cells }
    }

    /// `B_n = [-n, n]^2`.
    pub fn square(n: i32) -> Self {
        Region::rect(PlanarBox::centered(n))
    }

    /// `∂B_n = B_n \ B_{n-1}`; for `n = 0` this is the origin.
    pub fn square_boundary(n: i32) -> Self {
        Region::square(n).difference(&Region::square(n - 1))
    }

    /// Vertical segment `{x} x [a, b]`; empty when `a > b`.
    pub fn segment(x: i32, a: i32, b: i32) -> Self {
        Region { cells: (a..=b).map(|y| Point::new(x, y)).collect() }
    }

    /// Horizontal segment `[a, b] x {y}`; empty when `a > b`.
    pub fn hsegment(y: i32, a: i32, b: i32) -> Self {
        Region { cells: (a..=b).map(|x| Point::new(x, y)).collect() }
    }

    pub fn translate(&self, v: Point) -> Self {
        // A translation preserves the lexicographic order.
        Region { cells: self.cells.iter().map(|c| c.offset(v)).collect() }
    }

    pub fn apply(&self, s: Symmetry) -> Self {
        Region::new(self.cells.iter().map(|&c| s.apply_point(c)).collect())
    }

    pub fn union(&self, other: &Region) -> Self {
        let mut cells = self.cells.clone();
        cells.extend_from_slice(&other.cells);
        Region::new(cells)
    }

    pub fn difference(&self, other: &Region) -> Self {
        Region { cells: self.cells.iter().copied().filter(|c| !other.contains(*c)).collect() }
    }

    pub fn intersection(&self, other: &Region) -> Self {
        Region { cells: self.cells.iter().copied().filter(|c| other.contains(*c)).collect() }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.cells.binary_search(&p).is_ok()
    }

    pub fn is_subset_of(&self, other: &Region) -> bool {
        self.cells.iter().all(|c| other.contains(*c))
    }

    pub fn intersects(&self, other: &Region) -> bool {
        self.cells.iter().any(|c| other.contains(*c))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Point] {
        &self.cells
    }

    pub fn iter(&self) -> impl Iterator<Item = Point> + '_ {
        self.cells.iter().copied()
    }

    pub fn bounding_box(&self) -> Option<PlanarBox> {
        let first = *self.cells.first()?;
        let mut b = PlanarBox::new(first.x, first.x, first.y, first.y);
        for c in &self.cells {
            b.xmin = b.xmin.min(c.x);
            b.xmax = b.xmax.max(c.x);
            b.ymin = b.ymin.min(c.y);
            b.ymax = b.ymax.max(c.y);
        }
        Some(b)
    }

    /// L1 distance between the two point sets (minimum pairwise distance).
    pub fn l1_distance(&self, other: &Region) -> Option<u32> {
        self.cells
            .iter()
            .flat_map(|a| other.cells.iter().map(move |b| a.l1(*b)))
            .min()
    }
}

/// The regions attached to scale `n` in the gluing construction.
///
/// `u_n` and `u_3n` size the central boxes `S_n = B_{u_n}` and `S_3n = B_{u_3n}`;
/// `y` is the vertical offset `y_3n` of the second box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxFamily {
    pub n: i32,
    pub u_n: i32,
    pub u_3n: i32,
    pub alpha_n: i32,
    pub y: i32,
}

impl BoxFamily {
    pub fn b(&self) -> Region {
        Region::square(self.n)
    }

    pub fn boundary(&self) -> Region {
        Region::square_boundary(self.n)
    }

    pub fn s(&self) -> Region {
        Region::square(self.u_n)
    }

    pub fn b3(&self) -> Region {
        Region::square(3 * self.n)
    }

    pub fn s3(&self) -> Region {
        Region::square(self.u_3n)
    }

    fn shift(&self) -> Point {
        Point::new(2 * self.n, self.y)
    }

    /// `B'_n = (2n, y) + B_n`.
    pub fn b_prime(&self) -> Region {
        self.b().translate(self.shift())
    }

    pub fn s_prime(&self) -> Region {
        self.s().translate(self.shift())
    }

    pub fn y_plus(&self) -> Region {
        Region::segment(3 * self.n, self.y + self.alpha_n, self.y + self.n)
    }

    pub fn y_minus(&self) -> Region {
        Region::segment(3 * self.n, self.y - self.n, self.y - self.alpha_n)
    }

    pub fn z(&self) -> Region {
        Region::segment(3 * self.n, self.y - self.alpha_n, self.y + self.alpha_n)
    }

    /// Smallest box holding `B_3n` and `B'_n`.
    pub fn window(&self) -> PlanarBox {
        let m = 3 * self.n;
        PlanarBox::centered(m).hull(&PlanarBox::new(self.n, m, self.y - self.n, self.y + self.n))
    }
}

/// The eight symmetries of `B_n`, acting on the planar coordinates and
/// fixing the layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symmetry {
    Identity,
    Rot90,
    Rot180,
    Rot270,
    /// `x ↦ -x`
    ReflectX,
    /// `y ↦ -y`
    ReflectY,
    /// `(x, y) ↦ (y, x)`
    Transpose,
    /// `(x, y) ↦ (-y, -x)`
    AntiTranspose,
}

impl Symmetry {
    pub const ALL: [Symmetry; 8] = [
        Symmetry::Identity,
        Symmetry::Rot90,
        Symmetry::Rot180,
        Symmetry::Rot270,
        Symmetry::ReflectX,
        Symmetry::ReflectY,
        Symmetry::Transpose,
        Symmetry::AntiTranspose,
    ];

    pub fn apply_point(self, p: Point) -> Point {
        let (x, y) = (p.x, p.y);
        let (a, b) = match self {
            Symmetry::Identity => (x, y),
            Symmetry::Rot90 => (-y, x),
            Symmetry::Rot180 => (-x, -y),
            Symmetry::Rot270 => (y, -x),
            Symmetry::ReflectX => (-x, y),
            Symmetry::ReflectY => (x, -y),
            Symmetry::Transpose => (y, x),
            Symmetry::AntiTranspose => (-y, -x),
        };
        Point::new(a, b)
    }
}

/// Applies a box symmetry to a vertex of `B_n x {0, ..., k}`.
pub fn apply_symmetry(s: Symmetry, n: i32, k: u32, v: Vertex) -> Result<Vertex> {
    if v.x.abs() > n || v.y.abs() > n || v.layer > k {
        return Err(Error::VertexOutsideBox { x: v.x, y: v.y, layer: v.layer });
    }
    let p = s.apply_point(v.column());
    Ok(Vertex::new(p.x, p.y, v.layer))
}

/// The slab `window x {0, ..., k}` with indexed vertices and edges.
///
/// Immutable after construction.
#[derive(Clone, Debug)]
pub struct SlabGeometry {
    k: u32,
    window: PlanarBox,
    width: usize,
    height: usize,
    layers: usize,
    x_edges: usize,
    y_edges: usize,
    z_edges: usize,
    // Per vertex, per direction rank: (neighbor, edge) or NONE.
    adjacency: Vec<[(u32, u32); 6]>,
}

/// The JSON descriptor `{k, window: [xmin, xmax, ymin, ymax]}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometryDescriptor {
    pub k: u32,
    pub window: PlanarBox,
}

impl PartialEq for SlabGeometry {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.window == other.window
    }
}

impl Eq for SlabGeometry {}

pub fn build_geometry(k: u32, window: PlanarBox) -> Result<SlabGeometry> {
    SlabGeometry::new(k, window)
}

impl SlabGeometry {
    pub fn new(k: u32, window: PlanarBox) -> Result<Self> {
        if window.is_empty() {
            return Err(Error::EmptyWindow);
        }
        let width = window.width();
        let height = window.height();
        let layers = k as usize + 1;
        let mut g = SlabGeometry {
            k,
            window,
            width,
            height,
            layers,
            x_edges: (width - 1) * height * layers,
            y_edges: width * (height - 1) * layers,
            z_edges: width * height * k as usize,
            adjacency: Vec::new(),
        };
        let nv = g.vertex_count();
        let mut adjacency = alloc::vec![[(NONE, NONE); 6]; nv];
        for (id, slot) in adjacency.iter_mut().enumerate() {
            let v = g.vertex(id as u32);
            for d in Direction::ALL {
                if let Some(w) = g.step(v, d) {
                    let e = g.edge_from(v, d).expect("neighbor implies edge");
                    slot[d.rank()] = (g.vertex_id_unchecked(w), e);
                }
            }
        }
        g.adjacency = adjacency;
        Ok(g)
    }

    pub fn descriptor(&self) -> GeometryDescriptor {
        GeometryDescriptor { k: self.k, window: self.window }
    }

    pub fn from_descriptor(d: &GeometryDescriptor) -> Result<Self> {
        SlabGeometry::new(d.k, d.window)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn window(&self) -> PlanarBox {
        self.window
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    pub fn vertex_count(&self) -> usize {
        self.cell_count() * self.layers
    }

    pub fn edge_count(&self) -> usize {
        self.x_edges + self.y_edges + self.z_edges
    }

    pub fn horizontal_edge_count(&self) -> usize {
        self.x_edges + self.y_edges
    }

    pub fn cell_index(&self, p: Point) -> Option<usize> {
        if !self.window.contains(p) {
            return None;
        }
        Some((p.x - self.window.xmin) as usize * self.height + (p.y - self.window.ymin) as usize)
    }

    pub fn cell(&self, index: usize) -> Point {
        Point::new(
            self.window.xmin + (index / self.height) as i32,
            self.window.ymin + (index % self.height) as i32,
        )
    }

    pub fn contains_region(&self, r: &Region) -> bool {
        r.iter().all(|c| self.window.contains(c))
    }

    fn contains_vertex(&self, v: Vertex) -> bool {
        self.window.contains(v.column()) && v.layer <= self.k
    }

    fn vertex_id_unchecked(&self, v: Vertex) -> u32 {
        let c = (v.x - self.window.xmin) as usize * self.height + (v.y - self.window.ymin) as usize;
        (c * self.layers + v.layer as usize) as u32
    }

    pub fn vertex_id(&self, v: Vertex) -> Option<VertexId> {
        self.contains_vertex(v).then(|| self.vertex_id_unchecked(v))
    }

    pub fn vertex(&self, id: VertexId) -> Vertex {
        let id = id as usize;
        let layer = (id % self.layers) as u32;
        let p = self.cell(id / self.layers);
        Vertex::new(p.x, p.y, layer)
    }

    /// Ids of the lifted column over `p`; consecutive because the layer varies fastest.
    pub fn column_ids(&self, p: Point) -> core::ops::Range<VertexId> {
        match self.cell_index(p) {
            Some(c) => {
                let start = (c * self.layers) as u32;
                start..start + self.layers as u32
            }
            None => 0..0,
        }
    }

    fn step(&self, v: Vertex, d: Direction) -> Option<Vertex> {
        let (dx, dy, dl) = d.delta();
        let layer = v.layer as i64 + dl as i64;
        if layer < 0 {
            return None;
        }
        let w = Vertex::new(v.x + dx, v.y + dy, layer as u32);
        self.contains_vertex(w).then_some(w)
    }

    fn edge_from(&self, v: Vertex, d: Direction) -> Option<EdgeId> {
        let w = self.step(v, d)?;
        let (lo, axis) = match d {
            Direction::PlusX => (v, 0),
            Direction::MinusX => (w, 0),
            Direction::PlusY => (v, 1),
            Direction::MinusY => (w, 1),
            Direction::Up => (v, 2),
            Direction::Down => (w, 2),
        };
        let xi = (lo.x - self.window.xmin) as usize;
        let yi = (lo.y - self.window.ymin) as usize;
        let l = lo.layer as usize;
        let idx = match axis {
            0 => (xi * self.height + yi) * self.layers + l,
            1 => self.x_edges + (xi * (self.height - 1) + yi) * self.layers + l,
            _ => self.x_edges + self.y_edges + (xi * self.height + yi) * self.k as usize + l,
        };
        Some(idx as EdgeId)
    }

    /// Edge leaving `v` in direction `d`, if both endpoints lie in the window.
    pub fn edge_id(&self, v: Vertex, d: Direction) -> Option<EdgeId> {
        if !self.contains_vertex(v) {
            return None;
        }
        self.edge_from(v, d)
    }

    pub fn edge_between_vertices(&self, a: Vertex, b: Vertex) -> Option<EdgeId> {
        let d = Direction::between(a, b)?;
        self.edge_id(a, d)
    }

    pub fn edge_between(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.adjacency[a as usize].iter().find(|(w, _)| *w == b).map(|(_, e)| *e)
    }

    /// Endpoints `(lower, upper)` of an edge, lower in vertex order.
    pub fn edge_endpoints(&self, e: EdgeId) -> (Vertex, Vertex) {
        let mut i = e as usize;
        let (xi, yi, l, d) = if i < self.x_edges {
            let l = i % self.layers;
            i /= self.layers;
            (i / self.height, i % self.height, l, Direction::PlusX)
        } else if i < self.x_edges + self.y_edges {
            i -= self.x_edges;
            let l = i % self.layers;
            i /= self.layers;
            let hm = self.height - 1;
            (i / hm, i % hm, l, Direction::PlusY)
        } else {
            i -= self.x_edges + self.y_edges;
            let k = self.k as usize;
            let l = i % k;
            i /= k;
            (i / self.height, i % self.height, l, Direction::Up)
        };
        let a = Vertex::new(self.window.xmin + xi as i32, self.window.ymin + yi as i32, l as u32);
        let (dx, dy, dl) = d.delta();
        let b = Vertex::new(a.x + dx, a.y + dy, (a.layer as i32 + dl) as u32);
        (a, b)
    }

    pub fn edge_endpoint_ids(&self, e: EdgeId) -> (VertexId, VertexId) {
        let (a, b) = self.edge_endpoints(e);
        (self.vertex_id_unchecked(a), self.vertex_id_unchecked(b))
    }

    /// Neighbors of `v` in `≺` order: `(direction, neighbor, edge)`.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (Direction, VertexId, EdgeId)> + '_ {
        self.adjacency[v as usize]
            .iter()
            .zip(Direction::ALL)
            .filter(|((w, _), _)| *w != NONE)
            .map(|((w, e), d)| (d, *w, *e))
    }

    #[inline]
    pub(crate) fn adjacency_row(&self, v: VertexId) -> &[(u32, u32); 6] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).count()
    }

    /// Ids of `region x {0..k}` in ascending (`≪`) order; cells outside the window are skipped.
    pub fn lifted_ids(&self, r: &Region) -> Vec<VertexId> {
        let mut out = Vec::with_capacity(r.len() * self.layers);
        for c in r.iter() {
            out.extend(self.column_ids(c));
        }
        out
    }

    /// Edges with both endpoints in the lifted region.
    pub fn induced_edges(&self, r: &Region) -> Vec<EdgeId> {
        let mask = self.cell_mask(r);
        let mut out = Vec::new();
        for c in r.iter() {
            for v in self.column_ids(c) {
                for (d, w, e) in self.neighbors(v) {
                    if matches!(d, Direction::PlusX | Direction::PlusY | Direction::Up)
                        && mask[(w as usize) / self.layers]
                    {
                        out.push(e);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Edges with at least one endpoint in the lifted region.
    pub fn incident_edges(&self, r: &Region) -> Vec<EdgeId> {
        let mut out = Vec::new();
        for c in r.iter() {
            for v in self.column_ids(c) {
                out.extend(self.neighbors(v).map(|(_, _, e)| e));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Membership mask over cell indices.
    pub fn cell_mask(&self, r: &Region) -> Vec<bool> {
        let mut mask = alloc::vec![false; self.cell_count()];
        for c in r.iter() {
            if let Some(i) = self.cell_index(c) {
                mask[i] = true;
            }
        }
        mask
    }

    /// Image of an edge under a box symmetry; `None` when the image leaves the window.
    pub fn map_edge(&self, s: Symmetry, e: EdgeId) -> Option<EdgeId> {
        let (a, b) = self.edge_endpoints(e);
        let pa = s.apply_point(a.column());
        let pb = s.apply_point(b.column());
        let a2 = Vertex::new(pa.x, pa.y, a.layer);
        let b2 = Vertex::new(pb.x, pb.y, b.layer);
        if !self.contains_vertex(a2) || !self.contains_vertex(b2) {
            return None;
        }
        self.edge_between_vertices(a2, b2)
    }
}

/// Compares two vertices in the `≪` order.
pub fn vertex_order(a: Vertex, b: Vertex) -> Ordering {
    a.cmp(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_counts_match_enumeration() {
        let g = build_geometry(0, PlanarBox::centered(1)).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (9, 12));
        let g = build_geometry(1, PlanarBox::centered(1)).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (18, 33));
        assert_eq!(g.horizontal_edge_count(), 24);
        let g = build_geometry(2, PlanarBox::new(0, 0, 0, 0)).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (3, 2));
    }

    #[test]
    fn direct_enumeration_cross_check() {
        // Count adjacent ordered vertex pairs by brute force.
        for k in 0..3u32 {
            let w = PlanarBox::new(-1, 2, 0, 2);
            let g = build_geometry(k, w).unwrap();
            let mut vs = Vec::new();
            for x in w.xmin..=w.xmax {
                for y in w.ymin..=w.ymax {
                    for l in 0..=k {
                        vs.push(Vertex::new(x, y, l));
                    }
                }
            }
            let mut pairs = 0;
            for a in &vs {
                for b in &vs {
                    let d = a.x.abs_diff(b.x) + a.y.abs_diff(b.y) + a.layer.abs_diff(b.layer);
                    if d == 1 && a < b {
                        pairs += 1;
                    }
                }
            }
            assert_eq!(g.edge_count(), pairs);
        }
    }

    #[test]
    fn empty_window_rejected() {
        assert_eq!(build_geometry(1, PlanarBox::new(1, 0, 0, 0)), Err(Error::EmptyWindow));
    }

    #[test]
    fn edge_index_round_trips() {
        let g = build_geometry(2, PlanarBox::new(-2, 1, -1, 2)).unwrap();
        for e in 0..g.edge_count() as u32 {
            let (a, b) = g.edge_endpoints(e);
            assert!(a < b);
            assert_eq!(g.edge_between_vertices(a, b), Some(e));
            assert_eq!(g.edge_between_vertices(b, a), Some(e));
        }
    }

    #[test]
    fn vertex_ids_follow_lexicographic_order() {
        let g = build_geometry(1, PlanarBox::new(-1, 1, -1, 0)).unwrap();
        for id in 1..g.vertex_count() as u32 {
            assert!(g.vertex(id - 1) < g.vertex(id));
            assert_eq!(g.vertex_id(g.vertex(id)), Some(id));
        }
    }

    #[test]
    fn degree_bounds() {
        let g = build_geometry(1, PlanarBox::centered(2)).unwrap();
        let center = g.vertex_id(Vertex::new(0, 0, 0)).unwrap();
        assert_eq!(g.degree(center), 5);
        for v in 0..g.vertex_count() as u32 {
            assert!(g.degree(v) <= 6);
        }
    }

    #[test]
    fn region_constructors() {
        assert_eq!(Region::square_boundary(2).len(), 16);
        for n in 1..6 {
            assert_eq!(Region::square(n).len(), ((2 * n + 1) * (2 * n + 1)) as usize);
            assert_eq!(Region::square_boundary(n).len(), 8 * n as usize);
            assert!(Region::square(n - 1).is_subset_of(&Region::square(n)));
            assert_eq!(
                Region::square_boundary(n),
                Region::square(n).difference(&Region::square(n - 1))
            );
        }
        assert_eq!(
            Region::segment(3, -1, 1).cells(),
            &[Point::new(3, -1), Point::new(3, 0), Point::new(3, 1)]
        );
        assert_eq!(
            Region::square(1).translate(Point::new(2, 5)),
            Region::rect(PlanarBox::new(1, 3, 4, 6))
        );
    }

    #[test]
    fn box_family_segments() {
        let f = BoxFamily { n: 4, u_n: 1, u_3n: 3, alpha_n: 2, y: 3 };
        assert_eq!(f.b().len(), 81);
        assert_eq!(f.z().intersection(&f.y_plus()).len(), 1);
        assert_eq!(f.z().intersection(&f.y_minus()).len(), 1);
        assert!(f.s_prime().is_subset_of(&f.b_prime()));
        let w = Region::rect(f.window());
        assert!(f.b3().is_subset_of(&w) && f.b_prime().is_subset_of(&w));
        assert!(f.z().is_subset_of(&f.b_prime()));
    }

    #[test]
    fn symmetries_have_expected_orders() {
        let v = Vertex::new(2, -1, 1);
        assert_eq!(apply_symmetry(Symmetry::Identity, 3, 1, v).unwrap(), v);
        let once = apply_symmetry(Symmetry::ReflectX, 3, 1, v).unwrap();
        assert_eq!(apply_symmetry(Symmetry::ReflectX, 3, 1, once).unwrap(), v);
        let mut w = v;
        for _ in 0..4 {
            w = apply_symmetry(Symmetry::Rot90, 3, 1, w).unwrap();
        }
        assert_eq!(w, v);
        assert!(apply_symmetry(Symmetry::Rot90, 1, 1, v).is_err());
    }

    #[test]
    fn symmetries_permute_box_edges() {
        let g = build_geometry(1, PlanarBox::centered(2)).unwrap();
        for s in Symmetry::ALL {
            let mut images: Vec<_> =
                (0..g.edge_count() as u32).map(|e| g.map_edge(s, e).unwrap()).collect();
            images.sort_unstable();
            images.dedup();
            assert_eq!(images.len(), g.edge_count());
        }
    }
}
