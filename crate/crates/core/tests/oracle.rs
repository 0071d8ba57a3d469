use std::collections::BTreeMap;

use serde::Deserialize;
use slabperc_core::connectivity::{connected, unique_cluster, Scratch};
use slabperc_core::lattice::{build_geometry, PlanarBox, Point, Region, SlabGeometry};
use slabperc_core::oracle::{micro_events, ConfigSpace, RationalP};
use slabperc_core::sampler::{sample, Configuration, SeedSpec};

#[derive(Deserialize)]
struct Frozen {
    k: u32,
    events: Vec<FrozenEvent>,
}

#[derive(Deserialize)]
struct FrozenEvent {
    id: String,
    edges: usize,
    open_count_histogram: Vec<u64>,
    exact: BTreeMap<String, String>,
}

fn frozen() -> Frozen {
    serde_json::from_str(include_str!("../data/frozen_events.json")).unwrap()
}

#[test]
fn micro_events_match_frozen_table() {
    let table = frozen();
    assert_eq!(table.k, 1);
    let events = micro_events();
    assert!(events.len() >= 10);
    assert_eq!(events.len(), table.events.len());
    for ev in &events {
        let f = table.events.iter().find(|f| f.id == ev.id).unwrap_or_else(|| panic!("{} not frozen", ev.id));
        let g = SlabGeometry::from_descriptor(&ev.geometry).unwrap();
        assert_eq!(g.edge_count(), f.edges, "{}", ev.id);
        assert!(f.edges <= 12);
        let compiled = ev.event.compile(&g).unwrap();
        let h = ConfigSpace::full(&g)
            .unwrap()
            .histogram_with(&slabperc_core::exec::Sequential, || Scratch::new(&g), |c, s| compiled.holds(c, s));
        assert_eq!(h.counts, f.open_count_histogram, "{}", ev.id);
        for (p, want) in &f.exact {
            let p: RationalP = p.parse().unwrap();
            assert_eq!(&ev.exact(p).unwrap().ratio_string(), want, "{} at {p:?}", ev.id);
        }
    }
}

#[test]
fn square_crossing_constant() {
    let ev = micro_events().into_iter().find(|e| e.id == "square_left_right").unwrap();
    // 3840 of the 4096 configurations open one of the four crossing edges
    assert_eq!(ev.exact(RationalP::new(1, 2).unwrap()).unwrap().ratio_string(), "15/16");
}

/// Reachability by repeated boolean matrix squaring over the restricted graph.
fn closure(g: &SlabGeometry, c: &Configuration, b: &Region) -> Vec<Vec<bool>> {
    let n = g.vertex_count();
    let inside: Vec<bool> = (0..n as u32).map(|v| b.contains(g.vertex(v).column())).collect();
    let mut r = vec![vec![false; n]; n];
    for (v, row) in r.iter_mut().enumerate() {
        row[v] = inside[v];
    }
    for e in c.open_edges() {
        let (a, bb) = g.edge_endpoint_ids(e);
        if inside[a as usize] && inside[bb as usize] {
            r[a as usize][bb as usize] = true;
            r[bb as usize][a as usize] = true;
        }
    }
    loop {
        let mut next = r.clone();
        for i in 0..n {
            for j in 0..n {
                if !next[i][j] {
                    next[i][j] = (0..n).any(|m| r[i][m] && r[m][j]);
                }
            }
        }
        if next == r {
            return r;
        }
        r = next;
    }
}

fn lifted(g: &SlabGeometry, r: &Region) -> Vec<usize> {
    (0..g.vertex_count()).filter(|&v| r.contains(g.vertex(v as u32).column())).collect()
}

#[test]
fn connectivity_agrees_with_transitive_closure() {
    let g = build_geometry(1, PlanarBox::new(0, 3, 0, 2)).unwrap();
    let b = Region::rect(PlanarBox::new(0, 3, 0, 2)).difference(&Region::point(Point::new(1, 1)));
    let x = Region::segment(0, 0, 2);
    let y = Region::segment(3, 0, 2);
    for stream in 0..300 {
        let p = 0.3 + 0.4 * (stream % 5) as f64 / 4.0;
        let c = sample(&g, p, SeedSpec::new(21, stream)).unwrap();
        let r = closure(&g, &c, &b);
        let (xs, ys) = (lifted(&g, &x), lifted(&g, &y));
        let want = xs.iter().any(|&a| ys.iter().any(|&bb| r[a][bb]));
        assert_eq!(connected(&g, &c, &x, &y, &b).unwrap(), want);
        // distinct meeting clusters: representatives are the smallest member
        let mut reps: Vec<usize> = xs
            .iter()
            .filter(|&&a| ys.iter().any(|&bb| r[a][bb]))
            .map(|&a| (0..g.vertex_count()).find(|&m| r[a][m]).unwrap())
            .collect();
        reps.sort();
        reps.dedup();
        assert_eq!(unique_cluster(&g, &c, &x, &y, &b).unwrap(), reps.len() == 1);
    }
}
