use std::cmp::Ordering;

use proptest::prelude::*;
use slabperc_core::connectivity::connected;
use slabperc_core::gluing::{brute_min_path, compare_paths, min_path, Path};
use slabperc_core::lattice::{apply_symmetry, build_geometry, Direction, PlanarBox, Point, Region, SlabGeometry, Symmetry, Vertex};
use slabperc_core::sampler::{sample, Configuration, SeedSpec};
use slabperc_core::stats::wilson;

/// A self-avoiding walk on `[-2, 2]^2 x {0, 1}` steered by `moves`.
fn walk(start: (i32, i32, u32), moves: &[u8]) -> Path {
    let mut v = vec![Vertex::new(start.0, start.1, start.2)];
    for &m in moves {
        let cur = *v.last().unwrap();
        let d = Direction::ALL[m as usize % 6];
        let (dx, dy, dl) = d.delta();
        let next = Vertex::new(cur.x + dx, cur.y + dy, (cur.layer as i32 + dl) as u32);
        let ok = cur.layer as i32 + dl >= 0 && next.layer <= 1 && next.x.abs() <= 2 && next.y.abs() <= 2;
        if ok && !v.contains(&next) {
            v.push(next);
        }
    }
    Path(v)
}

fn path_strategy() -> impl Strategy<Value = Path> {
    ((-1i32..=1, -1i32..=1, 0u32..=1), prop::collection::vec(0u8..6, 0..8)).prop_map(|(s, m)| walk(s, &m))
}

fn geo() -> SlabGeometry {
    build_geometry(1, PlanarBox::centered(2)).unwrap()
}

fn map_config(g: &SlabGeometry, c: &Configuration, s: Symmetry) -> Configuration {
    let mut out = Configuration::all_closed(g.edge_count());
    for e in c.open_edges() {
        let (a, b) = g.edge_endpoints(e);
        let (a, b) = (apply_symmetry(s, 2, 1, a).unwrap(), apply_symmetry(s, 2, 1, b).unwrap());
        out.set(g.edge_between_vertices(a, b).unwrap(), true);
    }
    out
}

fn map_region(r: &Region, s: Symmetry) -> Region {
    Region::new(r.iter().map(|p| s.apply_point(p)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn path_order_is_total(a in path_strategy(), b in path_strategy(), c in path_strategy()) {
        prop_assert_eq!(compare_paths(&a, &a), Ordering::Equal);
        prop_assert_eq!(compare_paths(&a, &b), compare_paths(&b, &a).reverse());
        prop_assert_eq!(compare_paths(&a, &b) == Ordering::Equal, a == b);
        if compare_paths(&a, &b) != Ordering::Greater && compare_paths(&b, &c) != Ordering::Greater {
            prop_assert_ne!(compare_paths(&a, &c), Ordering::Greater);
        }
    }

    #[test]
    fn prefixes_come_first(a in path_strategy()) {
        for cut in 1..a.len() {
            let head = Path(a.vertices()[..cut].to_vec());
            prop_assert_eq!(compare_paths(&head, &a), Ordering::Less);
        }
    }

    #[test]
    fn connection_is_increasing(seed in any::<u64>(), p in 0.1f64..0.9, extra in prop::collection::vec(any::<u32>(), 1..10)) {
        let g = geo();
        let c = sample(&g, p, SeedSpec::new(seed, 0)).unwrap();
        let mut d = c.clone();
        for e in extra {
            d.set(e % g.edge_count() as u32, true);
        }
        let b = Region::square(2);
        let (x, y) = (Region::segment(-2, -2, 2), Region::segment(2, -2, 2));
        if connected(&g, &c, &x, &y, &b).unwrap() {
            prop_assert!(connected(&g, &d, &x, &y, &b).unwrap());
        }
    }

    #[test]
    fn connection_is_symmetric_under_box_maps(seed in any::<u64>(), p in 0.2f64..0.8, s in 0usize..8) {
        let g = geo();
        let s = Symmetry::ALL[s];
        let c = sample(&g, p, SeedSpec::new(seed, 1)).unwrap();
        let mc = map_config(&g, &c, s);
        let b = Region::square(2).difference(&Region::point(Point::new(1, 0)));
        let (x, y) = (Region::point(Point::new(-2, -1)), Region::hsegment(2, 0, 2));
        prop_assert_eq!(
            connected(&g, &c, &x, &y, &b).unwrap(),
            connected(&g, &mc, &map_region(&x, s), &map_region(&y, s), &map_region(&b, s)).unwrap()
        );
    }

    #[test]
    fn hex_round_trip(seed in any::<u64>(), p in 0.0f64..=1.0) {
        let g = geo();
        let c = sample(&g, p, SeedSpec::new(seed, 2)).unwrap();
        prop_assert_eq!(Configuration::from_hex(&c.to_hex(), g.edge_count()).unwrap(), c);
    }

    #[test]
    fn wilson_brackets_the_point_estimate(n in 1u64..100_000, frac in 0.0f64..=1.0) {
        let hits = ((n as f64) * frac) as u64;
        let (lo, hi) = wilson(hits, n);
        let ph = hits as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= ph + 1e-12 && ph <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn min_path_matches_enumeration(seed in any::<u64>(), p in 0.3f64..0.8) {
        let g = build_geometry(1, PlanarBox::new(0, 2, 0, 1)).unwrap();
        let c = sample(&g, p, SeedSpec::new(seed, 3)).unwrap();
        let b = Region::rect(PlanarBox::new(0, 2, 0, 1));
        let (x, y) = (Region::segment(0, 0, 1), Region::segment(2, 0, 1));
        prop_assert_eq!(min_path(&g, &c, &x, &y, &b), brute_min_path(&g, &c, &x, &y, &b));
    }
}
