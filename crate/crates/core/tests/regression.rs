//! Seed-pinned constants. A change here means the sampler, the event
//! definitions or the reduction order changed.

use slabperc_core::estimators::select_u;
use slabperc_core::exec::Sequential;

#[test]
fn select_u_constant() {
    let s = select_u(&Sequential, 1, 12, 0.6, 0.9, 20_000, 2024).unwrap();
    assert_eq!((s.u, s.flagged), (0, false));
    let hits: Vec<u64> = s.estimates.iter().map(|e| e.hits).collect();
    assert_eq!(hits, [19_983, 20_000, 20_000, 20_000, 20_000]);
    assert!(s.u <= 4);
}
