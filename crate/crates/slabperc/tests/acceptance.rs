//! One line per acceptance criterion; exits non-zero if any fails.

use std::time::Instant;

use slabperc::cli::{self, Command, GlueArgs, Window};
use slabperc::exec::Rayon;
use slabperc_core::estimators::{
    alpha_from_table, boundary_arm_suite, estimate_event, estimate_pc, grid, select_alpha, select_u, select_y, u_from_estimates,
};
use slabperc_core::gluing::{audit, feasible_r, GlueInstance, CHECKS};
use slabperc_core::lattice::SlabGeometry;
use slabperc_core::oracle::{micro_events, RationalP};
use slabperc_core::renorm::{
    block_seed_radius, certify, dependence_check, good_edge, good_geometry, peierls_eta, GoodEdgeSpec, Verdict,
};
use slabperc_core::sampler::{uniform_at, Configuration, SeedSpec};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn pc_recovery(exec: &Rayon) -> Outcome {
    let g = grid(0.45, 0.55, 0.005).map_err(err)?;
    let est = estimate_pc(exec, 0, &[16, 32], &g, 20_000, 7).map_err(err)?;
    ensure((0.49..=0.51).contains(&est.estimate), || format!("estimate {} outside [0.49, 0.51]", est.estimate))?;
    Ok(format!("pc(0) = {:.4}, 95% CI [{:.4}, {:.4}]", est.estimate, est.ci_low, est.ci_high))
}

fn oracle_equivalence(exec: &Rayon) -> Outcome {
    let events = micro_events();
    ensure(events.len() >= 10, || format!("only {} micro-events", events.len()))?;
    let n = 1_000_000u64;
    let mut worst = 0.0f64;
    for (i, ev) in events.iter().enumerate() {
        let g = SlabGeometry::from_descriptor(&ev.geometry).map_err(err)?;
        ensure(ev.geometry.k == 1 && g.edge_count() <= 12, || format!("{} is not a small k=1 window", ev.id))?;
        let compiled = ev.event.compile(&g).map_err(err)?;
        for (j, p) in [RationalP::new(1, 2).unwrap(), RationalP::new(3, 5).unwrap()].into_iter().enumerate() {
            let exact = ev.exact(p).map_err(err)?.to_f64();
            let est = estimate_event(exec, &g, |c, s| compiled.holds(c, s), p.to_f64(), n, 100 + 2 * i as u64 + j as u64)
                .map_err(err)?;
            let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
            let dev = (est.p_hat - exact).abs();
            let z = if sigma == 0.0 { if dev == 0.0 { 0.0 } else { f64::INFINITY } } else { dev / sigma };
            ensure(z <= 4.0, || format!("{} at p={:?}: |{} - {}| = {z:.2} sigma", ev.id, p, est.p_hat, exact))?;
            worst = worst.max(z);
        }
    }
    Ok(format!("{} events x 2 values of p at N=1e6, worst deviation {worst:.2} sigma", events.len()))
}

fn sqrt_trick(exec: &Rayon) -> Outcome {
    let su = select_u(exec, 1, 8, 0.55, 0.9, 100_000, 11).map_err(err)?;
    let suite = boundary_arm_suite(exec, 1, 8, su.u, 0.55, 100_000, 11).map_err(err)?;
    ensure(suite.events.len() == 8 && suite.check.m == 8, || "suite is not the eight boundary halves".into())?;
    let c = &suite.check;
    ensure(c.holds, || format!("max {} < bound {} - slack {}", c.max_hat, c.bound, c.slack))?;
    Ok(format!("u={} max {:.5} >= 1-(1-{:.5})^(1/8) - {:.5} = {:.5}", su.u, c.max_hat, c.union_hat, c.slack, c.bound - c.slack))
}

fn synthetic(seed: u64, i: u64, len: usize) -> Vec<f64> {
    // tenths, so that ties and empty sets occur
    (0..len).map(|e| (uniform_at(SeedSpec::new(seed, i), e as u32) * 10.0).floor() / 10.0).collect()
}

fn sequence_machinery(exec: &Rayon) -> Outcome {
    let mut tables = 0;
    let mut empty = 0;
    for t in 0..40u64 {
        let n = 2 + (t % 11) as usize;
        let (left, mut right) = (synthetic(1, t, n - 1), synthetic(2, t, n - 1));
        if t % 5 == 0 {
            right = left.iter().map(|l| l * 0.5).collect();
        }
        let want = (1..n).filter(|&a| left[a - 1] < right[a - 1]).max();
        let got = alpha_from_table(&left, &right);
        let expect = match want {
            Some(a) => (a as i32, false),
            None => (1, true),
        };
        ensure(got == expect, || format!("alpha table {t}: got {got:?}, want {expect:?}"))?;
        tables += 1;
        empty += want.is_none() as usize;
    }
    ensure(empty >= 1, || "no empty-set table".into())?;
    for t in 0..40u64 {
        let est = synthetic(3, t, 1 + (t % 6) as usize);
        let target = 0.5 + 0.1 * (t % 5) as f64;
        let (u, flagged) = u_from_estimates(&est, target);
        let reach = est.iter().position(|&e| e >= target);
        ensure(flagged == reach.is_none(), || format!("u table {t}: flag {flagged} but reach {reach:?}"))?;
        ensure(reach.is_none_or(|r| r == u), || format!("u table {t}: u={u}, first reach {reach:?}"))?;
        if flagged {
            ensure(est.iter().all(|&e| e <= est[u]), || format!("u table {t}: fallback is not the best u"))?;
        }
    }
    // the same rules on real estimates, including a forced fallback
    for (p, target) in [(0.55, 0.9), (0.2, 0.99)] {
        let su = select_u(exec, 1, 8, p, target, 20_000, 5).map_err(err)?;
        ensure(su.flagged == su.estimates.iter().all(|e| e.p_hat < target), || format!("select_u flag at p={p}"))?;
    }
    let su = select_u(exec, 1, 8, 0.55, 0.9, 100_000, 5).map_err(err)?;
    let sa = select_alpha(exec, 1, 8, su.u, 0.55, 100_000, 5).map_err(err)?;
    let lv: Vec<f64> = sa.left.iter().map(|e| e.p_hat).collect();
    let rv: Vec<f64> = sa.right.iter().map(|e| e.p_hat).collect();
    let want = (1..8usize).filter(|&a| lv[a - 1] < rv[a - 1]).max().map_or((1, true), |a| (a as i32, false));
    ensure((sa.alpha, sa.flagged) == want, || format!("select_alpha {:?} vs {:?}", (sa.alpha, sa.flagged), want))?;
    let sy = select_y(exec, 1, 8, su.u, sa.alpha, 0.55, 100_000, 5).map_err(err)?;
    ensure(sy.check.m == 2 && sy.check.holds, || format!("select_y square-root check {:?}", sy.check))?;
    Ok(format!(
        "{tables} alpha tables ({empty} empty), 40 u tables, real run u={} alpha={} y={}",
        su.u, sa.alpha, sy.y
    ))
}

fn gluing_audit(exec: &Rayon) -> Outcome {
    let p = RationalP::new(1, 2).unwrap();
    let mut parts = Vec::new();
    for inst in [GlueInstance::micro(1), GlueInstance::ball(1, 2)] {
        let t = Instant::now();
        let r = audit(exec, &inst, p).map_err(err)?;
        ensure(r.configurations == 1u64 << r.free_edges, || format!("{}: not exhaustive", inst.name))?;
        ensure(r.in_x > 0, || format!("{}: the two-arm set is empty", inst.name))?;
        for name in CHECKS {
            let tally = r.tally(name).ok_or_else(|| format!("{}: missing check {name}", inst.name))?;
            ensure(tally.failed == 0, || format!("{}: {name} failed {} times", inst.name, tally.failed))?;
        }
        ensure(r.violations == 0, || format!("{}: {} violations", inst.name, r.violations))?;
        for l in &r.counting {
            ensure(l.holds_tight, || format!("{}: counting bound fails for {} at s={}, t={}", inst.name, l.map, l.s_tight, l.t))?;
        }
        let maps: Vec<String> = r.counting.iter().map(|l| format!("{} s={} t={}", l.map, l.s_tight, l.t)).collect();
        parts.push(format!(
            "{}: 2^{} configs, |X|={}, {} in {:.0?}",
            inst.name,
            r.free_edges,
            r.in_x,
            maps.join(", "),
            t.elapsed()
        ));
    }
    Ok(format!("zero violations; {}", parts.join("; ")))
}

fn feasible_radius() -> Outcome {
    let (r, reports) = feasible_r(1, 2).map_err(err)?;
    let rep = reports.last().ok_or("no report")?;
    ensure(r == Some(2) && rep.holds(), || format!("R=2 fails: {rep:?}"))?;
    Ok(format!("k=1 R=2: {} cases, 0 flow failures, 0 linkage failures", rep.cases))
}

fn renormalization(exec: &Rayon) -> Outcome {
    let pe = peierls_eta();
    ensure(pe.certified(), || format!("series bound {} >= 1", pe.derivation.series_bound))?;
    let (u3n, flagged) = block_seed_radius(exec, 1, 4, 0.6, 0.9, 20_000, 2024).map_err(err)?;
    let spec = GoodEdgeSpec::canonical(4, u3n).map_err(err)?;
    let g = good_geometry(1, &spec).map_err(err)?;
    ensure(good_edge(&g, &Configuration::all_open(g.edge_count()), spec).map_err(err)?, || "p=1 is not good".into())?;
    let dep = dependence_check(4, u3n, 7).map_err(err)?;
    ensure(dep.violations == 0 && dep.far_pairs > 0, || format!("dependence check {dep:?}"))?;
    let c = certify(exec, 1, 4, u3n, 0.6, 100_000, 2024).map_err(err)?;
    let consistent = (c.verdict == Verdict::Pass) == (c.ci[0] >= 1.0 - c.eta);
    ensure(consistent, || format!("verdict {:?} inconsistent with ci {:?}", c.verdict, c.ci))?;
    Ok(format!(
        "series bound {:.3e} (eta = 10^{:.1}), u3n={u3n}{}, far houses disjoint, estimate {:.5} CI [{:.5}, {:.5}], verdict {:?}",
        pe.derivation.series_bound,
        pe.log10_eta,
        if flagged { " (flagged)" } else { "" },
        c.estimate.p_hat,
        c.ci[0],
        c.ci[1],
        c.verdict
    ))
}

fn small_runs() -> Vec<Vec<&'static str>> {
    vec![
        vec!["sample", "--k", "1", "--n", "3", "--p", "0.5", "--count", "4", "--seed", "3"],
        vec!["crossing", "--k", "1", "--n", "6", "--u", "1", "--beta", "6", "--p", "0.5,0.55,0.6", "--samples", "3000", "--seed", "7"],
        vec!["sequences", "--k", "1", "--scales", "3,6", "--p", "0.55", "--samples", "2000", "--seed", "7"],
        vec!["triple", "--k", "1", "--n", "2", "--p", "0.6", "--samples", "2000", "--seed", "7"],
        vec!["pc", "--k", "0", "--scales", "4,8", "--grid", "0.4:0.6:0.05", "--samples", "2000", "--seed", "7"],
        vec!["renorm-cert", "--k", "1", "--n", "1", "--p", "0.6", "--samples", "2000", "--seed", "7"],
        vec!["oracle-freeze"],
    ]
}

fn determinism() -> Outcome {
    let one = Rayon::new(1).map_err(err)?;
    let eight = Rayon::new(8).map_err(err)?;
    let dir = tempfile::tempdir().map_err(err)?;
    let mut commands: Vec<Command> = Vec::new();
    for argv in small_runs() {
        let argv: Vec<&str> = std::iter::once("slabperc").chain(argv).collect();
        let cli = <cli::Cli as clap::Parser>::try_parse_from(&argv).map_err(err)?;
        commands.push(cli.command);
    }
    commands.push(Command::GlueAudit(GlueArgs { k: 1, window: Window::Tiny, p: RationalP::new(1, 2).unwrap(), radius: 2 }));
    let mut files = 0;
    for (i, cmd) in commands.iter().enumerate() {
        let a = dir.path().join(format!("run{i}"));
        let b = dir.path().join(format!("replay{i}"));
        cli::execute(&one, cmd, &a).map_err(err)?;
        cli::replay(&eight, &a.join("manifest.json"), &b).map_err(|e| format!("{cmd:?}: {e}"))?;
        files += slabperc::manifest::RunManifest::read(&a.join("manifest.json")).map_err(err)?.outputs.len();
    }
    Ok(format!("{} manifests, {files} output files identical at 1 and 8 workers", commands.len()))
}

fn main() {
    let exec = Rayon::available().expect("worker pool");
    let criteria: Vec<Criterion> = vec![
        ("pc(0) recovery", Box::new(|| pc_recovery(&exec))),
        ("oracle equivalence", Box::new(|| oracle_equivalence(&exec))),
        ("square-root trick suite", Box::new(|| sqrt_trick(&exec))),
        ("sequence machinery", Box::new(|| sequence_machinery(&exec))),
        ("gluing exhaustive audit", Box::new(|| gluing_audit(&exec))),
        ("feasible R", Box::new(feasible_radius)),
        ("renormalization plumbing", Box::new(|| renormalization(&exec))),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {} [{name}]: {tag} ({:.1?}) {detail}", i + 1, t.elapsed());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
