//! Subcommands and the exit-code contract: 0 ok, 2 flagged result, 1 error,
//! 64 usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use slabperc_core::estimators::{
    build_sequences, estimate_crossing, estimate_pc, estimate_triple, grid, alpha_growth_scan, CrossingSpec,
};
use slabperc_core::gluing::{audit, AuditReport, GlueInstance};
use slabperc_core::lattice::{PlanarBox, SlabGeometry};
use slabperc_core::oracle::{micro_events, ConfigSpace, RationalP};
use slabperc_core::renorm::{block_seed_radius, certify, dependence_check, Certificate, DependenceCheck};
use slabperc_core::sampler::{sample, SeedSpec};

use crate::exec::Rayon;
use crate::io::{csv, fmt_sig, json_bytes, ConfigDump, CsvRow};
use crate::manifest::{self, RunManifest};
use crate::plot::{line_chart, Series};
use crate::Error;

pub const SEED_ENV: &str = "SLABPERC_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FLAGGED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "slabperc", version, about = "Bond percolation on slabs Z^2 x {0..k}")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism. Outputs do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory (for replay: where the rerun goes, default <manifest dir>/replay).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", content = "params", rename_all = "kebab-case")]
pub enum Command {
    /// Dump sampled configurations as hex with provenance.
    Sample(SampleArgs),
    /// Estimate S_u <-> {n} x [alpha, beta] inside B_n.
    Crossing(CrossingArgs),
    /// Build u_n, alpha_n, y_n for a list of scales.
    Sequences(SequenceArgs),
    /// Estimate the triple event at scale n from the sequences at n and 3n.
    Triple(TripleArgs),
    /// Locate p_c from crossing curves at successive scales.
    Pc(PcArgs),
    /// Exhaustive audit of the path surgeries.
    GlueAudit(GlueArgs),
    /// Good-edge estimate against the Peierls threshold.
    RenormCert(RenormArgs),
    /// Recompute the exact micro-event table.
    OracleFreeze(FreezeArgs),
    /// Rerun a manifest and compare every output byte.
    Replay(ReplayArgs),
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Window B_n.
    #[arg(long, default_value_t = 4)]
    pub n: i32,
    #[arg(long)]
    pub p: f64,
    /// Streams 0..count.
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub n: i32,
    #[arg(long, default_value_t = 0)]
    pub u: i32,
    #[arg(long, default_value_t = 0)]
    pub alpha: i32,
    #[arg(long)]
    pub beta: i32,
    /// One or more comma-separated probabilities; several also produce a plot.
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    #[arg(long)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long, value_delimiter = ',', required = true)]
    pub scales: Vec<i32>,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0.9)]
    pub target: f64,
    #[arg(long)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub n: i32,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0.9)]
    pub target: f64,
    #[arg(long)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long, value_delimiter = ',', required = true)]
    pub scales: Vec<i32>,
    /// lo:hi:step
    #[arg(long)]
    pub grid: String,
    #[arg(long)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    /// The cut instance plus the ball instance.
    Micro,
    Ball,
    /// Reduced instances for quick checks.
    Tiny,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlueArgs {
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, value_enum, default_value_t = Window::Micro)]
    pub window: Window,
    /// Rational a/b.
    #[arg(long, default_value = "1/2")]
    pub p: RationalP,
    #[arg(long, default_value_t = 2)]
    pub radius: u32,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenormArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub n: i32,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Seed radius at the block scale; selected from the uniqueness scan at 3n if absent.
    #[arg(long)]
    pub u3n: Option<i32>,
    #[arg(long, default_value_t = 0.9)]
    pub target: f64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreezeArgs {
    #[arg(long, value_delimiter = ',', default_value = "1/2,1/3,3/5")]
    pub p: Vec<RationalP>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

impl Command {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Sample(a) => Some(a.seed),
            Command::Crossing(a) => Some(a.seed),
            Command::Sequences(a) => Some(a.seed),
            Command::Triple(a) => Some(a.seed),
            Command::Pc(a) => Some(a.seed),
            Command::RenormCert(a) => Some(a.seed),
            Command::GlueAudit(_) | Command::OracleFreeze(_) | Command::Replay(_) => None,
        }
    }

    fn set_seed(&mut self, seed: u64) {
        match self {
            Command::Sample(a) => a.seed = seed,
            Command::Crossing(a) => a.seed = seed,
            Command::Sequences(a) => a.seed = seed,
            Command::Triple(a) => a.seed = seed,
            Command::Pc(a) => a.seed = seed,
            Command::RenormCert(a) => a.seed = seed,
            Command::GlueAudit(_) | Command::OracleFreeze(_) | Command::Replay(_) => {}
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Flagged,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => EXIT_OK,
            Status::Flagged => EXIT_FLAGGED,
        }
    }

    fn flag_if(cond: bool) -> Status {
        if cond {
            Status::Flagged
        } else {
            Status::Ok
        }
    }
}

/// Output files of one run, written as they are produced.
struct Outputs {
    dir: PathBuf,
    names: Vec<String>,
}

impl Outputs {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), Error> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.names.push(name.into());
        Ok(())
    }
}

/// Runs the CLI and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(s) => s.code(),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: Cli) -> Result<Status, Error> {
    let exec = match cli.workers {
        Some(w) => Rayon::new(w)?,
        None => Rayon::available()?,
    };
    let mut command = cli.command;
    if let Command::Replay(r) = &command {
        let out = cli.out.unwrap_or_else(|| r.manifest.parent().unwrap_or(Path::new(".")).join("replay"));
        return replay(&exec, &r.manifest, &out);
    }
    if let Ok(v) = std::env::var(SEED_ENV) {
        let seed = v.trim().parse().map_err(|_| Error::Invalid(format!("{SEED_ENV}={v:?} is not a u64")))?;
        command.set_seed(seed);
    }
    execute(&exec, &command, &cli.out.unwrap_or_else(|| PathBuf::from("out")))
}

/// Runs one subcommand into `out` and writes its manifest last.
pub fn execute(exec: &Rayon, command: &Command, out: &Path) -> Result<Status, Error> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let start = Instant::now();
    let mut files = Outputs { dir: out.to_path_buf(), names: Vec::new() };
    let status = match command {
        Command::Sample(a) => run_sample(a, &mut files)?,
        Command::Crossing(a) => run_crossing(exec, a, &mut files)?,
        Command::Sequences(a) => run_sequences(exec, a, &mut files)?,
        Command::Triple(a) => run_triple(exec, a, &mut files)?,
        Command::Pc(a) => run_pc(exec, a, &mut files)?,
        Command::GlueAudit(a) => run_glue(exec, a, &mut files)?,
        Command::RenormCert(a) => run_renorm(exec, a, &mut files)?,
        Command::OracleFreeze(a) => run_freeze(exec, a, &mut files)?,
        Command::Replay(_) => return Err(Error::Invalid("replay cannot be nested".into())),
    };
    let m = RunManifest::new(command, files.names.clone(), start.elapsed().as_millis() as u64)?;
    files.write(manifest::FILE, &json_bytes(&m)?)?;
    Ok(status)
}

/// Reruns `manifest` into `out` and compares outputs byte for byte.
pub fn replay(exec: &Rayon, manifest_path: &Path, out: &Path) -> Result<Status, Error> {
    let recorded = RunManifest::read(manifest_path)?;
    let command = recorded.command()?;
    let status = execute(exec, &command, out)?;
    let src = manifest_path.parent().unwrap_or(Path::new("."));
    let mut differ = Vec::new();
    for name in &recorded.outputs {
        let a = std::fs::read(src.join(name)).map_err(|e| Error::io(&src.join(name), e))?;
        let b = std::fs::read(out.join(name)).ok();
        if b.as_deref() != Some(&a[..]) {
            differ.push(name.clone());
        }
    }
    let fresh = RunManifest::read(&out.join(manifest::FILE))?;
    if !fresh.same_run(&recorded) {
        differ.push(manifest::FILE.into());
    }
    if differ.is_empty() {
        Ok(status)
    } else {
        Err(Error::ReplayMismatch(differ))
    }
}

fn run_sample(a: &SampleArgs, files: &mut Outputs) -> Result<Status, Error> {
    let g = SlabGeometry::new(a.k, PlanarBox::centered(a.n))?;
    let dumps = (0..a.count)
        .map(|s| Ok(ConfigDump::new(g.descriptor(), &sample(&g, a.p, SeedSpec::new(a.seed, s))?)))
        .collect::<Result<Vec<_>, Error>>()?;
    files.write("configs.json", &json_bytes(&dumps)?)?;
    Ok(Status::Ok)
}

fn run_crossing(exec: &Rayon, a: &CrossingArgs, files: &mut Outputs) -> Result<Status, Error> {
    let spec = CrossingSpec::new(a.n, a.alpha, a.beta)?;
    let ests = a
        .p
        .iter()
        .map(|&p| estimate_crossing(exec, a.k, spec, a.u, p, a.samples, a.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<CsvRow> = a
        .p
        .iter()
        .zip(&ests)
        .map(|(&p, e)| CsvRow {
            event_id: "crossing",
            k: a.k,
            n: a.n,
            u: Some(a.u),
            alpha: Some(a.alpha),
            beta: Some(a.beta),
            p,
            estimate: e,
        })
        .collect();
    files.write("crossing.csv", csv(&rows).as_bytes())?;
    if a.p.len() > 1 {
        let s = Series { name: format!("n={}", a.n), points: a.p.iter().zip(&ests).map(|(&p, e)| (p, e.p_hat)).collect() };
        let title = format!("S_{} to {{{}}} x [{}, {}] in B_{}", a.u, a.n, a.alpha, a.beta, a.n);
        files.write("crossing.svg", line_chart(&title, "p", "probability", &[s]).as_bytes())?;
    }
    Ok(Status::Ok)
}

fn sequence_rows<'a>(table: &'a slabperc_core::estimators::SequenceTable) -> Vec<CsvRow<'a>> {
    let (k, p) = (table.k, table.p);
    let row = |event_id, n, u, alpha, beta, estimate| CsvRow { event_id, k, n, u, alpha, beta, p, estimate };
    let mut rows = Vec::new();
    for r in &table.rows {
        let (n, u) = (r.n, r.u.u);
        for (i, e) in r.u.estimates.iter().enumerate() {
            rows.push(row("unique_crossing", n, Some(i as i32), None, None, e));
        }
        for (i, (l, rt)) in r.alpha.left.iter().zip(&r.alpha.right).enumerate() {
            let a = i as i32 + 1;
            rows.push(row("arm", n, Some(u), Some(0), Some(a - 1), l));
            rows.push(row("arm", n, Some(u), Some(a), Some(n), rt));
        }
        let q = r.alpha.alpha / 4;
        for (c, e) in r.y.candidates.iter().zip(&r.y.estimates) {
            rows.push(row("arm_y_candidate", n, Some(u), Some(c - q), Some(c + q), e));
        }
        rows.push(row("arm_y_union", n, Some(u), None, None, &r.y.union));
        rows.push(row("arm", n, Some(u), Some(0), Some(r.alpha.alpha), &r.y.full));
    }
    rows
}

fn sequences_flagged(table: &slabperc_core::estimators::SequenceTable) -> bool {
    table.rows.iter().any(|r| r.u.flagged || r.alpha.flagged)
}

fn run_sequences(exec: &Rayon, a: &SequenceArgs, files: &mut Outputs) -> Result<Status, Error> {
    let table = build_sequences(exec, a.k, &a.scales, a.p, a.target, a.samples, a.seed)?;
    #[derive(Serialize)]
    struct Out<'a> {
        table: &'a slabperc_core::estimators::SequenceTable,
        scan: Vec<slabperc_core::estimators::ScanRow>,
    }
    files.write("sequences.json", &json_bytes(&Out { table: &table, scan: alpha_growth_scan(&table) })?)?;
    files.write("sequences.csv", csv(&sequence_rows(&table)).as_bytes())?;
    let pick = |f: &dyn Fn(&slabperc_core::estimators::SequenceRow) -> f64| -> Vec<(f64, f64)> {
        table.rows.iter().map(|r| (r.n as f64, f(r))).collect()
    };
    let series = [
        Series { name: "unique crossing at u_n".into(), points: pick(&|r| r.u.estimates[r.u.u as usize].p_hat) },
        Series { name: "E_n(0, alpha_n)".into(), points: pick(&|r| r.y.full.p_hat) },
    ];
    let title = format!("k={} p={}", a.k, fmt_sig(a.p, 9));
    files.write("sequences.svg", line_chart(&title, "n", "probability", &series).as_bytes())?;
    Ok(Status::flag_if(sequences_flagged(&table)))
}

fn run_triple(exec: &Rayon, a: &TripleArgs, files: &mut Outputs) -> Result<Status, Error> {
    let table = build_sequences(exec, a.k, &[a.n, 3 * a.n], a.p, a.target, a.samples, a.seed)?;
    let inputs = table.triple_inputs(a.n).ok_or_else(|| Error::Invalid("sequence table lacks n or 3n".into()))?;
    let triple = estimate_triple(exec, a.k, inputs, a.p, a.samples, a.seed)?;
    #[derive(Serialize)]
    struct Out<'a> {
        sequences: &'a slabperc_core::estimators::SequenceTable,
        triple: &'a slabperc_core::estimators::Triple,
    }
    files.write("triple.json", &json_bytes(&Out { sequences: &table, triple: &triple })?)?;
    Ok(Status::flag_if(sequences_flagged(&table) || !triple.feasible))
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::Invalid(format!("grid must be lo:hi:step, got {s:?}")))?;
    match parts[..] {
        [lo, hi, step] => Ok(grid(lo, hi, step)?),
        _ => Err(Error::Invalid(format!("grid must be lo:hi:step, got {s:?}"))),
    }
}

fn run_pc(exec: &Rayon, a: &PcArgs, files: &mut Outputs) -> Result<Status, Error> {
    let g = parse_grid(&a.grid)?;
    let est = estimate_pc(exec, a.k, &a.scales, &g, a.samples, a.seed)?;
    files.write("pc.json", &json_bytes(&est)?)?;
    let mut table = String::from("l,p,hits,N,p_hat\n");
    for c in &est.curves {
        for ((p, h), ph) in g.iter().zip(&c.hits).zip(&c.p_hat) {
            table.push_str(&format!("{},{},{},{},{}\n", c.l, fmt_sig(*p, 9), h, est.n_samples, fmt_sig(*ph, 9)));
        }
    }
    files.write("pc.csv", table.as_bytes())?;
    let series: Vec<Series> = est
        .curves
        .iter()
        .map(|c| Series { name: format!("L={}", c.l), points: g.iter().copied().zip(c.p_hat.iter().copied()).collect() })
        .collect();
    let title = format!("crossing [0,2L]x[0,L], k={}", a.k);
    files.write("pc.svg", line_chart(&title, "p", "crossing probability", &series).as_bytes())?;
    Ok(Status::flag_if(est.flagged))
}

pub fn glue_instances(window: Window, k: u32, radius: u32) -> Vec<GlueInstance> {
    match window {
        Window::Micro => vec![GlueInstance::micro(k), GlueInstance::ball(k, radius)],
        Window::Ball => vec![GlueInstance::ball(k, radius)],
        Window::Tiny => vec![GlueInstance::tiny(k), GlueInstance::tiny_ball(k, radius)],
    }
}

/// Zero violations and the counting bound holding at the measured `s`.
pub fn audit_clean(r: &AuditReport) -> bool {
    r.violations == 0 && r.counting.iter().all(|l| l.holds_tight)
}

fn run_glue(exec: &Rayon, a: &GlueArgs, files: &mut Outputs) -> Result<Status, Error> {
    let reports = glue_instances(a.window, a.k, a.radius)
        .iter()
        .map(|inst| audit(exec, inst, a.p))
        .collect::<Result<Vec<_>, _>>()?;
    #[derive(Serialize)]
    struct Out<'a> {
        window: Window,
        k: u32,
        p: RationalP,
        violations: u64,
        reports: &'a [AuditReport],
    }
    let violations = reports.iter().map(|r| r.violations).sum();
    files.write("glue_audit.json", &json_bytes(&Out { window: a.window, k: a.k, p: a.p, violations, reports: &reports })?)?;
    Ok(Status::flag_if(!reports.iter().all(audit_clean)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct U3nSource {
    /// `given` or `selected`.
    pub source: String,
    pub target: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateFile {
    #[serde(flatten)]
    pub certificate: Certificate,
    pub u3n_source: U3nSource,
    pub dependence: DependenceCheck,
}

fn run_renorm(exec: &Rayon, a: &RenormArgs, files: &mut Outputs) -> Result<Status, Error> {
    let (u3n, src) = match a.u3n {
        Some(u) => (u, U3nSource { source: "given".into(), target: a.target, flagged: false }),
        None => {
            let (u, flagged) = block_seed_radius(exec, a.k, a.n, a.p, a.target, a.samples, a.seed)?;
            (u, U3nSource { source: "selected".into(), target: a.target, flagged })
        }
    };
    let certificate = certify(exec, a.k, a.n, u3n, a.p, a.samples, a.seed)?;
    let dependence = dependence_check(a.n, u3n, 7)?;
    let flagged = src.flagged;
    files.write("certificate.json", &json_bytes(&CertificateFile { certificate, u3n_source: src, dependence })?)?;
    Ok(Status::flag_if(flagged))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrozenEvent {
    pub id: String,
    pub edges: usize,
    pub open_count_histogram: Vec<u64>,
    pub exact: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrozenTable {
    pub k: u32,
    pub events: Vec<FrozenEvent>,
}

pub fn frozen_table(exec: &Rayon, ps: &[RationalP]) -> Result<FrozenTable, Error> {
    let events = micro_events();
    let k = events.first().map_or(1, |e| e.geometry.k);
    let mut out = Vec::new();
    for ev in &events {
        let g = SlabGeometry::from_descriptor(&ev.geometry)?;
        let compiled = ev.event.compile(&g)?;
        let h = ConfigSpace::full(&g)?.histogram_with(
            exec,
            || slabperc_core::connectivity::Scratch::new(&g),
            |c, s| compiled.holds(c, s),
        );
        let mut exact = BTreeMap::new();
        for &p in ps {
            exact.insert(String::from(p), slabperc_core::oracle::ratio_string(&h.mass(p)));
        }
        out.push(FrozenEvent { id: ev.id.clone(), edges: g.edge_count(), open_count_histogram: h.counts, exact });
    }
    Ok(FrozenTable { k, events: out })
}

fn run_freeze(exec: &Rayon, a: &FreezeArgs, files: &mut Outputs) -> Result<Status, Error> {
    files.write("frozen_events.json", &json_bytes(&frozen_table(exec, &a.p)?)?)?;
    Ok(Status::Ok)
}
