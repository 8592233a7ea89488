//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use twdm_core::sim::{self};
use twdm_core::Time;

use crate::bound::{self, BoundSweep};
use crate::config::{self, FileConfig, Solver};
use crate::experiment::{self, Network, Row, Sweep};
use crate::trace::TraceWriter;
use crate::verify::{self, InstanceLimits};

/// Exit status for a rejected configuration or a runtime error.
pub const EXIT_CONFIG: i32 = 1;
/// Exit status when a verification check finds a violation.
pub const EXIT_VERIFY: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "twdm", version, about = "TWDM-PON upstream scheduling simulator and throughput bound")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation sweep and write one CSV row per run.
    Simulate(SimulateArgs),
    /// Evaluate the Markov-chain throughput bound over a list of loads.
    Bound(BoundArgs),
    /// Cross-check the schedulers on random states.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON file with default values; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV destination (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated loads in [0, 1].
    #[arg(long, value_delimiter = ',')]
    pub load: Option<Vec<f64>>,
    #[arg(long)]
    pub onus: Option<usize>,
    /// ONUs per group (N).
    #[arg(long)]
    pub group_size: Option<usize>,
    /// Receivers at the OLT (R).
    #[arg(long)]
    pub receivers: Option<usize>,
    /// ONU line rate in bit/s, e.g. 31.25e6.
    #[arg(long)]
    pub onu_rate: Option<f64>,
    /// ONU buffer size in bits.
    #[arg(long)]
    pub buffer_bits: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated: cevf, cevf-naive, eftvf.
    #[arg(long, value_delimiter = ',')]
    pub scheduler: Option<Vec<String>>,
    /// Comma-separated: flexible, splitter.
    #[arg(long, value_delimiter = ',')]
    pub arch: Option<Vec<String>>,
    /// Seeds per point, counting up from --seed.
    #[arg(long)]
    pub replicas: Option<u64>,
    /// Simulated seconds per run.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Seconds discarded before measuring (default: a tenth of the run).
    #[arg(long)]
    pub warmup: Option<f64>,
    /// Guard time in ns.
    #[arg(long)]
    pub t_grd: Option<i64>,
    /// Grant cap in bytes.
    #[arg(long)]
    pub lim: Option<u64>,
    /// Transceiver rate in bit/s.
    #[arg(long)]
    pub olt_rate: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Re-check every collision and scheduler invariant.
    #[arg(long)]
    pub audit: bool,
    /// Per-event trace CSV (single run only).
    #[arg(long)]
    pub trace_events: Option<PathBuf>,
    /// Generated-packet trace CSV (single run only).
    #[arg(long)]
    pub trace_traffic: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub common: Common,
    /// literal or linear.
    #[arg(long)]
    pub mode: Option<String>,
    /// lindley or as-printed.
    #[arg(long)]
    pub rule: Option<String>,
    /// power, direct or auto.
    #[arg(long)]
    pub solver: Option<String>,
    /// Buffer capacity K in packets, replacing the one derived from the buffer size.
    #[arg(long)]
    pub capacity: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 10_000)]
    pub instances: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Parses `argv` (program name first), runs it and returns the exit status.
pub fn main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_CONFIG,
            };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_CONFIG
        }
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Bound(a) => bound(a),
        Command::Verify(a) => {
            let rep = verify::run_suite(a.instances, a.seed, &InstanceLimits::default());
            println!("{rep}");
            Ok(if rep.passed() { 0 } else { EXIT_VERIFY })
        }
    }
}

fn file_config(c: &Common) -> Result<FileConfig> {
    c.config.as_deref().map(FileConfig::load).transpose().map(Option::unwrap_or_default)
}

fn default_loads() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

fn network(c: &Common, f: &FileConfig) -> Result<Network> {
    let d = Network::default();
    Ok(Network {
        onus: c.onus.or(f.onus).unwrap_or(d.onus),
        group_size: c.group_size.or(f.group_size).unwrap_or(d.group_size),
        receivers: c.receivers.or(f.receivers).unwrap_or(d.receivers),
        onu_rate_bps: match c.onu_rate.or(f.onu_rate) {
            Some(r) => config::rate_bps(r, "--onu-rate")?,
            None => d.onu_rate_bps,
        },
        buffer_bits: c.buffer_bits.or(f.buffer_bits).unwrap_or(d.buffer_bits),
        ..d
    })
}

fn seconds(v: f64, what: &str) -> Result<Time> {
    if !v.is_finite() || v < 0.0 {
        bail!("{what} must be a non-negative number of seconds, got {v}");
    }
    Ok(Time::from_secs_f64(v))
}

fn simulate(a: SimulateArgs) -> Result<i32> {
    let f = file_config(&a.common)?;
    let mut net = network(&a.common, &f)?;
    if let Some(r) = a.olt_rate.or(f.olt_rate) {
        net.olt_rate_bps = config::rate_bps(r, "--olt-rate")?;
    }
    if let Some(g) = a.t_grd.or(f.t_grd_ns) {
        net.t_grd = Time::from_nanos(g);
    }
    net.grant_limit = a.lim.or(f.lim_bytes);

    let names = |flag: Option<Vec<String>>, file: &Option<Vec<String>>, dflt: &str| {
        flag.or_else(|| file.clone()).unwrap_or_else(|| vec![dflt.to_string()])
    };
    let schedulers =
        names(a.scheduler, &f.scheduler, "cevf").iter().map(|s| config::parse_scheduler(s)).collect::<Result<_>>()?;
    let architectures =
        names(a.arch, &f.arch, "flexible").iter().map(|s| config::parse_arch(s)).collect::<Result<_>>()?;
    let seed = a.common.seed.or(f.seed).unwrap_or(1);
    let replicas = a.replicas.or(f.replicas).unwrap_or(1);
    if replicas == 0 {
        bail!("--replicas must be at least 1");
    }
    let sweep = Sweep {
        network: net,
        loads: a.common.load.or_else(|| f.load.clone()).unwrap_or_else(default_loads),
        schedulers,
        architectures,
        seeds: (0..replicas).map(|i| seed.wrapping_add(i)).collect(),
        duration: seconds(a.duration.or(f.duration_s).unwrap_or(sim::DEFAULT_DURATION.as_secs_f64()), "--duration")?,
        warmup: a.warmup.or(f.warmup_s).map(|w| seconds(w, "--warmup")).transpose()?,
        audit: a.audit || f.audit.unwrap_or(false),
    };
    let out = a.common.out.or(f.out);
    let jobs = a.jobs.or(f.jobs);

    let rows = if a.trace_events.is_some() || a.trace_traffic.is_some() {
        let points = sweep.points();
        let [point] = points.as_slice() else {
            bail!("traces need a single run, but the sweep has {} points", points.len());
        };
        let cfg = sweep.config(point)?;
        let mut tw = TraceWriter::create(a.trace_traffic.as_deref(), a.trace_events.as_deref())
            .context("creating trace files")?;
        let metrics = sim::run_with(&cfg, &mut tw)?;
        tw.finish().context("writing traces")?;
        vec![Row { point: *point, metrics }]
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
        pool.install(|| sweep.run())?
    };

    emit(out.as_deref(), |w| experiment::write_csv(w, &sweep.network, &rows))?;
    Ok(if audit_clean(&rows) { 0 } else { EXIT_VERIFY })
}

/// Reports bound and audit violations on stderr.
fn audit_clean(rows: &[Row]) -> bool {
    let mut clean = true;
    for r in rows {
        let m = &r.metrics;
        let p = &r.point;
        let tag = format!("{} {} rho={} seed={}", p.scheduler.name(), p.architecture.name(), p.load, p.seed);
        if m.hops.violations > 0 {
            eprintln!("{tag}: {} searches exceeded the hop bound {}", m.hops.violations, m.hops.bound);
            clean = false;
        }
        if m.inserts.violations > 0 {
            eprintln!("{tag}: {} inserts exceeded the comparison bound", m.inserts.violations);
            clean = false;
        }
        if !m.is_conserved() {
            eprintln!("{tag}: bit conservation failed");
            clean = false;
        }
        if let Some(au) = &m.audit {
            if au.mismatches > 0 || au.invariant_failures > 0 {
                eprintln!(
                    "{tag}: audit found {} verdict mismatches and {} invariant failures",
                    au.mismatches, au.invariant_failures
                );
                clean = false;
            }
        }
    }
    clean
}

fn bound(a: BoundArgs) -> Result<i32> {
    let f = file_config(&a.common)?;
    let mut net = network(&a.common, &f)?;
    if a.common.onu_rate.or(f.onu_rate).is_none() {
        net.onu_rate_bps = 125_000_000;
    }
    let solver = match a.solver.or(f.solver) {
        Some(s) => config::parse_solver(&s)?,
        None => Solver::Auto,
    };
    let sweep = BoundSweep {
        onu_rate_bps: net.onu_rate_bps,
        group_size: net.group_size,
        buffer_bits: net.buffer_bits,
        capacity: a.capacity.or(f.capacity),
        loads: a.common.load.or(f.load).unwrap_or_else(default_loads),
        mode: config::parse_mode(a.mode.or(f.mode).as_deref().unwrap_or("literal"))?,
        rule: config::parse_rule(a.rule.or(f.rule).as_deref().unwrap_or("lindley"))?,
        solver,
    };
    let rows = sweep.run()?;
    for r in rows.iter().filter(|r| r.fell_back) {
        eprintln!(
            "rho={}: power iteration did not settle within {} steps, used the direct solver",
            r.chain.load,
            bound::AUTO_POWER_ITERATIONS
        );
    }
    emit(a.common.out.or(f.out).as_deref(), |w| bound::write_csv(w, &rows))?;
    Ok(0)
}

fn emit(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
            write(&mut w).with_context(|| format!("writing {}", p.display()))
        }
        None => write(&mut io::stdout().lock()).context("writing to stdout"),
    }
}
