//! JSON experiment files. Every field is optional and mirrors a command-line
//! flag; flags given on the command line win.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use twdm_core::markov::{ArrivalMode, TransitionRule};
use twdm_core::sim::Architecture;
use twdm_core::SchedulerKind;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub replicas: Option<u64>,
    pub load: Option<Vec<f64>>,
    pub scheduler: Option<Vec<String>>,
    pub arch: Option<Vec<String>>,
    pub onus: Option<usize>,
    pub group_size: Option<usize>,
    pub receivers: Option<usize>,
    pub onu_rate: Option<f64>,
    pub olt_rate: Option<f64>,
    pub duration_s: Option<f64>,
    pub warmup_s: Option<f64>,
    pub t_grd_ns: Option<i64>,
    pub lim_bytes: Option<u64>,
    pub buffer_bits: Option<u64>,
    pub jobs: Option<usize>,
    pub audit: Option<bool>,
    pub mode: Option<String>,
    pub rule: Option<String>,
    pub solver: Option<String>,
    pub capacity: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

pub fn parse_scheduler(s: &str) -> Result<SchedulerKind> {
    Ok(match s {
        "cevf" => SchedulerKind::CevfFast,
        "cevf-naive" => SchedulerKind::CevfNaive,
        "eftvf" => SchedulerKind::EftVf,
        other => bail!("unknown scheduler `{other}` (expected cevf, cevf-naive or eftvf)"),
    })
}

pub fn parse_arch(s: &str) -> Result<Architecture> {
    Ok(match s {
        "flexible" => Architecture::FlexibleSecure,
        "splitter" => Architecture::Splitter,
        other => bail!("unknown architecture `{other}` (expected flexible or splitter)"),
    })
}

pub fn parse_mode(s: &str) -> Result<ArrivalMode> {
    Ok(match s {
        "literal" => ArrivalMode::Literal,
        "linear" => ArrivalMode::Linear,
        other => bail!("unknown arrival mode `{other}` (expected literal or linear)"),
    })
}

pub fn parse_rule(s: &str) -> Result<TransitionRule> {
    Ok(match s {
        "lindley" => TransitionRule::Lindley,
        "as-printed" => TransitionRule::AsPrinted,
        other => bail!("unknown transition rule `{other}` (expected lindley or as-printed)"),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    Power,
    Direct,
    /// Power iteration, falling back to the direct solver if it stalls.
    Auto,
}

pub fn parse_solver(s: &str) -> Result<Solver> {
    Ok(match s {
        "power" => Solver::Power,
        "direct" => Solver::Direct,
        "auto" => Solver::Auto,
        other => bail!("unknown solver `{other}` (expected power, direct or auto)"),
    })
}

/// A rate given in bits per second as a float (`31.25e6`).
pub fn rate_bps(v: f64, what: &str) -> Result<u64> {
    if !v.is_finite() || v < 1.0 {
        bail!("{what} must be a positive rate in bits per second, got {v}");
    }
    Ok(v.round() as u64)
}
