//! Parameter sweeps over the simulator and their CSV rows.

use std::io::{self, Write};

use anyhow::{bail, Result};
use rayon::prelude::*;
use twdm_core::sim::{self, Architecture, Metrics, SimConfig};
use twdm_core::topology::{DEFAULT_BUFFER_BITS, DEFAULT_GUARD, DEFAULT_OLT_RATE_BPS};
use twdm_core::{SchedulerKind, Time, Topology};

/// Network shape shared by every point of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub onus: usize,
    pub group_size: usize,
    pub receivers: usize,
    pub onu_rate_bps: u64,
    pub olt_rate_bps: u64,
    pub t_grd: Time,
    /// `None` keeps the default cap for the group size.
    pub grant_limit: Option<u64>,
    pub buffer_bits: u64,
}

impl Default for Network {
    fn default() -> Self {
        Network {
            onus: 64,
            group_size: 8,
            receivers: 2,
            onu_rate_bps: 31_250_000,
            olt_rate_bps: DEFAULT_OLT_RATE_BPS,
            t_grd: DEFAULT_GUARD,
            grant_limit: None,
            buffer_bits: DEFAULT_BUFFER_BITS,
        }
    }
}

impl Network {
    /// Topology with RTTs drawn from `seed`.
    pub fn topology(&self, seed: u64) -> Result<Topology> {
        if self.group_size == 0 || !self.onus.is_multiple_of(self.group_size) {
            bail!("{} ONUs cannot be split into groups of {}", self.onus, self.group_size);
        }
        let mut t =
            Topology::new(self.onus / self.group_size, self.group_size, self.receivers, self.onu_rate_bps, seed)
                .with_olt_rate(self.olt_rate_bps)
                .with_guard(self.t_grd)
                .with_buffer_bits(self.buffer_bits);
        if self.olt_rate_bps != DEFAULT_OLT_RATE_BPS || self.grant_limit.is_some() {
            let lim = self
                .grant_limit
                .unwrap_or_else(|| twdm_core::topology::default_grant_limit(self.group_size, self.olt_rate_bps));
            t = t.with_grant_limit(Some(lim));
        }
        t.validate()?;
        Ok(t)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub network: Network,
    pub loads: Vec<f64>,
    pub schedulers: Vec<SchedulerKind>,
    pub architectures: Vec<Architecture>,
    pub seeds: Vec<u64>,
    pub duration: Time,
    /// `None` uses a tenth of the run.
    pub warmup: Option<Time>,
    pub audit: bool,
}

/// One simulation of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub scheduler: SchedulerKind,
    pub architecture: Architecture,
    pub load: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub point: Point,
    pub metrics: Metrics,
}

pub const CSV_HEADER: &str =
    "scheduler,arch,rho,N,R,onu_rate,seed,throughput_pct,collision_loss_pct,buffer_drop_pct,mean_hops";

impl Sweep {
    /// Points in output order: scheduler, architecture, load, seed.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for &scheduler in &self.schedulers {
            for &architecture in &self.architectures {
                for &load in &self.loads {
                    for &seed in &self.seeds {
                        out.push(Point { scheduler, architecture, load, seed });
                    }
                }
            }
        }
        out
    }

    pub fn config(&self, p: &Point) -> Result<SimConfig> {
        let mut cfg = SimConfig::new(self.network.topology(p.seed)?, p.architecture, p.scheduler, p.load, p.seed)
            .with_duration(self.duration)
            .with_audit(self.audit);
        if let Some(w) = self.warmup {
            cfg = cfg.with_warmup(w);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Validates every point, then runs them in parallel. Rows come back in
    /// [`Sweep::points`] order whatever the thread count.
    pub fn run(&self) -> Result<Vec<Row>> {
        let configs = self.points().iter().map(|p| Ok((*p, self.config(p)?))).collect::<Result<Vec<_>>>()?;
        configs.into_par_iter().map(|(point, cfg)| Ok(Row { point, metrics: sim::run(&cfg)? })).collect()
    }
}

impl Row {
    pub fn csv(&self, net: &Network) -> String {
        let m = &self.metrics;
        format!(
            "{},{},{:.4},{},{},{},{},{:.6},{:.6},{:.6},{:.4}",
            self.point.scheduler.name(),
            self.point.architecture.name(),
            self.point.load,
            net.group_size,
            net.receivers,
            net.onu_rate_bps,
            self.point.seed,
            m.throughput_pct(),
            m.collision_loss_pct(),
            m.buffer_drop_pct(),
            m.hops.mean(),
        )
    }
}

pub fn write_csv<W: Write>(mut w: W, net: &Network, rows: &[Row]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv(net))?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep() -> Sweep {
        Sweep {
            network: Network { onus: 8, group_size: 4, ..Network::default() },
            loads: vec![0.2, 0.5],
            schedulers: vec![SchedulerKind::CevfFast, SchedulerKind::EftVf],
            architectures: vec![Architecture::Splitter],
            seeds: vec![1, 2],
            duration: Time::from_millis(40),
            warmup: None,
            audit: true,
        }
    }

    #[test]
    fn point_order_is_nested() {
        let p = sweep().points();
        assert_eq!(p.len(), 8);
        assert_eq!((p[0].scheduler, p[0].load, p[0].seed), (SchedulerKind::CevfFast, 0.2, 1));
        assert_eq!((p[1].load, p[1].seed), (0.2, 2));
        assert_eq!(p[4].scheduler, SchedulerKind::EftVf);
    }

    #[test]
    fn rows_follow_points() {
        let s = sweep();
        let rows = s.run().unwrap();
        let points: Vec<Point> = rows.iter().map(|r| r.point).collect();
        assert_eq!(points, s.points());
        let mut buf = Vec::new();
        write_csv(&mut buf, &s.network, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert!(text.lines().nth(1).unwrap().starts_with("cevf,splitter,0.2000,4,2,31250000,1,"));
    }

    #[test]
    fn uneven_groups_are_rejected() {
        let net = Network { onus: 10, group_size: 4, ..Network::default() };
        assert!(net.topology(0).is_err());
    }
}
