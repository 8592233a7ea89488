//! Randomised cross-checks of the schedulers against a brute-force search.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twdm_core::scheduler::{burst_duration, earliest_start, intersect};
use twdm_core::sim::{detect_collisions, Architecture, Transmission};
use twdm_core::{OnuId, ReceiverId, ScheduleDecision, SchedulerState, Time, Topology, Void};

/// Upper limits for generated instances.
#[derive(Clone, Copy, Debug)]
pub struct InstanceLimits {
    pub max_groups: usize,
    pub max_group_size: usize,
    pub max_receivers: usize,
    pub max_bursts: usize,
}

impl Default for InstanceLimits {
    fn default() -> Self {
        InstanceLimits { max_groups: 8, max_group_size: 8, max_receivers: 8, max_bursts: 12 }
    }
}

/// A scheduler state with some committed bursts plus one pending request.
#[derive(Clone, Debug)]
pub struct Instance {
    pub state: SchedulerState,
    pub onu: OnuId,
    pub bytes: u64,
    /// Bursts committed while building the state.
    pub committed: Vec<Transmission>,
}

/// Builds a random instance. At most one burst per ONU is committed, as in
/// the online protocol. Half of the bursts are placed by CEVF, the others
/// at random feasible spots, so voids get fragmented in odd ways.
pub fn random_instance(rng: &mut ChaCha8Rng, limits: &InstanceLimits) -> Instance {
    let groups = rng.gen_range(1..=limits.max_groups);
    let group_size = rng.gen_range(1..=limits.max_group_size);
    let receivers = rng.gen_range(1..=limits.max_receivers.min(groups * group_size));
    let onus = groups * group_size;
    let rtt: Vec<Time> = (0..onus).map(|_| Time::from_nanos(rng.gen_range(0..=20_000))).collect();
    let t_grd = Time::from_nanos(rng.gen_range(1..=2_000));
    let topo = Topology::new(groups, group_size, receivers, 125_000_000, 0)
        .with_rtts(rtt)
        .with_guard(t_grd)
        .with_grant_limit(None);
    let mut now = Time::from_nanos(rng.gen_range(0..=5_000));
    let mut state = SchedulerState::new(topo, now);

    let mut order: Vec<u32> = (0..onus as u32).collect();
    order.shuffle(rng);
    let bursts = rng.gen_range(0..=limits.max_bursts.min(onus));
    let mut committed = Vec::with_capacity(bursts);
    for &u in &order[..bursts] {
        let onu = OnuId(u);
        let bytes = rng.gen_range(0..=2_000);
        let d = if rng.gen_bool(0.5) {
            state.schedule_cevf_naive(onu, bytes).expect("ONU is in range")
        } else {
            random_placement(rng, &state, onu, bytes)
        };
        state.commit(&d).expect("placement lies inside its voids");
        committed.push(Transmission {
            onu,
            group: state.topology().group_of(onu),
            receiver: d.receiver,
            start: d.start,
            end: d.end(),
            bytes,
        });
        if rng.gen_bool(0.3) {
            now += Time::from_nanos(rng.gen_range(0..=3_000));
            state.advance_to(now);
        }
    }
    let onu = OnuId(rng.gen_range(0..onus as u32));
    Instance { state, onu, bytes: rng.gen_range(0..=3_000), committed }
}

/// Any start inside any fitting receiver/group void pair.
fn random_placement(rng: &mut ChaCha8Rng, state: &SchedulerState, onu: OnuId, bytes: u64) -> ScheduleDecision {
    let topo = state.topology();
    let t_e = earliest_start(state.now(), topo.rtt(onu));
    let dur = burst_duration(bytes, topo.olt_rate_bps, topo.t_grd);
    let group = state.group_timeline(topo.group_of(onu));
    let mut options = Vec::new();
    for r in 0..topo.receivers {
        let rx = ReceiverId(r as u32);
        for a in state.receiver_timeline(rx).voids() {
            for b in group.voids() {
                if let Some(w) = intersect(a, b, t_e) {
                    if w.length() >= dur {
                        options.push((rx, *a, *b, w));
                    }
                }
            }
        }
    }
    let (receiver, rx_void, group_void, w) = *options.choose(rng).expect("horizons always fit");
    let slack = if w.is_horizon() { 20_000 } else { (w.length() - dur).as_nanos() };
    let start = w.start + Time::from_nanos(rng.gen_range(0..=slack));
    ScheduleDecision {
        onu,
        receiver,
        start,
        grant_at: start - topo.rtt(onu),
        duration: dur,
        bytes,
        rx_void,
        group_void: Some(group_void),
    }
}

/// Exhaustive search that shares no code with the schedulers: tries every
/// start the optimum can take (`T_e` and each void start) on every receiver,
/// in order, and checks plain containment.
pub fn brute_force(state: &SchedulerState, onu: OnuId, bytes: u64) -> (Time, ReceiverId, Time) {
    let topo = state.topology();
    let t_e = state.now() + topo.rtt(onu);
    let dur = Time::from_nanos((bytes * 8 * 1_000_000_000).div_ceil(topo.olt_rate_bps) as i64) + topo.t_grd;
    let group = state.group_timeline(topo.group_of(onu)).voids();
    let receivers: Vec<&[Void]> =
        (0..topo.receivers).map(|r| state.receiver_timeline(ReceiverId(r as u32)).voids()).collect();
    let mut starts: Vec<Time> = receivers.iter().flat_map(|v| v.iter()).chain(group).map(|v| v.start).collect();
    starts.push(t_e);
    starts.retain(|s| *s >= t_e);
    starts.sort();
    starts.dedup();
    let inside = |voids: &[Void], s: Time| {
        voids.iter().any(|v| v.start <= s && (v.finish == Time::INFINITY || s + dur <= v.finish))
    };
    for s in starts {
        if !inside(group, s) {
            continue;
        }
        for (r, voids) in receivers.iter().enumerate() {
            if inside(voids, s) {
                return (s, ReceiverId(r as u32), dur);
            }
        }
    }
    unreachable!("the horizon voids admit a start")
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub instances: u64,
    pub fast_vs_naive: u64,
    pub naive_vs_brute_force: u64,
    pub eftvf_infeasible: u64,
    pub hop_bound: u64,
    pub max_hops: u32,
    pub insert_bound: u64,
    pub inserts: u64,
    pub invariants: u64,
    pub overlaps: u64,
    pub early_starts: u64,
}

impl VerifyReport {
    pub fn failures(&self) -> u64 {
        self.fast_vs_naive
            + self.naive_vs_brute_force
            + self.eftvf_infeasible
            + self.hop_bound
            + self.insert_bound
            + self.invariants
            + self.overlaps
            + self.early_starts
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instances checked:            {}", self.instances)?;
        writeln!(f, "fast != naive:                {}", self.fast_vs_naive)?;
        writeln!(f, "naive != brute force:         {}", self.naive_vs_brute_force)?;
        writeln!(f, "eftvf infeasible:             {}", self.eftvf_infeasible)?;
        writeln!(f, "starts before T_e:            {}", self.early_starts)?;
        writeln!(f, "hop bound exceeded:           {} (max hops {})", self.hop_bound, self.max_hops)?;
        writeln!(f, "insert bound exceeded:        {} of {} inserts", self.insert_bound, self.inserts)?;
        writeln!(f, "timeline invariant failures:  {}", self.invariants)?;
        write!(f, "overlapping committed bursts: {}", self.overlaps)
    }
}

/// Checks `instances` random states.
pub fn run_suite(instances: u64, seed: u64, limits: &InstanceLimits) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = VerifyReport::default();
    for _ in 0..instances {
        check_instance(&random_instance(&mut rng, limits), &mut rep);
    }
    rep
}

pub fn check_instance(inst: &Instance, rep: &mut VerifyReport) {
    let st = &inst.state;
    let topo = st.topology();
    rep.instances += 1;

    let naive = st.schedule_cevf_naive(inst.onu, inst.bytes).expect("ONU is in range");
    let (fast, hops) = st.schedule_cevf_fast(inst.onu, inst.bytes).expect("ONU is in range");
    if fast.placement() != naive.placement() {
        rep.fast_vs_naive += 1;
    }
    if naive.placement() != brute_force(st, inst.onu, inst.bytes) {
        rep.naive_vs_brute_force += 1;
    }
    let t_e = st.now() + topo.rtt(inst.onu);
    let eft = st.schedule_eftvf(inst.onu, inst.bytes).expect("ONU is in range");
    let rx_ok = st.receiver_timeline(eft.receiver).voids().iter().any(|v| v.covers(eft.start, eft.end()));
    if !rx_ok {
        rep.eftvf_infeasible += 1;
    }
    if [naive.start, fast.start, eft.start].iter().any(|s| *s < t_e || s.is_infinite()) {
        rep.early_starts += 1;
    }
    let bound = (topo.group_size + topo.onus() + topo.receivers) as u32;
    rep.max_hops = rep.max_hops.max(hops);
    if hops > bound {
        rep.hop_bound += 1;
    }

    // Commit the new burst too and audit the result.
    let mut after = st.clone();
    if after.commit(&fast).is_err() || after.check_invariants().is_err() {
        rep.invariants += 1;
    }
    let ins = after.insert_stats();
    rep.inserts += ins.inserts;
    rep.insert_bound += ins.violations;
    let mut all = inst.committed.clone();
    all.push(Transmission {
        onu: inst.onu,
        group: topo.group_of(inst.onu),
        receiver: fast.receiver,
        start: fast.start,
        end: fast.end(),
        bytes: inst.bytes,
    });
    rep.overlaps += detect_collisions(&all, Architecture::FlexibleSecure).iter().filter(|l| l.is_lost()).count() as u64;
}
