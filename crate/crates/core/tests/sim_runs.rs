//! Whole-simulation invariants on short runs.

use proptest::prelude::*;
use twdm_core::sim::{self, Architecture, Metrics, SimConfig};
use twdm_core::{SchedulerKind, Time, Topology};

fn run(
    groups: usize,
    n: usize,
    r: usize,
    rate: u64,
    kind: SchedulerKind,
    arch: Architecture,
    load: f64,
    seed: u64,
) -> Metrics {
    let cfg = SimConfig::new(Topology::new(groups, n, r, rate, seed), arch, kind, load, seed)
        .with_duration(Time::from_millis(60))
        .with_audit(true);
    sim::run(&cfg).unwrap()
}

fn assert_clean(m: &Metrics) {
    assert!(m.is_conserved(), "bits not conserved: {m:?}");
    assert_eq!(m.hops.violations, 0, "hop bound exceeded");
    assert_eq!(m.inserts.violations, 0, "insert bound exceeded");
    let audit = m.audit.expect("audit enabled");
    assert_eq!(audit.mismatches, 0, "online and batch collision verdicts differ");
    assert_eq!(audit.invariant_failures, 0);
}

#[test]
fn safe_pairs_never_collide() {
    let pairs = [
        (SchedulerKind::CevfFast, Architecture::FlexibleSecure),
        (SchedulerKind::CevfNaive, Architecture::FlexibleSecure),
        (SchedulerKind::CevfFast, Architecture::Splitter),
        (SchedulerKind::EftVf, Architecture::Splitter),
    ];
    for (kind, arch) in pairs {
        for load in [0.1, 0.5, 0.9, 1.0] {
            for seed in 1..=2 {
                let m = run(4, 4, 2, 62_500_000, kind, arch, load, seed);
                assert_clean(&m);
                assert_eq!(m.total.collision_lost_bits, 0, "{kind:?} on {arch:?} at {load}");
                assert_eq!(m.audit.unwrap().lost_frames, 0);
            }
        }
    }
}

#[test]
fn eftvf_on_flexible_collides_in_groups_only() {
    let m = run(4, 4, 2, 62_500_000, SchedulerKind::EftVf, Architecture::FlexibleSecure, 0.6, 3);
    assert_clean(&m);
    assert!(m.total.group_collisions > 0);
    assert_eq!(m.total.receiver_collisions, 0);
    assert_eq!(m.audit.unwrap().lost_frames, m.total.lost_frames);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_networks_conserve_and_respect_bounds(
        groups in 1usize..5,
        n in 1usize..6,
        r in 1usize..5,
        rate in prop_oneof![Just(31_250_000u64), Just(62_500_000), Just(125_000_000)],
        kind in prop_oneof![Just(SchedulerKind::CevfFast), Just(SchedulerKind::EftVf)],
        splitter in any::<bool>(),
        load in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        prop_assume!(r <= groups * n);
        let arch = if splitter { Architecture::Splitter } else { Architecture::FlexibleSecure };
        let m = run(groups, n, r, rate, kind, arch, load, seed);
        assert_clean(&m);
        prop_assert!(m.throughput_pct() <= 100.0 * load + 1e-9);
        if kind == SchedulerKind::CevfFast || arch == Architecture::Splitter {
            prop_assert_eq!(m.total.collision_lost_bits, 0);
        }
    }
}
