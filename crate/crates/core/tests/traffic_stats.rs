//! Statistical checks of the Pareto on-off sources and buffer bookkeeping.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twdm_core::traffic::{BoundedPareto, OnuBuffer, ParetoOnOffSource, SHAPE_OFF, SHAPE_ON, TAIL_CUTOFF};
use twdm_core::Time;

/// Kolmogorov-Smirnov critical value at the 1% level for large `n`.
fn ks_critical(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Bounded Pareto CDF from first principles: `(1 - (L/x)^a) / (1 - (L/H)^a)`.
fn reference_cdf(alpha: f64, lo: f64, hi: f64, x: f64) -> f64 {
    if x <= lo {
        0.0
    } else if x >= hi {
        1.0
    } else {
        (1.0 - (lo / x).powf(alpha)) / (1.0 - (lo / hi).powf(alpha))
    }
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn pareto_samples_pass_ks_for_both_shapes() {
    const N: usize = 100_000;
    for (alpha, seed) in [(SHAPE_ON, 11u64), (SHAPE_OFF, 12)] {
        let lo = 0.384e-3;
        let law = BoundedPareto::with_tail(alpha, lo, TAIL_CUTOFF);
        let hi = lo * TAIL_CUTOFF.powf(-1.0 / alpha);
        assert!((law.max - hi).abs() / hi < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..N).map(|_| law.sample(&mut rng)).collect();
        assert!(xs.iter().all(|x| (lo..=hi).contains(x)));
        let d = ks_statistic(xs, |x| reference_cdf(alpha, lo, hi, x));
        assert!(d < ks_critical(N), "shape {alpha}: D = {d:.5}, critical {:.5}", ks_critical(N));
    }
}

#[test]
fn ks_rejects_the_wrong_shape() {
    const N: usize = 100_000;
    let lo = 1.0;
    let law = BoundedPareto::with_tail(SHAPE_ON, lo, TAIL_CUTOFF);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xs: Vec<f64> = (0..N).map(|_| law.sample(&mut rng)).collect();
    let hi = lo * TAIL_CUTOFF.powf(-1.0 / SHAPE_OFF);
    let d = ks_statistic(xs, |x| reference_cdf(SHAPE_OFF, lo, hi, x));
    assert!(d > ks_critical(N));
}

#[test]
fn bounded_mean_matches_numeric_integral() {
    for alpha in [SHAPE_ON, SHAPE_OFF] {
        let law = BoundedPareto::new(alpha, 2.0, 5_000.0);
        // E[X] = L + integral of the survival function over [L, H], on a log grid.
        let (lo, hi) = (2.0f64, 5_000.0f64);
        let steps = 200_000;
        let (a, b) = (lo.ln(), hi.ln());
        let h = (b - a) / steps as f64;
        let surv = |x: f64| 1.0 - reference_cdf(alpha, lo, hi, x);
        let integral: f64 = (0..steps)
            .map(|i| {
                let (u0, u1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
                let (x0, x1) = (u0.exp(), u1.exp());
                0.5 * (surv(x0) * x0 + surv(x1) * x1) * h
            })
            .sum();
        let mean = lo + integral;
        assert!((law.mean() - mean).abs() / mean < 1e-6, "alpha {alpha}: {} vs {mean}", law.mean());
    }
}

#[test]
fn long_run_offered_load_within_one_percent() {
    const BURSTS: usize = 10_000_000;
    let rate = 31_250_000u64;
    for load in [0.3, 0.8] {
        let mut src = ParetoOnOffSource::new(rate, load, 2024, 3).unwrap();
        let (mut bits, mut end) = (0u64, Time::ZERO);
        for _ in 0..BURSTS {
            let (_, e, bytes) = src.next_burst().unwrap();
            bits += bytes * 8;
            end = e;
        }
        let achieved = bits as f64 / (rate as f64 * end.as_secs_f64());
        assert!((achieved - load).abs() / load < 0.01, "load {load}: achieved {achieved:.5}");
    }
}

/// Aggregated-variance estimate of the Hurst parameter.
fn hurst(series: &[f64]) -> f64 {
    let mut pts = Vec::new();
    let mut m = 1;
    while m <= series.len() / 100 {
        let k = series.len() / m;
        let agg: Vec<f64> = series.chunks_exact(m).take(k).map(|c| c.iter().sum::<f64>() / m as f64).collect();
        let mean = agg.iter().sum::<f64>() / k as f64;
        let var = agg.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
        pts.push(((m as f64).ln(), var.ln()));
        m *= 2;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope =
        pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    1.0 + slope / 2.0
}

#[test]
fn aggregate_traffic_is_long_range_dependent() {
    let (sources, bin_ns, bins) = (16u64, 1_000_000i64, 500_000usize);
    let mut series = vec![0.0; bins];
    for s in 0..sources {
        let mut src = ParetoOnOffSource::new(31_250_000, 0.5, 7, s).unwrap();
        while let Some(p) = src.next_packet() {
            let b = (p.arrival.as_nanos() / bin_ns) as usize;
            if b >= bins {
                break;
            }
            series[b] += p.bytes as f64;
        }
    }
    let h = hurst(&series);
    assert!((0.7..=0.95).contains(&h), "H = {h:.3}");
}

#[test]
fn packets_are_ordered_and_bounded() {
    let mut src = ParetoOnOffSource::new(62_500_000, 0.6, 1, 9).unwrap();
    let mut last = Time::ZERO;
    for _ in 0..200_000 {
        let p = src.next_packet().unwrap();
        assert!((1..=1500).contains(&p.bytes));
        assert!(p.arrival > last);
        last = p.arrival;
    }
}

#[test]
fn edge_loads() {
    assert!(ParetoOnOffSource::new(1_000_000, 0.0, 0, 0).unwrap().next_packet().is_none());
    assert!(ParetoOnOffSource::new(1_000_000, 1.2, 0, 0).is_err());
    assert!(ParetoOnOffSource::new(0, 0.5, 0, 0).is_err());
    // Full load: bursts are back to back.
    let mut src = ParetoOnOffSource::new(10_000_000, 1.0, 0, 0).unwrap();
    let mut prev_end = Time::ZERO;
    for _ in 0..1000 {
        let (s, e, _) = src.next_burst().unwrap();
        assert_eq!(s, prev_end);
        prev_end = e;
    }
}

proptest! {
    #[test]
    fn buffer_conserves_bytes(ops in proptest::collection::vec((any::<bool>(), 0u64..3_000), 0..400), cap in 0u64..20_000) {
        let mut b = OnuBuffer::new(cap);
        let (mut accepted, mut out) = (0u64, 0u64);
        for (enq, n) in ops {
            if enq {
                let before = b.occupancy();
                if b.enqueue(n) {
                    accepted += n;
                    prop_assert_eq!(b.occupancy(), before + n);
                } else {
                    prop_assert!(before + n > cap);
                    prop_assert_eq!(b.occupancy(), before);
                }
            } else {
                let before = b.occupancy();
                let got = b.dequeue(n);
                prop_assert_eq!(got, n.min(before));
                out += got;
            }
            prop_assert!(b.occupancy() <= cap);
            prop_assert!(b.is_conserved());
        }
        prop_assert_eq!(b.arrived(), accepted + b.dropped());
        prop_assert_eq!(b.departed(), out);
        prop_assert_eq!(accepted, out + b.occupancy());
    }
}
