use approx::assert_abs_diff_eq;
use replica_tradeoff::analytic::{rp_mean_read, wp_bounds, wp_mean_read};
use replica_tradeoff::sim::*;
use replica_tradeoff::{Priority, SystemParams};

fn config(lambda_r: f64, lambda_w: f64, n: usize, policy: PolicyConfig) -> SimConfig {
    let p = SystemParams::new(lambda_r, lambda_w, 10.0, 1.0, n).unwrap();
    SimConfig::exponential(p, policy).unwrap()
}

fn short(cfg: SimConfig) -> SimConfig {
    SimConfig {
        horizon: 5e4,
        replications: 10,
        ..cfg
    }
}

#[test]
fn write_priority_reads_match_exact_formula() {
    let cfg = config(3.0, 0.6, 2, PolicyConfig::analytic(Priority::WritePriority));
    let res = run(&cfg).unwrap();
    assert_abs_diff_eq!(wp_mean_read(&cfg.params).unwrap(), 16.0, epsilon = 1e-12);
    assert!(
        (res.mean_read - 16.0).abs() <= 0.05 * 16.0,
        "{}",
        res.mean_read
    );
    assert!(res.satisfies_littles_law());
}

#[test]
fn read_priority_example() {
    let cfg = config(3.6, 0.6, 2, PolicyConfig::analytic(Priority::ReadPriority));
    let res = run(&cfg).unwrap();
    assert!(
        (res.mean_read - 0.4091).abs() <= 0.03 * 0.4091,
        "{}",
        res.mean_read
    );
    assert!(
        (res.mean_write - 5.235).abs() <= 0.10 * 5.235,
        "{}",
        res.mean_write
    );
    let exact = rp_mean_read(&cfg.params.loads(), 2).unwrap();
    assert!((res.mean_read - exact).abs() <= res.ci_halfwidth.unwrap().mean_read);
}

#[test]
fn writes_are_oblivious_of_reads_under_preemptive_write_priority() {
    let policy = PolicyConfig::analytic(Priority::WritePriority);
    let alone = run(&short(config(0.0, 0.6, 2, policy))).unwrap();
    let mixed = run(&short(config(3.6, 0.6, 2, policy))).unwrap();
    let joint = alone.ci_halfwidth.unwrap().mean_write + mixed.ci_halfwidth.unwrap().mean_write;
    assert!((alone.mean_write - mixed.mean_write).abs() <= joint);
}

#[test]
fn write_priority_writes_sit_between_bounds() {
    for n in 1..=3 {
        let cfg = short(config(
            3.6,
            0.6,
            n,
            PolicyConfig::analytic(Priority::WritePriority),
        ));
        let res = run(&cfg).unwrap();
        let ci = res.ci_halfwidth.unwrap().mean_write;
        let read = wp_mean_read(&cfg.params).unwrap();
        let (lo, hi) = wp_bounds(&cfg.params).unwrap();
        assert!(res.mean_write + ci >= lo - read, "n={n}");
        assert!(res.mean_write - ci <= hi - read, "n={n}");
    }
}

#[test]
fn secondaries_complete_writes_in_arrival_order() {
    for policy in [
        PolicyConfig::analytic(Priority::ReadPriority),
        PolicyConfig::practical(Priority::ReadPriority),
        PolicyConfig::analytic(Priority::WritePriority),
    ] {
        let cfg = SimConfig {
            trace: true,
            horizon: 2e4,
            replications: 3,
            ..config(3.6, 0.6, 3, policy)
        };
        let res = run(&cfg).unwrap();
        assert_eq!(res.traces.len(), 3);
        for trace in &res.traces {
            assert_eq!(trace.secondary_completions.len(), 3);
            assert!(trace.secondary_completions.iter().all(|c| c.len() > 1000));
            assert!(trace.is_fcfs());
        }
    }
}

#[test]
fn identical_seed_gives_identical_event_trace() {
    let cfg = SimConfig {
        trace: true,
        horizon: 1e4,
        replications: 2,
        seed: 2024,
        ..config(
            3.6,
            0.6,
            2,
            PolicyConfig::practical(Priority::WritePriority),
        )
    };
    let a = run_replication(&cfg, 77);
    let b = run_replication(&cfg, 77);
    assert_eq!(a, b);
    let c = run_replication(&cfg, 78);
    assert_ne!(a.trace.unwrap().event_digest, c.trace.unwrap().event_digest);
}

#[test]
fn non_preemptive_write_priority_helps_reads() {
    let pre = run(&short(config(
        3.6,
        0.6,
        2,
        PolicyConfig::analytic(Priority::WritePriority),
    )))
    .unwrap();
    let non = run(&short(config(
        3.6,
        0.6,
        2,
        PolicyConfig::new(
            Priority::WritePriority,
            Preemption::NonPreemptive,
            Routing::UniformRandom,
        ),
    )))
    .unwrap();
    assert!(non.mean_read < pre.mean_read);
}

#[test]
fn general_service_distributions() {
    let p = SystemParams::new(15.0, 0.3, 1.0, 1.0, 2).unwrap();
    let families = [
        (
            ServiceDistribution::pareto(3.602, 0.016).unwrap(),
            ServiceDistribution::pareto(5.203, 0.15).unwrap(),
        ),
        (
            ServiceDistribution::weibull(5.814, 0.023, 0.0).unwrap(),
            ServiceDistribution::weibull(1.484, 0.088, 0.105).unwrap(),
        ),
        (
            ServiceDistribution::empirical(vec![0.015, 0.02, 0.028]).unwrap(),
            ServiceDistribution::empirical(vec![0.12, 0.18, 0.25]).unwrap(),
        ),
    ];
    for (read_dist, write_dist) in families {
        let cfg = SimConfig {
            read_dist,
            write_dist,
            horizon: 2e4,
            replications: 4,
            ..SimConfig::exponential(p, PolicyConfig::practical(Priority::WritePriority)).unwrap()
        };
        assert!(cfg.stability_margin() > 0.0);
        let res = run(&cfg).unwrap();
        assert!(res.mean_total > 0.0 && res.mean_total.is_finite());
        assert!(res.satisfies_littles_law(), "{:?}", res.littles_law_gap);
        assert_abs_diff_eq!(res.effective_lambda_read, 15.0, epsilon = 0.3);
    }
}

#[test]
fn round_robin_spreads_reads_evenly() {
    // Under round robin each server sees deterministic-cycle arrivals at
    // rate lambda_r / (n + 1), so the total read count stays close to the
    // random-routing value but below it.
    let rr = run(&short(config(
        3.6,
        0.0,
        2,
        PolicyConfig::practical(Priority::ReadPriority),
    )))
    .unwrap();
    let random = run(&short(config(
        3.6,
        0.0,
        2,
        PolicyConfig::analytic(Priority::ReadPriority),
    )))
    .unwrap();
    assert!(rr.mean_read < random.mean_read);
    assert_abs_diff_eq!(
        random.mean_read,
        rp_mean_read(&random_loads(), 2).unwrap(),
        epsilon = 0.02
    );
}

fn random_loads() -> replica_tradeoff::DerivedLoads {
    SystemParams::new(3.6, 0.0, 10.0, 1.0, 2).unwrap().loads()
}
