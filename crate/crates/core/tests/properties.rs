use proptest::prelude::*;
use replica_tradeoff::analytic::*;
use replica_tradeoff::sim::{run, PolicyConfig, Preemption, Routing, SimConfig};
use replica_tradeoff::{DerivedLoads, Priority, SystemParams};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(1000)
}

/// Loads stable for every n: `rho_r + rho_w < 1`.
fn stable_loads() -> impl Strategy<Value = DerivedLoads> {
    (0.01f64..0.95, 0.0f64..1.0, 0.5f64..50.0).prop_map(|(rho_w, frac, alpha)| {
        let rho_r = frac * (1.0 - rho_w) * 0.99;
        DerivedLoads::from_loads(rho_r, rho_w, alpha, 0)
    })
}

fn policy() -> impl Strategy<Value = PolicyConfig> {
    (any::<bool>(), any::<bool>(), any::<bool>()).prop_map(|(rp, pre, rr)| {
        PolicyConfig::new(
            if rp {
                Priority::ReadPriority
            } else {
                Priority::WritePriority
            },
            if pre {
                Preemption::PreemptiveResume
            } else {
                Preemption::NonPreemptive
            },
            if rr {
                Routing::RoundRobin
            } else {
                Routing::UniformRandom
            },
        )
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn digamma_recurrence(x in 1e-3f64..1e3) {
        let lhs = digamma(x + 1.0).unwrap();
        let rhs = digamma(x).unwrap() + 1.0 / x;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
    }

    #[test]
    fn digamma_at_integers_is_shifted_harmonic(n in 0usize..5000) {
        let psi = digamma(n as f64 + 1.0).unwrap();
        prop_assert!((psi - (harmonic(n) - EULER_GAMMA)).abs() <= 1e-9);
    }

    #[test]
    fn read_priority_sum_equals_digamma_form(loads in stable_loads(), n in 0usize..200) {
        let l = loads.with_n(n);
        let p = SystemParams::new(l.rho_r * 10.0, l.rho_w, 10.0, 1.0, n).unwrap();
        let l = p.loads();
        let sum = rp_mean_write(&p).unwrap();
        let closed = rp_mean_write_digamma(&l, n).unwrap();
        prop_assert!((sum - closed).abs() <= 1e-9 * sum.abs().max(1e-300), "{sum} vs {closed}");
    }

    #[test]
    fn zero_redundancy_iff_negative_xstar(loads in stable_loads()) {
        let x = wp_xstar(&loads).unwrap();
        prop_assert_eq!(wp_zero_redundancy(&loads), x < 0.0);
    }

    #[test]
    fn counts_are_monotone_in_n(loads in stable_loads(), n in 0usize..100) {
        let p = SystemParams::new(loads.rho_r * loads.alpha, loads.rho_w, loads.alpha, 1.0, n).unwrap();
        let q = p.with_n(n + 1);
        let (l0, l1) = (p.loads(), q.loads());
        prop_assert!(wp_mean_write(&l1, n + 1).unwrap() > wp_mean_write(&l0, n).unwrap());
        prop_assert!(wp_mean_read(&q).unwrap() <= wp_mean_read(&p).unwrap());
        prop_assert!(rp_mean_read(&l1, n + 1).unwrap() <= rp_mean_read(&l0, n).unwrap());
    }

    #[test]
    fn write_priority_bounds_bracket_the_approximation(loads in stable_loads(), n in 0usize..50) {
        let p = SystemParams::new(loads.rho_r * loads.alpha, loads.rho_w, loads.alpha, 1.0, n).unwrap();
        let b = wp_breakdown(&p).unwrap();
        prop_assert!(b.lower_bound_total <= b.upper_bound_total + 1e-12);
        prop_assert!((b.upper_bound_total - b.total).abs() <= 1e-9 * b.total);
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn simulated_runs_obey_littles_law_and_fcfs(
        rho_w in 0.2f64..0.6,
        margin in 0.15f64..0.25,
        frac in 0.3f64..1.0,
        mu_r in 2.0f64..6.0,
        n in 0usize..4,
        policy in policy(),
        seed in any::<u64>(),
    ) {
        // rho_r chosen so that 1 - rho_w - rho_r / (n + 1) >= margin.
        let rho_r = frac * (1.0 - rho_w - margin) * (n as f64 + 1.0);
        let p = SystemParams::new(rho_r * mu_r, rho_w, mu_r, 1.0, n).unwrap();
        // About 32000 arrivals of the rarer class after warmup. Shorter runs
        // occasionally end a write burst on a window edge and miss the bound.
        let horizon = 40000.0 / p.lambda_r.min(p.lambda_w);
        let cfg = SimConfig {
            horizon,
            replications: 1,
            seed,
            trace: true,
            ..SimConfig::exponential(p, policy).unwrap()
        };
        let res = run(&cfg).unwrap();
        prop_assert!(res.is_stable());
        prop_assert!(res.satisfies_littles_law(), "gap {:?}", res.littles_law_gap);
        prop_assert!(res.traces.iter().all(|t| t.is_fcfs()));
        prop_assert!((res.mean_total - res.mean_read - res.mean_write).abs() <= 1e-9 * res.mean_total.max(1.0));
    }
}
