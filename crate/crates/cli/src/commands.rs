//! Subcommand implementations. Each returns rows and optional text; the
//! caller decides where they go.

use std::fmt::Write as _;

use replica_tradeoff::analytic::{
    rp_breakdown, rp_optimal_n, wp_breakdown, wp_optimal_n, wp_xstar, OptimalRedundancy,
    OptimizerMethod,
};
use replica_tradeoff::oracle::{
    build_rp_generator, stationary, RpCaps, TandemChain, TRUSTED_TRUNCATION_MASS,
};
use replica_tradeoff::sim::{empirical_optimal_n, run, SimConfig, SimResult};
use replica_tradeoff::{Priority, SystemParams};

use crate::config::{Axis, RunConfig, Source};
use crate::error::{CliError, CliResult};
use crate::output::{priority_name, render_svg, Row, RowSource, Series};

pub const MAX_WRITE_ORACLE_N: usize = 4;
pub const MAX_READ_ORACLE_N: usize = 2;

fn warn(msg: impl std::fmt::Display) {
    eprintln!("warning: {msg}");
}

/// Analytic means `(read, write)` at `params.n`.
fn analytic_means(priority: Priority, params: &SystemParams) -> CliResult<(f64, f64)> {
    Ok(match priority {
        Priority::WritePriority => {
            let b = wp_breakdown(params)?;
            (b.mean_read, b.mean_write)
        }
        Priority::ReadPriority => {
            let b = rp_breakdown(params)?;
            (b.mean_read, b.mean_write)
        }
    })
}

fn analytic_rows(cfg: &RunConfig, params: &SystemParams, bounds: bool) -> CliResult<Vec<Row>> {
    let p = cfg.priority();
    let (read, write) = analytic_means(p, params)?;
    let mut rows = vec![Row::new(RowSource::Analytic, p, *params, read, write)];
    if bounds {
        let b = wp_breakdown(params)?;
        rows.push(Row::new(
            RowSource::BoundLb,
            p,
            *params,
            b.mean_read,
            b.lower_bound_total - b.mean_read,
        ));
        rows.push(Row::new(
            RowSource::BoundUb,
            p,
            *params,
            b.mean_read,
            b.upper_bound_total - b.mean_read,
        ));
    }
    Ok(rows)
}

fn optimum(
    cfg: &RunConfig,
    params: &SystemParams,
    method: OptimizerMethod,
) -> CliResult<OptimalRedundancy> {
    Ok(match cfg.priority() {
        Priority::WritePriority => wp_optimal_n(params, method)?,
        Priority::ReadPriority => rp_optimal_n(params)?,
    })
}

/// Exact means `(read, write)` from the truncated Markov chains.
pub fn oracle_means(cfg: &RunConfig, params: &SystemParams) -> CliResult<(f64, f64)> {
    params.ensure_stable()?;
    let n = params.n;
    match cfg.priority() {
        Priority::WritePriority => {
            if n > MAX_WRITE_ORACLE_N {
                return Err(CliError::Config(format!(
                    "write-priority oracle supports n <= {MAX_WRITE_ORACLE_N}, got {n}"
                )));
            }
            // Read means are exact in closed form. The primary is an M/M/1
            // queue whose Poisson output feeds the secondaries.
            let b = wp_breakdown(params)?;
            let loads = params.loads();
            let mut writes = loads.nu;
            if n > 0 {
                let g =
                    TandemChain::new(n, params.lambda_w, params.mu_w, cfg.oracle_cap).build()?;
                let res = stationary(&g)?;
                check_truncation(res.truncation_mass, "oracle_cap")?;
                writes += res.mean_writes;
            }
            Ok((b.mean_read, writes))
        }
        Priority::ReadPriority => {
            if !(1..=MAX_READ_ORACLE_N).contains(&n) {
                return Err(CliError::Config(format!(
                    "read-priority oracle supports n in 1..={MAX_READ_ORACLE_N}, got {n}"
                )));
            }
            let caps = RpCaps {
                write: cfg.oracle_write_cap,
                read: cfg.oracle_read_cap,
            };
            let res = stationary(&build_rp_generator(params, caps)?)?;
            check_truncation(res.truncation_mass, "oracle_write_cap/oracle_read_cap")?;
            Ok((res.mean_reads, res.mean_writes))
        }
    }
}

fn check_truncation(mass: f64, keys: &str) -> CliResult<()> {
    if mass > TRUSTED_TRUNCATION_MASS {
        Err(CliError::Numerical(format!(
            "truncation mass {mass:.3e} exceeds {TRUSTED_TRUNCATION_MASS:e}; raise {keys}"
        )))
    } else {
        Ok(())
    }
}

fn sim_row(cfg: &RunConfig, sim: &SimConfig, res: &SimResult) -> Row {
    if !res.satisfies_littles_law() {
        warn(format!(
            "n = {}: Little's law gaps {:.3}/{:.3} exceed tolerance; lengthen the horizon",
            sim.params.n, res.littles_law_gap.0, res.littles_law_gap.1
        ));
    }
    Row {
        ci_halfwidth: res.ci_halfwidth.map(|c| c.mean_total),
        seed: Some(cfg.seed),
        ..Row::new(
            RowSource::Simulation,
            cfg.priority(),
            sim.params,
            res.mean_read,
            res.mean_write,
        )
    }
}

pub fn simulate(cfg: &RunConfig) -> CliResult<Vec<Row>> {
    let sim = cfg.sim_config();
    if sim.stability_margin() <= 0.0 {
        return Err(CliError::Unstable(format!(
            "offered load {:.6} >= 1 at n = {}",
            1.0 - sim.stability_margin(),
            sim.params.n
        )));
    }
    let res = run(&sim)?;
    Ok(vec![sim_row(cfg, &sim, &res)])
}

pub fn exact(cfg: &RunConfig) -> CliResult<Vec<Row>> {
    let (read, write) = oracle_means(cfg, &cfg.params)?;
    Ok(vec![Row::new(
        RowSource::Oracle,
        cfg.priority(),
        cfg.params,
        read,
        write,
    )])
}

/// Human-readable summary of the closed-form quantities at the configured n.
pub fn analytic_report(cfg: &RunConfig) -> CliResult<(String, Vec<Row>)> {
    let params = &cfg.params;
    params.ensure_stable()?;
    let p = cfg.priority();
    let l = params.loads();
    let bounds = p == Priority::WritePriority;
    let rows = analytic_rows(cfg, params, bounds)?;
    let mut s = String::new();
    let _ = writeln!(s, "priority        {}", priority_name(p));
    let _ = writeln!(
        s,
        "rates           lambda_r={} lambda_w={} mu_r={} mu_w={}",
        params.lambda_r, params.lambda_w, params.mu_r, params.mu_w
    );
    let _ = writeln!(
        s,
        "servers         n={} total={}",
        params.n,
        params.total_servers()
    );
    let _ = writeln!(
        s,
        "loads           rho_r={:.6} rho_w={:.6} nu={:.6} alpha={:.6}",
        l.rho_r, l.rho_w, l.nu, l.alpha
    );
    let _ = writeln!(s, "per-server load {:.6}", 1.0 - l.stability_margin);
    let (wname, rname) = match p {
        Priority::WritePriority => ("f(n)", "g(n)"),
        Priority::ReadPriority => ("p(n)", "q(n)"),
    };
    let a = &rows[0];
    let _ = writeln!(s, "mean writes     {wname} = {:.9}", a.mean_write);
    let _ = writeln!(s, "mean reads      {rname} = {:.9}", a.mean_read);
    let _ = writeln!(s, "mean total      {:.9}", a.mean_total());
    if bounds {
        let _ = writeln!(
            s,
            "total bounds    [{:.9}, {:.9}]",
            rows[1].mean_total(),
            rows[2].mean_total()
        );
        match wp_xstar(&l) {
            Ok(x) => {
                let _ = writeln!(s, "x*              {x:.6}");
            }
            Err(e) => {
                let _ = writeln!(s, "x*              unavailable: {e}");
            }
        }
    }
    let methods: &[OptimizerMethod] = match p {
        Priority::WritePriority => &[OptimizerMethod::ClosedForm, OptimizerMethod::ExactScan],
        Priority::ReadPriority => &[OptimizerMethod::NumericScan],
    };
    for &m in methods {
        let label = match m {
            OptimizerMethod::ClosedForm => "closed-form",
            OptimizerMethod::ExactScan => "exact-scan",
            OptimizerMethod::NumericScan => "scan",
        };
        match optimum(cfg, params, m) {
            Ok(o) => {
                let _ = writeln!(
                    s,
                    "n* ({label:<11}) {} (total servers {}, mean {:.9})",
                    o.n_star, o.total_servers, o.mean_at_n_star
                );
            }
            Err(CliError::Numerical(e)) => return Err(CliError::Numerical(e)),
            Err(e) => {
                let _ = writeln!(s, "n* ({label:<11}) unavailable: {e}");
            }
        }
    }
    Ok((s, rows))
}

fn with_rate(params: &SystemParams, axis: Axis, value: f64) -> SystemParams {
    let mut p = *params;
    match axis {
        Axis::N => p.n = value as usize,
        Axis::LambdaR => p.lambda_r = value,
        Axis::LambdaW => p.lambda_w = value,
    }
    p
}

/// Treats instability as a skipped point; every other error aborts.
fn skip_unstable<T>(r: CliResult<T>, what: &str) -> CliResult<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(CliError::Unstable(m)) => {
            warn(format!("{what}: skipped, {m}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

pub struct SweepOutput {
    pub rows: Vec<Row>,
    pub svg: String,
}

pub fn sweep(cfg: &RunConfig) -> CliResult<SweepOutput> {
    let sw = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep needs the sweep and grid keys".into()))?;
    let bounds = cfg.sources.contains(&Source::Bounds);
    if bounds && cfg.priority() != Priority::WritePriority {
        return Err(CliError::Config(
            "bounds are defined for write priority only".into(),
        ));
    }
    if sw.axis != Axis::N && cfg.sources.contains(&Source::Oracle) {
        return Err(CliError::Config(
            "the oracle source supports sweep=n only".into(),
        ));
    }
    let mut rows = Vec::new();
    let mut points = 0;
    for &v in &sw.grid {
        let params = with_rate(&cfg.params, sw.axis, v);
        params.validate()?;
        let what = match sw.axis {
            Axis::N => format!("n = {v}"),
            Axis::LambdaR => format!("lambda_r = {v}"),
            Axis::LambdaW => format!("lambda_w = {v}"),
        };
        let before = rows.len();
        for &src in &cfg.sources {
            let produced = match (sw.axis, src) {
                (_, Source::Bounds) => continue,
                (Axis::N, Source::Analytic) => {
                    skip_unstable(analytic_rows(cfg, &params, bounds), &what)?
                }
                (Axis::N, Source::Oracle) => skip_unstable(oracle_means(cfg, &params), &what)?
                    .map(|(r, w)| vec![Row::new(RowSource::Oracle, cfg.priority(), params, r, w)]),
                (Axis::N, Source::Simulation) => {
                    let sim = SimConfig {
                        params,
                        ..cfg.sim_config()
                    };
                    if sim.stability_margin() <= 0.0 {
                        warn(format!("{what}: skipped, simulated load is not below 1"));
                        None
                    } else {
                        Some(vec![sim_row(cfg, &sim, &run(&sim)?)])
                    }
                }
                (_, Source::Analytic) => skip_unstable(
                    optimum(cfg, &params, cfg.method)
                        .and_then(|o| analytic_rows(cfg, &params.with_n(o.n_star), bounds)),
                    &what,
                )?,
                (_, Source::Simulation) => {
                    let sim = SimConfig {
                        params,
                        ..cfg.sim_config()
                    };
                    skip_unstable(
                        empirical_optimal_n(&sim, cfg.n_range.clone()).map_err(CliError::from),
                        &what,
                    )?
                    .map(|(n, curve)| {
                        let (_, res) = curve
                            .iter()
                            .find(|(k, _)| *k == n)
                            .expect("argmin is on the curve");
                        vec![sim_row(cfg, &sim.with_n(n), res)]
                    })
                }
                (_, Source::Oracle) => unreachable!("rejected above"),
            };
            rows.extend(produced.into_iter().flatten());
        }
        if rows.len() > before {
            points += 1;
        }
    }
    if points == 0 {
        return Err(CliError::Unstable("every grid point is unstable".into()));
    }
    let svg = sweep_svg(cfg, sw.axis, &rows);
    Ok(SweepOutput { rows, svg })
}

fn sweep_svg(cfg: &RunConfig, axis: Axis, rows: &[Row]) -> String {
    let sources = [
        RowSource::Analytic,
        RowSource::Simulation,
        RowSource::Oracle,
        RowSource::BoundLb,
        RowSource::BoundUb,
    ];
    let series: Vec<Series> = sources
        .iter()
        .filter_map(|&src| {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.source == src)
                .map(|r| match axis {
                    Axis::N => (r.params.total_servers() as f64, r.mean_total()),
                    Axis::LambdaR => (r.params.lambda_r, r.params.total_servers() as f64),
                    Axis::LambdaW => (r.params.lambda_w, r.params.total_servers() as f64),
                })
                .collect();
            (!points.is_empty()).then(|| Series {
                label: src.name().to_string(),
                points,
            })
        })
        .collect();
    let title = format!("{} priority", priority_name(cfg.priority()));
    match axis {
        Axis::N => render_svg(&title, "total servers", "mean requests in system", &series),
        Axis::LambdaR => render_svg(
            &title,
            "read arrival rate",
            "optimal total servers",
            &series,
        ),
        Axis::LambdaW => render_svg(
            &title,
            "write arrival rate",
            "optimal total servers",
            &series,
        ),
    }
}
