//! Flat `key=value` run configuration.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use replica_tradeoff::analytic::OptimizerMethod;
use replica_tradeoff::sim::{
    load_samples, PolicyConfig, Preemption, Routing, ServiceDistribution, SimConfig,
    DEFAULT_HORIZON, DEFAULT_REPLICATIONS, DEFAULT_WARMUP_FRACTION,
};
use replica_tradeoff::{Priority, SystemParams};

use crate::error::{CliError, CliResult};

const KEYS: &[&str] = &[
    "lambda_r",
    "lambda_w",
    "mu_r",
    "mu_w",
    "n",
    "priority",
    "preemption",
    "routing",
    "read_dist",
    "read_rate",
    "read_shift",
    "read_shape",
    "read_scale",
    "read_location",
    "read_samples",
    "write_dist",
    "write_rate",
    "write_shift",
    "write_shape",
    "write_scale",
    "write_location",
    "write_samples",
    "horizon",
    "warmup_fraction",
    "replications",
    "seed",
    "method",
    "sweep",
    "grid",
    "sources",
    "n_range",
    "oracle_cap",
    "oracle_write_cap",
    "oracle_read_cap",
    "out",
    "svg",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    N,
    LambdaR,
    LambdaW,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Source {
    Analytic,
    Bounds,
    Oracle,
    Simulation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: Axis,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub policy: PolicyConfig,
    pub read_dist: ServiceDistribution,
    pub write_dist: ServiceDistribution,
    pub horizon: f64,
    pub warmup_fraction: f64,
    pub replications: usize,
    pub seed: u64,
    pub method: OptimizerMethod,
    pub sweep: Option<Sweep>,
    pub sources: Vec<Source>,
    /// Candidate `n` for simulated optima in rate sweeps.
    pub n_range: RangeInclusive<usize>,
    /// Level cap of the write-priority tandem oracle.
    pub oracle_cap: usize,
    pub oracle_write_cap: usize,
    pub oracle_read_cap: usize,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl RunConfig {
    pub fn priority(&self) -> Priority {
        self.policy.priority
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            params: self.params,
            policy: self.policy,
            read_dist: self.read_dist.clone(),
            write_dist: self.write_dist.clone(),
            horizon: self.horizon,
            warmup_fraction: self.warmup_fraction,
            replications: self.replications,
            seed: self.seed,
            trace: false,
        }
    }
}

struct Entries {
    map: BTreeMap<String, (String, usize)>,
}

fn invalid(line: usize, key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("line {line}: {key}: {msg}"))
}

impl Entries {
    fn parse(text: &str) -> CliResult<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {line}: expected key=value, got {content:?}"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(CliError::Config(format!(
                    "line {line}: unknown key {key:?}"
                )));
            }
            if map
                .insert(key.to_string(), (value.to_string(), line))
                .is_some()
            {
                return Err(CliError::Config(format!(
                    "line {line}: duplicate key {key:?}"
                )));
            }
        }
        Ok(Self { map })
    }

    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.map.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn number(&self, key: &str) -> CliResult<Option<(f64, usize)>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => {
                let x: f64 = v
                    .parse()
                    .map_err(|_| invalid(line, key, format!("not a number: {v:?}")))?;
                if !x.is_finite() {
                    return Err(invalid(line, key, "must be finite"));
                }
                Ok(Some((x, line)))
            }
        }
    }

    fn positive(&self, key: &str) -> CliResult<Option<f64>> {
        match self.number(key)? {
            Some((x, _)) if x > 0.0 => Ok(Some(x)),
            Some(_) => Err(CliError::Config(format!("{key} must be positive"))),
            None => Ok(None),
        }
    }

    fn non_negative(&self, key: &str) -> CliResult<Option<f64>> {
        match self.number(key)? {
            Some((x, _)) if x >= 0.0 => Ok(Some(x)),
            Some(_) => Err(CliError::Config(format!("{key} must be non-negative"))),
            None => Ok(None),
        }
    }

    fn integer<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| invalid(line, key, format!("not a non-negative integer: {v:?}"))),
        }
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)]) -> CliResult<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => options
                .iter()
                .find(|(name, _)| *name == v)
                .map(|(_, t)| Some(*t))
                .ok_or_else(|| {
                    let allowed: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                    invalid(
                        line,
                        key,
                        format!("invalid value {v:?} (allowed: {})", allowed.join(", ")),
                    )
                }),
        }
    }
}

fn required<T>(v: Option<T>, key: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Config(format!("missing required key {key:?}")))
}

#[derive(Clone, Copy)]
enum Family {
    Exponential,
    ShiftedExponential,
    Pareto,
    Weibull,
    Empirical,
}

fn distribution(
    e: &Entries,
    prefix: &str,
    mu: Option<f64>,
    base: Option<&Path>,
) -> CliResult<ServiceDistribution> {
    let key = |s: &str| format!("{prefix}_{s}");
    let family = e
        .choice(
            &key("dist"),
            &[
                ("exponential", Family::Exponential),
                ("shifted-exponential", Family::ShiftedExponential),
                ("pareto", Family::Pareto),
                ("weibull", Family::Weibull),
                ("empirical", Family::Empirical),
            ],
        )?
        .unwrap_or(Family::Exponential);
    let need = |s: &str| -> CliResult<f64> { required(e.positive(&key(s))?, &key(s)) };
    let dist = match family {
        Family::Exponential => {
            let mu_key = if prefix == "read" { "mu_r" } else { "mu_w" };
            let rate = match e.positive(&key("rate"))? {
                Some(r) => r,
                None => required(mu, mu_key)?,
            };
            ServiceDistribution::exponential(rate)
        }
        Family::ShiftedExponential => ServiceDistribution::shifted_exponential(
            need("rate")?,
            e.non_negative(&key("shift"))?.unwrap_or(0.0),
        ),
        Family::Pareto => ServiceDistribution::pareto(need("shape")?, need("scale")?),
        Family::Weibull => ServiceDistribution::weibull(
            need("shape")?,
            need("scale")?,
            e.non_negative(&key("location"))?.unwrap_or(0.0),
        ),
        Family::Empirical => {
            let (path, line) = required(e.raw(&key("samples")), &key("samples"))?;
            let mut full = PathBuf::from(path);
            if let (Some(dir), true) = (base, full.is_relative()) {
                full = dir.join(full);
            }
            let samples = load_samples(&full).map_err(|err| invalid(line, &key("samples"), err))?;
            ServiceDistribution::empirical(samples)
        }
    };
    Ok(dist?)
}

fn parse_range(v: &str, line: usize, key: &str) -> CliResult<RangeInclusive<usize>> {
    let (a, b) = v
        .split_once("..")
        .ok_or_else(|| invalid(line, key, format!("expected A..B, got {v:?}")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| invalid(line, key, format!("bad bound {s:?}")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    if a > b {
        return Err(invalid(line, key, "empty range"));
    }
    Ok(a..=b)
}

/// Stability boundary of the swept rate, holding the other one fixed.
fn boundary(axis: Axis, params: &SystemParams) -> Option<f64> {
    let loads = params.loads();
    match axis {
        Axis::N => None,
        Axis::LambdaR => Some(params.mu_r * (1.0 - loads.rho_w)),
        Axis::LambdaW => Some(params.mu_w * (1.0 - loads.rho_r)),
    }
}

fn parse_grid(e: &Entries, axis: Axis, params: &SystemParams) -> CliResult<Vec<f64>> {
    let (v, line) = required(e.raw("grid"), "grid")?;
    if let Some(k) = v.strip_prefix("stability:") {
        let k: usize = k
            .trim()
            .parse()
            .ok()
            .filter(|&k| k > 0)
            .ok_or_else(|| invalid(line, "grid", "stability:K needs a positive integer K"))?;
        let b = boundary(axis, params)
            .ok_or_else(|| invalid(line, "grid", "stability grids apply to rate sweeps only"))?;
        if b <= 0.0 {
            return Err(CliError::Unstable(
                "the fixed rate leaves no stable range to sweep".into(),
            ));
        }
        return Ok((1..=k).map(|i| 0.95 * i as f64 / k as f64 * b).collect());
    }
    if v.contains("..") {
        if axis != Axis::N {
            return Err(invalid(
                line,
                "grid",
                "integer ranges apply to the n axis only",
            ));
        }
        return Ok(parse_range(v, line, "grid")?.map(|n| n as f64).collect());
    }
    let grid = v
        .split(',')
        .map(|s| {
            let x: f64 = s
                .trim()
                .parse()
                .map_err(|_| invalid(line, "grid", format!("not a number: {s:?}")))?;
            if !(x >= 0.0 && x.is_finite()) {
                return Err(invalid(
                    line,
                    "grid",
                    format!("values must be non-negative, got {x}"),
                ));
            }
            if axis == Axis::N && x.fract() != 0.0 {
                return Err(invalid(
                    line,
                    "grid",
                    format!("n must be an integer, got {x}"),
                ));
            }
            Ok(x)
        })
        .collect::<CliResult<Vec<f64>>>()?;
    Ok(grid)
}

/// Parses a configuration. Relative sample paths resolve against `base`.
pub fn parse_config(text: &str, base: Option<&Path>) -> CliResult<RunConfig> {
    let e = Entries::parse(text)?;
    let lambda_r = e.non_negative("lambda_r")?;
    let lambda_w = e.non_negative("lambda_w")?;
    let mu_r = e.positive("mu_r")?;
    let mu_w = e.positive("mu_w")?;
    let n = e.integer::<usize>("n")?.unwrap_or(1);
    let read_dist = distribution(&e, "read", mu_r, base)?;
    let write_dist = distribution(&e, "write", mu_w, base)?;
    let params = SystemParams::new(
        required(lambda_r, "lambda_r")?,
        required(lambda_w, "lambda_w")?,
        mu_r.unwrap_or_else(|| read_dist.rate()),
        mu_w.unwrap_or_else(|| write_dist.rate()),
        n,
    )?;

    let priority = e
        .choice(
            "priority",
            &[
                ("write", Priority::WritePriority),
                ("read", Priority::ReadPriority),
            ],
        )?
        .unwrap_or(Priority::WritePriority);
    let preemption = e
        .choice(
            "preemption",
            &[
                ("preemptive", Preemption::PreemptiveResume),
                ("non-preemptive", Preemption::NonPreemptive),
            ],
        )?
        .unwrap_or(Preemption::PreemptiveResume);
    let routing = e
        .choice(
            "routing",
            &[
                ("random", Routing::UniformRandom),
                ("round-robin", Routing::RoundRobin),
            ],
        )?
        .unwrap_or(Routing::UniformRandom);
    let method = e
        .choice(
            "method",
            &[
                ("closed-form", OptimizerMethod::ClosedForm),
                ("exact-scan", OptimizerMethod::ExactScan),
            ],
        )?
        .unwrap_or(OptimizerMethod::ClosedForm);

    let horizon = e.positive("horizon")?.unwrap_or(DEFAULT_HORIZON);
    let warmup_fraction = e
        .non_negative("warmup_fraction")?
        .unwrap_or(DEFAULT_WARMUP_FRACTION);
    if warmup_fraction >= 1.0 {
        return Err(CliError::Config("warmup_fraction must be below 1".into()));
    }
    let replications = e
        .integer::<usize>("replications")?
        .unwrap_or(DEFAULT_REPLICATIONS);
    if replications == 0 {
        return Err(CliError::Config("replications must be at least 1".into()));
    }
    let seed = e.integer::<u64>("seed")?.unwrap_or(0);

    let sweep = match e.choice(
        "sweep",
        &[
            ("n", Axis::N),
            ("lambda_r", Axis::LambdaR),
            ("lambda_w", Axis::LambdaW),
        ],
    )? {
        Some(axis) => Some(Sweep {
            axis,
            grid: parse_grid(&e, axis, &params)?,
        }),
        None => {
            if let Some((_, line)) = e.raw("grid") {
                return Err(invalid(line, "grid", "set without a sweep axis"));
            }
            None
        }
    };
    let sources = match e.raw("sources") {
        None => vec![Source::Analytic],
        Some((v, line)) => {
            let mut out = Vec::new();
            for name in v.split(',').map(str::trim) {
                let s = match name {
                    "analytic" => Source::Analytic,
                    "bounds" => Source::Bounds,
                    "oracle" => Source::Oracle,
                    "simulation" => Source::Simulation,
                    other => {
                        return Err(invalid(
                            line,
                            "sources",
                            format!(
                                "invalid value {other:?} (allowed: analytic, bounds, oracle, simulation)"
                            ),
                        ))
                    }
                };
                if !out.contains(&s) {
                    out.push(s);
                }
            }
            out.sort();
            out
        }
    };
    let n_range = match e.raw("n_range") {
        Some((v, line)) => parse_range(v, line, "n_range")?,
        None => 0..=10,
    };
    let cap = |key: &str, default: usize| -> CliResult<usize> {
        Ok(e.integer::<usize>(key)?.unwrap_or(default))
    };

    Ok(RunConfig {
        params,
        policy: PolicyConfig::new(priority, preemption, routing),
        read_dist,
        write_dist,
        horizon,
        warmup_fraction,
        replications,
        seed,
        method,
        sweep,
        sources,
        n_range,
        oracle_cap: cap("oracle_cap", 60)?,
        oracle_write_cap: cap("oracle_write_cap", 30)?,
        oracle_read_cap: cap("oracle_read_cap", 8)?,
        out: e.raw("out").map(|(v, _)| PathBuf::from(v)),
        svg: e.raw("svg").map(|(v, _)| PathBuf::from(v)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "lambda_r=3.6\nlambda_w=0.6\nmu_r=10\nmu_w=1\npriority=write";

    fn err(text: &str) -> String {
        parse_config(text, None).unwrap_err().to_string()
    }

    #[test]
    fn basic_config() {
        let c = parse_config(BASIC, None).unwrap();
        assert_eq!(c.params, SystemParams::new(3.6, 0.6, 10.0, 1.0, 1).unwrap());
        assert_eq!(c.priority(), Priority::WritePriority);
        assert_eq!(c.read_dist, ServiceDistribution::Exponential { rate: 10.0 });
        assert_eq!(c.replications, DEFAULT_REPLICATIONS);
        assert!(c.sweep.is_none());
        assert_eq!(c.sources, vec![Source::Analytic]);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# rates\nlambda_r = 3.6  # reads\n\nlambda_w=0.6\nmu_r=10\nmu_w=1\n";
        assert!(parse_config(text, None).is_ok());
    }

    #[test]
    fn diagnostics() {
        assert!(err("mu_r=0").contains("mu_r must be positive"));
        let e = err(&format!("{BASIC}\nrouting=fastest"));
        assert!(e.contains("random") && e.contains("round-robin"), "{e}");
        assert!(err(&format!("{BASIC}\ncolour=blue")).contains("unknown key"));
        assert!(err(&format!("{BASIC}\nmu_r=3")).contains("duplicate"));
        assert!(err("lambda_w=0.6\nmu_r=10\nmu_w=1").contains("lambda_r"));
        assert!(err(&format!("{BASIC}\nn=two")).contains("line 6"));
        assert!(err(&format!(
            "{BASIC}\nread_dist=empirical\nread_samples=/no/such/file"
        ))
        .contains("read_samples"));
    }

    #[test]
    fn stability_grid_spacing() {
        let text = "lambda_r=3.6\nlambda_w=0.6\nmu_r=10\nmu_w=1\nsweep=lambda_w\ngrid=stability:10";
        let grid = parse_config(text, None).unwrap().sweep.unwrap().grid;
        assert_eq!(grid.len(), 10);
        assert!((grid[9] - 0.608).abs() < 1e-12);
        assert!((grid[0] - 0.0608).abs() < 1e-12);
    }

    #[test]
    fn grids_and_sources() {
        let text = format!("{BASIC}\nsweep=n\ngrid=0..3\nsources=simulation,analytic,bounds");
        let c = parse_config(&text, None).unwrap();
        assert_eq!(c.sweep.unwrap().grid, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(
            c.sources,
            vec![Source::Analytic, Source::Bounds, Source::Simulation]
        );
        assert!(err(&format!("{BASIC}\nsweep=n\ngrid=1.5")).contains("integer"));
        assert!(err(&format!("{BASIC}\ngrid=1,2")).contains("without a sweep"));
        assert!(err(&format!("{BASIC}\nsweep=n\ngrid=stability:4")).contains("rate sweeps"));
    }

    #[test]
    fn shifted_exponential_without_service_rates() {
        let text = "lambda_r=15\nlambda_w=0.3\nread_dist=shifted-exponential\nread_rate=136.096\n\
                    read_shift=0.015\nwrite_dist=shifted-exponential\nwrite_rate=12.43\nwrite_shift=0.105";
        let c = parse_config(text, None).unwrap();
        assert!((1.0 / c.params.mu_w - (0.105 + 1.0 / 12.43)).abs() < 1e-12);
        assert!(err(
            "lambda_r=1\nlambda_w=0.1\nmu_w=1\nread_dist=pareto\nread_shape=0.5\nread_scale=1"
        )
        .contains("shape"));
    }

    #[test]
    fn empirical_samples_resolve_against_config_dir() {
        let dir = std::env::temp_dir().join(format!("rt-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("reads.txt"), "# seconds\n0.02\n0.03\n").unwrap();
        let text = format!("{BASIC}\nread_dist=empirical\nread_samples=reads.txt");
        let c = parse_config(&text, Some(&dir)).unwrap();
        assert_eq!(
            c.read_dist,
            ServiceDistribution::Empirical {
                samples: vec![0.02, 0.03]
            }
        );
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
