//! WebAssembly bindings for the demo page in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string. The
//! `*_json` functions hold the logic and run natively in tests; the
//! exported wrappers only convert errors for JavaScript.

use replica_tradeoff::analytic::{
    rp_breakdown, rp_optimal_n, wp_breakdown, wp_optimal_n, OptimalRedundancy, OptimizerMethod,
};
use replica_tradeoff::sim::{run, PolicyConfig, SimConfig};
use replica_tradeoff::{Priority, SystemParams};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest `n` the curve and simulation accept.
pub const MAX_N: usize = 64;
/// Longest simulated horizon, keeping page interactions short.
pub const MAX_HORIZON: f64 = 50_000.0;

fn priority(name: &str) -> Result<Priority, String> {
    match name {
        "write" => Ok(Priority::WritePriority),
        "read" => Ok(Priority::ReadPriority),
        other => Err(format!(
            "unknown priority {other:?}, expected read or write"
        )),
    }
}

fn params(
    lambda_r: f64,
    lambda_w: f64,
    mu_r: f64,
    mu_w: f64,
    n: usize,
) -> Result<SystemParams, String> {
    SystemParams::new(lambda_r, lambda_w, mu_r, mu_w, n).map_err(|e| e.to_string())
}

/// Mean requests in system for n = 0..=max_n. Unstable n are omitted.
pub fn curve_json(
    lambda_r: f64,
    lambda_w: f64,
    mu_r: f64,
    mu_w: f64,
    prio: &str,
    max_n: usize,
) -> Result<Value, String> {
    let prio = priority(prio)?;
    let base = params(lambda_r, lambda_w, mu_r, mu_w, 0)?;
    let mut points = Vec::new();
    for n in 0..=max_n.min(MAX_N) {
        let p = base.with_n(n);
        if !p.is_stable() {
            continue;
        }
        let point = match prio {
            Priority::WritePriority => {
                let b = wp_breakdown(&p).map_err(|e| e.to_string())?;
                json!({
                    "n": n, "total_servers": n + 1,
                    "mean_read": b.mean_read, "mean_write": b.mean_write, "mean_total": b.total,
                    "lower": b.lower_bound_total, "upper": b.upper_bound_total,
                })
            }
            Priority::ReadPriority => {
                let b = rp_breakdown(&p).map_err(|e| e.to_string())?;
                json!({
                    "n": n, "total_servers": n + 1,
                    "mean_read": b.mean_read, "mean_write": b.mean_write, "mean_total": b.total,
                })
            }
        };
        points.push(point);
    }
    let best = points
        .iter()
        .min_by(|a, b| total_of(a).total_cmp(&total_of(b)))
        .map(|p| p["n"].clone());
    Ok(json!({ "points": points, "best_n": best }))
}

fn total_of(point: &Value) -> f64 {
    point["mean_total"].as_f64().unwrap_or(f64::INFINITY)
}

/// Optimal total servers as the swept arrival rate (`"read"` or `"write"`)
/// runs over `steps` points up to 95% of its stability limit.
pub fn optimum_sweep_json(
    axis: &str,
    lambda_r: f64,
    lambda_w: f64,
    mu_r: f64,
    mu_w: f64,
    steps: usize,
) -> Result<Value, String> {
    let base = params(lambda_r, lambda_w, mu_r, mu_w, 0)?;
    let loads = base.loads();
    let limit = match axis {
        "read" => mu_r * (1.0 - loads.rho_w),
        "write" => mu_w * (1.0 - loads.rho_r),
        other => return Err(format!("unknown axis {other:?}, expected read or write")),
    };
    if limit <= 0.0 {
        return Err("the fixed rate leaves no stable range".into());
    }
    let steps = steps.clamp(2, 200);
    let mut rows = Vec::new();
    for k in 1..=steps {
        let x = 0.95 * k as f64 / steps as f64 * limit;
        let p = if axis == "read" {
            SystemParams {
                lambda_r: x,
                ..base
            }
        } else {
            SystemParams {
                lambda_w: x,
                ..base
            }
        };
        let total =
            |r: replica_tradeoff::Result<OptimalRedundancy>| r.ok().map(|o| o.total_servers);
        rows.push(json!({
            "rate": x,
            "write_closed_form": total(wp_optimal_n(&p, OptimizerMethod::ClosedForm)),
            "write_exact": total(wp_optimal_n(&p, OptimizerMethod::ExactScan)),
            "read": total(rp_optimal_n(&p)),
        }));
    }
    Ok(json!({ "axis": axis, "limit": limit, "rows": rows }))
}

/// Short preemptive simulation at one `n`, next to the analytic means.
#[allow(clippy::too_many_arguments)]
pub fn simulate_json(
    lambda_r: f64,
    lambda_w: f64,
    mu_r: f64,
    mu_w: f64,
    n: usize,
    prio: &str,
    horizon: f64,
    seed: u64,
) -> Result<Value, String> {
    let prio = priority(prio)?;
    if n > MAX_N {
        return Err(format!("n must be at most {MAX_N}"));
    }
    let p = params(lambda_r, lambda_w, mu_r, mu_w, n)?;
    p.ensure_stable().map_err(|e| e.to_string())?;
    let cfg = SimConfig {
        horizon: horizon.clamp(100.0, MAX_HORIZON),
        replications: 5,
        seed,
        ..SimConfig::exponential(p, PolicyConfig::analytic(prio)).map_err(|e| e.to_string())?
    };
    let res = run(&cfg).map_err(|e| e.to_string())?;
    let analytic = match prio {
        Priority::WritePriority => wp_breakdown(&p).map(|b| b.total),
        Priority::ReadPriority => rp_breakdown(&p).map(|b| b.total),
    }
    .map_err(|e| e.to_string())?;
    Ok(json!({
        "n": n,
        "mean_read": res.mean_read,
        "mean_write": res.mean_write,
        "mean_total": res.mean_total,
        "ci_halfwidth": res.ci_halfwidth.map(|c| c.mean_total),
        "mean_latency": res.mean_latency(),
        "analytic_total": analytic,
        "events": res.events_processed,
    }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = tradeoffCurve)]
pub fn tradeoff_curve(
    lambda_r: f64,
    lambda_w: f64,
    mu_r: f64,
    mu_w: f64,
    priority: &str,
    max_n: usize,
) -> Result<String, JsError> {
    to_js(curve_json(lambda_r, lambda_w, mu_r, mu_w, priority, max_n))
}

#[wasm_bindgen(js_name = optimumSweep)]
pub fn optimum_sweep(
    axis: &str,
    lambda_r: f64,
    lambda_w: f64,
    mu_r: f64,
    mu_w: f64,
    steps: usize,
) -> Result<String, JsError> {
    to_js(optimum_sweep_json(
        axis, lambda_r, lambda_w, mu_r, mu_w, steps,
    ))
}

#[wasm_bindgen(js_name = simulate)]
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    lambda_r: f64,
    lambda_w: f64,
    mu_r: f64,
    mu_w: f64,
    n: usize,
    priority: &str,
    horizon: f64,
    seed: u64,
) -> Result<String, JsError> {
    to_js(simulate_json(
        lambda_r, lambda_w, mu_r, mu_w, n, priority, horizon, seed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_marks_best_n() {
        let v = curve_json(3.6, 0.6, 10.0, 1.0, "write", 12).unwrap();
        let points = v["points"].as_array().unwrap();
        assert_eq!(points.len(), 13);
        assert!((points[2]["mean_total"].as_f64().unwrap() - (3.75 + 144.0 / 7.0)).abs() < 1e-12);
        let best = v["best_n"].as_u64().unwrap() as usize;
        let min = points
            .iter()
            .map(|p| p["mean_total"].as_f64().unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(points[best]["mean_total"].as_f64().unwrap(), min);
        assert!(points
            .iter()
            .all(|p| p["lower"].as_f64() <= p["upper"].as_f64()));
    }

    #[test]
    fn curve_skips_unstable_n() {
        let v = curve_json(9.6, 0.6, 10.0, 1.0, "read", 3).unwrap();
        let ns: Vec<u64> = v["points"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| p["n"].as_u64().unwrap())
            .collect();
        assert_eq!(ns, vec![2, 3]);
        assert!(curve_json(1.0, 0.1, 10.0, 1.0, "both", 3).is_err());
    }

    #[test]
    fn sweep_matches_optimizers() {
        let v = optimum_sweep_json("write", 3.6, 0.0, 10.0, 1.0, 10).unwrap();
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 10);
        assert!((rows[9]["rate"].as_f64().unwrap() - 0.608).abs() < 1e-12);
        assert_eq!(rows[9]["write_exact"], 10);
        assert!(optimum_sweep_json("write", 10.0, 0.1, 10.0, 1.0, 4).is_err());
    }

    #[test]
    fn short_simulation_tracks_analytic() {
        let v = simulate_json(3.6, 0.6, 10.0, 1.0, 3, "read", 20_000.0, 1).unwrap();
        let sim = v["mean_total"].as_f64().unwrap();
        let exact = v["analytic_total"].as_f64().unwrap();
        assert!((sim - exact).abs() / exact < 0.1, "{sim} vs {exact}");
        assert_eq!(
            v,
            simulate_json(3.6, 0.6, 10.0, 1.0, 3, "read", 20_000.0, 1).unwrap()
        );
        assert!(simulate_json(9.9, 0.6, 10.0, 1.0, 0, "write", 1e3, 1).is_err());
    }
}
