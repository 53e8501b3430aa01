//! Runs the optimal solver and the baselines on one scenario.

use std::f64::consts::LN_2;
use std::time::Instant;

use fronthaul::baselines::{
    cognitive_relay_reference, flat_band_sweep, limited_rate_wp, uniform_allocation, water_pouring,
};
use fronthaul::oracle::{grid_oracle_continuous, OracleModel, DEFAULT_STEPS};
use fronthaul::spectral::{solve_with, SolveOptions, SolveStrategy, Tolerances};
use fronthaul::{Allocation, ChannelGrid};
use serde::Serialize;

use crate::config::{Method, ScenarioConfig};
use crate::emit::{round6, sig6, CsvTable};
use crate::error::CliError;

/// Slack allowed in the chain `I_inf >= I_opt >= I_lrwp >= I_uniform`.
pub const ORDERING_SLACK: f64 = 1e-6;

const FLAT_SWEEP_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the config's `n_bins`.
    pub bins: Option<usize>,
    /// Relative residual tolerance for both budgets.
    pub tol: Option<f64>,
    pub verify_oracle: bool,
}

/// Information rates in nats/s; `None` where a method was not run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub case: String,
    pub optimal: Option<f64>,
    pub water_pouring: Option<f64>,
    pub uniform: Option<f64>,
    pub limited_rate_wp: Option<f64>,
    pub flat_sweep: Option<f64>,
    /// `min(I_inf, C)`.
    pub cognitive: Option<f64>,
    pub ordering_ok: bool,
}

impl ComparisonRow {
    /// Checks the chain over whichever methods are present.
    pub fn ordering_holds(&self) -> bool {
        let chain = [self.water_pouring, self.optimal, self.limited_rate_wp, self.uniform];
        let present: Vec<f64> = chain.iter().flatten().copied().collect();
        present.windows(2).all(|w| w[0] - w[1] >= -ORDERING_SLACK)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub info_nats: f64,
    pub info_bits: f64,
    pub power: f64,
    /// Absent for water-pouring, whose rate is unbounded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimalDetail {
    pub lambda_s: f64,
    pub lambda_c: f64,
    pub residual_power: f64,
    pub residual_rate: f64,
    pub iterations: usize,
    pub strategy: SolveStrategy,
    pub possible_duality_gap: bool,
    pub active_bandwidth: f64,
    pub min_active_rate: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    pub steps: usize,
    pub objective: f64,
    pub relative_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatDetail {
    pub b_star: f64,
    pub i_star: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub w: f64,
    pub n_bins: usize,
    pub p: f64,
    pub c: f64,
    pub methods: Vec<MethodSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal: Option<OptimalDetail>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat_sweep: Option<FlatDetail>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cognitive: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleCheck>,
    pub ordering_ok: bool,
}

pub struct Comparison {
    pub row: ComparisonRow,
    pub summary: Summary,
    /// Per-bin table; deterministic for a given config.
    pub csv: String,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64())
}

fn method_summary(method: Method, a: &Allocation, runtime_s: f64) -> MethodSummary {
    MethodSummary {
        method,
        info_nats: round6(a.info),
        info_bits: round6(a.info / LN_2),
        power: round6(a.total_power),
        rate: Some(round6(a.total_rate)),
        runtime_s,
    }
}

/// Common gain of a flat channel.
fn flat_gain(g: &ChannelGrid) -> Option<f64> {
    let h = g.h2()[0];
    (h > 0.0 && g.h2().iter().all(|&v| v == h)).then_some(h)
}

pub fn run_comparison(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Comparison, CliError> {
    run(cfg, opts).map_err(|e| e.context(&cfg.name))
}

fn run(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Comparison, CliError> {
    let g = cfg.grid(opts.bins)?;
    if !g.has_gain() {
        return Err(fronthaul::Error::InfeasibleChannel.into());
    }
    let (p, c) = (cfg.p, cfg.c);
    let wants = |m: Method| cfg.methods.contains(&m);
    let mut summaries = Vec::new();

    let mut solve_opts = SolveOptions::default();
    if let Some(t) = opts.tol {
        solve_opts.tol = Tolerances { inner: t, outer: t, ..Tolerances::default() };
    }

    let mut optimal = None;
    let mut detail = None;
    if wants(Method::Optimal) {
        let (r, dt) = timed(|| solve_with(&g, p, c, &solve_opts));
        let r = r?;
        summaries.push(method_summary(Method::Optimal, &r.allocation, dt));
        detail = Some(OptimalDetail {
            lambda_s: round6(r.multipliers.lambda_s),
            lambda_c: round6(r.multipliers.lambda_c),
            residual_power: r.residual_power,
            residual_rate: r.residual_rate,
            iterations: r.iterations,
            strategy: r.strategy,
            possible_duality_gap: r.possible_duality_gap,
            active_bandwidth: round6(r.allocation.active_bandwidth()),
            min_active_rate: r.allocation.min_active_rate().map(round6),
        });
        optimal = Some(r.allocation);
    }

    let mut wp = None;
    if wants(Method::WaterPouring) || wants(Method::LimitedRateWp) {
        let (r, dt) = timed(|| water_pouring(&g, p));
        let r = r?;
        let a = Allocation::from_densities(&g, r.s.clone(), vec![0.0; g.n_bins()]);
        summaries.push(MethodSummary {
            method: Method::WaterPouring,
            info_nats: round6(r.info_inf),
            info_bits: round6(r.info_inf / LN_2),
            power: round6(a.total_power),
            rate: None,
            runtime_s: dt,
        });
        wp = Some(r);
    }

    let uniform = wants(Method::Uniform).then(|| {
        let (a, dt) = timed(|| uniform_allocation(&g, p, c));
        summaries.push(method_summary(Method::Uniform, &a, dt));
        a
    });

    let mut lrwp = None;
    if wants(Method::LimitedRateWp) {
        let (a, dt) = timed(|| limited_rate_wp(&g, p, c));
        let a = a?;
        summaries.push(method_summary(Method::LimitedRateWp, &a, dt));
        lrwp = Some(a);
    }

    let mut flat = None;
    let mut flat_info = None;
    if wants(Method::FlatSweep) {
        if let Some(h) = flat_gain(&g) {
            let (sw, dt) = timed(|| flat_band_sweep(p * h, c, g.w(), FLAT_SWEEP_SAMPLES));
            let sw = sw?;
            summaries.push(MethodSummary {
                method: Method::FlatSweep,
                info_nats: round6(sw.i_star),
                info_bits: round6(sw.i_star / LN_2),
                power: p,
                rate: Some(c),
                runtime_s: dt,
            });
            flat_info = Some(sw.i_star);
            flat = Some(FlatDetail { b_star: round6(sw.b_star), i_star: round6(sw.i_star) });
        }
    }

    let oracle = if opts.verify_oracle {
        let o = grid_oracle_continuous(&g, p, c, DEFAULT_STEPS, OracleModel::BandSplit)?;
        let gap = optimal.as_ref().map_or(f64::NAN, |a| (a.info - o.objective) / o.objective);
        Some(OracleCheck { steps: DEFAULT_STEPS, objective: round6(o.objective), relative_gap: gap })
    } else {
        None
    };

    let wp_info = if wants(Method::WaterPouring) { wp.as_ref().map(|r| r.info_inf) } else { None };
    let mut row = ComparisonRow {
        case: cfg.name.clone(),
        optimal: optimal.as_ref().map(|a| a.info),
        water_pouring: wp_info,
        uniform: uniform.as_ref().map(|a| a.info),
        limited_rate_wp: lrwp.as_ref().map(|a| a.info),
        flat_sweep: flat_info,
        cognitive: wp_info.map(|v| cognitive_relay_reference(v, c)),
        ordering_ok: false,
    };
    row.ordering_ok = row.ordering_holds();

    let mut t =
        CsvTable::new(&["f", "h2", "s_opt", "c_opt", "active", "s_wp", "s_uniform", "c_uniform", "s_lrwp", "c_lrwp"]);
    let cell = |v: Option<f64>| v.map(sig6).unwrap_or_default();
    for i in 0..g.n_bins() {
        t.push(vec![
            sig6(g.center(i)),
            sig6(g.h2()[i]),
            cell(optimal.as_ref().map(|a| a.s[i])),
            cell(optimal.as_ref().map(|a| a.c[i])),
            cell(optimal.as_ref().map(|a| a.occupancy[i])),
            cell(wp.as_ref().filter(|_| wants(Method::WaterPouring)).map(|r| r.s[i])),
            cell(uniform.as_ref().map(|a| a.s[i])),
            cell(uniform.as_ref().map(|a| a.c[i])),
            cell(lrwp.as_ref().map(|a| a.s[i])),
            cell(lrwp.as_ref().map(|a| a.c[i])),
        ]);
    }
    summaries.retain(|m| wants(m.method));

    let summary = Summary {
        scenario: cfg.name.clone(),
        w: cfg.w,
        n_bins: g.n_bins(),
        p,
        c,
        methods: summaries,
        optimal: detail,
        flat_sweep: flat,
        cognitive: row.cognitive.map(round6),
        oracle,
        ordering_ok: row.ordering_ok,
    };
    Ok(Comparison { row, summary, csv: t.render() })
}
