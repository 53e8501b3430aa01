//! The five-case channel comparison at `W = 10`, `P = 100`, `C = 9`, run under
//! every reading of the underdetermined parameters.

use serde::Serialize;

use crate::compare::{run_comparison, ComparisonRow, RunOptions};
use crate::config::{ChannelSpec, Method, Outputs, ScenarioConfig};
use crate::emit::{sig6, CsvTable};
use crate::error::CliError;

pub const W: f64 = 10.0;
pub const P: f64 = 100.0;
pub const C: f64 = 9.0;

/// Relative distance within which a variant counts as matching a reference row.
pub const MATCH_RTOL: f64 = 0.10;

/// Reference `(optimal, water_pouring, uniform, limited_rate_wp)` per case.
pub const REFERENCE: [(u8, [f64; 4]); 5] = [
    (1, [2.83, 2.94, 0.77, 2.80]),
    (2, [3.40, 4.53, 1.98, 3.03]),
    (3, [3.73, 3.98, 0.98, 3.68]),
    (4, [4.98, 7.85, 3.28, 4.62]),
    (5, [7.92, 23.98, 7.75, 7.75]),
];

#[derive(Debug, Clone, Serialize)]
pub struct Variant {
    pub case: u8,
    pub normalized_pdf: bool,
    /// Second bump weight; only cases 1 and 2 vary it.
    pub alpha2: Option<f64>,
    pub config: ScenarioConfig,
}

fn mix(alpha1: f64, f1: f64, alpha2: f64, f2: f64, normalized_pdf: bool) -> ChannelSpec {
    ChannelSpec::GaussianMix { alpha1, f1, alpha2, f2, normalized_pdf }
}

fn scenario(name: String, channel: ChannelSpec) -> ScenarioConfig {
    ScenarioConfig {
        name,
        w: W,
        n_bins: None,
        p: P,
        c: C,
        methods: vec![Method::Optimal, Method::WaterPouring, Method::Uniform, Method::LimitedRateWp],
        outputs: Outputs::default(),
        channel,
    }
}

fn norm_tag(pdf: bool) -> &'static str {
    if pdf {
        "pdf"
    } else {
        "peak"
    }
}

/// Cases 1 and 2 over both bump normalizations and `alpha2 in {0.75, 0.25}`,
/// cases 3 and 4 over both normalizations, and the allpass case 5.
pub fn variants() -> Vec<Variant> {
    let mut out = Vec::new();
    for pdf in [true, false] {
        for a2 in [0.75, 0.25] {
            let a = mix(0.25, 0.25, a2, 0.75, pdf);
            let tag = format!("{}_a{:02}", norm_tag(pdf), (a2 * 100.0) as u32);
            out.push(Variant {
                case: 1,
                normalized_pdf: pdf,
                alpha2: Some(a2),
                config: scenario(format!("case1_{tag}"), a.clone()),
            });
            out.push(Variant {
                case: 2,
                normalized_pdf: pdf,
                alpha2: Some(a2),
                config: scenario(format!("case2_{tag}"), ChannelSpec::Inverse { inner: Box::new(a) }),
            });
        }
        let bump = mix(0.0, 0.5, 1.0, 0.5, pdf);
        let tag = norm_tag(pdf);
        out.push(Variant {
            case: 3,
            normalized_pdf: pdf,
            alpha2: None,
            config: scenario(format!("case3_{tag}"), bump.clone()),
        });
        out.push(Variant {
            case: 4,
            normalized_pdf: pdf,
            alpha2: None,
            config: scenario(format!("case4_{tag}"), ChannelSpec::Inverse { inner: Box::new(bump) }),
        });
    }
    out.push(Variant {
        case: 5,
        normalized_pdf: true,
        alpha2: None,
        config: scenario("case5".into(), ChannelSpec::Allpass),
    });
    out.sort_by(|a, b| a.case.cmp(&b.case).then_with(|| a.config.name.cmp(&b.config.name)));
    out
}

pub fn reference(case: u8) -> Option<[f64; 4]> {
    REFERENCE.iter().find(|r| r.0 == case).map(|r| r.1)
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantResult {
    pub variant: String,
    pub case: u8,
    pub normalized_pdf: bool,
    pub alpha2: Option<f64>,
    pub row: ComparisonRow,
    pub reference: Option<[f64; 4]>,
    /// Largest relative deviation from the reference over the four methods.
    pub max_rel_dev: Option<f64>,
    pub within_tolerance: bool,
}

fn deviation(row: &ComparisonRow, r: &[f64; 4]) -> Option<f64> {
    let got = [row.optimal?, row.water_pouring?, row.uniform?, row.limited_rate_wp?];
    Some(got.iter().zip(r).map(|(g, r)| ((g - r) / r).abs()).fold(0.0, f64::max))
}

/// Runs every variant, one thread each; results keep the order of [`variants`].
pub fn run_table1(opts: &RunOptions) -> Result<Vec<VariantResult>, CliError> {
    let vs = variants();
    let rows: Vec<Result<ComparisonRow, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = vs.iter().map(|v| s.spawn(|| run_comparison(&v.config, opts).map(|c| c.row))).collect();
        handles.into_iter().map(|h| h.join().expect("variant thread panicked")).collect()
    });
    vs.into_iter()
        .zip(rows)
        .map(|(v, row)| {
            let row = row?;
            let reference = reference(v.case);
            let max_rel_dev = reference.as_ref().and_then(|r| deviation(&row, r));
            Ok(VariantResult {
                variant: v.config.name,
                case: v.case,
                normalized_pdf: v.normalized_pdf,
                alpha2: v.alpha2,
                within_tolerance: max_rel_dev.is_some_and(|d| d <= MATCH_RTOL),
                max_rel_dev,
                reference,
                row,
            })
        })
        .collect()
}

pub fn table1_csv(results: &[VariantResult]) -> String {
    let mut t = CsvTable::new(&[
        "case",
        "variant",
        "normalized_pdf",
        "alpha2",
        "optimal",
        "water_pouring",
        "uniform",
        "limited_rate_wp",
        "cognitive",
        "ordering_ok",
        "ref_optimal",
        "ref_water_pouring",
        "ref_uniform",
        "ref_limited_rate_wp",
        "max_rel_dev",
        "within_10pct",
    ]);
    let opt = |v: Option<f64>| v.map(sig6).unwrap_or_default();
    for r in results {
        let refs = r.reference.map(|a| a.map(sig6)).unwrap_or_default();
        let mut row = vec![
            r.case.to_string(),
            r.variant.clone(),
            r.normalized_pdf.to_string(),
            opt(r.alpha2),
            opt(r.row.optimal),
            opt(r.row.water_pouring),
            opt(r.row.uniform),
            opt(r.row.limited_rate_wp),
            opt(r.row.cognitive),
            r.row.ordering_ok.to_string(),
        ];
        row.extend(refs);
        row.push(opt(r.max_rel_dev));
        row.push(r.within_tolerance.to_string());
        t.push(row);
    }
    t.render()
}

/// Human-readable summary: one line per variant, then the matches per case.
pub fn table1_report(results: &[VariantResult]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<16} {:>9} {:>9} {:>9} {:>9}  {:<8} {}\n",
        "variant", "optimal", "wp", "uniform", "lrwp", "ordering", "max dev"
    ));
    let opt = |v: Option<f64>| v.map(sig6).unwrap_or_else(|| "-".into());
    for r in results {
        out.push_str(&format!(
            "{:<16} {:>9} {:>9} {:>9} {:>9}  {:<8} {}\n",
            r.variant,
            opt(r.row.optimal),
            opt(r.row.water_pouring),
            opt(r.row.uniform),
            opt(r.row.limited_rate_wp),
            if r.row.ordering_ok { "ok" } else { "VIOLATED" },
            r.max_rel_dev.map(|d| format!("{:.1}%", 100.0 * d)).unwrap_or_else(|| "-".into()),
        ));
    }
    for (case, _) in REFERENCE {
        let hits: Vec<&str> =
            results.iter().filter(|r| r.case == case && r.within_tolerance).map(|r| r.variant.as_str()).collect();
        let list = if hits.is_empty() { "none".to_string() } else { hits.join(", ") };
        out.push_str(&format!("case {case}: within {:.0}% of reference: {list}\n", 100.0 * MATCH_RTOL));
    }
    out
}
