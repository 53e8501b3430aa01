//! CSV and JSON output. Numbers carry six significant digits.

use std::f64::consts::LN_2;
use std::path::Path;

use fronthaul::baselines::{flat_band_sweep, log_spaced, FlatSweep};
use fronthaul::branch::{dividing_curve, region_map, Branch};
use fronthaul::gib::{info_rate, PerUseRate, SnrPoint};
use fronthaul::mm::{EigenChannel, MmSolution};
use fronthaul::quantizer::{quantizer_curves, Scheme};

use crate::error::CliError;

/// Six significant digits, plain notation for magnitudes in `[1e-4, 1e6)`.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..6).contains(&exp) {
        let s = format!("{:.*}", (5 - exp) as usize, v);
        trim_zeros(&s).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `v` rounded to six significant digits.
pub fn round6(v: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    format!("{v:.5e}").parse().unwrap()
}

/// Comma-separated table with a header row and LF line endings.
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.to_path_buf(), source: e })?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

pub fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("summaries always serialize");
    s.push('\n');
    s
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.into()
}

/// Branch label and Hessian determinant on an `ns x nc` grid over
/// `(0, s_max] x (0, c_max]`; cells no branch reproduces have an empty label.
pub fn region_map_csv(s_max: f64, c_max: f64, ns: usize, nc: usize) -> String {
    let mut t = CsvTable::new(&["s", "c", "psi", "concave", "boundary", "det"]);
    for cell in region_map(s_max, c_max, ns, nc) {
        let (psi, concave, boundary, det) = match cell.label {
            Some(l) => (
                if l.psi == Branch::Plus { "1" } else { "-1" }.to_string(),
                flag(l.concave),
                flag(l.boundary),
                sig6(l.det),
            ),
            None => Default::default(),
        };
        t.push(vec![sig6(cell.s), sig6(cell.c), psi, concave, boundary, det]);
    }
    t.render()
}

/// `n` samples of the zero-determinant locus, `lambda_c` uniform in `(0, 1)`.
pub fn dividing_curve_csv(n: usize) -> String {
    let mut t = CsvTable::new(&["lambda_c", "s", "c"]);
    for k in 1..=n {
        let lc = k as f64 / (n + 1) as f64;
        let (s, c) = dividing_curve(lc);
        t.push(vec![sig6(lc), sig6(s), sig6(c)]);
    }
    t.render()
}

/// One-bit curves at `points` SNRs log-spaced over `[lo_db, hi_db]`.
pub fn quantizer_csv(lo_db: f64, hi_db: f64, points: usize, order: usize) -> Result<String, CliError> {
    if points < 2 || hi_db <= lo_db {
        return Err(CliError::Config(format!(
            "need at least two points over a non-empty range, got {points} over [{lo_db}, {hi_db}] dB"
        )));
    }
    let snrs = log_spaced(10f64.powf(lo_db / 10.0), 10f64.powf(hi_db / 10.0), points);
    let curves = quantizer_curves(&snrs, order)?;
    let col = |s: Scheme| &curves.iter().find(|c| c.scheme == s).unwrap().mi;
    let (gib, sign, bpsk) = (col(Scheme::StochasticGib), col(Scheme::SignGaussian), col(Scheme::SignBpsk));
    let mut t = CsvTable::new(&["snr", "snr_db", "stochastic_gib", "sign_gaussian", "sign_bpsk", "gib_ge_sign"]);
    for (i, &snr) in snrs.iter().enumerate() {
        t.push(vec![
            sig6(snr),
            sig6(10.0 * snr.log10()),
            sig6(gib[i]),
            sig6(sign[i]),
            sig6(bpsk[i]),
            flag(gib[i] >= sign[i]),
        ]);
    }
    Ok(t.render())
}

/// Sub-band information over `(0, w]` with the refined maximum inserted as
/// its own row, flagged `is_max = 1`.
pub fn flat_sweep_csv(p: f64, c: f64, w: f64, samples: usize) -> Result<(String, FlatSweep), CliError> {
    let sw = flat_band_sweep(p, c, w, samples)?;
    let mut rows: Vec<(f64, f64, bool)> = sw.samples.iter().map(|&(b, i)| (b, i, false)).collect();
    let at = rows.partition_point(|r| r.0 < sw.b_star);
    rows.insert(at, (sw.b_star, sw.i_star, true));
    let mut t = CsvTable::new(&["b", "info", "info_bits", "is_max"]);
    for (b, i, m) in rows {
        t.push(vec![sig6(b), sig6(i), sig6(i / LN_2), flag(m)]);
    }
    Ok((t.render(), sw))
}

/// Per-eigenchannel power, rate and information of an MM solution.
pub fn mm_csv(e: &EigenChannel, sol: &MmSolution) -> String {
    let st = &sol.state;
    let powers = st.powers();
    let mut t = CsvTable::new(&["n", "lambda", "power", "rate", "info"]);
    for (n, &lam) in e.lambdas().iter().enumerate() {
        let info = info_rate(SnrPoint::new(lam * powers[n]).unwrap(), PerUseRate::finite(st.c[n]).unwrap());
        t.push(vec![n.to_string(), sig6(lam), sig6(powers[n]), sig6(st.c[n]), sig6(info)]);
    }
    t.render()
}
