//! Reference allocators: classical water-pouring (unlimited fronthaul), uniform
//! spreading, water-pouring power with rate proportional to power, and the
//! flat-channel bandwidth sweep.

use serde::{Deserialize, Serialize};

use crate::channel::{Allocation, ChannelGrid};
use crate::error::{Error, Result};
use crate::gib::log_gain_ratio;
use crate::numeric::{bisect_nonincreasing, golden_max};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterPouringResult {
    pub s: Vec<f64>,
    /// Water level `b`, W/Hz.
    pub water_level: f64,
    /// Information rate with unlimited fronthaul, nats/s.
    pub info_inf: f64,
    pub support: Vec<bool>,
}

/// `s_i = max(b - 1/h2_i, 0)` with `b` set by the power budget.
pub fn water_pouring(g: &ChannelGrid, p: f64) -> Result<WaterPouringResult> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("power must be positive, got {p}")));
    }
    if !g.has_gain() {
        return Err(Error::InfeasibleChannel);
    }
    let df = g.df();
    let fill = |b: f64| g.h2().iter().filter(|&&h| h > 0.0).map(|&h| (b - 1.0 / h).max(0.0)).sum::<f64>() * df;
    let hi = p / df + 1.0 / g.max_h2();
    let (lo, hi, _) = bisect_nonincreasing(|b| p - fill(b), 0.0, hi, 1e-15 * hi, 200);
    let b = 0.5 * (lo + hi);
    let s: Vec<f64> = g.h2().iter().map(|&h| if h > 0.0 { (b - 1.0 / h).max(0.0) } else { 0.0 }).collect();
    let support: Vec<bool> = s.iter().map(|&x| x > 0.0).collect();
    let info_inf = g.h2().iter().zip(&support).filter(|(_, &on)| on).map(|(&h, _)| (b * h).ln()).sum::<f64>() * df;
    Ok(WaterPouringResult { s, water_level: b, info_inf, support })
}

/// Power and rate spread evenly over the whole band, dead bins included.
pub fn uniform_allocation(g: &ChannelGrid, p: f64, c: f64) -> Allocation {
    let n = g.n_bins();
    Allocation::from_densities(g, vec![p / g.w(); n], vec![c / g.w(); n])
}

/// Water-pouring power with `c_i = (c / p) s_i`.
pub fn limited_rate_wp(g: &ChannelGrid, p: f64, c: f64) -> Result<Allocation> {
    let wp = water_pouring(g, p)?;
    let rate: Vec<f64> = wp.s.iter().map(|&s| c / p * s).collect();
    Ok(Allocation::from_densities(g, wp.s, rate))
}

/// Unlimited-fronthaul rate capped by the fronthaul budget, the reference for
/// a relay that decodes before forwarding.
pub fn cognitive_relay_reference(info_inf: f64, c: f64) -> f64 {
    info_inf.min(c)
}

/// Information over a flat unit-gain sub-band of width `b` carrying the whole
/// budget: `B ln((1 + P/B) / (1 + (P/B) e^{-C/B}))`.
pub fn flat_band_info(p: f64, c: f64, b: f64) -> f64 {
    if b <= 0.0 {
        return 0.0;
    }
    b * log_gain_ratio(p / b, c / b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatSweep {
    /// `(B, I(B))`, increasing in `B`.
    pub samples: Vec<(f64, f64)>,
    pub b_star: f64,
    pub i_star: f64,
}

/// Bandwidth below which the sweep does not sample, relative to `w`.
const SWEEP_FLOOR: f64 = 1e-8;

/// Log-spaced sweep of [`flat_band_info`] over `(0, w]` with a golden-section
/// refinement of the best sample.
pub fn flat_band_sweep(p: f64, c: f64, w: f64, n_samples: usize) -> Result<FlatSweep> {
    if !(p > 0.0 && c > 0.0 && w > 0.0) || n_samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "flat sweep needs p, c, w > 0 and at least two samples, got p = {p}, c = {c}, w = {w}, n = {n_samples}"
        )));
    }
    let samples: Vec<(f64, f64)> =
        log_spaced(w * SWEEP_FLOOR, w, n_samples).into_iter().map(|b| (b, flat_band_info(p, c, b))).collect();
    let k = (0..samples.len()).max_by(|&i, &j| samples[i].1.total_cmp(&samples[j].1)).unwrap();
    let a = samples[k.saturating_sub(1)].0;
    let b = samples[(k + 1).min(samples.len() - 1)].0;
    let (mut b_star, mut i_star) = golden_max(|x| flat_band_info(p, c, x), a, b, 1e-12 * b);
    if samples[k].1 > i_star {
        (b_star, i_star) = samples[k];
    }
    Ok(FlatSweep { samples, b_star, i_star })
}

/// `n` points from `lo` to `hi` inclusive, equally spaced in log scale.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| if i + 1 == n { hi } else { (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp() }).collect()
}
