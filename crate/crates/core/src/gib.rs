//! Scalar Gaussian information bottleneck.
//!
//! For `y = sqrt(h) x + n` with Gaussian `x`, the largest `I(x; z)` reachable
//! by any compression `z` of `y` with `I(y; z) <= C` is
//!
//! ```text
//! I(C) = 1/2 ln((1 + rho) / (1 + rho e^{-2C}))
//! ```
//!
//! per channel use. Over a band of width `df` there are `2 df` real channel uses
//! per second, which turns the per-use expression into the per-Hz density
//! `ln((1 + S|H|^2) / (1 + S|H|^2 e^{-C(f)}))` used by the spectral solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Signal-to-noise ratio `rho = h P / sigma^2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SnrPoint(f64);

impl SnrPoint {
    pub fn new(rho: f64) -> Result<Self> {
        if rho.is_finite() && rho >= 0.0 {
            Ok(SnrPoint(rho))
        } else {
            Err(Error::InvalidArgument(format!("snr must be finite and >= 0, got {rho}")))
        }
    }

    pub fn rho(self) -> f64 {
        self.0
    }
}

/// Compression rate in nats per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PerUseRate {
    Finite(f64),
    /// Unlimited fronthaul; the bottleneck collapses to plain channel capacity.
    Infinite,
}

impl PerUseRate {
    pub fn finite(c: f64) -> Result<Self> {
        if c.is_finite() && c >= 0.0 {
            Ok(PerUseRate::Finite(c))
        } else {
            Err(Error::InvalidArgument(format!("rate must be finite and >= 0, got {c}")))
        }
    }

    pub fn nats(self) -> f64 {
        match self {
            PerUseRate::Finite(c) => c,
            PerUseRate::Infinite => f64::INFINITY,
        }
    }
}

/// Densities at a single frequency: power `s` (W/Hz), squared gain `h2` and
/// fronthaul rate `c` (nats/s/Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerHzDensities {
    pub s: f64,
    pub h2: f64,
    pub c: f64,
}

impl PerHzDensities {
    pub fn new(s: f64, h2: f64, c: f64) -> Result<Self> {
        // c may be +inf (unlimited fronthaul)
        let ok = s.is_finite() && s >= 0.0 && h2.is_finite() && h2 >= 0.0 && c >= 0.0;
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "densities must be non-negative, got s = {s}, h2 = {h2}, c = {c}"
            )));
        }
        Ok(PerHzDensities { s, h2, c })
    }
}

/// `ln((1 + a) / (1 + a e^{-t}))` for `a, t >= 0`, written so that small `t`
/// keeps full relative precision.
#[inline]
pub(crate) fn log_gain_ratio(a: f64, t: f64) -> f64 {
    if a <= 0.0 || t <= 0.0 {
        return 0.0;
    }
    if t.is_infinite() {
        return a.ln_1p();
    }
    // (1 + a e^{-t}) / (1 + a) = 1 - a (1 - e^{-t}) / (1 + a)
    let shrink = a * -(-t).exp_m1() / (1.0 + a);
    if shrink <= 0.5 {
        -(-shrink).ln_1p()
    } else {
        // ratio >= 2: forming 1 - shrink would cancel
        ((1.0 + a) / (1.0 + a * (-t).exp())).ln()
    }
}

/// Information-rate function `I(C)` in nats per channel use.
pub fn info_rate(p: SnrPoint, c: PerUseRate) -> f64 {
    match c {
        PerUseRate::Infinite => awgn_capacity(p),
        PerUseRate::Finite(c) => 0.5 * log_gain_ratio(p.0, 2.0 * c),
    }
}

/// `dI/dC = (1 + e^{2C} / rho)^{-1}`; zero when `rho = 0`.
pub fn info_rate_slope(p: SnrPoint, c: f64) -> f64 {
    let rho = p.0;
    if rho == 0.0 {
        return 0.0;
    }
    rho / (rho + (2.0 * c).exp())
}

/// `1/2 ln(1 + rho)`.
pub fn awgn_capacity(p: SnrPoint) -> f64 {
    0.5 * p.0.ln_1p()
}

/// Mutual-information spectral density in nats/s/Hz.
pub fn spectral_info_density(d: PerHzDensities) -> f64 {
    density(d.s, d.h2, d.c)
}

#[inline]
pub(crate) fn density(s: f64, h2: f64, c: f64) -> f64 {
    log_gain_ratio(s * h2, c)
}
