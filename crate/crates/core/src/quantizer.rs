//! One-bit quantization over AWGN: the compress-and-forward (stochastic)
//! quantizer against a deterministic sign quantizer.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};
use std::num::NonZeroUsize;

use gauss_quad::GaussHermite;
use libm::erfc;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gib::{info_rate, PerUseRate, SnrPoint};

pub const MIN_QUADRATURE_ORDER: usize = 8;

/// `Phi(-|v|)` without cancellation.
#[inline]
fn lower_tail(v: f64) -> f64 {
    0.5 * erfc(v.abs() * FRAC_1_SQRT_2)
}

/// Binary entropy in nats of a probability `q <= 1/2`.
#[inline]
fn binary_entropy_small(q: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    -q * q.ln() - (1.0 - q) * (-q).ln_1p()
}

/// Nodes and weights of a Gauss–Hermite rule.
pub struct SignQuantizerRule {
    rule: GaussHermite,
}

impl SignQuantizerRule {
    pub fn new(order: usize) -> Result<Self> {
        if order < MIN_QUADRATURE_ORDER {
            return Err(Error::QuadratureOrder(order));
        }
        Ok(SignQuantizerRule { rule: GaussHermite::new(NonZeroUsize::new(order).unwrap()) })
    }

    /// `E[h(x)]` for standard normal `x`.
    fn expect(&self, mut h: impl FnMut(f64) -> f64) -> f64 {
        self.rule.integrate(|t| h(2f64.sqrt() * t)) / PI.sqrt()
    }

    /// `ln 2 - E[H_b(Phi(sqrt(snr) x))]`.
    pub fn mi(&self, snr: f64) -> Result<f64> {
        SnrPoint::new(snr)?;
        let a = snr.sqrt();
        let mean_entropy = if a <= 1.0 {
            self.expect(|x| binary_entropy_small(lower_tail(a * x)))
        } else {
            // v = a x keeps the integrand's width near one as snr grows
            let stretch = 0.5 * (1.0 - 1.0 / (a * a));
            self.expect(|v| {
                let h = binary_entropy_small(lower_tail(v));
                if h == 0.0 {
                    0.0
                } else {
                    (h.ln() + stretch * v * v).exp() / a
                }
            })
        };
        Ok((LN_2 - mean_entropy).clamp(0.0, LN_2))
    }
}

/// Mutual information between a Gaussian input and the sign of its noisy
/// observation, nats per use.
pub fn sign_quantizer_mi_gaussian(snr: f64, order: usize) -> Result<f64> {
    SignQuantizerRule::new(order)?.mi(snr)
}

/// Information-bottleneck value at `bits` bits per use.
pub fn stochastic_quantizer_mi(snr: f64, bits: f64) -> Result<f64> {
    Ok(info_rate(SnrPoint::new(snr)?, PerUseRate::finite(bits * LN_2)?))
}

/// Binary input through the sign quantizer: a BSC with crossover `Phi(-sqrt(snr))`.
pub fn bpsk_sign_mi(snr: f64) -> Result<f64> {
    SnrPoint::new(snr)?;
    Ok(LN_2 - binary_entropy_small(lower_tail(snr.sqrt())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    StochasticGib,
    SignGaussian,
    SignBpsk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizerCurve {
    pub scheme: Scheme,
    pub snr_samples: Vec<f64>,
    pub mi: Vec<f64>,
}

/// The three one-bit curves on a shared SNR grid.
pub fn quantizer_curves(snrs: &[f64], order: usize) -> Result<Vec<QuantizerCurve>> {
    let rule = SignQuantizerRule::new(order)?;
    let curve = |scheme, f: &dyn Fn(f64) -> Result<f64>| -> Result<QuantizerCurve> {
        Ok(QuantizerCurve {
            scheme,
            snr_samples: snrs.to_vec(),
            mi: snrs.iter().map(|&s| f(s)).collect::<Result<_>>()?,
        })
    };
    Ok(vec![
        curve(Scheme::StochasticGib, &|s| stochastic_quantizer_mi(s, 1.0))?,
        curve(Scheme::SignGaussian, &|s| rule.mi(s))?,
        curve(Scheme::SignBpsk, &bpsk_sign_mi)?,
    ])
}
