//! Per-frequency stationary points of the Lagrangian density
//! `I(S, C) - lambda_s S - lambda_c C`.
//!
//! Writing `Q = e^{-C}`, the two stationarity conditions reduce to a quadratic
//! in `Q` with discriminant `X^2 - 4 |H|^2 lambda_c lambda_s`, where
//! `X = |H|^2 - lambda_s - lambda_c |H|^2`. The `+` root (larger power, smaller
//! `Q`) is the one where the density is locally concave; the `-` root sits in the
//! region where splitting the band improves the objective. The boundary between
//! the two is the zero-determinant curve of the density Hessian, parametrized by
//! `lambda_c` as `S = sqrt(lc) / (1 - sqrt(lc))`, `Q = sqrt(lc) / (1 + sqrt(lc))`.
//! Along it `C` decreases to `ln 2` as `lambda_c -> 1`, which is why an active
//! band never carries less than one bit per Hz.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gib::density;
use crate::numeric::{ln_sigmoid, sigmoid};

/// Lagrange multipliers of the continuous problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierPair {
    /// Price of power, 1/(W/Hz).
    pub lambda_s: f64,
    /// Price of fronthaul rate, dimensionless.
    pub lambda_c: f64,
}

impl MultiplierPair {
    pub fn new(lambda_s: f64, lambda_c: f64) -> Self {
        MultiplierPair { lambda_s, lambda_c }
    }

    /// Both multipliers strictly inside the box `(0, max_h2) x (0, 1)`.
    pub fn strictly_within(&self, max_h2: f64) -> bool {
        self.lambda_s > 0.0 && self.lambda_s < max_h2 && self.lambda_c > 0.0 && self.lambda_c < 1.0
    }

    fn check(&self) -> Result<RatePrice> {
        let ok = self.lambda_c > 0.0 && self.lambda_c < 1.0 && self.lambda_s > 0.0 && self.lambda_s.is_finite();
        if ok {
            Ok(RatePrice::from_value(self.lambda_c))
        } else {
            Err(Error::DegenerateMultiplier { lambda_s: self.lambda_s, lambda_c: self.lambda_c })
        }
    }
}

/// Which root of the stationarity quadratic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> i8 {
        match self {
            Branch::Plus => 1,
            Branch::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchSolution {
    pub s: f64,
    /// `Q = e^{-c}`.
    pub q: f64,
    pub c: f64,
    pub psi: Branch,
    /// `X = |H|^2 - lambda_s - lambda_c |H|^2`, kept for debugging.
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub psi: Branch,
    pub concave: bool,
    /// Both branches reproduce the point (double root).
    pub boundary: bool,
    pub det: f64,
}

/// `lambda_c` held as value, log and complement so that prices extremely
/// close to 0 or 1 keep their precision.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RatePrice {
    pub value: f64,
    pub ln: f64,
    pub one_minus: f64,
}

impl RatePrice {
    pub(crate) fn from_value(lc: f64) -> Self {
        RatePrice { value: lc, ln: lc.ln(), one_minus: 1.0 - lc }
    }

    /// From `u = ln(lc / (1 - lc))`.
    pub(crate) fn from_logit(u: f64) -> Self {
        RatePrice { value: sigmoid(u), ln: ln_sigmoid(u), one_minus: sigmoid(-u) }
    }
}

/// Discriminants this small relative to `X^2` are rounding noise around a double root.
const DISC_RTOL: f64 = 1e-14;

/// `(X, sqrt(D))`, or `None` when the quadratic has no real root with `X > 0`.
#[inline]
fn roots_core(h2: f64, lambda_s: f64, lc: RatePrice) -> Option<(f64, f64)> {
    let x = h2 * lc.one_minus - lambda_s;
    if !(x > 0.0) {
        return None;
    }
    let disc = x * x - 4.0 * h2 * lc.value * lambda_s;
    if disc < -DISC_RTOL * x * x {
        return None;
    }
    Some((x, disc.max(0.0).sqrt()))
}

/// The `+` branch `(s, c)`, computed in log form so `c` stays finite when
/// `lambda_c` underflows.
#[inline]
pub(crate) fn concave_point(h2: f64, lambda_s: f64, lc: RatePrice) -> Option<(f64, f64)> {
    let (x, sqrt_d) = roots_core(h2, lambda_s, lc)?;
    let r = x + sqrt_d;
    let s = r / (2.0 * h2 * lambda_s);
    // q = 2 lc ls / ((1 - lc) r)
    let c = lc.one_minus.ln() + r.ln() - (2.0 * lambda_s).ln() - lc.ln;
    Some((s, c))
}

/// Pointwise Lagrangian density `I - lambda_s s - lambda_c c` in normalized units.
#[inline]
pub(crate) fn lagrangian_density(h2: f64, lambda_s: f64, lc: RatePrice, s: f64, c: f64) -> f64 {
    density(s, h2, c) - lambda_s * s - lc.value * c
}

/// Both stationary points of the per-frequency Lagrangian.
///
/// Returns an empty vector for a negative discriminant and a single `Plus`
/// solution at a double root.
pub fn stationary_branches(h2: f64, m: MultiplierPair) -> Result<Vec<BranchSolution>> {
    let lc = m.check()?;
    if !(h2 > 0.0) || !h2.is_finite() {
        return Err(Error::InvalidArgument(format!("h2 must be positive, got {h2}")));
    }
    let ls = m.lambda_s;
    let Some((x, sqrt_d)) = roots_core(h2, ls, lc) else {
        return Ok(Vec::new());
    };
    let r = x + sqrt_d;
    let mut out = Vec::with_capacity(2);

    let q_plus = 2.0 * lc.value * ls / (lc.one_minus * r);
    out.push(BranchSolution { s: r / (2.0 * h2 * ls), q: q_plus, c: -q_plus.ln(), psi: Branch::Plus, x });
    if sqrt_d == 0.0 {
        return Ok(out);
    }
    let q_minus = r / (2.0 * h2 * lc.one_minus);
    let s_minus = 2.0 * lc.value / r;
    if q_minus > 0.0 && q_minus <= 1.0 && s_minus >= 0.0 {
        out.push(BranchSolution { s: s_minus, q: q_minus, c: -q_minus.ln(), psi: Branch::Minus, x });
    }
    Ok(out)
}

/// The concave (`Plus`) stationary point, if one exists.
pub fn concave_allocation(h2: f64, m: MultiplierPair) -> Result<Option<(f64, f64)>> {
    let lc = m.check()?;
    if !(h2 > 0.0) || !h2.is_finite() {
        return Err(Error::InvalidArgument(format!("h2 must be positive, got {h2}")));
    }
    Ok(concave_point(h2, m.lambda_s, lc))
}

/// Relative residuals of the two stationarity equations at `(s, c)`.
pub fn stationarity_residuals(h2: f64, m: MultiplierPair, s: f64, c: f64) -> (f64, f64) {
    let q = (-c).exp();
    let a = s * h2;
    let ls = h2 * -(-c).exp_m1() / ((1.0 + a) * (1.0 + a * q));
    let lc = a * q / (1.0 + a * q);
    ((ls - m.lambda_s).abs() / m.lambda_s, (lc - m.lambda_c).abs() / m.lambda_c)
}

/// Multipliers for which `(s, c)` is stationary at squared gain `h2`.
pub fn multipliers_from_point(s: f64, c: f64, h2: f64) -> MultiplierPair {
    let q = (-c).exp();
    let a = s * h2;
    let aq = a * q;
    MultiplierPair { lambda_s: h2 * -(-c).exp_m1() / ((1.0 + a) * (1.0 + aq)), lambda_c: aq / (1.0 + aq) }
}

/// Hessian of the normalized density `ln((1 + S) / (1 + S e^{-C}))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityHessian {
    pub ss: f64,
    pub cc: f64,
    pub sc: f64,
}

impl DensityHessian {
    pub fn det(&self) -> f64 {
        self.ss * self.cc - self.sc * self.sc
    }

    pub fn is_concave(&self) -> bool {
        self.ss <= 0.0 && self.cc <= 0.0 && self.det() >= 0.0
    }
}

pub fn density_hessian(s: f64, c: f64) -> DensityHessian {
    let q = (-c).exp();
    let u = s * q;
    let one_u2 = (1.0 + u) * (1.0 + u);
    DensityHessian {
        ss: -1.0 / ((1.0 + s) * (1.0 + s)) + q * q / one_u2,
        cc: u * u / one_u2 - u / (1.0 + u),
        sc: -s * q * q / one_u2 + q / (1.0 + u),
    }
}

/// Branch-reproduction tolerance used by [`classify_region`].
pub const REPRODUCE_RTOL: f64 = 1e-6;

/// Recovers the multipliers of `(s, c)` (unit gain), finds which branch maps
/// them back to the same point, and tests concavity of the density there.
pub fn classify_region(s: f64, c: f64) -> Result<RegionLabel> {
    if !(s > 0.0 && c > 0.0) {
        return Err(Error::InvalidArgument(format!("classify_region needs s, c > 0, got ({s}, {c})")));
    }
    let m = multipliers_from_point(s, c, 1.0);
    let branches = stationary_branches(1.0, m)?;
    let close = |a: f64, b: f64| (a - b).abs() <= REPRODUCE_RTOL * b.abs().max(1e-300);
    let hits: Vec<Branch> = branches.iter().filter(|b| close(b.s, s) && close(b.c, c)).map(|b| b.psi).collect();
    let h = density_hessian(s, c);
    let boundary = hits.len() == 2 || (branches.len() == 1 && hits.len() == 1);
    let psi = match hits.as_slice() {
        [] => return Err(Error::IndeterminateLabel { s, c }),
        [only] => *only,
        _ => Branch::Plus,
    };
    Ok(RegionLabel { psi, concave: h.is_concave(), boundary, det: h.det() })
}

/// Zero-determinant locus parametrized by `lambda_c in (0, 1)`; returns `(s, c)`.
pub fn dividing_curve(lambda_c: f64) -> (f64, f64) {
    debug_assert!(lambda_c > 0.0 && lambda_c < 1.0);
    let r = lambda_c.sqrt();
    (r / (1.0 - r), r.ln_1p() - r.ln())
}

/// One cell of a concavity/sign map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub s: f64,
    pub c: f64,
    pub label: Option<RegionLabel>,
}

/// Labels an `ns x nc` grid over `(0, s_max] x (0, c_max]`, row-major in `s`.
pub fn region_map(s_max: f64, c_max: f64, ns: usize, nc: usize) -> Vec<RegionCell> {
    let mut cells = Vec::with_capacity(ns * nc);
    for i in 1..=ns {
        let s = s_max * i as f64 / ns as f64;
        for j in 1..=nc {
            let c = c_max * j as f64 / nc as f64;
            cells.push(RegionCell { s, c, label: classify_region(s, c).ok() });
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn pair(ls: f64, lc: f64) -> MultiplierPair {
        MultiplierPair::new(ls, lc)
    }

    #[test]
    fn double_root_example() {
        let b = stationary_branches(1.0, pair(0.25, 0.25)).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b[0].s - 1.0).abs() < 1e-12);
        assert!((b[0].q - 1.0 / 3.0).abs() < 1e-12);
        assert!((b[0].c - 3f64.ln()).abs() < 1e-12);
        let (rs, rc) = stationarity_residuals(1.0, pair(0.25, 0.25), b[0].s, b[0].c);
        assert!(rs < 1e-9 && rc < 1e-9);
    }

    #[test]
    fn tenth_multipliers_plus_branch() {
        let b = stationary_branches(1.0, pair(0.1, 0.1)).unwrap();
        let plus = b.iter().find(|b| b.psi == Branch::Plus).unwrap();
        assert!((plus.s - 7.8730).abs() < 1e-4);
        assert!((plus.q - 0.014110).abs() < 5e-6);
        assert!((plus.c - 4.261).abs() < 1e-3);
        for sol in &b {
            let (rs, rc) = stationarity_residuals(1.0, pair(0.1, 0.1), sol.s, sol.c);
            assert!(rs < 1e-9 && rc < 1e-9, "{sol:?}: {rs} {rc}");
        }
    }

    #[test]
    fn negative_discriminant_has_no_solution() {
        assert!(stationary_branches(1.0, pair(0.5, 0.5)).unwrap().is_empty());
        assert_eq!(concave_allocation(1.0, pair(0.5, 0.5)).unwrap(), None);
    }

    #[test]
    fn degenerate_multipliers_rejected() {
        for lc in [0.0, 1.0] {
            assert!(matches!(stationary_branches(1.0, pair(0.2, lc)), Err(Error::DegenerateMultiplier { .. })));
            assert!(concave_allocation(1.0, pair(0.2, lc)).is_err());
        }
    }

    #[test]
    fn concave_allocation_examples() {
        let (s, c) = concave_allocation(1.0, pair(0.1, 0.1)).unwrap().unwrap();
        assert!((s - 7.8730).abs() < 1e-4 && (c - 4.261).abs() < 1e-3);
        let (s, c) = concave_allocation(1.0, pair(0.25, 0.25)).unwrap().unwrap();
        assert!((s - 1.0).abs() < 1e-12 && (c - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn multipliers_examples() {
        let m = multipliers_from_point(1.0, 3f64.ln(), 1.0);
        assert!((m.lambda_s - 0.25).abs() < 1e-15);
        assert!((m.lambda_c - 0.25).abs() < 1e-15);
        // appendix form lambda_s = 1/(1+S) - lambda_c/S
        assert!((m.lambda_s - (0.5 - m.lambda_c)).abs() < 1e-15);
        let tiny = multipliers_from_point(1e-12, 2.0, 1.0);
        assert!(tiny.lambda_c < 1e-12);
    }

    #[test]
    fn hessian_at_zero_rate() {
        let h = density_hessian(1.0, 0.0);
        assert!(h.ss.abs() < 1e-15);
        assert!((h.cc + 0.25).abs() < 1e-15);
        assert!((h.sc - 0.25).abs() < 1e-15);
    }

    #[test]
    fn hessian_degenerate_on_dividing_curve() {
        let h = density_hessian(1.0, 3f64.ln());
        assert!(h.det().abs() < 1e-15);
    }

    #[test]
    fn classify_examples() {
        let l = classify_region(2.0, 2.0).unwrap();
        assert_eq!(l.psi == Branch::Plus, l.concave);
        let b = classify_region(1.0, 3f64.ln()).unwrap();
        assert!(b.det.abs() < 1e-12);
        assert_eq!(b.psi, Branch::Plus);
        let low = classify_region(10.0, 0.05).unwrap();
        assert!(!low.concave);
        assert_eq!(low.psi, Branch::Minus);
        assert!(low.det < 0.0);
    }

    #[test]
    fn dividing_curve_examples() {
        let (s, c) = dividing_curve(0.25);
        assert!((s - 1.0).abs() < 1e-15 && (c - 3f64.ln()).abs() < 1e-15);
        let (_, c) = dividing_curve(1.0 - 1e-9);
        assert!((c - LN_2).abs() < 1e-6 && c > LN_2);
        let (s, c) = dividing_curve(1e-12);
        assert!(s < 1e-5 && c > 13.0);
    }

    #[test]
    fn round_trip_through_concave_branch() {
        for &(s, c) in &[(2.0, 2.0), (5.0, 1.2), (0.5, 3.0), (9.0, 0.8)] {
            assert!(classify_region(s, c).unwrap().concave);
            let m = multipliers_from_point(s, c, 1.0);
            let (s2, c2) = concave_allocation(1.0, m).unwrap().unwrap();
            assert!((s2 - s).abs() < 1e-8 * s && (c2 - c).abs() < 1e-8 * c);
        }
    }

    #[test]
    fn log_form_survives_underflowing_price() {
        let lc = RatePrice::from_logit(-5000.0);
        assert_eq!(lc.value, 0.0);
        let (s, c) = concave_point(1.0, 0.1, lc).unwrap();
        assert!((s - 9.0).abs() < 1e-9);
        assert!(c > 4000.0 && c.is_finite());
    }
}
