//! Finite-length allocation over Karhunen–Loève eigenchannels.
//!
//! With `x_n^2 = e^{l_n}` the objective
//! `1/2 sum ln((1 + lambda_n e^{l_n}) / (1 + lambda_n e^{l_n - 2 C_n}))`
//! is `f(l) - g(l, C)` with both `f` and `g` convex. Each majorization-minimization
//! step replaces `f` by its tangent at the current iterate, which gives a concave
//! lower bound of the objective that touches it at the iterate; maximizing that
//! bound under the power and rate budgets can only increase the objective.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gib::log_gain_ratio;
use crate::numeric::sigmoid;

/// Eigenvalues `lambda_n >= 0` of the channel's Karhunen–Loève decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenChannel {
    lambdas: Vec<f64>,
}

impl EigenChannel {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidArgument("need at least one eigenvalue".into()));
        }
        if let Some(bad) = lambdas.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!("eigenvalues must be finite and >= 0, got {bad}")));
        }
        Ok(EigenChannel { lambdas })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmState {
    /// Log-powers; `-inf` is zero power.
    pub l: Vec<f64>,
    /// Per-use rates in nats.
    pub c: Vec<f64>,
    pub k: usize,
    pub obj: f64,
    /// Multipliers of the last surrogate solve (rate, power).
    pub nu1: f64,
    pub nu2: f64,
    /// The last step needed the two-dimensional dual search.
    pub fallback: bool,
}

impl MmState {
    /// State at the given powers and rates.
    pub fn at(e: &EigenChannel, powers: &[f64], rates: &[f64]) -> Self {
        let l: Vec<f64> = powers.iter().map(|&x| x.ln()).collect();
        let obj = dc_objective(e, &l, rates);
        MmState { l, c: rates.to_vec(), k: 0, obj, nu1: f64::NAN, nu2: f64::NAN, fallback: false }
    }

    /// Equal split of both budgets.
    pub fn uniform(e: &EigenChannel, p: f64, c: f64) -> Self {
        let n = e.len() as f64;
        Self::at(e, &vec![p / n; e.len()], &vec![c / n; e.len()])
    }

    pub fn powers(&self) -> Vec<f64> {
        self.l.iter().map(|l| l.exp()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmOptions {
    /// Stop when the objective moves less than this many nats.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MmOptions {
    fn default() -> Self {
        MmOptions { tol: 1e-9, max_iter: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmSolution {
    pub state: MmState,
    pub converged: bool,
    /// Objective after each step, starting with the initial point.
    pub trace: Vec<f64>,
}

/// `sum_n I(rho = lambda_n e^{l_n}, C_n)` in nats per block.
pub fn dc_objective(e: &EigenChannel, l: &[f64], c: &[f64]) -> f64 {
    e.lambdas.iter().zip(l).zip(c).map(|((&lam, &l), &c)| 0.5 * log_gain_ratio(lam * l.exp(), 2.0 * c)).sum()
}

/// `f(l) = 1/2 sum ln(1 + lambda_n e^{l_n})`.
fn f_part(e: &EigenChannel, l: &[f64]) -> f64 {
    e.lambdas.iter().zip(l).map(|(&lam, &l)| 0.5 * (lam * l.exp()).ln_1p()).sum()
}

/// `g(l, C) = 1/2 sum ln(1 + lambda_n e^{l_n - 2 C_n})`.
fn g_part(e: &EigenChannel, l: &[f64], c: &[f64]) -> f64 {
    e.lambdas.iter().zip(l).zip(c).map(|((&lam, &l), &c)| 0.5 * (lam * (l - 2.0 * c).exp()).ln_1p()).sum()
}

/// `lambda e^l / (1 + lambda e^l)`, twice the gradient of `f` in `l_n`.
#[inline]
fn share(lam: f64, l: f64) -> f64 {
    let x = lam * l.exp();
    x / (1.0 + x)
}

/// Objective with `f` replaced by its tangent at `l_k`.
pub fn surrogate_objective(e: &EigenChannel, l_k: &[f64], l: &[f64], c: &[f64]) -> f64 {
    let tangent: f64 = e
        .lambdas
        .iter()
        .zip(l_k.iter().zip(l))
        .map(|(&lam, (&lk, &l))| {
            let a = share(lam, lk);
            if a == 0.0 {
                0.0
            } else {
                0.5 * a * (l - lk)
            }
        })
        .sum();
    f_part(e, l_k) + tangent - g_part(e, l, c)
}

/// Per-channel Hessians in `(l_n, C_n)`, row-major.
pub fn hessian_f(lam: f64, l: f64) -> [[f64; 2]; 2] {
    let x = lam * l.exp();
    [[0.5 * x / ((1.0 + x) * (1.0 + x)), 0.0], [0.0, 0.0]]
}

pub fn hessian_g(lam: f64, l: f64, c: f64) -> [[f64; 2]; 2] {
    let x = lam * (l - 2.0 * c).exp();
    let k = 0.5 * x / ((1.0 + x) * (1.0 + x));
    [[k, -2.0 * k], [-2.0 * k, 4.0 * k]]
}

fn sym_eigs(h: [[f64; 2]; 2]) -> (f64, f64) {
    let tr = h[0][0] + h[1][1];
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    (0.5 * tr - disc, 0.5 * tr + disc)
}

/// Checks that both Hessians are positive semidefinite at every sample and
/// that `g`'s spectrum is `{0, 5}` times its scale.
pub fn convexity_check(e: &EigenChannel, samples: &[(f64, f64)]) -> bool {
    for &lam in e.lambdas() {
        for &(l, c) in samples {
            let hf = hessian_f(lam, l);
            let hg = hessian_g(lam, l, c);
            let (f_lo, _) = sym_eigs(hf);
            if f_lo < -1e-15 || hf[1][1] != 0.0 || hf[0][1] != 0.0 {
                return false;
            }
            let scale = hg[0][0];
            if scale < 0.0 {
                return false;
            }
            if scale > 0.0 {
                let (lo, hi) = sym_eigs(hg);
                if (lo / scale).abs() > 1e-9 || (hi / scale - 5.0).abs() > 1e-9 {
                    return false;
                }
            }
        }
    }
    true
}

/// Surrogate maximizer for one channel at multipliers `(nu1, nu2)`; returns
/// `(power, rate)`.
fn channel_response(lam: f64, a: f64, nu1: f64, nu2: f64) -> (f64, f64) {
    if a <= 0.0 || lam <= 0.0 {
        return (0.0, 0.0);
    }
    if a > nu1 {
        let x = (a - nu1) / (2.0 * nu2);
        let arg = lam * x * (1.0 - nu1) / nu1;
        if arg > 1.0 {
            return (x, 0.5 * arg.ln());
        }
    }
    // zero rate: 1/2 (a - lam x / (1 + lam x)) = nu2 x, positive root of
    // nu2 lam x^2 + (nu2 + lam (1 - a) / 2) x - a / 2 = 0
    let b = nu2 + 0.5 * lam * (1.0 - a);
    (a / (b + (b * b + 2.0 * nu2 * lam * a).sqrt()), 0.0)
}

const BUDGET_RTOL: f64 = 1e-12;

fn responses(e: &EigenChannel, a: &[f64], nu1: f64, nu2: f64) -> (Vec<f64>, Vec<f64>) {
    e.lambdas.iter().zip(a).map(|(&lam, &a)| channel_response(lam, a, nu1, nu2)).unzip()
}

/// Interior fast path: `nu1` is tied to `nu2` by the power budget and a single
/// bisection on `nu2` spends the rate. `None` when a channel would leave the
/// interior.
fn interior_step(a: &[f64], lambdas: &[f64], p: f64, c: f64) -> Option<(Vec<f64>, Vec<f64>, f64, f64)> {
    let n = a.len() as f64;
    let sum_a: f64 = a.iter().sum();
    let min_a = a.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_a > 0.0) {
        return None;
    }
    let nu1_of = |nu2: f64| (sum_a - 2.0 * nu2 * p) / n;
    let rates = |nu2: f64| -> Option<Vec<f64>> {
        let nu1 = nu1_of(nu2);
        let mut out = Vec::with_capacity(a.len());
        for (&ai, &lam) in a.iter().zip(lambdas) {
            let x = (ai - nu1) / (2.0 * nu2);
            if !(x > 0.0 && nu1 > 0.0) {
                return None;
            }
            out.push(0.5 * (lam * x * (1.0 - nu1) / nu1).ln());
        }
        Some(out)
    };
    // bracket: nu1 runs from min a (lo) down to 0 (hi); rate sum rises along it
    let lo = (sum_a - n * min_a) / (2.0 * p);
    let hi = sum_a / (2.0 * p);
    let excess = |nu2: f64| match rates(nu2) {
        Some(r) => r.iter().sum::<f64>() - c,
        None if nu2 - lo < hi - nu2 => f64::NEG_INFINITY,
        None => f64::INFINITY,
    };
    let (mut l, mut h) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (l + h);
        if mid <= l || mid >= h {
            break;
        }
        let r = excess(mid);
        if r.abs() <= BUDGET_RTOL * c {
            l = mid;
            h = mid;
            break;
        }
        if r < 0.0 {
            l = mid;
        } else {
            h = mid;
        }
    }
    let nu2 = 0.5 * (l + h);
    let nu1 = nu1_of(nu2);
    let r = rates(nu2)?;
    if r.iter().any(|&ci| !(ci > 0.0)) || ((r.iter().sum::<f64>() - c) / c).abs() > 1e-9 {
        return None;
    }
    let x: Vec<f64> = a.iter().map(|&ai| (ai - nu1) / (2.0 * nu2)).collect();
    Some((x, r, nu1, nu2))
}

/// Power matching at fixed `nu1`: bisection in `ln nu2`.
fn match_power(e: &EigenChannel, a: &[f64], nu1: f64, p: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let power = |ln_nu2: f64| responses(e, a, nu1, ln_nu2.exp()).0.iter().sum::<f64>();
    let (mut lo, mut hi) = (-5.0f64, 5.0f64);
    let mut tries = 0;
    while power(lo) < p {
        lo -= 10.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::NonBracketable { which: "nu2" });
        }
    }
    while power(hi) > p {
        hi += 10.0;
        tries += 1;
        if tries > 120 {
            return Err(Error::NonBracketable { which: "nu2" });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let pw = power(mid);
        if (pw - p).abs() <= BUDGET_RTOL * p {
            lo = mid;
            hi = mid;
            break;
        }
        if pw > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let nu2 = (0.5 * (lo + hi)).exp();
    let (x, r) = responses(e, a, nu1, nu2);
    Ok((x, r, nu2))
}

/// Two-dimensional dual search: outer bisection on `nu1 = max a * sigmoid(v)`
/// for rate, inner on `nu2` for power.
fn dual_2d(e: &EigenChannel, a: &[f64], p: f64, c: f64) -> Result<(Vec<f64>, Vec<f64>, f64, f64)> {
    let a_max = a.iter().copied().fold(0.0, f64::max);
    if !(a_max > 0.0) {
        return Err(Error::NonBracketable { which: "nu1" });
    }
    let at = |v: f64| -> Result<(Vec<f64>, Vec<f64>, f64, f64)> {
        let nu1 = a_max * sigmoid(v);
        let (x, r, nu2) = match_power(e, a, nu1, p)?;
        Ok((x, r, nu1, nu2))
    };
    let (mut lo, mut hi) = (-60.0, 60.0);
    let mut best = at(0.0)?;
    let resid = |s: &(Vec<f64>, Vec<f64>, f64, f64)| s.1.iter().sum::<f64>() - c;
    for _ in 0..200 {
        if resid(&best).abs() <= BUDGET_RTOL * c {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let cand = at(mid)?;
        let r = resid(&cand);
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if r.abs() < resid(&best).abs() {
            best = cand;
        }
    }
    Ok(best)
}

/// One majorization-minimization step from a feasible state.
pub fn mm_step(e: &EigenChannel, st: &MmState, p: f64, c: f64) -> Result<MmState> {
    let a: Vec<f64> = e.lambdas.iter().zip(&st.l).map(|(&lam, &l)| share(lam, l)).collect();
    if a.iter().all(|&v| v == 0.0) {
        return Err(Error::NonBracketable { which: "nu2" });
    }
    let (x, r, nu1, nu2, fallback) = match interior_step(&a, &e.lambdas, p, c) {
        Some((x, r, nu1, nu2)) => (x, r, nu1, nu2, false),
        None => {
            let (x, r, nu1, nu2) = dual_2d(e, &a, p, c)?;
            (x, r, nu1, nu2, true)
        }
    };
    let l: Vec<f64> = x.iter().map(|&v| v.ln()).collect();
    let obj = dc_objective(e, &l, &r);
    Ok(MmState { l, c: r, k: st.k + 1, obj, nu1, nu2, fallback })
}

fn check_budgets(p: f64, c: f64) -> Result<()> {
    if p > 0.0 && c > 0.0 && p.is_finite() && c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("need p, c > 0, got p = {p}, c = {c}")))
    }
}

pub fn mm_solve(e: &EigenChannel, p: f64, c: f64, init: Option<MmState>, opts: &MmOptions) -> Result<MmSolution> {
    check_budgets(p, c)?;
    let mut st = init.unwrap_or_else(|| MmState::uniform(e, p, c));
    let mut trace = vec![st.obj];
    let mut converged = false;
    while st.k < opts.max_iter {
        let next = mm_step(e, &st, p, c)?;
        let delta = next.obj - st.obj;
        trace.push(next.obj);
        st = next;
        if delta.abs() < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(MmSolution { state: st, converged, trace })
}

/// Uniform start plus `starts - 1` random splits of both budgets (normalized
/// exponentials, i.e. flat Dirichlet); returns the best run.
pub fn mm_solve_multistart(
    e: &EigenChannel,
    p: f64,
    c: f64,
    starts: usize,
    seed: u64,
    opts: &MmOptions,
) -> Result<MmSolution> {
    check_budgets(p, c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = mm_solve(e, p, c, None, opts)?;
    for _ in 1..starts {
        let powers = dirichlet(&mut rng, e.len(), p);
        let rates = dirichlet(&mut rng, e.len(), c);
        let run = mm_solve(e, p, c, Some(MmState::at(e, &powers, &rates)), opts)?;
        if run.state.obj > best.state.obj {
            best = run;
        }
    }
    Ok(best)
}

fn dirichlet(rng: &mut impl Rng, n: usize, total: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v: f64| total * v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn eig(v: &[f64]) -> EigenChannel {
        EigenChannel::new(v.to_vec()).unwrap()
    }

    #[test]
    fn objective_examples() {
        let e = eig(&[1.0, 2.0]);
        assert_eq!(dc_objective(&e, &[0.3, -1.0], &[0.0, 0.0]), 0.0);
        let one = eig(&[1.0]);
        assert!((dc_objective(&one, &[0.0], &[LN_2]) - 0.5 * 1.6f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn hessian_of_g_at_origin() {
        let h = hessian_g(1.0, 0.0, 0.0);
        assert_eq!(h, [[0.125, -0.25], [-0.25, 0.5]]);
        let (lo, hi) = sym_eigs(h);
        assert!(lo.abs() < 1e-15 && (hi / 0.125 - 5.0).abs() < 1e-12);
        assert!(convexity_check(&eig(&[1.0]), &[(0.0, 0.0)]));
    }

    #[test]
    fn single_channel_gets_everything() {
        let e = eig(&[1.0]);
        let st = mm_step(&e, &MmState::uniform(&e, 1.0, LN_2), 1.0, LN_2).unwrap();
        assert!((st.l[0]).abs() < 1e-9 && (st.c[0] - LN_2).abs() < 1e-9);
        let sol = mm_solve(&e, 1.0, LN_2, None, &MmOptions::default()).unwrap();
        assert!((sol.state.obj - 0.5 * 1.6f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn symmetric_pair_stays_symmetric() {
        let e = eig(&[1.0, 1.0]);
        let st = mm_step(&e, &MmState::uniform(&e, 2.0, 2.0 * LN_2), 2.0, 2.0 * LN_2).unwrap();
        assert!((st.l[0] - st.l[1]).abs() < 1e-9);
        assert!((st.c[0] - LN_2).abs() < 1e-9 && (st.c[1] - LN_2).abs() < 1e-9);
    }

    #[test]
    fn ascent_and_budgets() {
        let e = eig(&[2.0, 0.5, 1.3]);
        let sol = mm_solve(&e, 4.0, 2.0, None, &MmOptions::default()).unwrap();
        assert!(sol.converged);
        for w in sol.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-10, "{} -> {}", w[0], w[1]);
        }
        let pw: f64 = sol.state.powers().iter().sum();
        let rt: f64 = sol.state.c.iter().sum();
        assert!((pw - 4.0).abs() < 4e-6 && (rt - 2.0).abs() < 2e-6);
    }

    #[test]
    fn surrogate_touches_and_stays_below() {
        let e = eig(&[2.0, 0.5]);
        let lk = [0.4, -0.2];
        let ck = [0.7, 0.3];
        let at = surrogate_objective(&e, &lk, &lk, &ck);
        assert!((at - dc_objective(&e, &lk, &ck)).abs() < 1e-12);
        for (l, c) in [([1.0, -1.0], [0.2, 0.9]), ([-2.0, 0.5], [1.5, 0.1])] {
            assert!(surrogate_objective(&e, &lk, &l, &c) <= dc_objective(&e, &l, &c) + 1e-15);
        }
    }

    #[test]
    fn dead_channel_is_not_bracketable() {
        let e = eig(&[0.0, 0.0]);
        assert!(matches!(mm_step(&e, &MmState::uniform(&e, 1.0, 1.0), 1.0, 1.0), Err(Error::NonBracketable { .. })));
    }

    #[test]
    fn scarce_rate_concentrates() {
        let e = eig(&[1.0; 4]);
        let sol = mm_solve_multistart(&e, 8.0, 0.4, 5, 7, &MmOptions::default()).unwrap();
        let on = sol.state.c.iter().filter(|&&c| c > 1e-6).count();
        assert!(on < 4, "{:?}", sol.state.c);
    }
}
