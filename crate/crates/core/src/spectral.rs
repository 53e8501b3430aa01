//! Joint power and fronthaul-rate allocation over a sampled channel.
//!
//! The dual problem is solved with two nested bisections: for each rate price
//! `lambda_c` the power price `lambda_s` is chosen to spend the power budget, and
//! `lambda_c` is then chosen to spend the rate budget. At fixed prices every bin
//! independently takes either its concave stationary point or nothing.
//!
//! The per-bin problem is not concave, so total power can jump as a bin switches
//! on. At such a price the bins on the threshold are split: a fraction of the bin
//! carries the stationary densities and the rest stays idle. This is the exact
//! optimum of the convexified problem and meets both budgets with equality.

use serde::{Deserialize, Serialize};

use crate::branch::{concave_point, lagrangian_density, MultiplierPair, RatePrice};
use crate::channel::{Allocation, ChannelGrid};
use crate::error::{Error, Result};
use crate::numeric::nelder_mead_2d;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative power residual.
    pub inner: f64,
    /// Relative rate residual.
    pub outer: f64,
    /// Bisection halvings per level.
    pub max_levels: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { inner: 1e-6, outer: 1e-5, max_levels: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SolveStrategy {
    /// Nested bisection after a sampled monotonicity check, grid search otherwise.
    #[default]
    Auto,
    NestedBisection,
    GridSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: Tolerances,
    pub strategy: SolveStrategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub allocation: Allocation,
    pub multipliers: MultiplierPair,
    pub residual_power: f64,
    pub residual_rate: f64,
    pub iterations: usize,
    pub possible_duality_gap: bool,
    /// Strategy that produced the result; never `Auto`.
    pub strategy: SolveStrategy,
}

/// Pointwise maximizer of the Lagrangian at fixed prices.
pub fn allocate_at_multipliers(g: &ChannelGrid, m: MultiplierPair) -> Allocation {
    let lc = RatePrice::from_value(m.lambda_c);
    let n = g.n_bins();
    let (mut s, mut c) = (vec![0.0; n], vec![0.0; n]);
    for (i, &h2) in g.h2().iter().enumerate() {
        if let Some((si, ci)) = candidate(h2, m.lambda_s, lc) {
            s[i] = si;
            c[i] = ci;
        }
    }
    Allocation::from_densities(g, s, c)
}

/// Riemann sum of the information density, in nats/s.
pub fn evaluate(g: &ChannelGrid, a: &Allocation) -> f64 {
    let mut a = a.clone();
    a.refresh(g);
    a.info
}

pub fn solve(g: &ChannelGrid, p: f64, c: f64, tol: &Tolerances) -> Result<SolveReport> {
    solve_with(g, p, c, &SolveOptions { tol: *tol, strategy: SolveStrategy::Auto })
}

pub fn solve_with(g: &ChannelGrid, p: f64, c: f64, opts: &SolveOptions) -> Result<SolveReport> {
    if !(p > 0.0 && p.is_finite() && c > 0.0) {
        return Err(Error::InvalidArgument(format!("solve needs p > 0 and c > 0, got p = {p}, c = {c}")));
    }
    if !g.has_gain() {
        return Err(Error::InfeasibleChannel);
    }
    let problem = Problem { g, p, c, tol: opts.tol };
    let report = match opts.strategy {
        SolveStrategy::NestedBisection => problem.nested(),
        SolveStrategy::GridSearch => problem.grid_search(),
        SolveStrategy::Auto => {
            if problem.looks_monotone() {
                problem.nested()
            } else {
                problem.grid_search()
            }
        }
    };
    let ok = report.residual_power <= opts.tol.inner && report.residual_rate <= opts.tol.outer;
    if ok {
        Ok(report)
    } else {
        Err(Error::NonConvergence { report: Box::new(report) })
    }
}

/// Concave stationary point if it beats the idle corner.
#[inline]
fn candidate(h2: f64, lambda_s: f64, lc: RatePrice) -> Option<(f64, f64)> {
    if h2 <= 0.0 {
        return None;
    }
    let (s, c) = concave_point(h2, lambda_s, lc)?;
    (lagrangian_density(h2, lambda_s, lc, s, c) > 0.0).then_some((s, c))
}

struct Problem<'a> {
    g: &'a ChannelGrid,
    p: f64,
    c: f64,
    tol: Tolerances,
}

/// Result of the power-matching stage at one rate price.
struct Inner {
    alloc: Allocation,
    lambda_s: f64,
}

impl Problem<'_> {
    /// Largest admissible power price at rate price `lc`.
    fn ls_ceiling(&self, lc: RatePrice) -> f64 {
        let r = 1.0 - lc.value.sqrt();
        self.g.max_h2() * r * r
    }

    fn power(&self, ls: f64, lc: RatePrice) -> f64 {
        let mut total = 0.0;
        for &h2 in self.g.h2() {
            if let Some((s, _)) = candidate(h2, ls, lc) {
                total += s;
            }
        }
        total * self.g.df()
    }

    /// Matches the power budget at rate price `lc`, splitting threshold bins.
    fn inner(&self, lc: RatePrice) -> Inner {
        let ceiling = self.ls_ceiling(lc);
        let mut hi = ceiling.ln();
        if self.power(ceiling, lc) >= self.p {
            return Inner { alloc: self.filled(ceiling, ceiling, lc), lambda_s: ceiling };
        }
        let mut lo = hi - 7.0;
        let mut spent = 0;
        while self.power(lo.exp(), lc) < self.p && spent < self.tol.max_levels {
            let width = hi - lo;
            hi = lo;
            lo -= 2.0 * width;
            if lo.exp() == 0.0 {
                lo = f64::MIN_POSITIVE.ln();
                break;
            }
            spent += 1;
        }
        for _ in 0..self.tol.max_levels {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-13 * (1.0 + mid.abs()) || mid <= lo || mid >= hi {
                break;
            }
            if self.power(mid.exp(), lc) >= self.p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Inner { alloc: self.filled(lo.exp(), hi.exp(), lc), lambda_s: hi.exp() }
    }

    /// Allocation at `ls_hi` (power at or below budget) topped up with the bins
    /// that switch on by `ls_lo`, strongest gain first.
    fn filled(&self, ls_lo: f64, ls_hi: f64, lc: RatePrice) -> Allocation {
        let g = self.g;
        let n = g.n_bins();
        let df = g.df();
        let (mut s, mut c, mut occ) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut marginal = Vec::new();
        let mut base = 0.0;
        for (i, &h2) in g.h2().iter().enumerate() {
            if let Some((si, ci)) = candidate(h2, ls_hi, lc) {
                s[i] = si;
                c[i] = ci;
                occ[i] = 1.0;
                base += si * df;
            } else if candidate(h2, ls_lo, lc).is_some() {
                let (si, ci) = concave_point(h2, ls_hi, lc).or_else(|| concave_point(h2, ls_lo, lc)).unwrap();
                s[i] = si;
                c[i] = ci;
                marginal.push(i);
            }
        }
        let h2 = g.h2();
        marginal.sort_by(|&a, &b| h2[b].total_cmp(&h2[a]).then(a.cmp(&b)));
        let mut need = self.p - base;
        for i in marginal {
            if need <= 0.0 {
                break;
            }
            let cap = s[i] * df;
            let o = (need / cap).min(1.0);
            occ[i] = o;
            need -= o * cap;
        }
        for i in 0..n {
            if occ[i] == 0.0 {
                s[i] = 0.0;
                c[i] = 0.0;
            }
        }
        Allocation::with_occupancy(g, s, c, occ)
    }

    fn report(&self, alloc: Allocation, m: MultiplierPair, iterations: usize, strategy: SolveStrategy) -> SolveReport {
        let residual_power = (alloc.total_power - self.p).abs() / self.p;
        let residual_rate = (alloc.total_rate - self.c).abs() / self.c;
        let possible_duality_gap = residual_power > self.tol.inner || residual_rate > self.tol.outer;
        SolveReport {
            allocation: alloc,
            multipliers: m,
            residual_power,
            residual_rate,
            iterations,
            possible_duality_gap,
            strategy,
        }
    }

    /// Bisection on `u = logit(lambda_c)`; total rate is non-increasing in `u`.
    fn nested(&self) -> SolveReport {
        let at = |u: f64| {
            let lc = RatePrice::from_logit(u);
            let inner = self.inner(lc);
            (inner, lc)
        };
        let rel = |a: &Allocation| (a.total_rate - self.c) / self.c;
        let mut iterations = 0;

        let mut lo = -4.0;
        let mut hi = 4.0;
        let mut best = at(0.0);
        let consider = |cand: (Inner, RatePrice), best: &mut (Inner, RatePrice)| {
            if rel(&cand.0.alloc).abs() < rel(&best.0.alloc).abs() {
                *best = cand;
            }
        };
        while iterations < self.tol.max_levels {
            let e = at(lo);
            let r = rel(&e.0.alloc);
            consider(e, &mut best);
            if r >= 0.0 {
                break;
            }
            hi = lo;
            lo *= 2.0;
            iterations += 1;
        }
        while iterations < self.tol.max_levels {
            let e = at(hi);
            let r = rel(&e.0.alloc);
            consider(e, &mut best);
            if r <= 0.0 {
                break;
            }
            lo = hi;
            hi *= 2.0;
            iterations += 1;
        }
        while iterations < self.tol.max_levels && rel(&best.0.alloc).abs() > self.tol.outer {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let e = at(mid);
            let r = rel(&e.0.alloc);
            consider(e, &mut best);
            if r >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
        }
        let (inner, lc) = best;
        let m = MultiplierPair::new(inner.lambda_s, lc.value);
        self.report(inner.alloc, m, iterations, SolveStrategy::NestedBisection)
    }

    fn totals(&self, ls: f64, lc: RatePrice) -> (f64, f64) {
        let (mut p, mut r) = (0.0, 0.0);
        for &h2 in self.g.h2() {
            if let Some((s, c)) = candidate(h2, ls, lc) {
                p += s;
                r += c;
            }
        }
        (p * self.g.df(), r * self.g.df())
    }

    /// Squared log residuals of both budgets at `(ln lambda_s, logit lambda_c)`.
    fn misfit(&self, x: [f64; 2]) -> f64 {
        let lc = RatePrice::from_logit(x[1]);
        let ceiling = self.ls_ceiling(lc);
        let ls = x[0].exp();
        if !(ls > 0.0 && ls <= ceiling) {
            return 1e6 + (x[0] - ceiling.ln()).abs();
        }
        let (p, r) = self.totals(ls, lc);
        if p <= 0.0 || r <= 0.0 {
            return 1e4 + x[0] - ceiling.ln();
        }
        (p / self.p).ln().powi(2) + (r / self.c).ln().powi(2)
    }

    /// Coarse scan of the multiplier plane followed by a simplex polish.
    fn grid_search(&self) -> SolveReport {
        const N: usize = 128;
        let top = self.g.max_h2().ln();
        let (ls_lo, ls_hi) = (top - 40.0, top);
        let (u_lo, u_hi) = (-25.0, 12.0);
        let mut best = ([top, 0.0], f64::INFINITY);
        for i in 0..N {
            let x0 = ls_lo + (ls_hi - ls_lo) * (i as f64 + 0.5) / N as f64;
            for j in 0..N {
                let x1 = u_lo + (u_hi - u_lo) * (j as f64 + 0.5) / N as f64;
                let f = self.misfit([x0, x1]);
                if f < best.1 {
                    best = ([x0, x1], f);
                }
            }
        }
        let step = [(ls_hi - ls_lo) / N as f64, (u_hi - u_lo) / N as f64];
        let (x, _) = nelder_mead_2d(|x| self.misfit(x), best.0, step, 4000, 1e-16);
        let m = MultiplierPair::new(x[0].exp(), RatePrice::from_logit(x[1]).value);
        let alloc = allocate_at_multipliers(self.g, m);
        self.report(alloc, m, N * N, SolveStrategy::GridSearch)
    }

    /// Samples power along `lambda_s` and rate along `lambda_c` and checks both
    /// are non-increasing.
    fn looks_monotone(&self) -> bool {
        let slack = |a: f64, b: f64| b <= a * (1.0 + 1e-9) + 1e-12;
        for k in -4..=4 {
            let lc = RatePrice::from_logit(2.0 * k as f64);
            let top = self.ls_ceiling(lc).ln();
            let mut prev = f64::INFINITY;
            for j in 0..24 {
                let ls = (top - 20.0 * (1.0 - j as f64 / 23.0)).exp();
                let pw = self.power(ls, lc);
                if !slack(prev, pw) {
                    return false;
                }
                prev = pw;
            }
        }
        let mut prev = f64::INFINITY;
        for k in 0..12 {
            let u = -10.0 + 20.0 * k as f64 / 11.0;
            let r = self.inner(RatePrice::from_logit(u)).alloc.total_rate;
            if !slack(prev, r) {
                return false;
            }
            prev = r;
        }
        true
    }
}
