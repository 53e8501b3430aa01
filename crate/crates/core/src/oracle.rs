//! Brute-force maximizers over discretized budget splits, used as ground truth
//! for the solvers on small instances.
//!
//! Both budgets are split exactly (objective increases in each resource) on the
//! lattice `{0, 1/steps, ..., 1}` of the total. The maximum over all splits is
//! found by a max-plus recursion over channels, which visits the same set of
//! splits as plain enumeration.

use serde::{Deserialize, Serialize};

use crate::channel::{Allocation, ChannelGrid};
use crate::error::{Error, Result};
use crate::gib::{density, log_gain_ratio};
use crate::mm::EigenChannel;

pub const CONTINUOUS_MAX_BINS: usize = 4;
pub const DISCRETE_MAX_CHANNELS: usize = 3;
pub const MIN_STEPS: usize = 20;
pub const DEFAULT_STEPS: usize = 60;

/// How a bin may use its share of the budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OracleModel {
    /// Spread evenly over the whole bin.
    Atomic,
    /// Concentrated on a fraction `m / (4 steps)` of the bin, the rest idle.
    #[default]
    BandSplit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Power given to each channel (W for bins, total `x_n^2` for eigenchannels).
    pub power: Vec<f64>,
    /// Rate given to each channel (nats/s for bins, nats per use for eigenchannels).
    pub rate: Vec<f64>,
    /// Occupied fraction of each bin; all ones for eigenchannels.
    pub occupancy: Vec<f64>,
    pub objective: f64,
    pub steps: usize,
}

impl OracleResult {
    /// Per-Hz allocation on `g` realizing this split.
    pub fn to_allocation(&self, g: &ChannelGrid) -> Allocation {
        let df = g.df();
        let n = g.n_bins();
        let (mut s, mut c, mut occ) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            if self.occupancy[i] > 0.0 && (self.power[i] > 0.0 || self.rate[i] > 0.0) {
                let width = self.occupancy[i] * df;
                s[i] = self.power[i] / width;
                c[i] = self.rate[i] / width;
                occ[i] = self.occupancy[i];
            }
        }
        Allocation::with_occupancy(g, s, c, occ)
    }
}

/// Value and occupancy of one channel for every `(power step, rate step)`.
struct Table {
    value: Vec<f64>,
    occupancy: Vec<f64>,
}

/// Max-plus combination of per-channel tables; returns the best objective and
/// the chosen `(power step, rate step)` per channel.
fn best_split(tables: &[Table], steps: usize) -> (f64, Vec<(usize, usize)>) {
    let side = steps + 1;
    let idx = |j: usize, k: usize| j * side + k;
    let mut best = tables[0].value.clone();
    let mut choices: Vec<Vec<(u16, u16)>> = Vec::with_capacity(tables.len());
    choices.push((0..side * side).map(|t| ((t / side) as u16, (t % side) as u16)).collect());
    for t in &tables[1..] {
        let mut next = vec![f64::NEG_INFINITY; side * side];
        let mut pick = vec![(0u16, 0u16); side * side];
        for j in 0..side {
            for k in 0..side {
                let mut m = f64::NEG_INFINITY;
                let mut arg = (0, 0);
                for jj in 0..=j {
                    for kk in 0..=k {
                        let v = best[idx(j - jj, k - kk)] + t.value[idx(jj, kk)];
                        if v > m {
                            m = v;
                            arg = (jj as u16, kk as u16);
                        }
                    }
                }
                next[idx(j, k)] = m;
                pick[idx(j, k)] = arg;
            }
        }
        best = next;
        choices.push(pick);
    }
    let mut split = vec![(0, 0); tables.len()];
    let (mut j, mut k) = (steps, steps);
    for i in (0..tables.len()).rev() {
        let (jj, kk) = choices[i][idx(j, k)];
        split[i] = (jj as usize, kk as usize);
        j -= jj as usize;
        k -= kk as usize;
    }
    (best[idx(steps, steps)], split)
}

fn check_steps(steps: usize) -> Result<()> {
    if steps < MIN_STEPS || steps > u16::MAX as usize {
        return Err(Error::InvalidArgument(format!("oracle needs {MIN_STEPS} <= steps <= 65535, got {steps}")));
    }
    Ok(())
}

fn check_budgets(p: f64, c: f64) -> Result<()> {
    if p >= 0.0 && c >= 0.0 && p.is_finite() && c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("budgets must be finite and >= 0, got p = {p}, c = {c}")))
    }
}

/// Best split of `p` watts and `c` nats/s over at most four bins.
pub fn grid_oracle_continuous(
    g: &ChannelGrid,
    p: f64,
    c: f64,
    steps: usize,
    model: OracleModel,
) -> Result<OracleResult> {
    if g.n_bins() > CONTINUOUS_MAX_BINS {
        return Err(Error::OracleTooLarge { size: g.n_bins(), limit: CONTINUOUS_MAX_BINS });
    }
    check_steps(steps)?;
    check_budgets(p, c)?;
    let df = g.df();
    let side = steps + 1;
    let fractions: Vec<f64> = match model {
        OracleModel::Atomic => vec![1.0],
        OracleModel::BandSplit => {
            let j = 4 * steps;
            (1..=j).map(|m| m as f64 / j as f64).collect()
        }
    };
    let tables: Vec<Table> = g
        .h2()
        .iter()
        .map(|&h2| {
            let mut value = vec![0.0; side * side];
            let mut occupancy = vec![0.0; side * side];
            for j in 0..side {
                let pj = p * j as f64 / steps as f64;
                for k in 0..side {
                    let ck = c * k as f64 / steps as f64;
                    let mut best = (0.0, 1.0);
                    for &th in &fractions {
                        let width = th * df;
                        let v = width * density(pj / width, h2, ck / width);
                        if v > best.0 {
                            best = (v, th);
                        }
                    }
                    value[j * side + k] = best.0;
                    occupancy[j * side + k] = best.1;
                }
            }
            Table { value, occupancy }
        })
        .collect();
    let (objective, split) = best_split(&tables, steps);
    let power = split.iter().map(|&(j, _)| p * j as f64 / steps as f64).collect();
    let rate = split.iter().map(|&(_, k)| c * k as f64 / steps as f64).collect();
    let occupancy = split.iter().zip(&tables).map(|(&(j, k), t)| t.occupancy[j * side + k]).collect();
    Ok(OracleResult { power, rate, occupancy, objective, steps })
}

/// Best split of `p` and `c` over at most three eigenchannels.
pub fn grid_oracle_discrete(e: &EigenChannel, p: f64, c: f64, steps: usize) -> Result<OracleResult> {
    if e.len() > DISCRETE_MAX_CHANNELS {
        return Err(Error::OracleTooLarge { size: e.len(), limit: DISCRETE_MAX_CHANNELS });
    }
    check_steps(steps)?;
    check_budgets(p, c)?;
    let side = steps + 1;
    let tables: Vec<Table> = e
        .lambdas()
        .iter()
        .map(|&lam| {
            let mut value = vec![0.0; side * side];
            for j in 0..side {
                let x = p * j as f64 / steps as f64;
                for k in 0..side {
                    let ck = c * k as f64 / steps as f64;
                    value[j * side + k] = 0.5 * log_gain_ratio(lam * x, 2.0 * ck);
                }
            }
            Table { value, occupancy: vec![1.0; side * side] }
        })
        .collect();
    let (objective, split) = best_split(&tables, steps);
    Ok(OracleResult {
        power: split.iter().map(|&(j, _)| p * j as f64 / steps as f64).collect(),
        rate: split.iter().map(|&(_, k)| c * k as f64 / steps as f64).collect(),
        occupancy: vec![1.0; e.len()],
        objective,
        steps,
    })
}
