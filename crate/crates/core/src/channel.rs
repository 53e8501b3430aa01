//! Sampled channels and allocations over them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gib::density;

/// `|H(f)|^2` sampled at bin centers `f_i = (i + 1/2) df`, `df = w / n_bins`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelGrid {
    w: f64,
    h2: Vec<f64>,
}

impl ChannelGrid {
    pub fn new(w: f64, h2: Vec<f64>) -> Result<Self> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidArgument(format!("bandwidth must be positive, got {w}")));
        }
        if h2.is_empty() {
            return Err(Error::InvalidArgument("channel needs at least one bin".into()));
        }
        if let Some(bad) = h2.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!("|H|^2 samples must be finite and >= 0, got {bad}")));
        }
        Ok(ChannelGrid { w, h2 })
    }

    /// Constant gain over `n_bins` bins.
    pub fn flat(w: f64, n_bins: usize, h2: f64) -> Result<Self> {
        Self::new(w, vec![h2; n_bins])
    }

    /// Samples `h2_of(f)` at the bin centers.
    pub fn from_fn(w: f64, n_bins: usize, h2_of: impl Fn(f64) -> f64) -> Result<Self> {
        let df = w / n_bins as f64;
        Self::new(w, (0..n_bins).map(|i| h2_of((i as f64 + 0.5) * df)).collect())
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn h2(&self) -> &[f64] {
        &self.h2
    }

    pub fn n_bins(&self) -> usize {
        self.h2.len()
    }

    pub fn df(&self) -> f64 {
        self.w / self.h2.len() as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.df()
    }

    pub fn max_h2(&self) -> f64 {
        self.h2.iter().copied().fold(0.0, f64::max)
    }

    pub fn has_gain(&self) -> bool {
        self.h2.iter().any(|&v| v > 0.0)
    }
}

/// Power and rate densities per bin.
///
/// `occupancy[i]` is the fraction of bin `i` carrying `(s[i], c[i])`; the rest
/// of the bin is idle. It is 1 on active bins except at most a few marginal
/// bins that share a tie in the dual, and 0 on inactive bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub s: Vec<f64>,
    pub c: Vec<f64>,
    pub active: Vec<bool>,
    pub occupancy: Vec<f64>,
    pub df: f64,
    pub total_power: f64,
    pub total_rate: f64,
    pub info: f64,
}

impl Allocation {
    /// Builds an allocation with full occupancy wherever `s` or `c` is positive.
    pub fn from_densities(g: &ChannelGrid, s: Vec<f64>, c: Vec<f64>) -> Self {
        let occupancy = s.iter().zip(&c).map(|(&s, &c)| if s > 0.0 || c > 0.0 { 1.0 } else { 0.0 }).collect();
        Self::with_occupancy(g, s, c, occupancy)
    }

    pub fn with_occupancy(g: &ChannelGrid, s: Vec<f64>, c: Vec<f64>, occupancy: Vec<f64>) -> Self {
        debug_assert!(s.len() == g.n_bins() && c.len() == g.n_bins() && occupancy.len() == g.n_bins());
        let active =
            occupancy.iter().zip(s.iter().zip(&c)).map(|(&o, (&s, &c))| o > 0.0 && (s > 0.0 || c > 0.0)).collect();
        let mut a = Allocation { s, c, active, occupancy, df: g.df(), total_power: 0.0, total_rate: 0.0, info: 0.0 };
        a.refresh(g);
        a
    }

    pub fn zero(g: &ChannelGrid) -> Self {
        let n = g.n_bins();
        Self::with_occupancy(g, vec![0.0; n], vec![0.0; n], vec![0.0; n])
    }

    /// Recomputes the totals from the vectors.
    pub fn refresh(&mut self, g: &ChannelGrid) {
        let mut p = 0.0;
        let mut r = 0.0;
        let mut info = 0.0;
        for i in 0..self.s.len() {
            let o = self.occupancy[i];
            if o > 0.0 {
                p += o * self.s[i];
                r += o * self.c[i];
                info += o * density(self.s[i], g.h2()[i], self.c[i]);
            }
        }
        self.df = g.df();
        self.total_power = p * self.df;
        self.total_rate = r * self.df;
        self.info = info * self.df;
    }

    /// Occupied bandwidth in Hz.
    pub fn active_bandwidth(&self) -> f64 {
        self.occupancy.iter().sum::<f64>() * self.df
    }

    /// Smallest rate density over occupied bins, `None` if nothing is active.
    pub fn min_active_rate(&self) -> Option<f64> {
        self.c
            .iter()
            .zip(&self.active)
            .filter(|(_, &a)| a)
            .map(|(&c, _)| c)
            .fold(None, |m, c| Some(m.map_or(c, |m: f64| m.min(c))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = ChannelGrid::flat(10.0, 4, 1.0).unwrap();
        assert_eq!(g.df(), 2.5);
        assert_eq!(g.center(0), 1.25);
        assert_eq!(g.center(3), 8.75);
        assert_eq!(g.max_h2(), 1.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(ChannelGrid::new(0.0, vec![1.0]).is_err());
        assert!(ChannelGrid::new(1.0, vec![]).is_err());
        assert!(ChannelGrid::new(1.0, vec![1.0, -0.1]).is_err());
        assert!(ChannelGrid::new(1.0, vec![f64::NAN]).is_err());
    }

    #[test]
    fn totals_follow_vectors() {
        let g = ChannelGrid::flat(10.0, 10, 1.0).unwrap();
        let a = Allocation::from_densities(&g, vec![10.0; 10], vec![0.9; 10]);
        assert!((a.total_power - 100.0).abs() < 1e-12);
        assert!((a.total_rate - 9.0).abs() < 1e-12);
        assert!((a.info - 7.754_036).abs() < 1e-5);
        assert_eq!(a.active_bandwidth(), 10.0);
        assert_eq!(Allocation::zero(&g).info, 0.0);
    }
}
