//! Quantized LLR densities.

use super::DeError;

/// Uniform quantization grid `k * delta`, `|k| <= half_bins`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    delta: f64,
    half_bins: usize,
}

impl Grid {
    pub fn new(delta: f64, llr_max: f64) -> Result<Self, DeError> {
        if !(delta > 0.0 && llr_max > delta && (llr_max / delta) <= 1e5) {
            return Err(DeError::Config(format!(
                "bad quantization: delta {delta}, llr_max {llr_max}"
            )));
        }
        Ok(Self {
            delta,
            half_bins: (llr_max / delta).round() as usize,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn half_bins(&self) -> usize {
        self.half_bins
    }

    pub fn llr_max(&self) -> f64 {
        self.half_bins as f64 * self.delta
    }

    pub fn bins(&self) -> usize {
        2 * self.half_bins + 1
    }

    pub fn value(&self, index: usize) -> f64 {
        (index as f64 - self.half_bins as f64) * self.delta
    }

    /// Where a value lands: a bin index, or one of the infinities.
    pub fn locate(&self, x: f64) -> Slot {
        if x.is_nan() {
            return Slot::Bin(self.half_bins);
        }
        let k = (x / self.delta).round();
        if k > self.half_bins as f64 {
            Slot::PosInf
        } else if k < -(self.half_bins as f64) {
            Slot::NegInf
        } else {
            Slot::Bin((k as i64 + self.half_bins as i64) as usize)
        }
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            delta: 0.05,
            half_bins: 1000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    NegInf,
    Bin(usize),
    PosInf,
}

/// Probability mass over the grid bins plus point masses at `-inf`/`+inf`.
/// Values beyond the grid saturate to the infinities.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrHistogram {
    grid: Grid,
    mass: Vec<f64>,
    neg_inf: f64,
    pos_inf: f64,
}

impl LlrHistogram {
    pub fn empty(grid: Grid) -> Self {
        Self {
            grid,
            mass: vec![0.0; grid.bins()],
            neg_inf: 0.0,
            pos_inf: 0.0,
        }
    }

    /// Unit mass at the grid point nearest `x` (or at an infinity).
    pub fn delta(grid: Grid, x: f64) -> Self {
        let mut h = Self::empty(grid);
        h.add(x, 1.0);
        h
    }

    pub fn zero(grid: Grid) -> Self {
        Self::delta(grid, 0.0)
    }

    /// Normalized histogram of samples.
    pub fn from_samples(grid: Grid, samples: &[f64]) -> Result<Self, DeError> {
        if samples.is_empty() {
            return Err(DeError::Config("no samples".into()));
        }
        let mut h = Self::empty(grid);
        let w = 1.0 / samples.len() as f64;
        for &x in samples {
            h.add(x, w);
        }
        Ok(h)
    }

    /// Exact bin masses of `N(mean, var)`; each bin covers
    /// `[(k - 1/2) delta, (k + 1/2) delta)`.
    pub fn gaussian(grid: Grid, mean: f64, var: f64) -> Self {
        let mut h = Self::empty(grid);
        let s = (2.0 * var).sqrt();
        let cdf = |x: f64| 0.5 * libm::erfc(-(x - mean) / s);
        let half = 0.5 * grid.delta;
        let lo = grid.value(0) - half;
        h.neg_inf = cdf(lo);
        let mut prev = h.neg_inf;
        for k in 0..grid.bins() {
            let c = cdf(grid.value(k) + half);
            h.mass[k] = (c - prev).max(0.0);
            prev = c;
        }
        h.pos_inf = 0.5 * libm::erfc((grid.value(grid.bins() - 1) + half - mean) / s);
        h
    }

    pub fn add(&mut self, x: f64, w: f64) {
        match self.grid.locate(x) {
            Slot::NegInf => self.neg_inf += w,
            Slot::PosInf => self.pos_inf += w,
            Slot::Bin(k) => self.mass[k] += w,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn neg_inf(&self) -> f64 {
        self.neg_inf
    }

    pub fn pos_inf(&self) -> f64 {
        self.pos_inf
    }

    pub fn total(&self) -> f64 {
        self.neg_inf + self.pos_inf + self.mass.iter().sum::<f64>()
    }

    /// Mean of the finite part, ignoring any mass at the infinities.
    pub fn finite_mean(&self) -> f64 {
        let t: f64 = self.mass.iter().sum();
        self.mass
            .iter()
            .enumerate()
            .map(|(k, m)| m * self.grid.value(k))
            .sum::<f64>()
            / t
    }

    /// `P(tau < 0)` with the mass at exactly zero split evenly.
    pub fn error_probability(&self) -> f64 {
        let b = self.grid.half_bins;
        (self.neg_inf + self.mass[..b].iter().sum::<f64>() + 0.5 * self.mass[b]).clamp(0.0, 1.0)
    }

    /// Rescales to unit total mass. Repeated node updates otherwise
    /// amplify floating-point drift in the total geometrically.
    pub fn normalize(&mut self) {
        let t = self.total();
        if t > 0.0 {
            self.scale(1.0 / t);
        }
    }

    pub fn scale(&mut self, w: f64) {
        self.mass.iter_mut().for_each(|m| *m *= w);
        self.neg_inf *= w;
        self.pos_inf *= w;
    }

    /// `self += w * other`.
    pub fn accumulate(&mut self, other: &Self, w: f64) -> Result<(), DeError> {
        self.same_grid(other)?;
        for (a, b) in self.mass.iter_mut().zip(&other.mass) {
            *a += w * b;
        }
        self.neg_inf += w * other.neg_inf;
        self.pos_inf += w * other.pos_inf;
        Ok(())
    }

    fn same_grid(&self, other: &Self) -> Result<(), DeError> {
        if self.grid != other.grid {
            return Err(DeError::GridMismatch);
        }
        Ok(())
    }

    /// Density of the sum of independent variables. Sums past the grid
    /// saturate; `+inf + -inf` is treated as an erasure (zero).
    pub fn convolve(&self, other: &Self) -> Result<Self, DeError> {
        self.same_grid(other)?;
        let b = self.grid.half_bins as isize;
        let n = self.grid.bins();
        let mut out = Self::empty(self.grid);
        let other_nz: Vec<(usize, f64)> = other
            .mass
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, m)| m > 0.0)
            .collect();
        for (i, &a) in self.mass.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for &(j, m) in &other_nz {
                let k = i as isize + j as isize - b;
                let w = a * m;
                if k < 0 {
                    out.neg_inf += w;
                } else if k >= n as isize {
                    out.pos_inf += w;
                } else {
                    out.mass[k as usize] += w;
                }
            }
        }
        let fin_a: f64 = self.mass.iter().sum();
        let fin_b: f64 = other.mass.iter().sum();
        out.pos_inf += self.pos_inf * (fin_b + other.pos_inf) + fin_a * other.pos_inf;
        out.neg_inf += self.neg_inf * (fin_b + other.neg_inf) + fin_a * other.neg_inf;
        out.mass[self.grid.half_bins] +=
            self.pos_inf * other.neg_inf + self.neg_inf * other.pos_inf;
        Ok(out)
    }

    /// `k`-fold self convolution (`k = 0` gives the zero delta).
    pub fn power(&self, k: usize) -> Result<Self, DeError> {
        let mut acc = Self::zero(self.grid);
        for _ in 0..k {
            acc = acc.convolve(self)?;
        }
        Ok(acc)
    }

    /// Inverse-CDF sampling table over `[-inf, bins..., +inf]`.
    pub fn sample_values(&self) -> (Vec<f64>, Vec<f64>) {
        let mut values = Vec::with_capacity(self.mass.len() + 2);
        let mut weights = Vec::with_capacity(self.mass.len() + 2);
        values.push(f64::NEG_INFINITY);
        weights.push(self.neg_inf);
        for (k, &m) in self.mass.iter().enumerate() {
            values.push(self.grid.value(k));
            weights.push(m);
        }
        values.push(f64::INFINITY);
        weights.push(self.pos_inf);
        (values, weights)
    }
}
