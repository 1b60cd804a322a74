//! Check-node and variable-node density updates.

use super::histogram::{Grid, LlrHistogram};
use super::DeError;
use crate::code::DegreeDistribution;
use crate::decoder::phi;

/// Which density feeds the channel stage back from the decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Ext2Rule {
    /// Sum of all incoming check messages only, matching what the decoder
    /// actually passes to the detector.
    #[default]
    DecoderOnly,
    /// Check-message sum convolved with the channel density as well.
    WithChannel,
}

/// Sign/magnitude split of a density: magnitude index `0..=B` on the grid,
/// `B + 1` for infinity.
struct Split {
    pos: Vec<f64>,
    neg: Vec<f64>,
}

impl Split {
    fn of(h: &LlrHistogram) -> Self {
        let b = h.grid().half_bins();
        let m = h.masses();
        let mut pos = vec![0.0; b + 2];
        let mut neg = vec![0.0; b + 2];
        pos[..=b].copy_from_slice(&m[b..]);
        for k in 1..=b {
            neg[k] = m[b - k];
        }
        pos[b + 1] = h.pos_inf();
        neg[b + 1] = h.neg_inf();
        Self { pos, neg }
    }

    fn into_histogram(self, grid: Grid) -> LlrHistogram {
        let b = grid.half_bins();
        let mut h = LlrHistogram::empty(grid);
        for k in 0..=b {
            h.add(k as f64 * grid.delta(), self.pos[k]);
            if k > 0 {
                h.add(-(k as f64) * grid.delta(), self.neg[k]);
            } else {
                h.add(0.0, self.neg[0]);
            }
        }
        h.add(f64::INFINITY, self.pos[b + 1]);
        h.add(f64::NEG_INFINITY, self.neg[b + 1]);
        h
    }
}

/// Quantized two-input check operation on magnitudes:
/// `table[i][j] = round(phi(phi(i d) + phi(j d)) / d)`, index `B + 1` = inf.
#[derive(Clone, Debug)]
pub struct CheckTable {
    grid: Grid,
    width: usize,
    table: Vec<u16>,
}

impl CheckTable {
    pub fn new(grid: Grid) -> Self {
        let b = grid.half_bins();
        let width = b + 2;
        let phis: Vec<f64> = (0..width)
            .map(|k| {
                if k == b + 1 {
                    0.0
                } else {
                    phi(k as f64 * grid.delta())
                }
            })
            .collect();
        let mut table = vec![0u16; width * width];
        for i in 0..width {
            for j in i..width {
                let k = if i == b + 1 && j == b + 1 {
                    b + 1
                } else {
                    let v = phi(phis[i] + phis[j]) / grid.delta();
                    (v.round() as usize).min(b)
                };
                table[i * width + j] = k as u16;
                table[j * width + i] = k as u16;
            }
        }
        Self { grid, width, table }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    fn combine(&self, a: &Split, b: &Split) -> Split {
        let w = self.width;
        let mut out = Split {
            pos: vec![0.0; w],
            neg: vec![0.0; w],
        };
        let nz: Vec<(usize, f64, f64)> = (0..w)
            .filter(|&j| b.pos[j] > 0.0 || b.neg[j] > 0.0)
            .map(|j| (j, b.pos[j], b.neg[j]))
            .collect();
        for i in 0..w {
            let (ap, an) = (a.pos[i], a.neg[i]);
            if ap == 0.0 && an == 0.0 {
                continue;
            }
            let row = &self.table[i * w..(i + 1) * w];
            for &(j, bp, bn) in &nz {
                let k = row[j] as usize;
                out.pos[k] += ap * bp + an * bn;
                out.neg[k] += ap * bn + an * bp;
            }
        }
        out
    }

    /// Density of the check operation applied to `k` independent inputs of
    /// density `h` (`k >= 1`).
    pub fn fold(&self, h: &LlrHistogram, k: usize) -> Result<LlrHistogram, DeError> {
        if h.grid() != self.grid {
            return Err(DeError::GridMismatch);
        }
        assert!(k >= 1, "check fold needs at least one input");
        let mut base = Split::of(h);
        let mut acc: Option<Split> = None;
        let mut k = k;
        loop {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => Split {
                        pos: base.pos.clone(),
                        neg: base.neg.clone(),
                    },
                    Some(a) => self.combine(&a, &base),
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = self.combine(&base, &base);
        }
        Ok(acc.expect("k >= 1").into_histogram(self.grid))
    }
}

/// `f_q = sum_i rho_i * fold(f_z, i - 1)`.
pub fn check_node_density(
    table: &CheckTable,
    fz: &LlrHistogram,
    degrees: &DegreeDistribution,
) -> Result<LlrHistogram, DeError> {
    let mut out = LlrHistogram::empty(fz.grid());
    for &(d, w) in degrees.rho() {
        out.accumulate(&table.fold(fz, d - 1)?, w)?;
    }
    out.normalize();
    Ok(out)
}

/// Self-convolution powers `f^0 .. f^max`.
fn powers(f: &LlrHistogram, max: usize) -> Result<Vec<LlrHistogram>, DeError> {
    let mut out = vec![LlrHistogram::zero(f.grid())];
    for k in 1..=max {
        let next = out[k - 1].convolve(f)?;
        out.push(next);
    }
    Ok(out)
}

/// `f_z = f_tau * sum_i lambda_i f_q^{*(i-1)}`.
pub fn variable_node_density(
    ftau: &LlrHistogram,
    fq: &LlrHistogram,
    degrees: &DegreeDistribution,
) -> Result<LlrHistogram, DeError> {
    let pw = powers(fq, degrees.dv_max().saturating_sub(1))?;
    let mut mix = LlrHistogram::empty(fq.grid());
    for &(d, w) in degrees.lambda() {
        mix.accumulate(&pw[d - 1], w)?;
    }
    let mut out = ftau.convolve(&mix)?;
    out.normalize();
    Ok(out)
}

/// Node-perspective mixture of full check-message sums, optionally convolved
/// with the channel density.
pub fn ext2_density(
    ftau: &LlrHistogram,
    fq: &LlrHistogram,
    degrees: &DegreeDistribution,
    rule: Ext2Rule,
) -> Result<LlrHistogram, DeError> {
    let pw = powers(fq, degrees.dv_max())?;
    let mut mix = LlrHistogram::empty(fq.grid());
    for (d, w) in degrees.lambda_bar() {
        mix.accumulate(&pw[d], w)?;
    }
    let mut out = match rule {
        Ext2Rule::DecoderOnly => mix,
        Ext2Rule::WithChannel => ftau.convolve(&mix)?,
    };
    out.normalize();
    Ok(out)
}
