//! Iterative two-dimensional channel detector.
//!
//! Each inner iteration runs a symbol-based BCJR along every row of received
//! samples (down-track) and then a bit-based BCJR down every column
//! (cross-track). A symbol at received position `(i, j)` is the column of bits
//! `x(i, j), x(i-1, j), ..., x(i-M_h+1, j)`.
//!
//! Detection always works on a rectangular region of received samples. The
//! full detector uses the whole received array; the windowed detector uses a
//! small region around each bit. Region edges that touch the guard border get
//! the exact all-(-1) boundary state, other edges an uninformative one.

mod bcjr;
pub mod maxstar;
pub mod trellis;

pub use bcjr::{
    bit_log_probs, bit_to_symbol, cross_track_bcjr, down_track_bcjr, CrossTrackOutput,
    DownTrackOutput,
};
pub use maxstar::{max_star, max_star_all};
pub use trellis::{Boundary, CrossTrackTrellis, DownTrackTrellis, SymbolAlphabet};

use crate::channel::{ChannelMatrix, RealGrid};
use rayon::prelude::*;
use thiserror::Error;

const GUARD: [f64; 2] = [0.0, f64::NEG_INFINITY];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectorError {
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("no consistent trellis path at step {step} (noiseless input inconsistent with the channel?)")]
    NonFinite { step: usize },
    #[error("invalid detector configuration: {0}")]
    InvalidConfig(String),
}

/// Which half-iteration the inner loop starts with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    DownTrack,
    CrossTrack,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DetectorConfig {
    /// Inner iterations `I_det`.
    pub iterations: usize,
    pub start: Direction,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            iterations: 3,
            start: Direction::DownTrack,
        }
    }
}

/// Inclusive rectangle of received samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Region {
    r0: usize,
    r1: usize,
    c0: usize,
    c1: usize,
}

impl Region {
    fn rows(&self) -> usize {
        self.r1 - self.r0 + 1
    }

    fn cols(&self) -> usize {
        self.c1 - self.c0 + 1
    }
}

/// Iterative detector for one channel matrix and one page geometry.
#[derive(Clone, Debug)]
pub struct Detector {
    h: ChannelMatrix,
    down: DownTrackTrellis,
    cross: CrossTrackTrellis,
    config: DetectorConfig,
    rows: usize,
    cols: usize,
}

impl Detector {
    /// Detector for `rows x cols` pages of bits.
    pub fn new(
        h: &ChannelMatrix,
        rows: usize,
        cols: usize,
        config: DetectorConfig,
    ) -> Result<Self, DetectorError> {
        if config.iterations == 0 {
            return Err(DetectorError::InvalidConfig(
                "iterations must be at least 1".into(),
            ));
        }
        if rows == 0 || cols == 0 {
            return Err(DetectorError::InvalidConfig("empty page".into()));
        }
        if h.rows() > 8 {
            return Err(DetectorError::InvalidConfig(format!(
                "channel has {} rows, at most 8 supported",
                h.rows()
            )));
        }
        let states = (h.rows() * (h.cols() - 1)) as u32;
        if states > 12 {
            return Err(DetectorError::InvalidConfig(format!(
                "down-track trellis with 2^{states} states is too large"
            )));
        }
        Ok(Self {
            h: h.clone(),
            down: DownTrackTrellis::new(h),
            cross: CrossTrackTrellis::new(h.rows()),
            config,
            rows,
            cols,
        })
    }

    pub fn channel(&self) -> &ChannelMatrix {
        &self.h
    }

    pub fn config(&self) -> DetectorConfig {
        self.config
    }

    pub fn page_rows(&self) -> usize {
        self.rows
    }

    pub fn page_cols(&self) -> usize {
        self.cols
    }

    fn received_rows(&self) -> usize {
        self.rows + self.h.rows() - 1
    }

    fn received_cols(&self) -> usize {
        self.cols + self.h.cols() - 1
    }

    fn check_inputs(&self, r: &RealGrid, priors: &[f64]) -> Result<(), DetectorError> {
        let (rr, rc) = (self.received_rows(), self.received_cols());
        if r.rows() != rr || r.cols() != rc {
            return Err(DetectorError::SizeMismatch {
                expected: rr * rc,
                got: r.rows() * r.cols(),
            });
        }
        if priors.len() != self.rows * self.cols {
            return Err(DetectorError::SizeMismatch {
                expected: self.rows * self.cols,
                got: priors.len(),
            });
        }
        Ok(())
    }

    /// Full-page detection. `priors` are decoder LLRs `log P(+1)/P(-1)` per
    /// bit in row-major order; the result is the extrinsic LLR per bit (the
    /// a-posteriori LLR with the bit's own prior removed).
    pub fn detect(
        &self,
        r: &RealGrid,
        sigma: f64,
        priors: &[f64],
    ) -> Result<Vec<f64>, DetectorError> {
        self.check_inputs(r, priors)?;
        let region = Region {
            r0: 0,
            r1: self.received_rows() - 1,
            c0: 0,
            c1: self.received_cols() - 1,
        };
        let posterior = self.run_region(r, sigma, priors, region)?;
        let mut out = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let n = i * self.cols + j;
                out[n] = posterior[i * region.cols() + j] - priors[n];
            }
        }
        Ok(out)
    }

    /// Windowed detection: each bit `(i, j)` is detected from the received
    /// samples in rows `i - F_c - M_h + 1 ..= i + F_c + M_h - 1` and columns
    /// `j - F_d - N_h + 1 ..= j + F_d + N_h - 1`, clipped to the page.
    pub fn detect_windowed(
        &self,
        r: &RealGrid,
        sigma: f64,
        priors: &[f64],
        fc: usize,
        fd: usize,
    ) -> Result<Vec<f64>, DetectorError> {
        if fc == 0 || fd == 0 {
            return Err(DetectorError::InvalidConfig(
                "window half-widths must be at least 1".into(),
            ));
        }
        self.check_inputs(r, priors)?;
        let (mh, nh) = (self.h.rows(), self.h.cols());
        let (last_r, last_c) = (self.received_rows() - 1, self.received_cols() - 1);
        (0..self.rows * self.cols)
            .into_par_iter()
            .map(|n| {
                let (i, j) = (n / self.cols, n % self.cols);
                let reach_r = fc + mh - 1;
                let reach_c = fd + nh - 1;
                let region = Region {
                    r0: i.saturating_sub(reach_r),
                    r1: (i + reach_r).min(last_r),
                    c0: j.saturating_sub(reach_c),
                    c1: (j + reach_c).min(last_c),
                };
                let post = self.run_region(r, sigma, priors, region)?;
                Ok(post[(i - region.r0) * region.cols() + (j - region.c0)] - priors[n])
            })
            .collect()
    }

    fn bit_prior(&self, priors: &[f64], row: isize, col: usize) -> [f64; 2] {
        if row < 0 || row as usize >= self.rows || col >= self.cols {
            GUARD
        } else {
            bit_log_probs(priors[row as usize * self.cols + col])
        }
    }

    /// Posterior bit LLRs for every position of `region`, laid out
    /// `[row - r0][col - c0]`; guard positions hold 0.
    fn run_region(
        &self,
        r: &RealGrid,
        sigma: f64,
        priors: &[f64],
        region: Region,
    ) -> Result<Vec<f64>, DetectorError> {
        let a = self.down.alphabet().size();
        let mh = self.h.rows();
        let (nr, nc) = (region.rows(), region.cols());
        let last_r = self.received_rows() - 1;
        let last_c = self.received_cols() - 1;
        let row_start = boundary(region.c0 == 0);
        let row_end = boundary(region.c1 == last_c);
        let col_start = boundary(region.r0 == 0);
        let col_end = boundary(region.r1 == last_r);

        let mut lid = vec![0.0; nr * nc * a];
        for k in 0..nr {
            for l in 0..nc {
                let row = (region.r0 + k) as isize;
                let col = region.c0 + l;
                let bits: Vec<[f64; 2]> = (0..mh)
                    .map(|m| self.bit_prior(priors, row - m as isize, col))
                    .collect();
                lid[(k * nc + l) * a..(k * nc + l + 1) * a].copy_from_slice(&bit_to_symbol(&bits));
            }
        }

        // columns of bits that the cross-track pass visits
        let data_cols: Vec<usize> = (0..nc).filter(|&l| region.c0 + l < self.cols).collect();
        let column_bits: Vec<Vec<[f64; 2]>> = data_cols
            .iter()
            .map(|&l| {
                (0..nr)
                    .map(|k| self.bit_prior(priors, (region.r0 + k) as isize, region.c0 + l))
                    .collect()
            })
            .collect();

        let cross_pass = |lic: &[f64], lid: &mut [f64]| -> Result<Vec<f64>, DetectorError> {
            let outputs: Vec<CrossTrackOutput> = data_cols
                .par_iter()
                .zip(&column_bits)
                .map(|(&l, bits)| {
                    let column: Vec<f64> = (0..nr)
                        .flat_map(|k| lic[(k * nc + l) * a..(k * nc + l + 1) * a].iter().copied())
                        .collect();
                    cross_track_bcjr(&self.cross, &column, bits, col_start, col_end)
                })
                .collect::<Result<_, _>>()?;
            let mut llr = vec![0.0; nr * nc];
            for (&l, out) in data_cols.iter().zip(&outputs) {
                for k in 0..nr {
                    let at = k * nc + l;
                    lid[at * a..(at + 1) * a].copy_from_slice(&out.symbol[k * a..(k + 1) * a]);
                    llr[at] = out.bit_llr[k];
                }
            }
            Ok(llr)
        };

        if self.config.start == Direction::CrossTrack {
            let uniform = vec![-(a as f64).ln(); nr * nc * a];
            cross_pass(&uniform, &mut lid)?;
        }

        let mut llr = Vec::new();
        for _ in 0..self.config.iterations {
            let rows: Vec<DownTrackOutput> = (0..nr)
                .into_par_iter()
                .map(|k| {
                    let received = &r.row(region.r0 + k)[region.c0..=region.c1];
                    down_track_bcjr(
                        &self.down,
                        received,
                        sigma,
                        &lid[k * nc * a..(k + 1) * nc * a],
                        row_start,
                        row_end,
                    )
                })
                .collect::<Result<_, _>>()?;
            let lic: Vec<f64> = rows.into_iter().flat_map(|o| o.extrinsic).collect();
            llr = cross_pass(&lic, &mut lid)?;
        }
        Ok(llr)
    }
}

fn boundary(at_guard: bool) -> Boundary {
    if at_guard {
        Boundary::Known
    } else {
        Boundary::Unknown
    }
}
