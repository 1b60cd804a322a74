//! Two-dimensional interference channel: bipolar modulation, 1D/2D mapping,
//! 2D convolution, AWGN and SNR bookkeeping.
//!
//! Grid coordinates are 0-based. Row index runs cross-track, column index
//! down-track. Reads outside the grid return -1. The channel output covers the
//! full linear convolution, `(N_r + M_h - 1) x (N_c + N_h - 1)` samples, so the
//! last rows and columns of bits are observed through every tap.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::seed;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("channel matrix must be at least 1x1 with finite taps and positive energy")]
    InvalidMatrix,
    #[error("malformed channel matrix file: {0}")]
    Parse(String),
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Channel response matrix `h(m, n)`, `m` cross-track, `n` down-track.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelMatrix {
    rows: usize,
    cols: usize,
    taps: Vec<f64>,
}

const HA: [f64; 9] = [
    0.050684, 0.21273, 0.050684, //
    0.23825, 1.0, 0.23825, //
    0.050684, 0.21273, 0.050684,
];

const HB: [f64; 9] = [
    0.0035638, 0.14843, 0.0035638, //
    0.013382, 0.55733, 0.013382, //
    0.0035638, 0.14843, 0.0035638,
];

impl ChannelMatrix {
    pub fn new(rows: usize, cols: usize, taps: Vec<f64>) -> Result<Self, ChannelError> {
        if rows == 0 || cols == 0 || taps.len() != rows * cols {
            return Err(ChannelError::InvalidMatrix);
        }
        if taps.iter().any(|t| !t.is_finite()) || taps.iter().all(|&t| t == 0.0) {
            return Err(ChannelError::InvalidMatrix);
        }
        Ok(Self { rows, cols, taps })
    }

    /// 3x3 preset `H_A`.
    pub fn preset_a() -> Self {
        Self::new(3, 3, HA.to_vec()).unwrap()
    }

    /// 3x3 preset `H_B`.
    pub fn preset_b() -> Self {
        Self::new(3, 3, HB.to_vec()).unwrap()
    }

    /// Memoryless `h = [1]`.
    pub fn awgn() -> Self {
        Self::new(1, 1, vec![1.0]).unwrap()
    }

    /// `M_h`
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// `N_h`
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn tap(&self, m: usize, n: usize) -> f64 {
        self.taps[m * self.cols + n]
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// `sum h(m,n)^2`
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t * t).sum()
    }

    /// `|H| = energy^(1/2)`, the threshold normalization factor.
    pub fn norm(&self) -> f64 {
        self.energy().sqrt()
    }

    /// Plain text: first line `M_h N_h`, then `M_h` rows of `N_h` floats.
    pub fn parse(text: &str) -> Result<Self, ChannelError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| ChannelError::Parse("empty input".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| ChannelError::Parse(format!("header: {e}")))?;
        let [rows, cols] = dims[..] else {
            return Err(ChannelError::Parse("header must be `M_h N_h`".into()));
        };
        if rows == 0 || cols == 0 || rows > 16 || cols > 16 {
            return Err(ChannelError::Parse(format!(
                "unsupported size {rows}x{cols}"
            )));
        }
        let mut taps = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| ChannelError::Parse(format!("missing row {}", r + 1)))?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(str::parse::<f64>)
                .collect::<Result<_, _>>()
                .map_err(|e| ChannelError::Parse(format!("row {}: {e}", r + 1)))?;
            if vals.len() != cols {
                return Err(ChannelError::Parse(format!(
                    "row {} has {} entries, expected {cols}",
                    r + 1,
                    vals.len()
                )));
            }
            taps.extend(vals);
        }
        if lines.next().is_some() {
            return Err(ChannelError::Parse("trailing data".into()));
        }
        Self::new(rows, cols, taps)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| format!("{}", self.tap(r, c)))
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ChannelError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// `N_r x N_c` array of bipolar bits with an implicit -1 border.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipolarGrid {
    rows: usize,
    cols: usize,
    data: Vec<i8>,
}

impl BipolarGrid {
    pub fn new(rows: usize, cols: usize, data: Vec<i8>) -> Result<Self, ChannelError> {
        if data.len() != rows * cols {
            return Err(ChannelError::SizeMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        debug_assert!(data.iter().all(|&x| x == 1 || x == -1));
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: i8) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn random(rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        let data = (0..rows * cols)
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Total read: -1 outside the grid.
    #[inline]
    pub fn get(&self, i: isize, j: isize) -> i8 {
        if i < 0 || j < 0 || i as usize >= self.rows || j as usize >= self.cols {
            -1
        } else {
            self.data[i as usize * self.cols + j as usize]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: i8) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.data
    }
}

/// Dense real-valued 2D array, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RealGrid {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealGrid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, ChannelError> {
        if data.len() != rows * cols {
            return Err(ChannelError::SizeMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

/// `c(i) = 2 s(i) - 1`
pub fn modulate(bits: &[u8]) -> Vec<i8> {
    bits.iter().map(|&b| 2 * (b & 1) as i8 - 1).collect()
}

/// `(c + 1) / 2`
pub fn demodulate(symbols: &[i8]) -> Vec<u8> {
    symbols.iter().map(|&c| u8::from(c > 0)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MappingKind {
    RowMajor,
    Random { seed: u64 },
}

/// Bijection between codeword positions and grid cells (the interleaver).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mapping {
    rows: usize,
    cols: usize,
    kind: MappingKind,
    // cell index (row-major) of codeword position p
    to_cell: Vec<usize>,
    // codeword position stored in cell c
    to_position: Vec<usize>,
}

impl Mapping {
    pub fn new(rows: usize, cols: usize, kind: MappingKind) -> Self {
        let n = rows * cols;
        let mut to_cell: Vec<usize> = (0..n).collect();
        if let MappingKind::Random { seed } = kind {
            to_cell.shuffle(&mut seed::stream(seed, &[0x6d61_7070]));
        }
        let mut to_position = vec![0; n];
        for (p, &c) in to_cell.iter().enumerate() {
            to_position[c] = p;
        }
        Self {
            rows,
            cols,
            kind,
            to_cell,
            to_position,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.to_cell.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_cell.is_empty()
    }

    pub fn kind(&self) -> MappingKind {
        self.kind
    }

    pub fn cell_of(&self, position: usize) -> (usize, usize) {
        let c = self.to_cell[position];
        (c / self.cols, c % self.cols)
    }

    /// Sequence order -> cell order.
    pub fn scatter<T: Copy>(&self, seq: &[T]) -> Result<Vec<T>, ChannelError> {
        self.check_len(seq.len())?;
        Ok(self.to_position.iter().map(|&p| seq[p]).collect())
    }

    /// Cell order -> sequence order.
    pub fn gather<T: Copy>(&self, cells: &[T]) -> Result<Vec<T>, ChannelError> {
        self.check_len(cells.len())?;
        Ok(self.to_cell.iter().map(|&c| cells[c]).collect())
    }

    pub fn interleave(&self, c: &[i8]) -> Result<BipolarGrid, ChannelError> {
        let data = self.scatter(c)?;
        BipolarGrid::new(self.rows, self.cols, data)
    }

    pub fn deinterleave(&self, grid: &BipolarGrid) -> Result<Vec<i8>, ChannelError> {
        self.gather(grid.as_slice())
    }

    fn check_len(&self, got: usize) -> Result<(), ChannelError> {
        if got != self.len() {
            return Err(ChannelError::SizeMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }
}

/// `y(i,j) = sum_m sum_n h(m,n) x(i-m, j-n)` over the full output support.
pub fn convolve2d(grid: &BipolarGrid, h: &ChannelMatrix) -> RealGrid {
    let out_rows = grid.rows() + h.rows() - 1;
    let out_cols = grid.cols() + h.cols() - 1;
    let mut y = RealGrid::zeros(out_rows, out_cols);
    for i in 0..out_rows {
        for j in 0..out_cols {
            let mut acc = 0.0;
            for m in 0..h.rows() {
                for n in 0..h.cols() {
                    let x = grid.get(i as isize - m as isize, j as isize - n as isize);
                    acc += h.tap(m, n) * f64::from(x);
                }
            }
            y.set(i, j, acc);
        }
    }
    y
}

/// `r = y + v`, `v ~ N(0, sigma^2)`.
pub fn transmit(y: &RealGrid, sigma: f64, rng: &mut impl Rng) -> RealGrid {
    let mut r = y.clone();
    if sigma > 0.0 {
        for v in r.data.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v += sigma * z;
        }
    }
    r
}

/// `10 log10(sum h^2 / (2 R sigma^2))`
pub fn snr_db(h: &ChannelMatrix, rate: f64, sigma: f64) -> f64 {
    10.0 * (h.energy() / (2.0 * rate * sigma * sigma)).log10()
}

pub fn sigma_from_snr(h: &ChannelMatrix, rate: f64, snr_db: f64) -> f64 {
    (h.energy() / (2.0 * rate * 10f64.powf(snr_db / 10.0))).sqrt()
}
