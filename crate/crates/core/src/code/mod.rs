//! LDPC and coset-LDPC codes: sparse parity-check matrices, degree
//! distributions, regular construction, systematic encoding and alist I/O.

mod alist;
mod construct;
mod generator;
pub mod gf2;

pub use alist::AlistError;
pub use construct::construct_regular_code;
pub use generator::{derive_generator, Generator};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CodeError {
    #[error("N*d_v = {nv} is not divisible by d_c = {dc}")]
    Divisibility { nv: usize, dc: usize },
    #[error("invalid code parameter: {0}")]
    InvalidParameter(String),
    #[error("regular construction failed after {attempts} attempts")]
    ConstructionFailed { attempts: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("entry {index} out of range for dimension {bound}")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("duplicate edge between check {check} and variable {var}")]
    DuplicateEdge { check: usize, var: usize },
    #[error("degree fractions must sum to 1 (got {0})")]
    BadDistribution(f64),
}

/// Edge-perspective degree distribution `lambda(x) = sum lambda_i x^(i-1)`,
/// `rho(x) = sum rho_i x^(i-1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeDistribution {
    lambda: Vec<(usize, f64)>,
    rho: Vec<(usize, f64)>,
}

impl DegreeDistribution {
    pub fn new(lambda: Vec<(usize, f64)>, rho: Vec<(usize, f64)>) -> Result<Self, CodeError> {
        for (side, list, min_deg) in [("lambda", &lambda, 1usize), ("rho", &rho, 2usize)] {
            let mut sum = 0.0;
            for &(deg, frac) in list.iter() {
                if deg < min_deg {
                    return Err(CodeError::InvalidParameter(format!(
                        "{side} degree {deg} below {min_deg}"
                    )));
                }
                if !(0.0..=1.0).contains(&frac) {
                    return Err(CodeError::InvalidParameter(format!(
                        "{side} fraction {frac} outside [0,1]"
                    )));
                }
                sum += frac;
            }
            if (sum - 1.0).abs() > 1e-12 {
                return Err(CodeError::BadDistribution(sum));
            }
        }
        let lambda = lambda.into_iter().filter(|&(_, f)| f > 0.0).collect();
        let rho = rho.into_iter().filter(|&(_, f)| f > 0.0).collect();
        Ok(Self { lambda, rho })
    }

    pub fn regular(dv: usize, dc: usize) -> Result<Self, CodeError> {
        Self::new(vec![(dv, 1.0)], vec![(dc, 1.0)])
    }

    pub fn lambda(&self) -> &[(usize, f64)] {
        &self.lambda
    }

    pub fn rho(&self) -> &[(usize, f64)] {
        &self.rho
    }

    pub fn dv_max(&self) -> usize {
        self.lambda.iter().map(|&(d, _)| d).max().unwrap_or(0)
    }

    pub fn dc_max(&self) -> usize {
        self.rho.iter().map(|&(d, _)| d).max().unwrap_or(0)
    }

    /// Node-perspective variable fractions `lambda_i / i / int_0^1 lambda`.
    pub fn lambda_bar(&self) -> Vec<(usize, f64)> {
        let integral: f64 = self.lambda.iter().map(|&(d, f)| f / d as f64).sum();
        self.lambda
            .iter()
            .map(|&(d, f)| (d, f / d as f64 / integral))
            .collect()
    }

    /// Design rate `1 - int rho / int lambda`.
    pub fn design_rate(&self) -> f64 {
        let il: f64 = self.lambda.iter().map(|&(d, f)| f / d as f64).sum();
        let ir: f64 = self.rho.iter().map(|&(d, f)| f / d as f64).sum();
        1.0 - ir / il
    }

    pub fn regular_degrees(&self) -> Option<(usize, usize)> {
        match (self.lambda.as_slice(), self.rho.as_slice()) {
            ([(dv, _)], [(dc, _)]) => Some((*dv, *dc)),
            _ => None,
        }
    }
}

/// Sparse binary parity-check matrix with row and column adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Build from per-row variable lists. Rows are sorted; duplicates rejected.
    pub fn from_rows(n: usize, mut rows: Vec<Vec<usize>>) -> Result<Self, CodeError> {
        let mut cols = vec![Vec::new(); n];
        for (m, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            for w in row.windows(2) {
                if w[0] == w[1] {
                    return Err(CodeError::DuplicateEdge {
                        check: m,
                        var: w[0],
                    });
                }
            }
            for &v in row.iter() {
                if v >= n {
                    return Err(CodeError::IndexOutOfRange { index: v, bound: n });
                }
                cols[v].push(m);
            }
        }
        Ok(Self { n, rows, cols })
    }

    /// Number of variable nodes (code length N).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of check nodes (M).
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, m: usize) -> &[usize] {
        &self.rows[m]
    }

    pub fn col(&self, n: usize) -> &[usize] {
        &self.cols[n]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        self.cols.iter().map(Vec::len).collect()
    }

    /// `(d_v, d_c)` if every column and every row has the same weight.
    pub fn regular_degrees(&self) -> Option<(usize, usize)> {
        let dv = self.cols.first()?.len();
        let dc = self.rows.first()?.len();
        (self.cols.iter().all(|c| c.len() == dv) && self.rows.iter().all(|r| r.len() == dc))
            .then_some((dv, dc))
    }

    /// Empirical edge-perspective degree distribution.
    pub fn degree_distribution(&self) -> Result<DegreeDistribution, CodeError> {
        let ne = self.edge_count() as f64;
        let tally = |weights: Vec<usize>| {
            let mut acc = std::collections::BTreeMap::new();
            for w in weights {
                *acc.entry(w).or_insert(0usize) += w;
            }
            acc.into_iter()
                .map(|(d, e)| (d, e as f64 / ne))
                .collect::<Vec<_>>()
        };
        let lambda = tally(self.col_weights());
        let rho = tally(self.row_weights());
        // renormalize so rounding never trips the 1e-12 check
        let fix = |v: Vec<(usize, f64)>| {
            let s: f64 = v.iter().map(|x| x.1).sum();
            v.into_iter().map(|(d, f)| (d, f / s)).collect()
        };
        DegreeDistribution::new(fix(lambda), fix(rho))
    }

    /// True if some pair of columns shares two or more rows.
    pub fn has_four_cycle(&self) -> bool {
        let mut seen = vec![usize::MAX; self.n];
        for (a, col) in self.cols.iter().enumerate() {
            // seen[b] == a marks that column b already shares one row with a
            for &m in col {
                for &b in &self.rows[m] {
                    if b == a {
                        continue;
                    }
                    if seen[b] == a {
                        return true;
                    }
                    seen[b] = a;
                }
            }
        }
        false
    }

    /// `H * s^T` over GF(2).
    pub fn syndrome(&self, s: &[u8]) -> Result<Vec<u8>, CodeError> {
        if s.len() != self.n {
            return Err(CodeError::LengthMismatch {
                expected: self.n,
                got: s.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &v| acc ^ (s[v] & 1)))
            .collect())
    }

    pub fn to_dense(&self) -> gf2::DenseBits {
        let mut d = gf2::DenseBits::zeros(self.m(), self.n);
        for (m, row) in self.rows.iter().enumerate() {
            for &v in row {
                d.set(m, v, true);
            }
        }
        d
    }
}

/// A coset of an LDPC code: codewords `s = u G xor b`, all satisfying
/// `H s^T = d = H b^T`.
#[derive(Clone, Debug)]
pub struct CosetLdpcCode {
    pcm: ParityCheckMatrix,
    generator: Generator,
    coset: Vec<u8>,
    syndrome: Vec<u8>,
}

impl CosetLdpcCode {
    /// Linear code (`b = 0`).
    pub fn linear(pcm: ParityCheckMatrix) -> Self {
        let n = pcm.n();
        Self::with_coset(pcm, vec![0; n]).expect("zero coset has the right length")
    }

    pub fn with_coset(pcm: ParityCheckMatrix, coset: Vec<u8>) -> Result<Self, CodeError> {
        let syndrome = pcm.syndrome(&coset)?;
        let generator = derive_generator(&pcm);
        Ok(Self {
            pcm,
            generator,
            coset,
            syndrome,
        })
    }

    pub fn pcm(&self) -> &ParityCheckMatrix {
        &self.pcm
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn coset(&self) -> &[u8] {
        &self.coset
    }

    pub fn syndrome(&self) -> &[u8] {
        &self.syndrome
    }

    pub fn n(&self) -> usize {
        self.pcm.n()
    }

    /// Number of information bits (N minus the GF(2) rank of H).
    pub fn k(&self) -> usize {
        self.generator.dimension()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    pub fn encode(&self, u: &[u8]) -> Result<Vec<u8>, CodeError> {
        let mut s = self.generator.encode(u)?;
        for (x, b) in s.iter_mut().zip(&self.coset) {
            *x ^= b & 1;
        }
        Ok(s)
    }

    /// Information bits carried by a word of this coset.
    pub fn extract_info(&self, s: &[u8]) -> Result<Vec<u8>, CodeError> {
        if s.len() != self.n() {
            return Err(CodeError::LengthMismatch {
                expected: self.n(),
                got: s.len(),
            });
        }
        Ok(self
            .generator
            .info_positions()
            .iter()
            .map(|&p| (s[p] ^ self.coset[p]) & 1)
            .collect())
    }
}
