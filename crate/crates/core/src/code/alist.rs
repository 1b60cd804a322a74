//! MacKay alist text format.
//!
//! ```text
//! N M
//! max_col_weight max_row_weight
//! col weights (N numbers)
//! row weights (M numbers)
//! N lines of 1-based check indices per column
//! M lines of 1-based variable indices per row
//! ```
//!
//! Adjacency lines may be padded with zeros up to the maximum weight.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::ParityCheckMatrix;

#[derive(Debug, Error)]
pub enum AlistError {
    #[error("unexpected end of input while reading {0}")]
    Truncated(&'static str),
    #[error("invalid integer {token:?} while reading {what}")]
    BadInteger { token: String, what: &'static str },
    #[error("malformed header: {0}")]
    Header(String),
    #[error("inconsistent weights: {0}")]
    Inconsistent(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

// Headers above this are rejected before allocating.
const MAX_DIM: usize = 1 << 24;

struct Tokens<'a> {
    inner: std::str::SplitAsciiWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &'static str) -> Result<usize, AlistError> {
        let tok = self.inner.next().ok_or(AlistError::Truncated(what))?;
        tok.parse().map_err(|_| AlistError::BadInteger {
            token: tok.chars().take(32).collect(),
            what,
        })
    }

    /// Next non-zero entry; zeros are padding.
    fn next_index(&mut self, what: &'static str) -> Result<usize, AlistError> {
        loop {
            let v = self.next(what)?;
            if v != 0 {
                return Ok(v);
            }
        }
    }
}

impl ParityCheckMatrix {
    pub fn from_alist_str(text: &str) -> Result<Self, AlistError> {
        let mut t = Tokens {
            inner: text.split_ascii_whitespace(),
        };
        let n = t.next("N")?;
        let m = t.next("M")?;
        if n == 0 || n > MAX_DIM || m > MAX_DIM {
            return Err(AlistError::Header(format!("dimensions {n} x {m}")));
        }
        let max_col = t.next("max column weight")?;
        let max_row = t.next("max row weight")?;
        let mut col_w = Vec::with_capacity(n);
        for _ in 0..n {
            col_w.push(t.next("column weights")?);
        }
        let mut row_w = Vec::with_capacity(m);
        for _ in 0..m {
            row_w.push(t.next("row weights")?);
        }
        if col_w.iter().copied().max().unwrap_or(0) != max_col {
            return Err(AlistError::Header(format!(
                "max column weight {max_col} does not match column weights"
            )));
        }
        if row_w.iter().copied().max().unwrap_or(0) != max_row {
            return Err(AlistError::Header(format!(
                "max row weight {max_row} does not match row weights"
            )));
        }
        if col_w.iter().any(|&w| w > m) || row_w.iter().any(|&w| w > n) {
            return Err(AlistError::Inconsistent("weight exceeds dimension".into()));
        }
        let edges: usize = col_w.iter().sum();
        if edges != row_w.iter().sum::<usize>() {
            return Err(AlistError::Inconsistent(
                "column and row weights have different totals".into(),
            ));
        }
        let mut cols: Vec<Vec<usize>> = Vec::with_capacity(n);
        for &w in &col_w {
            let mut c = Vec::with_capacity(w);
            for _ in 0..w {
                let idx = t.next_index("column adjacency")?;
                if idx > m {
                    return Err(AlistError::Inconsistent(format!(
                        "check index {idx} exceeds M = {m}"
                    )));
                }
                c.push(idx - 1);
            }
            cols.push(c);
        }
        let mut rows: Vec<Vec<usize>> = Vec::with_capacity(m);
        for &w in &row_w {
            let mut r = Vec::with_capacity(w);
            for _ in 0..w {
                let idx = t.next_index("row adjacency")?;
                if idx > n {
                    return Err(AlistError::Inconsistent(format!(
                        "variable index {idx} exceeds N = {n}"
                    )));
                }
                r.push(idx - 1);
            }
            rows.push(r);
        }
        let pcm = ParityCheckMatrix::from_rows(n, rows)
            .map_err(|e| AlistError::Inconsistent(e.to_string()))?;
        for (v, c) in cols.iter_mut().enumerate() {
            c.sort_unstable();
            if c.as_slice() != pcm.col(v) {
                return Err(AlistError::Inconsistent(format!(
                    "column {} adjacency disagrees with row lists",
                    v + 1
                )));
            }
        }
        Ok(pcm)
    }

    pub fn to_alist_string(&self) -> String {
        let cw = self.col_weights();
        let rw = self.row_weights();
        let mut s = String::new();
        let join = |v: &mut dyn Iterator<Item = usize>| {
            v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
        };
        let _ = writeln!(s, "{} {}", self.n(), self.m());
        let _ = writeln!(
            s,
            "{} {}",
            cw.iter().max().unwrap_or(&0),
            rw.iter().max().unwrap_or(&0)
        );
        let _ = writeln!(s, "{}", join(&mut cw.iter().copied()));
        let _ = writeln!(s, "{}", join(&mut rw.iter().copied()));
        for c in self.cols() {
            let _ = writeln!(s, "{}", join(&mut c.iter().map(|x| x + 1)));
        }
        for r in self.rows() {
            let _ = writeln!(s, "{}", join(&mut r.iter().map(|x| x + 1)));
        }
        s
    }

    pub fn load_alist(path: impl AsRef<Path>) -> Result<Self, AlistError> {
        Self::from_alist_str(&std::fs::read_to_string(path)?)
    }

    pub fn save_alist(&self, path: impl AsRef<Path>) -> Result<(), AlistError> {
        std::fs::write(path, self.to_alist_string())?;
        Ok(())
    }
}
