//! Node counts of the message-flow neighborhood of an edge after `t` outer
//! rounds, and the resulting bound on the probability that it is not a tree.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NeighborhoodError {
    #[error("invalid neighborhood parameter: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NeighborhoodParams {
    /// Outer detector/decoder rounds.
    pub t: u32,
    /// Decoder iterations per round.
    pub ic: u32,
    pub dv: u32,
    pub dc: u32,
    /// Detector window half-sizes.
    pub fc: u32,
    pub fd: u32,
    pub n: u64,
    pub k: u64,
}

impl NeighborhoodParams {
    pub fn validate(&self) -> Result<(), NeighborhoodError> {
        let bad = |m: &str| Err(NeighborhoodError::Invalid(m.into()));
        if self.ic == 0 || self.fc == 0 || self.fd == 0 {
            return bad("I_c, F_c and F_d must be positive");
        }
        if self.dv < 2 || self.dc < 2 {
            return bad("d_v and d_c must be at least 2");
        }
        if self.n == 0 || self.k >= self.n {
            return bad("need 0 <= K < N");
        }
        Ok(())
    }

    pub fn m(&self) -> u64 {
        self.n - self.k
    }
}

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

/// `sum_{j=1}^{t} x^j`.
fn geometric_tail(x: &BigUint, t: u32) -> BigUint {
    let mut acc = BigUint::zero();
    let mut term = BigUint::one();
    for _ in 0..t {
        term *= x;
        acc += &term;
    }
    acc
}

/// `sum_{i=lo}^{hi} f(i)`, zero when `hi < lo`.
fn sum_range(lo: i64, hi: i64, f: impl Fn(u32) -> BigUint) -> BigUint {
    (lo..=hi).fold(BigUint::zero(), |acc, i| acc + f(i as u32))
}

struct Parts {
    /// `(d_v - 1)(d_c - 1)`
    branch: BigUint,
    /// `4 F_c F_d - 1`
    window: BigUint,
    /// `[(d_v - 1)(d_c - 1)]^(I_c - 1)`
    leaves: BigUint,
}

fn parts(p: &NeighborhoodParams) -> Parts {
    let branch = big(u64::from(p.dv - 1) * u64::from(p.dc - 1));
    Parts {
        window: big(4 * u64::from(p.fc) * u64::from(p.fd) - 1),
        leaves: branch.pow(p.ic - 1),
        branch,
    }
}

/// Variable nodes in the depth-`t` neighborhood.
pub fn q_v(p: &NeighborhoodParams) -> Result<BigUint, NeighborhoodError> {
    p.validate()?;
    let Parts {
        branch,
        window,
        leaves,
    } = parts(p);
    let ic = i64::from(p.ic);
    let (dv1, dc1) = (u64::from(p.dv - 1), u64::from(p.dc - 1));
    let decoder = sum_range(0, ic - 1, |i| branch.pow(i));
    let tree = BigUint::one()
        + big(u64::from(p.dv)) * sum_range(1, ic - 1, |i| big(dv1).pow(i - 1) * big(dc1).pow(i));
    Ok(decoder + leaves * geometric_tail(&(window * tree), p.t))
}

/// Check nodes in the depth-`t` neighborhood.
pub fn q_c(p: &NeighborhoodParams) -> Result<BigUint, NeighborhoodError> {
    p.validate()?;
    let Parts {
        branch,
        window,
        leaves,
    } = parts(p);
    let ic = i64::from(p.ic);
    let decoder =
        BigUint::one() + big(u64::from(p.dv - 1)) * sum_range(0, ic - 2, |i| branch.pow(i));
    let tree = big(u64::from(p.dv)) * sum_range(1, ic - 1, |i| branch.pow(i - 1));
    Ok(decoder + leaves * geometric_tail(&(window * tree), p.t))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeBound {
    pub q_v: BigUint,
    pub q_c: BigUint,
    /// `Q_v^2 + (d_c / d_v) Q_c^2`, rounded down when not an integer.
    pub gamma: BigUint,
    /// `gamma / N`, capped at 1.
    pub gamma_over_n: f64,
    /// `(1 - Q_v/N)^Q_v (1 - Q_c/M)^Q_c`; `None` when the neighborhood has
    /// more nodes than the graph and the bound is vacuous.
    pub tree_lower_bound: Option<f64>,
}

fn ratio(num: &BigUint, den: u64) -> f64 {
    num.to_f64().unwrap_or(f64::INFINITY) / den as f64
}

pub fn gamma_bound(p: &NeighborhoodParams) -> Result<TreeBound, NeighborhoodError> {
    let qv = q_v(p)?;
    let qc = q_c(p)?;
    let gamma = &qv * &qv + big(u64::from(p.dc)) * &qc * &qc / big(u64::from(p.dv));
    let exact = qv.to_f64().unwrap_or(f64::INFINITY).powi(2)
        + f64::from(p.dc) / f64::from(p.dv) * qc.to_f64().unwrap_or(f64::INFINITY).powi(2);
    let gamma_over_n = (exact / p.n as f64).min(1.0);
    let (fv, fc) = (ratio(&qv, p.n), ratio(&qc, p.m()));
    let tree_lower_bound = (fv < 1.0 && fc < 1.0).then(|| {
        let log = qv.to_f64().unwrap() * (-fv).ln_1p() + qc.to_f64().unwrap() * (-fc).ln_1p();
        log.exp()
    });
    Ok(TreeBound {
        q_v: qv,
        q_c: qc,
        gamma,
        gamma_over_n,
        tree_lower_bound,
    })
}
