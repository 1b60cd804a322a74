//! Down-track symbol BCJR and cross-track bit BCJR.

use super::maxstar::{max_star_all, normalize_log};
use super::trellis::{Boundary, CrossTrackTrellis, DownTrackTrellis};
use super::DetectorError;

const NOISELESS_TOL: f64 = 1e-9;

/// Per-position symbol log-probabilities from one down-track row.
#[derive(Clone, Debug)]
pub struct DownTrackOutput {
    /// `L_od`, normalized per position.
    pub posterior: Vec<f64>,
    /// `L_ic = L_od - L_id`, normalized per position.
    pub extrinsic: Vec<f64>,
}

#[inline]
fn log_likelihood(r: f64, y: f64, inv_two_var: f64) -> f64 {
    if inv_two_var.is_infinite() {
        if (r - y).abs() <= NOISELESS_TOL {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        let d = r - y;
        -d * d * inv_two_var
    }
}

/// Symbol-based log-MAP detection along one row of received samples.
///
/// `prior` holds `L_id` for every position (`received.len() * 2^M_h`).
pub fn down_track_bcjr(
    trellis: &DownTrackTrellis,
    received: &[f64],
    sigma: f64,
    prior: &[f64],
    start: Boundary,
    end: Boundary,
) -> Result<DownTrackOutput, DetectorError> {
    let a = trellis.alphabet().size();
    let ns = trellis.states();
    let steps = received.len();
    if prior.len() != steps * a {
        return Err(DetectorError::SizeMismatch {
            expected: steps * a,
            got: prior.len(),
        });
    }
    if received.iter().any(|r| !r.is_finite()) {
        return Err(DetectorError::NonFinite { step: 0 });
    }
    let inv_two_var = 1.0 / (2.0 * sigma * sigma);
    let table = trellis.expected_table();
    let stride = ns * a;
    let mut gamma = vec![0.0; steps * stride];
    for (k, &r) in received.iter().enumerate() {
        let pk = &prior[k * a..(k + 1) * a];
        let g = &mut gamma[k * stride..(k + 1) * stride];
        for (p, row) in g.chunks_exact_mut(a).enumerate() {
            let ys = &table[p * a..(p + 1) * a];
            for ((slot, &y), &l) in row.iter_mut().zip(ys).zip(pk) {
                *slot = if l == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    l + log_likelihood(r, y, inv_two_var)
                };
            }
        }
    }
    let metrics = trellis.trellis().forward_backward(&gamma, start, end)?;
    let t = trellis.trellis();
    let mut posterior = vec![0.0; steps * a];
    let mut scratch = vec![0.0; ns];
    for k in 0..steps {
        let g = &gamma[k * stride..(k + 1) * stride];
        let alpha = metrics.alpha(k);
        let beta = metrics.beta(k + 1);
        for sym in 0..a {
            for (p, v) in scratch.iter_mut().enumerate() {
                *v = alpha[p] + g[p * a + sym] + beta[t.next(p, sym)];
            }
            posterior[k * a + sym] = max_star_all(&scratch);
        }
        if !normalize_log(&mut posterior[k * a..(k + 1) * a]) {
            return Err(DetectorError::NonFinite { step: k });
        }
    }
    let mut extrinsic: Vec<f64> = posterior
        .iter()
        .zip(prior)
        .map(|(&post, &pri)| {
            if pri == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                post - pri
            }
        })
        .collect();
    for chunk in extrinsic.chunks_exact_mut(a) {
        normalize_log(chunk);
    }
    Ok(DownTrackOutput {
        posterior,
        extrinsic,
    })
}

/// Outputs of one cross-track column pass.
#[derive(Clone, Debug)]
pub struct CrossTrackOutput {
    /// Symbol information excluding the row's own `L_ic` (forward metric +
    /// bit prior + backward metric), normalized per position.
    pub symbol: Vec<f64>,
    /// Full posterior symbol log-probabilities `L_oc`, normalized.
    pub symbol_posterior: Vec<f64>,
    /// Posterior bit LLR `log P(x=+1)/P(x=-1)` of each row's newest bit.
    pub bit_llr: Vec<f64>,
}

/// Bit-based log-MAP detection down one column.
///
/// `symbol_in` holds `L_ic` per row (`rows * 2^M_h`); `bit_logp[k]` is
/// `[log P(x=-1), log P(x=+1)]` for the bit at row `k`.
pub fn cross_track_bcjr(
    trellis: &CrossTrackTrellis,
    symbol_in: &[f64],
    bit_logp: &[[f64; 2]],
    start: Boundary,
    end: Boundary,
) -> Result<CrossTrackOutput, DetectorError> {
    let a = trellis.alphabet().size();
    let t = trellis.trellis();
    let ns = t.states();
    let steps = bit_logp.len();
    if symbol_in.len() != steps * a {
        return Err(DetectorError::SizeMismatch {
            expected: steps * a,
            got: symbol_in.len(),
        });
    }
    let stride = ns * 2;
    let mut gamma = vec![0.0; steps * stride];
    for k in 0..steps {
        for p in 0..ns {
            for b in 0..2 {
                let lic = symbol_in[k * a + trellis.symbol(p, b)];
                let lp = bit_logp[k][b];
                gamma[k * stride + p * 2 + b] =
                    if lic == f64::NEG_INFINITY || lp == f64::NEG_INFINITY {
                        f64::NEG_INFINITY
                    } else {
                        lic + lp
                    };
            }
        }
    }
    let metrics = t.forward_backward(&gamma, start, end)?;
    let mut symbol = vec![f64::NEG_INFINITY; steps * a];
    let mut symbol_posterior = vec![f64::NEG_INFINITY; steps * a];
    let mut bit_llr = vec![0.0; steps];
    let mut ones = Vec::with_capacity(ns);
    let mut zeros = Vec::with_capacity(ns);
    for k in 0..steps {
        let alpha = metrics.alpha(k);
        let beta = metrics.beta(k + 1);
        ones.clear();
        zeros.clear();
        for p in 0..ns {
            for b in 0..2 {
                let sym = trellis.symbol(p, b);
                let around = alpha[p] + beta[t.next(p, b)];
                symbol[k * a + sym] = around + bit_logp[k][b];
                let full = around + gamma[k * stride + p * 2 + b];
                symbol_posterior[k * a + sym] = full;
                if b == 1 {
                    ones.push(full);
                } else {
                    zeros.push(full);
                }
            }
        }
        bit_llr[k] = llr_difference(max_star_all(&ones), max_star_all(&zeros));
        normalize_log(&mut symbol[k * a..(k + 1) * a]);
        normalize_log(&mut symbol_posterior[k * a..(k + 1) * a]);
    }
    Ok(CrossTrackOutput {
        symbol,
        symbol_posterior,
        bit_llr,
    })
}

#[inline]
fn llr_difference(one: f64, zero: f64) -> f64 {
    match (one == f64::NEG_INFINITY, zero == f64::NEG_INFINITY) {
        (true, true) => 0.0,
        _ => one - zero,
    }
}

/// `log P(symbol) = sum_k log P(bit k)`, with `bit_logp[k]` for the bit `k`
/// rows above the anchor.
pub fn bit_to_symbol(bit_logp: &[[f64; 2]]) -> Vec<f64> {
    let a = 1usize << bit_logp.len();
    (0..a)
        .map(|sym| {
            bit_logp
                .iter()
                .enumerate()
                .map(|(k, lp)| lp[(sym >> k) & 1])
                .sum()
        })
        .collect()
}

/// `[log P(x=-1), log P(x=+1)]` of a bit with LLR `llr`.
#[inline]
pub fn bit_log_probs(llr: f64) -> [f64; 2] {
    [-softplus(llr), -softplus(-llr)]
}

#[inline]
fn softplus(x: f64) -> f64 {
    if x == f64::INFINITY {
        return f64::INFINITY;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}
