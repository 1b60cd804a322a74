//! Log-domain sum-product decoding on the Tanner graph, flooding schedule.
//!
//! LLRs are `log P(s=1)/P(s=0)`. A check `m` with syndrome bit `d(m)` forces
//! the XOR of its bits to `d(m)`; in this sign convention the tanh-rule output
//! picks up a factor `(-1)^(d(m) + deg(m))`.

use crate::code::{CosetLdpcCode, ParityCheckMatrix};
use thiserror::Error;

/// Magnitude clamp applied to variable-to-check messages before the tanh rule.
pub const LLR_CLAMP: f64 = 38.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecoderError {
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("input LLR {index} is NaN")]
    NanInput { index: usize },
    #[error("iterations must be at least 1")]
    NoIterations,
}

/// `phi(x) = -log tanh(x/2)` for `x >= 0`; its own inverse.
#[inline]
pub fn phi(x: f64) -> f64 {
    (2.0 / x.exp_m1()).ln_1p()
}

/// Tanh rule with leave-one-out: `out[i]` combines every input except
/// `inputs[i]`; `flip` negates all outputs.
pub fn check_update(inputs: &[f64], flip: bool, out: &mut [f64]) {
    let d = inputs.len();
    debug_assert_eq!(out.len(), d);
    let mut negatives = usize::from(flip);
    let mags: Vec<f64> = inputs
        .iter()
        .map(|&z| {
            if z < 0.0 {
                negatives += 1;
            }
            phi(z.abs().min(LLR_CLAMP))
        })
        .collect();
    // prefix/suffix sums avoid inf - inf when an input is exactly 0
    let mut suffix = vec![0.0; d + 1];
    for i in (0..d).rev() {
        suffix[i] = suffix[i + 1] + mags[i];
    }
    let mut prefix = 0.0;
    for i in 0..d {
        let mag = phi(prefix + suffix[i + 1]);
        let neg = (negatives - usize::from(inputs[i] < 0.0)) % 2 == 1;
        out[i] = if neg { -mag } else { mag };
        prefix += mags[i];
    }
}

/// Leave-one-out sums `out[i] = l_ext1 + sum_{j != i} incoming[j]`.
pub fn variable_update(l_ext1: f64, incoming: &[f64], out: &mut [f64]) {
    let total: f64 = l_ext1 + incoming.iter().sum::<f64>();
    for (o, &q) in out.iter_mut().zip(incoming) {
        *o = total - q;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeOptions {
    /// SPA iterations `I_c`.
    pub iterations: usize,
    /// Stop once the hard decision satisfies every check.
    pub early_exit: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutput {
    /// `L_c = L_ext1 + sum of incoming check messages`.
    pub posterior: Vec<f64>,
    /// `L_ext2 = sum of incoming check messages`.
    pub extrinsic: Vec<f64>,
    pub hard: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

/// Compressed Tanner graph plus the per-check sign flips of a coset.
#[derive(Clone, Debug)]
pub struct SpaDecoder {
    n: usize,
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    var_ptr: Vec<usize>,
    // edges of each variable, as indices into the check-ordered edge list
    var_edge: Vec<usize>,
    syndrome: Vec<u8>,
    flips: Vec<bool>,
}

impl SpaDecoder {
    pub fn new(pcm: &ParityCheckMatrix, syndrome: &[u8]) -> Result<Self, DecoderError> {
        if syndrome.len() != pcm.m() {
            return Err(DecoderError::LengthMismatch {
                expected: pcm.m(),
                got: syndrome.len(),
            });
        }
        let mut check_ptr = Vec::with_capacity(pcm.m() + 1);
        let mut edge_var = Vec::with_capacity(pcm.edge_count());
        check_ptr.push(0);
        for row in pcm.rows() {
            edge_var.extend_from_slice(row);
            check_ptr.push(edge_var.len());
        }
        let mut var_ptr = vec![0; pcm.n() + 1];
        for &v in &edge_var {
            var_ptr[v + 1] += 1;
        }
        for i in 0..pcm.n() {
            var_ptr[i + 1] += var_ptr[i];
        }
        let mut fill = var_ptr.clone();
        let mut var_edge = vec![0; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edge[fill[v]] = e;
            fill[v] += 1;
        }
        let flips = syndrome
            .iter()
            .zip(pcm.rows())
            .map(|(&d, row)| (d & 1 == 1) ^ (row.len() % 2 == 1))
            .collect();
        Ok(Self {
            n: pcm.n(),
            check_ptr,
            edge_var,
            var_ptr,
            var_edge,
            syndrome: syndrome.iter().map(|d| d & 1).collect(),
            flips,
        })
    }

    pub fn for_code(code: &CosetLdpcCode) -> Self {
        Self::new(code.pcm(), code.syndrome()).expect("code syndrome has one bit per check")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn satisfied(&self, hard: &[u8]) -> bool {
        self.check_ptr
            .windows(2)
            .zip(&self.syndrome)
            .all(|(w, &d)| {
                self.edge_var[w[0]..w[1]]
                    .iter()
                    .fold(0u8, |acc, &v| acc ^ hard[v])
                    == d
            })
    }

    pub fn decode(
        &self,
        l_ext1: &[f64],
        opts: DecodeOptions,
    ) -> Result<DecodeOutput, DecoderError> {
        if l_ext1.len() != self.n {
            return Err(DecoderError::LengthMismatch {
                expected: self.n,
                got: l_ext1.len(),
            });
        }
        if let Some(index) = l_ext1.iter().position(|v| v.is_nan()) {
            return Err(DecoderError::NanInput { index });
        }
        if opts.iterations == 0 {
            return Err(DecoderError::NoIterations);
        }
        let edges = self.edge_var.len();
        let mut q = vec![0.0; edges];
        let mut z = vec![0.0; edges];
        let mut incoming = Vec::new();
        let mut outgoing = Vec::new();
        let mut sums = vec![0.0; self.n];
        let mut hard = vec![0u8; self.n];
        let mut done = 0;
        let mut converged = false;
        for _ in 0..opts.iterations {
            for (v, &prior) in l_ext1.iter().enumerate() {
                let es = &self.var_edge[self.var_ptr[v]..self.var_ptr[v + 1]];
                incoming.clear();
                incoming.extend(es.iter().map(|&e| q[e]));
                outgoing.resize(es.len(), 0.0);
                variable_update(prior, &incoming, &mut outgoing);
                for (&e, &msg) in es.iter().zip(&outgoing) {
                    z[e] = msg.clamp(-LLR_CLAMP, LLR_CLAMP);
                }
            }
            for (c, w) in self.check_ptr.windows(2).enumerate() {
                check_update(&z[w[0]..w[1]], self.flips[c], &mut q[w[0]..w[1]]);
            }
            done += 1;
            self.accumulate(&q, &mut sums);
            for ((h, &s), &l) in hard.iter_mut().zip(&sums).zip(l_ext1) {
                *h = u8::from(l + s > 0.0);
            }
            converged = self.satisfied(&hard);
            if opts.early_exit && converged {
                break;
            }
        }
        let posterior = l_ext1.iter().zip(&sums).map(|(l, s)| l + s).collect();
        Ok(DecodeOutput {
            posterior,
            extrinsic: sums,
            hard,
            converged,
            iterations: done,
        })
    }

    fn accumulate(&self, q: &[f64], sums: &mut [f64]) {
        for (v, s) in sums.iter_mut().enumerate() {
            *s = self.var_edge[self.var_ptr[v]..self.var_ptr[v + 1]]
                .iter()
                .map(|&e| q[e])
                .sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_is_an_involution() {
        for x in [1e-6, 0.01, 0.5, 2.0, 10.0, 30.0, 38.0] {
            assert!((phi(phi(x)) - x).abs() < 1e-9 * x.max(1.0), "{x}");
        }
        assert_eq!(phi(0.0), f64::INFINITY);
        assert_eq!(phi(f64::INFINITY), 0.0);
    }

    #[test]
    fn two_input_tanh_rule() {
        let exact = 2.0 * (1f64.tanh() * 1f64.tanh()).atanh();
        assert!((exact - 1.32501).abs() < 1e-5);
        let mut out = [0.0; 3];
        check_update(&[2.0, 2.0, 0.7], false, &mut out);
        assert!((out[2] - exact).abs() < 1e-12);
        check_update(&[2.0, 2.0, 0.7], true, &mut out);
        assert!((out[2] + exact).abs() < 1e-12);
    }

    #[test]
    fn certain_input_passes_through() {
        let mut out = [0.0; 3];
        check_update(&[f64::INFINITY, 1.7, 0.0], false, &mut out);
        assert!((out[2] - 1.7).abs() < 1e-12);
        assert_eq!(out[0], 0.0);
        assert_eq!(out[1], 0.0);
        check_update(&[f64::INFINITY, -1.7, 5.0], false, &mut out);
        assert!((out[2] + 1.7).abs() < 1e-12);
    }

    #[test]
    fn leave_one_out_variable_sums() {
        let mut out = [0.0; 2];
        variable_update(1.0, &[0.5, -0.2], &mut out);
        assert!((out[0] - 0.8).abs() < 1e-15);
        assert!((out[1] - 1.5).abs() < 1e-15);
        variable_update(-0.3, &[0.0, 0.0], &mut out);
        assert_eq!(out, [-0.3, -0.3]);
    }

    #[test]
    fn odd_degree_checks_use_the_parity_sign() {
        // single check s0 ^ s1 ^ s2 = 0, bits 0 and 1 strongly believed to be 1
        let pcm = ParityCheckMatrix::from_rows(3, vec![vec![0, 1, 2]]).unwrap();
        let dec = SpaDecoder::new(&pcm, &[0]).unwrap();
        let out = dec
            .decode(
                &[6.0, 6.0, 0.0],
                DecodeOptions {
                    iterations: 1,
                    early_exit: false,
                },
            )
            .unwrap();
        assert!(out.extrinsic[2] < -5.0);
        assert_eq!(out.hard, vec![1, 1, 0]);
        assert!(out.converged);
        let dec = SpaDecoder::new(&pcm, &[1]).unwrap();
        let out = dec
            .decode(
                &[6.0, 6.0, 0.0],
                DecodeOptions {
                    iterations: 1,
                    early_exit: false,
                },
            )
            .unwrap();
        assert!(out.extrinsic[2] > 5.0);
    }
}
