//! Shift-register trellises and the generic log-domain forward/backward pass.

use super::maxstar::max_star_all;
use super::DetectorError;
use crate::channel::ChannelMatrix;

/// All `2^M_h` bipolar cross-track tuples. Bit `k` of a symbol index is the
/// bit `k` rows above the symbol's anchor row (`+1` when set), so index 0 is
/// the all-(-1) symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymbolAlphabet {
    mh: usize,
}

impl SymbolAlphabet {
    pub fn new(mh: usize) -> Self {
        assert!((1..=8).contains(&mh), "M_h out of supported range");
        Self { mh }
    }

    pub fn bits(&self) -> usize {
        self.mh
    }

    pub fn size(&self) -> usize {
        1 << self.mh
    }

    #[inline]
    pub fn bit(&self, symbol: usize, k: usize) -> i8 {
        if (symbol >> k) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn tuple(&self, symbol: usize) -> Vec<i8> {
        (0..self.mh).map(|k| self.bit(symbol, k)).collect()
    }

    pub fn index(&self, tuple: &[i8]) -> usize {
        tuple
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &b)| acc | (usize::from(b > 0) << k))
    }
}

/// How the state metric at a trellis end is initialized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// The guard border: all-(-1) state has metric 0, all others `-inf`.
    Known,
    /// Unknown neighbourhood: every state gets `-log(#states)`.
    Unknown,
}

/// A trellis whose state is the last `memory` inputs of a `radix`-ary
/// sequence. State digit 0 is the most recent input.
#[derive(Clone, Debug)]
pub struct ShiftTrellis {
    states: usize,
    inputs: usize,
    // predecessors[s * inputs + t] = (previous state, input)
    predecessors: Vec<(usize, usize)>,
}

impl ShiftTrellis {
    pub fn new(inputs: usize, memory: usize) -> Self {
        let states = inputs.pow(memory as u32);
        let mut predecessors = vec![(0, 0); states * inputs];
        let mut fill = vec![0usize; states];
        for prev in 0..states {
            for x in 0..inputs {
                let s = Self::step(states, inputs, prev, x);
                predecessors[s * inputs + fill[s]] = (prev, x);
                fill[s] += 1;
            }
        }
        debug_assert!(fill.iter().all(|&f| f == inputs));
        Self {
            states,
            inputs,
            predecessors,
        }
    }

    #[inline]
    fn step(states: usize, inputs: usize, prev: usize, x: usize) -> usize {
        (x + inputs * prev) % states
    }

    #[inline]
    pub fn next(&self, prev: usize, x: usize) -> usize {
        Self::step(self.states, self.inputs, prev, x)
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    fn init(&self, b: Boundary, out: &mut [f64]) {
        match b {
            Boundary::Known => {
                out.fill(f64::NEG_INFINITY);
                out[0] = 0.0;
            }
            Boundary::Unknown => out.fill(-(self.states as f64).ln()),
        }
    }

    /// Forward and backward metrics for branch metrics `gamma`, laid out as
    /// `[step][prev_state][input]`. Each metric vector is shifted so its
    /// maximum is 0.
    pub fn forward_backward(
        &self,
        gamma: &[f64],
        start: Boundary,
        end: Boundary,
    ) -> Result<Metrics, DetectorError> {
        let (ns, ni) = (self.states, self.inputs);
        let stride = ns * ni;
        debug_assert_eq!(gamma.len() % stride, 0);
        let steps = gamma.len() / stride;
        let mut alpha = vec![0.0; (steps + 1) * ns];
        let mut beta = vec![0.0; (steps + 1) * ns];
        self.init(start, &mut alpha[..ns]);
        self.init(end, &mut beta[steps * ns..]);
        let mut scratch = vec![0.0; ni];

        for k in 0..steps {
            let g = &gamma[k * stride..(k + 1) * stride];
            let (prev, next) = alpha.split_at_mut((k + 1) * ns);
            let prev = &prev[k * ns..];
            let next = &mut next[..ns];
            for (s, slot) in next.iter_mut().enumerate() {
                let preds = &self.predecessors[s * ni..(s + 1) * ni];
                for (v, &(p, x)) in scratch.iter_mut().zip(preds) {
                    *v = prev[p] + g[p * ni + x];
                }
                *slot = max_star_all(&scratch);
            }
            shift_max(next).ok_or(DetectorError::NonFinite { step: k })?;
        }

        for k in (0..steps).rev() {
            let g = &gamma[k * stride..(k + 1) * stride];
            let (cur, after) = beta.split_at_mut((k + 1) * ns);
            let cur = &mut cur[k * ns..];
            let after = &after[..ns];
            for (p, slot) in cur.iter_mut().enumerate() {
                for (x, v) in scratch.iter_mut().enumerate() {
                    *v = after[self.next(p, x)] + g[p * ni + x];
                }
                *slot = max_star_all(&scratch);
            }
            shift_max(cur).ok_or(DetectorError::NonFinite { step: k })?;
        }
        Ok(Metrics {
            states: ns,
            alpha,
            beta,
        })
    }
}

fn shift_max(v: &mut [f64]) -> Option<()> {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return None;
    }
    for x in v.iter_mut() {
        *x -= m;
    }
    Some(())
}

/// Forward (`alpha`) and backward (`beta`) state metrics, `steps + 1` vectors
/// each. `alpha(k)` is the metric before step `k`, `beta(k + 1)` after it.
pub struct Metrics {
    states: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl Metrics {
    #[inline]
    pub fn alpha(&self, k: usize) -> &[f64] {
        &self.alpha[k * self.states..(k + 1) * self.states]
    }

    #[inline]
    pub fn beta(&self, k: usize) -> &[f64] {
        &self.beta[k * self.states..(k + 1) * self.states]
    }
}

/// Down-track trellis for one row of received samples: the state is the
/// previous `N_h - 1` symbols, the input is the current symbol.
#[derive(Clone, Debug)]
pub struct DownTrackTrellis {
    alphabet: SymbolAlphabet,
    trellis: ShiftTrellis,
    // noiseless output for (prev_state, symbol)
    expected: Vec<f64>,
}

impl DownTrackTrellis {
    pub fn new(h: &ChannelMatrix) -> Self {
        let alphabet = SymbolAlphabet::new(h.rows());
        let a = alphabet.size();
        let trellis = ShiftTrellis::new(a, h.cols() - 1);
        let states = trellis.states();
        let mut expected = vec![0.0; states * a];
        for prev in 0..states {
            for sym in 0..a {
                let mut y = 0.0;
                for n in 0..h.cols() {
                    // symbol n columns back: n = 0 is the input, n >= 1 is state digit n - 1
                    let s = if n == 0 {
                        sym
                    } else {
                        (prev / a.pow(n as u32 - 1)) % a
                    };
                    for m in 0..h.rows() {
                        y += h.tap(m, n) * f64::from(alphabet.bit(s, m));
                    }
                }
                expected[prev * a + sym] = y;
            }
        }
        Self {
            alphabet,
            trellis,
            expected,
        }
    }

    pub fn alphabet(&self) -> SymbolAlphabet {
        self.alphabet
    }

    pub fn trellis(&self) -> &ShiftTrellis {
        &self.trellis
    }

    pub fn states(&self) -> usize {
        self.trellis.states()
    }

    #[inline]
    pub fn expected(&self, prev: usize, symbol: usize) -> f64 {
        self.expected[prev * self.alphabet.size() + symbol]
    }

    pub fn expected_table(&self) -> &[f64] {
        &self.expected
    }
}

/// Cross-track trellis for one column: the state is the `M_h - 1` bits above
/// the current row, the input is the current bit. The symbol of a branch is
/// `bit + 2 * prev_state`.
#[derive(Clone, Debug)]
pub struct CrossTrackTrellis {
    alphabet: SymbolAlphabet,
    trellis: ShiftTrellis,
}

impl CrossTrackTrellis {
    pub fn new(mh: usize) -> Self {
        Self {
            alphabet: SymbolAlphabet::new(mh),
            trellis: ShiftTrellis::new(2, mh - 1),
        }
    }

    pub fn alphabet(&self) -> SymbolAlphabet {
        self.alphabet
    }

    pub fn trellis(&self) -> &ShiftTrellis {
        &self.trellis
    }

    #[inline]
    pub fn symbol(&self, prev: usize, bit: usize) -> usize {
        bit + 2 * prev
    }
}
