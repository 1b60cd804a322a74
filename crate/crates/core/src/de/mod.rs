//! Density evolution for the joint detector/decoder loop and noise-threshold
//! search.
//!
//! Densities are of the "correct" LLR `tau = L * c`, so the error probability
//! of a density is its mass below zero. The channel detector stage is sampled
//! by Monte Carlo; the decoder stages are exact on the quantized grid.

mod channel_stage;
pub mod histogram;
pub mod nodes;

pub use channel_stage::ChannelStage;
pub use histogram::{Grid, LlrHistogram};
pub use nodes::{check_node_density, ext2_density, variable_node_density, CheckTable, Ext2Rule};

use thiserror::Error;

use crate::channel::ChannelMatrix;
use crate::code::DegreeDistribution;
use crate::detector::DetectorError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeError {
    #[error("histograms live on different grids")]
    GridMismatch,
    #[error("invalid density-evolution configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    InvalidBracket { lo: f64, hi: f64, reason: String },
}

/// With or without outer iterations between detector and decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    TurboEqualized,
    NonTurbo,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::TurboEqualized => "te",
            Mode::NonTurbo => "non-te",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeConfig {
    pub delta: f64,
    pub llr_max: f64,
    /// Channel-stage samples per outer round.
    pub samples: usize,
    /// Side of the square Monte-Carlo page.
    pub page: usize,
    /// Border rows/columns excluded from harvesting.
    pub margin: usize,
    pub detector_iterations: usize,
    /// Inner decoder iterations stop when one more improves `p` by less.
    pub p_ers: f64,
    /// `p` below this counts as converged to zero.
    pub p_zero: f64,
    pub max_inner: usize,
    pub max_rounds: usize,
    /// An outer round is stalled when it improves `p` by less than
    /// `max(stall_abs, stall_rel * p)`.
    pub stall_abs: f64,
    pub stall_rel: f64,
    /// Consecutive stalled rounds before declaring the run stuck.
    pub stall_rounds: usize,
    pub ext2: Ext2Rule,
    pub seed: u64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            delta: 0.05,
            llr_max: 50.0,
            samples: 100_000,
            page: 64,
            margin: 6,
            detector_iterations: 3,
            p_ers: 1e-6,
            p_zero: 1e-8,
            max_inner: 2000,
            max_rounds: 40,
            stall_abs: 1e-4,
            stall_rel: 0.01,
            stall_rounds: 2,
            ext2: Ext2Rule::DecoderOnly,
            seed: 1,
        }
    }
}

impl DeConfig {
    pub fn grid(&self) -> Result<Grid, DeError> {
        Grid::new(self.delta, self.llr_max)
    }

    fn validate(&self) -> Result<(), DeError> {
        let ok = self.p_ers > 0.0
            && self.p_zero > 0.0
            && self.max_inner > 0
            && self.max_rounds > 0
            && self.stall_rounds > 0
            && self.detector_iterations > 0;
        if !ok {
            return Err(DeError::Config(
                "tolerances and iteration limits must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeStatus {
    Converged,
    Stuck,
}

impl DeStatus {
    pub fn name(&self) -> &'static str {
        match self {
            DeStatus::Converged => "converged",
            DeStatus::Stuck => "stuck",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundTrace {
    /// Outer round, from 1.
    pub t: usize,
    /// Error probability of the channel density alone.
    pub p_channel: f64,
    /// `p` after each inner decoder iteration.
    pub inner: Vec<f64>,
}

impl RoundTrace {
    /// `p^t`: the value when the inner loop stopped.
    pub fn p(&self) -> f64 {
        *self.inner.last().expect("at least one inner iteration")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeTrace {
    pub sigma: f64,
    pub mode: Mode,
    pub rounds: Vec<RoundTrace>,
    pub status: DeStatus,
}

impl DeTrace {
    pub fn p_values(&self) -> Vec<f64> {
        self.rounds.iter().map(RoundTrace::p).collect()
    }

    pub fn final_p(&self) -> f64 {
        self.rounds.last().map(RoundTrace::p).unwrap_or(1.0)
    }
}

/// Reusable pieces for density evolution at many noise levels.
#[derive(Clone, Debug)]
pub struct DensityEvolution {
    degrees: DegreeDistribution,
    config: DeConfig,
    grid: Grid,
    table: CheckTable,
    stage: ChannelStage,
}

impl DensityEvolution {
    pub fn new(
        degrees: &DegreeDistribution,
        h: &ChannelMatrix,
        config: DeConfig,
    ) -> Result<Self, DeError> {
        config.validate()?;
        let grid = config.grid()?;
        let stage = ChannelStage::new(
            h,
            config.detector_iterations,
            config.page,
            config.margin,
            config.samples,
            config.seed,
        )?;
        Ok(Self {
            degrees: degrees.clone(),
            config,
            grid,
            table: CheckTable::new(grid),
            stage,
        })
    }

    pub fn config(&self) -> &DeConfig {
        &self.config
    }

    pub fn channel_stage(&self) -> &ChannelStage {
        &self.stage
    }

    /// Decoder iterations on a fixed channel density, starting from erased
    /// check messages. `p` after each iteration is the error probability of
    /// the a-posteriori bit density. Returns the `p` history and the last
    /// check density.
    pub fn decoder_stage(&self, ftau: &LlrHistogram) -> Result<(Vec<f64>, LlrHistogram), DeError> {
        let mut fq = LlrHistogram::zero(self.grid);
        let mut history: Vec<f64> = Vec::new();
        for _ in 0..self.config.max_inner {
            let fz = variable_node_density(ftau, &fq, &self.degrees)?;
            fq = check_node_density(&self.table, &fz, &self.degrees)?;
            let p =
                ext2_density(ftau, &fq, &self.degrees, Ext2Rule::WithChannel)?.error_probability();
            let stalled = history
                .last()
                .is_some_and(|&prev| prev - p < self.config.p_ers);
            history.push(p);
            if p < self.config.p_zero || stalled {
                break;
            }
        }
        Ok((history, fq))
    }

    /// The `p^t` trajectory at noise level `sigma`.
    pub fn run(&self, sigma: f64, mode: Mode) -> Result<DeTrace, DeError> {
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(DeError::Config(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        let mut fext2 = LlrHistogram::zero(self.grid);
        let mut rounds: Vec<RoundTrace> = Vec::new();
        let mut stalled = 0;
        // a memoryless detector ignores its priors, so extra rounds repeat
        let rounds_allowed = match mode {
            Mode::TurboEqualized if !self.stage.is_memoryless() => self.config.max_rounds,
            _ => 1,
        };
        let mut status = DeStatus::Stuck;
        for t in 1..=rounds_allowed {
            let ftau = self.stage.evolve(&fext2, sigma, t as u64)?;
            let (inner, fq) = self.decoder_stage(&ftau)?;
            let trace = RoundTrace {
                t,
                p_channel: ftau.error_probability(),
                inner,
            };
            let p = trace.p();
            let prev = rounds.last().map(RoundTrace::p);
            rounds.push(trace);
            if p < self.config.p_zero {
                status = DeStatus::Converged;
                break;
            }
            if let Some(prev) = prev {
                let need = self.config.stall_abs.max(self.config.stall_rel * prev);
                if prev - p < need {
                    stalled += 1;
                    if stalled >= self.config.stall_rounds {
                        break;
                    }
                } else {
                    stalled = 0;
                }
            }
            fext2 = ext2_density(&ftau, &fq, &self.degrees, self.config.ext2)?;
        }
        Ok(DeTrace {
            sigma,
            mode,
            rounds,
            status,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BracketStep {
    pub sigma: f64,
    pub status: DeStatus,
    pub final_p: f64,
    pub rounds: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdReport {
    pub sigma: f64,
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
    pub mode: Mode,
    pub norm: f64,
    pub history: Vec<BracketStep>,
}

impl ThresholdReport {
    /// `sigma / |H|`.
    pub fn normalized(&self) -> f64 {
        self.sigma / self.norm
    }
}

/// Bisection on `sigma` between a converging `lo` and a stuck `hi` until
/// the bracket is at most `tol` wide; reports the bracket midpoint.
pub fn threshold_search(
    de: &DensityEvolution,
    h: &ChannelMatrix,
    mode: Mode,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<ThresholdReport, DeError> {
    if !(lo > 0.0 && hi > lo && tol > 0.0) {
        return Err(DeError::InvalidBracket {
            lo,
            hi,
            reason: "need 0 < lo < hi and tol > 0".into(),
        });
    }
    let mut history = Vec::new();
    let mut eval = |sigma: f64| -> Result<DeStatus, DeError> {
        let trace = de.run(sigma, mode)?;
        history.push(BracketStep {
            sigma,
            status: trace.status,
            final_p: trace.final_p(),
            rounds: trace.rounds.len(),
        });
        Ok(trace.status)
    };
    if eval(lo)? != DeStatus::Converged {
        return Err(DeError::InvalidBracket {
            lo,
            hi,
            reason: format!("density evolution does not converge at sigma = {lo}"),
        });
    }
    if eval(hi)? != DeStatus::Stuck {
        return Err(DeError::InvalidBracket {
            lo,
            hi,
            reason: format!("density evolution converges at sigma = {hi}"),
        });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        match eval(mid)? {
            DeStatus::Converged => a = mid,
            DeStatus::Stuck => b = mid,
        }
    }
    Ok(ThresholdReport {
        sigma: 0.5 * (a + b),
        lo: a,
        hi: b,
        tol,
        mode,
        norm: h.norm(),
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn awgn_de() -> DensityEvolution {
        DensityEvolution::new(
            &DegreeDistribution::regular(3, 6).unwrap(),
            &ChannelMatrix::awgn(),
            DeConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn awgn_low_noise_converges_high_noise_sticks() {
        let de = awgn_de();
        assert_eq!(
            de.run(0.7, Mode::TurboEqualized).unwrap().status,
            DeStatus::Converged
        );
        let stuck = de.run(1.2, Mode::TurboEqualized).unwrap();
        assert_eq!(stuck.status, DeStatus::Stuck);
        assert!(stuck.final_p() > 0.05);
    }

    #[test]
    fn rejects_bad_brackets() {
        let de = awgn_de();
        let h = ChannelMatrix::awgn();
        assert!(matches!(
            threshold_search(&de, &h, Mode::TurboEqualized, 0.9, 0.8, 0.01),
            Err(DeError::InvalidBracket { .. })
        ));
        assert!(matches!(
            threshold_search(&de, &h, Mode::TurboEqualized, 0.5, 0.6, 0.01),
            Err(DeError::InvalidBracket { .. })
        ));
    }
}
