//! Joint iterative detection and decoding over one page per frame, and the
//! Monte-Carlo sweeps built on it.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{
    convolve2d, modulate, sigma_from_snr, transmit, BipolarGrid, ChannelError, ChannelMatrix,
    Mapping,
};
use crate::code::{CodeError, CosetLdpcCode};
use crate::decoder::{DecodeOptions, DecoderError, SpaDecoder};
use crate::detector::{Detector, DetectorConfig, DetectorError, Direction};
use crate::seed;

#[derive(Debug, Error)]
pub enum JiddsError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Decoder(#[from] DecoderError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// `I_det / I_c / I_out`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IterationSchedule {
    pub detector: usize,
    pub decoder: usize,
    pub outer: usize,
}

impl IterationSchedule {
    pub fn new(detector: usize, decoder: usize, outer: usize) -> Result<Self, JiddsError> {
        if detector == 0 || decoder == 0 || outer == 0 {
            return Err(JiddsError::Config(format!(
                "iteration counts must be positive, got {detector}/{decoder}/{outer}"
            )));
        }
        Ok(Self {
            detector,
            decoder,
            outer,
        })
    }
}

impl Default for IterationSchedule {
    fn default() -> Self {
        Self {
            detector: 3,
            decoder: 50,
            outer: 10,
        }
    }
}

/// Page shape `rows x cols = n` with `rows` the largest divisor not above
/// `sqrt(n)`.
pub fn default_page(n: usize) -> (usize, usize) {
    let mut rows = (n as f64).sqrt() as usize;
    while rows > 1 && !n.is_multiple_of(rows) {
        rows -= 1;
    }
    let rows = rows.max(1);
    (rows, n / rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundDiagnostics {
    /// Codeword bits whose hard decision is wrong after this round.
    pub codeword_errors: usize,
    /// Hard decision satisfies every check.
    pub converged: bool,
    pub decoder_iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameResult {
    pub hard: Vec<u8>,
    /// Errors among the information bits.
    pub bit_errors: usize,
    pub frame_error: bool,
    pub rounds: Vec<RoundDiagnostics>,
}

/// Everything fixed across frames of one simulation.
#[derive(Clone, Debug)]
pub struct Jidds {
    code: CosetLdpcCode,
    decoder: SpaDecoder,
    detector: Detector,
    mapping: Mapping,
    schedule: IterationSchedule,
    early_exit: bool,
}

impl Jidds {
    pub fn new(
        code: CosetLdpcCode,
        h: &ChannelMatrix,
        mapping: Mapping,
        schedule: IterationSchedule,
        early_exit: bool,
    ) -> Result<Self, JiddsError> {
        if mapping.len() != code.n() {
            return Err(JiddsError::Config(format!(
                "page of {} cells cannot hold a length-{} codeword",
                mapping.len(),
                code.n()
            )));
        }
        let detector = Detector::new(
            h,
            mapping.rows(),
            mapping.cols(),
            DetectorConfig {
                iterations: schedule.detector,
                start: Direction::DownTrack,
            },
        )?;
        Ok(Self {
            decoder: SpaDecoder::for_code(&code),
            code,
            detector,
            mapping,
            schedule,
            early_exit,
        })
    }

    pub fn code(&self) -> &CosetLdpcCode {
        &self.code
    }

    pub fn schedule(&self) -> IterationSchedule {
        self.schedule
    }

    pub fn mapping(&self) -> &Mapping {
        &self.mapping
    }

    /// One frame with i.u.d. information bits drawn from `rng`.
    pub fn run_frame(&self, sigma: f64, rng: &mut impl Rng) -> Result<FrameResult, JiddsError> {
        let u: Vec<u8> = (0..self.code.k()).map(|_| rng.gen_range(0..2)).collect();
        self.run_frame_with(&u, sigma, rng)
    }

    pub fn run_frame_with(
        &self,
        u: &[u8],
        sigma: f64,
        rng: &mut impl Rng,
    ) -> Result<FrameResult, JiddsError> {
        let s = self.code.encode(u)?;
        let grid = self.mapping.interleave(&modulate(&s))?;
        let r = transmit(&convolve2d(&grid, self.detector.channel()), sigma, rng);
        let opts = DecodeOptions {
            iterations: self.schedule.decoder,
            early_exit: self.early_exit,
        };
        let mut priors = vec![0.0; self.code.n()];
        let mut rounds = Vec::with_capacity(self.schedule.outer);
        let mut hard = Vec::new();
        for _ in 0..self.schedule.outer {
            let ext = self.detector.detect(&r, sigma, &priors)?;
            let l_ext1 = self.mapping.gather(&ext)?;
            let out = self.decoder.decode(&l_ext1, opts)?;
            rounds.push(RoundDiagnostics {
                codeword_errors: out.hard.iter().zip(&s).filter(|(a, b)| a != b).count(),
                converged: out.converged,
                decoder_iterations: out.iterations,
            });
            priors = self.mapping.scatter(&out.extrinsic)?;
            hard = out.hard;
        }
        let decoded = self.code.extract_info(&hard)?;
        let bit_errors = decoded.iter().zip(u).filter(|(a, b)| a != b).count();
        Ok(FrameResult {
            hard,
            bit_errors,
            frame_error: bit_errors > 0,
            rounds,
        })
    }
}

/// Stop rules and seeding shared by the Monte-Carlo sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepControl {
    pub max_frames: u64,
    /// Stop a point once this many bit errors are collected (0 disables).
    pub min_errors: u64,
    pub seed: u64,
    /// Frames run between stop-rule checks; fixed so results do not depend on
    /// the number of worker threads.
    pub batch: u64,
}

impl Default for SweepControl {
    fn default() -> Self {
        Self {
            max_frames: 100,
            min_errors: 100,
            seed: 1,
            batch: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub sigma: f64,
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub elapsed_s: f64,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        ratio(self.bit_errors, self.bits)
    }

    pub fn fer(&self) -> f64 {
        ratio(self.frame_errors, self.frames)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Runs batches until `done()` or `max_frames`; frame `f` of point `point`
/// uses the stream derived from `(seed, point, f)`.
fn run_batches<T, F, D>(
    control: &SweepControl,
    point: u64,
    frame: F,
    mut fold: impl FnMut(T),
    mut done: D,
) -> Result<u64, JiddsError>
where
    T: Send,
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<T, JiddsError> + Sync,
    D: FnMut() -> bool,
{
    if control.batch == 0 {
        return Err(JiddsError::Config("batch must be positive".into()));
    }
    let mut frames = 0;
    while frames < control.max_frames && !done() {
        let count = control.batch.min(control.max_frames - frames);
        let results: Vec<T> = (frames..frames + count)
            .into_par_iter()
            .map(|f| frame(&mut seed::stream(control.seed, &[point, f])))
            .collect::<Result<_, _>>()?;
        results.into_iter().for_each(&mut fold);
        frames += count;
    }
    Ok(frames)
}

/// BER/FER per SNR point, SNR taken per bit at the code rate.
pub fn ber_sweep(
    sim: &Jidds,
    h: &ChannelMatrix,
    snr_points: &[f64],
    control: &SweepControl,
) -> Result<Vec<BerPoint>, JiddsError> {
    let rate = sim.code().rate();
    let k = sim.code().k() as u64;
    snr_points
        .iter()
        .enumerate()
        .map(|(idx, &snr_db)| {
            let start = Instant::now();
            let sigma = sigma_from_snr(h, rate, snr_db);
            let bit_errors = std::cell::Cell::new(0u64);
            let frame_errors = std::cell::Cell::new(0u64);
            let frames = run_batches(
                control,
                idx as u64,
                |rng| sim.run_frame(sigma, rng),
                |r: FrameResult| {
                    bit_errors.set(bit_errors.get() + r.bit_errors as u64);
                    frame_errors.set(frame_errors.get() + u64::from(r.frame_error));
                },
                || control.min_errors > 0 && bit_errors.get() >= control.min_errors,
            )?;
            Ok(BerPoint {
                snr_db,
                sigma,
                frames,
                bits: frames * k,
                bit_errors: bit_errors.get(),
                frame_errors: frame_errors.get(),
                elapsed_s: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparePoint {
    pub snr_db: f64,
    pub sigma: f64,
    pub frames: u64,
    pub bits: u64,
    pub errors_full: u64,
    pub errors_windowed: u64,
    pub elapsed_s: f64,
}

impl ComparePoint {
    pub fn ber_full(&self) -> f64 {
        ratio(self.errors_full, self.bits)
    }

    pub fn ber_windowed(&self) -> f64 {
        ratio(self.errors_windowed, self.bits)
    }
}

/// Uncoded hard-decision BER of the full and the windowed detector on the
/// same random pages. SNR is converted to sigma with `rate`.
#[allow(clippy::too_many_arguments)]
pub fn detector_compare(
    h: &ChannelMatrix,
    page: (usize, usize),
    iterations: usize,
    window: (usize, usize),
    rate: f64,
    snr_points: &[f64],
    control: &SweepControl,
) -> Result<Vec<ComparePoint>, JiddsError> {
    let det = Detector::new(
        h,
        page.0,
        page.1,
        DetectorConfig {
            iterations,
            start: Direction::DownTrack,
        },
    )?;
    let cells = page.0 * page.1;
    let zeros = vec![0.0; cells];
    snr_points
        .iter()
        .enumerate()
        .map(|(idx, &snr_db)| {
            let start = Instant::now();
            let sigma = sigma_from_snr(h, rate, snr_db);
            let full = std::cell::Cell::new(0u64);
            let windowed = std::cell::Cell::new(0u64);
            let frames = run_batches(
                control,
                idx as u64,
                |rng| {
                    let x = BipolarGrid::random(page.0, page.1, rng);
                    let r = transmit(&convolve2d(&x, h), sigma, rng);
                    let a = det.detect(&r, sigma, &zeros)?;
                    let b = det.detect_windowed(&r, sigma, &zeros, window.0, window.1)?;
                    let wrong = |llr: &[f64]| {
                        llr.iter()
                            .zip(x.as_slice())
                            .filter(|(l, &b)| (**l > 0.0) != (b > 0))
                            .count() as u64
                    };
                    Ok((wrong(&a), wrong(&b)))
                },
                |(a, b)| {
                    full.set(full.get() + a);
                    windowed.set(windowed.get() + b);
                },
                || control.min_errors > 0 && full.get().min(windowed.get()) >= control.min_errors,
            )?;
            Ok(ComparePoint {
                snr_db,
                sigma,
                frames,
                bits: frames * cells as u64,
                errors_full: full.get(),
                errors_windowed: windowed.get(),
                elapsed_s: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}
