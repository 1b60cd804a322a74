//! Monte-Carlo evolution of the decoder-to-detector density through the
//! channel detector.

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rayon::prelude::*;

use super::histogram::LlrHistogram;
use super::DeError;
use crate::channel::{convolve2d, transmit, BipolarGrid, ChannelMatrix};
use crate::detector::{Detector, DetectorConfig, Direction};
use crate::seed;

/// Samples `tau = L_ext1 * c` from interior bits of random pages.
#[derive(Clone, Debug)]
pub struct ChannelStage {
    h: ChannelMatrix,
    detector: Detector,
    page: usize,
    margin: usize,
    samples: usize,
    seed: u64,
}

impl ChannelStage {
    pub fn new(
        h: &ChannelMatrix,
        detector_iterations: usize,
        page: usize,
        margin: usize,
        samples: usize,
        seed: u64,
    ) -> Result<Self, DeError> {
        if page <= 2 * margin {
            return Err(DeError::Config(format!(
                "page {page} leaves no interior with margin {margin}"
            )));
        }
        if samples == 0 {
            return Err(DeError::Config("samples must be positive".into()));
        }
        let detector = Detector::new(
            h,
            page,
            page,
            DetectorConfig {
                iterations: detector_iterations,
                start: Direction::DownTrack,
            },
        )?;
        Ok(Self {
            h: h.clone(),
            detector,
            page,
            margin,
            samples,
            seed,
        })
    }

    fn interior(&self) -> usize {
        self.page - 2 * self.margin
    }

    pub fn pages(&self) -> usize {
        let per = self.interior() * self.interior();
        self.samples.div_ceil(per)
    }

    pub fn samples_per_stage(&self) -> usize {
        self.pages() * self.interior() * self.interior()
    }

    /// True for a 1x1 channel, where the detector output has a closed form.
    pub fn is_memoryless(&self) -> bool {
        self.h.rows() == 1 && self.h.cols() == 1
    }

    /// `f_tau` for decoder feedback density `fext2`. `stage` selects the
    /// random stream, so two noise levels at the same stage share pages.
    pub fn evolve(
        &self,
        fext2: &LlrHistogram,
        sigma: f64,
        stage: u64,
    ) -> Result<LlrHistogram, DeError> {
        let grid = fext2.grid();
        if self.is_memoryless() {
            if sigma == 0.0 {
                return Ok(LlrHistogram::delta(grid, f64::INFINITY));
            }
            let h2 = self.h.tap(0, 0).powi(2);
            let s2 = sigma * sigma;
            return Ok(LlrHistogram::gaussian(grid, 2.0 * h2 / s2, 4.0 * h2 / s2));
        }
        let (values, weights) = fext2.sample_values();
        let cap = grid.llr_max();
        let values: Vec<f64> = values.iter().map(|v| v.clamp(-cap, cap)).collect();
        let pick = WeightedIndex::new(&weights)
            .map_err(|e| DeError::Config(format!("feedback density: {e}")))?;
        let n = self.page;
        let (lo, hi) = (self.margin, self.page - self.margin);
        let per_page: Vec<Vec<f64>> = (0..self.pages() as u64)
            .into_par_iter()
            .map(|p| {
                let mut rng = seed::stream(self.seed, &[stage, p]);
                let x = BipolarGrid::random(n, n, &mut rng);
                let priors: Vec<f64> = x
                    .as_slice()
                    .iter()
                    .map(|&c| values[pick.sample(&mut rng)] * f64::from(c))
                    .collect();
                let r = transmit(&convolve2d(&x, &self.h), sigma, &mut rng);
                let ext = self.detector.detect(&r, sigma, &priors)?;
                let mut tau = Vec::with_capacity((hi - lo) * (hi - lo));
                for i in lo..hi {
                    for j in lo..hi {
                        tau.push(ext[i * n + j] * f64::from(x.as_slice()[i * n + j]));
                    }
                }
                Ok(tau)
            })
            .collect::<Result<_, DeError>>()?;
        let all: Vec<f64> = per_page.into_iter().flatten().collect();
        LlrHistogram::from_samples(grid, &all)
    }
}
