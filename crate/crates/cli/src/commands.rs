//! Subcommand implementations. Each builds its whole output in memory and
//! writes it once at the end.

use std::fmt::Write as _;
use std::path::Path;

use ldpc2d::channel::{snr_db, ChannelMatrix, Mapping};
use ldpc2d::code::{construct_regular_code, CosetLdpcCode, DegreeDistribution, ParityCheckMatrix};
use ldpc2d::config::{ChannelSource, CodeSource, RunConfig, Subcommand};
use ldpc2d::de::{threshold_search, DeConfig, DeError, DeStatus, DensityEvolution};
use ldpc2d::jidds::{
    ber_sweep, default_page, detector_compare, IterationSchedule, Jidds, SweepControl,
};
use ldpc2d::neighborhood::{gamma_bound, NeighborhoodParams};
use ldpc2d::report::{csv_row, sig9};

pub enum Outcome {
    Done,
    NotConverged(String),
}

pub enum Failure {
    Config(String),
    Runtime(String),
}

fn config_err(e: impl ToString) -> Failure {
    Failure::Config(e.to_string())
}

fn runtime_err(e: impl ToString) -> Failure {
    Failure::Runtime(e.to_string())
}

type Result<T> = std::result::Result<T, Failure>;

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = String::new();
    let mut meta = Vec::<(String, String)>::new();
    let outcome = match cfg.subcommand {
        Subcommand::Simulate => simulate(cfg, &mut out, &mut meta)?,
        Subcommand::Threshold => threshold(cfg, &mut out, &mut meta)?,
        Subcommand::DetectorCompare => compare(cfg, &mut out, &mut meta)?,
        Subcommand::DeTrace => de_trace(cfg, &mut out, &mut meta)?,
        Subcommand::Neighborhood => neighborhood(cfg, &mut out)?,
        Subcommand::CodeGen => code_gen(cfg, &mut out, &mut meta)?,
    };
    write_output(cfg, &out, &meta)?;
    Ok(outcome)
}

fn write_output(cfg: &RunConfig, out: &str, meta: &[(String, String)]) -> Result<()> {
    let Some(path) = &cfg.out else {
        print!("{out}");
        return Ok(());
    };
    std::fs::write(path, out).map_err(|e| runtime_err(format!("{}: {e}", path.display())))?;
    let mut text = cfg.serialize();
    let _ = writeln!(text, "# ldpc2d {}", env!("CARGO_PKG_VERSION"));
    for (k, v) in meta {
        let _ = writeln!(text, "# {k} = {v}");
    }
    let side = sidecar(path);
    std::fs::write(&side, text).map_err(|e| runtime_err(format!("{}: {e}", side.display())))
}

fn sidecar(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    s.into()
}

fn channel(cfg: &RunConfig) -> Result<ChannelMatrix> {
    match &cfg.channel {
        ChannelSource::PresetA => Ok(ChannelMatrix::preset_a()),
        ChannelSource::PresetB => Ok(ChannelMatrix::preset_b()),
        ChannelSource::Awgn => Ok(ChannelMatrix::awgn()),
        ChannelSource::File(p) => {
            ChannelMatrix::load(p).map_err(|e| config_err(format!("channel: {}: {e}", p.display())))
        }
    }
}

fn pcm(cfg: &RunConfig) -> Result<ParityCheckMatrix> {
    match &cfg.code {
        CodeSource::Alist(p) => ParityCheckMatrix::load_alist(p)
            .map_err(|e| config_err(format!("code: {}: {e}", p.display()))),
        CodeSource::Regular { n, dv, dc } => construct_regular_code(*n, *dv, *dc, 6, cfg.code_seed)
            .map_err(|e| config_err(format!("code: {e}"))),
    }
}

fn degrees(cfg: &RunConfig) -> Result<DegreeDistribution> {
    match &cfg.code {
        CodeSource::Regular { dv, dc, .. } => {
            DegreeDistribution::regular(*dv, *dc).map_err(|e| config_err(format!("code: {e}")))
        }
        CodeSource::Alist(_) => pcm(cfg)?
            .degree_distribution()
            .map_err(|e| config_err(format!("code: {e}"))),
    }
}

fn control(cfg: &RunConfig) -> SweepControl {
    SweepControl {
        max_frames: cfg.max_frames,
        min_errors: cfg.min_errors,
        seed: cfg.seed,
        batch: cfg.batch,
    }
}

/// Raw noise levels from the sigma grid.
fn sigmas(cfg: &RunConfig, h: &ChannelMatrix) -> Option<Vec<f64>> {
    let scale = if cfg.sigma_normalized { h.norm() } else { 1.0 };
    cfg.sigma
        .map(|s| s.points().into_iter().map(|x| x * scale).collect())
}

fn snr_points(cfg: &RunConfig, h: &ChannelMatrix, rate: f64) -> Result<Vec<f64>> {
    if let Some(s) = cfg.snr {
        return Ok(s.points());
    }
    match sigmas(cfg, h) {
        Some(sig) => {
            if sig.iter().any(|&s| s <= 0.0) {
                return Err(config_err("sigma: values must be positive"));
            }
            Ok(sig.into_iter().map(|s| snr_db(h, rate, s)).collect())
        }
        None => Err(config_err("snr: give an SNR or sigma grid")),
    }
}

fn elapsed(cfg: &RunConfig, t: f64) -> String {
    sig9(if cfg.timing { t } else { 0.0 })
}

fn schedule(cfg: &RunConfig) -> Result<IterationSchedule> {
    IterationSchedule::new(
        cfg.detector_iterations,
        cfg.decoder_iterations,
        cfg.outer_iterations,
    )
    .map_err(config_err)
}

fn simulate(
    cfg: &RunConfig,
    out: &mut String,
    meta: &mut Vec<(String, String)>,
) -> Result<Outcome> {
    let h = channel(cfg)?;
    let code = CosetLdpcCode::linear(pcm(cfg)?);
    let points = snr_points(cfg, &h, code.rate())?;
    let (rows, cols) = cfg.page.unwrap_or_else(|| default_page(code.n()));
    let mapping = Mapping::new(rows, cols, cfg.mapping);
    meta.push(("n".into(), code.n().to_string()));
    meta.push(("k".into(), code.k().to_string()));
    meta.push(("page".into(), format!("{rows}x{cols}")));
    let sim = Jidds::new(code, &h, mapping, schedule(cfg)?, cfg.early_exit).map_err(config_err)?;
    let rows_out = ber_sweep(&sim, &h, &points, &control(cfg)).map_err(runtime_err)?;
    out.push_str(&csv_row(&[
        "snr_db",
        "sigma",
        "frames",
        "bits",
        "bit_errors",
        "ber",
        "frame_errors",
        "fer",
        "elapsed_s",
        "seed",
    ]));
    for p in rows_out {
        out.push_str(&csv_row(&[
            sig9(p.snr_db),
            sig9(p.sigma),
            p.frames.to_string(),
            p.bits.to_string(),
            p.bit_errors.to_string(),
            sig9(p.ber()),
            p.frame_errors.to_string(),
            sig9(p.fer()),
            elapsed(cfg, p.elapsed_s),
            cfg.seed.to_string(),
        ]));
    }
    Ok(Outcome::Done)
}

fn compare(cfg: &RunConfig, out: &mut String, meta: &mut Vec<(String, String)>) -> Result<Outcome> {
    let h = channel(cfg)?;
    let points = snr_points(cfg, &h, cfg.compare_rate)?;
    let page = cfg.page.unwrap_or((40, 50));
    meta.push(("page".into(), format!("{}x{}", page.0, page.1)));
    let rows = detector_compare(
        &h,
        page,
        cfg.detector_iterations,
        cfg.window,
        cfg.compare_rate,
        &points,
        &control(cfg),
    )
    .map_err(runtime_err)?;
    out.push_str(&csv_row(&[
        "snr_db",
        "sigma",
        "frames",
        "bits",
        "errors_full",
        "ber_full",
        "errors_windowed",
        "ber_windowed",
        "elapsed_s",
        "seed",
    ]));
    for p in rows {
        out.push_str(&csv_row(&[
            sig9(p.snr_db),
            sig9(p.sigma),
            p.frames.to_string(),
            p.bits.to_string(),
            p.errors_full.to_string(),
            sig9(p.ber_full()),
            p.errors_windowed.to_string(),
            sig9(p.ber_windowed()),
            elapsed(cfg, p.elapsed_s),
            cfg.seed.to_string(),
        ]));
    }
    Ok(Outcome::Done)
}

fn de_config(cfg: &RunConfig) -> DeConfig {
    DeConfig {
        delta: cfg.de_delta,
        llr_max: cfg.de_llr_max,
        samples: cfg.de_samples,
        detector_iterations: cfg.detector_iterations,
        p_ers: cfg.de_p_ers,
        max_rounds: cfg.de_max_rounds,
        ext2: cfg.de_ext2,
        seed: cfg.seed,
        ..DeConfig::default()
    }
}

fn de_meta(de: &DensityEvolution, meta: &mut Vec<(String, String)>) {
    let c = de.config();
    meta.push(("de_page".into(), format!("{0}x{0}", c.page)));
    meta.push(("de_margin".into(), c.margin.to_string()));
    meta.push((
        "de_samples_per_stage".into(),
        de.channel_stage().samples_per_stage().to_string(),
    ));
    meta.push(("de_p_zero".into(), c.p_zero.to_string()));
}

fn density_evolution(cfg: &RunConfig, h: &ChannelMatrix) -> Result<DensityEvolution> {
    DensityEvolution::new(&degrees(cfg)?, h, de_config(cfg)).map_err(|e| match e {
        DeError::Config(_) | DeError::Detector(_) => config_err(e),
        other => runtime_err(other),
    })
}

fn threshold(
    cfg: &RunConfig,
    out: &mut String,
    meta: &mut Vec<(String, String)>,
) -> Result<Outcome> {
    let h = channel(cfg)?;
    let de = density_evolution(cfg, &h)?;
    de_meta(&de, meta);
    let scale = if cfg.sigma_normalized { h.norm() } else { 1.0 };
    let (lo, hi) = (cfg.bracket.0 * scale, cfg.bracket.1 * scale);
    let report = match threshold_search(&de, &h, cfg.mode, lo, hi, cfg.tol * scale) {
        Ok(r) => r,
        Err(e @ DeError::InvalidBracket { .. }) => {
            return Ok(Outcome::NotConverged(format!("threshold: {e}")));
        }
        Err(e) => return Err(runtime_err(e)),
    };
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    put("sigma", sig9(report.sigma));
    put("sigma_normalized", sig9(report.normalized()));
    put("lo", sig9(report.lo));
    put("hi", sig9(report.hi));
    put("tol", sig9(report.tol));
    put("mode", report.mode.name().into());
    put("channel_norm", sig9(report.norm));
    for step in &report.history {
        put(
            "step",
            format!(
                "{},{},{},{}",
                sig9(step.sigma),
                step.status.name(),
                sig9(step.final_p),
                step.rounds
            ),
        );
    }
    Ok(Outcome::Done)
}

fn de_trace(
    cfg: &RunConfig,
    out: &mut String,
    meta: &mut Vec<(String, String)>,
) -> Result<Outcome> {
    let h = channel(cfg)?;
    let Some(levels) = sigmas(cfg, &h) else {
        return Err(config_err("sigma: de-trace needs a sigma grid"));
    };
    if levels.iter().any(|&s| s <= 0.0) {
        return Err(config_err("sigma: values must be positive"));
    }
    let de = density_evolution(cfg, &h)?;
    de_meta(&de, meta);
    out.push_str(&csv_row(&["t", "l", "p", "sigma"]));
    let mut stuck = Vec::new();
    for sigma in levels {
        let trace = de.run(sigma, cfg.mode).map_err(runtime_err)?;
        for round in &trace.rounds {
            for (l, p) in round.inner.iter().enumerate() {
                out.push_str(&csv_row(&[
                    round.t.to_string(),
                    (l + 1).to_string(),
                    sig9(*p),
                    sig9(sigma),
                ]));
            }
        }
        meta.push((
            format!("status[{}]", sig9(sigma)),
            trace.status.name().into(),
        ));
        if trace.status == DeStatus::Stuck {
            stuck.push(sig9(sigma));
        }
    }
    if stuck.is_empty() {
        Ok(Outcome::Done)
    } else {
        Ok(Outcome::NotConverged(format!(
            "stuck at sigma = {}",
            stuck.join(", ")
        )))
    }
}

fn neighborhood(cfg: &RunConfig, out: &mut String) -> Result<Outcome> {
    let code = pcm(cfg)?;
    let (dv, dc) = code
        .regular_degrees()
        .ok_or_else(|| config_err("code: neighborhood counts need a regular code"))?;
    let n = code.n() as u64;
    out.push_str(&csv_row(&[
        "t",
        "q_v",
        "q_c",
        "gamma",
        "gamma_over_n",
        "tree_lower_bound",
    ]));
    for t in 0..=cfg.nb_t {
        let p = NeighborhoodParams {
            t,
            ic: cfg.decoder_iterations as u32,
            dv: dv as u32,
            dc: dc as u32,
            fc: cfg.window.0 as u32,
            fd: cfg.window.1 as u32,
            n,
            k: n - code.m() as u64,
        };
        let b = gamma_bound(&p).map_err(config_err)?;
        out.push_str(&csv_row(&[
            t.to_string(),
            b.q_v.to_string(),
            b.q_c.to_string(),
            b.gamma.to_string(),
            sig9(b.gamma_over_n),
            b.tree_lower_bound.map_or_else(|| "vacuous".into(), sig9),
        ]));
    }
    Ok(Outcome::Done)
}

fn code_gen(
    cfg: &RunConfig,
    out: &mut String,
    meta: &mut Vec<(String, String)>,
) -> Result<Outcome> {
    if !matches!(cfg.code, CodeSource::Regular { .. }) {
        return Err(config_err("code: code-gen needs regular:N:dv:dc"));
    }
    let pcm = pcm(cfg)?;
    let code = CosetLdpcCode::linear(pcm.clone());
    meta.push(("k".into(), code.k().to_string()));
    out.push_str(&pcm.to_alist_string());
    Ok(Outcome::Done)
}
