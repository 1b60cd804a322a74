//! Acceptance checks. Prints one PASS/FAIL line per criterion and a summary;
//! the process exits 0 either way so the ordinary test run stays green.
//!
//! `LDPC2D_ACCEPT_FULL=1` switches the density-evolution checks to 10^6
//! samples and bisection tolerance 0.01. `LDPC2D_ACCEPT_ONLY=3,4` runs a
//! subset.

#![allow(clippy::needless_range_loop)]

mod common;

use std::time::Instant;

use common::exact::{brute_force, column_map, strip_map};
use common::unroll::{build, Kind};
use ldpc2d::channel::{snr_db, ChannelMatrix, Mapping, MappingKind, RealGrid};
use ldpc2d::code::{construct_regular_code, CosetLdpcCode, DegreeDistribution, ParityCheckMatrix};
use ldpc2d::de::{
    check_node_density, threshold_search, variable_node_density, ChannelStage, CheckTable,
    DeConfig, DensityEvolution, Grid, LlrHistogram, Mode,
};
use ldpc2d::decoder::{DecodeOptions, SpaDecoder};
use ldpc2d::detector::{
    bit_log_probs, cross_track_bcjr, down_track_bcjr, Boundary, CrossTrackTrellis, Detector,
    DetectorConfig, DownTrackTrellis,
};
use ldpc2d::jidds::{
    ber_sweep, default_page, detector_compare, BerPoint, IterationSchedule, Jidds, SweepControl,
};
use ldpc2d::neighborhood::{q_c, q_v, NeighborhoodParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Budget {
    full: bool,
    only: Option<Vec<String>>,
}

impl Budget {
    fn from_env() -> Self {
        let full = std::env::var("LDPC2D_ACCEPT_FULL").is_ok_and(|v| v == "1");
        let only = std::env::var("LDPC2D_ACCEPT_ONLY")
            .ok()
            .map(|v| v.split(',').map(|s| s.trim().to_string()).collect());
        Self { full, only }
    }

    fn wants(&self, id: &str) -> bool {
        self.only
            .as_ref()
            .is_none_or(|ids| ids.iter().any(|i| i == id))
    }
}

#[derive(Default)]
struct Tally {
    pass: usize,
    fail: usize,
}

impl Tally {
    fn record(&mut self, id: &str, name: &str, pass: bool, detail: String, started: Instant) {
        if pass {
            self.pass += 1;
        } else {
            self.fail += 1;
        }
        println!(
            "{} {id:<3} {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
    }
}

fn main() {
    let budget = Budget::from_env();
    let mut tally = Tally::default();
    type Check = fn(&Budget, &mut Tally);
    let checks: [(&str, Check); 8] = [
        ("1", detector_exactness),
        ("2", decoder_exactness),
        ("3", table_one_trace),
        ("4", table_two_thresholds),
        ("5", windowed_detector),
        ("6", code_performance),
        ("7", neighborhood_counts),
        ("8", invariants),
    ];
    for (id, check) in checks {
        if budget.wants(id) {
            check(&budget, &mut tally);
        }
    }
    println!("acceptance: {} passed, {} failed", tally.pass, tally.fail);
}

fn detector_exactness(_: &Budget, tally: &mut Tally) {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut strip_err: f64 = 0.0;
    for nh in 1..=3 {
        for _ in 0..10 {
            let taps: Vec<f64> = (0..nh).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h = ChannelMatrix::new(1, nh, taps.clone()).unwrap();
            let n = 10;
            let sigma = rng.gen_range(0.3..1.2);
            let r: Vec<f64> = (0..n + nh - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let priors: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let det = Detector::new(
                &h,
                1,
                n,
                DetectorConfig {
                    iterations: 1,
                    ..Default::default()
                },
            )
            .unwrap();
            let grid = RealGrid::from_vec(1, n + nh - 1, r.clone()).unwrap();
            let ext = det.detect(&grid, sigma, &priors).unwrap();
            let exact = strip_map(&taps, &r, sigma, &priors);
            for j in 0..n {
                strip_err = strip_err.max((ext[j] + priors[j] - exact[j]).abs());
            }
        }
    }
    let mut column_err: f64 = 0.0;
    for mh in 1..=3 {
        for rows in 1..=8 {
            let steps = rows + mh - 1;
            let lic: Vec<f64> = (0..steps << mh).map(|_| rng.gen_range(-3.0..1.0)).collect();
            let mut bits: Vec<[f64; 2]> = (0..rows)
                .map(|_| bit_log_probs(rng.gen_range(-2.0..2.0)))
                .collect();
            bits.extend(std::iter::repeat_n([0.0, f64::NEG_INFINITY], mh - 1));
            let t = CrossTrackTrellis::new(mh);
            let out = cross_track_bcjr(&t, &lic, &bits, Boundary::Known, Boundary::Known).unwrap();
            let exact = column_map(&lic, &bits, rows, mh);
            for k in 0..rows {
                column_err = column_err.max((out.bit_llr[k] - exact[k]).abs());
            }
        }
    }
    tally.record(
        "1",
        "detector vs exhaustive MAP",
        strip_err < 1e-9 && column_err < 1e-9,
        format!("max |err| strip {strip_err:.2e}, column {column_err:.2e} (tol 1e-9)"),
        t0,
    );
}

fn decoder_exactness(_: &Budget, tally: &mut Tally) {
    let t0 = Instant::now();
    let trees = [
        vec![vec![0, 1, 2], vec![0, 3, 4], vec![1, 5], vec![2, 6]],
        vec![vec![0, 1, 2], vec![2, 3, 4], vec![4, 5, 6]],
        vec![vec![0, 1, 2, 3], vec![3, 4, 5, 6]],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut err: f64 = 0.0;
    for rows in trees {
        let pcm = ParityCheckMatrix::from_rows(7, rows).unwrap();
        for _ in 0..50 {
            let llr: Vec<f64> = (0..7).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let d: Vec<u8> = (0..pcm.m()).map(|_| rng.gen_range(0..2)).collect();
            let out = SpaDecoder::new(&pcm, &d)
                .unwrap()
                .decode(
                    &llr,
                    DecodeOptions {
                        iterations: 8,
                        early_exit: false,
                    },
                )
                .unwrap();
            let exact = brute_force(&pcm, &d, &llr);
            for (a, b) in out.posterior.iter().zip(&exact) {
                err = err.max((a - b).abs());
            }
        }
    }
    tally.record(
        "2",
        "sum-product on cycle-free codes vs brute force",
        err < 1e-6,
        format!("max |err| {err:.2e} (tol 1e-6)"),
        t0,
    );
}

fn de_config(budget: &Budget, reduced: usize) -> DeConfig {
    DeConfig {
        samples: if budget.full { 1_000_000 } else { reduced },
        ..DeConfig::default()
    }
}

fn table_one_trace(budget: &Budget, tally: &mut Tally) {
    let t0 = Instant::now();
    let h = ChannelMatrix::preset_a();
    let dd = DegreeDistribution::regular(3, 6).unwrap();
    let (tol, samples) = if budget.full {
        (0.003, 1_000_000)
    } else {
        (0.01, 100_000)
    };
    let cfg = DeConfig {
        samples,
        max_rounds: 6,
        stall_rounds: 6,
        ..DeConfig::default()
    };
    let de = DensityEvolution::new(&dd, &h, cfg).unwrap();
    let trace = de.run(0.81 * h.norm(), Mode::TurboEqualized).unwrap();
    let p = trace.p_values();
    let (p1, p2) = (p[0], p.get(1).copied().unwrap_or(f64::NAN));
    let first = (p1 - 0.1201).abs() <= tol && (p2 - 0.1019).abs() <= tol;
    let zero_by_six = p.iter().take(6).any(|&x| x < 1e-6);
    let shown: Vec<String> = p.iter().map(|x| format!("{x:.4}")).collect();
    tally.record(
        "3",
        "density evolution trace, H_A (3,6) sigma/|H| = 0.81",
        first && zero_by_six,
        format!(
            "p = [{}]; p1, p2 within {tol}: {}; p < 1e-6 by t <= 6: {}",
            shown.join(", "),
            first,
            zero_by_six
        ),
        t0,
    );
}

fn table_two_thresholds(budget: &Budget, tally: &mut Tally) {
    let t0 = Instant::now();
    let tol = if budget.full { 0.01 } else { 0.02 };
    let dd = DegreeDistribution::regular(3, 6).unwrap();
    let cases = [
        (
            "te H_A",
            ChannelMatrix::preset_a(),
            Mode::TurboEqualized,
            0.81,
            (0.75, 0.85),
        ),
        (
            "non-te H_A",
            ChannelMatrix::preset_a(),
            Mode::NonTurbo,
            0.73,
            (0.65, 0.80),
        ),
        (
            "AWGN",
            ChannelMatrix::awgn(),
            Mode::NonTurbo,
            0.88,
            (0.80, 0.95),
        ),
    ];
    let mut all = true;
    let mut parts = Vec::new();
    for (name, h, mode, target, (lo, hi)) in cases {
        let de = DensityEvolution::new(&dd, &h, de_config(budget, 20_000)).unwrap();
        let s = h.norm();
        let found =
            threshold_search(&de, &h, mode, lo * s, hi * s, tol * s).map(|r| r.normalized());
        match found {
            Ok(sigma) => {
                let ok = (sigma - target).abs() <= 0.02;
                all &= ok;
                parts.push(format!("{name} {sigma:.4} (want {target} +- 0.02)"));
            }
            Err(e) => {
                all = false;
                parts.push(format!("{name} error: {e}"));
            }
        }
    }
    tally.record(
        "4",
        "noise thresholds, (3,6), normalized by |H|",
        all,
        parts.join("; "),
        t0,
    );
}

fn windowed_detector(_: &Budget, tally: &mut Tally) {
    let t0 = Instant::now();
    let control = SweepControl {
        max_frames: 200,
        min_errors: 100,
        seed: 5,
        batch: 4,
    };
    let rows = detector_compare(
        &ChannelMatrix::preset_a(),
        (20, 20),
        3,
        (5, 5),
        1.0,
        &[1.0, 3.0, 5.0],
        &control,
    )
    .unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for p in &rows {
        let enough = p.errors_full >= 100 && p.errors_windowed >= 100;
        let ratio = p.ber_windowed() / p.ber_full();
        ok &= enough && (1.0 / 1.2..=1.2).contains(&ratio);
        parts.push(format!(
            "{} dB: full {} / windowed {} errors, ratio {ratio:.3}",
            p.snr_db, p.errors_full, p.errors_windowed
        ));
    }
    tally.record(
        "5",
        "windowed detector (5x5) vs full detector",
        ok,
        parts.join("; "),
        t0,
    );
}

fn half_rate_sim(schedule: IterationSchedule) -> Jidds {
    let h = ChannelMatrix::preset_a();
    let code = CosetLdpcCode::linear(construct_regular_code(2000, 3, 6, 6, 1).unwrap());
    let (r, c) = default_page(code.n());
    Jidds::new(
        code,
        &h,
        Mapping::new(r, c, MappingKind::RowMajor),
        schedule,
        true,
    )
    .unwrap()
}

fn sweep(schedule: IterationSchedule, snrs: &[f64], frames: u64) -> Vec<BerPoint> {
    let control = SweepControl {
        max_frames: frames,
        min_errors: 0,
        seed: 1,
        batch: 4,
    };
    ber_sweep(
        &half_rate_sim(schedule),
        &ChannelMatrix::preset_a(),
        snrs,
        &control,
    )
    .unwrap()
}

/// SNR where the BER falls through `target`, interpolating `log10(BER)`
/// between grid points; a point without errors counts as half an error.
fn crossing(points: &[BerPoint], target: f64) -> Option<f64> {
    let lb = |p: &BerPoint| {
        (p.bit_errors.max(1) as f64 * if p.bit_errors == 0 { 0.5 } else { 1.0 } / p.bits as f64)
            .log10()
    };
    let t = target.log10();
    points.windows(2).find_map(|w| {
        let (a, b) = (lb(&w[0]), lb(&w[1]));
        (a >= t && b < t).then(|| w[0].snr_db + (a - t) / (a - b) * (w[1].snr_db - w[0].snr_db))
    })
}

fn code_performance(budget: &Budget, tally: &mut Tally) {
    // (a) paired frames: every schedule sees the same noise realizations
    let t0 = Instant::now();
    let schedules = [(5, 1), (10, 2), (25, 5), (50, 10)];
    let frames = if budget.full { 100 } else { 24 };
    let mut bers = Vec::new();
    for (ic, out) in schedules {
        let p = sweep(IterationSchedule::new(3, ic, out).unwrap(), &[2.25], frames);
        bers.push((ic, out, p[0].bit_errors, p[0].bits));
    }
    let monotone = bers.windows(2).all(|w| w[1].2 <= w[0].2);
    let shown: Vec<String> = bers
        .iter()
        .map(|(ic, out, e, b)| format!("{ic}/{out}: {:.2e}", *e as f64 / *b as f64))
        .collect();
    tally.record(
        "6a",
        "(2000,1000) BER at 2.25 dB non-increasing in I_c/I_out",
        monotone,
        shown.join(", "),
        t0,
    );

    let t0 = Instant::now();
    let h = ChannelMatrix::preset_a();
    let snrs: Vec<f64> = (0..=6).map(|i| 1.5 + 0.25 * f64::from(i)).collect();
    let points = sweep(IterationSchedule::new(3, 50, 10).unwrap(), &snrs, frames);
    let target = 1e-3;
    let waterfall = crossing(&points, target);
    let stated = snr_db(&h, 0.5, 0.81);
    let normalized = snr_db(&h, 0.5, 0.81 * h.norm());
    let within = |reference: f64| waterfall.is_some_and(|w| w > reference && w - reference <= 1.0);
    let curve: Vec<String> = points
        .iter()
        .map(|p| format!("{}:{:.1e}", p.snr_db, p.ber()))
        .collect();
    tally.record(
        "6b",
        "(2000,1000) waterfall above the sigma = 0.81 threshold SNR and within 1 dB",
        within(stated),
        format!(
            "BER {target:.0e} crossing at {} dB; threshold {stated:.2} dB (sigma 0.81) -> {}; \
             threshold {normalized:.2} dB (sigma/|H| 0.81) -> {}; curve [{}]",
            waterfall.map_or("none".into(), |w| format!("{w:.2}")),
            within(stated),
            within(normalized),
            curve.join(" ")
        ),
        t0,
    );

    let t0 = Instant::now();
    // rate, sigma_AWGN, (te, SSWA) for H_A and for H_B
    let table = [
        (0.25, 1.26, [(1.19, 1.12), (1.22, 1.14)]),
        (0.50, 0.88, [(0.81, 0.74), (0.84, 0.75)]),
        (0.70, 0.68, [(0.62, 0.54), (0.64, 0.53)]),
        (0.85, 0.54, [(0.50, 0.39), (0.52, 0.38)]),
        (0.89, 0.50, [(0.45, 0.35), (0.47, 0.33)]),
    ];
    let required = |rate: f64, sigma: f64| snr_db(&ChannelMatrix::awgn(), rate, sigma);
    let mut ordered = 0;
    let mut total = 0;
    for (rate, awgn, channels) in table {
        for (te, sswa) in channels {
            total += 1;
            let (a, j, s) = (
                required(rate, awgn),
                required(rate, te),
                required(rate, sswa),
            );
            if a < j && j < s {
                ordered += 1;
            }
        }
    }
    tally.record(
        "6c",
        "required SNR ordering AWGN < JIDDS < SSWA from the threshold table",
        ordered == total,
        format!("{ordered}/{total} rows ordered"),
        t0,
    );
}

fn neighborhood_counts(_: &Budget, tally: &mut Tally) {
    let t0 = Instant::now();
    let (mut checked, mut bad_v, mut bad_c) = (0, Vec::new(), Vec::new());
    for t in 0..=2u32 {
        for ic in 1..=2u32 {
            for dv in 2..=3u32 {
                for dc in 2..=4u32 {
                    for fc in 1..=2u32 {
                        for fd in 1..=2u32 {
                            let p = NeighborhoodParams {
                                t,
                                ic,
                                dv,
                                dc,
                                fc,
                                fd,
                                n: 1_000_000,
                                k: 500_000,
                            };
                            let tree = build(
                                t as usize,
                                ic as usize,
                                dv as usize,
                                dc as usize,
                                fc as usize,
                                fd as usize,
                            );
                            checked += 1;
                            let (v, c) = (tree.count(Kind::Variable), tree.count(Kind::Check));
                            if q_v(&p).unwrap() != v.into() {
                                bad_v.push((t, ic, dv, dc, fc, fd));
                            }
                            if q_c(&p).unwrap() != c.into() {
                                bad_c.push((t, ic, dv, dc, fc, fd));
                            }
                        }
                    }
                }
            }
        }
    }
    let fig = NeighborhoodParams {
        t: 1,
        ic: 1,
        dv: 2,
        dc: 3,
        fc: 1,
        fd: 1,
        n: 1_000,
        k: 500,
    };
    let (fv, fcn) = (q_v(&fig).unwrap(), q_c(&fig).unwrap());
    let fig_ok = fv == 4u32.into() && fcn == 1u32.into();
    tally.record(
        "7",
        "neighborhood counts vs explicit unrolling",
        bad_v.is_empty() && bad_c.is_empty() && fig_ok,
        format!(
            "{checked} cases; Q_v mismatches {}, Q_c mismatches {} (all with t >= 2, I_c >= 2: {}); \
             single-window case Q_v = {fv}, Q_c = {fcn}",
            bad_v.len(),
            bad_c.len(),
            bad_c.iter().all(|c| c.0 >= 2 && c.1 >= 2)
        ),
        t0,
    );
}

fn random_density(rng: &mut impl Rng, grid: Grid) -> LlrHistogram {
    let mut h = LlrHistogram::empty(grid);
    let n = rng.gen_range(1..6);
    for _ in 0..n {
        let k: i32 = rng.gen_range(-80..=80);
        h.add(f64::from(k) * grid.delta(), rng.gen_range(0.01..1.0));
    }
    h.normalize();
    h
}

fn invariants(_: &Budget, tally: &mut Tally) {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let mut failures = Vec::new();

    let grid = Grid::new(0.1, 20.0).unwrap();
    let dd = DegreeDistribution::new(vec![(2, 0.4), (3, 0.6)], vec![(4, 0.5), (6, 0.5)]).unwrap();
    let table = CheckTable::new(grid);
    let (mut mass, mut mean): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let a = random_density(&mut rng, grid);
        let b = random_density(&mut rng, grid);
        let c = a.convolve(&b).unwrap();
        mass = mass.max((c.total() - 1.0).abs());
        mean = mean.max((c.finite_mean() - a.finite_mean() - b.finite_mean()).abs());
        let fq = check_node_density(&table, &a, &dd).unwrap();
        let fz = variable_node_density(&a, &b, &dd).unwrap();
        mass = mass
            .max((fq.total() - 1.0).abs())
            .max((fz.total() - 1.0).abs());
    }
    if mass > 1e-12 {
        failures.push(format!("mass drift {mass:.1e}"));
    }
    if mean > 1e-9 {
        failures.push(format!("mean additivity {mean:.1e}"));
    }

    let h = ChannelMatrix::preset_b();
    let trellis = DownTrackTrellis::new(&h);
    let mut norm: f64 = 0.0;
    for _ in 0..20 {
        let len = 12;
        let r: Vec<f64> = (0..len).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let a = trellis.alphabet().size();
        let priors: Vec<f64> = (0..len * a).map(|_| -(a as f64).ln()).collect();
        let out =
            down_track_bcjr(&trellis, &r, 0.7, &priors, Boundary::Known, Boundary::Known).unwrap();
        for step in out.posterior.chunks(a) {
            let z: f64 = step.iter().map(|v| v.exp()).sum();
            norm = norm.max((z - 1.0).abs());
        }
    }
    if norm > 1e-12 {
        failures.push(format!("posterior normalization {norm:.1e}"));
    }

    for seed in 0..10 {
        let pcm = construct_regular_code(60, 3, 6, 6, seed).unwrap();
        let b: Vec<u8> = (0..60).map(|_| rng.gen_range(0..2)).collect();
        let code = CosetLdpcCode::with_coset(pcm.clone(), b).unwrap();
        let u: Vec<u8> = (0..code.k()).map(|_| rng.gen_range(0..2)).collect();
        let s = code.encode(&u).unwrap();
        if pcm.syndrome(&s).unwrap() != code.syndrome() || code.extract_info(&s).unwrap() != u {
            failures.push(format!("coset identity, code seed {seed}"));
        }
    }

    let pool = |n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
    };
    let stage = ChannelStage::new(&ChannelMatrix::preset_a(), 1, 24, 3, 2_000, 11).unwrap();
    let prior = LlrHistogram::gaussian(Grid::default(), 1.0, 2.0);
    let evolve = |n| pool(n).install(|| stage.evolve(&prior, 0.8, 2).unwrap());
    if evolve(1) != evolve(3) {
        failures.push("channel stage depends on worker count".into());
    }
    let small = CosetLdpcCode::linear(construct_regular_code(240, 3, 6, 6, 5).unwrap());
    let (r, c) = default_page(240);
    let sim = Jidds::new(
        small,
        &ChannelMatrix::preset_a(),
        Mapping::new(r, c, MappingKind::Random { seed: 2 }),
        IterationSchedule::new(2, 10, 2).unwrap(),
        false,
    )
    .unwrap();
    let control = SweepControl {
        max_frames: 8,
        min_errors: 0,
        seed: 9,
        batch: 4,
    };
    let run = |n| {
        pool(n).install(|| {
            ber_sweep(&sim, &ChannelMatrix::preset_a(), &[1.0, 3.0], &control)
                .unwrap()
                .into_iter()
                .map(|p| (p.frames, p.bit_errors, p.frame_errors))
                .collect::<Vec<_>>()
        })
    };
    if run(1) != run(3) {
        failures.push("simulation depends on worker count".into());
    }

    let pass = failures.is_empty();
    tally.record(
        "8",
        "invariants (mass, mean, normalization, coset, determinism)",
        pass,
        if pass {
            "all hold".into()
        } else {
            failures.join("; ")
        },
        t0,
    );
}
