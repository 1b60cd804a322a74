use std::path::PathBuf;

use ldpc2d::channel::MappingKind;
use ldpc2d::config::{ChannelSource, CodeSource, RunConfig, Subcommand, Sweep};
use ldpc2d::de::{Ext2Rule, Mode};
use proptest::prelude::*;

fn path() -> impl Strategy<Value = PathBuf> {
    "[a-z][a-z0-9_/.]{0,12}"
        .prop_filter("not a preset", |s| {
            !matches!(s.as_str(), "HA" | "HB" | "AWGN" | "none")
        })
        .prop_map(PathBuf::from)
}

fn sweep() -> impl Strategy<Value = Sweep> {
    (-10.0..10.0f64, 0.0..5.0f64, 0.01..1.0f64).prop_map(|(start, span, step)| Sweep {
        start,
        stop: start + span,
        step,
    })
}

prop_compose! {
    fn config()(
        sub in prop::sample::select(Subcommand::ALL.to_vec()),
        code in prop_oneof![
            path().prop_map(CodeSource::Alist),
            (1usize..100_000, 1usize..10, 2usize..40)
                .prop_map(|(n, dv, dc)| CodeSource::Regular { n, dv, dc }),
        ],
        code_seed in any::<u64>(),
        channel in prop_oneof![
            Just(ChannelSource::PresetA),
            Just(ChannelSource::PresetB),
            Just(ChannelSource::Awgn),
            path().prop_map(ChannelSource::File),
        ],
        mapping in prop_oneof![
            Just(MappingKind::RowMajor),
            any::<u64>().prop_map(|seed| MappingKind::Random { seed }),
        ],
        iters in (1usize..10, 1usize..200, 1usize..30),
        early_exit in any::<bool>(),
        grid in prop_oneof![
            Just((None, None)),
            sweep().prop_map(|s| (Some(s), None)),
            sweep().prop_map(|s| (None, Some(s))),
        ],
        sigma_normalized in any::<bool>(),
        frames in (1u64..1_000_000, 0u64..10_000, 1u64..64),
        window in (1usize..20, 1usize..20),
        compare_rate in 0.01..=1.0f64,
        page in prop::option::of((1usize..500, 1usize..500)),
        de in (1usize..10_000_000, 0.001..0.5f64, 1e-9..1e-3f64, 1usize..100),
        ext2 in prop_oneof![Just(Ext2Rule::DecoderOnly), Just(Ext2Rule::WithChannel)],
        mode in prop_oneof![Just(Mode::TurboEqualized), Just(Mode::NonTurbo)],
        tol in 1e-4..0.1f64,
        bracket in (0.01..1.0f64, 0.01..2.0f64),
        nb_t in 0u32..5,
        seed in any::<u64>(),
        out in prop::option::of(path()),
        timing in any::<bool>(),
    ) -> RunConfig {
        RunConfig {
            subcommand: sub,
            code,
            code_seed,
            channel,
            mapping,
            detector_iterations: iters.0,
            decoder_iterations: iters.1,
            outer_iterations: iters.2,
            early_exit,
            snr: grid.0,
            sigma: grid.1,
            sigma_normalized,
            max_frames: frames.0,
            min_errors: frames.1,
            batch: frames.2,
            window,
            compare_rate,
            page,
            de_samples: de.0,
            de_delta: de.1,
            de_llr_max: 50.0,
            de_p_ers: de.2,
            de_max_rounds: de.3,
            de_ext2: ext2,
            mode,
            tol,
            bracket: (bracket.0, bracket.0 + bracket.1),
            nb_t,
            seed,
            out,
            timing,
        }
    }
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(cfg in config()) {
        let text = cfg.serialize();
        prop_assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
        prop_assert!(text.ends_with('\n'));
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,200}") {
        let _ = RunConfig::parse(&text);
    }

    #[test]
    fn sweep_points_stay_in_range(s in sweep()) {
        let pts = s.points();
        prop_assert!(!pts.is_empty());
        prop_assert_eq!(pts[0], s.start);
        prop_assert!(*pts.last().unwrap() <= s.stop + 1e-6);
        prop_assert!(pts.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn set_overrides_one_key() {
    let mut cfg = RunConfig::default();
    cfg.set("iters", "3/5/1").unwrap();
    cfg.set("channel", "HB").unwrap();
    assert_eq!(cfg.decoder_iterations, 5);
    assert_eq!(cfg.outer_iterations, 1);
    assert_eq!(cfg.channel, ChannelSource::PresetB);
    assert!(cfg.set("nope", "1").is_err());
}
