#![no_main]

use ldpc2d::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = RunConfig::parse(text) {
        let again = RunConfig::parse(&cfg.serialize()).unwrap();
        assert_eq!(again, cfg);
    }
});
