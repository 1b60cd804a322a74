#![no_main]

use ldpc2d::channel::ChannelMatrix;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(h) = ChannelMatrix::parse(text) {
        let again = ChannelMatrix::parse(&h.to_text()).unwrap();
        assert_eq!(again, h);
    }
});
