#![no_main]

use ldpc2d::code::ParityCheckMatrix;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(pcm) = ParityCheckMatrix::from_alist_str(text) {
        let again = ParityCheckMatrix::from_alist_str(&pcm.to_alist_string()).unwrap();
        assert_eq!(again, pcm);
    }
});
