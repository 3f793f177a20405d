#![no_main]

use libfuzzer_sys::fuzz_target;
use pl_core::io::{format_saturation, read_saturation};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((p, c)) = read_saturation(text) {
        assert_eq!(read_saturation(&format_saturation(&p, &c)).expect("reparse"), (p, c));
    }
});
