#![no_main]

use libfuzzer_sys::fuzz_target;
use pl_core::io::{format_g2, read_g2};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((tau, g)) = read_g2(text) {
        assert_eq!(read_g2(&format_g2(&tau, &g)).expect("reparse"), (tau, g));
    }
});
