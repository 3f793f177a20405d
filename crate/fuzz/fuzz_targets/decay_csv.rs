#![no_main]

use libfuzzer_sys::fuzz_target;
use pl_core::dynamics::Irf;
use pl_core::io::{format_decay, read_decay};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = read_decay(text, Irf::default()) {
        let again = read_decay(&format_decay(&t), Irf::default()).expect("reparse");
        assert_eq!(again.counts(), t.counts());
    }
});
