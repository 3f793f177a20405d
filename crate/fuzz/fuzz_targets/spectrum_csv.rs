#![no_main]

use libfuzzer_sys::fuzz_target;
use pl_core::io::{format_spectrum, read_spectrum};
use pl_core::spectra::Normalization;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for norm in [Normalization::Raw, Normalization::Area2Pi] {
        if let Ok(s) = read_spectrum(text, norm) {
            // accepted input must survive a write/read cycle unchanged
            let again = read_spectrum(&format_spectrum(&s), Normalization::Raw).expect("reparse");
            assert_eq!(again.values(), s.values());
        }
    }
});
