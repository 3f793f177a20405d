#![no_main]

use libfuzzer_sys::fuzz_target;
use pl_core::io::parse_mode_table;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_mode_table(text);
    }
});
