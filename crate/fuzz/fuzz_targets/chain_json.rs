#![no_main]

use libfuzzer_sys::fuzz_target;
use pl_core::budget::chain_efficiency;
use pl_core::io::parse_chain_json;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = parse_chain_json(text) {
        let e = chain_efficiency(&c).expect("validated chain");
        assert!(e > 0.0 && e <= 1.0);
    }
});
