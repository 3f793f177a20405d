#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use pl_cli::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = RunConfig::parse(text, Path::new("/base")) {
        let _ = c.emitter.resolve();
    }
});
