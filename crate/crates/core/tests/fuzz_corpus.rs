//! Replays the fuzz corpus seeds through the parsers.

use std::fs;
use std::path::{Path, PathBuf};

use pl_core::budget::chain_efficiency;
use pl_core::dynamics::Irf;
use pl_core::io::*;
use pl_core::spectra::Normalization;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let t = fs::read_to_string(&p).unwrap();
            (p, t)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn csv_traces() {
    let mut accepted = 0;
    for (_, t) in seeds("spectrum_csv") {
        if let Ok(s) = read_spectrum(&t, Normalization::Raw) {
            assert_eq!(read_spectrum(&format_spectrum(&s), Normalization::Raw).unwrap().values(), s.values());
            accepted += 1;
        }
    }
    for (_, t) in seeds("decay_csv") {
        if let Ok(d) = read_decay(&t, Irf::default()) {
            assert_eq!(read_decay(&format_decay(&d), Irf::default()).unwrap().counts(), d.counts());
            accepted += 1;
        }
    }
    for (_, t) in seeds("g2_csv") {
        if let Ok((a, b)) = read_g2(&t) {
            assert_eq!(read_g2(&format_g2(&a, &b)).unwrap(), (a, b));
            accepted += 1;
        }
    }
    for (_, t) in seeds("saturation_csv") {
        if let Ok((a, b)) = read_saturation(&t) {
            assert_eq!(read_saturation(&format_saturation(&a, &b)).unwrap(), (a, b));
            accepted += 1;
        }
    }
    assert!(accepted >= 8);
}

#[test]
fn chains_and_tables() {
    let verdicts: Vec<bool> = seeds("chain_json")
        .iter()
        .map(|(_, t)| parse_chain_json(t).map(|c| chain_efficiency(&c).unwrap()).is_ok())
        .collect();
    // bad_eff, empty_stages, planar
    assert_eq!(verdicts, [false, false, true]);
    for (p, t) in seeds("mode_table") {
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        assert_eq!(parse_mode_table(&t).map(|r| r.len()).ok(), Some(if name == "shipped.csv" { 4 } else { 1 }), "{name}");
    }
    for (p, t) in seeds("stage_table") {
        assert!(parse_stage_table(&t).is_ok(), "{}", p.display());
    }
    for (p, t) in seeds("summary_table") {
        let shipped = p.ends_with("shipped.csv");
        assert_eq!(parse_summary_table(&t).is_ok(), shipped, "{}", p.display());
    }
}
