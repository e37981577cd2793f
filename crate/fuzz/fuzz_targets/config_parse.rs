#![no_main]
use libfuzzer_sys::fuzz_target;

use ftsim::{ExperimentConfig, RawConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if RawConfig::parse(text).is_err() {
        return;
    }
    // anything accepted must survive a trip through its canonical form
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        let again = ExperimentConfig::parse(&cfg.canonical).expect("canonical form parses");
        assert_eq!(again.fingerprint(), cfg.fingerprint());
    }
});
