#![no_main]
use libfuzzer_sys::fuzz_target;

use ftsim_core::double::{parse_jsonl, replay, to_jsonl};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(events) = parse_jsonl(text) else {
        return;
    };
    let written = to_jsonl(&events);
    assert_eq!(parse_jsonl(&written).expect("own output parses"), events);
    // replay may refuse an inconsistent history but must not panic
    if let Ok(state) = replay(8, &events) {
        assert_eq!(to_jsonl(state.events()), written);
    }
});
