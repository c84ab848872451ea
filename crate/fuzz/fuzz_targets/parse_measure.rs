//! Measure parser must never panic, and anything it accepts must survive a
//! serialize/parse round trip.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = framelab::json::parse_measure(text) {
            if let Ok(json) = framelab::json::measure_to_json(&m) {
                framelab::json::parse_measure(&json).expect("own output must re-parse");
            }
        }
    }
});
