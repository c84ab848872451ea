//! Spectrum parser must never panic; accepted spectra must truncate and
//! serialize without panicking.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(s) = framelab::json::parse_spectrum(text) {
            let _ = s.truncate(16);
            let json = framelab::json::spectrum_to_json(&s).expect("serializes");
            framelab::json::parse_spectrum(&json).expect("own output must re-parse");
        }
    }
});
