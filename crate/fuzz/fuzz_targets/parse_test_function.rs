//! Test-function parser must never panic, and accepted functions must
//! evaluate without panicking at an in-range point.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(f) = framelab::json::parse_test_function(text) {
            let x = vec![0.5; f.dim()];
            let _ = f.eval(&x);
        }
    }
});
