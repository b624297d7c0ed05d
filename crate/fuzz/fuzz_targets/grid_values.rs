#![no_main]
use libfuzzer_sys::fuzz_target;

use kg_cli::values::{parse_lengths, parse_modes, parse_sizes};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(l) = parse_lengths(s) {
            assert!(l.iter().all(|v| v.is_finite() && *v > 0.0));
        }
        if let Ok(n) = parse_sizes(s) {
            assert!(n.iter().all(|v| *v >= 4 && v % 2 == 0));
        }
        let _ = parse_modes(s);
    }
});
