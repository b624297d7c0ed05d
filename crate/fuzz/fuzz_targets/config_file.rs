#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(c) = kg_cli::parse_config(s) {
            assert!(c.len() <= s.lines().count());
        }
    }
});
