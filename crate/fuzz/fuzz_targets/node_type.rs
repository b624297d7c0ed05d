#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Some((sockets, cores)) = kg_core::benchmark::parse_node_layout(s) {
            assert!(sockets >= 1 && cores >= 1);
        }
    }
});
