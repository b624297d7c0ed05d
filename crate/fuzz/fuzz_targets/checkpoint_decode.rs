#![no_main]
use libfuzzer_sys::fuzz_target;

use kg_core::checkpoint::{decode, encode_checkpoint};

fuzz_target!(|data: &[u8]| {
    if let Ok(c) = decode(data) {
        assert_eq!(encode_checkpoint(&c), data);
    }
});
