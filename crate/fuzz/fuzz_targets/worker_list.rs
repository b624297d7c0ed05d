#![no_main]
use libfuzzer_sys::fuzz_target;

use kg_cli::values::{parse_worker_list, MAX_WORKER_LIST};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(list) = parse_worker_list(s) {
            assert!(!list.is_empty() && list.len() <= MAX_WORKER_LIST);
            assert!(list[0] >= 1 && list.windows(2).all(|w| w[0] < w[1]));
        }
    }
});
