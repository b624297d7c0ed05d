#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = kg_core::benchmark::read_records(data) {
        for r in &records {
            assert!(r.cores >= 1 && r.time_seconds > 0.0);
            let _ = r.total_bandwidth_gbs();
        }
        if !records.is_empty() {
            let ranked = kg_core::benchmark::rank(&records).unwrap();
            assert!(ranked.windows(2).all(|w| w[0].best.time_seconds <= w[1].best.time_seconds));
        }
    }
});
