#![no_main]
use libfuzzer_sys::fuzz_target;

use kg_core::benchmark::ModelFit;

fuzz_target!(|data: &[u8]| {
    if let Ok(fit) = serde_json::from_slice::<ModelFit>(data) {
        for p in [1, 2, 1024] {
            let _ = fit.predict(p);
        }
        let _ = fit.optimal_processes();
    }
});
