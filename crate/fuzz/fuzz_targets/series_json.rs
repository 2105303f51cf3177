#![no_main]

use dendriform_fliess::operators::GeneratingSeries;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(value) = serde_json::from_slice::<serde_json::Value>(data) else {
        return;
    };
    if let Ok(c) = GeneratingSeries::from_json(&value, 2, 4) {
        let _ = c.to_json();
    }
});
