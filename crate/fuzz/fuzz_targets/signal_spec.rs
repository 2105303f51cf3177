#![no_main]

use dendriform_fliess::signals::SignalSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    match SignalSpec::parse(text) {
        // Never touch the file system from the fuzzer.
        Ok(SignalSpec::Csv(_)) | Err(_) => {}
        Ok(spec) => {
            let _ = spec.build(1.0, 8);
        }
    }
});
