#![no_main]

use dendriform_fliess::tree::DecoratedTree;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(value) = serde_json::from_slice::<serde_json::Value>(data) else {
        return;
    };
    if let Ok(t) = DecoratedTree::from_json(&value) {
        assert_eq!(DecoratedTree::from_json(&t.to_json()).unwrap(), t);
    }
});
