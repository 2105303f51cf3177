#![no_main]

use dendriform_fliess::tree::PlanarTree;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = PlanarTree::parse_paren_string(text) {
        assert_eq!(PlanarTree::parse_paren_string(&t.to_paren_string()).unwrap(), t);
    }
});
