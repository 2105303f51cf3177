#![no_main]

use dendriform_fliess::tree::Word;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(w) = Word::parse(text) {
        assert_eq!(Word::parse(&w.to_string()).unwrap(), w);
    }
});
