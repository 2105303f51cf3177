#![no_main]

use dendriform_fliess::dendriform::{delta_to_tree, parse_parenthesis_word};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(word) = parse_parenthesis_word(text) {
        // Accepted words denote a tree, and that tree prints back to an accepted word.
        let tree = delta_to_tree(&word);
        let again = parse_parenthesis_word(&tree.to_parenthesis_word()).expect("printed word parses");
        assert_eq!(delta_to_tree(&again), tree);
    }
});
