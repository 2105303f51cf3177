#![no_main]

use dendriform_fliess::dendriform::parse_dendriform_expr;
use dendriform_fliess::tree::Alphabet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let alphabet = Alphabet::new(4);
    if let Ok(p) = parse_dendriform_expr(text, &alphabet) {
        let again = parse_dendriform_expr(&p.to_string(), &alphabet).expect("display reparses");
        assert_eq!(again, p);
    }
});
