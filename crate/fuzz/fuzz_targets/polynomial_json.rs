#![no_main]

use dendriform_fliess::dendriform::RationalPolynomial;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(value) = serde_json::from_slice::<serde_json::Value>(data) else {
        return;
    };
    if let Ok(p) = RationalPolynomial::from_json(&value) {
        assert_eq!(RationalPolynomial::from_json(&p.to_json()).unwrap(), p);
    }
});
