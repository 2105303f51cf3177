#![no_main]

use dendriform_fliess::signals::{signal_norm, MatrixSignal};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(u) = MatrixSignal::read_csv(data) {
        let _ = signal_norm(&u);
        let text = u.to_csv_string().expect("accepted signal serializes");
        let back = MatrixSignal::read_csv(text.as_bytes()).expect("written CSV reads back");
        assert_eq!(back.m(), u.m());
        assert_eq!(back.dim(), u.dim());
    }
});
