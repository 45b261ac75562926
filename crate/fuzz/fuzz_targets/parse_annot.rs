#![no_main]

use libfuzzer_sys::fuzz_target;
use purelab::syntax::parse_annot;

fuzz_target!(|data: &str| {
    if let Ok(a) = parse_annot(data) {
        assert_eq!(parse_annot(&a.to_string()).as_ref(), Ok(&a));
    }
});
