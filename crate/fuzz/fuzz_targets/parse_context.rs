#![no_main]

use libfuzzer_sys::fuzz_target;
use purelab::syntax::{parse_context, plug, Term};

fuzz_target!(|data: &str| {
    if let Ok(c) = parse_context(data) {
        assert_eq!(plug(&c, &Term::Cst(true)).hole_count(), 0);
    }
});
