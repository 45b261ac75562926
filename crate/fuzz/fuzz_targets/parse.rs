#![no_main]

use libfuzzer_sys::fuzz_target;
use purelab::syntax::parse;

// Whatever parses must print back to the same tree.
fuzz_target!(|data: &str| {
    if let Ok(t) = parse(data) {
        let printed = t.to_string();
        assert_eq!(parse(&printed).as_ref(), Ok(&t), "{printed}");
    }
});
