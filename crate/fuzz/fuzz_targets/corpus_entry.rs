#![no_main]

use libfuzzer_sys::fuzz_target;
use purelab::corpus::parse_entry;
use purelab::system::System;

fuzz_target!(|data: &str| {
    if let Ok(entry) = parse_entry(data) {
        for s in System::ALL {
            let _ = s.judgment(&entry.env, &entry.term);
        }
    }
});
