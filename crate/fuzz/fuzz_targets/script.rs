#![no_main]

use libfuzzer_sys::fuzz_target;
use purelab::script::{parse_script, run_script};

fuzz_target!(|data: &str| {
    if let Ok(lines) = parse_script(data) {
        let _ = run_script(&lines);
    }
});
