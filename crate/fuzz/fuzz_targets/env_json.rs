#![no_main]

use libfuzzer_sys::fuzz_target;
use purelab::oracle::EnvSpec;

fuzz_target!(|data: &str| {
    if let Ok(env) = EnvSpec::from_json(data) {
        // Instantiating the last pre-state touches every binding.
        let _ = env.instantiate(env.config_count() - 1);
    }
});
