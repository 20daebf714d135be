#![no_main]

use libfuzzer_sys::fuzz_target;
use resolvent_lab::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = RunConfig::from_text(s) {
        assert!(cfg.validate().is_ok());
        let _ = cfg.to_string();
    }
});
