#![no_main]

use libfuzzer_sys::fuzz_target;
use resolvent_lab::config::{parse_float_list, parse_range, parse_values, MAX_RANGE_POINTS};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(v) = parse_float_list(s) {
        assert!(!v.is_empty() && v.iter().all(|x| x.is_finite()));
    }
    if let Ok(v) = parse_range(s) {
        assert!(!v.is_empty() && v.len() <= MAX_RANGE_POINTS);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }
    let _ = parse_values(s);
});
