#![no_main]

use libfuzzer_sys::fuzz_target;
use resolvent_lab::CoefficientFunction;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(f) = s.parse::<CoefficientFunction>() {
        let again: CoefficientFunction = f.to_string().parse().expect("display output parses");
        assert_eq!(again, f);
    }
});
