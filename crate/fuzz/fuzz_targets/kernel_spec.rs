#![no_main]

use bandfmm::RadialKernel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(k) = s.parse::<RadialKernel>() {
            if k.validate().is_ok() {
                let _ = k.eval(0.5);
            }
        }
    }
});
