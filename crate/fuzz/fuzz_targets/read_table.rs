#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = bandfmm::io::read_table(data) {
        for name in t.header.clone() {
            let _ = t.f64_column(&name);
        }
    }
});
