#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ps) = bandfmm::io::read_points(data) {
        assert_eq!(ps.coords().len(), ps.len() * ps.dim());
    }
});
