#![no_main]

use grappa::bundled::bundled;
use grappa::chabauty::{mu_f, EndomorphismData};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let g = bundled("genus_banana").unwrap();
    if let Ok(f) = EndomorphismData::parse(&g, text) {
        let m = mu_f(&g, &f).expect("parsed data has the right shape");
        assert_eq!(m.total_mass(&g), f.total_trace() / grappa::Q::from_integer(2.into()));
    }
});
