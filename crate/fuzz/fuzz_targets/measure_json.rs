#![no_main]

use grappa::bundled::bundled;
use grappa::harmonic::Measure;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let g = bundled("four_cycle").unwrap();
    if let Ok(m) = Measure::parse(&g, text) {
        let again = Measure::parse(&g, &m.to_value(&g).to_string()).expect("serialized measure parses");
        assert_eq!(again, m);
        let _ = m.total_mass(&g);
    }
});
