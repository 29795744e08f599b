#![no_main]

use grappa::bundled::bundled;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for name in ["loop", "ban3", "four_cycle"] {
        let g = bundled(name).unwrap();
        if let Ok(p) = g.parse_point(text) {
            let again = g.parse_point(&g.point_name(&p)).expect("point names parse");
            assert_eq!(again, p);
        }
    }
});
