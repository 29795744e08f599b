#![no_main]

use grappa::ReductionGraph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = ReductionGraph::parse(text) {
        // Accepted graphs survive a round trip unchanged.
        let again = ReductionGraph::parse(&g.to_json()).expect("serialized graph parses");
        assert_eq!(again.to_json(), g.to_json());
        let _ = g.stability();
        let _ = g.invariants();
    }
});
