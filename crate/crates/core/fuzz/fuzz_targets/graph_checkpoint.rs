#![no_main]

use cogrowth::cayley::TruncatedGraph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|bytes: &[u8]| {
    if let Ok(graph) = TruncatedGraph::from_bytes(bytes) {
        let again = TruncatedGraph::from_bytes(&graph.to_bytes()).expect("re-encoded graph must load");
        assert_eq!(graph, again);
    }
});
