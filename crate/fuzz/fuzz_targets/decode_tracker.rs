#![no_main]

use libfuzzer_sys::fuzz_target;
use swarm_rendezvous::net::{TrackerMsg, WireMessage};

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = TrackerMsg::decode(data) {
        // anything accepted must re-encode to something that decodes the same
        let again = TrackerMsg::decode(&m.encode()).expect("re-encoded message decodes");
        assert_eq!(again, m);
    }
});
