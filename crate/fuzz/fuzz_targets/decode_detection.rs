#![no_main]

use libfuzzer_sys::fuzz_target;
use swarm_rendezvous::net::{DetectionMsg, WireMessage};

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = DetectionMsg::decode(data) {
        // anything accepted must re-encode to something that decodes the same
        let again = DetectionMsg::decode(&m.encode()).expect("re-encoded message decodes");
        assert_eq!(again, m);
    }
});
