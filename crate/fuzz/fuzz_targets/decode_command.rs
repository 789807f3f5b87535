#![no_main]

use libfuzzer_sys::fuzz_target;
use swarm_rendezvous::net::{CommandMsg, WireMessage};

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = CommandMsg::decode(data) {
        // anything accepted must re-encode to something that decodes the same
        let again = CommandMsg::decode(&m.encode()).expect("re-encoded message decodes");
        assert_eq!(again, m);
    }
});
