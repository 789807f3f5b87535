#![no_main]

use libfuzzer_sys::fuzz_target;
use swarm_rendezvous::sim::Scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(sc) = Scenario::from_toml_str(text) {
        Scenario::from_toml_str(&sc.to_toml_string()).expect("serialized scenario parses");
    }
});
