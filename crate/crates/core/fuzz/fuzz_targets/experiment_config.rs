#![no_main]

use gfdm::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        // Whatever parses must survive a render round trip.
        let again = ExperimentConfig::parse(&cfg.render()).expect("rendered config reparses");
        assert_eq!(again, cfg);
        let _ = cfg.validate();
    }
});
