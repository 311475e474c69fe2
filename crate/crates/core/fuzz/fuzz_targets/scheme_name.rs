#![no_main]

use gfdm::metrics::parse_scheme_list;
use gfdm::Scheme;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(scheme) = text.parse::<Scheme>() {
        assert_eq!(scheme.label().parse::<Scheme>().ok(), Some(scheme));
    }
    let _ = parse_scheme_list(text);
});
