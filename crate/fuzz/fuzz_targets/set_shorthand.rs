#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(set) = whirly_lab::parse_shorthand(text) {
            // Anything accepted must survive a JSON round trip.
            let json = set.to_json();
            let back = whirly_core::BorelSet::from_json(&json).expect("shorthand output reparses");
            assert_eq!(back.to_json(), json);
        }
    }
});
