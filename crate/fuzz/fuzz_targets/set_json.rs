#![no_main]
use libfuzzer_sys::fuzz_target;
use whirly_core::BorelSet;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(set) = BorelSet::from_json(text) {
        let json = set.to_json();
        let back = BorelSet::from_json(&json).expect("serialized sets reparse");
        assert_eq!(back.to_json(), json);
        assert!(set.determination_level() <= whirly_core::tree::MAX_DEPTH);
    }
});
