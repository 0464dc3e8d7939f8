#![no_main]
use libfuzzer_sys::fuzz_target;
use whirly_core::LevelVector;

fuzz_target!(|data: &[u8]| {
    if let Ok(v) = serde_json::from_slice::<LevelVector>(data) {
        assert_eq!(v.entries().len(), 1usize << v.level());
        let back: LevelVector = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(back, v);
    }
});
