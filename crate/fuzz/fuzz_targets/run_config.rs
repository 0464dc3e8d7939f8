#![no_main]
use libfuzzer_sys::fuzz_target;
use whirly_lab::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_json(text) {
        // Validation must reject or accept without sampling or panicking.
        let _ = whirly_lab::plan(&cfg);
        let again = RunConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
    }
});
