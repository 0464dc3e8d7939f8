use clap::Parser;
use proptest::prelude::*;
use whirly_lab::{parse_set, parse_shorthand, Cli, RunConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn set_parsers_never_panic(text in ".{0,64}") {
        let _ = parse_set(&text);
        let _ = parse_shorthand(&text);
    }

    #[test]
    fn shorthand_like_strings_never_panic(
        level in "[0-9a-z]{0,3}",
        radius in "[-0-9.einf]{0,6}",
        center in proptest::option::of("[-0-9.,c]{0,8}"),
    ) {
        let text = match center {
            Some(c) => format!("disk:level{level}:r{radius}:{c}"),
            None => format!("disk:level{level}:r{radius}"),
        };
        let _ = parse_shorthand(&text);
    }

    #[test]
    fn valid_shorthand_round_trips(level in 0u32..6, radius in 0.01f64..10.0, x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let set = parse_shorthand(&format!("disk:level{level}:r{radius}:c{x},{y}")).unwrap();
        prop_assert_eq!(set.determination_level(), level);
        let again = parse_set(&set.to_json()).unwrap();
        prop_assert_eq!(again.to_json(), set.to_json());
    }

    #[test]
    fn config_json_never_panics(text in ".{0,96}") {
        let _ = RunConfig::from_json(&text);
    }

    #[test]
    fn argv_never_panics(args in proptest::collection::vec("[-a-z0-9.:=]{0,12}", 0..6)) {
        let _ = Cli::try_parse_from(std::iter::once("whirly-lab".to_owned()).chain(args));
    }
}

#[test]
fn config_round_trips_through_json() {
    let cfg =
        RunConfig::from_json(r#"{"command":"whirly-search","set":"disk:level0:r1","epsilon":0.5,"max-depth":12}"#)
            .unwrap();
    let again = RunConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(cfg, again);
    assert!(RunConfig::from_json(r#"{"command":"nope"}"#).is_err());
    assert!(RunConfig::from_json(r#"{"max_depth":3}"#).is_err());
}
