#![no_main]

use blockmax::mc::parse_experiment_spec;
use blockmax::mc::spec::format_experiment_spec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(spec) = parse_experiment_spec(data) {
        let text = format_experiment_spec(&spec);
        assert_eq!(parse_experiment_spec(&text).expect("formatted spec parses"), spec);
    }
});
