#![no_main]

use blockmax::io::{parse_series_csv, series_to_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(series) = parse_series_csv(data) {
        assert!(series.values().iter().all(|v| v.is_finite()));
        // anything accepted must survive a write/read cycle unchanged
        let again = parse_series_csv(&series_to_csv(&series)).expect("round trip parses");
        assert_eq!(again.values(), series.values());
        assert_eq!(again.dates(), series.dates());
    }
});
