#![no_main]

use drsub_bench::movielens::parse_ratings;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = parse_ratings(data) {
        assert!(rows.iter().all(|r| (1..=5).contains(&r.rating)));
    }
});
