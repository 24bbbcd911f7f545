#![no_main]

use drsub_bench::movielens::parse_movies;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = parse_movies(data);
});
