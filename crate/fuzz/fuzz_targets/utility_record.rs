#![no_main]

use drsub_core::{Objective, Utility};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let parsed = serde_json::from_slice::<Utility>(data)
        .ok()
        .or_else(|| std::str::from_utf8(data).ok().and_then(|t| toml::from_str::<Utility>(t).ok()));
    let Some(u) = parsed else { return };
    let n = u.dim();
    if n > 64 {
        return;
    }
    for x in [vec![0.0; n], vec![1.0; n]] {
        let _ = u.value(&x);
        let _ = u.gradient(&x);
    }
    let _ = u.value(&vec![0.0; n + 1]);
});
