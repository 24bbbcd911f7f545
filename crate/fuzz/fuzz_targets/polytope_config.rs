#![no_main]

use drsub_core::domain::{PolytopeDomain, PolytopeSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = toml::from_str::<PolytopeSpec>(text) else { return };
    let Ok(domain) = PolytopeDomain::try_from(spec) else { return };
    let n = domain.dim();
    if n > 64 {
        return;
    }
    let _ = domain.contains(&vec![0.0; n], 1e-9);
    let _ = domain.project(&vec![0.5; n]);
    let _ = domain.linear_maximize(&vec![1.0; n]);
});
