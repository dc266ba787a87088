#![no_main]

use libfuzzer_sys::fuzz_target;
use snowflake::filling::FillRequest;
use snowflake::vertex_group::GroupParams;

/// Keeps fillings small enough to finish quickly.
fn small(req: &FillRequest) -> bool {
    let limit = 1u32 << 14;
    let fits = |n: &num_bigint::BigInt| n.magnitude().bits() < 15 && n.magnitude() < &limit.into();
    req.lambda <= 16
        && req.polygon.d <= 64
        && fits(&req.e)
        && req.polygon.exponents.iter().all(fits)
        && req.polygon.corners.iter().all(|c| fits(&c.u) && fits(&c.v))
        && req
            .subdivisions
            .iter()
            .all(|s| s.exponents.iter().all(fits))
        && req.polygon.corner_paths.iter().all(|w| w.len() < 256)
}

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(req) = FillRequest::from_json(s) else {
        return;
    };
    if !small(&req) {
        return;
    }
    let p = GroupParams::new(6).unwrap();
    if let Ok((result, _)) = req.report(&p) {
        result
            .diagram
            .validate()
            .expect("reported diagrams are valid");
    }
});
