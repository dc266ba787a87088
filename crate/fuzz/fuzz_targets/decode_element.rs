#![no_main]

use libfuzzer_sys::fuzz_target;
use snowflake::hnn_group::GroupElement;
use snowflake::vertex_group::GroupParams;

fuzz_target!(|data: &[u8]| {
    let p = GroupParams::new(6).unwrap();
    if let Ok(g) = GroupElement::decode(&p, data) {
        assert!(g.is_normal_form(&p));
        assert_eq!(GroupElement::decode(&p, &g.encode()).unwrap(), g);
    }
});
