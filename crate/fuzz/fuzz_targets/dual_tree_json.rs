#![no_main]

use libfuzzer_sys::fuzz_target;
use snowflake::filling::{find_central_region, HnnDualTree};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(tree) = HnnDualTree::from_json(s) else {
        return;
    };
    if tree.nodes.len() > 2000 {
        return;
    }
    let _ = find_central_region(&tree);
    let _ = tree.to_dot();
});
