#![no_main]

use libfuzzer_sys::fuzz_target;
use snowflake::hnn_group::reduce_word;
use snowflake::paths::PathWord;
use snowflake::vertex_group::GroupParams;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(w) = s.parse::<PathWord>() else { return };
    // printing must give back the same word
    let again: PathWord = w.to_string().parse().expect("printed words parse");
    assert_eq!(again, w);
    if w.len() <= 4096 {
        let p = GroupParams::new(6).unwrap();
        let g = reduce_word(&p, &w);
        assert!(g.is_normal_form(&p));
    }
});
