//! Closed forms checked against brute-force oracles, with the values the
//! oracles produced frozen as regressions.

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use snowflake::distortion;
use snowflake::hnn_group::{bfs_ball, pair_dist, GroupElement, DEFAULT_STATE_BUDGET};
use snowflake::vertex_group::{Flavor, GroupParams, HPoint};

fn params(l: i64) -> GroupParams {
    GroupParams::new(l).unwrap()
}

/// Least length of the recursive path for `a^m` over every digit
/// expansion with digits in `[-L, L]` and at most `levels` levels.
fn digit_oracle(l: i64, m: i64, levels: u32) -> u64 {
    fn go(l: i64, rest: i64, level: u32, levels: u32) -> Option<u64> {
        if rest == 0 {
            return Some(0);
        }
        let mut best = None;
        if rest.abs() <= l / 2 + 2 {
            best = Some(rest.unsigned_abs() << level);
        }
        if level + 1 < levels {
            for d in -l..=l {
                if (rest - d) % l == 0 && rest - d != 0 {
                    if let Some(up) = go(l, (rest - d) / l, level + 1, levels) {
                        // each level up costs four stable letters at this scale
                        let cost = (d.unsigned_abs() << level) + (4 << level) + up;
                        best = Some(best.map_or(cost, |b: u64| b.min(cost)));
                    }
                }
            }
        }
        best
    }
    go(l, m, 0, levels).expect("some expansion exists")
}

#[test]
fn a_powers_match_ball_distances() {
    for l in [6i64, 8, 10] {
        let p = params(l);
        let radius = 8;
        let ball = bfs_ball(&p, radius, DEFAULT_STATE_BUDGET).unwrap();
        for m in 0..=2000i64 {
            let g = GroupElement::from_h(HPoint::a(m));
            let d = p.dist_a_power_i64(m);
            match ball.distance(&g) {
                Some(b) => assert_eq!(d, b as u64, "L={l} m={m}"),
                None => assert!(d > radius as u64, "L={l} m={m}: {d} but outside the ball"),
            }
        }
    }
}

#[test]
fn a_powers_match_digit_oracle() {
    for l in [6i64, 10] {
        let p = params(l);
        for m in 1..=3000 {
            assert_eq!(p.dist_a_power_i64(m), digit_oracle(l, m, 6), "L={l} m={m}");
        }
    }
}

#[test]
fn frozen_values() {
    let p10 = params(10);
    // oracle: ball distances above
    assert_eq!(p10.dist_a_power_i64(9), 7);
    assert_eq!(p10.dist_a_power_i64(10), 6);
    let p6 = params(6);
    assert_eq!(p6.dist_a_power_i64(36), 16);
    // oracle: digit_oracle(6, 58, 6)
    assert_eq!(digit_oracle(6, 58, 6), 26);
    assert_eq!(p6.dist_a_power(&BigInt::from(58)), BigUint::from(26u8));
}

#[test]
fn ball_sphere_sizes() {
    let ball = bfs_ball(&params(6), 6, DEFAULT_STATE_BUDGET).unwrap();
    assert_eq!(ball.sphere_sizes(), vec![1, 6, 30, 150, 734, 3574, 17366]);
}

#[test]
fn plane_metric_matches_pair_search() {
    let p = params(6);
    for u in -40i64..=40 {
        for v in -3i64..=3 {
            let h = HPoint::new(u, v);
            let d = p.dist_h(&h).to_u32().unwrap();
            if d > 11 {
                continue;
            }
            let got = pair_dist(
                &p,
                &GroupElement::identity(),
                &GroupElement::from_h(h.clone()),
                d,
                DEFAULT_STATE_BUDGET,
            )
            .unwrap();
            assert_eq!(got, Some(d), "{h}");
        }
    }
}

#[test]
fn ag_ratio_regression() {
    let p = params(6);
    let scan = distortion::ag_ratio_scan(&p, -200..=200).unwrap();
    // direct oracle over the same square
    let mut best = 0.0f64;
    for l in -200i64..=200 {
        for m in -200i64..=200 {
            let whole = p.dist_h(&HPoint::new(l, m)).to_f64().unwrap();
            if whole > 0.0 {
                let parts = p.dist_a_power_i64(l) as f64
                    + p.dist_power(Flavor::X, &BigInt::from(m)).to_f64().unwrap();
                best = best.max(parts / whole);
            }
        }
    }
    assert_eq!(scan.max_ratio, best);
    assert_eq!(scan.max_ratio, 3.0);
    assert_eq!(scan.argmax, (-198, 33));
}

#[test]
fn x_and_y_powers_change_by_one() {
    for l in [6i64, 10] {
        let p = params(l);
        for g in [Flavor::X, Flavor::Y] {
            let mut prev = p.dist_power(g, &BigInt::from(1));
            for m in 2..=100_000i64 {
                let next = p.dist_power(g, &BigInt::from(m));
                let diff = if next > prev {
                    &next - &prev
                } else {
                    &prev - &next
                };
                assert_eq!(diff, BigUint::from(1u8), "L={l} {g}^{m}");
                prev = next;
            }
            let r = distortion::check_bounds(&p, g, 1_000_000);
            assert!(r.holds(), "{g}: {:?}", r.violations.first());
        }
    }
}

#[test]
fn mn_closed_form_all_l() {
    for l in [6i64, 8, 10, 12] {
        let p = params(l);
        for row in distortion::mn_sequence(&p, 25) {
            assert_eq!(row.dist, row.predicted, "L={l} n={}", row.n);
        }
    }
}
