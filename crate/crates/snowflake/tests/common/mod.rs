//! Random approximate polygons for the filling tests.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;
use snowflake::filling::{ApproxPolygon, FillRequest, PolygonKind, Subdivision};
use snowflake::vertex_group::{Flavor, GroupParams, HPoint};

fn small_offset<R: Rng>(rng: &mut R, p: &GroupParams, d: u64) -> HPoint {
    loop {
        let h = HPoint::new(rng.gen_range(-8i64..=8), rng.gen_range(-2i64..=2));
        if p.dist_h(&h).to_u64().unwrap() <= d {
            return h;
        }
    }
}

/// `total` cut into at most `lambda` same-signed pieces of size at most `e`.
pub fn random_subdivision<R: Rng>(rng: &mut R, total: i64, lambda: usize, e: i64) -> Subdivision {
    let need = ((total.abs() + e - 1) / e).max(1) as usize;
    assert!(
        need <= lambda,
        "total {total} does not fit {lambda} pieces of {e}"
    );
    let k = rng.gen_range(need..=lambda);
    let mut pieces = vec![0i64; k];
    let mut left = total.abs();
    while left > 0 {
        let i = rng.gen_range(0..k);
        if pieces[i] < e {
            pieces[i] += 1;
            left -= 1;
        }
    }
    Subdivision::new(
        pieces
            .into_iter()
            .map(|x| BigInt::from(x * total.signum()))
            .collect(),
    )
}

fn valid(p: &GroupParams, poly: &ApproxPolygon) -> bool {
    poly.validate(p).is_ok()
}

/// A random D-approximate polygon with a subdivision of its given sides,
/// built by perturbing a true polygon. Pieces respect `e` and `lambda`.
pub fn random_request<R: Rng>(
    rng: &mut R,
    p: &GroupParams,
    kind: PolygonKind,
    d: u64,
    e: i64,
    lambda: usize,
) -> FillRequest {
    let l = p.l() as i64;
    loop {
        let base = HPoint::new(rng.gen_range(-50i64..=50), rng.gen_range(-10i64..=10));
        let jiggle = |rng: &mut R| rng.gen_range(-2i64..=2);
        let (poly, totals) = match kind {
            PolygonKind::Bigon => {
                let g = [Flavor::A, Flavor::X, Flavor::Y][rng.gen_range(0..3)];
                let m0 = rng.gen_range(-(lambda as i64) * e..=(lambda as i64) * e);
                let g1 = &(&base + &p.power(g, m0)) + &small_offset(rng, p, d);
                let m1 = -m0 + jiggle(rng);
                let poly = ApproxPolygon::bigon(g, [base.clone(), g1], [m0.into(), m1.into()], d);
                (poly, vec![m0])
            }
            PolygonKind::Triangle => {
                let max_n = lambda as i64 * e / l;
                let n = rng.gen_range(-max_n..=max_n);
                let g1 = &base + &HPoint::x(n);
                let g2 = &g1 + &p.y_power(n);
                let corners = [
                    &base + &small_offset(rng, p, d),
                    &g1 + &small_offset(rng, p, d),
                    &g2 + &small_offset(rng, p, d),
                ];
                let m2 = -l * n + jiggle(rng) * 3;
                let m2 = m2.clamp(-(lambda as i64) * e, lambda as i64 * e);
                let poly = ApproxPolygon::triangle(
                    corners,
                    [
                        (n + jiggle(rng)).into(),
                        (n + jiggle(rng)).into(),
                        m2.into(),
                    ],
                    d,
                );
                (poly, vec![m2])
            }
            PolygonKind::Diamond => {
                let bound = lambda as i64 * e;
                let (m, n) = (rng.gen_range(-bound..=bound), rng.gen_range(-bound..=bound));
                let h1 = &base + &HPoint::x(m);
                let g2 = &h1 + &p.y_power(n);
                let h2 = &g2 + &HPoint::x(-m);
                let corners = [
                    &base + &small_offset(rng, p, d),
                    &h1 + &small_offset(rng, p, d),
                    &g2 + &small_offset(rng, p, d),
                    &h2 + &small_offset(rng, p, d),
                ];
                let m0 = (m + jiggle(rng)).clamp(-bound, bound);
                let n0 = (n + jiggle(rng)).clamp(-bound, bound);
                let poly = ApproxPolygon::diamond(
                    corners,
                    [
                        m0.into(),
                        n0.into(),
                        (-m + jiggle(rng)).into(),
                        (-n + jiggle(rng)).into(),
                    ],
                    d,
                );
                (poly, vec![m0, n0])
            }
        };
        if !valid(p, &poly) {
            continue;
        }
        let subdivisions = totals
            .iter()
            .map(|&t| random_subdivision(rng, t, lambda, e))
            .collect();
        return FillRequest {
            polygon: poly,
            subdivisions,
            lambda,
            e: BigInt::from(e),
        };
    }
}
