//! Invariants under random inputs.

mod common;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use snowflake::distortion;
use snowflake::filling::{
    self, find_central_region, CentralRegion, HnnDualTree, PolygonKind, Subdivision, TreeEdge,
    TreeNode,
};
use snowflake::hnn_group::{reduce_word, GroupElement};
use snowflake::paths::{Letter, PathWord};
use snowflake::vertex_group::{GroupParams, HPoint};

fn p6() -> GroupParams {
    GroupParams::new(6).unwrap()
}

fn letter() -> impl Strategy<Value = Letter> {
    prop::sample::select(vec![
        Letter::A,
        Letter::AInv,
        Letter::S,
        Letter::SInv,
        Letter::T,
        Letter::TInv,
        Letter::X,
        Letter::XInv,
        Letter::Y,
        Letter::YInv,
    ])
}

fn word(max: usize) -> impl Strategy<Value = PathWord> {
    prop::collection::vec(letter(), 0..max).prop_map(PathWord::from_letters)
}

fn point() -> impl Strategy<Value = HPoint> {
    (-5000i64..5000, -500i64..500).prop_map(|(u, v)| HPoint::new(u, v))
}

proptest! {
    #[test]
    fn words_print_and_parse_back(w in word(40)) {
        let back: PathWord = w.to_string().parse().unwrap();
        prop_assert_eq!(back, w);
    }

    #[test]
    fn encoding_round_trips(w in word(30)) {
        let p = p6();
        let g = reduce_word(&p, &w);
        prop_assert_eq!(GroupElement::decode(&p, &g.encode()).unwrap(), g);
    }

    #[test]
    fn relators_reduce_away(w1 in word(15), w2 in word(15), which in 0usize..3) {
        let p = p6();
        let relator: PathWord = ["s a s^-1 x^-1", "t a t^-1 y^-1", "a^6 y^-1 x^-1"][which].parse().unwrap();
        let plain = w1.concat(&w2);
        let padded = w1.concat(&relator).concat(&w2);
        prop_assert_eq!(reduce_word(&p, &plain), reduce_word(&p, &padded));
    }

    #[test]
    fn plane_geodesics_are_geodesic(h in point()) {
        let p = p6();
        let w = p.geodesic_word_h(&h);
        prop_assert_eq!(reduce_word(&p, &w), GroupElement::from_h(h.clone()));
        prop_assert_eq!(BigInt::from(w.length(&p)), BigInt::from(p.dist_h(&h)));
    }

    #[test]
    fn plane_metric_is_a_metric(g in point(), h in point()) {
        let p = p6();
        let gh = p.dist_h(&(&h - &g));
        prop_assert_eq!(&gh, &p.dist_h(&(&g - &h)));
        prop_assert!(gh <= p.dist_h(&g) + p.dist_h(&h));
    }

    #[test]
    fn holder_inequalities(samples in prop::collection::vec(0.0f64..1e6, 1..20)) {
        prop_assert!(distortion::reverse_holder_check(&p6(), &samples).unwrap());
    }

    #[test]
    fn even_subdivisions_check(total in -5000i64..5000, k in 1usize..20) {
        let t = BigInt::from(total);
        let s = Subdivision::even(&t, k);
        let e = s.max_abs();
        prop_assert!(s.check(&t, k, &e).is_ok());
        prop_assert_eq!(s.reversed().reversed(), s.clone());
        prop_assert_eq!(s.reversed().total(), -t);
    }

    #[test]
    fn fillings_are_valid(seed in any::<u64>(), which in 0usize..3, d in 0u64..=5) {
        let p = p6();
        let kind = [PolygonKind::Bigon, PolygonKind::Triangle, PolygonKind::Diamond][which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let req = common::random_request(&mut rng, &p, kind, d, 36, 12);
        let (res, report) = req.report(&p).unwrap();
        prop_assert!(report.holds());
        let boundary = reduce_word(&p, &res.diagram.boundary_word());
        prop_assert!(boundary.is_identity());
        if let Some(t) = res.true_polygon {
            let bound = if kind == PolygonKind::Triangle { 2 * d + 6 } else { d + 9 };
            prop_assert!(t.max_gap() <= bound);
        }
    }

    #[test]
    fn central_region_is_unique(shape in prop::collection::vec((0usize..1000, 0u64..8, 0u64..5), 0..25), root in 0u64..8) {
        let mut nodes = vec![TreeNode { arc_length: root, label: String::new() }];
        let mut edges = Vec::new();
        for (i, &(parent, arc, len)) in shape.iter().enumerate() {
            nodes.push(TreeNode { arc_length: arc, label: String::new() });
            edges.push(TreeEdge { u: parent % (i + 1), v: i + 1, length: len });
        }
        let tree = HnnDualTree { nodes, edges };
        prop_assume!(tree.total_length() > 0);
        match find_central_region(&tree) {
            Ok(CentralRegion::Vertex { node, f }) => {
                prop_assert!(f <= 0.0);
                prop_assert_eq!(f, tree.f_at_vertex(node));
            }
            Ok(CentralRegion::Edge { edge, position, f, .. }) => {
                prop_assert!(position > 0.0 && position < 1.0);
                prop_assert!(f.abs() < 1e-9);
                prop_assert!(tree.f_on_edge(edge, position).abs() < 1e-9);
            }
            // zero-length edges can tie two vertices; then both must be central
            Err(_) => {
                let hits = (0..tree.nodes.len()).filter(|&v| tree.f_at_vertex(v) <= 0.0).count();
                prop_assert!(hits != 1);
            }
        }
    }
}

#[test]
fn area_budget_counts_shells() {
    let p = p6();
    assert_eq!(filling::cap_shells(&p, 1.0, 1.0).unwrap(), 0);
    let n = filling::cap_shells(&p, 1e3, 10.0).unwrap();
    let x = (1e3 * 10f64.powf(p.alpha()) / 6.0).ln() / 2f64.ln();
    assert_eq!(n, x.ceil() as u32);
    let b = filling::area_budget(&7u8.into(), &1u8.into(), &2u8.into(), 3);
    assert_eq!(b.to_u64().unwrap(), 7 + 4 * 3 * 7 + 32);
}
