//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

mod common;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snowflake::distortion;
use snowflake::filling::{self, CentralRegion, HnnDualTree, PolygonKind};
use snowflake::hnn_group::{
    self, invert, multiply, reduce_word, reduce_word_leftwards, GroupElement,
};
use snowflake::paths::{self, Letter, PathWord};
use snowflake::vertex_group::{Flavor, GroupParams, HPoint};
use std::time::{Duration, Instant};

fn params(l: i64) -> GroupParams {
    GroupParams::new(l).unwrap()
}

/// Returns `Err` with the first failure.
type Check = Result<String, String>;

type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_a_power_lengths() -> Check {
    let start = Instant::now();
    for l in [6i64, 8, 10, 12] {
        let p = params(l);
        for n in 1..=20u32 {
            let m = num_traits::pow(BigInt::from(l), n as usize);
            let want = BigUint::from(5u32) * (BigUint::one() << n) - 4u32;
            let got = p.dist_a_power(&m);
            ensure(got == want, || {
                format!("L={l} n={n}: got {got}, want {want}")
            })?;
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(1), || format!("took {t:?}"))?;
    Ok(format!("80 values in {t:?}"))
}

fn c2_ball_matches_plane_metric() -> Check {
    let p = params(6);
    let ball = hnn_group::bfs_ball(&p, 10, 16_000_000).map_err(|e| e.to_string())?;
    let mut in_h = 0;
    for (g, d) in ball.iter() {
        ensure(u32::from(g.parity()) == d % 2, || {
            format!("parity of {g} disagrees with distance {d}")
        })?;
        if let Some(h) = g.as_h() {
            in_h += 1;
            let want = p.dist_h(h);
            ensure(want == BigUint::from(d), || {
                format!("{g}: ball {d}, dist_h {want}")
            })?;
        }
    }
    Ok(format!("{} elements, {in_h} in H", ball.len()))
}

fn c3_geodesic_loops() -> Check {
    let p = params(6);
    for (n, len) in [(1u32, 12u64), (2, 32)] {
        let lp = paths::snowflake_loop(&p, n).map_err(|e| e.to_string())?;
        ensure(lp.length(&p) == len, || {
            format!("loop {n} has length {}", lp.length(&p))
        })?;
        let ok = paths::verify_geodesic_loop(&p, &lp, (len / 2) as u32, 20_000_000)
            .map_err(|e| e.to_string())?;
        ensure(ok, || format!("loop {n} is not geodesic"))?;
    }
    Ok("depths 1 and 2 geodesic".into())
}

fn c4_distortion_bounds() -> Check {
    let start = Instant::now();
    let mut summary = Vec::new();
    for l in [6i64, 10] {
        let r = distortion::check_bounds(&params(l), Flavor::A, 1_000_000);
        ensure(r.holds(), || {
            format!("L={l}: violation at {:?}", r.violations.first())
        })?;
        summary.push(format!(
            "L={l} ratio in [{:.3}, {:.3}] < {}",
            r.min_ratio, r.max_ratio, r.constant
        ));
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(120), || format!("took {t:?}"))?;
    Ok(summary.join("; "))
}

fn c5_mn_sequence() -> Check {
    for l in [6i64, 10] {
        let p = params(l);
        for row in distortion::mn_sequence(&p, 25) {
            ensure(row.dist == row.predicted, || {
                format!("L={l} n={}: {} vs {}", row.n, row.dist, row.predicted)
            })?;
        }
        let r40 = distortion::mn_sequence(&p, 40)[40].ratio;
        let lim = distortion::mn_ratio_limit(&p);
        ensure((r40 - lim).abs() < 1e-3, || {
            format!("L={l}: ratio {r40} vs limit {lim}")
        })?;
    }
    for l in [6i64, 10, 12] {
        let g = distortion::gap_checks(&params(l));
        ensure(g.spread_holds, || {
            format!("L={l}: {} <= {}", g.spread, g.spread_threshold)
        })?;
    }
    Ok("closed form exact to n=25, limits agree".into())
}

fn c6_geodesic_expressions() -> Check {
    let p = params(10);
    for m in 1..=100_000i64 {
        let mb = BigInt::from(m);
        let e = p.geodesic_expression(&mb).map_err(|e| e.to_string())?;
        let dist = p.dist_a_power(&mb);
        ensure(e.path_length() == dist, || {
            format!("m={m}: expression length {} vs {dist}", e.path_length())
        })?;
        ensure(e.digits_in_range(), || {
            format!("m={m}: digits {:?} out of range", e.digits)
        })?;
        ensure(e.value() == mb, || {
            format!("m={m}: digits evaluate to {}", e.value())
        })?;
        let w = p.geodesic_word_a_power(&mb);
        ensure(w.length(&p) == dist.to_u64().unwrap(), || {
            format!("m={m}: word length")
        })?;
        let g = reduce_word(&p, &w);
        ensure(g == GroupElement::from_h(HPoint::a(m)), || {
            format!("m={m}: word reduces to {g}")
        })?;
    }
    Ok("m = 1..=100000".into())
}

fn c7_approximate_polygons() -> Check {
    let p = params(6);
    let l = p.l() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut notes = Vec::new();
    for kind in [
        PolygonKind::Bigon,
        PolygonKind::Triangle,
        PolygonKind::Diamond,
    ] {
        let mut worst_mesh = 0.0f64;
        for i in 0..200 {
            let d = rng.gen_range(0..=5);
            let e = rng.gen_range(l..=l * l);
            let lambda = rng.gen_range(1..=2 * l as usize);
            let req = common::random_request(&mut rng, &p, kind, d, e, lambda);
            let (_, r) = req.report(&p).map_err(|e| format!("{kind:?} #{i}: {e}"))?;
            ensure(r.holds(), || {
                format!("{kind:?} #{i}: {}", serde_json::to_string(&r).unwrap())
            })?;
            worst_mesh = worst_mesh.max(r.mesh as f64 / r.bounds.mesh);
        }
        notes.push(format!("{kind:?} mesh/bound <= {worst_mesh:.3}"));
    }
    Ok(notes.join("; "))
}

fn c8_snowflake_subdivision() -> Check {
    let p = params(6);
    let mut counts = Vec::new();
    for n in 4..=7u32 {
        let dg = filling::subdivide_snowflake(&p, n, 6).map_err(|e| e.to_string())?;
        dg.validate().map_err(|e| format!("depth {n}: {e}"))?;
        let half = paths::snowflake_loop(&p, n).unwrap().length(&p) / 2;
        ensure(dg.mesh() <= half, || {
            format!("depth {n}: mesh {} > {half}", dg.mesh())
        })?;
        counts.push(dg.area());
    }
    ensure(counts.windows(2).all(|w| w[0] == w[1]), || {
        format!("counts vary: {counts:?}")
    })?;
    ensure(counts[0] <= 10 * 6usize.pow(3), || {
        format!("count {} too large", counts[0])
    })?;
    Ok(format!("{} cells at every depth", counts[0]))
}

/// Boundary length on each side of a removed point, by graph search.
fn brute_f(
    tree: &HnnDualTree,
    removed_node: Option<usize>,
    removed_edge: Option<(usize, f64)>,
) -> f64 {
    let n = tree.nodes.len();
    let mut comp = vec![usize::MAX; n];
    let mut sums: Vec<f64> = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX || Some(s) == removed_node {
            continue;
        }
        let id = sums.len();
        sums.push(0.0);
        let mut stack = vec![s];
        comp[s] = id;
        while let Some(x) = stack.pop() {
            sums[id] += tree.nodes[x].arc_length as f64;
            for (ei, e) in tree.edges.iter().enumerate() {
                if removed_edge.map(|(r, _)| r) == Some(ei) {
                    continue;
                }
                let y = if e.u == x {
                    e.v
                } else if e.v == x {
                    e.u
                } else {
                    continue;
                };
                if Some(y) == removed_node {
                    sums[id] += e.length as f64;
                    continue;
                }
                if comp[y] == usize::MAX {
                    comp[y] = id;
                    sums[id] += e.length as f64;
                    stack.push(y);
                }
            }
        }
    }
    if let Some((ei, t)) = removed_edge {
        let e = &tree.edges[ei];
        sums[comp[e.u]] += t * e.length as f64;
        sums[comp[e.v]] += (1.0 - t) * e.length as f64;
    }
    let total = tree.total_length() as f64;
    sums.into_iter().fold(0.0, f64::max) - total / 2.0
}

fn c9_central_region() -> Check {
    let p = params(6);
    for n in 1..=7u32 {
        let tree = filling::snowflake_hnn_tree(&p, n).map_err(|e| e.to_string())?;
        let region = filling::find_central_region(&tree).map_err(|e| format!("depth {n}: {e}"))?;
        let CentralRegion::Vertex { node, f } = region else {
            return Err(format!(
                "depth {n}: central region {region:?} is not a vertex"
            ));
        };
        ensure(node == 0 && tree.nodes[0].label == "1 H", || {
            format!("depth {n}: node {node} is not the base coset")
        })?;
        ensure(f <= 0.0, || format!("depth {n}: f = {f}"))?;
        let mut hits = Vec::new();
        for v in 0..tree.nodes.len() {
            if brute_f(&tree, Some(v), None) <= 0.0 {
                hits.push(format!("vertex {v}"));
            }
        }
        for ei in 0..tree.edges.len() {
            if brute_f(&tree, None, Some((ei, 0.5))) <= 0.0 {
                hits.push(format!("edge {ei}"));
            }
        }
        ensure(hits == ["vertex 0"], || {
            format!("depth {n}: f <= 0 at {hits:?}")
        })?;
    }
    Ok("base vertex, unique for depths 1..=7".into())
}

fn random_word(rng: &mut ChaCha8Rng) -> PathWord {
    const LETTERS: [Letter; 10] = [
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
    ];
    let n = rng.gen_range(0..=30);
    PathWord::from_letters(
        (0..n)
            .map(|_| LETTERS[rng.gen_range(0..LETTERS.len())])
            .collect(),
    )
}

fn c10_normal_forms() -> Check {
    let p = params(6);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..10_000 {
        let (w1, w2, w3) = (
            random_word(&mut rng),
            random_word(&mut rng),
            random_word(&mut rng),
        );
        let g = reduce_word(&p, &w1);
        ensure(g == reduce_word_leftwards(&p, &w1), || {
            format!("#{i}: {w1} reduces two ways")
        })?;
        ensure(g.is_normal_form(&p), || format!("#{i}: {g} is not normal"))?;
        ensure(multiply(&p, &g, &invert(&p, &g)).is_identity(), || {
            format!("#{i}: g g^-1 != 1 for {g}")
        })?;
        let (h, k) = (reduce_word(&p, &w2), reduce_word(&p, &w3));
        let left = multiply(&p, &multiply(&p, &g, &h), &k);
        let right = multiply(&p, &g, &multiply(&p, &h, &k));
        ensure(left == right, || {
            format!("#{i}: associativity fails for {w1} | {w2} | {w3}")
        })?;
        ensure(left == reduce_word(&p, &w1.concat(&w2).concat(&w3)), || {
            format!("#{i}: product disagrees with concatenation")
        })?;
    }
    Ok("10000 samples".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("a-power lengths 5*2^n - 4", c1_a_power_lengths),
        (
            "BFS ball agrees with dist_h and parity",
            c2_ball_matches_plane_metric,
        ),
        ("snowflake loops are geodesic", c3_geodesic_loops),
        ("distortion bounds to 10^6", c4_distortion_bounds),
        ("m_n closed form and limits", c5_mn_sequence),
        ("geodesic expressions", c6_geodesic_expressions),
        ("approximate polygon fillings", c7_approximate_polygons),
        ("snowflake subdivision", c8_snowflake_subdivision),
        ("central region", c9_central_region),
        ("normal forms", c10_normal_forms),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let t = start.elapsed();
        match outcome {
            Ok(note) => println!("criterion {:>2} PASS {name}: {note} ({t:.1?})", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL {name}: {why} ({t:.1?})", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
