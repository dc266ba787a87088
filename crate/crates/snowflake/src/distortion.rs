//! Distortion of the cyclic subgroups of H in G_L.
//!
//! `|g^m|` grows like `|m|^(1/alpha)`. Ratios are computed in `f64` as
//! `dist / 2^(log_L m)`; for `m` up to 10^6 the relative error stays far
//! below 1e-10. Big exponents go through [`ln_big`].

use crate::error::{invalid, Result};
use crate::vertex_group::{Flavor, GroupParams, HPoint};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::ops::RangeInclusive;

/// Slack allowed on floating ratios.
pub const RATIO_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistortionRow {
    pub m: u64,
    pub dist: u64,
    pub ratio: f64,
}

/// Natural logarithm of a positive big integer.
pub fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 64 {
        return n.to_u64().expect("fits").to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().expect("64 bits") as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `|m|^(1/alpha)` as `2^(log_L |m|)`.
pub fn root_alpha(p: &GroupParams, m: &BigUint) -> f64 {
    (ln_big(m) / (p.l() as f64).ln()).exp2()
}

/// `dist / |m|^(1/alpha)`, computed through logarithms so that it stays
/// finite for exponents of any size.
pub fn ratio_big(p: &GroupParams, m: &BigUint, dist: &BigUint) -> f64 {
    (ln_big(dist) - ln_big(m) * std::f64::consts::LN_2 / (p.l() as f64).ln()).exp()
}

fn ratio_small(p: &GroupParams, m: u64, dist: u64) -> f64 {
    dist as f64 / ((m as f64).ln() / (p.l() as f64).ln()).exp2()
}

/// Rows `m = 1..=m_max` of `|g^m|` and its ratio to `m^(1/alpha)`.
pub fn distortion_table_for(p: &GroupParams, g: Flavor, m_max: u64) -> Vec<DistortionRow> {
    let extra = if g == Flavor::A { 0 } else { 2 };
    (1..=m_max)
        .into_par_iter()
        .map(|m| {
            let dist = p.dist_a_power_i64(m as i64) + extra;
            DistortionRow {
                m,
                dist,
                ratio: ratio_small(p, m, dist),
            }
        })
        .collect()
}

/// Rows `m = 1..=m_max` for powers of `a`.
pub fn distortion_table(p: &GroupParams, m_max: u64) -> Vec<DistortionRow> {
    distortion_table_for(p, Flavor::A, m_max)
}

pub fn write_csv<W: std::io::Write>(rows: &[DistortionRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "m,dist,ratio")?;
    for r in rows {
        writeln!(out, "{},{},{:.12}", r.m, r.dist, r.ratio)?;
    }
    Ok(())
}

/// Whether `m` equals `dist^alpha` exactly, i.e. `dist = 2^k` and `m = L^k`.
fn ratio_is_one(p: &GroupParams, m: u64, dist: u64) -> bool {
    if !dist.is_power_of_two() {
        return false;
    }
    let k = dist.trailing_zeros();
    (p.l() as u64).checked_pow(k) == Some(m)
}

/// Outcome of scanning the two-sided distortion bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub m_max: u64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub constant: f64,
    /// Rows with ratio below 1, with ratio 1 at `m > 1`, or with ratio at
    /// least C.
    pub violations: Vec<DistortionRow>,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `1 <= |g^m| / m^(1/alpha) < C` for `m = 1..=m_max`, with the
/// lower bound strict except at `m = 1` for `g = a`.
pub fn check_bounds(p: &GroupParams, g: Flavor, m_max: u64) -> BoundReport {
    let rows = distortion_table_for(p, g, m_max);
    let c = p.c();
    let violations = rows
        .iter()
        .filter(|r| {
            let low = r.ratio < 1.0 - RATIO_TOLERANCE;
            let tight = (r.ratio - 1.0).abs() <= RATIO_TOLERANCE
                && ratio_is_one(p, r.m, r.dist)
                && !(g == Flavor::A && r.m == 1);
            low || tight || r.ratio >= c
        })
        .copied()
        .collect();
    let (min_ratio, max_ratio) = rows.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
        (lo.min(r.ratio), hi.max(r.ratio))
    });
    BoundReport {
        m_max,
        min_ratio,
        max_ratio,
        constant: c,
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MnRow {
    pub n: u32,
    #[serde(serialize_with = "crate::serde_big::serialize")]
    pub m: BigInt,
    #[serde(serialize_with = "ser_biguint")]
    pub dist: BigUint,
    #[serde(serialize_with = "ser_biguint")]
    pub predicted: BigUint,
    pub ratio: f64,
}

fn ser_biguint<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::serde_big::serialize(&BigInt::from(v.clone()), s)
}

/// The closed form `(2^(n+1) - 1) M + 2^(n+2) - 4` with `M = (L-2)/2`.
pub fn mn_predicted(p: &GroupParams, n: u32) -> BigUint {
    let m = BigUint::from((p.l() - 2) / 2);
    ((BigUint::one() << (n + 1)) - 1u32) * m + (BigUint::one() << (n + 2)) - 4u32
}

/// `m_n = M L^n - M (1 + L + ... + L^(n-1))`.
pub fn mn_value(p: &GroupParams, n: u32) -> BigInt {
    let big_m = BigInt::from((p.l() - 2) / 2);
    let mut m = big_m.clone();
    for _ in 0..n {
        m = m * p.l_big() - &big_m;
    }
    m
}

/// The witness sequence `m_n` for `n = 0..=n_max` with exact lengths.
pub fn mn_sequence(p: &GroupParams, n_max: u32) -> Vec<MnRow> {
    (0..=n_max)
        .map(|n| {
            let m = mn_value(p, n);
            let dist = p.dist_a_power(&m);
            MnRow {
                n,
                ratio: ratio_big(p, m.magnitude(), &dist),
                predicted: mn_predicted(p, n),
                m,
                dist,
            }
        })
        .collect()
}

/// Limit of the ratios along `m_n`.
pub fn mn_ratio_limit(p: &GroupParams) -> f64 {
    let l = p.l() as f64;
    let inner = 0.5 * (l - 2.0).powi(2) / (l - 1.0);
    (l + 2.0) / inner.powf(2f64.ln() / l.ln())
}

/// Proxies for the extreme limits of the distortion ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub l: u32,
    /// Limit along `m_n`.
    pub limsup_proxy: f64,
    /// Limit along `L^n`.
    pub liminf_proxy: f64,
    pub spread: f64,
    pub spread_threshold: f64,
    pub spread_holds: bool,
    /// `(liminf / limsup) 2^(1 - 1/alpha)`, reported for `L >= 10`.
    pub contraction: Option<f64>,
    pub contraction_holds: Option<bool>,
}

impl GapReport {
    pub fn holds(&self) -> bool {
        self.spread_holds && self.contraction_holds.unwrap_or(true)
    }
}

pub fn gap_checks(p: &GroupParams) -> GapReport {
    let hi = mn_ratio_limit(p);
    let lo = 5.0;
    let threshold = (p.l() as f64 + 6.0) / 10.0;
    let contraction = (p.l() >= 10).then(|| lo / hi * (1.0 - 1.0 / p.alpha()).exp2());
    GapReport {
        l: p.l(),
        limsup_proxy: hi,
        liminf_proxy: lo,
        spread: hi / lo,
        spread_threshold: threshold,
        spread_holds: hi / lo > threshold,
        contraction,
        contraction_holds: contraction.map(|c| c < 1.0),
    }
}

/// Checks `(sum r)^(1/alpha) <= sum r^(1/alpha) <= n^(1-1/alpha) (sum r)^(1/alpha)`
/// on nonnegative samples.
pub fn reverse_holder_check(p: &GroupParams, samples: &[f64]) -> Result<bool> {
    if samples.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(invalid("samples must be finite and nonnegative"));
    }
    if samples.is_empty() {
        return Ok(true);
    }
    let e = 1.0 / p.alpha();
    let total: f64 = samples.iter().sum();
    let lhs = total.powf(e);
    let mid: f64 = samples.iter().map(|r| r.powf(e)).sum();
    let rhs = (samples.len() as f64).powf(1.0 - e) * lhs;
    let tol = 1e-12 * mid.max(1.0);
    Ok(lhs <= mid + tol && mid <= rhs + tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgScan {
    pub max_ratio: f64,
    pub argmax: (i64, i64),
}

/// The largest `(|a^l| + |x^m|) / |a^l x^m|` over `l, m` in `range`.
pub fn ag_ratio_scan(p: &GroupParams, range: RangeInclusive<i64>) -> Result<AgScan> {
    if range.is_empty() {
        return Err(invalid("empty scan range"));
    }
    let (lo, hi) = (*range.start(), *range.end());
    let best = (lo..=hi)
        .into_par_iter()
        .map(|l| {
            let mut best = (0.0f64, (l, lo));
            for m in lo..=hi {
                let whole = p.dist_h(&HPoint::new(l, m));
                let ratio = if whole.is_zero() {
                    1.0
                } else {
                    let parts = p.dist_a_power_i64(l)
                        + p.dist_power(Flavor::X, &BigInt::from(m))
                            .to_u64()
                            .expect("small");
                    parts as f64 / whole.to_f64().expect("small")
                };
                if ratio > best.0 {
                    best = (ratio, (l, m));
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(
            (0.0f64, (lo, lo)),
            |acc, x| if x.0 > acc.0 { x } else { acc },
        );
    Ok(AgScan {
        max_ratio: best.0,
        argmax: best.1,
    })
}
