//! The vertex group H = <a, x, y> of G_L.
//!
//! H is free abelian of rank two. Every element is stored as a^u x^v; the
//! third generator is eliminated through y = a^L x^-1. Lengths are measured
//! in the word metric of G_L over {a, s, t}, which on H is computed exactly
//! by the digit recursion below rather than by search.

use crate::error::{invalid, Error, Result};
use crate::paths::{Letter, PathWord};
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// Parameters of G_L: the even integer `L >= 6`, `alpha = log2 L` and the
/// distortion constant `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupParams {
    l: u32,
    alpha: f64,
    c: f64,
}

/// Validates `l` and derives `alpha` and `C`.
pub fn params_new(l: i64) -> Result<GroupParams> {
    GroupParams::new(l)
}

impl GroupParams {
    pub fn new(l: i64) -> Result<Self> {
        if l < 6 || l % 2 != 0 || l > u32::MAX as i64 / 4 {
            return Err(Error::InvalidL(l));
        }
        let lf = l as f64;
        let c = 2.0 + f64::max(2.0 * (lf + 6.0), (lf / 2.0).powf(1.5));
        Ok(GroupParams {
            l: l as u32,
            alpha: lf.log2(),
            c,
        })
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn l_big(&self) -> BigInt {
        BigInt::from(self.l)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `|a^m|` in the word metric over {a, s, t}.
    pub fn dist_a_power(&self, m: &BigInt) -> BigUint {
        let m = m.magnitude();
        match m.to_u64() {
            Some(small) if small < u64::MAX / 2 => BigUint::from(a_length(self.l, small)),
            _ => a_length(self.l, m.clone()),
        }
    }

    /// Fast path of [`GroupParams::dist_a_power`] for machine-sized exponents.
    pub fn dist_a_power_i64(&self, m: i64) -> u64 {
        a_length(self.l, m.unsigned_abs())
    }

    /// `|g^m|` for a generator `g` of H.
    pub fn dist_power(&self, g: Flavor, m: &BigInt) -> BigUint {
        match g {
            Flavor::A => self.dist_a_power(m),
            _ if m.is_zero() => BigUint::zero(),
            _ => self.dist_a_power(m) + 2u32,
        }
    }

    /// `|h|` for an arbitrary element of H.
    pub fn dist_h(&self, h: &HPoint) -> BigUint {
        self.best_plane_split(h).1
    }

    /// The exponent `j` with `h = x^(v+j) y^j a^(u-jL)` minimizing the length
    /// of that three-piece path, together with the minimum.
    fn best_plane_split(&self, h: &HPoint) -> (BigInt, BigUint) {
        let l = self.l_big();
        let (lo, rem) = h.u.div_mod_floor(&l);
        let candidates = if rem.is_zero() {
            vec![lo]
        } else {
            let hi = &lo + 1;
            vec![lo, hi]
        };
        let mut best: Option<(BigInt, BigUint)> = None;
        for j in candidates {
            let r = &h.u - &j * &l;
            let cost = r.magnitude().clone()
                + self.dist_power(Flavor::X, &(&h.v + &j))
                + self.dist_power(Flavor::Y, &j);
            if best.as_ref().map_or(true, |(_, b)| cost < *b) {
                best = Some((j, cost));
            }
        }
        best.expect("at least one candidate")
    }

    /// The digit expansion of `m` realizing `|a^m|`.
    pub fn geodesic_expression(&self, m: &BigInt) -> Result<GeodesicExpression> {
        if m.is_zero() {
            return Err(invalid("geodesic_expression needs m != 0"));
        }
        let mut memo = BTreeMap::new();
        let mut digits = Vec::new();
        let mut rest = m.magnitude().clone();
        let half = BigUint::from(self.l / 2);
        let l = BigUint::from(self.l);
        loop {
            if rest <= &half + 2u32 {
                digits.push(BigInt::from(rest));
                break;
            }
            if rest <= l {
                digits.push(BigInt::from(rest) - BigInt::from(self.l));
                digits.push(BigInt::one());
                break;
            }
            let (q, r) = rest.div_rem(&l);
            if r.is_zero() {
                digits.push(BigInt::zero());
                rest = q;
                continue;
            }
            let q1 = &q + 1u32;
            let via_q = 4u32 + 2u32 * a_length_memo(self.l, &q, &mut memo) + &r;
            let via_q1 = 4u32 + 2u32 * a_length_memo(self.l, &q1, &mut memo) + (&l - &r);
            if via_q < via_q1 || (via_q == via_q1 && r <= half) {
                digits.push(BigInt::from(r));
                rest = q;
            } else {
                digits.push(BigInt::from(r) - BigInt::from(self.l));
                rest = q1;
            }
        }
        if m.is_negative() {
            for d in &mut digits {
                *d = -&*d;
            }
        }
        Ok(GeodesicExpression {
            digits,
            base: self.l,
        })
    }

    /// A geodesic word over {a, s, t} from 1 to `a^m`.
    pub fn geodesic_word_a_power(&self, m: &BigInt) -> PathWord {
        if m.is_zero() {
            return PathWord::empty();
        }
        let expr = self
            .geodesic_expression(m)
            .expect("nonzero exponent has an expression");
        let mut letters = Vec::with_capacity(expr.path_length().to_usize().unwrap_or(0));
        expand_digits(&expr.digits, &mut letters);
        PathWord::from_letters(letters)
    }

    /// A geodesic word from 1 to `h` of the shape x-escape, y-escape, a-power.
    pub fn geodesic_word_h(&self, h: &HPoint) -> PathWord {
        let (j, _) = self.best_plane_split(h);
        let mut out = Vec::new();
        push_escape(self, Letter::S, &(&h.v + &j), &mut out);
        push_escape(self, Letter::T, &j, &mut out);
        let r = &h.u - &j * self.l_big();
        push_a_run(&r, &mut out);
        PathWord::from_letters(out)
    }

    /// The two closest points of `<a>` to `h`: the meets of `<a>` with
    /// `h<x>` and with `h<y>`, in that order.
    pub fn closest_points_on_a_line(&self, h: &HPoint) -> Result<(HPoint, HPoint)> {
        if h.v.is_zero() {
            return Err(invalid(format!("{h} already lies on <a>")));
        }
        let via_x = HPoint::a(h.u.clone());
        let via_y = HPoint::a(&h.u + &h.v * self.l_big());
        Ok((via_x, via_y))
    }

    /// The shift `l` with `|l| <= L/2` (ties broken toward positive) such
    /// that `<x>` meets `h a^l <y>`, and the meeting point.
    pub fn xy_line_intersection(&self, h: &HPoint) -> (BigInt, HPoint) {
        let l = self.l_big();
        let half = BigInt::from(self.l / 2);
        // l must be congruent to -u modulo L.
        let mut shift = (-&h.u).mod_floor(&l);
        if shift > half {
            shift -= &l;
        }
        let point = HPoint::x(&h.v + (&h.u + &shift) / &l);
        (shift, point)
    }

    /// `x^(p/L)`, the closest point of `<x>` to `a^p`.
    pub fn project_to_x_line(&self, p: &BigInt) -> Result<HPoint> {
        let (q, r) = p.div_rem(&self.l_big());
        if !r.is_zero() {
            return Err(invalid(format!("{p} is not a multiple of L = {}", self.l)));
        }
        Ok(HPoint::x(q))
    }

    /// `y^(p/L)`, the closest point of `<y>` to `a^p`.
    pub fn project_to_y_line(&self, p: &BigInt) -> Result<HPoint> {
        let (q, r) = p.div_rem(&self.l_big());
        if !r.is_zero() {
            return Err(invalid(format!("{p} is not a multiple of L = {}", self.l)));
        }
        Ok(self.y_power(q))
    }

    /// `y^k` in `(u, v)` coordinates.
    pub fn y_power(&self, k: impl Into<BigInt>) -> HPoint {
        let k = k.into();
        HPoint {
            u: &k * self.l_big(),
            v: -k,
        }
    }

    /// `g^k` for a generator of H.
    pub fn power(&self, g: Flavor, k: impl Into<BigInt>) -> HPoint {
        match g {
            Flavor::A => HPoint::a(k),
            Flavor::X => HPoint::x(k),
            Flavor::Y => self.y_power(k),
        }
    }

    /// Converts `a^l x^m y^n` to canonical coordinates.
    pub fn from_triple(
        &self,
        l: impl Into<BigInt>,
        m: impl Into<BigInt>,
        n: impl Into<BigInt>,
    ) -> HPoint {
        let n = n.into();
        HPoint {
            u: l.into() + &n * self.l_big(),
            v: m.into() - n,
        }
    }

    /// The exponent `k` with `h = g^k`, if `h` lies on the line `<g>`.
    pub fn exponent_along(&self, g: Flavor, h: &HPoint) -> Option<BigInt> {
        match g {
            Flavor::A => h.v.is_zero().then(|| h.u.clone()),
            Flavor::X => h.u.is_zero().then(|| h.v.clone()),
            Flavor::Y => (h.u == -&h.v * self.l_big()).then(|| -h.v.clone()),
        }
    }

    /// Invariant of the coset `h<g>`: two points lie on a common `g`-line
    /// iff their invariants agree.
    pub fn line_invariant(&self, g: Flavor, h: &HPoint) -> BigInt {
        match g {
            Flavor::A => h.v.clone(),
            Flavor::X => h.u.clone(),
            Flavor::Y => &h.u + &h.v * self.l_big(),
        }
    }
}

fn push_escape(p: &GroupParams, stable: Letter, e: &BigInt, out: &mut Vec<Letter>) {
    if e.is_zero() {
        return;
    }
    out.push(stable);
    out.extend(p.geodesic_word_a_power(e).letters().iter().copied());
    out.push(stable.inverse());
}

fn push_a_run(r: &BigInt, out: &mut Vec<Letter>) {
    let n = r.magnitude().to_usize().expect("a-run fits in memory");
    let letter = if r.is_negative() {
        Letter::AInv
    } else {
        Letter::A
    };
    out.extend(std::iter::repeat(letter).take(n));
}

fn expand_digits(digits: &[BigInt], out: &mut Vec<Letter>) {
    if let Some((low, high)) = digits.split_first() {
        if !high.is_empty() {
            let start = out.len();
            out.push(Letter::S);
            expand_digits(high, out);
            out.push(Letter::SInv);
            let inner = out[start + 1..out.len() - 1].to_vec();
            out.push(Letter::T);
            out.extend(inner);
            out.push(Letter::TInv);
        }
        push_a_run(low, out);
    }
}

/// Integer types the length recursion runs on.
trait Magnitude: Integer + Clone + FromPrimitive + for<'a> Add<&'a Self, Output = Self> {}
impl Magnitude for u64 {}
impl Magnitude for BigUint {}

fn a_length<T: Magnitude>(l: u32, m: T) -> T {
    let mut memo = BTreeMap::new();
    a_length_memo(l, &m, &mut memo)
}

/// `|a^m|` for `m >= 0`. Each level of the recursion needs at most three
/// consecutive quotients, so a per-call memo keeps the work logarithmic and
/// leaves nothing shared between threads.
fn a_length_memo<T: Magnitude>(l: u32, m: &T, memo: &mut BTreeMap<T, T>) -> T {
    let lt = T::from_u32(l).unwrap();
    let small = |k: u32| T::from_u32(k).unwrap();
    if m.is_zero() {
        return T::zero();
    }
    if *m <= small(3 + l / 2) {
        return m.clone();
    }
    if *m <= lt {
        return small(6 + l) - m.clone();
    }
    if let Some(d) = memo.get(m) {
        return d.clone();
    }
    let (q, r) = m.div_rem(&lt);
    let at_q = small(4) + small(2) * a_length_memo(l, &q, memo);
    let d = if r.is_zero() {
        at_q
    } else {
        let q1 = q + small(1);
        let at_q1 = small(4) + small(2) * a_length_memo(l, &q1, memo);
        let down = at_q + &r;
        let up = at_q1 + &(lt - r);
        down.min(up)
    };
    memo.insert(m.clone(), d.clone());
    d
}

/// Base-`L` digits `m_0, ..., m_j` (low to high) whose recursive path is a
/// geodesic from 1 to `a^m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeodesicExpression {
    #[serde(with = "crate::serde_big::vec")]
    pub digits: Vec<BigInt>,
    pub base: u32,
}

impl GeodesicExpression {
    /// `sum m_i L^i`.
    pub fn value(&self) -> BigInt {
        let base = BigInt::from(self.base);
        self.digits
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, d| acc * &base + d)
    }

    /// The top index `j`.
    pub fn top(&self) -> usize {
        self.digits.len() - 1
    }

    /// Length of the induced path: `sum |m_i| 2^i + 4 (2^j - 1)`.
    pub fn path_length(&self) -> BigUint {
        let j = self.top();
        let mut total = BigUint::zero();
        for (i, d) in self.digits.iter().enumerate() {
            total += d.magnitude() << i;
        }
        total + ((BigUint::one() << j) - 1u32) * 4u32
    }

    /// Checks the digit bounds: `0 < m_j <= L/2 + 2` and `|m_i| <= L/2`
    /// below the top, up to an overall sign.
    pub fn digits_in_range(&self) -> bool {
        let half = BigInt::from(self.base / 2);
        let Some(top) = self.digits.last() else {
            return false;
        };
        let sign = top.sign();
        if sign == Sign::NoSign {
            return false;
        }
        let top_ok = top.abs() <= &half + 2;
        let low_ok = self.digits[..self.top()].iter().all(|d| d.abs() <= half);
        top_ok && low_ok
    }
}

/// A generator of H; also the flavor of an escape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    A,
    X,
    Y,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(match self {
            Flavor::A => "a",
            Flavor::X => "x",
            Flavor::Y => "y",
        })
    }
}

impl std::str::FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Flavor::A),
            "x" => Ok(Flavor::X),
            "y" => Ok(Flavor::Y),
            _ => Err(invalid(format!("unknown flavor {s:?}; expected a, x or y"))),
        }
    }
}

/// The element `a^u x^v` of H.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct HPoint {
    #[serde(with = "crate::serde_big")]
    pub u: BigInt,
    #[serde(with = "crate::serde_big")]
    pub v: BigInt,
}

impl HPoint {
    pub fn new(u: impl Into<BigInt>, v: impl Into<BigInt>) -> Self {
        HPoint {
            u: u.into(),
            v: v.into(),
        }
    }

    pub fn identity() -> Self {
        HPoint::default()
    }

    pub fn a(k: impl Into<BigInt>) -> Self {
        HPoint::new(k, 0)
    }

    pub fn x(k: impl Into<BigInt>) -> Self {
        HPoint::new(0, k)
    }

    pub fn is_identity(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }
}

impl fmt::Display for HPoint {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

impl Add for &HPoint {
    type Output = HPoint;
    fn add(self, o: &HPoint) -> HPoint {
        HPoint {
            u: &self.u + &o.u,
            v: &self.v + &o.v,
        }
    }
}

impl Add for HPoint {
    type Output = HPoint;
    fn add(self, o: HPoint) -> HPoint {
        &self + &o
    }
}

impl Sub for &HPoint {
    type Output = HPoint;
    fn sub(self, o: &HPoint) -> HPoint {
        HPoint {
            u: &self.u - &o.u,
            v: &self.v - &o.v,
        }
    }
}

impl Sub for HPoint {
    type Output = HPoint;
    fn sub(self, o: HPoint) -> HPoint {
        &self - &o
    }
}

impl Neg for &HPoint {
    type Output = HPoint;
    fn neg(self) -> HPoint {
        HPoint {
            u: -&self.u,
            v: -&self.v,
        }
    }
}

impl Neg for HPoint {
    type Output = HPoint;
    fn neg(self) -> HPoint {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn params_constants() {
        let p6 = params_new(6).unwrap();
        assert_eq!(p6.c(), 26.0);
        assert!((p6.alpha() - 2.584962500721156).abs() < 1e-12);
        let p10 = params_new(10).unwrap();
        assert_eq!(p10.c(), 34.0);
        assert_eq!(params_new(5), Err(Error::InvalidL(5)));
        assert_eq!(params_new(4), Err(Error::InvalidL(4)));
        assert_eq!(params_new(7), Err(Error::InvalidL(7)));
    }

    #[test]
    fn a_power_examples() {
        let p6 = params_new(6).unwrap();
        let p10 = params_new(10).unwrap();
        assert_eq!(p10.dist_a_power_i64(9), 7);
        assert_eq!(p10.dist_a_power_i64(20), 8);
        assert_eq!(p6.dist_a_power_i64(0), 0);
        assert_eq!(p6.dist_a_power_i64(11), 9);
        assert_eq!(p10.dist_a_power_i64(36), 16);
        assert_eq!(p10.dist_a_power(&big(-36)), BigUint::from(16u32));
    }

    #[test]
    fn bigint_path_matches_machine_path() {
        let p = params_new(8).unwrap();
        for m in [1u64, 7, 64, 999, 123_456_789, u64::MAX / 4] {
            assert_eq!(
                a_length(p.l(), BigUint::from(m)),
                BigUint::from(a_length(p.l(), m))
            );
        }
    }

    #[test]
    fn plane_examples() {
        let p6 = params_new(6).unwrap();
        let p10 = params_new(10).unwrap();
        assert_eq!(p6.dist_h(&HPoint::new(6, 0)), BigUint::from(6u32));
        assert_eq!(p6.dist_h(&HPoint::identity()), BigUint::zero());
        assert_eq!(p6.dist_h(&HPoint::new(0, 2)), BigUint::from(4u32));
        assert_eq!(p10.dist_h(&HPoint::new(12, 0)), BigUint::from(8u32));
        assert_eq!(p6.dist_power(Flavor::X, &big(1)), BigUint::from(3u32));
        assert_eq!(p6.dist_power(Flavor::Y, &big(0)), BigUint::zero());
        assert_eq!(p10.dist_power(Flavor::X, &big(20)), BigUint::from(10u32));
    }

    #[test]
    fn expression_examples() {
        let p10 = params_new(10).unwrap();
        let p6 = params_new(6).unwrap();
        let e = p10.geodesic_expression(&big(36)).unwrap();
        assert_eq!(e.digits, vec![big(-4), big(4)]);
        assert_eq!(e.path_length(), BigUint::from(16u32));
        let e = p6.geodesic_expression(&big(5)).unwrap();
        assert_eq!(e.digits, vec![big(5)]);
        let e = p10.geodesic_expression(&big(100)).unwrap();
        assert_eq!(e.digits, vec![big(0), big(0), big(1)]);
        assert_eq!(e.path_length(), BigUint::from(16u32));
        assert!(p6.geodesic_expression(&big(0)).is_err());
    }

    #[test]
    fn word_examples() {
        let p6 = params_new(6).unwrap();
        assert_eq!(
            p6.geodesic_word_a_power(&big(6)).to_string(),
            "s a s^-1 t a t^-1"
        );
        assert_eq!(p6.geodesic_word_a_power(&big(1)).to_string(), "a");
        assert_eq!(p6.geodesic_word_h(&HPoint::x(1)).to_string(), "s a s^-1");
        assert!(p6.geodesic_word_h(&HPoint::identity()).is_empty());
        let p10 = params_new(10).unwrap();
        let w = p10.geodesic_word_h(&HPoint::new(12, 0));
        assert_eq!(w.to_string(), "s a s^-1 t a t^-1 a a");
        assert_eq!(p10.geodesic_word_a_power(&big(36)).len(), 16);
    }

    #[test]
    fn line_examples() {
        let p6 = params_new(6).unwrap();
        assert_eq!(
            p6.closest_points_on_a_line(&HPoint::x(1)).unwrap(),
            (HPoint::identity(), HPoint::a(6))
        );
        assert_eq!(
            p6.closest_points_on_a_line(&HPoint::new(3, 1)).unwrap(),
            (HPoint::a(3), HPoint::a(9))
        );
        assert!(p6.closest_points_on_a_line(&HPoint::a(5)).is_err());
        assert_eq!(
            p6.xy_line_intersection(&HPoint::a(2)),
            (big(-2), HPoint::identity())
        );
        assert_eq!(
            p6.xy_line_intersection(&HPoint::identity()),
            (big(0), HPoint::identity())
        );
        assert_eq!(
            p6.xy_line_intersection(&HPoint::a(3)),
            (big(3), HPoint::x(1))
        );
        assert_eq!(p6.project_to_x_line(&big(6)).unwrap(), HPoint::x(1));
        assert_eq!(p6.project_to_x_line(&big(0)).unwrap(), HPoint::identity());
        assert!(p6.project_to_x_line(&big(4)).is_err());
        let p10 = params_new(10).unwrap();
        assert_eq!(p10.project_to_x_line(&big(-20)).unwrap(), HPoint::x(-2));
    }

    #[test]
    fn triple_conversion() {
        let p = params_new(6).unwrap();
        assert_eq!(p.from_triple(1, 2, 3), HPoint::new(19, -1));
        assert_eq!(p.from_triple(0, 1, 1), HPoint::a(6));
    }
}
