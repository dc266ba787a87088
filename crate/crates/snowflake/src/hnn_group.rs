//! Britton normal forms for G_L and breadth-first distance oracles on its
//! Cayley graph over {a, s, t}.
//!
//! G_L is a double HNN extension of H with stable letters s (a -> x) and
//! t (a -> y). An element is stored as
//!
//! ```text
//! r_1 e_1 r_2 e_2 ... r_k e_k tail
//! ```
//!
//! where each `e_i` is a stable letter, `tail` is any element of H, and each
//! `r_i` is the canonical representative of its coset modulo the subgroup
//! that `e_i` conjugates. The first representative `r_1` plays the role of a
//! head. Representatives are chosen by pushing the conjugated part to the
//! right: `x^k s = s a^k`, `a^k s^-1 = s^-1 x^k`, `y^k t = t a^k` and
//! `a^k t^-1 = t^-1 y^k`. Together with Britton reduction (no `s <a> s^-1`,
//! `s^-1 <x> s`, `t <a> t^-1` or `t^-1 <y> t`) this makes the form unique.

use crate::error::{invalid, Error, Result};
use crate::paths::{Letter, PathWord};
use crate::vertex_group::{Flavor, GroupParams, HPoint};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::fmt;

/// Default cap on the number of states a search may hold.
pub const DEFAULT_STATE_BUDGET: usize = 10_000_000;

/// A stable letter or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stable {
    S,
    SInv,
    T,
    TInv,
}

impl Stable {
    pub fn inverse(self) -> Stable {
        match self {
            Stable::S => Stable::SInv,
            Stable::SInv => Stable::S,
            Stable::T => Stable::TInv,
            Stable::TInv => Stable::T,
        }
    }

    pub fn letter(self) -> Letter {
        match self {
            Stable::S => Letter::S,
            Stable::SInv => Letter::SInv,
            Stable::T => Letter::T,
            Stable::TInv => Letter::TInv,
        }
    }

    pub fn from_letter(l: Letter) -> Option<Stable> {
        match l {
            Letter::S => Some(Stable::S),
            Letter::SInv => Some(Stable::SInv),
            Letter::T => Some(Stable::T),
            Letter::TInv => Some(Stable::TInv),
            _ => None,
        }
    }

    /// Subgroup of H that may sit immediately to the left of this letter and
    /// be pushed through it.
    pub fn left_subgroup(self) -> Flavor {
        match self {
            Stable::S => Flavor::X,
            Stable::T => Flavor::Y,
            Stable::SInv | Stable::TInv => Flavor::A,
        }
    }

    /// Subgroup of H that comes out on the right after pushing.
    pub fn right_subgroup(self) -> Flavor {
        match self {
            Stable::S | Stable::T => Flavor::A,
            Stable::SInv => Flavor::X,
            Stable::TInv => Flavor::Y,
        }
    }

    fn code(self) -> u8 {
        self as u8
    }

    fn from_code(c: u8) -> Option<Stable> {
        [Stable::S, Stable::SInv, Stable::T, Stable::TInv]
            .get(c as usize)
            .copied()
    }
}

/// One `r_i e_i` block of a normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Syllable {
    pub rep: HPoint,
    pub letter: Stable,
}

/// An element of G_L in Britton normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct GroupElement {
    syllables: Vec<Syllable>,
    tail: HPoint,
}

/// Splits `h` as `rep * c` with `c` in the left subgroup of `e`, returning
/// `rep` and the element `c` becomes after crossing `e`.
fn split(p: &GroupParams, e: Stable, h: &HPoint) -> (HPoint, HPoint) {
    match e {
        Stable::S => (HPoint::a(h.u.clone()), HPoint::a(h.v.clone())),
        Stable::SInv => (HPoint::x(h.v.clone()), HPoint::x(h.u.clone())),
        Stable::T => (HPoint::a(&h.u + &h.v * p.l_big()), HPoint::a(-h.v.clone())),
        Stable::TInv => (HPoint::x(h.v.clone()), p.y_power(h.u.clone())),
    }
}

/// Image of `g^k` (g the right subgroup of `e`) under conjugation back
/// across `e`: for `e = s`, `s a^k s^-1 = x^k`, and so on.
fn conjugate_back(p: &GroupParams, e: Stable, k: BigInt) -> HPoint {
    p.power(e.left_subgroup(), k)
}

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement::default()
    }

    pub fn from_h(h: HPoint) -> Self {
        GroupElement {
            syllables: Vec::new(),
            tail: h,
        }
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn tail(&self) -> &HPoint {
        &self.tail
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty() && self.tail.is_identity()
    }

    /// The element as a point of H, if it lies in H.
    pub fn as_h(&self) -> Option<&HPoint> {
        self.syllables.is_empty().then_some(&self.tail)
    }

    /// Number of stable letters in any reduced word for this element.
    pub fn stable_length(&self) -> usize {
        self.syllables.len()
    }

    /// Image under the homomorphism to Z/2 sending a, s, t to 1. Any word
    /// for the element has this length parity.
    pub fn parity(&self) -> u8 {
        let mut total = BigInt::from(self.syllables.len());
        for syl in &self.syllables {
            total += &syl.rep.u + &syl.rep.v;
        }
        total += &self.tail.u + &self.tail.v;
        if (total % 2u32).is_zero() {
            0
        } else {
            1
        }
    }

    pub fn mul_h(&mut self, h: &HPoint) {
        self.tail = &self.tail + h;
    }

    pub fn mul_stable(&mut self, p: &GroupParams, e: Stable) {
        if let Some(last) = self.syllables.last() {
            if last.letter == e.inverse() {
                if let Some(k) = p.exponent_along(last.letter.right_subgroup(), &self.tail) {
                    let last = self.syllables.pop().expect("checked above");
                    self.tail = &last.rep + &conjugate_back(p, last.letter, k);
                    return;
                }
            }
        }
        let (rep, carried) = split(p, e, &self.tail);
        self.syllables.push(Syllable { rep, letter: e });
        self.tail = carried;
    }

    pub fn mul_letter(&mut self, p: &GroupParams, l: Letter) {
        match Stable::from_letter(l) {
            Some(e) => self.mul_stable(p, e),
            None => {
                let h = l.as_h(p).expect("non-stable letters lie in H");
                self.mul_h(&h);
            }
        }
    }

    pub fn mul_word(&mut self, p: &GroupParams, w: &PathWord) {
        for &l in w.letters() {
            self.mul_letter(p, l);
        }
    }

    /// Left multiplication by a letter. This walks the form from the left
    /// and is kept independent of [`GroupElement::mul_letter`] so that the
    /// two reduction orders can be checked against each other.
    pub fn left_mul_letter(&mut self, p: &GroupParams, l: Letter) {
        let Some(e) = Stable::from_letter(l) else {
            let h = l.as_h(p).expect("non-stable letters lie in H");
            match self.syllables.first_mut() {
                Some(first) => first.rep = &first.rep + &h,
                None => self.tail = &self.tail + &h,
            }
            self.renormalize_from(p, 0);
            return;
        };
        if let Some(first) = self.syllables.first() {
            // e r_1 e^-1 with r_1 in the right subgroup of e collapses.
            if first.letter == e.inverse() {
                if let Some(k) = p.exponent_along(e.right_subgroup(), &first.rep) {
                    self.syllables.remove(0);
                    let image = conjugate_back(p, e, k);
                    match self.syllables.first_mut() {
                        Some(next) => next.rep = &next.rep + &image,
                        None => self.tail = &self.tail + &image,
                    }
                    self.renormalize_from(p, 0);
                    return;
                }
            }
        }
        self.syllables.insert(
            0,
            Syllable {
                rep: HPoint::identity(),
                letter: e,
            },
        );
    }

    fn renormalize_from(&mut self, p: &GroupParams, start: usize) {
        for i in start..self.syllables.len() {
            let (rep, carried) = split(p, self.syllables[i].letter, &self.syllables[i].rep);
            if carried.is_identity() {
                return;
            }
            self.syllables[i].rep = rep;
            match self.syllables.get_mut(i + 1) {
                Some(next) => next.rep = &next.rep + &carried,
                None => self.tail = &self.tail + &carried,
            }
        }
    }

    /// A word spelling this element: representatives and tail written as
    /// `a^u x^v`. Reducing it returns the element itself.
    pub fn to_word(&self) -> PathWord {
        let mut out = Vec::new();
        let push_h = |h: &HPoint, out: &mut Vec<Letter>| {
            push_run(&h.u, Letter::A, out);
            push_run(&h.v, Letter::X, out);
        };
        for syl in &self.syllables {
            push_h(&syl.rep, &mut out);
            out.push(syl.letter.letter());
        }
        push_h(&self.tail, &mut out);
        PathWord::from_letters(out)
    }

    /// Compact byte encoding used as a hash key by the searches.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 5 * self.syllables.len());
        write_varint(self.syllables.len() as u64, &mut out);
        for syl in &self.syllables {
            out.push(syl.letter.code());
            write_int(&syl.rep.u, &mut out);
            write_int(&syl.rep.v, &mut out);
        }
        write_int(&self.tail.u, &mut out);
        write_int(&self.tail.v, &mut out);
        out
    }

    /// Inverse of [`GroupElement::encode`]. Rejects malformed input and
    /// encodings that are not normal forms.
    pub fn decode(p: &GroupParams, bytes: &[u8]) -> Result<GroupElement> {
        let mut cur = Cursor { bytes, pos: 0 };
        let n = cur.varint()?;
        if n > bytes.len() as u64 {
            return Err(cur.fail("syllable count exceeds input"));
        }
        let mut syllables = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let code = cur.byte()?;
            let letter = Stable::from_code(code).ok_or_else(|| cur.fail("bad stable letter"))?;
            let u = cur.int()?;
            let v = cur.int()?;
            syllables.push(Syllable {
                rep: HPoint { u, v },
                letter,
            });
        }
        let tail = HPoint {
            u: cur.int()?,
            v: cur.int()?,
        };
        if cur.pos != bytes.len() {
            return Err(cur.fail("trailing bytes"));
        }
        let g = GroupElement { syllables, tail };
        if !g.is_normal_form(p) {
            return Err(invalid("encoded element is not in normal form"));
        }
        Ok(g)
    }

    /// Checks canonical representatives and the absence of pinches.
    pub fn is_normal_form(&self, p: &GroupParams) -> bool {
        for (i, syl) in self.syllables.iter().enumerate() {
            if !split(p, syl.letter, &syl.rep).1.is_identity() {
                return false;
            }
            let between = match self.syllables.get(i + 1) {
                Some(next) if next.letter == syl.letter.inverse() => &next.rep,
                _ => continue,
            };
            if p.exponent_along(syl.letter.right_subgroup(), between)
                .is_some()
            {
                return false;
            }
        }
        true
    }
}

fn push_run(k: &BigInt, pos: Letter, out: &mut Vec<Letter>) {
    let n = k.magnitude().to_usize().expect("exponent fits in memory");
    let l = if k.sign() == num_bigint::Sign::Minus {
        pos.inverse()
    } else {
        pos
    };
    out.extend(std::iter::repeat(l).take(n));
}

fn write_varint(mut n: u64, out: &mut Vec<u8>) {
    loop {
        let byte = (n & 0x7f) as u8;
        n >>= 7;
        if n == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn write_int(k: &BigInt, out: &mut Vec<u8>) {
    if let Some(small) = k.to_i64() {
        // zigzag, low bit 0 marks the short form
        let z = ((small << 1) ^ (small >> 63)) as u64;
        if z < (1 << 62) {
            write_varint(z << 1, out);
            return;
        }
    }
    let bytes = k.to_signed_bytes_le();
    write_varint(((bytes.len() as u64) << 1) | 1, out);
    out.extend_from_slice(&bytes);
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn fail(&self, msg: &str) -> Error {
        Error::Parse {
            position: self.pos,
            message: msg.to_string(),
        }
    }

    fn byte(&mut self) -> Result<u8> {
        let b = *self
            .bytes
            .get(self.pos)
            .ok_or_else(|| self.fail("unexpected end"))?;
        self.pos += 1;
        Ok(b)
    }

    fn varint(&mut self) -> Result<u64> {
        let mut n = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.byte()?;
            n |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                return Ok(n);
            }
        }
        Err(self.fail("varint too long"))
    }

    fn int(&mut self) -> Result<BigInt> {
        let tag = self.varint()?;
        if tag & 1 == 0 {
            let z = tag >> 1;
            let small = ((z >> 1) as i64) ^ -((z & 1) as i64);
            return Ok(BigInt::from(small));
        }
        let len = (tag >> 1) as usize;
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| self.fail("integer runs past end"))?;
        let k = BigInt::from_signed_bytes_le(&self.bytes[self.pos..end]);
        self.pos = end;
        Ok(k)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let mut tokens = Vec::new();
        let h_tokens = |h: &HPoint, tokens: &mut Vec<String>| {
            for (k, name) in [(&h.u, "a"), (&h.v, "x")] {
                if k.is_zero() {
                    continue;
                }
                if *k == BigInt::from(1) {
                    tokens.push(name.to_string());
                } else {
                    tokens.push(format!("{name}^{k}"));
                }
            }
        };
        for syl in &self.syllables {
            h_tokens(&syl.rep, &mut tokens);
            tokens.push(syl.letter.letter().to_string());
        }
        h_tokens(&self.tail, &mut tokens);
        if tokens.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&tokens.join(" "))
        }
    }
}

/// Normal form of the element spelled by `w`.
pub fn reduce_word(p: &GroupParams, w: &PathWord) -> GroupElement {
    let mut g = GroupElement::identity();
    g.mul_word(p, w);
    g
}

/// Normal form of `w` computed by left multiplication from the last letter
/// to the first.
pub fn reduce_word_leftwards(p: &GroupParams, w: &PathWord) -> GroupElement {
    let mut g = GroupElement::identity();
    for &l in w.letters().iter().rev() {
        g.left_mul_letter(p, l);
    }
    g
}

pub fn multiply(p: &GroupParams, g1: &GroupElement, g2: &GroupElement) -> GroupElement {
    let mut out = g1.clone();
    for syl in &g2.syllables {
        out.mul_h(&syl.rep);
        out.mul_stable(p, syl.letter);
    }
    out.mul_h(&g2.tail);
    out
}

pub fn invert(p: &GroupParams, g: &GroupElement) -> GroupElement {
    let mut out = GroupElement::from_h(-&g.tail);
    for syl in g.syllables.iter().rev() {
        out.mul_stable(p, syl.letter.inverse());
        out.mul_h(&-&syl.rep);
    }
    out
}

pub fn is_identity(g: &GroupElement) -> bool {
    g.is_identity()
}

const GENERATORS: [Letter; 6] = [
    Letter::A,
    Letter::AInv,
    Letter::S,
    Letter::SInv,
    Letter::T,
    Letter::TInv,
];

/// All elements within a given distance of the identity, with their exact
/// distances. Elements are held in their compact encoding.
#[derive(Debug, Clone)]
pub struct Ball {
    params: GroupParams,
    radius: u32,
    layers: Vec<Vec<Box<[u8]>>>,
    index: HashMap<Box<[u8]>, u32>,
}

impl Ball {
    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn distance(&self, g: &GroupElement) -> Option<u32> {
        self.index.get(g.encode().as_slice()).copied()
    }

    /// Number of elements at each distance `0..=radius`.
    pub fn sphere_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    /// Elements ordered by distance, then by encoding.
    pub fn iter(&self) -> impl Iterator<Item = (GroupElement, u32)> + '_ {
        self.layers.iter().enumerate().flat_map(move |(d, layer)| {
            layer.iter().map(move |key| {
                let g = GroupElement::decode(&self.params, key).expect("ball keys are valid");
                (g, d as u32)
            })
        })
    }

    /// One JSON object per line: `{"normal_form": ..., "distance": ...}`.
    pub fn write_json_lines<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        for (g, d) in self.iter() {
            let line = serde_json::json!({ "normal_form": g.to_string(), "distance": d });
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Breadth-first ball of the given radius around the identity.
pub fn bfs_ball(p: &GroupParams, radius: u32, budget: usize) -> Result<Ball> {
    let identity = GroupElement::identity().encode().into_boxed_slice();
    let mut index = HashMap::new();
    index.insert(identity.clone(), 0u32);
    let mut layers = vec![vec![identity]];
    for r in 1..=radius {
        let frontier = layers.last().expect("layer 0 exists");
        let mut found: Vec<Box<[u8]>> = frontier
            .par_iter()
            .flat_map_iter(|key| {
                let g = GroupElement::decode(p, key).expect("ball keys are valid");
                GENERATORS.iter().map(move |&l| {
                    let mut n = g.clone();
                    n.mul_letter(p, l);
                    n.encode().into_boxed_slice()
                })
            })
            .filter(|k| !index.contains_key(k))
            .collect();
        found.par_sort_unstable();
        found.dedup();
        if index.len() + found.len() > budget {
            return Err(Error::BudgetExceeded {
                budget,
                radius: r,
                visited: index.len(),
                frontier: found.len(),
            });
        }
        for k in &found {
            index.insert(k.clone(), r);
        }
        layers.push(found);
    }
    Ok(Ball {
        params: *p,
        radius,
        layers,
        index,
    })
}

/// Exact `d(g1, g2)` if it is at most `cap`, by bidirectional search on
/// `g1^-1 g2`.
pub fn pair_dist(
    p: &GroupParams,
    g1: &GroupElement,
    g2: &GroupElement,
    cap: u32,
    budget: usize,
) -> Result<Option<u32>> {
    let target = multiply(p, &invert(p, g1), g2);
    if target.is_identity() {
        return Ok(Some(0));
    }
    let mut sides = [
        SearchSide::new(GroupElement::identity()),
        SearchSide::new(target),
    ];
    loop {
        let (rf, rb) = (sides[0].radius, sides[1].radius);
        if rf + rb >= cap {
            return Ok(None);
        }
        let grow = if sides[0].frontier.len() <= sides[1].frontier.len() {
            0
        } else {
            1
        };
        let (left, right) = sides.split_at_mut(1);
        let (me, other) = if grow == 0 {
            (&mut left[0], &right[0])
        } else {
            (&mut right[0], &left[0])
        };
        let best = me.expand(p, other);
        let held = sides[0].seen.len() + sides[1].seen.len();
        if held > budget {
            return Err(Error::BudgetExceeded {
                budget,
                radius: sides[0].radius + sides[1].radius,
                visited: held,
                frontier: sides[grow].frontier.len(),
            });
        }
        if let Some(d) = best {
            return Ok((d <= cap).then_some(d));
        }
    }
}

struct SearchSide {
    radius: u32,
    seen: HashMap<Vec<u8>, u32>,
    frontier: Vec<GroupElement>,
}

impl SearchSide {
    fn new(start: GroupElement) -> Self {
        let mut seen = HashMap::new();
        seen.insert(start.encode(), 0);
        SearchSide {
            radius: 0,
            seen,
            frontier: vec![start],
        }
    }

    /// Grows this side by one layer; returns the meeting distance if the
    /// new layer touches the other side.
    fn expand(&mut self, p: &GroupParams, other: &SearchSide) -> Option<u32> {
        let next_r = self.radius + 1;
        let mut next = Vec::new();
        let mut fresh = HashSet::new();
        let mut best: Option<u32> = None;
        for g in &self.frontier {
            for &l in &GENERATORS {
                let mut n = g.clone();
                n.mul_letter(p, l);
                let key = n.encode();
                if self.seen.contains_key(&key) || !fresh.insert(key.clone()) {
                    continue;
                }
                if let Some(&d) = other.seen.get(&key) {
                    let total = next_r + d;
                    best = Some(best.map_or(total, |b| b.min(total)));
                }
                next.push(n);
            }
        }
        for key in fresh {
            self.seen.insert(key, next_r);
        }
        self.radius = next_r;
        self.frontier = next;
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vertex_group::params_new;

    fn w(s: &str) -> PathWord {
        s.parse().unwrap()
    }

    #[test]
    fn reduce_examples() {
        let p = params_new(6).unwrap();
        assert_eq!(
            reduce_word(&p, &w("s a s^-1")),
            GroupElement::from_h(HPoint::x(1))
        );
        assert!(reduce_word(&p, &w("s s^-1")).is_identity());
        assert!(reduce_word(&p, &w("s a^6 s^-1 t a^6 t^-1 a^-36")).is_identity());
    }

    #[test]
    fn multiply_examples() {
        let p = params_new(6).unwrap();
        let x = reduce_word(&p, &w("x"));
        let y = reduce_word(&p, &w("y"));
        assert_eq!(multiply(&p, &x, &y), GroupElement::from_h(HPoint::a(6)));
        assert!(invert(&p, &GroupElement::identity()).is_identity());
        let g = reduce_word(&p, &w("s a s^-1"));
        let h = reduce_word(&p, &w("s a^-1 s^-1"));
        assert!(multiply(&p, &g, &h).is_identity());
    }

    #[test]
    fn normal_form_display_round_trips() {
        let p = params_new(6).unwrap();
        let g = reduce_word(&p, &w("a^7 t x^2 s^-1 a^3 t^-1 y"));
        let again = reduce_word(&p, &g.to_string().parse().unwrap());
        assert_eq!(g, again);
        assert_eq!(GroupElement::identity().to_string(), "1");
    }

    #[test]
    fn encoding_round_trips_big_values() {
        let p = params_new(6).unwrap();
        let huge = BigInt::from(7).pow(40);
        let mut g = GroupElement::from_h(HPoint::new(huge.clone(), -huge));
        g.mul_stable(&p, Stable::T);
        g.mul_h(&HPoint::new(3, -2));
        assert_eq!(GroupElement::decode(&p, &g.encode()).unwrap(), g);
        assert!(GroupElement::decode(&p, &[]).is_err());
    }

    #[test]
    fn decode_rejects_unreduced() {
        let p = params_new(6).unwrap();
        // s a^0 s^-1 is not a normal form
        let bad = GroupElement {
            syllables: vec![
                Syllable {
                    rep: HPoint::identity(),
                    letter: Stable::S,
                },
                Syllable {
                    rep: HPoint::identity(),
                    letter: Stable::SInv,
                },
            ],
            tail: HPoint::identity(),
        };
        assert!(GroupElement::decode(&p, &bad.encode()).is_err());
    }

    #[test]
    fn ball_small_radius() {
        let p = params_new(6).unwrap();
        let ball = bfs_ball(&p, 1, DEFAULT_STATE_BUDGET).unwrap();
        assert_eq!(ball.len(), 7);
        let err = bfs_ball(&p, 3, 20).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { budget: 20, .. }));
    }

    #[test]
    fn pair_dist_examples() {
        let p = params_new(6).unwrap();
        let one = GroupElement::identity();
        let a6 = GroupElement::from_h(HPoint::a(6));
        assert_eq!(
            pair_dist(&p, &one, &a6, 10, DEFAULT_STATE_BUDGET).unwrap(),
            Some(6)
        );
        assert_eq!(
            pair_dist(&p, &a6, &a6, 0, DEFAULT_STATE_BUDGET).unwrap(),
            Some(0)
        );
        let x = GroupElement::from_h(HPoint::x(1));
        let y = GroupElement::from_h(p.y_power(1));
        assert_eq!(
            pair_dist(&p, &x, &y, 10, DEFAULT_STATE_BUDGET).unwrap(),
            Some(6)
        );
        assert_eq!(
            pair_dist(&p, &one, &a6, 5, DEFAULT_STATE_BUDGET).unwrap(),
            None
        );
    }
}
