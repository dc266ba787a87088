//! Edge paths in the Cayley graph of G_L.
//!
//! A [`PathWord`] is a sequence of letters over {a, s, t, x, y} and their
//! inverses. Letters a, s and t have length 1; x and y edges have length L.
//! This module also builds the snowflake paths, splits paths into escapes
//! and toral pieces relative to a coset of H, computes enfilade
//! decompositions of escapes, and checks loops for geodesicity.

use crate::error::{invalid, Error, Result};
use crate::hnn_group::{invert, multiply, pair_dist, reduce_word, GroupElement, Stable};
use crate::vertex_group::{Flavor, GroupParams, HPoint};
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

/// Upper limit on the number of letters a parsed word may expand to.
pub const MAX_PARSED_LETTERS: usize = 1 << 24;

/// A generator of G_L or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    AInv,
    S,
    SInv,
    T,
    TInv,
    X,
    XInv,
    Y,
    YInv,
}

impl Letter {
    pub fn inverse(self) -> Letter {
        use Letter::*;
        match self {
            A => AInv,
            AInv => A,
            S => SInv,
            SInv => S,
            T => TInv,
            TInv => T,
            X => XInv,
            XInv => X,
            Y => YInv,
            YInv => Y,
        }
    }

    /// Edge length: 1 for a, s, t and L for x, y.
    pub fn weight(self, p: &GroupParams) -> u64 {
        match self {
            Letter::X | Letter::XInv | Letter::Y | Letter::YInv => p.l() as u64,
            _ => 1,
        }
    }

    pub fn is_stable(self) -> bool {
        matches!(self, Letter::S | Letter::SInv | Letter::T | Letter::TInv)
    }

    /// The letter as an element of H, if it is one.
    pub fn as_h(self, p: &GroupParams) -> Option<HPoint> {
        match self {
            Letter::A => Some(HPoint::a(1)),
            Letter::AInv => Some(HPoint::a(-1)),
            Letter::X => Some(HPoint::x(1)),
            Letter::XInv => Some(HPoint::x(-1)),
            Letter::Y => Some(p.y_power(1)),
            Letter::YInv => Some(p.y_power(-1)),
            _ => None,
        }
    }

    fn base_char(self) -> char {
        use Letter::*;
        match self {
            A | AInv => 'a',
            S | SInv => 's',
            T | TInv => 't',
            X | XInv => 'x',
            Y | YInv => 'y',
        }
    }

    fn is_inverse(self) -> bool {
        use Letter::*;
        matches!(self, AInv | SInv | TInv | XInv | YInv)
    }

    fn from_char(c: char) -> Option<Letter> {
        match c {
            'a' => Some(Letter::A),
            's' => Some(Letter::S),
            't' => Some(Letter::T),
            'x' => Some(Letter::X),
            'y' => Some(Letter::Y),
            _ => None,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.is_inverse() {
            write!(f, "{}^-1", self.base_char())
        } else {
            write!(f, "{}", self.base_char())
        }
    }
}

/// A word in the generators, read as an edge path starting at any vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PathWord {
    letters: Vec<Letter>,
}

impl PathWord {
    pub fn empty() -> Self {
        PathWord::default()
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        PathWord { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Number of letters.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Length with x and y edges counted as L.
    pub fn length(&self, p: &GroupParams) -> u64 {
        self.letters.iter().map(|l| l.weight(p)).sum()
    }

    pub fn inverse(&self) -> PathWord {
        PathWord {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn concat(&self, other: &PathWord) -> PathWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        PathWord { letters }
    }

    pub fn push(&mut self, l: Letter) {
        self.letters.push(l);
    }

    pub fn extend(&mut self, other: &PathWord) {
        self.letters.extend_from_slice(&other.letters);
    }

    pub fn slice(&self, start: usize, end: usize) -> PathWord {
        PathWord::from_letters(self.letters[start..end].to_vec())
    }

    /// The element the word spells.
    pub fn endpoint(&self, p: &GroupParams) -> GroupElement {
        reduce_word(p, self)
    }

    pub fn is_loop(&self, p: &GroupParams) -> bool {
        self.endpoint(p).is_identity()
    }

    /// Removes adjacent inverse pairs, cyclically as well.
    pub fn cyclically_reduced(&self) -> PathWord {
        let mut stack: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        let (mut lo, mut hi) = (0, stack.len());
        while hi - lo >= 2 && stack[lo] == stack[hi - 1].inverse() {
            lo += 1;
            hi -= 1;
        }
        PathWord::from_letters(stack[lo..hi].to_vec())
    }

    /// Vertices visited from `start`, including both ends.
    pub fn vertices(&self, p: &GroupParams, start: &GroupElement) -> Vec<GroupElement> {
        let mut out = Vec::with_capacity(self.letters.len() + 1);
        let mut g = start.clone();
        out.push(g.clone());
        for &l in &self.letters {
            g.mul_letter(p, l);
            out.push(g.clone());
        }
        out
    }
}

impl fmt::Display for PathWord {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let mut first = true;
        for l in &self.letters {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for PathWord {
    type Err = Error;

    /// Parses words such as `s a s^-1 t a t^-1`, `a^6 (s a s^-1)^-2` or
    /// `1`. Whitespace between letters is optional.
    fn from_str(s: &str) -> Result<Self> {
        let mut parser = Parser {
            chars: s.char_indices().collect(),
            pos: 0,
        };
        let letters = parser.sequence(0)?;
        parser.skip_ws();
        if parser.pos < parser.chars.len() {
            return Err(parser.fail("unexpected character"));
        }
        Ok(PathWord { letters })
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Parser {
    fn fail(&self, msg: &str) -> Error {
        let position = self.chars.get(self.pos).map_or_else(
            || self.chars.last().map_or(0, |(i, c)| i + c.len_utf8()),
            |(i, _)| *i,
        );
        Error::Parse {
            position,
            message: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace() || c == ',') {
            self.pos += 1;
        }
    }

    fn sequence(&mut self, depth: usize) -> Result<Vec<Letter>> {
        if depth > 64 {
            return Err(self.fail("parentheses nested too deeply"));
        }
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            let atom = match self.peek() {
                None | Some(')') => return Ok(out),
                Some('(') => {
                    self.pos += 1;
                    let inner = self.sequence(depth + 1)?;
                    self.skip_ws();
                    if self.peek() != Some(')') {
                        return Err(self.fail("expected ')'"));
                    }
                    self.pos += 1;
                    inner
                }
                Some('1') => {
                    self.pos += 1;
                    Vec::new()
                }
                Some(c) => match Letter::from_char(c) {
                    Some(l) => {
                        self.pos += 1;
                        vec![l]
                    }
                    None => return Err(self.fail("expected a generator a, s, t, x or y")),
                },
            };
            let power = self.exponent()?;
            let reps = power.unsigned_abs() as usize;
            if atom.len().saturating_mul(reps).saturating_add(out.len()) > MAX_PARSED_LETTERS {
                return Err(self.fail("word too long"));
            }
            let unit: Vec<Letter> = if power < 0 {
                atom.iter().rev().map(|l| l.inverse()).collect()
            } else {
                atom
            };
            for _ in 0..reps {
                out.extend_from_slice(&unit);
            }
        }
    }

    /// Optional `^k`, `^-k` or `⁻¹` suffix.
    fn exponent(&mut self) -> Result<i64> {
        if self.peek() == Some('⁻') {
            self.pos += 1;
            if self.peek() != Some('¹') {
                return Err(self.fail("expected '¹' after '⁻'"));
            }
            self.pos += 1;
            return Ok(-1);
        }
        if self.peek() != Some('^') {
            return Ok(1);
        }
        self.pos += 1;
        let negative = match self.peek() {
            Some('-') => {
                self.pos += 1;
                true
            }
            Some('+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let start = self.pos;
        let mut value: i64 = 0;
        while let Some(d) = self.peek().and_then(|c| c.to_digit(10)) {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(d as i64))
                .filter(|&v| v <= MAX_PARSED_LETTERS as i64)
                .ok_or_else(|| self.fail("exponent too large"))?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.fail("expected digits after '^'"));
        }
        Ok(if negative { -value } else { value })
    }
}

/// Which of the two snowflake paths to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnowflakeFlavor {
    S,
    T,
}

impl FromStr for SnowflakeFlavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s" => Ok(SnowflakeFlavor::S),
            "t" => Ok(SnowflakeFlavor::T),
            _ => Err(invalid(format!(
                "unknown snowflake flavor {s:?}; expected s or t"
            ))),
        }
    }
}

impl SnowflakeFlavor {
    /// The stable letters of the first and second escape.
    pub fn order(self) -> (Stable, Stable) {
        match self {
            SnowflakeFlavor::S => (Stable::S, Stable::T),
            SnowflakeFlavor::T => (Stable::T, Stable::S),
        }
    }
}

/// The snowflake path of depth `n` from 1 to `a^(L^n)`.
pub fn snowflake_path(_p: &GroupParams, n: u32, flavor: SnowflakeFlavor) -> Result<PathWord> {
    if n < 1 {
        return Err(invalid("snowflake depth n must be at least 1"));
    }
    if n > 24 {
        return Err(invalid(format!(
            "snowflake depth {n} is too large to materialize"
        )));
    }
    let (first, second) = flavor.order();
    let mut inner = vec![Letter::A];
    for _ in 0..n {
        let mut next = Vec::with_capacity(2 * inner.len() + 4);
        for e in [first, second] {
            next.push(e.letter());
            next.extend_from_slice(&inner);
            next.push(e.inverse().letter());
        }
        inner = next;
    }
    Ok(PathWord::from_letters(inner))
}

/// The snowflake loop: the s-path out to `a^(L^n)` and the t-path back.
pub fn snowflake_loop(p: &GroupParams, n: u32) -> Result<PathWord> {
    let out = snowflake_path(p, n, SnowflakeFlavor::S)?;
    let back = snowflake_path(p, n, SnowflakeFlavor::T)?;
    Ok(out.concat(&back.inverse()))
}

/// Kind of a piece in an escape decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentKind {
    Toral,
    XEscape,
    YEscape,
    AEscape,
}

/// A toral subpath or an escape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    #[serde(with = "word_string")]
    pub word: PathWord,
    /// Difference of the endpoints, as an element of H.
    pub displacement: HPoint,
    /// Set for escapes, and for toral pieces that run along one line.
    pub flavor: Option<Flavor>,
    #[serde(with = "opt_big")]
    pub exponent: Option<BigInt>,
    /// Letter offset of the segment inside the decomposed path.
    pub offset: usize,
}

/// A path cut into escapes and maximal toral pieces relative to a coset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscapeDecomposition {
    pub segments: Vec<Segment>,
}

impl EscapeDecomposition {
    pub fn reassemble(&self) -> PathWord {
        let mut out = PathWord::empty();
        for seg in &self.segments {
            out.extend(&seg.word);
        }
        out
    }

    pub fn escapes(&self) -> impl Iterator<Item = &Segment> {
        self.segments
            .iter()
            .filter(|s| s.kind != SegmentKind::Toral)
    }

    /// The toral path obtained by replacing each escape by its trace.
    pub fn trace_path(&self, p: &GroupParams) -> PathWord {
        let mut out = PathWord::empty();
        for seg in &self.segments {
            match seg.kind {
                SegmentKind::Toral => out.extend(&seg.word),
                _ => {
                    let (g, k) = trace(p, seg).expect("escapes have a trace");
                    let letter = match g {
                        Flavor::A => Letter::A,
                        Flavor::X => Letter::X,
                        Flavor::Y => Letter::Y,
                    };
                    let letter = if k.is_negative() {
                        letter.inverse()
                    } else {
                        letter
                    };
                    let n = k.magnitude().to_usize().expect("trace fits in memory");
                    for _ in 0..n {
                        out.push(letter);
                    }
                }
            }
        }
        out
    }

    /// Reorders the pieces so that pieces of equal kind are adjacent, kinds
    /// appearing in the order given. Since H is abelian the result has the
    /// same length and endpoints as the original path.
    pub fn consolidate(&self, order: &[SegmentKind]) -> PathWord {
        let mut out = PathWord::empty();
        for kind in order {
            for seg in self.segments.iter().filter(|s| s.kind == *kind) {
                out.extend(&seg.word);
            }
        }
        for seg in &self.segments {
            if !order.contains(&seg.kind) {
                out.extend(&seg.word);
            }
        }
        out
    }
}

/// Splits `path`, read from `start`, into escapes from the coset
/// `coset * H` and maximal toral pieces. Both ends must lie in the coset.
pub fn decompose_escapes(
    p: &GroupParams,
    path: &PathWord,
    start: &GroupElement,
    coset: &GroupElement,
) -> Result<EscapeDecomposition> {
    let shift = multiply(p, &invert(p, coset), start);
    let rel: Vec<GroupElement> = path.vertices(p, &shift);
    let inside: Vec<bool> = rel.iter().map(|g| g.as_h().is_some()).collect();
    if !inside[0] || !inside[rel.len() - 1] {
        return Err(invalid("path endpoints must lie in the given coset"));
    }
    let marks: Vec<usize> = (0..rel.len()).filter(|&i| inside[i]).collect();
    let mut segments: Vec<Segment> = Vec::new();
    for pair in marks.windows(2) {
        let (i, j) = (pair[0], pair[1]);
        let from = rel[i].as_h().expect("marked");
        let to = rel[j].as_h().expect("marked");
        let disp = to - from;
        let word = path.slice(i, j);
        if j - i == 1 {
            match segments.last_mut() {
                Some(last) if last.kind == SegmentKind::Toral => {
                    last.word.extend(&word);
                    last.displacement = &last.displacement + &disp;
                }
                _ => segments.push(Segment {
                    kind: SegmentKind::Toral,
                    word,
                    displacement: disp,
                    flavor: None,
                    exponent: None,
                    offset: i,
                }),
            }
            continue;
        }
        let first =
            Stable::from_letter(word.letters()[0]).expect("escapes start with a stable letter");
        let (kind, flavor) = match first {
            Stable::S => (SegmentKind::XEscape, Flavor::X),
            Stable::T => (SegmentKind::YEscape, Flavor::Y),
            Stable::SInv | Stable::TInv => (SegmentKind::AEscape, Flavor::A),
        };
        let exponent = p
            .exponent_along(flavor, &disp)
            .expect("escape endpoints differ along its flavor");
        segments.push(Segment {
            kind,
            word,
            displacement: disp,
            flavor: Some(flavor),
            exponent: Some(exponent),
            offset: i,
        });
    }
    for seg in segments.iter_mut().filter(|s| s.kind == SegmentKind::Toral) {
        if let Some(f) = line_of(&seg.word) {
            seg.exponent = p.exponent_along(f, &seg.displacement);
            seg.flavor = Some(f);
        }
    }
    Ok(EscapeDecomposition { segments })
}

fn line_of(w: &PathWord) -> Option<Flavor> {
    let mut flavor = None;
    for l in w.letters() {
        let f = match l {
            Letter::A | Letter::AInv => Flavor::A,
            Letter::X | Letter::XInv => Flavor::X,
            Letter::Y | Letter::YInv => Flavor::Y,
            _ => return None,
        };
        if flavor.is_some_and(|g| g != f) {
            return None;
        }
        flavor = Some(f);
    }
    flavor.or(Some(Flavor::A))
}

/// Flavor and signed exponent of an escape.
pub fn trace(_p: &GroupParams, seg: &Segment) -> Result<(Flavor, BigInt)> {
    match (seg.kind, seg.flavor, &seg.exponent) {
        (SegmentKind::Toral, _, _) => Err(invalid("a toral segment has no trace")),
        (_, Some(f), Some(k)) => Ok((f, k.clone())),
        _ => Err(invalid("segment is missing its flavor")),
    }
}

/// A subpath allowed to revisit the coset in its interior: it starts and
/// ends in the coset, begins and ends with matching stable letters, and its
/// endpoints differ along the corresponding line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompoundEscape {
    pub start: usize,
    pub end: usize,
    pub flavor: Flavor,
    #[serde(with = "crate::serde_big")]
    pub exponent: BigInt,
}

/// All compound escapes of `path` (read from `start`) from `coset * H`.
pub fn compound_escapes(
    p: &GroupParams,
    path: &PathWord,
    start: &GroupElement,
    coset: &GroupElement,
) -> Vec<CompoundEscape> {
    let shift = multiply(p, &invert(p, coset), start);
    let rel = path.vertices(p, &shift);
    let letters = path.letters();
    let marks: Vec<usize> = (0..rel.len())
        .filter(|&i| rel[i].as_h().is_some())
        .collect();
    let mut out = Vec::new();
    for (a, &i) in marks.iter().enumerate() {
        let Some(first) = letters.get(i).and_then(|&l| Stable::from_letter(l)) else {
            continue;
        };
        let flavor = match first {
            Stable::S => Flavor::X,
            Stable::T => Flavor::Y,
            _ => Flavor::A,
        };
        for &j in &marks[a + 1..] {
            if j < i + 2 || letters[j - 1] != first.inverse().letter() {
                continue;
            }
            let disp = rel[j].as_h().expect("marked") - rel[i].as_h().expect("marked");
            if let Some(k) = p.exponent_along(flavor, &disp) {
                out.push(CompoundEscape {
                    start: i,
                    end: j,
                    flavor,
                    exponent: k,
                });
            }
        }
    }
    out
}

/// The nested factorization of an escape through successive stable-letter
/// conjugations, each level keeping at least a `(R-1)/R` share of the
/// length of the level above.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnfiladeDecomposition {
    pub epsilons: Vec<Stable>,
    #[serde(with = "word_vec")]
    pub alphas: Vec<PathWord>,
    #[serde(with = "word_vec")]
    pub betas: Vec<PathWord>,
    #[serde(with = "word_string")]
    pub end: PathWord,
    pub flavors: Vec<Flavor>,
    #[serde(with = "crate::serde_big::vec")]
    pub exponents: Vec<BigInt>,
    /// `|gamma_i|` for each level.
    pub gamma_lengths: Vec<u64>,
    /// `|gamma'_i|` for each level.
    pub inner_lengths: Vec<u64>,
}

impl EnfiladeDecomposition {
    /// Depth `n` of the enfilade.
    pub fn depth(&self) -> usize {
        self.epsilons.len() - 1
    }

    pub fn flatten(&self) -> PathWord {
        let mut out = PathWord::empty();
        for (i, e) in self.epsilons.iter().enumerate() {
            if i > 0 {
                out.extend(&self.alphas[i - 1]);
            }
            out.push(e.letter());
        }
        out.extend(&self.end);
        for (i, e) in self.epsilons.iter().enumerate().rev() {
            out.push(e.inverse().letter());
            if i > 0 {
                out.extend(&self.betas[i - 1]);
            }
        }
        out
    }

    /// All exponents are nonzero with one common sign.
    pub fn same_sign(&self) -> bool {
        let pos = self.exponents.iter().all(|m| m.is_positive());
        let neg = self.exponents.iter().all(|m| m.is_negative());
        pos || neg
    }

    /// `R |gamma_{i+1}| >= (R-1) |gamma'_i|` at every level.
    pub fn growth_holds(&self, r: Ratio<i64>) -> bool {
        (0..self.depth()).all(|i| growth_ok(r, self.gamma_lengths[i + 1], self.inner_lengths[i]))
    }

    /// `R |gamma'_n| >= (R-3) |gamma|`.
    pub fn end_dominates(&self, r: Ratio<i64>) -> bool {
        let end = *self.inner_lengths.last().expect("at least one level") as i128;
        let total = self.gamma_lengths[0] as i128;
        let (num, den) = (*r.numer() as i128, *r.denom() as i128);
        num * end >= (num - 3 * den) * total
    }
}

fn growth_ok(r: Ratio<i64>, inner: u64, outer: u64) -> bool {
    let (num, den) = (*r.numer() as i128, *r.denom() as i128);
    num * inner as i128 >= (num - den) * outer as i128
}

/// The enfilade decomposition of an escape `path` from H (read from 1).
pub fn enfilade_decompose(
    p: &GroupParams,
    path: &PathWord,
    r: Ratio<i64>,
) -> Result<EnfiladeDecomposition> {
    if r <= Ratio::from_integer(2) {
        return Err(invalid(format!("R must exceed 2, got {r}")));
    }
    let one = GroupElement::identity();
    let outer = decompose_escapes(p, path, &one, &one)
        .map_err(|_| invalid("input is not an escape: it ends outside H"))?;
    let [seg] = outer.segments.as_slice() else {
        return Err(invalid("input is not a single escape"));
    };
    if seg.kind == SegmentKind::Toral {
        return Err(invalid("input is toral, not an escape"));
    }
    let letters = path.letters();
    let (mut lo, mut hi) = (0usize, letters.len());
    let mut start = one;
    let mut epsilons = Vec::new();
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut flavors = vec![seg.flavor.expect("escape")];
    let mut exponents = vec![seg.exponent.clone().expect("escape")];
    let mut gamma_lengths = vec![path.length(p)];
    let mut inner_lengths = Vec::new();
    loop {
        let eps = Stable::from_letter(letters[lo]).expect("escape starts with a stable letter");
        epsilons.push(eps);
        start.mul_stable(p, eps);
        let inner = PathWord::from_letters(letters[lo + 1..hi - 1].to_vec());
        let inner_len = inner.length(p);
        inner_lengths.push(inner_len);
        flavors.push(eps.right_subgroup());
        let dec = decompose_escapes(p, &inner, &start, &start)?;
        let next = dec
            .escapes()
            .find(|s| growth_ok(r, s.word.length(p), inner_len))
            .cloned();
        let Some(next) = next else {
            return Ok(EnfiladeDecomposition {
                epsilons,
                alphas,
                betas,
                end: inner,
                flavors,
                exponents,
                gamma_lengths,
                inner_lengths,
            });
        };
        let (a, b) = (lo + 1 + next.offset, lo + 1 + next.offset + next.word.len());
        alphas.push(PathWord::from_letters(letters[lo + 1..a].to_vec()));
        betas.push(PathWord::from_letters(letters[b..hi - 1].to_vec()));
        start.mul_word(p, &alphas[alphas.len() - 1]);
        exponents.push(next.exponent.clone().expect("escape"));
        gamma_lengths.push(next.word.length(p));
        lo = a;
        hi = b;
    }
}

/// Outcome of measuring the biLipschitz constant of a loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BilipReport {
    /// Largest ratio of arc distance to group distance over resolved pairs.
    /// Exact when `complete`, otherwise a certified lower bound.
    pub constant: Option<(u64, u64)>,
    pub complete: bool,
    /// First pair of positions visiting the same vertex, if any.
    pub repeated_vertex: Option<(usize, usize)>,
}

impl BilipReport {
    pub fn constant_f64(&self) -> Option<f64> {
        self.constant.map(|(n, d)| n as f64 / d as f64)
    }
}

fn loop_vertices(p: &GroupParams, lp: &PathWord) -> Result<(Vec<GroupElement>, Vec<u64>, u64)> {
    if !lp.is_loop(p) {
        return Err(invalid("path is not closed"));
    }
    let mut verts = lp.vertices(p, &GroupElement::identity());
    verts.pop();
    let mut pos = Vec::with_capacity(verts.len());
    let mut acc = 0;
    for l in lp.letters() {
        pos.push(acc);
        acc += l.weight(p);
    }
    Ok((verts, pos, acc))
}

/// `max d_S(p, q) / d_X(p, q)` over vertex pairs of a closed loop, where
/// `d_S` is distance along the loop.
pub fn loop_bilip_constant(
    p: &GroupParams,
    lp: &PathWord,
    cap: u32,
    budget: usize,
) -> Result<BilipReport> {
    let (verts, pos, total) = loop_vertices(p, lp)?;
    let mut first_seen: HashMap<Vec<u8>, usize> = HashMap::new();
    for (j, v) in verts.iter().enumerate() {
        if let Some(&i) = first_seen.get(&v.encode()) {
            return Ok(BilipReport {
                constant: None,
                complete: false,
                repeated_vertex: Some((i, j)),
            });
        }
        first_seen.insert(v.encode(), j);
    }
    let pairs: Vec<(usize, usize)> = (0..verts.len())
        .flat_map(|i| (i + 1..verts.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<Option<Ratio<u64>>>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let along = pos[j] - pos[i];
            let ds = along.min(total - along);
            let limit = cap.min(ds.min(u32::MAX as u64) as u32);
            let dx = pair_dist(p, &verts[i], &verts[j], limit, budget)?;
            Ok(dx.map(|d| Ratio::new(ds, d as u64)))
        })
        .collect();
    let mut best: Option<Ratio<u64>> = None;
    let mut complete = true;
    for r in results {
        match r? {
            Some(q) => best = Some(best.map_or(q, |b| b.max(q))),
            None => complete = false,
        }
    }
    Ok(BilipReport {
        constant: best.map(|q| (*q.numer(), *q.denom())),
        complete,
        repeated_vertex: None,
    })
}

/// Result of checking antipodal distances on a loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopCheck {
    pub geodesic: bool,
    pub length: u64,
    /// First antipodal pair `(i, j, distance)` closer than half the length.
    pub counterexample: Option<(usize, usize, u32)>,
}

/// Checks that every antipodal pair of vertices is at distance exactly half
/// the loop length.
pub fn check_geodesic_loop(
    p: &GroupParams,
    lp: &PathWord,
    cap: u32,
    budget: usize,
) -> Result<LoopCheck> {
    let (verts, pos, total) = loop_vertices(p, lp)?;
    if total % 2 != 0 {
        return Err(invalid("loop has odd length"));
    }
    let half = total / 2;
    if (cap as u64) < half {
        return Err(Error::Incomplete(format!(
            "cap {cap} is below half the loop length {half}"
        )));
    }
    let index: HashMap<u64, usize> = pos.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut pairs = Vec::new();
    for (i, &s) in pos.iter().enumerate() {
        if s >= half {
            break;
        }
        let j = *index
            .get(&(s + half))
            .ok_or_else(|| invalid(format!("antipode of vertex {i} is not a vertex")))?;
        pairs.push((i, j));
    }
    let dists: Vec<Result<Option<u32>>> = pairs
        .par_iter()
        .map(|&(i, j)| pair_dist(p, &verts[i], &verts[j], half as u32, budget))
        .collect();
    let mut counterexample = None;
    for (&(i, j), d) in pairs.iter().zip(dists) {
        let d = d?.expect("arc length bounds the distance");
        if d as u64 != half && counterexample.is_none() {
            counterexample = Some((i, j, d));
        }
    }
    Ok(LoopCheck {
        geodesic: counterexample.is_none(),
        length: total,
        counterexample,
    })
}

pub fn verify_geodesic_loop(
    p: &GroupParams,
    lp: &PathWord,
    cap: u32,
    budget: usize,
) -> Result<bool> {
    check_geodesic_loop(p, lp, cap, budget).map(|c| c.geodesic)
}

pub(crate) mod word_string {
    use super::PathWord;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(w: &PathWord, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(w)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<PathWord, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub(crate) mod word_vec {
    use super::PathWord;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ws: &[PathWord], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(ws.iter().map(|w| w.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<PathWord>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

mod opt_big {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match n {
            Some(k) => crate::serde_big::serialize(k, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "crate::serde_big")] BigInt);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}
