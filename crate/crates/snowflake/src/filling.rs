//! Van Kampen diagrams for approximate polygons and snowflake loops.
//!
//! Diagrams are combinatorial. Every edge path used by a cell is stored
//! once as an [`Arc`]; cells and the outer boundary are chains of arcs.
//! Geodesic arcs between two points are canonical, so two cells that share
//! a side automatically share the same arcs, and [`Diagram::validate`] can
//! check that every interior arc is used once in each direction.

use crate::error::{invalid, Error, Result};
use crate::hnn_group::{invert, multiply, reduce_word, GroupElement, Stable, Syllable};
use crate::paths::{decompose_escapes, snowflake_path, PathWord, SegmentKind, SnowflakeFlavor};
use crate::vertex_group::{Flavor, GroupParams, HPoint};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

/// An edge path from `start` to `end` reading `word`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub start: GroupElement,
    pub end: GroupElement,
    pub word: PathWord,
}

/// A sequence of arcs; the flag marks an arc traversed backwards.
pub type Chain = Vec<(usize, bool)>;

pub fn reverse_chain(c: &Chain) -> Chain {
    c.iter().rev().map(|&(id, r)| (id, !r)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub chain: Chain,
}

/// An arc shared by two cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Gluing {
    pub arc: usize,
    pub cells: [usize; 2],
}

#[derive(Debug, Clone)]
pub struct Diagram {
    params: GroupParams,
    arcs: Vec<Arc>,
    cells: Vec<Cell>,
    boundary: Chain,
}

impl Diagram {
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn boundary(&self) -> &Chain {
        &self.boundary
    }

    pub fn area(&self) -> usize {
        self.cells.len()
    }

    pub fn chain_word(&self, c: &Chain) -> PathWord {
        let mut out = PathWord::empty();
        for &(id, rev) in c {
            if rev {
                out.extend(&self.arcs[id].word.inverse());
            } else {
                out.extend(&self.arcs[id].word);
            }
        }
        out
    }

    pub fn cell_word(&self, i: usize) -> PathWord {
        self.chain_word(&self.cells[i].chain)
    }

    pub fn boundary_word(&self) -> PathWord {
        self.chain_word(&self.boundary)
    }

    /// Length of the cyclically reduced boundary word of cell `i`.
    pub fn cell_length(&self, i: usize) -> u64 {
        self.cell_word(i).cyclically_reduced().length(&self.params)
    }

    /// Largest cell length, or 0 for an empty diagram.
    pub fn mesh(&self) -> u64 {
        (0..self.cells.len())
            .map(|i| self.cell_length(i))
            .max()
            .unwrap_or(0)
    }

    pub fn gluings(&self) -> Vec<Gluing> {
        let mut users: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (ci, cell) in self.cells.iter().enumerate() {
            for &(id, _) in &cell.chain {
                let list = users.entry(id).or_default();
                if list.last() != Some(&ci) {
                    list.push(ci);
                }
            }
        }
        users
            .into_iter()
            .filter(|(_, cs)| cs.len() == 2)
            .map(|(arc, cs)| Gluing {
                arc,
                cells: [cs[0], cs[1]],
            })
            .collect()
    }

    fn check_chain(&self, c: &Chain, what: &str) -> Result<()> {
        let ends = |&(id, rev): &(usize, bool)| {
            let a = &self.arcs[id];
            if rev {
                (&a.end, &a.start)
            } else {
                (&a.start, &a.end)
            }
        };
        for (i, link) in c.iter().enumerate() {
            let next = &c[(i + 1) % c.len()];
            if ends(link).1 != ends(next).0 {
                return Err(Error::Verification(format!(
                    "{what} is not a closed chain at link {i}"
                )));
            }
        }
        Ok(())
    }

    /// Checks that every cell and the boundary are closed chains, that
    /// every cell boundary reduces to the identity, and that each arc is
    /// used by the cells exactly as often (with sign) as by the boundary.
    pub fn validate(&self) -> Result<()> {
        let mut net: HashMap<usize, i64> = HashMap::new();
        for (i, cell) in self.cells.iter().enumerate() {
            self.check_chain(&cell.chain, &format!("cell {i}"))?;
            if !reduce_word(&self.params, &self.cell_word(i)).is_identity() {
                return Err(Error::Verification(format!(
                    "cell {i} boundary is not trivial"
                )));
            }
            for &(id, rev) in &cell.chain {
                *net.entry(id).or_default() += if rev { -1 } else { 1 };
            }
        }
        self.check_chain(&self.boundary, "boundary")?;
        for &(id, rev) in &self.boundary {
            *net.entry(id).or_default() -= if rev { -1 } else { 1 };
        }
        if let Some((id, n)) = net.into_iter().find(|&(_, n)| n != 0) {
            return Err(Error::Verification(format!(
                "arc {id} ({}) has unbalanced multiplicity {n}",
                self.arcs[id].word
            )));
        }
        Ok(())
    }

    pub fn export(&self) -> DiagramExport {
        DiagramExport {
            area: self.area(),
            mesh: self.mesh(),
            boundary: self.boundary_word().to_string(),
            boundary_length: self.boundary_word().length(&self.params),
            cells: (0..self.cells.len())
                .map(|i| CellExport {
                    boundary: self.cell_word(i).to_string(),
                    length: self.cell_length(i),
                    arcs: self.cells[i]
                        .chain
                        .iter()
                        .map(|&(arc, reversed)| ArcUse { arc, reversed })
                        .collect(),
                })
                .collect(),
            arcs: self
                .arcs
                .iter()
                .map(|a| ArcExport {
                    start: a.start.to_string(),
                    end: a.end.to_string(),
                    word: a.word.to_string(),
                })
                .collect(),
            gluings: self.gluings(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagramExport {
    pub area: usize,
    pub mesh: u64,
    pub boundary: String,
    pub boundary_length: u64,
    pub cells: Vec<CellExport>,
    pub arcs: Vec<ArcExport>,
    pub gluings: Vec<Gluing>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellExport {
    pub boundary: String,
    pub length: u64,
    pub arcs: Vec<ArcUse>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArcUse {
    pub arc: usize,
    pub reversed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArcExport {
    pub start: String,
    pub end: String,
    pub word: String,
}

/// Accumulates arcs and cells, sharing arcs between cells.
pub struct DiagramBuilder {
    params: GroupParams,
    arcs: Vec<Arc>,
    by_start: HashMap<(GroupElement, PathWord), usize>,
    geodesics: HashMap<(GroupElement, GroupElement), Chain>,
    cells: Vec<Cell>,
}

impl DiagramBuilder {
    pub fn new(p: &GroupParams) -> Self {
        DiagramBuilder {
            params: *p,
            arcs: Vec::new(),
            by_start: HashMap::new(),
            geodesics: HashMap::new(),
            cells: Vec::new(),
        }
    }

    /// The arc reading `word` from `start`, reusing an existing arc that
    /// covers the same path in either direction.
    pub fn path(&mut self, start: &GroupElement, word: &PathWord) -> Chain {
        if word.is_empty() {
            return Vec::new();
        }
        if let Some(&id) = self.by_start.get(&(start.clone(), word.clone())) {
            return vec![(id, false)];
        }
        let mut end = start.clone();
        end.mul_word(&self.params, word);
        if let Some(&id) = self.by_start.get(&(end.clone(), word.inverse())) {
            return vec![(id, true)];
        }
        let id = self.arcs.len();
        self.by_start.insert((start.clone(), word.clone()), id);
        self.arcs.push(Arc {
            start: start.clone(),
            end,
            word: word.clone(),
        });
        vec![(id, false)]
    }

    /// A canonical geodesic between two points of a common coset of H.
    /// Escapes are split into their stable edges and a canonical geodesic
    /// of the inner coset, so sides glued across a corridor share arcs.
    pub fn geodesic(&mut self, from: &GroupElement, to: &GroupElement) -> Result<Chain> {
        if from == to {
            return Ok(Vec::new());
        }
        let (lo, hi, flip) = if from < to {
            (from, to, false)
        } else {
            (to, from, true)
        };
        let key = (lo.clone(), hi.clone());
        let chain = match self.geodesics.get(&key) {
            Some(c) => c.clone(),
            None => {
                let c = self.build_geodesic(lo, hi)?;
                self.geodesics.insert(key, c.clone());
                c
            }
        };
        Ok(if flip { reverse_chain(&chain) } else { chain })
    }

    fn build_geodesic(&mut self, lo: &GroupElement, hi: &GroupElement) -> Result<Chain> {
        let p = self.params;
        let d = multiply(&p, &invert(&p, lo), hi);
        let d = d
            .as_h()
            .ok_or_else(|| invalid(format!("{lo} and {hi} do not lie in a common coset of H")))?
            .clone();
        let word = p.geodesic_word_h(&d);
        let dec = decompose_escapes(&p, &word, lo, lo)?;
        let mut chain = Vec::new();
        let mut cur = lo.clone();
        for seg in &dec.segments {
            if seg.kind == SegmentKind::Toral {
                chain.extend(self.path(&cur, &seg.word));
            } else {
                let letters = seg.word.letters();
                let n = letters.len();
                let e = PathWord::from_letters(vec![letters[0]]);
                let inner = PathWord::from_letters(letters[1..n - 1].to_vec());
                chain.extend(self.path(&cur, &e));
                let mut a = cur.clone();
                a.mul_word(&p, &e);
                let mut b = a.clone();
                b.mul_word(&p, &inner);
                chain.extend(self.geodesic(&a, &b)?);
                chain.extend(self.path(&b, &e.inverse()));
            }
            cur.mul_word(&p, &seg.word);
        }
        Ok(chain)
    }

    fn geo_h(&mut self, from: &HPoint, to: &HPoint) -> Result<Chain> {
        self.geodesic(
            &GroupElement::from_h(from.clone()),
            &GroupElement::from_h(to.clone()),
        )
    }

    /// Adds a cell. A chain whose arcs cancel in pairs bounds nothing and
    /// is dropped; the return value says whether a cell was added.
    pub fn add_cell(&mut self, chain: Chain) -> bool {
        let mut net: HashMap<usize, i64> = HashMap::new();
        for &(id, rev) in &chain {
            *net.entry(id).or_default() += if rev { -1 } else { 1 };
        }
        if net.values().all(|&n| n == 0) {
            return false;
        }
        self.cells.push(Cell { chain });
        true
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn finish(self, boundary: Chain) -> Diagram {
        Diagram {
            params: self.params,
            arcs: self.arcs,
            cells: self.cells,
            boundary,
        }
    }
}

fn concat(parts: impl IntoIterator<Item = Chain>) -> Chain {
    parts.into_iter().flatten().collect()
}

fn at(h: &HPoint) -> GroupElement {
    GroupElement::from_h(h.clone())
}

fn shifted(origin: &GroupElement, h: &HPoint) -> GroupElement {
    let mut g = origin.clone();
    g.mul_h(h);
    g
}

/// Exponents of the pieces of a subdivided side, in the side's direction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Subdivision {
    #[serde(with = "crate::serde_big::vec")]
    pub exponents: Vec<BigInt>,
}

impl Subdivision {
    pub fn new(exponents: Vec<BigInt>) -> Self {
        Subdivision { exponents }
    }

    /// `k` pieces as equal as possible summing to `total`.
    pub fn even(total: &BigInt, k: usize) -> Self {
        let k_big = BigInt::from(k.max(1));
        let (q, r) = total.abs().div_rem(&k_big);
        let r = r.to_usize().expect("remainder below piece count");
        let sign = if total.is_negative() { -1 } else { 1 };
        Subdivision::new(
            (0..k.max(1))
                .map(|i| (&q + BigInt::from((i < r) as u8)) * sign)
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn total(&self) -> BigInt {
        self.exponents.iter().sum()
    }

    pub fn max_abs(&self) -> BigInt {
        self.exponents
            .iter()
            .map(|e| e.abs())
            .max()
            .unwrap_or_default()
    }

    /// Partial sums, starting at 0.
    pub fn points(&self) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero()];
        for e in &self.exponents {
            let next = out.last().expect("nonempty") + e;
            out.push(next);
        }
        out
    }

    /// The same subdivision read from the other end.
    pub fn reversed(&self) -> Subdivision {
        Subdivision::new(self.exponents.iter().rev().map(|e| -e).collect())
    }

    fn from_points(pts: &[BigInt]) -> Subdivision {
        Subdivision::new(pts.windows(2).map(|w| &w[1] - &w[0]).collect())
    }

    /// Checks that the pieces sum to `total`, share its sign, and respect
    /// the count and size limits.
    pub fn check(&self, total: &BigInt, lambda: usize, e: &BigInt) -> Result<()> {
        if self.is_empty() {
            return Err(invalid("subdivision has no segments"));
        }
        if self.len() > lambda {
            return Err(invalid(format!(
                "subdivision has {} segments, more than {lambda}",
                self.len()
            )));
        }
        if &self.max_abs() > e {
            return Err(invalid(format!("a segment exceeds the exponent bound {e}")));
        }
        if &self.total() != total {
            return Err(invalid(format!(
                "segments sum to {}, expected {total}",
                self.total()
            )));
        }
        if self
            .exponents
            .iter()
            .any(|x| x.signum() * total.signum() < BigInt::zero())
        {
            return Err(invalid("segments must share the sign of the side"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolygonKind {
    Bigon,
    Triangle,
    Diamond,
}

impl PolygonKind {
    fn flavors(self, bigon: Flavor) -> Vec<Flavor> {
        match self {
            PolygonKind::Bigon => vec![bigon, bigon],
            PolygonKind::Triangle => vec![Flavor::X, Flavor::Y, Flavor::A],
            PolygonKind::Diamond => vec![Flavor::X, Flavor::Y, Flavor::X, Flavor::Y],
        }
    }
}

/// A D-approximate polygon in H. Side `i` runs from `corners[i]` along
/// `flavors[i]^exponents[i]`; its end lies within `d` of `corners[i+1]`
/// and is joined to it by `corner_paths[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxPolygon {
    pub kind: PolygonKind,
    pub corners: Vec<HPoint>,
    pub flavors: Vec<Flavor>,
    #[serde(with = "crate::serde_big::vec")]
    pub exponents: Vec<BigInt>,
    /// Left empty to use geodesics.
    #[serde(default, with = "crate::paths::word_vec")]
    pub corner_paths: Vec<PathWord>,
    pub d: u64,
}

impl ApproxPolygon {
    pub fn bigon(g: Flavor, corners: [HPoint; 2], exponents: [BigInt; 2], d: u64) -> Self {
        ApproxPolygon {
            kind: PolygonKind::Bigon,
            corners: corners.to_vec(),
            flavors: vec![g, g],
            exponents: exponents.to_vec(),
            corner_paths: Vec::new(),
            d,
        }
    }

    /// Corners `g0, g1, g2` with sides `x^m0`, `y^m1`, `a^m2`.
    pub fn triangle(corners: [HPoint; 3], exponents: [BigInt; 3], d: u64) -> Self {
        ApproxPolygon {
            kind: PolygonKind::Triangle,
            corners: corners.to_vec(),
            flavors: PolygonKind::Triangle.flavors(Flavor::A),
            exponents: exponents.to_vec(),
            corner_paths: Vec::new(),
            d,
        }
    }

    /// Corners `g1, h1, g2, h2` with sides `x^m1`, `y^n1`, `x^m2`, `y^n2`.
    pub fn diamond(corners: [HPoint; 4], exponents: [BigInt; 4], d: u64) -> Self {
        ApproxPolygon {
            kind: PolygonKind::Diamond,
            corners: corners.to_vec(),
            flavors: PolygonKind::Diamond.flavors(Flavor::A),
            exponents: exponents.to_vec(),
            corner_paths: Vec::new(),
            d,
        }
    }

    pub fn sides(&self) -> usize {
        self.corners.len()
    }

    /// End of side `i`.
    pub fn side_end(&self, p: &GroupParams, i: usize) -> HPoint {
        &self.corners[i] + &p.power(self.flavors[i], self.exponents[i].clone())
    }

    /// Distance from the end of side `i` to the next corner.
    pub fn gap(&self, p: &GroupParams, i: usize) -> BigUint {
        let next = &self.corners[(i + 1) % self.sides()];
        p.dist_h(&(next - &self.side_end(p, i)))
    }

    /// Corner path `i`, defaulting to a geodesic.
    pub fn corner_path(&self, p: &GroupParams, i: usize) -> PathWord {
        match self.corner_paths.get(i) {
            Some(w) => w.clone(),
            None => {
                let next = &self.corners[(i + 1) % self.sides()];
                p.geodesic_word_h(&(next - &self.side_end(p, i)))
            }
        }
    }

    pub fn validate(&self, p: &GroupParams) -> Result<()> {
        let n = match self.kind {
            PolygonKind::Bigon => 2,
            PolygonKind::Triangle => 3,
            PolygonKind::Diamond => 4,
        };
        if self.corners.len() != n || self.exponents.len() != n || self.flavors.len() != n {
            return Err(invalid(format!(
                "a {:?} needs {n} corners, flavors and exponents",
                self.kind
            )));
        }
        if self.flavors != self.kind.flavors(self.flavors[0]) {
            return Err(invalid(format!(
                "side flavors {:?} do not match a {:?}",
                self.flavors, self.kind
            )));
        }
        if !self.corner_paths.is_empty() && self.corner_paths.len() != n {
            return Err(invalid(format!("expected {n} corner paths")));
        }
        let d = BigUint::from(self.d);
        for i in 0..n {
            if self.gap(p, i) > d {
                return Err(invalid(format!(
                    "gap after side {i} exceeds D = {}",
                    self.d
                )));
            }
            if let Some(w) = self.corner_paths.get(i) {
                if w.length(p) > self.d {
                    return Err(invalid(format!(
                        "corner path {i} is longer than D = {}",
                        self.d
                    )));
                }
                let next = &self.corners[(i + 1) % n];
                let want = GroupElement::from_h(next - &self.side_end(p, i));
                if reduce_word(p, w) != want {
                    return Err(invalid(format!(
                        "corner path {i} does not join side {i} to the next corner"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A true polygon near an approximate one, with the distances between
/// corresponding corners and side ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TruePolygon {
    pub corners: Vec<HPoint>,
    #[serde(with = "crate::serde_big::vec")]
    pub exponents: Vec<BigInt>,
    pub gaps: Vec<u64>,
}

impl TruePolygon {
    pub fn max_gap(&self) -> u64 {
        self.gaps.iter().copied().max().unwrap_or(0)
    }
}

fn meet_xy(p: &GroupParams, on_x: &HPoint, on_y: &HPoint) -> Result<HPoint> {
    let w = p.line_invariant(Flavor::Y, on_y);
    let (q, r) = (&w - &on_x.u).div_rem(&p.l_big());
    if !r.is_zero() {
        return Err(Error::Verification(format!(
            "x-line through {on_x} misses y-line through {on_y}"
        )));
    }
    Ok(HPoint::new(on_x.u.clone(), q))
}

fn meet_xa(on_x: &HPoint, on_a: &HPoint) -> HPoint {
    HPoint::new(on_x.u.clone(), on_a.v.clone())
}

fn meet_ya(p: &GroupParams, on_y: &HPoint, on_a: &HPoint) -> HPoint {
    let w = p.line_invariant(Flavor::Y, on_y);
    HPoint::new(w - &on_a.v * p.l_big(), on_a.v.clone())
}

fn gap_list(p: &GroupParams, pairs: &[(HPoint, HPoint)]) -> Vec<u64> {
    pairs
        .iter()
        .map(|(a, b)| p.dist_h(&(b - a)).to_u64().unwrap_or(u64::MAX))
        .collect()
}

/// Moves an approximate triangle onto a true one: corners `g'0, g'1, g'2`
/// with `g'0 x^m g'1`, `g'1 y^m = g'2` and `g'2 a^(-L m) = g'0`.
pub fn snap_triangle(p: &GroupParams, poly: &ApproxPolygon) -> Result<TruePolygon> {
    if poly.kind != PolygonKind::Triangle {
        return Err(invalid("snap_triangle needs a triangle"));
    }
    poly.validate(p)?;
    let g = &poly.corners;
    let (shift, _) = p.xy_line_intersection(&(&g[1] - &g[0]));
    let g1 = meet_xy(p, &g[0], &(&g[1] + &HPoint::a(shift)))?;
    let g0 = meet_xa(&g[0], &g[2]);
    let g2 = meet_ya(p, &g1, &g[2]);
    let m = &g1.v - &g0.v;
    let m2 = &g0.u - &g2.u;
    debug_assert_eq!(m2, -(&m * p.l_big()));
    let ends: Vec<HPoint> = (0..3).map(|i| poly.side_end(p, i)).collect();
    let gaps = gap_list(
        p,
        &[
            (g[0].clone(), g0.clone()),
            (g[1].clone(), g1.clone()),
            (g[2].clone(), g2.clone()),
            (ends[0].clone(), g1.clone()),
            (ends[1].clone(), g2.clone()),
            (ends[2].clone(), g0.clone()),
        ],
    );
    Ok(TruePolygon {
        corners: vec![g0, g1, g2],
        exponents: vec![m.clone(), m, m2],
        gaps,
    })
}

/// Moves an approximate diamond onto a true one: corners `g'1, h'1, g'2,
/// h'2` with sides `x^m`, `y^n`, `x^-m`, `y^-n`.
pub fn snap_diamond(p: &GroupParams, poly: &ApproxPolygon) -> Result<TruePolygon> {
    if poly.kind != PolygonKind::Diamond {
        return Err(invalid("snap_diamond needs a diamond"));
    }
    poly.validate(p)?;
    let c = &poly.corners;
    let (g1, h1, g2, h2) = (&c[0], &c[1], &c[2], &c[3]);
    let (p1, _) = p.xy_line_intersection(&(h1 - g1));
    let (p2, _) = p.xy_line_intersection(&(h2 - g1));
    let h1t = meet_xy(p, g1, &(h1 + &HPoint::a(p1)))?;
    // shifting the y-line by a^l is the same as shifting the x-line by a^-l
    let (l3, _) = p.xy_line_intersection(&(&h1t - g2));
    let g2t = meet_xy(p, &(g2 - &HPoint::a(l3)), &h1t)?;
    let h2t = meet_xy(p, &g2t, &(h2 + &HPoint::a(p2)))?;
    let g1t = meet_xy(p, g1, &h2t)?;
    let m = &h1t.v - &g1t.v;
    let n = &h1t.v - &g2t.v;
    debug_assert_eq!(&h2t.v - &g2t.v, -m.clone());
    let ends: Vec<HPoint> = (0..4).map(|i| poly.side_end(p, i)).collect();
    let gaps = gap_list(
        p,
        &[
            (g1.clone(), g1t.clone()),
            (h1.clone(), h1t.clone()),
            (g2.clone(), g2t.clone()),
            (h2.clone(), h2t.clone()),
            (ends[0].clone(), h1t.clone()),
            (ends[1].clone(), g2t.clone()),
            (ends[2].clone(), h2t.clone()),
            (ends[3].clone(), g1t.clone()),
        ],
    );
    Ok(TruePolygon {
        corners: vec![g1t, h1t, g2t, h2t],
        exponents: vec![m.clone(), n.clone(), -m, -n],
        gaps,
    })
}

/// Bounds promised for a filling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FillBounds {
    pub area: u64,
    pub mesh: f64,
    pub exponent: f64,
}

fn d_alpha(p: &GroupParams, d: u64) -> f64 {
    (d as f64).powf(p.alpha())
}

fn e_root(p: &GroupParams, e: f64) -> f64 {
    e.powf(1.0 / p.alpha())
}

pub fn bigon_bounds(p: &GroupParams, lambda: u64, e: f64, d: u64) -> FillBounds {
    let c = p.c();
    FillBounds {
        area: lambda,
        mesh: 2.0 * (2.0 * c + 1.0) * d as f64 + 2.0 * c * e_root(p, e),
        exponent: e + p.l() as f64 * d_alpha(p, d),
    }
}

pub fn triangle_bounds(p: &GroupParams, lambda: u64, e: f64, d: u64) -> FillBounds {
    let c = p.c();
    FillBounds {
        area: (lambda * lambda + 9 * lambda + 6) / 2,
        mesh: 4.0 * c + (6.0 * c + 2.0) * d as f64 + 2.0 * c * e_root(p, e),
        exponent: 1.0 + e / p.l() as f64 + d_alpha(p, d),
    }
}

pub fn diamond_bounds(p: &GroupParams, lambda: u64, e: f64, d: u64) -> FillBounds {
    let c = p.c();
    FillBounds {
        area: lambda * lambda + 4 * lambda + 4,
        mesh: 3.0 * p.l() as f64 + (8.0 * c + 2.0) * d as f64 + 4.0 * c * e_root(p, e),
        exponent: e + 2.0 * p.l() as f64 * d_alpha(p, d),
    }
}

/// A filled polygon with the subdivisions of its remaining sides.
#[derive(Debug, Clone)]
pub struct FillResult {
    pub diagram: Diagram,
    /// Subdivisions of the sides that were not given, in side order.
    pub outputs: Vec<Subdivision>,
    pub true_polygon: Option<TruePolygon>,
}

struct BigonSpec<'a> {
    g: Flavor,
    base: HPoint,
    bottom: &'a Subdivision,
    h: HPoint,
    m1: BigInt,
    /// Corner chain from the end of the bottom to `h`.
    delta_end: Chain,
    /// Corner chain from `base` to `h g^m1`, and its word.
    delta_start: Chain,
    delta_start_word: PathWord,
    reversed: bool,
}

/// Cells of a bigon whose bottom runs from `base` along the given
/// subdivision and whose top runs from `h` along `g^m1`. Returns the
/// subdivision of the top, read from `h`.
fn bigon_cells(b: &mut DiagramBuilder, bigon: BigonSpec) -> Result<Subdivision> {
    let p = b.params;
    let g = bigon.g;
    // a degenerate bottom is treated as a single empty piece
    let s = if bigon.bottom.is_empty() {
        vec![BigInt::zero(); 2]
    } else {
        bigon.bottom.points()
    };
    let n = s.len() - 1;
    let m0 = s[n].clone();
    let sigma = if m0.is_negative() {
        -BigInt::one()
    } else {
        BigInt::one()
    };
    let neg_m1 = -(&bigon.m1 * &sigma);
    let case_a = &m0 * &sigma <= neg_m1;
    let (lo, hi) = if neg_m1.is_negative() {
        (neg_m1.clone(), BigInt::zero())
    } else {
        (BigInt::zero(), neg_m1.clone())
    };
    let pivot = if case_a {
        n - 1
    } else {
        let last = (0..=n)
            .filter(|&i| {
                let v = &s[i] * &sigma;
                lo <= v && v <= hi
            })
            .max()
            .unwrap_or(0);
        last.min(n - 1)
    };
    let bot = |i: usize| at(&(&bigon.base + &p.power(g, s[i].clone())));
    let top = |k: &BigInt| at(&(&bigon.h + &p.power(g, k.clone())));
    let h = at(&bigon.h);
    let mut cells: Vec<Chain> = Vec::new();
    let mut deltas: Vec<Chain> = vec![bigon.delta_start.clone()];
    for i in 1..=pivot {
        deltas.push(b.path(&bot(i), &bigon.delta_start_word));
    }
    for i in 1..=pivot {
        cells.push(concat([
            b.geodesic(&bot(i - 1), &bot(i))?,
            deltas[i].clone(),
            b.geodesic(&top(&(&bigon.m1 + &s[i])), &top(&(&bigon.m1 + &s[i - 1])))?,
            reverse_chain(&deltas[i - 1]),
        ]));
    }
    let to_h = |b: &mut DiagramBuilder, i: usize| -> Result<Chain> {
        if i == n {
            Ok(bigon.delta_end.clone())
        } else {
            b.geodesic(&bot(i), &h)
        }
    };
    let next = to_h(b, pivot + 1)?;
    cells.push(concat([
        b.geodesic(&bot(pivot), &bot(pivot + 1))?,
        next,
        b.geodesic(&h, &top(&(&bigon.m1 + &s[pivot])))?,
        reverse_chain(&deltas[pivot]),
    ]));
    for i in pivot + 1..n {
        let here = to_h(b, i)?;
        let next = to_h(b, i + 1)?;
        cells.push(concat([
            b.geodesic(&bot(i), &bot(i + 1))?,
            next,
            reverse_chain(&here),
        ]));
    }
    for c in cells {
        b.add_cell(if bigon.reversed { reverse_chain(&c) } else { c });
    }
    let mut out = vec![&bigon.m1 + &s[pivot]];
    for i in (1..=pivot).rev() {
        out.push(&s[i - 1] - &s[i]);
    }
    Ok(Subdivision::new(out))
}

/// Geodesic chain along a subdivided side.
fn side_chain(
    b: &mut DiagramBuilder,
    start: &HPoint,
    g: Flavor,
    sub: &Subdivision,
) -> Result<Chain> {
    let p = b.params;
    let pts: Vec<GroupElement> = sub
        .points()
        .iter()
        .map(|k| at(&(start + &p.power(g, k.clone()))))
        .collect();
    let mut out = Vec::new();
    for w in pts.windows(2) {
        out.extend(b.geodesic(&w[0], &w[1])?);
    }
    Ok(out)
}

/// Fills a D-approximate bigon, given a subdivision of side 0 into at
/// most `lambda` pieces of exponent at most `e`. The output is the induced
/// subdivision of side 1.
pub fn fill_bigon(
    p: &GroupParams,
    poly: &ApproxPolygon,
    given: &Subdivision,
    lambda: usize,
    e: &BigInt,
) -> Result<FillResult> {
    if poly.kind != PolygonKind::Bigon {
        return Err(invalid("fill_bigon needs a bigon"));
    }
    poly.validate(p)?;
    given.check(&poly.exponents[0], lambda, e)?;
    let g = poly.flavors[0];
    let mut b = DiagramBuilder::new(p);
    let (cp0, cp1) = (poly.corner_path(p, 0), poly.corner_path(p, 1));
    let e0 = poly.side_end(p, 0);
    let e1 = poly.side_end(p, 1);
    let delta_end = b.path(&at(&e0), &cp0);
    let back = b.path(&at(&e1), &cp1);
    let top = bigon_cells(
        &mut b,
        BigonSpec {
            g,
            base: poly.corners[0].clone(),
            bottom: given,
            h: poly.corners[1].clone(),
            m1: poly.exponents[1].clone(),
            delta_end: delta_end.clone(),
            delta_start: reverse_chain(&back),
            delta_start_word: cp1.inverse(),
            reversed: false,
        },
    )?;
    let boundary = concat([
        side_chain(&mut b, &poly.corners[0], g, given)?,
        delta_end,
        side_chain(&mut b, &poly.corners[1], g, &top)?,
        back,
    ]);
    Ok(FillResult {
        diagram: b.finish(boundary),
        outputs: vec![top],
        true_polygon: None,
    })
}

/// `L * round(t / L)`, rounding halves up.
fn round_to_multiple(t: &BigInt, l: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (&two * t + l).div_floor(&(&two * l)) * l
}

fn dedup(mut v: Vec<BigInt>) -> Vec<BigInt> {
    v.dedup();
    v
}

/// Strip between two subdivisions of one a-line segment based at
/// `origin`: `fwd` is traversed forwards and `back` backwards.
fn strip_cells(
    b: &mut DiagramBuilder,
    origin: &GroupElement,
    fwd: &[BigInt],
    back: &[BigInt],
) -> Result<()> {
    let pt = |t: &BigInt| shifted(origin, &HPoint::a(t.clone()));
    for i in 1..fwd.len() {
        let c = concat([
            b.geodesic(&pt(&fwd[i - 1]), &pt(&fwd[i]))?,
            b.geodesic(&pt(&fwd[i]), &pt(&back[i]))?,
            b.geodesic(&pt(&back[i]), &pt(&back[i - 1]))?,
            b.geodesic(&pt(&back[i - 1]), &pt(&fwd[i - 1]))?,
        ]);
        b.add_cell(c);
    }
    Ok(())
}

/// Grid over the true triangle `origin`, `origin x^N`, `origin a^(LN)`
/// cut along the x- and y-lines through the points `origin a^(L k)`.
fn triangle_grid(b: &mut DiagramBuilder, origin: &GroupElement, ks: &[BigInt]) -> Result<()> {
    let p = b.params;
    let pt =
        |i: &BigInt, j: &BigInt| shifted(origin, &(&HPoint::x(i.clone()) + &p.y_power(j.clone())));
    for a in 1..ks.len() {
        for c in 1..=a {
            let (i0, i1, j0, j1) = (&ks[a - 1], &ks[a], &ks[c - 1], &ks[c]);
            let chain = if c < a {
                concat([
                    b.geodesic(&pt(i0, j0), &pt(i1, j0))?,
                    b.geodesic(&pt(i1, j0), &pt(i1, j1))?,
                    b.geodesic(&pt(i1, j1), &pt(i0, j1))?,
                    b.geodesic(&pt(i0, j1), &pt(i0, j0))?,
                ])
            } else {
                concat([
                    b.geodesic(&pt(i0, i0), &pt(i1, i0))?,
                    b.geodesic(&pt(i1, i0), &pt(i1, i1))?,
                    b.geodesic(&pt(i1, i1), &pt(i0, i0))?,
                ])
            };
            b.add_cell(chain);
        }
    }
    Ok(())
}

/// Grid over the true diamond `origin x^i y^j`, `i` in `is`, `j` in `js`.
fn diamond_grid(
    b: &mut DiagramBuilder,
    origin: &GroupElement,
    is: &[BigInt],
    js: &[BigInt],
) -> Result<()> {
    let p = b.params;
    let pt =
        |i: &BigInt, j: &BigInt| shifted(origin, &(&HPoint::x(i.clone()) + &p.y_power(j.clone())));
    for a in 1..is.len() {
        for c in 1..js.len() {
            let (i0, i1, j0, j1) = (&is[a - 1], &is[a], &js[c - 1], &js[c]);
            let chain = concat([
                b.geodesic(&pt(i0, j0), &pt(i1, j0))?,
                b.geodesic(&pt(i1, j0), &pt(i1, j1))?,
                b.geodesic(&pt(i1, j1), &pt(i0, j1))?,
                b.geodesic(&pt(i0, j1), &pt(i0, j0))?,
            ]);
            b.add_cell(chain);
        }
    }
    Ok(())
}

/// One cell closing the corner between the end `end` of a side, the next
/// corner `next` (reached by `path`) and the true corner `corner`.
fn corner_cell(
    b: &mut DiagramBuilder,
    end: &HPoint,
    path: &PathWord,
    next: &HPoint,
    corner: &HPoint,
) -> Result<()> {
    let c = concat([
        b.path(&at(end), path),
        b.geo_h(next, corner)?,
        b.geo_h(corner, end)?,
    ]);
    b.add_cell(c);
    Ok(())
}

/// Fills a D-approximate triangle given a subdivision of its a-side (side
/// 2). Outputs subdivide the x-side and the y-side.
pub fn fill_triangle(
    p: &GroupParams,
    poly: &ApproxPolygon,
    given: &Subdivision,
    lambda: usize,
    e: &BigInt,
) -> Result<FillResult> {
    let snapped = snap_triangle(p, poly)?;
    given.check(&poly.exponents[2], lambda, e)?;
    let l = p.l_big();
    let g = &poly.corners;
    let m = &poly.exponents;
    let t = &snapped.corners;
    let n_true = snapped.exponents[0].clone();
    let ends: Vec<HPoint> = (0..3).map(|i| poly.side_end(p, i)).collect();
    let cps: Vec<PathWord> = (0..3).map(|i| poly.corner_path(p, i)).collect();
    let mut b = DiagramBuilder::new(p);

    // a-side: approximate side against the true side read backwards
    let delta_start = b.geo_h(&g[2], &t[2])?;
    let delta_start_word = b_word(&b, &delta_start);
    let delta_end = b.geo_h(&ends[2], &t[0])?;
    let top_a = bigon_cells(
        &mut b,
        BigonSpec {
            g: Flavor::A,
            base: g[2].clone(),
            bottom: given,
            h: t[0].clone(),
            m1: -snapped.exponents[2].clone(),
            delta_end,
            delta_start,
            delta_start_word,
            reversed: false,
        },
    )?;
    let old = top_a.reversed().points();
    let rounded: Vec<BigInt> = old.iter().map(|x| round_to_multiple(x, &l)).collect();
    strip_cells(&mut b, &at(&t[2]), &old, &rounded)?;
    let mut ks: Vec<BigInt> = rounded.iter().map(|r| &n_true + r / &l).collect();
    ks.reverse();
    let ks = dedup(ks);
    triangle_grid(&mut b, &at(&t[0]), &ks)?;
    let true_side = Subdivision::from_points(&ks);

    // x- and y-sides: true side against the approximate side read backwards
    let mut outputs = Vec::new();
    for (side, flavor, start) in [(0usize, Flavor::X, &t[0]), (1, Flavor::Y, &t[1])] {
        let delta_start = b.geo_h(start, &g[side])?;
        let delta_start_word = b_word(&b, &delta_start);
        let delta_end = b.geo_h(&t[side + 1], &ends[side])?;
        let top = bigon_cells(
            &mut b,
            BigonSpec {
                g: flavor,
                base: start.clone(),
                bottom: &true_side,
                h: ends[side].clone(),
                m1: -m[side].clone(),
                delta_end,
                delta_start,
                delta_start_word,
                reversed: true,
            },
        )?;
        outputs.push(top.reversed());
    }
    for i in 0..3 {
        corner_cell(&mut b, &ends[i], &cps[i], &g[(i + 1) % 3], &t[(i + 1) % 3])?;
    }
    let mut boundary = Vec::new();
    for (i, sub) in [&outputs[0], &outputs[1], given].into_iter().enumerate() {
        boundary.extend(side_chain(&mut b, &g[i], poly.flavors[i], sub)?);
        boundary.extend(b.path(&at(&ends[i]), &cps[i]));
    }
    Ok(FillResult {
        diagram: b.finish(boundary),
        outputs,
        true_polygon: Some(snapped),
    })
}

fn b_word(b: &DiagramBuilder, c: &Chain) -> PathWord {
    let mut out = PathWord::empty();
    for &(id, rev) in c {
        if rev {
            out.extend(&b.arcs[id].word.inverse());
        } else {
            out.extend(&b.arcs[id].word);
        }
    }
    out
}

/// Fills a D-approximate diamond given subdivisions of side 0 (x) and
/// side 1 (y). Outputs subdivide sides 2 and 3.
pub fn fill_diamond(
    p: &GroupParams,
    poly: &ApproxPolygon,
    given_x: &Subdivision,
    given_y: &Subdivision,
    lambda: usize,
    e: &BigInt,
) -> Result<FillResult> {
    let snapped = snap_diamond(p, poly)?;
    given_x.check(&poly.exponents[0], lambda, e)?;
    given_y.check(&poly.exponents[1], lambda, e)?;
    let g = &poly.corners;
    let m = &poly.exponents;
    let t = &snapped.corners;
    let ends: Vec<HPoint> = (0..4).map(|i| poly.side_end(p, i)).collect();
    let cps: Vec<PathWord> = (0..4).map(|i| poly.corner_path(p, i)).collect();
    let mut b = DiagramBuilder::new(p);

    // given sides against the true sides read backwards
    let mut true_pts = Vec::new();
    for (side, flavor, given) in [(0usize, Flavor::X, given_x), (1, Flavor::Y, given_y)] {
        let delta_start = b.geo_h(&g[side], &t[side])?;
        let delta_start_word = b_word(&b, &delta_start);
        let delta_end = b.geo_h(&ends[side], &t[side + 1])?;
        let top = bigon_cells(
            &mut b,
            BigonSpec {
                g: flavor,
                base: g[side].clone(),
                bottom: given,
                h: t[side + 1].clone(),
                m1: -snapped.exponents[side].clone(),
                delta_end,
                delta_start,
                delta_start_word,
                reversed: false,
            },
        )?;
        true_pts.push(top.reversed().points());
    }
    diamond_grid(&mut b, &at(&t[0]), &true_pts[0], &true_pts[1])?;

    // remaining true sides against the approximate sides read backwards
    let mut outputs = Vec::new();
    for (side, flavor) in [(2usize, Flavor::X), (3, Flavor::Y)] {
        let pts = &true_pts[side - 2];
        let true_side = Subdivision::from_points(pts).reversed();
        let delta_start = b.geo_h(&t[side], &g[side])?;
        let delta_start_word = b_word(&b, &delta_start);
        let delta_end = b.geo_h(&t[(side + 1) % 4], &ends[side])?;
        let top = bigon_cells(
            &mut b,
            BigonSpec {
                g: flavor,
                base: t[side].clone(),
                bottom: &true_side,
                h: ends[side].clone(),
                m1: -m[side].clone(),
                delta_end,
                delta_start,
                delta_start_word,
                reversed: true,
            },
        )?;
        outputs.push(top.reversed());
    }
    for i in 0..4 {
        corner_cell(&mut b, &ends[i], &cps[i], &g[(i + 1) % 4], &t[(i + 1) % 4])?;
    }
    let mut boundary = Vec::new();
    for (i, sub) in [given_x, given_y, &outputs[0], &outputs[1]]
        .into_iter()
        .enumerate()
    {
        boundary.extend(side_chain(&mut b, &g[i], poly.flavors[i], sub)?);
        boundary.extend(b.path(&at(&ends[i]), &cps[i]));
    }
    Ok(FillResult {
        diagram: b.finish(boundary),
        outputs,
        true_polygon: Some(snapped),
    })
}

fn l_pow(p: &GroupParams, k: u32) -> BigInt {
    num_traits::pow(p.l_big(), k as usize)
}

/// Smallest depth `m` with `|a^(L^(p-m))| + lambda |a^(L^(p-m-1))|` at
/// most half the length of the depth-`p` snowflake loop.
pub fn cap_off_depth(p: &GroupParams, depth: u32, lambda: u64) -> Option<u32> {
    let half = p.dist_a_power(&l_pow(p, depth));
    (1..depth).find(|&m| {
        let outer = p.dist_a_power(&l_pow(p, depth - m));
        let piece = p.dist_a_power(&l_pow(p, depth - m - 1));
        outer + piece * lambda <= half
    })
}

struct SnowflakeFill<'a> {
    b: DiagramBuilder,
    loop_length: u64,
    p: &'a GroupParams,
}

impl SnowflakeFill<'_> {
    /// Fills the branch whose loop portion runs from `origin` to
    /// `origin a^(sign L^k)` with its a-side cut at the points `pts`.
    /// Returns the boundary chain of that loop portion.
    fn branch(
        &mut self,
        origin: &GroupElement,
        negative: bool,
        k: u32,
        pts: &[BigInt],
    ) -> Result<Chain> {
        let p = *self.p;
        let pt = |t: &BigInt| shifted(origin, &HPoint::a(t.clone()));
        let mut pieces = Vec::new();
        for w in pts.windows(2) {
            pieces.extend(self.b.geodesic(&pt(&w[0]), &pt(&w[1]))?);
        }
        if k == 0 {
            return Ok(pieces);
        }
        let portion = if negative {
            snowflake_path(&p, k, SnowflakeFlavor::T)?.inverse()
        } else {
            snowflake_path(&p, k, SnowflakeFlavor::S)?
        };
        let piece_len: u64 = pts
            .windows(2)
            .map(|w| p.dist_h(&HPoint::a(&w[1] - &w[0])).to_u64().expect("small"))
            .sum();
        if k == 1 || 2 * (portion.length(&p) + piece_len) <= self.loop_length {
            let arc = self.b.path(origin, &portion);
            self.b
                .add_cell(concat([arc.clone(), reverse_chain(&pieces)]));
            return Ok(arc);
        }
        let l = p.l_big();
        let kk = if negative {
            -l_pow(&p, k - 1)
        } else {
            l_pow(&p, k - 1)
        };
        let rounded: Vec<BigInt> = pts.iter().map(|t| round_to_multiple(t, &l)).collect();
        strip_cells(&mut self.b, origin, &rounded, pts)?;
        let js = dedup(rounded.iter().map(|r| r / &l).collect());
        triangle_grid(&mut self.b, origin, &js)?;

        let s = Stable::S.letter();
        let t = Stable::T.letter();
        let mut out = Vec::new();
        let mut ox = origin.clone();
        ox.mul_stable(&p, Stable::S);
        out.extend(self.b.path(origin, &PathWord::from_letters(vec![s])));
        out.extend(self.branch(&ox, negative, k - 1, &js)?);
        let x_end = shifted(origin, &HPoint::x(kk.clone()));
        out.extend(
            self.b
                .path(&x_end, &PathWord::from_letters(vec![s]))
                .into_iter()
                .map(|(i, r)| (i, !r)),
        );
        let mut oy = x_end.clone();
        oy.mul_stable(&p, Stable::T);
        out.extend(self.b.path(&x_end, &PathWord::from_letters(vec![t])));
        out.extend(self.branch(&oy, negative, k - 1, &js)?);
        let y_end = shifted(&x_end, &p.y_power(kk));
        out.extend(
            self.b
                .path(&y_end, &PathWord::from_letters(vec![t]))
                .into_iter()
                .map(|(i, r)| (i, !r)),
        );
        Ok(out)
    }
}

/// A diagram for the depth-`depth` snowflake loop: the central diamond is
/// cut into a `lambda` by `lambda` grid, the cuts are carried into the
/// triangular branches, and each branch is closed by a single cell once
/// that cell is at most half the loop length.
pub fn subdivide_snowflake(p: &GroupParams, depth: u32, lambda: usize) -> Result<Diagram> {
    if depth < 1 {
        return Err(invalid("snowflake depth must be at least 1"));
    }
    if lambda < 1 {
        return Err(invalid("lambda must be positive"));
    }
    let gamma = crate::paths::snowflake_loop(p, depth)?;
    let n = l_pow(p, depth - 1);
    let lam = BigInt::from(lambda);
    let cuts = dedup(
        (0..=lambda)
            .map(|k| (&n * BigInt::from(k)).div_floor(&lam))
            .collect(),
    );
    let mut fill = SnowflakeFill {
        b: DiagramBuilder::new(p),
        loop_length: gamma.length(p),
        p,
    };
    let one = GroupElement::identity();
    diamond_grid(&mut fill.b, &one, &cuts, &cuts)?;

    let corner = |i: &BigInt, j: &BigInt| at(&(&HPoint::x(i.clone()) + &p.y_power(j.clone())));
    let zero = BigInt::zero();
    let back: Vec<BigInt> = cuts.iter().rev().map(|c| c - &n).collect();
    // side start, stable letter, branch sign, cut points
    let sides = [
        (corner(&zero, &zero), Stable::S, false, cuts.clone()),
        (corner(&n, &zero), Stable::T, false, cuts.clone()),
        (corner(&n, &n), Stable::S, true, back.clone()),
        (corner(&zero, &n), Stable::T, true, back),
    ];
    let mut boundary = Vec::new();
    for (start, e, negative, pts) in sides {
        let mut origin = start.clone();
        origin.mul_stable(p, e);
        let letter = PathWord::from_letters(vec![e.letter()]);
        boundary.extend(fill.b.path(&start, &letter));
        boundary.extend(fill.branch(&origin, negative, depth - 1, &pts)?);
        let end = shifted(&origin, &HPoint::a(pts.last().expect("cuts").clone()));
        boundary.extend(fill.b.path(&end, &letter.inverse()));
    }
    let diagram = fill.b.finish(boundary);
    debug_assert_eq!(diagram.boundary_word(), gamma);
    Ok(diagram)
}

/// Area bound for assembling a central region, enfilades and branching
/// regions out to shell `n`, capping each remaining branch with one cell.
pub fn area_budget(central: &BigUint, enfilade: &BigUint, branching: &BigUint, n: u32) -> BigUint {
    let two_n = BigUint::one() << n;
    central + BigUint::from(4u8) * (enfilade + branching) * (&two_n - BigUint::one()) + (two_n << 2)
}

/// The same bound summed shell by shell: shell `k` holds `4 * 2^(k-1)`
/// enfilade and branching fillings, and `4 * 2^n` caps close the last.
pub fn area_budget_by_shells(
    central: &BigUint,
    enfilade: &BigUint,
    branching: &BigUint,
    n: u32,
) -> BigUint {
    let mut total = central.clone();
    for k in 1..=n {
        total += (BigUint::from(4u8) << (k - 1)) * (enfilade + branching);
    }
    total + (BigUint::from(4u8) << n)
}

/// Least number of shells `n >= 0` with `n >= log_(L/3)(E R^alpha / L)`.
pub fn cap_shells(p: &GroupParams, e: f64, r: f64) -> Result<u32> {
    if !(e > 0.0 && r > 0.0) {
        return Err(invalid("E and R must be positive"));
    }
    let l = p.l() as f64;
    let x = (e * r.powf(p.alpha()) / l).ln() / (l / 3.0).ln();
    Ok(if x <= 0.0 { 0 } else { x.ceil() as u32 })
}

/// A vertex region of the dual tree with the length of boundary it holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub arc_length: u64,
    #[serde(default)]
    pub label: String,
}

/// A corridor, carrying the boundary length of its two stable edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub u: usize,
    pub v: usize,
    pub length: u64,
}

/// The dual tree of the corridor decomposition of an HNN diagram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HnnDualTree {
    pub nodes: Vec<TreeNode>,
    pub edges: Vec<TreeEdge>,
}

impl HnnDualTree {
    pub fn total_length(&self) -> u64 {
        self.nodes.iter().map(|n| n.arc_length).sum::<u64>()
            + self.edges.iter().map(|e| e.length).sum::<u64>()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(invalid("tree has no nodes"));
        }
        if self.edges.len() != n - 1 {
            return Err(invalid(format!(
                "a tree on {n} nodes needs {} edges",
                n - 1
            )));
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            if e.u >= n || e.v >= n {
                return Err(invalid(format!(
                    "edge ({}, {}) names a missing node",
                    e.u, e.v
                )));
            }
            let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
            if a == b {
                return Err(invalid("edges contain a cycle"));
            }
            parent[a] = b;
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: HnnDualTree =
            serde_json::from_str(s).map_err(|e| invalid(format!("bad tree JSON: {e}")))?;
        t.validate()?;
        Ok(t)
    }

    /// The dual tree of a closed path: one node per coset of H it visits,
    /// one edge per pair of cosets joined by a stable letter.
    pub fn from_loop(p: &GroupParams, lp: &PathWord) -> Result<Self> {
        if !lp.is_loop(p) {
            return Err(invalid("path is not closed"));
        }
        let mut ids: HashMap<Vec<Syllable>, usize> = HashMap::new();
        let mut nodes: Vec<TreeNode> = Vec::new();
        let mut edges: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        let mut g = GroupElement::identity();
        let mut node_of = |g: &GroupElement, nodes: &mut Vec<TreeNode>| {
            *ids.entry(g.syllables().to_vec()).or_insert_with(|| {
                let mut rep = g.clone();
                rep.mul_h(&-g.tail().clone());
                nodes.push(TreeNode {
                    arc_length: 0,
                    label: format!("{rep} H"),
                });
                nodes.len() - 1
            })
        };
        for &l in lp.letters() {
            let here = node_of(&g, &mut nodes);
            g.mul_letter(p, l);
            if l.is_stable() {
                let there = node_of(&g, &mut nodes);
                *edges.entry((here.min(there), here.max(there))).or_default() += 1;
            } else {
                nodes[here].arc_length += l.weight(p);
            }
        }
        let tree = HnnDualTree {
            nodes,
            edges: edges
                .into_iter()
                .map(|((u, v), length)| TreeEdge { u, v, length })
                .collect(),
        };
        tree.validate()?;
        Ok(tree)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph dual_tree {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  {i} [label=\"{i}: {}\"];", n.arc_length);
        }
        for e in &self.edges {
            let _ = writeln!(out, "  {} -- {} [label=\"{}\"];", e.u, e.v, e.length);
        }
        out.push_str("}\n");
        out
    }

    /// For each edge, the boundary length on the `u` side and on the `v`
    /// side, edge excluded.
    fn side_weights(&self) -> Vec<(u64, u64)> {
        let n = self.nodes.len();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.u].push((e.v, i));
            adj[e.v].push((e.u, i));
        }
        let mut order = vec![0usize];
        let mut parent = vec![(usize::MAX, usize::MAX); n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut k = 0;
        while k < order.len() {
            let x = order[k];
            k += 1;
            for &(y, e) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = (x, e);
                    order.push(y);
                }
            }
        }
        let mut below: Vec<u64> = self.nodes.iter().map(|n| n.arc_length).collect();
        for &x in order.iter().rev() {
            let (px, e) = parent[x];
            if px != usize::MAX {
                below[px] += below[x] + self.edges[e].length;
            }
        }
        let total = self.total_length();
        let mut out = vec![(0, 0); self.edges.len()];
        for x in 1..n {
            let (_, e) = parent[x];
            let len = self.edges[e].length;
            let child = below[x];
            let rest = total - child - len;
            out[e] = if self.edges[e].u == x {
                (child, rest)
            } else {
                (rest, child)
            };
        }
        out
    }

    /// `f` at node `v`: the longest piece of boundary left after removing
    /// the region, minus half the total.
    pub fn f_at_vertex(&self, v: usize) -> f64 {
        let sides = self.side_weights();
        let far = self
            .edges
            .iter()
            .zip(&sides)
            .filter_map(|(e, &(su, sv))| {
                if e.u == v {
                    Some(sv + e.length)
                } else if e.v == v {
                    Some(su + e.length)
                } else {
                    None
                }
            })
            .max()
            .unwrap_or(0);
        far as f64 - self.total_length() as f64 / 2.0
    }

    /// `f` at the point a fraction `t` of the way from `u` to `v` along
    /// edge `e`.
    pub fn f_on_edge(&self, e: usize, t: f64) -> f64 {
        let (su, sv) = self.side_weights()[e];
        let len = self.edges[e].length as f64;
        f64::max(su as f64 + t * len, sv as f64 + (1.0 - t) * len)
            - self.total_length() as f64 / 2.0
    }
}

/// Where `f` is non-positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CentralRegion {
    Vertex {
        node: usize,
        f: f64,
    },
    Edge {
        edge: usize,
        u: usize,
        v: usize,
        position: f64,
        f: f64,
    },
}

/// The unique point of the tree where `f <= 0`.
pub fn find_central_region(tree: &HnnDualTree) -> Result<CentralRegion> {
    tree.validate()?;
    let sides = tree.side_weights();
    let total = tree.total_length() as i128;
    let mut found = Vec::new();
    for v in 0..tree.nodes.len() {
        let f = tree.f_at_vertex(v);
        if f <= 0.0 {
            found.push(CentralRegion::Vertex { node: v, f });
        }
    }
    for (i, (e, &(su, sv))) in tree.edges.iter().zip(&sides).enumerate() {
        let len = e.length as i128;
        let (su, sv) = (su as i128, sv as i128);
        // f is zero where the two sides balance; that point must be interior
        if len > 0 && (sv - su).abs() < len {
            debug_assert_eq!(su + sv + len, total);
            let position = (sv - su + len) as f64 / (2 * len) as f64;
            found.push(CentralRegion::Edge {
                edge: i,
                u: e.u,
                v: e.v,
                position,
                f: tree.f_on_edge(i, position),
            });
        }
    }
    match found.len() {
        1 => Ok(found.pop().expect("one")),
        0 => Err(Error::Verification("f is positive everywhere".into())),
        k => Err(Error::Verification(format!(
            "f is non-positive at {k} points"
        ))),
    }
}

/// The dual tree of the depth-`depth` snowflake loop.
pub fn snowflake_hnn_tree(p: &GroupParams, depth: u32) -> Result<HnnDualTree> {
    HnnDualTree::from_loop(p, &crate::paths::snowflake_loop(p, depth)?)
}

/// A polygon together with the subdivisions of its given sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillRequest {
    pub polygon: ApproxPolygon,
    /// One subdivision for a bigon or triangle, two for a diamond.
    pub subdivisions: Vec<Subdivision>,
    pub lambda: usize,
    #[serde(with = "crate::serde_big")]
    pub e: BigInt,
}

/// Summary of a filling checked against its promised bounds.
#[derive(Debug, Clone, Serialize)]
pub struct FillReport {
    pub kind: PolygonKind,
    pub area: usize,
    pub mesh: u64,
    pub bounds: FillBounds,
    pub outputs: Vec<Subdivision>,
    /// Largest output exponent, in absolute value.
    #[serde(with = "crate::serde_big")]
    pub output_exponent: BigInt,
    pub true_polygon: Option<TruePolygon>,
    pub area_ok: bool,
    pub mesh_ok: bool,
    pub exponent_ok: bool,
    pub output_count_ok: bool,
}

impl FillReport {
    pub fn holds(&self) -> bool {
        self.area_ok && self.mesh_ok && self.exponent_ok && self.output_count_ok
    }
}

impl FillRequest {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| invalid(format!("bad polygon JSON: {e}")))
    }

    pub fn bounds(&self, p: &GroupParams) -> FillBounds {
        let e = self.e.to_f64().unwrap_or(f64::INFINITY);
        let lambda = self.lambda as u64;
        match self.polygon.kind {
            PolygonKind::Bigon => bigon_bounds(p, lambda, e, self.polygon.d),
            PolygonKind::Triangle => triangle_bounds(p, lambda, e, self.polygon.d),
            PolygonKind::Diamond => diamond_bounds(p, lambda, e, self.polygon.d),
        }
    }

    pub fn fill(&self, p: &GroupParams) -> Result<FillResult> {
        let want = if self.polygon.kind == PolygonKind::Diamond {
            2
        } else {
            1
        };
        if self.subdivisions.len() != want {
            return Err(invalid(format!(
                "a {:?} takes {want} subdivisions",
                self.polygon.kind
            )));
        }
        let subs = &self.subdivisions;
        match self.polygon.kind {
            PolygonKind::Bigon => fill_bigon(p, &self.polygon, &subs[0], self.lambda, &self.e),
            PolygonKind::Triangle => {
                fill_triangle(p, &self.polygon, &subs[0], self.lambda, &self.e)
            }
            PolygonKind::Diamond => {
                fill_diamond(p, &self.polygon, &subs[0], &subs[1], self.lambda, &self.e)
            }
        }
    }

    /// Fills, validates the diagram and compares it with the bounds.
    pub fn report(&self, p: &GroupParams) -> Result<(FillResult, FillReport)> {
        let r = self.fill(p)?;
        r.diagram.validate()?;
        let bounds = self.bounds(p);
        let output_exponent = r
            .outputs
            .iter()
            .map(|s| s.max_abs())
            .max()
            .unwrap_or_default();
        let report = FillReport {
            kind: self.polygon.kind,
            area: r.diagram.area(),
            mesh: r.diagram.mesh(),
            output_exponent: output_exponent.clone(),
            area_ok: r.diagram.area() as u64 <= bounds.area,
            mesh_ok: r.diagram.mesh() as f64 <= bounds.mesh,
            exponent_ok: output_exponent.to_f64().unwrap_or(f64::INFINITY) <= bounds.exponent,
            output_count_ok: r.outputs.iter().all(|s| s.len() <= self.lambda),
            bounds,
            outputs: r.outputs.clone(),
            true_polygon: r.true_polygon.clone(),
        };
        Ok((r, report))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p6() -> GroupParams {
        GroupParams::new(6).unwrap()
    }

    fn big(v: &[i64]) -> Subdivision {
        Subdivision::new(v.iter().map(|&x| BigInt::from(x)).collect())
    }

    fn h(u: i64, v: i64) -> HPoint {
        HPoint::new(u, v)
    }

    /// Sets D to the largest gap.
    fn tight(p: &GroupParams, mut poly: ApproxPolygon) -> ApproxPolygon {
        poly.d = (0..poly.sides())
            .map(|i| poly.gap(p, i).to_u64().unwrap())
            .max()
            .unwrap();
        poly
    }

    #[test]
    fn bigon_with_offset_corners() {
        let p = p6();
        let poly = tight(
            &p,
            ApproxPolygon::bigon(Flavor::A, [h(0, 0), h(13, 1)], [12.into(), (-12).into()], 0),
        );
        assert!(poly.d <= 4);
        let r = fill_bigon(&p, &poly, &big(&[5, 7]), 2, &BigInt::from(12)).unwrap();
        r.diagram.validate().unwrap();
        assert!(r.diagram.area() <= 2);
        assert_eq!(r.outputs[0].total(), BigInt::from(-12));
        assert_eq!(
            reduce_word(&p, &r.diagram.boundary_word()),
            GroupElement::identity()
        );
    }

    #[test]
    fn degenerate_bigon_has_no_cells() {
        let p = p6();
        let poly = ApproxPolygon::bigon(Flavor::X, [h(0, 0), h(0, 9)], [9.into(), (-9).into()], 0);
        let r = fill_bigon(&p, &poly, &big(&[4, 5]), 2, &BigInt::from(9)).unwrap();
        r.diagram.validate().unwrap();
        assert_eq!(r.diagram.area(), 0);
    }

    #[test]
    fn true_triangle_grid() {
        let p = p6();
        // g0 x^6 = g1, g1 y^6 = g2, g2 a^-36 = g0
        let poly = ApproxPolygon::triangle(
            [h(0, 0), h(0, 6), h(36, 0)],
            [6.into(), 6.into(), (-36).into()],
            0,
        );
        let given = Subdivision::even(&BigInt::from(-36), 6);
        let r = fill_triangle(&p, &poly, &given, 6, &BigInt::from(36)).unwrap();
        r.diagram.validate().unwrap();
        assert!(r.diagram.area() as u64 <= triangle_bounds(&p, 6, 36.0, 0).area);
    }

    #[test]
    fn approximate_triangle() {
        let p = p6();
        let poly = tight(
            &p,
            ApproxPolygon::triangle(
                [h(1, 0), h(-1, 7), h(40, -1)],
                [7.into(), 6.into(), (-39).into()],
                0,
            ),
        );
        let snapped = snap_triangle(&p, &poly).unwrap();
        assert!(snapped.max_gap() <= 2 * poly.d + 6);
        let r = fill_triangle(&p, &poly, &big(&[-20, -19]), 2, &BigInt::from(20)).unwrap();
        r.diagram.validate().unwrap();
        assert!(r.diagram.area() <= 14);
    }

    #[test]
    fn approximate_diamond() {
        let p = p6();
        let poly = tight(
            &p,
            ApproxPolygon::diamond(
                [h(0, 0), h(1, 5), h(-1, 10), h(0, 4)],
                [5.into(), 1.into(), (-6).into(), 0.into()],
                0,
            ),
        );
        let snapped = snap_diamond(&p, &poly).unwrap();
        assert!(snapped.max_gap() <= poly.d + 9);
        let r = fill_diamond(&p, &poly, &big(&[2, 3]), &big(&[1]), 2, &BigInt::from(5)).unwrap();
        r.diagram.validate().unwrap();
        assert!(r.diagram.area() <= 16);
    }

    #[test]
    fn subdivision_checks() {
        let s = big(&[3, 0, 4]);
        assert!(s.check(&BigInt::from(7), 3, &BigInt::from(4)).is_ok());
        assert!(s.check(&BigInt::from(7), 2, &BigInt::from(4)).is_err());
        assert!(big(&[8, -1])
            .check(&BigInt::from(7), 2, &BigInt::from(8))
            .is_err());
        assert_eq!(s.reversed().points().last().unwrap(), &BigInt::from(-7));
    }

    #[test]
    fn snowflake_cell_counts() {
        let p = p6();
        let counts: Vec<usize> = (1..=3)
            .map(|d| {
                let dg = subdivide_snowflake(&p, d, 6).unwrap();
                dg.validate().unwrap();
                assert_eq!(
                    dg.boundary_word(),
                    crate::paths::snowflake_loop(&p, d).unwrap()
                );
                dg.area()
            })
            .collect();
        // at depth 3 every cut is a multiple of L, so the strips are empty
        assert_eq!(counts, vec![1, 40, 116]);
    }

    #[test]
    fn dual_tree_shape() {
        let p = p6();
        for d in 1..=4 {
            let t = snowflake_hnn_tree(&p, d).unwrap();
            assert_eq!(t.nodes.len(), (1 << (d + 2)) - 3);
            assert!(t.edges.iter().all(|e| e.length == 2));
            assert_eq!(
                t.total_length(),
                crate::paths::snowflake_loop(&p, d).unwrap().length(&p)
            );
        }
    }

    #[test]
    fn central_vertex_of_a_path() {
        let t = HnnDualTree {
            nodes: [10, 2, 10]
                .iter()
                .map(|&arc_length| TreeNode {
                    arc_length,
                    label: String::new(),
                })
                .collect(),
            edges: vec![
                TreeEdge {
                    u: 0,
                    v: 1,
                    length: 1,
                },
                TreeEdge {
                    u: 1,
                    v: 2,
                    length: 1,
                },
            ],
        };
        match find_central_region(&t).unwrap() {
            CentralRegion::Vertex { node, f } => assert_eq!((node, f), (1, -1.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn central_point_inside_an_edge() {
        let t = HnnDualTree {
            nodes: vec![
                TreeNode {
                    arc_length: 3,
                    label: String::new(),
                },
                TreeNode {
                    arc_length: 5,
                    label: String::new(),
                },
            ],
            edges: vec![TreeEdge {
                u: 0,
                v: 1,
                length: 4,
            }],
        };
        match find_central_region(&t).unwrap() {
            CentralRegion::Edge { position, f, .. } => {
                assert!((position - 0.75).abs() < 1e-12);
                assert_eq!(f, 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn budget_forms_agree() {
        for n in 0..12 {
            let (c, e, b) = (BigUint::from(7u8), BigUint::from(11u8), BigUint::from(5u8));
            assert_eq!(
                area_budget(&c, &e, &b, n),
                area_budget_by_shells(&c, &e, &b, n)
            );
        }
    }
}
