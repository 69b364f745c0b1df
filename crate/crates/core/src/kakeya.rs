//! Kakeya and almost-Kakeya sets: membership checkers with line witnesses,
//! the quadratic almost-Kakeya construction for odd q, the recursive Kakeya
//! construction, exhaustive minimum search in dimension 2, and the table of
//! size bounds.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    all_directions, lex_vectors, lines_in_direction, nonhorizontal_directions, pack_point,
    unpack_point, Direction, Line, Point,
};
use crate::gf::{prime_power_split, Field};
use crate::rational::from_u64;

/// Cap on q^n for allocating a point set.
pub const MAX_POINTSET_DOMAIN: u128 = 100_000_000;
/// Cap on q^n for the direction-sweep checkers.
pub const MAX_CHECK_DOMAIN: u128 = 10_000_000;
/// Cap on q^n for the exhaustive shift search.
pub const MAX_EXHAUSTIVE_SHIFTS: u128 = 1_000_000;

/// A subset of F_q^n stored as a bitmap over packed point indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    field: Field,
    n: usize,
    domain: u64,
    words: Vec<u64>,
    len: usize,
}

impl PointSet {
    pub fn new(field: Field, n: usize) -> Result<PointSet> {
        assert!(n >= 1);
        let domain = (field.q() as u128).pow(n as u32);
        if domain > MAX_POINTSET_DOMAIN {
            return Err(Error::EnumerationTooLarge {
                size: domain,
                limit: MAX_POINTSET_DOMAIN,
            });
        }
        let domain = domain as u64;
        Ok(PointSet {
            field,
            n,
            domain,
            words: vec![0; (domain as usize).div_ceil(64)],
            len: 0,
        })
    }

    pub fn full_space(field: Field, n: usize) -> Result<PointSet> {
        let mut set = PointSet::new(field, n)?;
        for idx in 0..set.domain {
            set.insert_index(idx);
        }
        Ok(set)
    }

    pub fn from_points<'a, I>(field: Field, n: usize, points: I) -> Result<PointSet>
    where
        I: IntoIterator<Item = &'a Point>,
    {
        let mut set = PointSet::new(field, n)?;
        for p in points {
            set.insert_point(p);
        }
        Ok(set)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// q^n, the number of points of the ambient space.
    pub fn domain(&self) -> u64 {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains_index(&self, idx: u64) -> bool {
        debug_assert!(idx < self.domain);
        self.words[(idx / 64) as usize] >> (idx % 64) & 1 == 1
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        self.contains_index(pack_point(p.coords(), self.field.q()))
    }

    /// Returns true if the index was newly inserted.
    pub fn insert_index(&mut self, idx: u64) -> bool {
        debug_assert!(idx < self.domain);
        let word = &mut self.words[(idx / 64) as usize];
        let bit = 1u64 << (idx % 64);
        if *word & bit == 0 {
            *word |= bit;
            self.len += 1;
            true
        } else {
            false
        }
    }

    pub fn insert_point(&mut self, p: &Point) -> bool {
        assert_eq!(p.dim(), self.n);
        self.insert_index(pack_point(p.coords(), self.field.q()))
    }

    /// Packed indices in ascending order.
    pub fn indices(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.domain).filter(|&i| self.contains_index(i))
    }

    /// Member points sorted lexicographically by coordinates.
    pub fn points_lex(&self) -> Vec<Point> {
        let q = self.field.q();
        let mut pts: Vec<Point> = self
            .indices()
            .map(|i| Point::new(unpack_point(i, q, self.n)))
            .collect();
        pts.sort();
        pts
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        assert_eq!(self.field, other.field, "mixed fields");
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for idx in other.indices() {
            out.insert_index(idx);
        }
        out
    }

    pub fn to_doc(&self) -> PointSetDoc {
        PointSetDoc {
            q: self.field.q(),
            modulus: self.field.modulus().map(|m| m.to_vec()),
            n: self.n,
            points: self
                .points_lex()
                .into_iter()
                .map(|p| p.coords().to_vec())
                .collect(),
        }
    }

    pub fn from_doc(doc: &PointSetDoc) -> Result<PointSet> {
        let field = Field::from_parts(doc.q, doc.modulus.as_deref())?;
        if doc.n == 0 {
            return Err(Error::InvalidDocument("dimension must be at least 1".into()));
        }
        let mut set = PointSet::new(field.clone(), doc.n)?;
        for coords in &doc.points {
            if coords.len() != doc.n {
                return Err(Error::InvalidDocument(format!(
                    "point {coords:?} does not have {} coordinates",
                    doc.n
                )));
            }
            if coords.iter().any(|&c| c >= field.q()) {
                return Err(Error::InvalidDocument(format!(
                    "point {coords:?} has a coordinate outside GF({})",
                    field.q()
                )));
            }
            set.insert_point(&Point::new(coords.clone()));
        }
        Ok(set)
    }
}

/// Serialized form of a point set: field, dimension, and the member points
/// sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSetDoc {
    pub q: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub modulus: Option<Vec<u64>>,
    pub n: usize,
    pub points: Vec<Vec<u64>>,
}

/// One chosen contained line per direction, keyed by canonical direction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LineSelection {
    lines: BTreeMap<Direction, Line>,
}

impl LineSelection {
    pub fn new() -> LineSelection {
        LineSelection::default()
    }

    pub fn insert(&mut self, line: Line) {
        self.lines.insert(line.dir().clone(), line);
    }

    pub fn get(&self, dir: &Direction) -> Option<&Line> {
        self.lines.get(dir)
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Direction, &Line)> {
        self.lines.iter()
    }

    /// The selected lines through a point, in direction order.
    pub fn lines_through(&self, field: &Field, point: &Point) -> Vec<&Line> {
        self.lines
            .values()
            .filter(|l| l.contains(field, point))
            .collect()
    }

    pub fn to_doc(&self) -> Vec<SelectedLineDoc> {
        self.lines
            .values()
            .map(|l| SelectedLineDoc {
                dir: l.dir().coords().to_vec(),
                base: l.base().coords().to_vec(),
            })
            .collect()
    }
}

/// Serialized line selection entry.
#[derive(Debug, Clone, Serialize)]
pub struct SelectedLineDoc {
    pub dir: Vec<u64>,
    pub base: Vec<u64>,
}

/// Outcome of a coverage check: either a full witness selection or the first
/// direction with no contained line.
#[derive(Debug, Clone)]
pub enum KakeyaVerdict {
    Covered { witness: LineSelection },
    Missing { direction: Direction },
}

impl KakeyaVerdict {
    pub fn is_covered(&self) -> bool {
        matches!(self, KakeyaVerdict::Covered { .. })
    }

    pub fn witness(&self) -> Option<&LineSelection> {
        match self {
            KakeyaVerdict::Covered { witness } => Some(witness),
            KakeyaVerdict::Missing { .. } => None,
        }
    }

    pub fn failing_direction(&self) -> Option<&Direction> {
        match self {
            KakeyaVerdict::Covered { .. } => None,
            KakeyaVerdict::Missing { direction } => Some(direction),
        }
    }
}

/// First line of the given direction fully contained in the set, scanning in
/// canonical base order.
fn contained_line(set: &PointSet, dir: &Direction) -> Option<Line> {
    let field = set.field();
    lines_in_direction(field, set.n(), dir)
        .into_iter()
        .find(|line| line.points(field).iter().all(|p| set.contains_point(p)))
}

fn check_directions(set: &PointSet, dirs: Vec<Direction>) -> Result<KakeyaVerdict> {
    let domain = set.domain() as u128;
    if domain > MAX_CHECK_DOMAIN {
        return Err(Error::EnumerationTooLarge {
            size: domain,
            limit: MAX_CHECK_DOMAIN,
        });
    }
    let found: Vec<Option<Line>> = dirs.par_iter().map(|d| contained_line(set, d)).collect();
    let mut witness = LineSelection::new();
    for (dir, line) in dirs.into_iter().zip(found) {
        match line {
            Some(line) => witness.insert(line),
            None => return Ok(KakeyaVerdict::Missing { direction: dir }),
        }
    }
    Ok(KakeyaVerdict::Covered { witness })
}

/// Does the set contain a line in every one of the (q^n-1)/(q-1) directions?
pub fn is_kakeya(set: &PointSet) -> Result<KakeyaVerdict> {
    check_directions(set, all_directions(set.field(), set.n()))
}

/// Does the set contain a line in every one of the q^{n-1} non-horizontal
/// directions?
pub fn is_almost_kakeya(set: &PointSet) -> Result<KakeyaVerdict> {
    check_directions(set, nonhorizontal_directions(set.field(), set.n()))
}

/// The quadratic almost-Kakeya set for odd q:
/// `{(s_1^2 - t^2/4, ..., s_{n-1}^2 - t^2/4, t)}` of size q ((q+1)/2)^(n-1),
/// together with the witness line through (b_1^2, ..., b_{n-1}^2, 0) for each
/// direction (b_1, ..., b_{n-1}, 1); the line stays inside the set because
/// b^2 + t b = (b + t/2)^2 - t^2/4.
pub fn construct_almost_kakeya_odd(field: &Field, n: usize) -> Result<(PointSet, LineSelection)> {
    if field.p() == 2 {
        return Err(Error::EvenCharacteristic);
    }
    assert!(n >= 1);
    let q = field.q();
    let two = field.add(1, 1);
    let quarter = field.inv(field.mul(two, two))?;

    let mut set = PointSet::new(field.clone(), n)?;
    for t in field.elements() {
        let offset = field.neg(field.mul(quarter, field.mul(t, t)));
        let mut values: Vec<u64> = field
            .elements()
            .map(|s| field.add(field.mul(s, s), offset))
            .collect();
        values.sort_unstable();
        values.dedup();
        // Every slice is the (n-1)-fold product of the shifted-square values.
        let mut cursor = vec![0usize; n - 1];
        loop {
            let mut coords: Vec<u64> = cursor.iter().map(|&i| values[i]).collect();
            coords.push(t);
            set.insert_point(&Point::new(coords));
            let mut j = 0;
            while j < n - 1 {
                cursor[j] += 1;
                if cursor[j] < values.len() {
                    break;
                }
                cursor[j] = 0;
                j += 1;
            }
            if j == n - 1 {
                break;
            }
        }
    }

    let mut witness = LineSelection::new();
    for prefix in lex_vectors(q, n - 1) {
        let mut base: Vec<u64> = prefix.iter().map(|&b| field.mul(b, b)).collect();
        base.push(0);
        let mut dir = prefix;
        dir.push(1);
        let line = Line::new(field, Point::new(base), Direction::new(field, dir));
        debug_assert!(line.points(field).iter().all(|p| set.contains_point(p)));
        witness.insert(line);
    }
    Ok((set, witness))
}

/// How the recursive construction picks the shift of the lower-dimensional
/// copy. The seed fully determines sampled behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftStrategy {
    Exhaustive,
    Sampled { seed: u64, trials: u64 },
}

/// Expected size of the union for a uniformly random shift:
/// `|K'| + |prev| (1 - |K'| / q^n)`. The exhaustive minimum never exceeds it.
pub fn recursive_expectation_bound(kprime: u64, prev: u64, domain: u64) -> BigRational {
    let hit = from_u64(kprime) / from_u64(domain);
    from_u64(kprime) + from_u64(prev) * (BigRational::one() - hit)
}

/// Kakeya set built by joining the almost-Kakeya set with a shifted copy of
/// the (n-1)-dimensional Kakeya set embedded in {last coordinate = 0}, the
/// shift chosen to minimize the union size over the strategy's candidates.
pub fn construct_kakeya_recursive(
    field: &Field,
    n: usize,
    strategy: ShiftStrategy,
) -> Result<PointSet> {
    if field.p() == 2 {
        return Err(Error::EvenCharacteristic);
    }
    assert!(n >= 1);
    if n == 1 {
        return PointSet::full_space(field.clone(), 1);
    }
    let q = field.q();
    let (kprime, _) = construct_almost_kakeya_odd(field, n)?;
    let prev = construct_kakeya_recursive(field, n - 1, strategy)?;
    let domain = kprime.domain();

    let embedded: Vec<Vec<u64>> = prev
        .indices()
        .map(|idx| {
            let mut coords = unpack_point(idx, q, n - 1);
            coords.push(0);
            coords
        })
        .collect();

    let shift_cost = |shift_idx: u64| -> u64 {
        let shift = unpack_point(shift_idx, q, n);
        embedded
            .iter()
            .filter(|coords| {
                let moved: Vec<u64> = coords
                    .iter()
                    .zip(&shift)
                    .map(|(&c, &s)| field.add(c, s))
                    .collect();
                !kprime.contains_index(pack_point(&moved, q))
            })
            .count() as u64
    };

    let candidates: Vec<u64> = match strategy {
        ShiftStrategy::Exhaustive => {
            if domain as u128 > MAX_EXHAUSTIVE_SHIFTS {
                return Err(Error::EnumerationTooLarge {
                    size: domain as u128,
                    limit: MAX_EXHAUSTIVE_SHIFTS,
                });
            }
            (0..domain).collect()
        }
        ShiftStrategy::Sampled { seed, trials } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..trials.max(1))
                .map(|_| rng.gen_range(0..domain))
                .collect()
        }
    };
    let (_, best_shift) = candidates
        .into_par_iter()
        .map(|idx| (shift_cost(idx), idx))
        .min()
        .expect("at least one candidate shift");

    let shift = unpack_point(best_shift, q, n);
    let mut out = kprime;
    for coords in &embedded {
        let moved: Vec<u64> = coords
            .iter()
            .zip(&shift)
            .map(|(&c, &s)| field.add(c, s))
            .collect();
        out.insert_index(pack_point(&moved, q));
    }
    Ok(out)
}

/// The provided witness after validation, or the deterministic first-found
/// line per non-horizontal direction.
pub fn select_lines(set: &PointSet, witness: Option<&LineSelection>) -> Result<LineSelection> {
    let field = set.field();
    let n = set.n();
    match witness {
        Some(sel) => {
            let dirs = nonhorizontal_directions(field, n);
            if sel.len() != dirs.len() {
                return Err(Error::InvalidWitness(format!(
                    "expected {} lines, got {}",
                    dirs.len(),
                    sel.len()
                )));
            }
            for dir in &dirs {
                let line = sel.get(dir).ok_or_else(|| {
                    Error::InvalidWitness(format!("no line for direction {:?}", dir.coords()))
                })?;
                if !line.points(field).iter().all(|p| set.contains_point(p)) {
                    return Err(Error::InvalidWitness(format!(
                        "line in direction {:?} leaves the set",
                        dir.coords()
                    )));
                }
            }
            Ok(sel.clone())
        }
        None => match is_almost_kakeya(set)? {
            KakeyaVerdict::Covered { witness } => Ok(witness),
            KakeyaVerdict::Missing { direction } => {
                Err(Error::NotAlmostKakeya(direction.coords().to_vec()))
            }
        },
    }
}

/// Exact minimum size of a union of one line per direction class in F_q^2,
/// which equals the minimum Kakeya set size there. Depth-first search over
/// selections in lexicographic order, pruning once the running union reaches
/// the best size found.
pub fn minimal_kakeya_2d(field: &Field) -> Result<(u64, PointSet)> {
    let q = field.q();
    if q > 7 {
        return Err(Error::EnumerationTooLarge {
            size: (q as u128).pow(q as u32 + 1),
            limit: 7u128.pow(8),
        });
    }
    let dirs = all_directions(field, 2);
    // Each line as a bitmask over the q^2 <= 49 packed points.
    let classes: Vec<Vec<u64>> = dirs
        .iter()
        .map(|dir| {
            lines_in_direction(field, 2, dir)
                .into_iter()
                .map(|line| {
                    line.points(field)
                        .iter()
                        .map(|p| 1u64 << pack_point(p.coords(), q))
                        .fold(0, |acc, bit| acc | bit)
                })
                .collect()
        })
        .collect();

    fn dfs(classes: &[Vec<u64>], depth: usize, acc: u64, best: &mut (u32, u64)) {
        let count = acc.count_ones();
        if count >= best.0 {
            return;
        }
        if depth == classes.len() {
            *best = (count, acc);
            return;
        }
        for &mask in &classes[depth] {
            dfs(classes, depth + 1, acc | mask, best);
        }
    }

    let mut best = (u32::MAX, 0u64);
    dfs(&classes, 0, 0, &mut best);

    let mut example = PointSet::new(field.clone(), 2)?;
    for idx in 0..q * q {
        if best.1 >> idx & 1 == 1 {
            example.insert_index(idx);
        }
    }
    debug_assert_eq!(example.len() as u32, best.0);
    Ok((best.0 as u64, example))
}

/// Every size bound of the toolkit for a (q, n) pair, as exact rationals.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub q: u64,
    pub n: u32,
    /// q^n / (2 - 1/q)^n.
    pub dkss: BigRational,
    /// q^n / (2 - 1/q)^(n-1).
    pub new_bound: BigRational,
    /// (q^3 + q)/4, dimension 3 only.
    pub thm3: Option<BigRational>,
    /// q(q+1)/2, plus (q-1)/2 for odd q; dimension 2 only.
    pub sharp_2d: Option<u64>,
    /// q ((q+1)/2)^(n-1), odd q only.
    pub almost_construction_size: Option<BigRational>,
    /// 2^(1-n) q^n + (1 - 2^(1-n)) q^(n-1), even q only.
    pub even_construction_size: Option<BigRational>,
}

impl BoundReport {
    /// Rows in fixed emission order: (bound_name, value).
    pub fn rows(&self) -> Vec<(&'static str, BigRational)> {
        let mut rows = vec![
            ("dkss", self.dkss.clone()),
            ("new", self.new_bound.clone()),
        ];
        if let Some(v) = &self.thm3 {
            rows.push(("thm3", v.clone()));
        }
        if let Some(v) = self.sharp_2d {
            rows.push(("sharp_2d", from_u64(v)));
        }
        if let Some(v) = &self.almost_construction_size {
            rows.push(("almost_construction_size", v.clone()));
        }
        if let Some(v) = &self.even_construction_size {
            rows.push(("even_construction_size", v.clone()));
        }
        rows
    }
}

fn rat_pow(r: &BigRational, e: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= r;
    }
    acc
}

/// Evaluates every bound formula for the pair (q, n).
pub fn bounds(q: u64, n: u32) -> Result<BoundReport> {
    let (p, _) = prime_power_split(q).ok_or(Error::NotAPrimePower(q))?;
    assert!(n >= 1);
    let qn = rat_pow(&from_u64(q), n);
    // 2 - 1/q = (2q - 1)/q.
    let factor = BigRational::new(BigInt::from(2 * q - 1), BigInt::from(q));
    let dkss = &qn / rat_pow(&factor, n);
    let new_bound = &qn / rat_pow(&factor, n - 1);
    let thm3 = (n == 3).then(|| BigRational::new(BigInt::from(q * q * q + q), BigInt::from(4)));
    let sharp_2d = (n == 2).then(|| {
        let base = q * (q + 1) / 2;
        if p == 2 {
            base
        } else {
            base + (q - 1) / 2
        }
    });
    let almost_construction_size =
        (p != 2).then(|| from_u64(q) * rat_pow(&from_u64(q.div_ceil(2)), n - 1));
    let even_construction_size = (p == 2).then(|| {
        let half_pow = rat_pow(&BigRational::new(BigInt::from(1), BigInt::from(2)), n - 1);
        &half_pow * &qn + (BigRational::one() - &half_pow) * rat_pow(&from_u64(q), n - 1)
    });
    Ok(BoundReport {
        q,
        n,
        dkss,
        new_bound,
        thm3,
        sharp_2d,
        almost_construction_size,
        even_construction_size,
    })
}
