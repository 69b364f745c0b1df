//! Affine geometry of F_q^n: points, direction classes, and lines.
//!
//! Directions are canonicalized so the last nonzero coordinate equals 1; a
//! line is canonicalized by sliding its base point to the one whose pivot
//! coordinate is 0. Both make equality checks and enumeration order
//! parameterization-independent.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::Field;

/// A point of F_q^n, coordinates in element encoding.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Point(Vec<u64>);

impl Point {
    pub fn new(coords: Vec<u64>) -> Point {
        assert!(!coords.is_empty(), "points need at least one coordinate");
        Point(coords)
    }

    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<u64>> for Point {
    fn from(coords: Vec<u64>) -> Point {
        Point::new(coords)
    }
}

/// A direction class, stored in canonical form: the last nonzero coordinate
/// is 1 (its index is the pivot). Equality of canonical forms is equality of
/// classes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Direction {
    coords: Vec<u64>,
}

impl Direction {
    /// Canonicalizes an arbitrary nonzero vector by scaling.
    pub fn new(field: &Field, coords: Vec<u64>) -> Direction {
        let pivot = coords
            .iter()
            .rposition(|&c| c != 0)
            .expect("direction must be nonzero");
        let scale = field.inv(coords[pivot]).expect("pivot is nonzero");
        let coords = coords
            .into_iter()
            .map(|c| field.mul(c, scale))
            .collect::<Vec<_>>();
        Direction { coords }
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Index of the last nonzero coordinate (which equals 1).
    pub fn pivot(&self) -> usize {
        self.coords
            .iter()
            .rposition(|&c| c != 0)
            .expect("direction is nonzero")
    }

    /// Horizontal means the last coordinate is 0.
    pub fn is_horizontal(&self) -> bool {
        *self.coords.last().unwrap() == 0
    }
}

/// A line {base + dir * t : t in F_q} in canonical form: `dir` is canonical
/// and `base` is the unique point of the line with 0 at the pivot coordinate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Line {
    base: Point,
    dir: Direction,
}

impl Line {
    pub fn new(field: &Field, base: Point, dir: Direction) -> Line {
        assert_eq!(base.dim(), dir.dim(), "base and direction dimensions differ");
        let pivot = dir.pivot();
        let t0 = base.coords()[pivot];
        let coords = base
            .coords()
            .iter()
            .zip(dir.coords())
            .map(|(&a, &b)| field.sub(a, field.mul(b, t0)))
            .collect::<Vec<_>>();
        Line {
            base: Point::new(coords),
            dir,
        }
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn dir(&self) -> &Direction {
        &self.dir
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn point_at(&self, field: &Field, t: u64) -> Point {
        let coords = self
            .base
            .coords()
            .iter()
            .zip(self.dir.coords())
            .map(|(&a, &b)| field.add(a, field.mul(b, t)))
            .collect();
        Point::new(coords)
    }

    /// The q points of the line, in the element order of t.
    pub fn points(&self, field: &Field) -> Vec<Point> {
        field.elements().map(|t| self.point_at(field, t)).collect()
    }

    /// The parameter t0 with `point = base + dir * t0`.
    pub fn param_of(&self, field: &Field, point: &Point) -> Result<u64> {
        if point.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: point.dim(),
            });
        }
        let t0 = point.coords()[self.dir.pivot()];
        if self.point_at(field, t0) == *point {
            Ok(t0)
        } else {
            Err(Error::PointNotOnLine)
        }
    }

    pub fn contains(&self, field: &Field, point: &Point) -> bool {
        self.param_of(field, point).is_ok()
    }
}

/// Vectors of F_q^len in lexicographic order (first coordinate most
/// significant).
pub(crate) fn lex_vectors(q: u64, len: usize) -> impl Iterator<Item = Vec<u64>> {
    let total = q.pow(len as u32);
    (0..total).map(move |idx| {
        let mut coords = vec![0u64; len];
        let mut x = idx;
        for c in coords.iter_mut().rev() {
            *c = x % q;
            x /= q;
        }
        coords
    })
}

/// All (q^n - 1)/(q - 1) canonical directions, lexicographic by coordinates.
pub fn all_directions(field: &Field, n: usize) -> Vec<Direction> {
    assert!(n >= 1);
    let q = field.q();
    let mut out = Vec::new();
    for pivot in 0..n {
        for prefix in lex_vectors(q, pivot) {
            let mut coords = prefix;
            coords.push(1);
            coords.resize(n, 0);
            out.push(Direction { coords });
        }
    }
    out.sort();
    out
}

/// The q^{n-1} directions with last coordinate 1, lexicographic order.
pub fn nonhorizontal_directions(field: &Field, n: usize) -> Vec<Direction> {
    assert!(n >= 1);
    let q = field.q();
    lex_vectors(q, n - 1)
        .map(|mut coords| {
            coords.push(1);
            Direction { coords }
        })
        .collect()
}

/// The q^{n-1} pairwise-disjoint lines of direction `dir` covering F_q^n,
/// ordered by canonical base point.
pub fn lines_in_direction(field: &Field, n: usize, dir: &Direction) -> Vec<Line> {
    assert_eq!(dir.dim(), n);
    let q = field.q();
    let pivot = dir.pivot();
    let mut out = Vec::new();
    for rest in lex_vectors(q, n - 1) {
        // Insert 0 at the pivot coordinate; every line of this direction has
        // exactly one point with pivot coordinate 0.
        let mut coords = rest;
        coords.insert(pivot, 0);
        out.push(Line {
            base: Point::new(coords),
            dir: dir.clone(),
        });
    }
    out.sort();
    out
}

/// Packs coordinates into a single index: sum of coords[j] * q^j.
pub fn pack_point(coords: &[u64], q: u64) -> u64 {
    let mut idx = 0;
    for &c in coords.iter().rev() {
        debug_assert!(c < q);
        idx = idx * q + c;
    }
    idx
}

pub fn unpack_point(idx: u64, q: u64, n: usize) -> Vec<u64> {
    let mut coords = vec![0u64; n];
    let mut x = idx;
    for c in coords.iter_mut() {
        *c = x % q;
        x /= q;
    }
    coords
}
