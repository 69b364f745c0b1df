//! The vanishing-condition machinery as finite linear algebra: monomial
//! bases, order-2 and order-(r, r') conditions as exact matrix rows over
//! GF(q), rank and kernel computation, lattice-point counts for the four
//! polytopes, and end-to-end kernel-triviality verification.

use std::collections::BTreeMap;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::geometry::{Line, Point};
use crate::gf::{prime_power_split, Field};
use crate::kakeya::{is_kakeya, select_lines, LineSelection, PointSet};
use crate::poly::{compositions, MultiIndex, Polynomial};
use crate::rational::from_u64;

/// Cap on |A| for assembled condition systems.
pub const MAX_BASIS: usize = 5000;
/// Cap on q for the order-2 verifier.
pub const MAX_LEMMA3_Q: u64 = 5;

// --- monomial sets ---------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonomialVariant {
    /// n = 3; total degree < 2q with the first two exponents < q.
    Dim3,
    /// Total degree < (2 - 1/q) r q with the first n-1 exponents summing
    /// below r q.
    General { r: u64 },
    /// Plain truncation: total degree <= max_weight.
    Graded { max_weight: u64 },
}

/// A monomial basis in graded-lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialSet {
    n: usize,
    q: u64,
    variant: MonomialVariant,
    members: Vec<MultiIndex>,
}

impl MonomialSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn variant(&self) -> MonomialVariant {
        self.variant
    }

    pub fn members(&self) -> &[MultiIndex] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.members.binary_search(alpha).ok()
    }
}

/// The 3-variable basis: alpha_1 + alpha_2 + alpha_3 < 2q with
/// alpha_1, alpha_2 < q; exactly q^3 + q^2 monomials.
pub fn monomial_set_3d(q: u64) -> Result<MonomialSet> {
    prime_power_split(q).ok_or(Error::NotAPrimePower(q))?;
    let mut members = Vec::new();
    for w in 0..2 * q {
        for alpha in compositions(w, 3) {
            let e = alpha.exponents();
            if (e[0] as u64) < q && (e[1] as u64) < q {
                members.push(alpha);
            }
        }
    }
    Ok(MonomialSet {
        n: 3,
        q,
        variant: MonomialVariant::Dim3,
        members,
    })
}

/// The general basis at order parameter r (q must divide r):
/// |alpha| < (2 - 1/q) r q and alpha_1 + ... + alpha_{n-1} < r q.
pub fn monomial_set_general(n: usize, q: u64, r: u64) -> Result<MonomialSet> {
    ensure_divisible(q, r)?;
    assert!(n >= 1);
    let max_weight = 2 * r * q - r; // (2 - 1/q) r q, an integer
    let horizontal = r * q;
    let mut members = Vec::new();
    for w in 0..max_weight {
        for alpha in compositions(w, n) {
            let head: u64 = alpha.exponents()[..n - 1].iter().map(|&e| e as u64).sum();
            if head < horizontal {
                members.push(alpha);
            }
        }
    }
    Ok(MonomialSet {
        n,
        q,
        variant: MonomialVariant::General { r },
        members,
    })
}

/// All monomials of total degree <= max_weight.
pub fn monomial_set_graded(n: usize, q: u64, max_weight: u64) -> MonomialSet {
    let mut members = Vec::new();
    for w in 0..=max_weight {
        members.extend(compositions(w, n));
    }
    MonomialSet {
        n,
        q,
        variant: MonomialVariant::Graded { max_weight },
        members,
    }
}

/// Cap on r q for the order-parameter machinery; keeps every derived count
/// within u64 and enumeration within desk scale.
pub const MAX_ORDER_SCALE: u64 = 10_000_000;

fn ensure_divisible(q: u64, r: u64) -> Result<()> {
    if r == 0 || !r.is_multiple_of(q) {
        return Err(Error::RNotDivisible { r, q });
    }
    if r.saturating_mul(q) > MAX_ORDER_SCALE {
        return Err(Error::SizeLimitExceeded(format!(
            "order scale r*q = {} exceeds {MAX_ORDER_SCALE}",
            r.saturating_mul(q)
        )));
    }
    Ok(())
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for t in 1..=k {
        acc = acc
            .checked_mul((n - k + t) as u128)
            .expect("binomial overflow")
            / t as u128;
    }
    acc
}

/// Size of the general basis in closed form:
/// `(1 - 1/q) r q C(rq + n - 2, n - 1) + C(rq + n - 1, n)`.
pub fn dim_v_closed_form(n: usize, q: u64, r: u64) -> Result<u64> {
    ensure_divisible(q, r)?;
    let rq = r * q;
    let value = (r * (q - 1)) as u128 * binomial(rq + n as u64 - 2, n as u64 - 1)
        + binomial(rq + n as u64 - 1, n as u64);
    Ok(u64::try_from(value).expect("basis size overflows u64"))
}

// --- vanishing-order thresholds ---------------------------------------------

/// The order pair (r, r') with r' = (2 - 1/q) r; condition (i, j) is active
/// iff |i| < r and j < r' - |i|/q. All threshold comparisons are exact
/// (cross-multiplied by q).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VanishingOrderSpec {
    q: u64,
    r: u64,
}

impl VanishingOrderSpec {
    pub fn new(q: u64, r: u64) -> Result<VanishingOrderSpec> {
        ensure_divisible(q, r)?;
        Ok(VanishingOrderSpec { q, r })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    /// r' = (2 - 1/q) r as a rational.
    pub fn r_prime(&self) -> BigRational {
        BigRational::new(
            BigInt::from((2 * self.q - 1) * self.r),
            BigInt::from(self.q),
        )
    }

    /// r' = 2r - r/q, an integer because q | r.
    pub fn r_prime_integer(&self) -> u64 {
        2 * self.r - self.r / self.q
    }

    /// j < r' - |i|/q  <=>  q j < (2q - 1) r - |i|.
    pub fn condition_active(&self, i_weight: u64, j: u64) -> bool {
        i_weight < self.r && self.q * j < (2 * self.q - 1) * self.r - i_weight
    }

    /// Number of active j for a given |i| < r, i.e. ceil(r' - |i|/q); under
    /// q | r this equals r' - floor(|i|/q).
    pub fn j_count(&self, i_weight: u64) -> u64 {
        debug_assert!(i_weight < self.r);
        ((2 * self.q - 1) * self.r - i_weight).div_ceil(self.q)
    }

    /// The high-degree side of the split: |i| + j >= r'.
    pub fn is_plus(&self, i_weight: u64, j: u64) -> bool {
        self.q * (i_weight + j) >= (2 * self.q - 1) * self.r
    }
}

/// One active condition index (i, j), tagged with its side of the
/// low/high-degree split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionIndex {
    pub i: MultiIndex,
    pub j: u64,
    pub plus: bool,
}

/// All active (i, j) pairs for a point-line incidence, i over n-1 variables
/// in graded-lexicographic order, j ascending.
pub fn wp_condition_index_set(n: usize, spec: &VanishingOrderSpec) -> Vec<ConditionIndex> {
    let mut out = Vec::new();
    for w in 0..spec.r() {
        for i in compositions(w, n - 1) {
            for j in 0..spec.j_count(w) {
                debug_assert!(spec.condition_active(w, j));
                out.push(ConditionIndex {
                    plus: spec.is_plus(w, j),
                    i: i.clone(),
                    j,
                });
            }
        }
    }
    out
}

// --- polytopes ---------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    /// |i| < 1, j < (2 - 1/q) - |i|/q, |i| + j >= 2 - 1/q.
    Parallelogramoid,
    /// |i| < 1, 1 - 1/q < j <= 2 - 2/q.
    Cylinder,
    /// |i| < 1, j > 1 - 1/q, |i| + j < 2 - 1/q.
    Simplex1,
    /// |i| < 1, 2 - 2/q < j < (2 - 1/q) - |i|/q.
    Simplex2,
}

pub const ALL_REGIONS: [RegionKind; 4] = [
    RegionKind::Parallelogramoid,
    RegionKind::Cylinder,
    RegionKind::Simplex1,
    RegionKind::Simplex2,
];

impl RegionKind {
    pub fn label(&self) -> &'static str {
        match self {
            RegionKind::Parallelogramoid => "parallelogramoid",
            RegionKind::Cylinder => "cylinder",
            RegionKind::Simplex1 => "simplex1",
            RegionKind::Simplex2 => "simplex2",
        }
    }
}

/// A polytope in (i, j)-space at parameters (n, q); membership is evaluated
/// for lattice points of the r-fold dilation with exact integer arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolytopeRegion {
    pub kind: RegionKind,
    pub n: usize,
    pub q: u64,
}

impl PolytopeRegion {
    pub fn new(kind: RegionKind, n: usize, q: u64) -> PolytopeRegion {
        assert!(n >= 2, "the regions live in at least one i coordinate");
        PolytopeRegion { kind, n, q }
    }

    /// Is the lattice point (i, j) inside r * region? Inequalities are the
    /// region's, scaled by r and cross-multiplied by q.
    pub fn contains(&self, i: &MultiIndex, j: u64, r: u64) -> bool {
        debug_assert_eq!(i.len(), self.n - 1);
        let s = i.weight();
        let q = self.q;
        if s >= r {
            return false;
        }
        match self.kind {
            RegionKind::Parallelogramoid => {
                q * j < (2 * q - 1) * r - s && q * (s + j) >= (2 * q - 1) * r
            }
            RegionKind::Cylinder => q * j > (q - 1) * r && q * j <= (2 * q - 2) * r,
            RegionKind::Simplex1 => q * j > (q - 1) * r && q * (s + j) < (2 * q - 1) * r,
            RegionKind::Simplex2 => q * j > (2 * q - 2) * r && q * j < (2 * q - 1) * r - s,
        }
    }
}

/// Number of lattice points of r * region.
pub fn polytope_count(region: &PolytopeRegion, r: u64) -> u64 {
    let mut count = 0;
    for s in 0..r {
        for i in compositions(s, region.n - 1) {
            for j in 0..=2 * r {
                if region.contains(&i, j, r) {
                    count += 1;
                }
            }
        }
    }
    count
}

fn factorial(m: u64) -> BigInt {
    let mut acc = BigInt::one();
    for t in 2..=m {
        acc *= t;
    }
    acc
}

/// Exact volumes: cylinder (1-1/q)/(n-1)!, simplices 1/n! and 1/(n! q), and
/// the parallelogramoid (n-1)(1-1/q)/n!.
pub fn polytope_volume_exact(kind: RegionKind, n: usize, q: u64) -> BigRational {
    assert!(n >= 2);
    let n64 = n as u64;
    let one_minus = BigRational::new(BigInt::from(q - 1), BigInt::from(q));
    match kind {
        RegionKind::Cylinder => one_minus / BigRational::from_integer(factorial(n64 - 1)),
        RegionKind::Simplex1 => BigRational::new(BigInt::one(), factorial(n64)),
        RegionKind::Simplex2 => BigRational::new(BigInt::one(), factorial(n64) * BigInt::from(q)),
        RegionKind::Parallelogramoid => {
            BigRational::from_integer(BigInt::from(n64 - 1)) * one_minus
                / BigRational::from_integer(factorial(n64))
        }
    }
}

/// The finite-r majorant on the number of independent conditions at a point
/// with m selected lines: `C((2 - 1/q) r + n - 1, n)` low-degree conditions
/// plus m times the lattice count of r * parallelogramoid.
pub fn codim_bound_lemma4(n: usize, q: u64, r: u64, m: u64) -> Result<u64> {
    ensure_divisible(q, r)?;
    let rp = 2 * r - r / q;
    let region = PolytopeRegion::new(RegionKind::Parallelogramoid, n, q);
    let value = binomial(rp + n as u64 - 1, n as u64) + (m * polytope_count(&region, r)) as u128;
    Ok(u64::try_from(value).expect("codimension bound overflows u64"))
}

// --- condition systems -------------------------------------------------------

/// Provenance of a condition row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowTag {
    /// P(p) = 0.
    Evaluation { point: Vec<u64> },
    /// The axis-th first-order Hasse derivative vanishes at p.
    Gradient { point: Vec<u64>, axis: usize },
    /// The j-th Hasse coefficient at t0 of the restriction to the line of
    /// the (i, 0)-derivative vanishes.
    LineVanishing {
        point: Vec<u64>,
        dir: Vec<u64>,
        i: MultiIndex,
        j: u64,
        plus: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionRow {
    pub coeffs: Vec<u64>,
    pub tag: RowTag,
}

/// An exact matrix over GF(q) whose rows are vanishing conditions expressed
/// in a monomial basis.
#[derive(Debug, Clone)]
pub struct ConditionSystem {
    field: Field,
    ncols: usize,
    rows: Vec<ConditionRow>,
}

impl ConditionSystem {
    pub fn new(field: Field, ncols: usize) -> ConditionSystem {
        ConditionSystem {
            field,
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: ConditionRow) {
        assert_eq!(row.coeffs.len(), self.ncols);
        self.rows.push(row);
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[ConditionRow] {
        &self.rows
    }

    /// Exact rank by Gaussian elimination with first-nonzero pivoting.
    pub fn rank(&self) -> usize {
        let m: Vec<Vec<u64>> = self.rows.iter().map(|r| r.coeffs.clone()).collect();
        reduced_row_echelon(&self.field, m).0
    }

    /// A basis of the right kernel, one vector per free column of the
    /// reduced row echelon form.
    pub fn kernel_basis(&self) -> Vec<Vec<u64>> {
        let m: Vec<Vec<u64>> = self.rows.iter().map(|r| r.coeffs.clone()).collect();
        let (_, rref, pivots) = reduced_row_echelon(&self.field, m);
        let is_pivot: Vec<bool> = {
            let mut v = vec![false; self.ncols];
            for &c in &pivots {
                v[c] = true;
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.ncols {
            if is_pivot[free] {
                continue;
            }
            let mut v = vec![0u64; self.ncols];
            v[free] = 1;
            for (t, &pcol) in pivots.iter().enumerate() {
                v[pcol] = self.field.neg(rref[t][free]);
            }
            basis.push(v);
        }
        basis
    }

    /// Portable text dump: a header line `q n ncols nrows`, then one row of
    /// space-separated canonical integers per line.
    pub fn emit_matrix<W: Write>(&self, n: usize, out: &mut W) -> io::Result<()> {
        writeln!(
            out,
            "{} {} {} {}",
            self.field.q(),
            n,
            self.ncols,
            self.rows.len()
        )?;
        for row in &self.rows {
            let rendered: Vec<String> = row.coeffs.iter().map(|c| c.to_string()).collect();
            writeln!(out, "{}", rendered.join(" "))?;
        }
        Ok(())
    }
}

/// Forward-and-back elimination; returns (rank, rref, pivot columns).
/// Pivoting picks the first row with a nonzero entry in the current column,
/// so the result is deterministic.
#[allow(clippy::needless_range_loop)] // two rows of m are touched per step
fn reduced_row_echelon(field: &Field, mut m: Vec<Vec<u64>>) -> (usize, Vec<Vec<u64>>, Vec<usize>) {
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(prow) = (rank..nrows).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(rank, prow);
        let inv = field.inv(m[rank][col]).expect("pivot is nonzero");
        for c in col..ncols {
            m[rank][c] = field.mul(m[rank][c], inv);
        }
        for i in 0..nrows {
            if i != rank && m[i][col] != 0 {
                let factor = m[i][col];
                for c in col..ncols {
                    let sub = field.mul(factor, m[rank][c]);
                    m[i][c] = field.sub(m[i][c], sub);
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    (rank, m, pivots)
}

// --- order-2 machinery (dimension 3) ----------------------------------------

/// The 1+n rows forcing order-2 vanishing at p: evaluation plus the n
/// first-order Hasse derivatives (the gradient).
pub fn order2_rows(basis: &MonomialSet, field: &Field, point: &Point) -> Result<Vec<ConditionRow>> {
    let n = basis.n();
    if point.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: point.dim(),
        });
    }
    let eval_monomial = |alpha: &MultiIndex| -> u64 {
        let mut acc = 1;
        for (&e, &c) in alpha.exponents().iter().zip(point.coords()) {
            if e > 0 {
                acc = field.mul(acc, field.pow(c, e as u64));
            }
        }
        acc
    };
    let mut rows = Vec::with_capacity(1 + n);
    rows.push(ConditionRow {
        coeffs: basis.members().iter().map(eval_monomial).collect(),
        tag: RowTag::Evaluation {
            point: point.coords().to_vec(),
        },
    });
    for axis in 0..n {
        let coeffs = basis
            .members()
            .iter()
            .map(|alpha| {
                let e = alpha.exponents()[axis];
                if e == 0 {
                    return 0;
                }
                let mut shifted = alpha.exponents().to_vec();
                shifted[axis] -= 1;
                let factor = field.binom(e as u64, 1);
                field.mul(factor, eval_monomial(&MultiIndex::new(shifted)))
            })
            .collect();
        rows.push(ConditionRow {
            coeffs,
            tag: RowTag::Gradient {
                point: point.coords().to_vec(),
                axis,
            },
        });
    }
    Ok(rows)
}

/// Order-2 rows for every point of the set, points in ascending packed order.
pub fn assemble_order2_system(basis: &MonomialSet, set: &PointSet) -> Result<ConditionSystem> {
    let field = set.field().clone();
    let q = field.q();
    let mut system = ConditionSystem::new(field.clone(), basis.len());
    for idx in set.indices() {
        let point = Point::new(crate::geometry::unpack_point(idx, q, set.n()));
        for row in order2_rows(basis, &field, &point)? {
            system.push(row);
        }
    }
    Ok(system)
}

#[derive(Debug, Clone)]
pub struct Lemma3Report {
    pub q: u64,
    pub set_size: usize,
    /// |A| = q^3 + q^2.
    pub dim_v: usize,
    /// 4 |K| assembled rows.
    pub conditions: usize,
    pub rank: usize,
    pub kernel_dim: usize,
    pub kernel_trivial: bool,
    /// 4 |K| >= q^3 + q^2.
    pub corollary_ok: bool,
}

/// Checks that only the zero polynomial of the 3-D basis vanishes to order 2
/// on the whole (verified) Kakeya set.
pub fn verify_lemma_3dim(set: &PointSet) -> Result<Lemma3Report> {
    if set.n() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: set.n(),
        });
    }
    let q = set.field().q();
    if q > MAX_LEMMA3_Q {
        return Err(Error::EnumerationTooLarge {
            size: q as u128,
            limit: MAX_LEMMA3_Q as u128,
        });
    }
    if let Some(direction) = is_kakeya(set)?.failing_direction() {
        return Err(Error::NotKakeya(direction.coords().to_vec()));
    }
    let basis = monomial_set_3d(q)?;
    let system = assemble_order2_system(&basis, set)?;
    let rank = system.rank();
    let kernel_dim = basis.len() - rank;
    Ok(Lemma3Report {
        q,
        set_size: set.len(),
        dim_v: basis.len(),
        conditions: system.nrows(),
        rank,
        kernel_dim,
        kernel_trivial: kernel_dim == 0,
        corollary_ok: 4 * set.len() >= basis.len(),
    })
}

// --- order-(r, r') machinery --------------------------------------------------

/// The linear functional sending coefficient vectors over the basis to the
/// j-th Hasse coefficient at t0 of the line restriction of the
/// (i, 0)-derivative.
pub fn condition_row(
    basis: &MonomialSet,
    field: &Field,
    point: &Point,
    line: &Line,
    i: &MultiIndex,
    j: u64,
) -> Result<ConditionRow> {
    let n = basis.n();
    if i.len() != n - 1 {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            got: i.len(),
        });
    }
    let t0 = line.param_of(field, point)?;
    let full_i = i.extended(1);
    let coeffs = basis
        .members()
        .iter()
        .map(|alpha| {
            let monomial = Polynomial::monomial(field.clone(), n, alpha.clone(), 1);
            let derived = monomial.hasse_derivative(&full_i)?;
            let restricted = derived.restrict_to_line(line)?;
            Ok(restricted.hasse_coeff(j, t0))
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(ConditionRow {
        coeffs,
        tag: RowTag::LineVanishing {
            point: point.coords().to_vec(),
            dir: line.dir().coords().to_vec(),
            i: i.clone(),
            j,
            plus: false,
        },
    })
}

/// Rows for every point of the set, every selected line through it, and
/// every active (i, j); deterministic order (point ascending, line by
/// direction, index-set order). Restrictions are cached per (line, i,
/// monomial) and reused across the points of the line and the j range.
pub fn assemble_vanishing_system(
    basis: &MonomialSet,
    set: &PointSet,
    selection: &LineSelection,
    spec: &VanishingOrderSpec,
) -> Result<ConditionSystem> {
    let field = set.field().clone();
    let q = field.q();
    let n = set.n();
    let index_set = wp_condition_index_set(n, spec);

    // Distinct derivative orders i, in graded-lex order.
    let mut distinct_i: Vec<MultiIndex> = Vec::new();
    for ci in &index_set {
        if !distinct_i.contains(&ci.i) {
            distinct_i.push(ci.i.clone());
        }
    }
    let i_pos: BTreeMap<MultiIndex, usize> = distinct_i
        .iter()
        .cloned()
        .enumerate()
        .map(|(k, i)| (i, k))
        .collect();

    // cache[line][i][column] = restriction of the (i, 0)-derivative of the
    // column monomial to the line.
    let mut cache: BTreeMap<Line, Vec<Vec<crate::poly::UnivariatePolynomial>>> = BTreeMap::new();
    let mut system = ConditionSystem::new(field.clone(), basis.len());
    for idx in set.indices() {
        let point = Point::new(crate::geometry::unpack_point(idx, q, n));
        for line in selection.lines_through(&field, &point) {
            if !cache.contains_key(line) {
                let mut per_i = Vec::with_capacity(distinct_i.len());
                for i in &distinct_i {
                    let full_i = i.extended(1);
                    let restricted = basis
                        .members()
                        .iter()
                        .map(|alpha| {
                            let monomial = Polynomial::monomial(field.clone(), n, alpha.clone(), 1);
                            monomial.hasse_derivative(&full_i)?.restrict_to_line(line)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    per_i.push(restricted);
                }
                cache.insert(line.clone(), per_i);
            }
            let per_i = &cache[line];
            let t0 = line.param_of(&field, &point)?;
            for ci in &index_set {
                let restrictions = &per_i[i_pos[&ci.i]];
                let coeffs = restrictions
                    .iter()
                    .map(|u| u.hasse_coeff(ci.j, t0))
                    .collect();
                system.push(ConditionRow {
                    coeffs,
                    tag: RowTag::LineVanishing {
                        point: point.coords().to_vec(),
                        dir: line.dir().coords().to_vec(),
                        i: ci.i.clone(),
                        j: ci.j,
                        plus: ci.plus,
                    },
                });
            }
        }
    }
    Ok(system)
}

#[derive(Debug, Clone)]
pub struct ZeroLemmaReport {
    pub q: u64,
    pub n: usize,
    pub r: u64,
    pub set_size: usize,
    pub dim_v: usize,
    pub rows: usize,
    pub rank: usize,
    pub kernel_dim: usize,
    pub kernel_trivial: bool,
    /// Sum over points of the Lemma-4 style majorant at m = |L_p|.
    pub codim_bound_total: u64,
    pub dim_v_within_rows: bool,
    pub dim_v_within_codim_bound: bool,
}

/// Checks kernel triviality of the full order-(r, (2-1/q)r) condition system
/// on an almost-Kakeya set with its selected lines.
pub fn verify_zero_lemma(
    set: &PointSet,
    witness: Option<&LineSelection>,
    r: u64,
) -> Result<ZeroLemmaReport> {
    let field = set.field().clone();
    let q = field.q();
    let n = set.n();
    let spec = VanishingOrderSpec::new(q, r)?;
    let selection = select_lines(set, witness)?;
    let basis = monomial_set_general(n, q, r)?;
    if basis.len() > MAX_BASIS {
        return Err(Error::EnumerationTooLarge {
            size: basis.len() as u128,
            limit: MAX_BASIS as u128,
        });
    }
    let system = assemble_vanishing_system(&basis, set, &selection, &spec)?;
    let rank = system.rank();
    let kernel_dim = basis.len() - rank;

    let mut codim_bound_total: u64 = 0;
    for idx in set.indices() {
        let point = Point::new(crate::geometry::unpack_point(idx, q, n));
        let m = selection.lines_through(&field, &point).len() as u64;
        codim_bound_total += codim_bound_lemma4(n, q, r, m)?;
    }

    Ok(ZeroLemmaReport {
        q,
        n,
        r,
        set_size: set.len(),
        dim_v: basis.len(),
        rows: system.nrows(),
        rank,
        kernel_dim,
        kernel_trivial: kernel_dim == 0,
        codim_bound_total,
        dim_v_within_rows: basis.len() <= system.nrows(),
        dim_v_within_codim_bound: basis.len() as u64 <= codim_bound_total,
    })
}

// --- final inequality ----------------------------------------------------------

#[derive(Debug, Clone)]
pub struct InequalitySample {
    pub x: BigRational,
    pub raw_holds: bool,
    pub rearranged_holds: bool,
}

#[derive(Debug, Clone)]
pub struct InequalityReport {
    pub q: u64,
    pub n: u32,
    /// q^n / (2 - 1/q)^(n-1).
    pub threshold: BigRational,
    pub samples: Vec<InequalitySample>,
    pub ok: bool,
}

/// Checks, at sample sizes X around the threshold, that
/// `n (1 - 1/q) q^n + q^n <= X (2 - 1/q)^n + q^n (n - 1)(1 - 1/q)`
/// holds exactly when `X >= q^n / (2 - 1/q)^(n-1)`.
pub fn theorem_inequality_audit(q: u64, n: u32) -> Result<InequalityReport> {
    prime_power_split(q).ok_or(Error::NotAPrimePower(q))?;
    let qn = {
        let mut acc = BigRational::one();
        for _ in 0..n {
            acc *= from_u64(q);
        }
        acc
    };
    let one_minus = BigRational::new(BigInt::from(q - 1), BigInt::from(q));
    let factor = BigRational::new(BigInt::from(2 * q - 1), BigInt::from(q));
    let factor_n = {
        let mut acc = BigRational::one();
        for _ in 0..n {
            acc *= &factor;
        }
        acc
    };
    let threshold = &qn / (&factor_n / &factor);

    let nr = BigRational::from_integer(BigInt::from(n));
    let lhs = &nr * &one_minus * &qn + &qn;
    let raw = |x: &BigRational| -> bool {
        lhs <= x * &factor_n + &qn * (&nr - BigRational::one()) * &one_minus
    };

    let eps = BigRational::new(BigInt::one(), qn.numer().clone());
    let sample_xs = vec![
        BigRational::from_integer(BigInt::from(0)),
        &threshold - &eps,
        threshold.clone(),
        &threshold + &eps,
        &threshold + BigRational::one(),
        &threshold * BigRational::from_integer(BigInt::from(2)),
    ];
    let samples: Vec<InequalitySample> = sample_xs
        .into_iter()
        .map(|x| InequalitySample {
            raw_holds: raw(&x),
            rearranged_holds: x >= threshold,
            x,
        })
        .collect();
    let ok = samples.iter().all(|s| s.raw_holds == s.rearranged_holds);
    Ok(InequalityReport {
        q,
        n,
        threshold,
        samples,
        ok,
    })
}
