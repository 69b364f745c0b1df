//! Sparse multivariate polynomials over GF(q) with Hasse calculus.
//!
//! The Hasse derivatives of P are the polynomials P^(i) with
//! `P(x + y) = sum_i P^(i)(x) y^i`; they replace iterated partials in
//! positive characteristic. Multiplicity at a point, restriction to a line,
//! and order of vanishing along a line are all built on them.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{Line, Point};
use crate::gf::Field;

/// Exponent vector of a monomial. Ordered graded-lexicographically: first by
/// total weight, then lexicographically on the entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> MultiIndex {
        MultiIndex(exponents)
    }

    pub fn zero(nvars: usize) -> MultiIndex {
        MultiIndex(vec![0; nvars])
    }

    pub fn unit(nvars: usize, var: usize) -> MultiIndex {
        let mut e = vec![0; nvars];
        e[var] = 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    /// Component-wise difference, None if any entry would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        debug_assert_eq!(self.len(), other.len());
        let mut out = Vec::with_capacity(self.len());
        for (&a, &b) in self.0.iter().zip(&other.0) {
            if b > a {
                return None;
            }
            out.push(a - b);
        }
        Some(MultiIndex(out))
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex(self.0.iter().zip(&other.0).map(|(&a, &b)| a + b).collect())
    }

    /// Appends extra zero entries (used to extend i to (i, 0)).
    pub fn extended(&self, extra_zeros: usize) -> MultiIndex {
        let mut e = self.0.clone();
        e.resize(e.len() + extra_zeros, 0);
        MultiIndex(e)
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.weight()
            .cmp(&other.weight())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All exponent vectors of `parts` entries with total weight exactly `weight`,
/// in lexicographic order.
pub fn compositions(weight: u64, parts: usize) -> Vec<MultiIndex> {
    fn rec(weight: u64, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if parts == 1 {
            prefix.push(weight as u32);
            out.push(MultiIndex::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in 0..=weight {
            prefix.push(first as u32);
            rec(weight - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    if parts == 0 {
        return if weight == 0 {
            vec![MultiIndex::new(Vec::new())]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    rec(weight, parts, &mut Vec::new(), &mut out);
    out
}

/// The finite or identically-infinite order of vanishing. `Infinite` is kept
/// as an explicit sentinel because an identically-zero restriction is a
/// different fact than a large finite order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Multiplicity {
    Finite(u64),
    Infinite,
}

impl Multiplicity {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Multiplicity::Infinite)
    }

    pub fn at_least(&self, m: u64) -> bool {
        match self {
            Multiplicity::Finite(v) => *v >= m,
            Multiplicity::Infinite => true,
        }
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Finite(m) => write!(f, "{m}"),
            Multiplicity::Infinite => write!(f, "inf"),
        }
    }
}

/// A sparse multivariate polynomial. The zero polynomial has no terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    field: Field,
    nvars: usize,
    terms: BTreeMap<MultiIndex, u64>,
}

impl Polynomial {
    pub fn zero(field: Field, nvars: usize) -> Polynomial {
        Polynomial {
            field,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(field: Field, nvars: usize, c: u64) -> Polynomial {
        Polynomial::from_terms(field, nvars, [(MultiIndex::zero(nvars), c)])
    }

    /// The monomial c * x^alpha.
    pub fn monomial(field: Field, nvars: usize, alpha: MultiIndex, c: u64) -> Polynomial {
        Polynomial::from_terms(field, nvars, [(alpha, c)])
    }

    /// The variable x_{var} (0-based).
    pub fn var(field: Field, nvars: usize, var: usize) -> Polynomial {
        Polynomial::monomial(field.clone(), nvars, MultiIndex::unit(nvars, var), 1)
    }

    /// Sums duplicate exponents and drops zero coefficients.
    pub fn from_terms<I>(field: Field, nvars: usize, terms: I) -> Polynomial
    where
        I: IntoIterator<Item = (MultiIndex, u64)>,
    {
        let mut map: BTreeMap<MultiIndex, u64> = BTreeMap::new();
        for (alpha, c) in terms {
            assert_eq!(alpha.len(), nvars, "exponent arity mismatch");
            debug_assert!(c < field.q());
            let entry = map.entry(alpha).or_insert(0);
            *entry = field.add(*entry, c);
        }
        map.retain(|_, &mut c| c != 0);
        Polynomial {
            field,
            nvars,
            terms: map,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, u64)> {
        self.terms.iter().map(|(a, &c)| (a, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> u64 {
        self.terms.get(alpha).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; None for the zero polynomial.
    pub fn degree(&self) -> Option<u64> {
        self.terms.keys().map(|a| a.weight()).max()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.field, other.field, "mixed fields");
        assert_eq!(self.nvars, other.nvars);
        let mut terms = self.terms.clone();
        for (alpha, &c) in &other.terms {
            let entry = terms.entry(alpha.clone()).or_insert(0);
            *entry = self.field.add(*entry, c);
        }
        terms.retain(|_, &mut c| c != 0);
        Polynomial {
            field: self.field.clone(),
            nvars: self.nvars,
            terms,
        }
    }

    pub fn scale(&self, c: u64) -> Polynomial {
        if c == 0 {
            return Polynomial::zero(self.field.clone(), self.nvars);
        }
        let terms = self
            .terms
            .iter()
            .map(|(a, &v)| (a.clone(), self.field.mul(v, c)))
            .collect();
        Polynomial {
            field: self.field.clone(),
            nvars: self.nvars,
            terms,
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.field, other.field, "mixed fields");
        assert_eq!(self.nvars, other.nvars);
        let mut terms: BTreeMap<MultiIndex, u64> = BTreeMap::new();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let c = self.field.mul(ca, cb);
                if c == 0 {
                    continue;
                }
                let entry = terms.entry(a.add(b)).or_insert(0);
                *entry = self.field.add(*entry, c);
            }
        }
        terms.retain(|_, &mut c| c != 0);
        Polynomial {
            field: self.field.clone(),
            nvars: self.nvars,
            terms,
        }
    }

    pub fn evaluate(&self, point: &Point) -> Result<u64> {
        if point.dim() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: point.dim(),
            });
        }
        let f = &self.field;
        let mut acc = 0;
        for (alpha, &c) in &self.terms {
            let mut term = c;
            for (&e, &p) in alpha.exponents().iter().zip(point.coords()) {
                if e > 0 {
                    term = f.mul(term, f.pow(p, e as u64));
                }
            }
            acc = f.add(acc, term);
        }
        Ok(acc)
    }

    /// The i-th Hasse derivative: sum over terms of
    /// `c_alpha * prod_j C(alpha_j, i_j) * x^(alpha - i)`, with terms dropped
    /// whenever some alpha_j < i_j. Linear in the polynomial.
    pub fn hasse_derivative(&self, i: &MultiIndex) -> Result<Polynomial> {
        if i.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: i.len(),
            });
        }
        let f = &self.field;
        let mut terms: BTreeMap<MultiIndex, u64> = BTreeMap::new();
        for (alpha, &c) in &self.terms {
            let Some(shifted) = alpha.checked_sub(i) else {
                continue;
            };
            let mut coeff = c;
            for (&a, &b) in alpha.exponents().iter().zip(i.exponents()) {
                coeff = f.mul(coeff, f.binom(a as u64, b as u64));
                if coeff == 0 {
                    break;
                }
            }
            if coeff == 0 {
                continue;
            }
            let entry = terms.entry(shifted).or_insert(0);
            *entry = f.add(*entry, coeff);
        }
        terms.retain(|_, &mut c| c != 0);
        Ok(Polynomial {
            field: f.clone(),
            nvars: self.nvars,
            terms,
        })
    }

    /// Test oracle for Hasse derivatives: literally expands P(x + y) in 2n
    /// variables and collects the coefficient of each y^i. The returned map
    /// covers the component-wise box of exponents appearing in P, including
    /// entries whose coefficient polynomial is zero.
    pub fn expand_shift_oracle(&self) -> Result<BTreeMap<MultiIndex, Polynomial>> {
        const MAX_TERMS: usize = 200;
        const MAX_DEGREE: u64 = 12;
        const MAX_BOX: u64 = 100_000;
        if self.terms.len() > MAX_TERMS {
            return Err(Error::SizeLimitExceeded(format!(
                "{} terms exceeds {MAX_TERMS}",
                self.terms.len()
            )));
        }
        if self.degree().unwrap_or(0) > MAX_DEGREE {
            return Err(Error::SizeLimitExceeded(format!(
                "degree {} exceeds {MAX_DEGREE}",
                self.degree().unwrap()
            )));
        }
        let f = &self.field;
        let n = self.nvars;

        // Expand in 2n variables: 0..n are x, n..2n are y.
        let mut expanded = Polynomial::zero(f.clone(), 2 * n);
        for (alpha, &c) in &self.terms {
            let mut term = Polynomial::constant(f.clone(), 2 * n, c);
            for (j, &e) in alpha.exponents().iter().enumerate() {
                let sum = Polynomial::var(f.clone(), 2 * n, j)
                    .add(&Polynomial::var(f.clone(), 2 * n, n + j));
                for _ in 0..e {
                    term = term.mul(&sum);
                }
            }
            expanded = expanded.add(&term);
        }

        // Component-wise exponent box of the original support.
        let mut maxexp = vec![0u32; n];
        for alpha in self.terms.keys() {
            for (m, &e) in maxexp.iter_mut().zip(alpha.exponents()) {
                *m = (*m).max(e);
            }
        }
        let box_size: u64 = maxexp.iter().map(|&m| m as u64 + 1).product();
        if box_size > MAX_BOX {
            return Err(Error::SizeLimitExceeded(format!(
                "exponent box of {box_size} indices exceeds {MAX_BOX}"
            )));
        }

        let mut out: BTreeMap<MultiIndex, Polynomial> = BTreeMap::new();
        let mut cursor = vec![0u32; n];
        loop {
            out.insert(
                MultiIndex::new(cursor.clone()),
                Polynomial::zero(f.clone(), n),
            );
            let mut j = 0;
            loop {
                if j == n {
                    break;
                }
                if cursor[j] < maxexp[j] {
                    cursor[j] += 1;
                    break;
                }
                cursor[j] = 0;
                j += 1;
            }
            if j == n {
                break;
            }
        }

        for (beta, &c) in &expanded.terms {
            let x_part = MultiIndex::new(beta.exponents()[..n].to_vec());
            let y_part = MultiIndex::new(beta.exponents()[n..].to_vec());
            let slot = out
                .entry(y_part)
                .or_insert_with(|| Polynomial::zero(f.clone(), n));
            *slot = slot.add(&Polynomial::monomial(f.clone(), n, x_part, c));
        }
        Ok(out)
    }

    /// Largest m such that every Hasse derivative of weight < m vanishes at
    /// the point; Infinite exactly for the zero polynomial. Derivatives are
    /// enumerated in weight-graded order and the search stops at the first
    /// nonzero value.
    pub fn multiplicity(&self, point: &Point) -> Result<Multiplicity> {
        if point.dim() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: point.dim(),
            });
        }
        let Some(degree) = self.degree() else {
            return Ok(Multiplicity::Infinite);
        };
        for w in 0..=degree {
            for i in compositions(w, self.nvars) {
                if self.hasse_derivative(&i)?.evaluate(point)? != 0 {
                    return Ok(Multiplicity::Finite(w));
                }
            }
        }
        unreachable!("a nonzero polynomial has a nonzero derivative of weight deg at every point")
    }

    /// The sum of terms of weight exactly k.
    pub fn homogeneous_component(&self, k: u64) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|(a, _)| a.weight() == k)
            .map(|(a, &c)| (a.clone(), c))
            .collect();
        Polynomial {
            field: self.field.clone(),
            nvars: self.nvars,
            terms,
        }
    }

    /// Substitutes x := base + dir * t for an arbitrary (not necessarily
    /// canonical) parameterization and expands.
    pub fn restrict_affine(&self, base: &[u64], dir: &[u64]) -> Result<UnivariatePolynomial> {
        if base.len() != self.nvars || dir.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: base.len().min(dir.len()),
            });
        }
        let f = &self.field;
        let mut acc = UnivariatePolynomial::zero(f.clone());
        for (alpha, &c) in &self.terms {
            let mut term = UnivariatePolynomial::constant(f.clone(), c);
            for (j, &e) in alpha.exponents().iter().enumerate() {
                if e > 0 {
                    term = term.mul(&affine_power(f, base[j], dir[j], e as u64));
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// P restricted to the line: the univariate P(base + dir * t).
    pub fn restrict_to_line(&self, line: &Line) -> Result<UnivariatePolynomial> {
        self.restrict_affine(line.base().coords(), line.dir().coords())
    }

    /// Order of vanishing along the line at a point of it: the multiplicity
    /// of the univariate restriction at the parameter t0 of the point.
    pub fn mult_along_line(&self, line: &Line, point: &Point) -> Result<Multiplicity> {
        let t0 = line.param_of(&self.field, point)?;
        Ok(self.restrict_to_line(line)?.multiplicity_at(t0))
    }

    /// Sweeps S^n, summing multiplicities, against the degree bound
    /// `d * |S|^(n-1)`.
    pub fn schwartz_zippel_audit(&self, subset: &[u64]) -> Result<SchwartzZippelAudit> {
        const MAX_POINTS: u128 = 1_000_000;
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        assert!(!subset.is_empty(), "subset must be non-empty");
        let n = self.nvars as u32;
        let s = subset.len() as u128;
        let total = s.pow(n);
        if total > MAX_POINTS {
            return Err(Error::EnumerationTooLarge {
                size: total,
                limit: MAX_POINTS,
            });
        }
        let d = self.degree().unwrap();

        // Precompute all derivatives up to weight d, grouped by weight; the
        // per-point search then reuses them across the whole sweep.
        let mut by_weight: Vec<Vec<Polynomial>> = Vec::new();
        for w in 0..=d {
            let mut row = Vec::new();
            for i in compositions(w, self.nvars) {
                row.push(self.hasse_derivative(&i)?);
            }
            by_weight.push(row);
        }
        let mult_at = |point: &Point| -> u64 {
            for (w, row) in by_weight.iter().enumerate() {
                if row
                    .iter()
                    .any(|p| p.evaluate(point).expect("dimension checked") != 0)
                {
                    return w as u64;
                }
            }
            unreachable!("weight-d derivative is a nonzero constant")
        };

        use rayon::prelude::*;
        let total = total as u64;
        let sum: u64 = (0..total)
            .into_par_iter()
            .map(|idx| {
                let mut coords = Vec::with_capacity(self.nvars);
                let mut x = idx;
                for _ in 0..self.nvars {
                    coords.push(subset[(x % s as u64) as usize]);
                    x /= s as u64;
                }
                mult_at(&Point::new(coords))
            })
            .sum();
        let bound = d * (s as u64).pow(n - 1);
        Ok(SchwartzZippelAudit {
            sum,
            bound,
            ok: sum <= bound,
        })
    }
}

/// Result of a Schwartz-Zippel sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchwartzZippelAudit {
    pub sum: u64,
    pub bound: u64,
    pub ok: bool,
}

/// (a + b t)^e expanded by the binomial formula; the integer binomials reduce
/// into the field via Lucas.
fn affine_power(f: &Field, a: u64, b: u64, e: u64) -> UnivariatePolynomial {
    let mut coeffs = vec![0u64; e as usize + 1];
    for (s, slot) in coeffs.iter_mut().enumerate() {
        let s = s as u64;
        let c = f.mul(
            f.binom(e, s),
            f.mul(f.pow(a, e - s), f.pow(b, s)),
        );
        *slot = c;
    }
    UnivariatePolynomial::new(f.clone(), coeffs)
}

/// A univariate polynomial in t, trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnivariatePolynomial {
    field: Field,
    coeffs: Vec<u64>,
}

impl UnivariatePolynomial {
    pub fn new(field: Field, mut coeffs: Vec<u64>) -> UnivariatePolynomial {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        UnivariatePolynomial { field, coeffs }
    }

    pub fn zero(field: Field) -> UnivariatePolynomial {
        UnivariatePolynomial {
            field,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(field: Field, c: u64) -> UnivariatePolynomial {
        UnivariatePolynomial::new(field, vec![c])
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> u64 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &UnivariatePolynomial) -> UnivariatePolynomial {
        assert_eq!(self.field, other.field, "mixed fields");
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0u64; len];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.field.add(self.coeff(k), other.coeff(k));
        }
        UnivariatePolynomial::new(self.field.clone(), out)
    }

    pub fn mul(&self, other: &UnivariatePolynomial) -> UnivariatePolynomial {
        assert_eq!(self.field, other.field, "mixed fields");
        if self.is_zero() || other.is_zero() {
            return UnivariatePolynomial::zero(self.field.clone());
        }
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = self.field.add(out[i + j], self.field.mul(a, b));
            }
        }
        UnivariatePolynomial::new(self.field.clone(), out)
    }

    pub fn evaluate(&self, t: u64) -> u64 {
        let mut acc = 0;
        for &c in self.coeffs.iter().rev() {
            acc = self.field.add(self.field.mul(acc, t), c);
        }
        acc
    }

    /// The value Q^(j)(t0) of the j-th univariate Hasse derivative:
    /// `sum_k C(k, j) c_k t0^(k-j)`.
    pub fn hasse_coeff(&self, j: u64, t0: u64) -> u64 {
        let f = &self.field;
        let mut acc = 0;
        for (k, &c) in self.coeffs.iter().enumerate() {
            let k = k as u64;
            if k < j || c == 0 {
                continue;
            }
            let term = f.mul(f.binom(k, j), f.mul(c, f.pow(t0, k - j)));
            acc = f.add(acc, term);
        }
        acc
    }

    /// The j-th Hasse derivative as a polynomial.
    pub fn hasse_derivative(&self, j: u64) -> UnivariatePolynomial {
        if (self.coeffs.len() as u64) <= j {
            return UnivariatePolynomial::zero(self.field.clone());
        }
        let f = &self.field;
        let out = (j..self.coeffs.len() as u64)
            .map(|k| f.mul(f.binom(k, j), self.coeffs[k as usize]))
            .collect();
        UnivariatePolynomial::new(f.clone(), out)
    }

    /// Multiplicity at t0; Infinite exactly for the zero polynomial.
    pub fn multiplicity_at(&self, t0: u64) -> Multiplicity {
        if self.is_zero() {
            return Multiplicity::Infinite;
        }
        let d = self.degree().unwrap() as u64;
        for j in 0..=d {
            if self.hasse_coeff(j, t0) != 0 {
                return Multiplicity::Finite(j);
            }
        }
        // The leading Hasse coefficient is the leading coefficient itself.
        unreachable!("nonzero univariate has nonzero leading Hasse coefficient")
    }
}

impl fmt::Display for UnivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (k, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "t")?,
                (1, c) => write!(f, "{c}*t")?,
                (k, 1) => write!(f, "t^{k}")?,
                (k, c) => write!(f, "{c}*t^{k}")?,
            }
        }
        Ok(())
    }
}

// --- textual format -------------------------------------------------------
//
// Terms rendered as `coeff*x1^a1*...*xn^an` joined by `+`, coefficients as
// canonical integers; unit coefficients and `^1` may be omitted on input.

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (alpha, &c) in &self.terms {
            if !first {
                write!(f, "+")?;
            }
            first = false;
            let mut factors: Vec<String> = Vec::new();
            if c != 1 || alpha.weight() == 0 {
                factors.push(c.to_string());
            }
            for (j, &e) in alpha.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("x{}", j + 1)),
                    e => factors.push(format!("x{}^{}", j + 1, e)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl Polynomial {
    /// Parses the textual format in the context of a field and arity.
    pub fn parse(field: &Field, nvars: usize, input: &str) -> Result<Polynomial> {
        let mut terms: Vec<(MultiIndex, u64)> = Vec::new();
        for term in input.split('+') {
            let term = term.trim();
            if term.is_empty() {
                return Err(Error::PolynomialParse("empty term".into()));
            }
            let mut coeff = 1u64;
            let mut exponents = vec![0u32; nvars];
            for factor in term.split('*') {
                let factor = factor.trim();
                if let Some(rest) = factor.strip_prefix('x') {
                    let (var_s, exp_s) = match rest.split_once('^') {
                        Some((v, e)) => (v, Some(e)),
                        None => (rest, None),
                    };
                    let var: usize = var_s
                        .parse()
                        .map_err(|_| Error::PolynomialParse(format!("bad variable `{factor}`")))?;
                    if var == 0 || var > nvars {
                        return Err(Error::PolynomialParse(format!(
                            "variable x{var} out of range 1..={nvars}"
                        )));
                    }
                    let exp: u32 = match exp_s {
                        Some(e) => e.trim().parse().map_err(|_| {
                            Error::PolynomialParse(format!("bad exponent in `{factor}`"))
                        })?,
                        None => 1,
                    };
                    exponents[var - 1] += exp;
                } else {
                    let c: u64 = factor
                        .parse()
                        .map_err(|_| Error::PolynomialParse(format!("bad coefficient `{factor}`")))?;
                    if c >= field.q() {
                        return Err(Error::PolynomialParse(format!(
                            "coefficient {c} is not canonical in GF({})",
                            field.q()
                        )));
                    }
                    coeff = field.mul(coeff, c);
                }
            }
            terms.push((MultiIndex::new(exponents), coeff));
        }
        Ok(Polynomial::from_terms(field.clone(), nvars, terms))
    }
}
