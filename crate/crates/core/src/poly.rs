//! Exact bigraded polynomials in `z` and `z̄` on ℂⁿ.
//!
//! A [`BigradedPolynomial`] is a finite map `(α, β) ↦ c_{αβ}` standing for
//! `Σ c_{αβ} z^α z̄^β`. Coefficients are exact elements of ℚ(i); terms are kept in
//! lexicographic order on `(α, β)` so equality and serialization are canonical.
//!
//! Axis indices in the public API are 1-based (`1 ≤ j ≤ n`).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::complex::Complex64;
use num::{BigRational, Zero};

use crate::cq::{format_rational, parse_rational, rat_int, ComplexRational};
use crate::error::{Error, Result};

/// Exponent vector of length `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// `e_k` with a 1-based axis `k`.
    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = vec![0; n];
        v[k - 1] = 1;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, k: usize) -> u32 {
        self.0[k]
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Decrements entry `k` (0-based); `None` if it is already zero.
    fn dec(&self, k: usize) -> Option<MultiIndex> {
        if self.0[k] == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[k] -= 1;
        Some(MultiIndex(v))
    }

    fn inc(&self, k: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v[k] += 1;
        MultiIndex(v)
    }

    /// `α!` as an integer.
    pub fn factorial(&self) -> num::BigInt {
        self.0
            .iter()
            .map(|&a| (1..=a as u64).map(num::BigInt::from).product::<num::BigInt>())
            .product()
    }

    /// All multi-indices of length `n` and degree `d`, ascending lexicographically.
    pub fn all_of_degree(n: usize, d: u32) -> Vec<MultiIndex> {
        fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == n {
                prefix.push(d);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for a in 0..=d {
                prefix.push(a);
                rec(n, d - a, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n == 0 {
            if d == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(n, d, &mut Vec::with_capacity(n), &mut out);
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Result of [`BigradedPolynomial::bidegree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bidegree {
    Homogeneous(u32, u32),
    Inhomogeneous,
}

/// Key of a single term: `z^α z̄^β`.
pub type TermKey = (MultiIndex, MultiIndex);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BigradedPolynomial {
    n: usize,
    terms: BTreeMap<TermKey, ComplexRational>,
}

impl BigradedPolynomial {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: ComplexRational) -> Self {
        Self::monomial(MultiIndex::zeros(n), MultiIndex::zeros(n), c)
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, ComplexRational::one())
    }

    pub fn monomial(alpha: MultiIndex, beta: MultiIndex, c: ComplexRational) -> Self {
        assert_eq!(alpha.len(), beta.len(), "multi-index lengths differ");
        let n = alpha.len();
        let mut p = Self::zero(n);
        p.add_term((alpha, beta), c);
        p
    }

    /// The coordinate `z_j` (1-based).
    pub fn z(n: usize, j: usize) -> Self {
        Self::monomial(MultiIndex::unit(n, j), MultiIndex::zeros(n), ComplexRational::one())
    }

    /// The coordinate `z̄_j` (1-based).
    pub fn zbar(n: usize, j: usize) -> Self {
        Self::monomial(MultiIndex::zeros(n), MultiIndex::unit(n, j), ComplexRational::one())
    }

    /// `|z|² = Σ z_k z̄_k`.
    pub fn norm_sq(n: usize) -> Self {
        let mut p = Self::zero(n);
        for k in 1..=n {
            p.add_term((MultiIndex::unit(n, k), MultiIndex::unit(n, k)), ComplexRational::one());
        }
        p
    }

    /// Builds from raw terms, merging duplicates and dropping zeros.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (TermKey, ComplexRational)>,
    {
        let mut p = Self::zero(n);
        for ((a, b), c) in terms {
            if a.len() != n || b.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: a.len().max(b.len()) });
            }
            p.add_term((a, b), c);
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &ComplexRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, alpha: &MultiIndex, beta: &MultiIndex) -> ComplexRational {
        self.terms
            .get(&(alpha.clone(), beta.clone()))
            .cloned()
            .unwrap_or_else(ComplexRational::zero)
    }

    /// Greatest term key in the canonical order.
    pub fn leading_key(&self) -> Option<&TermKey> {
        self.terms.keys().next_back()
    }

    fn add_term(&mut self, key: TermKey, c: ComplexRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(existing) => {
                *existing += &c;
                if existing.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    fn check_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    fn check_axis(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.n {
            return Err(Error::AxisOutOfRange { index: j, n: self.n });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_n(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(&ComplexRational::from_int(-1)))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_n(other)?;
        let mut out = Self::zero(self.n);
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &other.terms {
                out.add_term((a1.plus(a2), b1.plus(b2)), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &ComplexRational) -> Self {
        let mut out = Self::zero(self.n);
        if c.is_zero() {
            return out;
        }
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v * c);
        }
        out
    }

    pub fn scale_rational(&self, r: &BigRational) -> Self {
        self.scale(&ComplexRational::from_rational(r.clone()))
    }

    /// Pointwise complex conjugate as a function: `z^α z̄^β ↦ z^β z̄^α`, `c ↦ c̄`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.n);
        for ((a, b), c) in &self.terms {
            out.add_term((b.clone(), a.clone()), c.conj());
        }
        out
    }

    /// `∂/∂z_j` (or `∂/∂z̄_j` when `conjugate`), 1-based `j`.
    pub fn wirtinger(&self, j: usize, conjugate: bool) -> Result<Self> {
        self.check_axis(j)?;
        let k = j - 1;
        let mut out = Self::zero(self.n);
        for ((a, b), c) in &self.terms {
            let (exp, key) = if conjugate {
                match b.dec(k) {
                    Some(nb) => (b.get(k), (a.clone(), nb)),
                    None => continue,
                }
            } else {
                match a.dec(k) {
                    Some(na) => (a.get(k), (na, b.clone())),
                    None => continue,
                }
            };
            out.add_term(key, c.scale(&rat_int(exp as i64)));
        }
        Ok(out)
    }

    /// `Δ = 4 Σ_k ∂²/∂z_k∂z̄_k`, the ordinary Laplacian on ℝ²ⁿ.
    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.n);
        for ((a, b), c) in &self.terms {
            for k in 0..self.n {
                let (ak, bk) = (a.get(k), b.get(k));
                if ak == 0 || bk == 0 {
                    continue;
                }
                let key = (a.dec(k).unwrap(), b.dec(k).unwrap());
                out.add_term(key, c.scale(&rat_int(4 * ak as i64 * bk as i64)));
            }
        }
        out
    }

    pub fn is_harmonic(&self) -> bool {
        self.laplacian().is_zero()
    }

    /// Multiplies by `z_j` (or `z̄_j`), 1-based.
    pub fn times_coordinate(&self, j: usize, conjugate: bool) -> Result<Self> {
        self.check_axis(j)?;
        let k = j - 1;
        let mut out = Self::zero(self.n);
        for ((a, b), c) in &self.terms {
            let key = if conjugate { (a.clone(), b.inc(k)) } else { (a.inc(k), b.clone()) };
            out.add_term(key, c.clone());
        }
        Ok(out)
    }

    /// The zero polynomial reports `(0, 0)`.
    pub fn bidegree(&self) -> Bidegree {
        let mut iter = self.terms.keys();
        let Some((a0, b0)) = iter.next() else {
            return Bidegree::Homogeneous(0, 0);
        };
        let (p, q) = (a0.degree(), b0.degree());
        if iter.all(|(a, b)| a.degree() == p && b.degree() == q) {
            Bidegree::Homogeneous(p, q)
        } else {
            Bidegree::Inhomogeneous
        }
    }

    /// Sub-sum of terms with `|α| = p`, `|β| = q`.
    pub fn homogeneous_part(&self, p: u32, q: u32) -> Self {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|((a, b), _)| a.degree() == p && b.degree() == q)
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    /// Distinct bidegrees present, ascending.
    pub fn bidegrees(&self) -> Vec<(u32, u32)> {
        let mut v: Vec<(u32, u32)> = self.terms.keys().map(|(a, b)| (a.degree(), b.degree())).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|(a, b)| a.degree() + b.degree()).max().unwrap_or(0)
    }

    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: z.len() });
        }
        Ok(self.compile().eval(z))
    }

    /// Floating-point copy for hot evaluation loops.
    pub fn compile(&self) -> FloatPoly {
        FloatPoly::new(self)
    }

    /// One term per line: `(α|β) re im`, rationals as `num/den`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for ((a, b), c) in &self.terms {
            s.push_str(&format!("({}|{}) {} {}\n", a, b, format_rational(&c.re), format_rational(&c.im)));
        }
        s
    }

    /// Parses [`to_text`](Self::to_text) output. Blank lines and `#` comments are skipped.
    pub fn from_text(text: &str, n: usize) -> Result<Self> {
        let mut p = Self::zero(n);
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, c) = parse_term_line(line, idx + 1)?;
            if key.0.len() != n || key.1.len() != n {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected multi-indices of length {}", n),
                });
            }
            p.add_term(key, c);
        }
        Ok(p)
    }
}

pub(crate) fn parse_term_line(line: &str, lineno: usize) -> Result<(TermKey, ComplexRational)> {
    let err = |m: &str| Error::Parse { line: lineno, message: m.to_string() };
    let rest = line.strip_prefix('(').ok_or_else(|| err("term must start with '('"))?;
    let (inside, tail) = rest.split_once(')').ok_or_else(|| err("missing ')'"))?;
    let (a, b) = inside.split_once('|').ok_or_else(|| err("missing '|' between α and β"))?;
    let parse_idx = |s: &str| -> Result<MultiIndex> {
        s.split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| err("bad multi-index entry")))
            .collect::<Result<Vec<u32>>>()
            .map(MultiIndex::new)
    };
    let (alpha, beta) = (parse_idx(a)?, parse_idx(b)?);
    if alpha.len() != beta.len() {
        return Err(err("α and β lengths differ"));
    }
    let fields: Vec<&str> = tail.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(err("expected `re im` after the multi-indices"));
    }
    let re = parse_rational(fields[0]).ok_or_else(|| err("bad real part"))?;
    let im = parse_rational(fields[1]).ok_or_else(|| err("bad imaginary part"))?;
    Ok(((alpha, beta), ComplexRational::new(re, im)))
}

impl fmt::Display for BigradedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((a, b), c)| format!("({})·z^({})·z̄^({})", c, a, b))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Add for &BigradedPolynomial {
    type Output = BigradedPolynomial;
    fn add(self, rhs: &BigradedPolynomial) -> BigradedPolynomial {
        self.try_add(rhs).expect("polynomial dimension mismatch")
    }
}

impl Sub for &BigradedPolynomial {
    type Output = BigradedPolynomial;
    fn sub(self, rhs: &BigradedPolynomial) -> BigradedPolynomial {
        self.try_sub(rhs).expect("polynomial dimension mismatch")
    }
}

impl Mul for &BigradedPolynomial {
    type Output = BigradedPolynomial;
    fn mul(self, rhs: &BigradedPolynomial) -> BigradedPolynomial {
        self.try_mul(rhs).expect("polynomial dimension mismatch")
    }
}

impl Neg for &BigradedPolynomial {
    type Output = BigradedPolynomial;
    fn neg(self) -> BigradedPolynomial {
        self.scale(&ComplexRational::from_int(-1))
    }
}

/// The binary operation selected by [`poly_arith`].
#[derive(Clone, Debug)]
pub enum ArithOp {
    Add,
    Mul,
    /// Scales `a` by the given constant; `b` only participates in the dimension check.
    Scale(ComplexRational),
}

pub fn poly_arith(a: &BigradedPolynomial, b: &BigradedPolynomial, op: ArithOp) -> Result<BigradedPolynomial> {
    match op {
        ArithOp::Add => a.try_add(b),
        ArithOp::Mul => a.try_mul(b),
        ArithOp::Scale(c) => {
            a.check_n(b)?;
            Ok(a.scale(&c))
        }
    }
}

/// Floating-point image of a [`BigradedPolynomial`].
#[derive(Clone, Debug)]
pub struct FloatPoly {
    n: usize,
    max_pow: usize,
    terms: Vec<(Vec<u32>, Vec<u32>, Complex64)>,
}

impl FloatPoly {
    fn new(p: &BigradedPolynomial) -> Self {
        let terms: Vec<(Vec<u32>, Vec<u32>, Complex64)> = p
            .terms
            .iter()
            .map(|((a, b), c)| (a.0.clone(), b.0.clone(), c.to_c64()))
            .collect();
        let max_pow = terms
            .iter()
            .flat_map(|(a, b, _)| a.iter().chain(b.iter()))
            .copied()
            .max()
            .unwrap_or(0) as usize;
        Self { n: p.n, max_pow, terms }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluates at `z`; the caller guarantees `z.len() == n`.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        if self.terms.is_empty() {
            return Complex64::zero();
        }
        let stride = self.max_pow + 1;
        let mut pows = vec![Complex64::new(1.0, 0.0); 2 * self.n * stride];
        for (k, zk) in z.iter().enumerate() {
            let zc = zk.conj();
            for e in 1..stride {
                pows[k * stride + e] = pows[k * stride + e - 1] * zk;
                pows[(self.n + k) * stride + e] = pows[(self.n + k) * stride + e - 1] * zc;
            }
        }
        let mut acc = Complex64::zero();
        for (a, b, c) in &self.terms {
            let mut t = *c;
            for k in 0..self.n {
                if a[k] > 0 {
                    t *= pows[k * stride + a[k] as usize];
                }
                if b[k] > 0 {
                    t *= pows[(self.n + k) * stride + b[k] as usize];
                }
            }
            acc += t;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cq::rat;

    fn c(v: i64) -> ComplexRational {
        ComplexRational::from_int(v)
    }

    fn mono(a: &[u32], b: &[u32], v: i64) -> BigradedPolynomial {
        BigradedPolynomial::monomial(MultiIndex::new(a.to_vec()), MultiIndex::new(b.to_vec()), c(v))
    }

    #[test]
    fn arithmetic_examples() {
        let z1 = BigradedPolynomial::z(2, 1);
        assert!(poly_arith(&z1, &(-&z1), ArithOp::Add).unwrap().is_zero());

        let prod = poly_arith(&z1, &BigradedPolynomial::zbar(2, 2), ArithOp::Mul).unwrap();
        assert_eq!(prod, mono(&[1, 0], &[0, 1], 1));
        assert_eq!(prod.bidegree(), Bidegree::Homogeneous(1, 1));

        let scaled = poly_arith(&prod, &prod, ArithOp::Scale(c(2))).unwrap();
        assert_eq!(scaled, mono(&[1, 0], &[0, 1], 2));
    }

    #[test]
    fn mismatched_dimension_is_an_error() {
        let a = BigradedPolynomial::z(2, 1);
        let b = BigradedPolynomial::z(3, 1);
        assert!(matches!(a.try_add(&b), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(poly_arith(&a, &b, ArithOp::Mul), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn wirtinger_examples() {
        let p = mono(&[1, 0], &[0, 1], 1);
        assert_eq!(p.wirtinger(2, true).unwrap(), BigradedPolynomial::z(2, 1));
        assert!(BigradedPolynomial::zbar(1, 1).wirtinger(1, false).unwrap().is_zero());
        let sq = mono(&[2], &[2], 1);
        assert_eq!(sq.wirtinger(1, true).unwrap(), mono(&[2], &[1], 2));
        assert!(matches!(p.wirtinger(3, false), Err(Error::AxisOutOfRange { .. })));
        assert!(matches!(p.wirtinger(0, false), Err(Error::AxisOutOfRange { .. })));
    }

    #[test]
    fn laplacian_examples() {
        let p = mono(&[1, 0], &[0, 1], 1);
        assert!(p.laplacian().is_zero());
        let lifted = &BigradedPolynomial::norm_sq(2) * &p;
        assert_eq!(lifted.laplacian(), p.scale(&c(16)));
        // Δ(|z|²) = 4n
        assert_eq!(BigradedPolynomial::norm_sq(3).laplacian(), BigradedPolynomial::constant(3, c(12)));
    }

    #[test]
    fn evaluate_examples() {
        let p = mono(&[1, 0], &[0, 1], 1);
        let v = p.evaluate(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]).unwrap();
        assert_eq!(v, Complex64::new(0.0, -1.0));
        let r = BigradedPolynomial::norm_sq(2)
            .evaluate(&[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)])
            .unwrap();
        assert_eq!(r, Complex64::new(2.0, 0.0));
        assert!(p.evaluate(&[Complex64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn bidegree_examples() {
        assert_eq!(mono(&[2, 0], &[0, 1], 1).bidegree(), Bidegree::Homogeneous(2, 1));
        let mixed = &BigradedPolynomial::z(1, 1) + &BigradedPolynomial::zbar(1, 1);
        assert_eq!(mixed.bidegree(), Bidegree::Inhomogeneous);
        assert_eq!(BigradedPolynomial::zero(2).bidegree(), Bidegree::Homogeneous(0, 0));
    }

    #[test]
    fn text_round_trip_and_errors() {
        let p = &mono(&[1, 0], &[0, 1], 3) + &BigradedPolynomial::constant(2, ComplexRational::new(rat(1, 2), rat(-2, 3)));
        let text = p.to_text();
        assert_eq!(text, "(0,0|0,0) 1/2 -2/3\n(1,0|0,1) 3/1 0/1\n");
        assert_eq!(BigradedPolynomial::from_text(&text, 2).unwrap(), p);
        let bad = BigradedPolynomial::from_text("(1,0|0) 1/1 0/1", 2);
        assert!(matches!(bad, Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn conj_swaps_holomorphic_parts() {
        let p = BigradedPolynomial::monomial(
            MultiIndex::new(vec![2, 0]),
            MultiIndex::new(vec![0, 1]),
            ComplexRational::i(),
        );
        let z = [Complex64::new(0.3, -0.2), Complex64::new(1.1, 0.4)];
        let lhs = p.conj().evaluate(&z).unwrap();
        let rhs = p.evaluate(&z).unwrap().conj();
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(MultiIndex::all_of_degree(3, 2).len(), 6);
        assert_eq!(MultiIndex::all_of_degree(2, 0), vec![MultiIndex::zeros(2)]);
        let v = MultiIndex::all_of_degree(2, 2);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
}
