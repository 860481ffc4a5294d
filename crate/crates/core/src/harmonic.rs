//! Bigraded solid harmonics `H_{p,q}`: exact kernels of the Laplacian,
//! sphere-orthonormal bases, and the unique decomposition
//! `P = P_0 + |z|² P_1 + … + |z|^{2l} P_l` with `P_k ∈ H_{p-k,q-k}`.

use std::collections::{BTreeMap, BTreeSet};

use num::complex::Complex64;
use num::{BigInt, BigRational, One, Zero};

use crate::cq::{format_rational, parse_rational, rat_int, rat_to_f64, ComplexRational};
use crate::error::{Error, Result};
use crate::linalg::nullspace;
use crate::poly::{parse_term_line, Bidegree, BigradedPolynomial, FloatPoly, MultiIndex};
use crate::quad::monomial_sphere_integral;

fn binomial(n: i64, k: i64) -> i64 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1i64, |acc, i| acc * (n - i) / (i + 1))
}

/// `dim P_{p,q} = C(p+n-1, p)·C(q+n-1, q)`.
pub fn polynomial_space_dimension(n: usize, p: u32, q: u32) -> usize {
    let n = n as i64;
    (binomial(p as i64 + n - 1, p as i64) * binomial(q as i64 + n - 1, q as i64)) as usize
}

/// `d(p,q) = dim P_{p,q} − dim P_{p-1,q-1}`, the second term vanishing when `p = 0` or `q = 0`.
pub fn harmonic_dimension(n: usize, p: u32, q: u32) -> usize {
    let full = polynomial_space_dimension(n, p, q);
    if p == 0 || q == 0 {
        full
    } else {
        full - polynomial_space_dimension(n, p - 1, q - 1)
    }
}

/// All monomials `z^α z̄^β` with `|α| = p`, `|β| = q`, in canonical order.
pub fn monomial_basis(n: usize, p: u32, q: u32) -> Vec<BigradedPolynomial> {
    let alphas = MultiIndex::all_of_degree(n, p);
    let betas = MultiIndex::all_of_degree(n, q);
    let mut out = Vec::with_capacity(alphas.len() * betas.len());
    for a in &alphas {
        for b in &betas {
            out.push(BigradedPolynomial::monomial(a.clone(), b.clone(), ComplexRational::one()));
        }
    }
    out
}

/// A basis element `√scale_sq · poly`.
///
/// The square root is kept symbolic so that Gram checks stay exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarmonicElement {
    pub poly: BigradedPolynomial,
    pub scale_sq: BigRational,
}

impl HarmonicElement {
    pub fn plain(poly: BigradedPolynomial) -> Self {
        Self { poly, scale_sq: BigRational::one() }
    }

    pub fn scale(&self) -> f64 {
        rat_to_f64(&self.scale_sq).sqrt()
    }

    pub fn compile(&self) -> CompiledHarmonic {
        CompiledHarmonic { poly: self.poly.compile(), scale: self.scale() }
    }
}

/// Floating evaluator for a [`HarmonicElement`].
#[derive(Clone, Debug)]
pub struct CompiledHarmonic {
    poly: FloatPoly,
    scale: f64,
}

impl CompiledHarmonic {
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.poly.eval(z) * self.scale
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarmonicBasis {
    pub n: usize,
    pub p: u32,
    pub q: u32,
    pub elements: Vec<HarmonicElement>,
    pub orthonormal: bool,
}

impl HarmonicBasis {
    pub fn dimension(&self) -> usize {
        self.elements.len()
    }

    /// Exact Gram check: off-diagonal inner products vanish and every
    /// `scale_sq·⟨P,P⟩` equals one.
    pub fn gram_is_identity(&self) -> bool {
        for (i, ei) in self.elements.iter().enumerate() {
            let d = sphere_inner(&ei.poly, &ei.poly);
            if !d.im.is_zero() || &d.re * &ei.scale_sq != BigRational::one() {
                return false;
            }
            for ej in &self.elements[i + 1..] {
                if !sphere_inner(&ei.poly, &ej.poly).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Floating Gram matrix, for reports.
    pub fn gram_matrix_f64(&self) -> Vec<Vec<Complex64>> {
        self.elements
            .iter()
            .map(|ei| {
                self.elements
                    .iter()
                    .map(|ej| sphere_inner(&ei.poly, &ej.poly).to_c64() * ei.scale() * ej.scale())
                    .collect()
            })
            .collect()
    }

    /// Header `n p q d`, then per element a line `Y j scale_sq` followed by its terms.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {} {}\n", self.n, self.p, self.q, self.dimension());
        for (j, e) in self.elements.iter().enumerate() {
            s.push_str(&format!("Y {} {}\n", j + 1, format_rational(&e.scale_sq)));
            s.push_str(&e.poly.to_text());
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, message: "empty basis file".into() })?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse { line: hline + 1, message: "header must be `n p q d`".into() })?;
        if nums.len() != 4 {
            return Err(Error::Parse { line: hline + 1, message: "header must be `n p q d`".into() });
        }
        let (n, p, q, d) = (nums[0], nums[1] as u32, nums[2] as u32, nums[3]);
        let mut elements: Vec<HarmonicElement> = Vec::new();
        for (idx, line) in lines {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("Y ") {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let scale_sq = parts
                    .get(1)
                    .and_then(|s| parse_rational(s))
                    .ok_or(Error::Parse { line: idx + 1, message: "expected `Y j scale_sq`".into() })?;
                elements.push(HarmonicElement { poly: BigradedPolynomial::zero(n), scale_sq });
            } else {
                let (key, c) = parse_term_line(line, idx + 1)?;
                let cur = elements
                    .last_mut()
                    .ok_or(Error::Parse { line: idx + 1, message: "term before any `Y` line".into() })?;
                let term = BigradedPolynomial::from_terms(n, [(key, c)])?;
                cur.poly = &cur.poly + &term;
            }
        }
        if elements.len() != d {
            return Err(Error::Parse { line: hline + 1, message: format!("header declares {} elements, found {}", d, elements.len()) });
        }
        let mut basis = HarmonicBasis { n, p, q, elements, orthonormal: false };
        basis.orthonormal = basis.gram_is_identity();
        Ok(basis)
    }
}

/// `⟨P, Q⟩ = ∫ P(ω) conj(Q(ω)) dμ₁(ω)`, exact.
pub fn sphere_inner(p: &BigradedPolynomial, q: &BigradedPolynomial) -> ComplexRational {
    let n = p.n();
    let mut acc = ComplexRational::zero();
    for ((a1, b1), c1) in p.terms() {
        for ((a2, b2), c2) in q.terms() {
            // conj(z^{a2} z̄^{b2}) = z^{b2} z̄^{a2}
            let alpha = a1.plus(b2);
            let beta = b1.plus(a2);
            if alpha != beta {
                continue;
            }
            let w = monomial_sphere_integral(n, &alpha, &beta);
            acc += &(c1 * &c2.conj()).scale(&w);
        }
    }
    acc
}

fn weight(a: &MultiIndex, b: &MultiIndex) -> Vec<i64> {
    a.entries().iter().zip(b.entries()).map(|(&x, &y)| x as i64 - y as i64).collect()
}

fn single_weight(p: &BigradedPolynomial) -> bool {
    let mut it = p.terms().map(|((a, b), _)| weight(a, b));
    match it.next() {
        Some(first) => it.all(|w| w == first),
        None => true,
    }
}

/// Basis of `H_{p,q}` as the exact kernel of Δ on `P_{p,q}`.
///
/// Δ preserves the torus weight `α − β`, so the kernel is computed block by
/// block. Elements are monic in their leading monomial and sorted by it.
pub fn harmonic_space_basis(n: usize, p: u32, q: u32) -> HarmonicBasis {
    let mut blocks: BTreeMap<Vec<i64>, Vec<(MultiIndex, MultiIndex)>> = BTreeMap::new();
    for a in MultiIndex::all_of_degree(n, p) {
        for b in MultiIndex::all_of_degree(n, q) {
            blocks.entry(weight(&a, &b)).or_default().push((a.clone(), b));
        }
    }
    let mut elements = Vec::new();
    for cols in blocks.values() {
        // Image monomials of this block, indexed.
        let mut rows: BTreeMap<(MultiIndex, MultiIndex), usize> = BTreeMap::new();
        let mut entries: Vec<(usize, usize, i64)> = Vec::new();
        for (ci, (a, b)) in cols.iter().enumerate() {
            for k in 0..n {
                let (ak, bk) = (a.get(k), b.get(k));
                if ak == 0 || bk == 0 {
                    continue;
                }
                let mut a2 = a.entries().to_vec();
                let mut b2 = b.entries().to_vec();
                a2[k] -= 1;
                b2[k] -= 1;
                let key = (MultiIndex::new(a2), MultiIndex::new(b2));
                let next = rows.len();
                let ri = *rows.entry(key).or_insert(next);
                entries.push((ri, ci, ak as i64 * bk as i64));
            }
        }
        let mut mat = vec![vec![BigRational::zero(); cols.len()]; rows.len()];
        for (r, c, v) in entries {
            mat[r][c] += rat_int(v);
        }
        for v in nullspace(&mat, cols.len()) {
            let terms = cols
                .iter()
                .zip(v)
                .filter(|(_, x)| !x.is_zero())
                .map(|(k, x)| (k.clone(), ComplexRational::from_rational(x)));
            let poly = BigradedPolynomial::from_terms(n, terms).expect("consistent dimension");
            elements.push(HarmonicElement::plain(poly));
        }
    }
    elements.sort_by(|x, y| x.poly.leading_key().cmp(&y.poly.leading_key()));
    HarmonicBasis { n, p, q, elements, orthonormal: false }
}

/// Exact Gram-Schmidt in `L²(S^{2n-1}, μ₁)`.
pub fn orthonormalize_on_sphere(basis: &HarmonicBasis) -> Result<HarmonicBasis> {
    for e in &basis.elements {
        match e.poly.bidegree() {
            Bidegree::Homogeneous(p, q) if e.poly.is_zero() || (p, q) == (basis.p, basis.q) => {}
            _ => return Err(Error::NotHomogeneous),
        }
    }
    // Distinct torus weights are already orthogonal.
    let weight_of = |p: &BigradedPolynomial| {
        if single_weight(p) {
            p.leading_key().map(|(a, b)| weight(a, b))
        } else {
            None
        }
    };
    let mut ortho: Vec<(BigradedPolynomial, BigRational, Option<Vec<i64>>)> = Vec::with_capacity(basis.elements.len());
    for (i, e) in basis.elements.iter().enumerate() {
        let mut v = e.poly.clone();
        let w = weight_of(&e.poly);
        for (u, norm, wu) in &ortho {
            if w.is_some() && wu.is_some() && *wu != w {
                continue;
            }
            let coef = sphere_inner(&e.poly, u);
            if coef.is_zero() {
                continue;
            }
            let c = coef.scale(&(BigRational::one() / norm));
            v = &v - &u.scale(&c);
        }
        let norm = sphere_inner(&v, &v).re;
        if norm.is_zero() {
            return Err(Error::LinearDependence(i));
        }
        ortho.push((v, norm, w));
    }
    let elements = ortho
        .into_iter()
        .map(|(poly, norm, _)| HarmonicElement { poly, scale_sq: BigRational::one() / norm })
        .collect();
    Ok(HarmonicBasis { n: basis.n, p: basis.p, q: basis.q, elements, orthonormal: true })
}

/// Sphere-orthonormal basis of `H_{p,q}`.
pub fn orthonormal_basis(n: usize, p: u32, q: u32) -> HarmonicBasis {
    orthonormalize_on_sphere(&harmonic_space_basis(n, p, q)).expect("kernel basis is independent")
}

/// Layers `(k, P_k)` with `P_k ∈ H_{p-k,q-k}`, zero layers omitted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarmonicDecomposition {
    pub n: usize,
    pub p: u32,
    pub q: u32,
    pub layers: Vec<(u32, BigradedPolynomial)>,
}

impl HarmonicDecomposition {
    pub fn layer(&self, k: u32) -> BigradedPolynomial {
        self.layers
            .iter()
            .find(|(j, _)| *j == k)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(|| BigradedPolynomial::zero(self.n))
    }

    /// `Σ |z|^{2k} P_k`.
    pub fn reconstruct(&self) -> BigradedPolynomial {
        let mut acc = BigradedPolynomial::zero(self.n);
        for (k, pk) in &self.layers {
            acc = &acc + &(&norm_sq_power(self.n, *k) * pk);
        }
        acc
    }
}

pub fn norm_sq_power(n: usize, k: u32) -> BigradedPolynomial {
    let r2 = BigradedPolynomial::norm_sq(n);
    (0..k).fold(BigradedPolynomial::one(n), |acc, _| &acc * &r2)
}

// Index k of the returned vector holds P_k.
fn decompose_layers(poly: &BigradedPolynomial, p: u32, q: u32) -> Vec<BigradedPolynomial> {
    let n = poly.n();
    if poly.is_zero() {
        return Vec::new();
    }
    if p == 0 || q == 0 {
        return vec![poly.clone()];
    }
    // Δ(|z|^{2k} H) = 4k(n + a + b + k − 1)|z|^{2k−2} H for H ∈ H_{a,b}; peel via ΔP.
    let lower = decompose_layers(&poly.laplacian(), p - 1, q - 1);
    let mut layers = vec![BigradedPolynomial::zero(n)];
    for (idx, qk) in lower.iter().enumerate() {
        let k = idx as i64 + 1;
        let denom = 4 * k * (n as i64 + p as i64 + q as i64 - k - 1);
        layers.push(qk.scale_rational(&BigRational::new(BigInt::one(), BigInt::from(denom))));
    }
    let mut p0 = poly.clone();
    for (k, pk) in layers.iter().enumerate().skip(1) {
        if !pk.is_zero() {
            p0 = &p0 - &(&norm_sq_power(n, k as u32) * pk);
        }
    }
    layers[0] = p0;
    layers
}

pub fn harmonic_decompose(poly: &BigradedPolynomial) -> Result<HarmonicDecomposition> {
    let (p, q) = match poly.bidegree() {
        Bidegree::Homogeneous(p, q) => (p, q),
        Bidegree::Inhomogeneous => return Err(Error::NotHomogeneous),
    };
    let layers = decompose_layers(poly, p, q)
        .into_iter()
        .enumerate()
        .filter(|(_, l)| !l.is_zero())
        .map(|(k, l)| (k as u32, l))
        .collect();
    Ok(HarmonicDecomposition { n: poly.n(), p, q, layers })
}

/// `ν(p, q, l, m) = min(p, m) + min(l, q)`.
pub fn product_nu(p: u32, q: u32, l: u32, m: u32) -> u32 {
    p.min(m) + l.min(q)
}

fn harmonic_bidegree(poly: &BigradedPolynomial) -> Result<(u32, u32)> {
    match poly.bidegree() {
        Bidegree::Homogeneous(p, q) if poly.is_harmonic() => Ok((p, q)),
        Bidegree::Homogeneous(..) => Err(Error::NotHarmonic),
        Bidegree::Inhomogeneous => Err(Error::NotHomogeneous),
    }
}

/// Bidegrees carrying a nonzero harmonic component of `P·Q`.
pub fn product_components(p_poly: &BigradedPolynomial, q_poly: &BigradedPolynomial) -> Result<BTreeSet<(u32, u32)>> {
    harmonic_bidegree(p_poly)?;
    harmonic_bidegree(q_poly)?;
    let prod = p_poly.try_mul(q_poly)?;
    let dec = harmonic_decompose(&prod)?;
    Ok(dec.layers.iter().map(|(k, _)| (dec.p - k, dec.q - k)).collect())
}
