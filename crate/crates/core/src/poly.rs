//! Homogeneous polynomials in `S = 𝕂[x₁,…,x_ℓ]`.
//!
//! A degree-`d` polynomial is a sparse vector over the monomial basis of
//! `S_d`, ordered lexicographically with `x₁^d` first.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use crate::field::{signum, FieldSpec, Scalar};
use crate::linalg::SparseVec;

pub type Exponent = Vec<u16>;

/// The monomials of degree `d` in `ℓ` variables.
#[derive(Debug)]
pub struct MonomialBasis {
    ell: usize,
    degree: usize,
    monomials: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
}

fn enumerate(ell: usize, d: usize, prefix: &mut Exponent, out: &mut Vec<Exponent>) {
    if prefix.len() + 1 == ell {
        prefix.push(d as u16);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for e in (0..=d).rev() {
        prefix.push(e as u16);
        enumerate(ell, d - e, prefix, out);
        prefix.pop();
    }
}

impl MonomialBasis {
    fn build(ell: usize, degree: usize) -> Self {
        let mut monomials = Vec::new();
        enumerate(ell, degree, &mut Vec::with_capacity(ell), &mut monomials);
        let index = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Self { ell, degree, monomials, index }
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Exponent] {
        &self.monomials
    }

    pub fn monomial(&self, i: usize) -> &Exponent {
        &self.monomials[i]
    }

    pub fn index_of(&self, m: &[u16]) -> usize {
        self.index[m]
    }
}

/// Shared monomial basis of `S_d` in `ℓ` variables.
pub fn monomials(ell: usize, degree: usize) -> Arc<MonomialBasis> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, usize), Arc<MonomialBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(b) = cache.read().expect("monomial cache").get(&(ell, degree)) {
        return b.clone();
    }
    let built = Arc::new(MonomialBasis::build(ell, degree));
    cache.write().expect("monomial cache").entry((ell, degree)).or_insert(built).clone()
}

/// `dim S_d = C(d+ℓ−1, ℓ−1)`, zero for negative `d`.
pub fn dim_s(ell: usize, d: i64) -> usize {
    if d < 0 {
        return 0;
    }
    binomial(d as u64 + ell as u64 - 1, ell as u64 - 1) as usize
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// A homogeneous polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    field: FieldSpec,
    ell: usize,
    degree: usize,
    coeffs: SparseVec,
}

impl Poly {
    pub fn zero(field: FieldSpec, ell: usize, degree: usize) -> Self {
        Self { field, ell, degree, coeffs: SparseVec::new() }
    }

    pub fn constant(field: FieldSpec, ell: usize, c: Scalar) -> Self {
        let coeffs = if c.is_zero() { SparseVec::new() } else { SparseVec::from_pairs(vec![(0, c)]) };
        Self { field, ell, degree: 0, coeffs }
    }

    pub fn one(field: FieldSpec, ell: usize) -> Self {
        Self::constant(field, ell, field.one())
    }

    pub fn from_coeffs(field: FieldSpec, ell: usize, degree: usize, coeffs: SparseVec) -> Self {
        Self { field, ell, degree, coeffs }
    }

    /// The linear form `Σ cᵢ xᵢ`.
    pub fn linear(field: FieldSpec, normal: &[Scalar]) -> Self {
        let ell = normal.len();
        let basis = monomials(ell, 1);
        let mut pairs = Vec::new();
        for (i, c) in normal.iter().enumerate() {
            let mut e = vec![0u16; ell];
            e[i] = 1;
            pairs.push((basis.index_of(&e), c.clone()));
        }
        Self { field, ell, degree: 1, coeffs: SparseVec::from_pairs(pairs) }
    }

    pub fn variable(field: FieldSpec, ell: usize, i: usize) -> Self {
        let mut normal = vec![field.zero(); ell];
        normal[i] = field.one();
        Self::linear(field, &normal)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &SparseVec {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Terms as `(exponent, coefficient)` pairs in basis order.
    pub fn terms(&self) -> Vec<(Exponent, Scalar)> {
        let basis = monomials(self.ell, self.degree);
        self.coeffs.entries().iter().map(|(i, c)| (basis.monomial(*i).clone(), c.clone())).collect()
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        Self { coeffs: self.coeffs.scale(c), ..self.clone() }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.degree, other.degree, "adding polynomials of different degrees");
        let mut coeffs = self.coeffs.clone();
        coeffs.axpy(&self.field.one(), &other.coeffs);
        Self { coeffs, ..self.clone() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let degree = self.degree + other.degree;
        let (a, b, c) = (monomials(self.ell, self.degree), monomials(self.ell, other.degree), monomials(self.ell, degree));
        let mut pairs = Vec::with_capacity(self.coeffs.nnz() * other.coeffs.nnz());
        let mut buf = vec![0u16; self.ell];
        for (i, x) in self.coeffs.entries() {
            let mi = a.monomial(*i);
            for (j, y) in other.coeffs.entries() {
                let mj = b.monomial(*j);
                for k in 0..self.ell {
                    buf[k] = mi[k] + mj[k];
                }
                pairs.push((c.index_of(&buf), x * y));
            }
        }
        Self { field: self.field, ell: self.ell, degree, coeffs: SparseVec::from_pairs(pairs) }
    }

    pub fn pow(&self, k: usize) -> Poly {
        let mut acc = Poly::one(self.field, self.ell);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiplies a coefficient vector over `S_d` by this polynomial.
    pub fn mul_vector(&self, v: &SparseVec, d: usize) -> SparseVec {
        Poly::from_coeffs(self.field, self.ell, d, v.clone()).mul(self).coeffs
    }

    /// Value at a point.
    pub fn evaluate(&self, point: &[Scalar]) -> Scalar {
        let mut acc = self.field.zero();
        for (e, c) in self.terms() {
            let mut term = c;
            for (x, k) in point.iter().zip(&e) {
                term = &term * &x.pow(*k as u32);
            }
            acc = &acc + &term;
        }
        acc
    }
}

/// Multiplies each coordinate block of a vector over `S_d^blocks` by `g`.
pub fn mul_blocks(g: &Poly, v: &SparseVec, blocks: usize, d: usize) -> SparseVec {
    let ell = g.ell();
    let (src, dst) = (dim_s(ell, d as i64), dim_s(ell, (d + g.degree()) as i64));
    let mut out = Vec::new();
    for i in 0..blocks {
        let block = SparseVec::from_pairs(
            v.entries().iter().filter(|(k, _)| k / src == i).map(|(k, c)| (k % src, c.clone())).collect(),
        );
        if block.is_empty() {
            continue;
        }
        out.extend(g.mul_vector(&block, d).into_entries().into_iter().map(|(k, c)| (i * dst + k, c)));
    }
    SparseVec::from_pairs(out)
}

/// Reduction modulo a linear form `α` by eliminating its pivot variable.
///
/// Returns, for each monomial of `S_d`, the coefficient vector (over `S_d`)
/// of its normal form, which never involves the pivot variable.
pub fn reduction_images(field: FieldSpec, alpha: &[Scalar], d: usize) -> Vec<SparseVec> {
    let ell = alpha.len();
    let p = alpha.iter().position(|c| !c.is_zero()).expect("nonzero linear form");
    let inv = alpha[p].inv();
    // x_p ≡ −(1/a_p) Σ_{i≠p} a_i x_i
    let mut sub = alpha.to_vec();
    sub[p] = field.zero();
    let sub = Poly::linear(field, &sub.iter().map(|c| -&(c * &inv)).collect::<Vec<_>>());
    let mut powers = vec![Poly::one(field, ell)];
    for k in 1..=d {
        powers.push(powers[k - 1].mul(&sub));
    }
    let basis = monomials(ell, d);
    basis
        .monomials()
        .iter()
        .map(|m| {
            let k = m[p] as usize;
            let mut rest = m.clone();
            rest[p] = 0;
            let rest = monomials(ell, d - k).index_of(&rest);
            let mono = Poly::from_coeffs(field, ell, d - k, SparseVec::unit(rest, field));
            mono.mul(&powers[k]).coeffs
        })
        .collect()
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in terms.into_iter().enumerate() {
            let negative = signum(&c) < 0;
            let c = if negative { &self.field.zero() - &c } else { c };
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mono = format_monomial(&e);
            match (c.is_one(), mono.as_str()) {
                (true, _) => write!(f, "{mono}")?,
                (false, "1") => write!(f, "{c}")?,
                (false, _) => write!(f, "{c}*{mono}")?,
            }
        }
        Ok(())
    }
}

/// Human-readable monomial such as `x1^2*x3`.
pub fn format_monomial(e: &[u16]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, k)| **k > 0)
        .map(|(i, k)| if *k == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, k) })
        .collect();
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: FieldSpec = FieldSpec::Rationals;

    #[test]
    fn display() {
        let x = Poly::variable(Q, 2, 0);
        let y = Poly::variable(Q, 2, 1);
        let p = x.mul(&x).add(&y.mul(&x).scale(&Q.from_i64(-3)));
        assert_eq!(p.to_string(), "x1^2 - 3*x1*x2");
        assert_eq!(Poly::zero(Q, 2, 1).to_string(), "0");
        assert_eq!(Poly::constant(Q, 2, Q.from_i64(-2)).to_string(), "-2");
    }

    #[test]
    fn basis_sizes_and_order() {
        let b = monomials(3, 2);
        assert_eq!(b.len(), 6);
        assert_eq!(b.monomial(0), &vec![2, 0, 0]);
        assert_eq!(b.monomial(5), &vec![0, 0, 2]);
        assert_eq!(dim_s(4, 10), 286);
        assert_eq!(dim_s(3, -1), 0);
        for (i, m) in b.monomials().iter().enumerate() {
            assert_eq!(b.index_of(m), i);
        }
    }

    #[test]
    fn products_expand() {
        let x = Poly::variable(Q, 2, 0);
        let y = Poly::variable(Q, 2, 1);
        let s = x.add(&y);
        let sq = s.pow(2);
        let terms: Vec<i64> = sq.terms().iter().map(|(_, c)| c.to_i64().unwrap()).collect();
        assert_eq!(terms, vec![1, 2, 1]);
        let pt = [Q.from_i64(2), Q.from_i64(3)];
        assert_eq!(sq.evaluate(&pt), Q.from_i64(25));
    }

    #[test]
    fn reduction_kills_alpha_multiples() {
        let alpha = vec![Q.from_i64(0), Q.from_i64(2), Q.from_i64(-1)];
        let a = Poly::linear(Q, &alpha);
        let g = Poly::linear(Q, &[Q.from_i64(1), Q.from_i64(1), Q.from_i64(3)]);
        let prod = a.mul(&g);
        let images = reduction_images(Q, &alpha, 2);
        let mut acc = SparseVec::new();
        for (i, c) in prod.coeffs().entries() {
            acc.axpy(c, &images[*i]);
        }
        assert!(acc.is_empty());
        // x2 never survives
        let b = monomials(3, 2);
        for img in &images {
            for (i, _) in img.entries() {
                assert_eq!(b.monomial(*i)[1], 0);
            }
        }
    }

    #[test]
    fn block_multiplication() {
        let x = Poly::variable(Q, 2, 0);
        // (1, 1) in S_0^2 times x is (x, x)
        let v = SparseVec::from_pairs(vec![(0, Q.one()), (1, Q.one())]);
        let w = mul_blocks(&x, &v, 2, 0);
        assert_eq!(w, SparseVec::from_pairs(vec![(0, Q.one()), (2, Q.one())]));
        assert_eq!(format_monomial(&[2, 0, 1]), "x1^2*x3");
    }
}
