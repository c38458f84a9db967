//! Graded pieces of the derivation modules `D(A_X)`.
//!
//! A derivation `θ = Σ fᵢ ∂/∂xᵢ` with every `fᵢ ∈ S_d` is stored as a vector
//! of length `ℓ·dim S_d`; entry `i·dim S_d + j` is the coefficient of monomial
//! `j` in `fᵢ`. The degree of `θ` is the degree of its coefficients, so the
//! Euler derivation has degree one.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::arrangement::{Arrangement, FormProduct};
use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::lattice::IntersectionLattice;
use crate::linalg::{EchelonBasis, ExactMatrix, SparseVec, Subspace};
use crate::poly::{binomial, dim_s, monomials, mul_blocks, reduction_images, Poly};

/// `D(A_X)_d` as a subspace of `S_d^ℓ`.
#[derive(Clone, Debug)]
pub struct DerivationSpace {
    pub members: Vec<usize>,
    pub degree: i64,
    pub space: Arc<Subspace>,
}

impl DerivationSpace {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Basis derivations as the columns of a matrix.
    pub fn basis(&self) -> ExactMatrix {
        self.space.basis_matrix()
    }
}

/// Sorted exponents `e₁ ≤ … ≤ e_ℓ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExponentMultiset(pub Vec<usize>);

impl ExponentMultiset {
    pub fn new(mut exps: Vec<usize>) -> Self {
        exps.sort_unstable();
        Self(exps)
    }

    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }

    /// `dim` of the degree-`d` piece of `⊕ S(−eᵢ)`.
    pub fn hilbert_function(&self, ell: usize, d: i64) -> usize {
        self.0.iter().map(|&e| dim_s(ell, d - e as i64)).sum()
    }
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub degree: usize,
    pub derivation: SparseVec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum FreenessCertificate {
    Free { exponents: ExponentMultiset },
    NotFree { generator_degrees: Vec<usize>, reason: String },
    Undetermined { scanned_up_to: usize, generator_degrees: Vec<usize> },
}

impl FreenessCertificate {
    pub fn is_free(&self) -> bool {
        matches!(self, FreenessCertificate::Free { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaitoOutcome {
    pub accepted: bool,
    /// `c` with `det = c·Q(A)`, when such a `c` exists.
    pub scalar: Option<Scalar>,
}

type SpaceKey = (Vec<usize>, i64);

/// Derivation spaces of one arrangement, memoized by `(A_X, d)`.
#[derive(Debug)]
pub struct Derivations {
    arrangement: Arrangement,
    spaces: RwLock<HashMap<SpaceKey, Arc<Subspace>>>,
    reductions: RwLock<HashMap<(usize, usize), Arc<Vec<SparseVec>>>>,
}

impl Derivations {
    pub fn new(arrangement: &Arrangement) -> Self {
        Self { arrangement: arrangement.clone(), spaces: RwLock::default(), reductions: RwLock::default() }
    }

    pub fn arrangement(&self) -> &Arrangement {
        &self.arrangement
    }

    pub fn field(&self) -> FieldSpec {
        self.arrangement.field()
    }

    pub fn ell(&self) -> usize {
        self.arrangement.ell()
    }

    /// Length of a derivation vector in degree `d`.
    pub fn ambient(&self, d: i64) -> usize {
        self.ell() * dim_s(self.ell(), d)
    }

    fn reduction(&self, h: usize, d: usize) -> Arc<Vec<SparseVec>> {
        if let Some(r) = self.reductions.read().expect("reduction cache").get(&(h, d)) {
            return r.clone();
        }
        let r = Arc::new(reduction_images(self.field(), self.arrangement.hyperplane(h).normal(), d));
        self.reductions.write().expect("reduction cache").entry((h, d)).or_insert(r).clone()
    }

    /// `{θ ∈ S_d^ℓ : θ(α_H) ∈ α_H S for H ∈ members}`.
    pub fn space(&self, members: &[usize], d: i64) -> Arc<Subspace> {
        let key = (members.to_vec(), d);
        if let Some(s) = self.spaces.read().expect("derivation cache").get(&key) {
            return s.clone();
        }
        let s = Arc::new(self.compute(members, d));
        self.spaces.write().expect("derivation cache").entry(key).or_insert(s).clone()
    }

    fn compute(&self, members: &[usize], d: i64) -> Subspace {
        let (field, ell) = (self.field(), self.ell());
        if d < 0 {
            return Subspace::zero(field, 0);
        }
        let du = d as usize;
        let n = dim_s(ell, d);
        let ambient = ell * n;
        let mut rows: Vec<Vec<(usize, Scalar)>> = Vec::new();
        for &h in members {
            let images = self.reduction(h, du);
            let normal = self.arrangement.hyperplane(h).normal();
            // row r of this block collects the coefficient of output monomial r
            let mut block: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); n];
            for (i, a) in normal.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, img) in images.iter().enumerate() {
                    for (r, c) in img.entries() {
                        block[*r].push((i * n + j, a * c));
                    }
                }
            }
            rows.extend(block.into_iter().filter(|r| !r.is_empty()));
        }
        Subspace::kernel(field, ambient, rows.into_iter().map(SparseVec::from_pairs))
    }

    pub fn derivation_space(&self, lattice: &IntersectionLattice, x: usize, d: i64) -> Result<DerivationSpace> {
        lattice.check(x)?;
        let members = lattice.members(x).to_vec();
        let space = self.space(&members, d);
        Ok(DerivationSpace { members, degree: d, space })
    }

    /// Coordinates of `D(A_Y)_d` inside `D(A_X)_d` for `Y ⊆ X`.
    pub fn inclusion_matrix(&self, lattice: &IntersectionLattice, y: usize, x: usize, d: i64) -> Result<ExactMatrix> {
        lattice.check(y)?;
        lattice.check(x)?;
        if !lattice.is_subflat(y, x) {
            return Err(Error::InvalidParameters(format!("flat {y} is not contained in flat {x}")));
        }
        let (sy, sx) = (self.space(lattice.members(y), d), self.space(lattice.members(x), d));
        sy.inclusion_into(&sx).map_err(|e| Error::Consistency(format!("inclusion D(A_{y}) ⊆ D(A_{x}) failed: {e}")))
    }

    /// The Euler derivation `Σ xᵢ ∂/∂xᵢ` in degree one.
    pub fn euler(&self) -> SparseVec {
        let ell = self.ell();
        let basis = monomials(ell, 1);
        SparseVec::from_pairs(
            (0..ell)
                .map(|i| {
                    let mut e = vec![0u16; ell];
                    e[i] = 1;
                    (i * ell + basis.index_of(&e), self.field().one())
                })
                .collect(),
        )
    }

    /// Coefficient polynomials `(f₁,…,f_ℓ)` of a degree-`d` derivation.
    pub fn coefficients(&self, v: &SparseVec, d: usize) -> Vec<Poly> {
        let (ell, n) = (self.ell(), dim_s(self.ell(), d as i64));
        (0..ell)
            .map(|i| {
                let block = SparseVec::from_pairs(
                    v.entries().iter().filter(|(k, _)| k / n == i).map(|(k, c)| (k % n, c.clone())).collect(),
                );
                Poly::from_coeffs(self.field(), ell, d, block)
            })
            .collect()
    }

    /// `S₁·D(A)_{d−1}` inside `S_d^ℓ`.
    pub fn products_from_below(&self, d: usize) -> Subspace {
        let (field, ell) = (self.field(), self.ell());
        let all: Vec<usize> = (0..self.arrangement.len()).collect();
        if d == 0 {
            return Subspace::zero(field, self.ambient(0));
        }
        let below = self.space(&all, d as i64 - 1);
        let vars: Vec<Poly> = (0..ell).map(|i| Poly::variable(field, ell, i)).collect();
        Subspace::span(
            field,
            self.ambient(d as i64),
            below.basis().iter().flat_map(|b| vars.iter().map(move |x| mul_blocks(x, b, ell, d - 1))),
        )
    }

    /// Derivations completing `S₁·D(A)_{d−1}` to `D(A)_d`, for each `d ≤ up_to`.
    pub fn minimal_generators(&self, up_to: usize) -> Vec<Generator> {
        let mut out = Vec::new();
        for d in 0..=up_to {
            out.extend(self.generators_in_degree(d));
        }
        out
    }

    fn generators_in_degree(&self, d: usize) -> Vec<Generator> {
        let all: Vec<usize> = (0..self.arrangement.len()).collect();
        let image = self.products_from_below(d);
        let mut basis = EchelonBasis::new(self.field());
        for b in image.basis() {
            basis.insert(b.clone());
        }
        let mut out = Vec::new();
        for v in self.space(&all, d as i64).basis() {
            if basis.insert(v.clone()) {
                out.push(Generator { degree: d, derivation: v.clone() });
            }
        }
        out
    }

    /// Saito's criterion: `det(θ_j(xᵢ)) = c·Q(A)` with `c ≠ 0`, checked symbolically.
    pub fn saito_check(&self, candidates: &[Generator]) -> Result<SaitoOutcome> {
        let ell = self.ell();
        if candidates.len() != ell {
            return Err(Error::InvalidParameters(format!("Saito's criterion needs {ell} derivations, got {}", candidates.len())));
        }
        let total: usize = candidates.iter().map(|g| g.degree).sum();
        if total != self.arrangement.len() {
            return Err(Error::InvalidParameters(format!(
                "degree sum {total} differs from the number of hyperplanes {}",
                self.arrangement.len()
            )));
        }
        let columns: Vec<Vec<Poly>> = candidates.iter().map(|g| self.coefficients(&g.derivation, g.degree)).collect();
        let det = determinant(self.field(), ell, total, &columns);
        let q = form_polynomial(&self.arrangement, &self.arrangement.defining_form());
        let scalar = match (det.coeffs().leading(), q.coeffs().leading()) {
            (Some((i, c)), Some((j, qc))) if i == j => Some(c.div(qc)),
            _ => None,
        };
        let accepted = match &scalar {
            Some(c) => det == q.scale(c),
            None => false,
        };
        Ok(SaitoOutcome { accepted, scalar: if accepted { scalar } else { None } })
    }

    pub fn freeness_certificate(&self) -> FreenessCertificate {
        self.freeness_certificate_up_to(self.arrangement.len())
    }

    /// Scans generator degrees up to `bound`; a bound of `|A|` always decides.
    pub fn freeness_certificate_up_to(&self, bound: usize) -> FreenessCertificate {
        let ell = self.ell();
        let n = self.arrangement.len();
        let mut gens: Vec<Generator> = Vec::new();
        for d in 0..=bound {
            gens.extend(self.generators_in_degree(d));
            if gens.len() > ell {
                return FreenessCertificate::NotFree {
                    generator_degrees: gens.iter().map(|g| g.degree).collect(),
                    reason: format!("more than {ell} minimal generators by degree {d}"),
                };
            }
        }
        let degrees: Vec<usize> = gens.iter().map(|g| g.degree).collect();
        let sum: usize = degrees.iter().sum();
        if bound < n {
            return FreenessCertificate::Undetermined { scanned_up_to: bound, generator_degrees: degrees };
        }
        if gens.len() < ell || sum != n {
            return FreenessCertificate::NotFree {
                generator_degrees: degrees,
                reason: format!("generators up to degree {n} do not form {ell} derivations of degree sum {n}"),
            };
        }
        match self.saito_check(&gens) {
            Ok(o) if o.accepted => FreenessCertificate::Free { exponents: ExponentMultiset::new(degrees) },
            _ => FreenessCertificate::NotFree { generator_degrees: degrees, reason: "Saito determinant is not a multiple of Q(A)".into() },
        }
    }
}

/// The product of the listed linear forms, expanded.
pub fn form_polynomial(a: &Arrangement, f: &FormProduct) -> Poly {
    f.factors()
        .iter()
        .fold(Poly::one(a.field(), a.ell()), |acc, &h| acc.mul(&Poly::linear(a.field(), a.hyperplane(h).normal())))
}

/// Leibniz expansion of `det(columns[j][i])`; the result has the given degree.
fn determinant(field: FieldSpec, ell: usize, degree: usize, columns: &[Vec<Poly>]) -> Poly {
    let mut acc = Poly::zero(field, ell, degree);
    for (perm, sign) in permutations(ell) {
        let mut term = Poly::one(field, ell);
        for (j, &i) in perm.iter().enumerate() {
            term = term.mul(&columns[j][i]);
            if term.is_zero() {
                break;
            }
        }
        if term.is_zero() {
            continue;
        }
        let term = if sign < 0 { term.scale(&field.from_i64(-1)) } else { term };
        acc = acc.add(&term);
    }
    acc
}

fn permutations(n: usize) -> Vec<(Vec<usize>, i32)> {
    if n == 0 {
        return vec![(Vec::new(), 1)];
    }
    let mut out = Vec::new();
    for (p, s) in permutations(n - 1) {
        // insert n−1 at every position; moving it left past k entries flips sign k times
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            let flips = (p.len() - pos) as i32;
            out.push((q, if flips % 2 == 0 { s } else { -s }));
        }
    }
    out
}

/// `Σᵢ C(d − eᵢ + ℓ − 1, ℓ − 1)`.
pub fn free_hilbert_function(ell: usize, exponents: &[usize], d: i64) -> u64 {
    exponents
        .iter()
        .map(|&e| if d < e as i64 { 0 } else { binomial((d - e as i64) as u64 + ell as u64 - 1, ell as u64 - 1) })
        .sum()
}
