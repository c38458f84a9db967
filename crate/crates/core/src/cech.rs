//! Čech cohomology of sheaves on `L₀` with graded coefficients.
//!
//! Every section space of a sheaf here is a subspace of one ambient vector
//! space per degree, and every restriction map is an inclusion. A cover of
//! `m` opens is described by a [`CechSystem`]: the sections over the
//! intersection of the opens in a tuple, as a subspace of the ambient.
//!
//! Two engines compute the same numbers. [`Engine::Direct`] assembles the
//! alternating Čech complex literally. [`Engine::Quotient`] uses the short
//! exact sequence `0 → F → W → W/F → 0`, where `W` is the largest section
//! space, regarded as a constant sheaf. Its Čech complex is acyclic on any
//! cover, so `H⁰(F) = ker(W → ⊕ W/F(Uᵢ))`,
//! `dim H¹(F) = dim H⁰(W/F) − dim W + dim H⁰(F)` and
//! `Hⁿ(F) = Hⁿ⁻¹(W/F)` for `n ≥ 2`. Tuples with `F = W` drop out of the
//! quotient complex, which keeps large covers tractable.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrangement::Arrangement;
use crate::derivations::Derivations;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::lattice::IntersectionLattice;
use crate::linalg::{rank_of, ExactMatrix, SparseVec, Subspace};
use crate::poly::Poly;
use crate::truncation::{first_level, truncated_section, PolynomialRing};

pub const DEFAULT_TUPLE_CAP: usize = 2_000_000;
pub const DEFAULT_K_MAX: usize = 8;

/// Sections over the intersection of the opens in a strictly increasing tuple.
pub type SectionFn<'a> = dyn Fn(&[usize]) -> Result<Arc<Subspace>> + Sync + 'a;

pub struct CechSystem<'a> {
    pub field: FieldSpec,
    /// Number of opens in the cover.
    pub size: usize,
    pub sections: &'a SectionFn<'a>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Direct,
    Quotient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverKind {
    /// Principal opens of the one-dimensional flats.
    Minimal,
    /// Principal opens of every element of `L₀`.
    Full,
}

fn binomial_sum(m: usize, max_size: usize) -> usize {
    let mut total = 0usize;
    let mut c = 1usize;
    for k in 1..=max_size.min(m) {
        c = c.saturating_mul(m + 1 - k) / k;
        total = total.saturating_add(c);
    }
    total
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

fn insert_sorted(tuple: &[usize], j: usize) -> (Vec<usize>, usize) {
    let pos = tuple.partition_point(|&i| i < j);
    let mut t = tuple.to_vec();
    t.insert(pos, j);
    (t, pos)
}

/// The literal alternating Čech complex in one degree.
#[derive(Clone, Debug)]
pub struct CechComplex {
    field: FieldSpec,
    tuples: Vec<Vec<Vec<usize>>>,
    term_dims: Vec<Vec<usize>>,
    /// Columns of `δⁿ : Cⁿ → Cⁿ⁺¹`.
    coboundaries: Vec<Vec<SparseVec>>,
    /// Highest level whose cohomology is determined by the stored maps.
    top_level: usize,
}

impl CechComplex {
    /// Builds levels `0..=top_level + 1` (fewer if the cover is small).
    pub fn build(system: &CechSystem<'_>, top_level: usize, cap: usize) -> Result<Self> {
        let m = system.size;
        let levels = (top_level + 2).min(m);
        let count = binomial_sum(m, levels);
        if count > cap {
            return Err(Error::CapExceeded(format!(
                "Čech complex needs {count} tuples (cap {cap}); use the minimal cover or the quotient engine"
            )));
        }
        let mut tuples = Vec::new();
        let mut spaces: Vec<Vec<Arc<Subspace>>> = Vec::new();
        for n in 0..levels {
            let ts = combinations(m, n + 1);
            let ss = ts.iter().map(|t| (system.sections)(t)).collect::<Result<Vec<_>>>()?;
            tuples.push(ts);
            spaces.push(ss);
        }
        let term_dims: Vec<Vec<usize>> = spaces.iter().map(|l| l.iter().map(|s| s.dim()).collect()).collect();
        let mut coboundaries = Vec::new();
        for n in 0..levels.saturating_sub(1) {
            let index: HashMap<&[usize], usize> =
                tuples[n + 1].iter().enumerate().map(|(i, t)| (t.as_slice(), i)).collect();
            let offsets = prefix_offsets(&term_dims[n + 1]);
            let cols: Vec<Vec<SparseVec>> = tuples[n]
                .par_iter()
                .zip(spaces[n].par_iter())
                .map(|(sigma, s)| {
                    s.basis()
                        .iter()
                        .map(|b| {
                            let mut pairs = Vec::new();
                            for j in (0..m).filter(|j| !sigma.contains(j)) {
                                let (tau, k) = insert_sorted(sigma, j);
                                let t = index[tau.as_slice()];
                                let coords = spaces[n + 1][t].coordinates(b).map_err(|e| {
                                    Error::Consistency(format!("restriction {sigma:?} → {tau:?} is not an inclusion: {e}"))
                                })?;
                                let sign = if k % 2 == 0 { system.field.one() } else { system.field.from_i64(-1) };
                                pairs.extend(coords.into_entries().into_iter().map(|(i, c)| (offsets[t] + i, &c * &sign)));
                            }
                            Ok(SparseVec::from_pairs(pairs))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            coboundaries.push(cols.into_iter().flatten().collect());
        }
        Ok(Self { field: system.field, tuples, term_dims, coboundaries, top_level: top_level.min(levels.saturating_sub(1)) })
    }

    pub fn levels(&self) -> usize {
        self.tuples.len()
    }

    pub fn tuples(&self, n: usize) -> &[Vec<usize>] {
        &self.tuples[n]
    }

    pub fn term_dims(&self, n: usize) -> &[usize] {
        &self.term_dims[n]
    }

    pub fn dim(&self, n: usize) -> usize {
        self.term_dims.get(n).map(|l| l.iter().sum()).unwrap_or(0)
    }

    /// `δⁿ` as a `dim Cⁿ⁺¹ × dim Cⁿ` matrix.
    pub fn coboundary(&self, n: usize) -> ExactMatrix {
        match self.coboundaries.get(n) {
            Some(cols) => ExactMatrix::from_columns(self.field, self.dim(n + 1), cols),
            None => ExactMatrix::zeros(self.field, self.dim(n + 1), self.dim(n)),
        }
    }

    /// Checks `δⁿ⁺¹ ∘ δⁿ = 0` at every level.
    pub fn is_complex(&self) -> bool {
        (0..self.coboundaries.len().saturating_sub(1)).all(|n| {
            let next = &self.coboundaries[n + 1];
            self.coboundaries[n].iter().all(|col| {
                let mut acc = SparseVec::new();
                for (i, c) in col.entries() {
                    acc.axpy(c, &next[*i]);
                }
                acc.is_empty()
            })
        })
    }

    /// `dim Hⁿ = dim Cⁿ − rank δⁿ − rank δⁿ⁻¹` for `n ≤ top_level`.
    pub fn cohomology_dims(&self) -> Vec<usize> {
        let ranks: Vec<usize> =
            self.coboundaries.par_iter().map(|cols| rank_of(self.field, cols.iter().cloned())).collect();
        let rank = |n: usize| ranks.get(n).copied().unwrap_or(0);
        (0..=self.top_level).map(|n| self.dim(n) - rank(n) - if n > 0 { rank(n - 1) } else { 0 }).collect()
    }
}

fn prefix_offsets(dims: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(dims.len());
    let mut acc = 0;
    for d in dims {
        out.push(acc);
        acc += d;
    }
    out
}

/// `W/F(τ)` presented by the non-key columns of `F(τ)` in `W`-coordinates.
struct QuotientTerm {
    space: Subspace,
    nonkey_pos: Vec<u32>,
    key_row: Vec<u32>,
    dim: usize,
}

const NONE: u32 = u32::MAX;

impl QuotientTerm {
    fn new(space: Subspace, ambient: usize) -> Self {
        let mut key_row = vec![NONE; ambient];
        for (r, k) in space.keys().iter().enumerate() {
            key_row[*k] = r as u32;
        }
        let mut nonkey_pos = vec![NONE; ambient];
        let mut dim = 0;
        for c in 0..ambient {
            if key_row[c] == NONE {
                nonkey_pos[c] = dim as u32;
                dim += 1;
            }
        }
        Self { space, nonkey_pos, key_row, dim }
    }

    /// Class of the unit vector `e_c` in `W/F`, pushed into `out` with an offset and sign.
    fn project_unit(&self, c: usize, offset: usize, negate: bool, field: FieldSpec, out: &mut Vec<(usize, crate::field::Scalar)>) {
        let r = self.key_row[c];
        if r == NONE {
            let v = if negate { field.from_i64(-1) } else { field.one() };
            out.push((offset + self.nonkey_pos[c] as usize, v));
            return;
        }
        for (col, v) in self.space.basis()[r as usize].entries() {
            if *col == c {
                continue;
            }
            let v = if negate { v.clone() } else { -v };
            out.push((offset + self.nonkey_pos[*col] as usize, v));
        }
    }
}

/// Cohomology dimensions `H⁰..=H^{top_level}` through the quotient complex.
pub fn quotient_dims(system: &CechSystem<'_>, top_level: usize, cap: usize) -> Result<Vec<usize>> {
    let field = system.field;
    let m = system.size;
    let all: Vec<usize> = (0..m).collect();
    let w_raw = (system.sections)(&all)?;
    let w_dim = w_raw.dim();
    let identity = w_dim == w_raw.ambient();
    let to_w = |s: &Subspace| -> Result<Subspace> {
        if identity {
            return Ok(s.clone());
        }
        let coords = s
            .basis()
            .iter()
            .map(|b| w_raw.coordinates(b))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Consistency(format!("section space not contained in the largest one: {e}")))?;
        Ok(Subspace::span(field, w_dim, coords))
    };

    // tuples with F(τ) ≠ W form a simplicial complex; enumerate it level by level
    let mut levels: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut terms: Vec<Vec<QuotientTerm>> = Vec::new();
    let mut index: Vec<HashMap<Vec<usize>, usize>> = Vec::new();
    let mut count = 0usize;
    let mut frontier: Vec<Vec<usize>> = (0..m).map(|i| vec![i]).collect();
    while !frontier.is_empty() && levels.len() <= top_level {
        let mut lvl = Vec::new();
        let mut lvl_terms = Vec::new();
        for t in frontier {
            let s = (system.sections)(&t)?;
            if s.dim() == w_dim {
                continue;
            }
            count += 1;
            if count > cap {
                return Err(Error::CapExceeded(format!("quotient Čech complex exceeds {cap} tuples")));
            }
            lvl_terms.push(QuotientTerm::new(to_w(&s)?, w_dim));
            lvl.push(t);
        }
        let idx: HashMap<Vec<usize>, usize> = lvl.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        // extend only by indices above the last one, keeping faces nonfull
        let mut next = Vec::new();
        for t in &lvl {
            for j in (t[t.len() - 1] + 1)..m {
                let (tau, _) = insert_sorted(t, j);
                let faces_ok = (0..tau.len()).all(|k| {
                    let mut f = tau.clone();
                    f.remove(k);
                    idx.contains_key(&f)
                });
                if faces_ok {
                    next.push(tau);
                }
            }
        }
        levels.push(lvl);
        terms.push(lvl_terms);
        index.push(idx);
        frontier = next;
    }

    let level_dim = |n: usize| terms.get(n).map(|l| l.iter().map(|t| t.dim).sum::<usize>()).unwrap_or(0);

    // ε : W → C⁰(W/F)
    let eps_rank = {
        let offsets = prefix_offsets(&terms.first().map(|l| l.iter().map(|t| t.dim).collect::<Vec<_>>()).unwrap_or_default());
        let cols: Vec<SparseVec> = (0..w_dim)
            .into_par_iter()
            .map(|c| {
                let mut pairs = Vec::new();
                if let Some(l) = terms.first() {
                    for (i, t) in l.iter().enumerate() {
                        t.project_unit(c, offsets[i], false, field, &mut pairs);
                    }
                }
                SparseVec::from_pairs(pairs)
            })
            .collect();
        rank_of(field, cols)
    };
    let h0 = w_dim - eps_rank;

    // ranks of δⁿ on the quotient complex, n = 0..top_level−1
    let q_levels = top_level;
    let ranks: Vec<usize> = (0..q_levels)
        .into_par_iter()
        .map(|n| {
            let Some(src) = levels.get(n).filter(|_| n + 1 < levels.len()) else {
                return 0;
            };
            let dst_offsets = prefix_offsets(&terms[n + 1].iter().map(|t| t.dim).collect::<Vec<_>>());
            let mut cols = Vec::new();
            for (si, sigma) in src.iter().enumerate() {
                let term = &terms[n][si];
                let targets: Vec<(usize, bool)> = (0..m)
                    .filter(|j| !sigma.contains(j))
                    .filter_map(|j| {
                        let (tau, k) = insert_sorted(sigma, j);
                        index[n + 1].get(&tau).map(|&t| (t, k % 2 == 1))
                    })
                    .collect();
                if targets.is_empty() {
                    continue;
                }
                for c in (0..w_dim).filter(|&c| term.key_row[c] == NONE) {
                    let mut pairs = Vec::new();
                    for &(t, negate) in &targets {
                        terms[n + 1][t].project_unit(c, dst_offsets[t], negate, field, &mut pairs);
                    }
                    cols.push(SparseVec::from_pairs(pairs));
                }
            }
            rank_of(field, cols)
        })
        .collect();
    let rank = |n: usize| ranks.get(n).copied().unwrap_or(0);
    let hq = |n: usize| level_dim(n) - rank(n) - if n > 0 { rank(n - 1) } else { 0 };

    let mut out = vec![h0];
    if top_level >= 1 {
        let hq0 = if q_levels == 0 { 0 } else { hq(0) };
        out.push(hq0 + h0 - w_dim);
    }
    for n in 2..=top_level {
        out.push(hq(n - 1));
    }
    Ok(out)
}

/// Cohomology of a cover with either engine; `H⁰..=H^{top_level}`.
pub fn cech_dims(system: &CechSystem<'_>, top_level: usize, engine: Engine, cap: usize) -> Result<Vec<usize>> {
    match engine {
        Engine::Direct => {
            let mut dims = CechComplex::build(system, top_level, cap)?.cohomology_dims();
            dims.resize(top_level + 1, 0);
            Ok(dims)
        }
        Engine::Quotient => quotient_dims(system, top_level, cap),
    }
}

/// A covariant functor on `L₀`, with all section spaces in one ambient per degree.
pub trait CoefficientFunctor: Sync {
    fn label(&self) -> String;
    fn lattice(&self) -> &IntersectionLattice;
    /// Sections over the principal open `U_X`.
    fn section_space(&self, x: usize, d: i64) -> Result<Arc<Subspace>>;

    /// Matrix of the restriction `F(X) → F(Y)` for `X ⊆ Y`.
    fn restriction(&self, x: usize, y: usize, d: i64) -> Result<ExactMatrix> {
        let l = self.lattice();
        if !l.is_subflat(x, y) {
            return Err(Error::InvalidParameters(format!("flat {x} is not contained in flat {y}")));
        }
        let (fx, fy) = (self.section_space(x, d)?, self.section_space(y, d)?);
        fx.inclusion_into(&fy).map_err(|e| Error::Consistency(format!("restriction {x} → {y}: {e}")))
    }
}

/// `X ↦ D(A_X)`.
pub struct DerivationSheaf<'a> {
    pub lattice: &'a IntersectionLattice,
    pub derivations: &'a Derivations,
}

impl CoefficientFunctor for DerivationSheaf<'_> {
    fn label(&self) -> String {
        "D".into()
    }

    fn lattice(&self) -> &IntersectionLattice {
        self.lattice
    }

    fn section_space(&self, x: usize, d: i64) -> Result<Arc<Subspace>> {
        self.lattice.check(x)?;
        Ok(self.derivations.space(self.lattice.members(x), d))
    }
}

/// `X ↦ S_{Q(X)}`, truncated at denominator exponent `K`.
pub struct StructureSheaf<'a> {
    pub arrangement: &'a Arrangement,
    pub lattice: &'a IntersectionLattice,
    pub k: usize,
    powers: RwLock<HashMap<usize, Arc<Poly>>>,
    cache: RwLock<HashMap<(usize, i64), Arc<Subspace>>>,
}

impl<'a> StructureSheaf<'a> {
    pub fn new(arrangement: &'a Arrangement, lattice: &'a IntersectionLattice, k: usize) -> Self {
        Self { arrangement, lattice, k, powers: RwLock::default(), cache: RwLock::default() }
    }

    /// `(Q(A)/Q(X))^K = (∏_{H ∈ A_X} α_H)^K`.
    fn cofactor_power(&self, x: usize) -> Arc<Poly> {
        if let Some(p) = self.powers.read().expect("power cache").get(&x) {
            return p.clone();
        }
        let a = self.arrangement;
        let local = self
            .lattice
            .members(x)
            .iter()
            .fold(Poly::one(a.field(), a.ell()), |acc, &h| acc.mul(&Poly::linear(a.field(), a.hyperplane(h).normal())));
        let p = Arc::new(local.pow(self.k));
        self.powers.write().expect("power cache").entry(x).or_insert(p).clone()
    }
}

impl CoefficientFunctor for StructureSheaf<'_> {
    fn label(&self) -> String {
        format!("O[K={}]", self.k)
    }

    fn lattice(&self) -> &IntersectionLattice {
        self.lattice
    }

    fn section_space(&self, x: usize, d: i64) -> Result<Arc<Subspace>> {
        self.lattice.check(x)?;
        if let Some(s) = self.cache.read().expect("section cache").get(&(x, d)) {
            return Ok(s.clone());
        }
        let ring = PolynomialRing { field: self.arrangement.field(), ell: self.arrangement.ell() };
        let q_degree = self.arrangement.len() - self.lattice.members(x).len();
        let s = Arc::new(truncated_section(&ring, q_degree, &self.cofactor_power(x), self.k, d));
        Ok(self.cache.write().expect("section cache").entry((x, d)).or_insert(s).clone())
    }
}

/// Centers of a cover of `L₀` by principal opens, in the lattice's linear order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverIndex {
    pub kind: CoverKind,
    pub centers: Vec<usize>,
}

impl CoverIndex {
    pub fn new(lattice: &IntersectionLattice, kind: CoverKind) -> Self {
        let centers = match kind {
            CoverKind::Minimal => lattice.lines(),
            CoverKind::Full => lattice.l0(),
        };
        Self { kind, centers }
    }

    /// Every element of `L₀` lies in the principal open of some center.
    pub fn is_valid(&self, lattice: &IntersectionLattice) -> bool {
        lattice.l0().into_iter().all(|y| self.centers.iter().any(|&c| lattice.is_subflat(c, y)))
    }
}

/// The Čech complex of `F` on the given cover in degree `d`.
pub fn build_cech_complex(functor: &dyn CoefficientFunctor, cover: &CoverIndex, d: i64, top_level: usize, cap: usize) -> Result<CechComplex> {
    let lattice = functor.lattice();
    let sections = |t: &[usize]| {
        let xs: Vec<usize> = t.iter().map(|&i| cover.centers[i]).collect();
        functor.section_space(lattice.l0_join(&xs), d)
    };
    let system = CechSystem { field: lattice.field(), size: cover.centers.len(), sections: &sections };
    CechComplex::build(&system, top_level, cap)
}

/// `Hⁿ(L₀, F)_d` for `n = 0..=top_level`.
pub fn cover_cohomology(functor: &dyn CoefficientFunctor, cover: &CoverIndex, d: i64, top_level: usize, engine: Engine, cap: usize) -> Result<Vec<usize>> {
    let lattice = functor.lattice();
    let sections = |t: &[usize]| {
        let xs: Vec<usize> = t.iter().map(|&i| cover.centers[i]).collect();
        functor.section_space(lattice.l0_join(&xs), d)
    };
    let system = CechSystem { field: lattice.field(), size: cover.centers.len(), sections: &sections };
    cech_dims(&system, top_level, engine, cap)
}

/// Cohomology of `F` restricted to `U_X`, using every principal open inside it.
pub fn acyclicity_probe(functor: &dyn CoefficientFunctor, x: usize, d: i64, engine: Engine, cap: usize) -> Result<Vec<usize>> {
    let lattice = functor.lattice();
    lattice.check(x)?;
    if x == lattice.top() {
        return Err(Error::InvalidParameters("the top element is not in L₀".into()));
    }
    let centers: Vec<usize> = lattice.l0().into_iter().filter(|&y| lattice.is_subflat(x, y)).collect();
    let cover = CoverIndex { kind: CoverKind::Full, centers };
    let top = (cover.centers.len() - 1).min(lattice.ell());
    cover_cohomology(functor, &cover, d, top, engine, cap)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctorKind {
    #[serde(rename = "D")]
    Derivations,
    #[serde(rename = "O")]
    Structure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CechOptions {
    pub cover: CoverKind,
    pub engine: Engine,
    pub tuple_cap: usize,
    /// Largest truncation level for localized coefficients.
    pub k_max: usize,
}

impl Default for CechOptions {
    fn default() -> Self {
        Self { cover: CoverKind::Minimal, engine: Engine::Quotient, tuple_cap: DEFAULT_TUPLE_CAP, k_max: DEFAULT_K_MAX }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyEntry {
    pub n: usize,
    pub d: i64,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stable: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyTable {
    pub arrangement: String,
    pub field: String,
    pub ell: usize,
    pub functor: FunctorKind,
    pub window: [i64; 2],
    pub cover: CoverKind,
    pub engine: Engine,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    /// `n` ranges over `0..ℓ`.
    pub entries: Vec<CohomologyEntry>,
    /// Nonzero cells with `n ≥ ℓ`; empty whenever the computation is sound.
    pub beyond_top: Vec<CohomologyEntry>,
}

impl CohomologyTable {
    pub fn get(&self, n: usize, d: i64) -> Option<usize> {
        self.entries.iter().find(|e| e.n == n && e.d == d).map(|e| e.dim)
    }

    pub fn entry(&self, n: usize, d: i64) -> Option<&CohomologyEntry> {
        self.entries.iter().find(|e| e.n == n && e.d == d)
    }

    /// Nonzero cells with `0 < n < ℓ−1`.
    pub fn middle_nonzero(&self) -> Vec<&CohomologyEntry> {
        self.entries.iter().filter(|e| e.n > 0 && e.n + 1 < self.ell && e.dim > 0).collect()
    }
}

/// First level `K` per cell at which two consecutive truncations agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StableCell {
    pub dim: usize,
    pub level: usize,
    pub stable: bool,
}

/// Scans `K = k0, k0+1, …, k_max` and settles each cell at its first agreement.
///
/// A cell `n` only counts as agreeing when cells `n−1` and `n+1` agree too:
/// classes can move between neighbouring degrees while `n` alone looks still.
pub fn stabilize(k0: usize, k_max: usize, cells: usize, mut dims_at: impl FnMut(usize) -> Result<Vec<usize>>) -> Result<Vec<StableCell>> {
    let get = |v: &Vec<usize>, n: usize| v.get(n).copied().unwrap_or(0);
    let agree = |a: &Vec<usize>, b: &Vec<usize>, n: usize| (n.saturating_sub(1)..=n + 1).all(|m| m >= cells || get(a, m) == get(b, m));
    let mut prev = dims_at(k0)?;
    let mut out: Vec<Option<StableCell>> = vec![None; cells];
    let mut k = k0;
    while k < k_max && out.iter().any(Option::is_none) {
        let cur = dims_at(k + 1)?;
        for (n, slot) in out.iter_mut().enumerate() {
            if slot.is_none() && agree(&prev, &cur, n) {
                *slot = Some(StableCell { dim: get(&prev, n), level: k, stable: true });
            }
        }
        prev = cur;
        k += 1;
    }
    Ok(out
        .into_iter()
        .enumerate()
        .map(|(n, s)| s.unwrap_or(StableCell { dim: get(&prev, n), level: k, stable: false }))
        .collect())
}

/// `Hⁿ(L₀, F)_d` over a degree window, for `n = 0..ℓ`.
pub fn lattice_cohomology_table(
    arrangement: &Arrangement,
    lattice: &IntersectionLattice,
    derivations: &Derivations,
    functor: FunctorKind,
    window: (i64, i64),
    options: &CechOptions,
) -> Result<CohomologyTable> {
    if window.0 > window.1 {
        return Err(Error::InvalidParameters(format!("empty degree window {}:{}", window.0, window.1)));
    }
    let ell = lattice.ell();
    let cover = CoverIndex::new(lattice, options.cover);
    let top_level = match options.engine {
        Engine::Quotient => cover.centers.len().saturating_sub(1).max(ell),
        Engine::Direct => ell.min(cover.centers.len().saturating_sub(1)),
    };
    let degrees: Vec<i64> = (window.0..=window.1).collect();
    let rows: Vec<Vec<CohomologyEntry>> = match functor {
        FunctorKind::Derivations => {
            let sheaf = DerivationSheaf { lattice, derivations };
            degrees
                .par_iter()
                .map(|&d| {
                    let dims = cover_cohomology(&sheaf, &cover, d, top_level, options.engine, options.tuple_cap)?;
                    Ok(dims.into_iter().enumerate().map(|(n, dim)| CohomologyEntry { n, d, dim, truncation: None, stable: None }).collect())
                })
                .collect::<Result<Vec<_>>>()?
        }
        FunctorKind::Structure => {
            let k0_of = |d: i64| first_level(d, arrangement.len());
            degrees
                .par_iter()
                .map(|&d| {
                    let cells = stabilize(k0_of(d), options.k_max, top_level + 1, |k| {
                        let sheaf = StructureSheaf::new(arrangement, lattice, k);
                        cover_cohomology(&sheaf, &cover, d, top_level, options.engine, options.tuple_cap)
                    })?;
                    Ok(cells
                        .into_iter()
                        .enumerate()
                        .map(|(n, c)| CohomologyEntry { n, d, dim: c.dim, truncation: Some(c.level), stable: Some(c.stable) })
                        .collect())
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let mut entries = Vec::new();
    let mut beyond_top = Vec::new();
    for e in rows.into_iter().flatten() {
        if e.n < ell {
            entries.push(e);
        } else if e.dim > 0 {
            beyond_top.push(e);
        }
    }
    entries.sort_by_key(|e| (e.n, e.d));
    Ok(CohomologyTable {
        arrangement: arrangement.label(),
        field: arrangement.field().label(),
        ell,
        functor,
        window: [window.0, window.1],
        cover: options.cover,
        engine: options.engine,
        k_max: matches!(functor, FunctorKind::Structure).then_some(options.k_max),
        entries,
        beyond_top,
    })
}

/// The default window `[−|A|−ℓ, |A|]`.
pub fn default_window(arrangement: &Arrangement) -> (i64, i64) {
    let (n, ell) = (arrangement.len() as i64, arrangement.ell() as i64);
    (-n - ell, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::catalog;

    fn setup(name: &str, params: &[usize]) -> (Arrangement, IntersectionLattice, Derivations) {
        let a = catalog(name, params).unwrap();
        let l = IntersectionLattice::build(&a);
        let d = Derivations::new(&a);
        (a, l, d)
    }

    #[test]
    fn boolean_two_degree_one() {
        let (_, l, ders) = setup("boolean", &[2]);
        let sheaf = DerivationSheaf { lattice: &l, derivations: &ders };
        let cover = CoverIndex::new(&l, CoverKind::Minimal);
        let c = build_cech_complex(&sheaf, &cover, 1, 1, DEFAULT_TUPLE_CAP).unwrap();
        assert_eq!(c.term_dims(0), &[3, 3]);
        assert_eq!(c.term_dims(1), &[4]);
        assert!(c.is_complex());
        assert_eq!(c.cohomology_dims(), vec![2, 0]);
        let q = cover_cohomology(&sheaf, &cover, 1, 1, Engine::Quotient, DEFAULT_TUPLE_CAP).unwrap();
        assert_eq!(q, vec![2, 0]);
    }

    #[test]
    fn engines_agree_on_braid_three() {
        let (_, l, ders) = setup("braid", &[3]);
        let sheaf = DerivationSheaf { lattice: &l, derivations: &ders };
        for kind in [CoverKind::Minimal, CoverKind::Full] {
            let cover = CoverIndex::new(&l, kind);
            assert!(cover.is_valid(&l));
            for d in 0..4 {
                let direct = cover_cohomology(&sheaf, &cover, d, 3, Engine::Direct, DEFAULT_TUPLE_CAP).unwrap();
                let quot = cover_cohomology(&sheaf, &cover, d, 3, Engine::Quotient, DEFAULT_TUPLE_CAP).unwrap();
                assert_eq!(direct, quot, "{kind:?} d={d}");
                assert_eq!(direct[0], ders.space(&(0..6).collect::<Vec<_>>(), d).dim());
                assert_eq!((direct[1], direct[3]), (0, 0));
            }
        }
        let full = CoverIndex::new(&l, CoverKind::Full);
        assert!(build_cech_complex(&sheaf, &full, 2, 2, DEFAULT_TUPLE_CAP).unwrap().is_complex());
    }

    #[test]
    fn generic_has_first_cohomology() {
        let (a, l, ders) = setup("generic", &[3, 4]);
        let t = lattice_cohomology_table(&a, &l, &ders, FunctorKind::Derivations, (0, 4), &CechOptions::default()).unwrap();
        assert!(t.entries.iter().any(|e| e.n == 1 && e.dim > 0));
        assert!(t.beyond_top.is_empty());
    }

    #[test]
    fn probe_is_acyclic() {
        let (a, l, ders) = setup("braid", &[3]);
        let sheaf = DerivationSheaf { lattice: &l, derivations: &ders };
        let o = StructureSheaf::new(&a, &l, 2);
        for x in [l.lines()[0], l.bottom() + 1] {
            for engine in [Engine::Direct, Engine::Quotient] {
                let dims = acyclicity_probe(&sheaf, x, 2, engine, DEFAULT_TUPLE_CAP).unwrap();
                assert_eq!(dims[0], ders.space(l.members(x), 2).dim());
                assert!(dims[1..].iter().all(|&v| v == 0), "{dims:?}");
                let dims = acyclicity_probe(&o, x, -1, engine, DEFAULT_TUPLE_CAP).unwrap();
                assert!(dims[1..].iter().all(|&v| v == 0), "{dims:?}");
            }
        }
    }

    #[test]
    fn structure_sheaf_boolean_two() {
        let (a, l, ders) = setup("boolean", &[2]);
        let t = lattice_cohomology_table(&a, &l, &ders, FunctorKind::Structure, (-5, 3), &CechOptions::default()).unwrap();
        for d in -5..=3i64 {
            let h0 = if d >= 0 { (d + 1) as usize } else { 0 };
            let h1 = if d <= -2 { (-d - 1) as usize } else { 0 };
            assert_eq!(t.get(0, d), Some(h0), "H0 d={d}");
            assert_eq!(t.get(1, d), Some(h1), "H1 d={d}");
        }
    }

    #[test]
    fn stabilize_settles_first_agreement() {
        let seq = [vec![0, 1, 4], vec![0, 1, 6], vec![0, 3, 0], vec![0, 3, 0]];
        let cells = stabilize(1, 4, 3, |k| Ok(seq[k - 1].clone())).unwrap();
        assert_eq!(cells[0], StableCell { dim: 0, level: 1, stable: true });
        // cell 1 looks still from 1 to 2, but its neighbour moves
        assert_eq!(cells[1], StableCell { dim: 3, level: 3, stable: true });
        assert_eq!(cells[2], StableCell { dim: 0, level: 3, stable: true });
        let cells = stabilize(1, 2, 1, |k| Ok(vec![k])).unwrap();
        assert!(!cells[0].stable);
    }
}
