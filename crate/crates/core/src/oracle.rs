//! Cohomology of `D̃` and `𝒪` on the punctured spectrum `𝔛 = Spec S ∖ {𝔪}`.
//!
//! `𝔛` is covered by affine opens `D(f)`, with sections `M_f`. The Čech
//! complex of localizations is replaced by its truncation at denominator
//! exponent `K`, and each cell is accepted at the first `K` where two
//! consecutive truncations give the same dimension. The derivation module
//! used here is always the global `D(A)`, never the local `D(A_X)`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrangement::{Arrangement, FormProduct};
use crate::cech::{cech_dims, stabilize, CechSystem, Engine, DEFAULT_K_MAX, DEFAULT_TUPLE_CAP};
use crate::derivations::{form_polynomial, Derivations};
use crate::error::{Error, Result};
use crate::lattice::IntersectionLattice;
use crate::linalg::{SparseVec, Subspace};
use crate::poly::{dim_s, mul_blocks, Poly};
use crate::truncation::{first_level, truncated_section, DerivationModule, GradedModule, PolynomialRing};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OracleModule {
    #[serde(rename = "D")]
    Derivations,
    #[serde(rename = "O")]
    Structure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleCover {
    /// `D(x₁), …, D(x_ℓ)`.
    Coords,
    /// `D(Q(X))` for the one-dimensional flats `X`.
    Arrangement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OracleOptions {
    pub cover: OracleCover,
    pub engine: Engine,
    pub k_max: usize,
    pub tuple_cap: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { cover: OracleCover::Coords, engine: Engine::Quotient, k_max: DEFAULT_K_MAX, tuple_cap: DEFAULT_TUPLE_CAP }
    }
}

/// `{θ / f^K : θ ∈ M_{d + K·deg f}}`, stored by its numerators.
#[derive(Clone, Debug)]
pub struct TruncatedLocalizedPiece {
    pub multiplier: FormProduct,
    pub level: usize,
    pub degree: i64,
    /// Numerators, a subspace of `S^ℓ_{d + K·deg f}`.
    pub numerators: Arc<Subspace>,
}

impl TruncatedLocalizedPiece {
    pub fn dim(&self) -> usize {
        self.numerators.dim()
    }
}

/// `{θ / Q^K : θ ∈ D(A_X)_{d + K·deg Q}}` for the hyperplanes `members` of `A_X`.
pub fn localized_derivations(ders: &Derivations, members: &[usize], multiplier: &FormProduct, k: usize, d: i64) -> TruncatedLocalizedPiece {
    let e = d + (k * multiplier.degree()) as i64;
    TruncatedLocalizedPiece { multiplier: multiplier.clone(), level: k, degree: d, numerators: ders.space(members, e) }
}

/// Elements of `D(A_X)_f` that can be written with denominator `f^K`:
/// numerators `θ` with `f·θ ∈ D(A_X)`. Since `f` is a product of distinct
/// linear forms, one factor of `f` already saturates.
pub fn saturated_localized_derivations(ders: &Derivations, members: &[usize], multiplier: &FormProduct, k: usize, d: i64) -> TruncatedLocalizedPiece {
    let (field, ell) = (ders.field(), ders.ell());
    let e = d + (k * multiplier.degree()) as i64;
    let numerators = if e < 0 {
        Subspace::zero(field, 0)
    } else {
        let f = form_polynomial(ders.arrangement(), multiplier);
        let target = ders.space(members, e + multiplier.degree() as i64);
        let source = ell * dim_s(ell, e);
        let images: Vec<SparseVec> =
            (0..source).map(|i| mul_blocks(&f, &SparseVec::unit(i, field), ell, e as usize)).collect();
        Subspace::preimage(field, source, &images, &target)
    };
    TruncatedLocalizedPiece { multiplier: multiplier.clone(), level: k, degree: d, numerators: Arc::new(numerators) }
}

/// Outcome of comparing `D(A_Y)_{Q(X)}` with `D(A_{X∧Y})_{Q(X)}` at one `(d, K)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalizationCheck {
    pub x: usize,
    pub y: usize,
    pub d: i64,
    pub k: usize,
    /// Saturated pieces have equal span.
    pub saturated_equal: bool,
    /// `trunc_K D(A_Y) ⊆ trunc_K D(A_{X∧Y})`.
    pub forward: bool,
    /// `trunc_K D(A_{X∧Y}) ⊆ trunc_{K+1} D(A_Y)` after multiplying by `Q(X)`.
    pub backward: bool,
}

impl LocalizationCheck {
    pub fn holds(&self) -> bool {
        self.saturated_equal && self.forward && self.backward
    }
}

pub fn localization_identity(
    ders: &Derivations,
    lattice: &IntersectionLattice,
    x: usize,
    y: usize,
    d: i64,
    k: usize,
) -> Result<LocalizationCheck> {
    lattice.check(x)?;
    lattice.check(y)?;
    let a = ders.arrangement();
    let q = a.cofactor_forms(lattice.members(x))?;
    let xy = lattice.meet(x, y);
    let (my, mxy) = (lattice.members(y), lattice.members(xy));
    let sat_y = saturated_localized_derivations(ders, my, &q, k, d);
    let sat_xy = saturated_localized_derivations(ders, mxy, &q, k, d);
    let saturated_equal = sat_y.numerators.is_subspace_of(&sat_xy.numerators) && sat_xy.numerators.is_subspace_of(&sat_y.numerators);
    let ty = localized_derivations(ders, my, &q, k, d);
    let txy = localized_derivations(ders, mxy, &q, k, d);
    let forward = ty.numerators.is_subspace_of(&txy.numerators);
    let next = localized_derivations(ders, my, &q, k + 1, d);
    let backward = if txy.dim() == 0 {
        true
    } else {
        let f = form_polynomial(a, &q);
        let e = (d + (k * q.degree()) as i64) as usize;
        txy.numerators.basis().iter().all(|b| next.numerators.contains(&mul_blocks(&f, b, a.ell(), e)))
    };
    Ok(LocalizationCheck { x, y, d, k, saturated_equal, forward, backward })
}

/// The charts of a cover of `𝔛` and the multiplier of each intersection.
struct Charts {
    /// Multiplier of each open, as a product of linear forms in `vars`.
    opens: Vec<Vec<usize>>,
    /// Linear forms used by the multipliers.
    forms: Vec<Poly>,
    top: Vec<usize>,
}

impl Charts {
    fn new(a: &Arrangement, lattice: &IntersectionLattice, cover: OracleCover) -> Self {
        let (field, ell) = (a.field(), a.ell());
        match cover {
            OracleCover::Coords => Self {
                opens: (0..ell).map(|i| vec![i]).collect(),
                forms: (0..ell).map(|i| Poly::variable(field, ell, i)).collect(),
                top: (0..ell).collect(),
            },
            OracleCover::Arrangement => {
                let opens: Vec<Vec<usize>> = lattice
                    .lines()
                    .into_iter()
                    .map(|x| (0..a.len()).filter(|h| !lattice.members(x).contains(h)).collect())
                    .collect();
                let mut top: Vec<usize> = opens.iter().flatten().copied().collect();
                top.sort_unstable();
                top.dedup();
                Self {
                    opens,
                    forms: a.hyperplanes().iter().map(|h| Poly::linear(field, h.normal())).collect(),
                    top,
                }
            }
        }
    }

    fn multiplier(&self, tuple: &[usize]) -> Vec<usize> {
        let mut m: Vec<usize> = tuple.iter().flat_map(|&i| self.opens[i].iter().copied()).collect();
        m.sort_unstable();
        m.dedup();
        m
    }
}

/// One cell of the punctured-spectrum cohomology.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PuncturedCell {
    pub n: usize,
    pub d: i64,
    pub dim: usize,
    /// First truncation level at which this cell agreed with the next one.
    pub level: usize,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PuncturedCohomologyResult {
    pub arrangement: String,
    pub field: String,
    pub ell: usize,
    pub module: OracleModule,
    pub cover: OracleCover,
    pub engine: Engine,
    pub window: [i64; 2],
    pub k_max: usize,
    pub cells: Vec<PuncturedCell>,
}

impl PuncturedCohomologyResult {
    pub fn cell(&self, n: usize, d: i64) -> Option<&PuncturedCell> {
        self.cells.iter().find(|c| c.n == n && c.d == d)
    }

    pub fn unstable(&self) -> Vec<&PuncturedCell> {
        self.cells.iter().filter(|c| !c.stable).collect()
    }
}

/// Truncated Čech cohomology of one cover at level `K` and degree `d`.
fn truncated_dims(
    module: &dyn GradedModule,
    charts: &Charts,
    k: usize,
    d: i64,
    options: &OracleOptions,
    top_level: usize,
) -> Result<Vec<usize>> {
    let field = module.field();
    let cache: RwLock<HashMap<Vec<usize>, Arc<Subspace>>> = RwLock::default();
    let sections = |t: &[usize]| -> Result<Arc<Subspace>> {
        let mult = charts.multiplier(t);
        if let Some(s) = cache.read().expect("section cache").get(&mult) {
            return Ok(s.clone());
        }
        let cofactor = charts
            .top
            .iter()
            .filter(|h| !mult.contains(h))
            .fold(Poly::one(field, module.ell()), |acc, &h| acc.mul(&charts.forms[h]));
        let s = Arc::new(truncated_section(module, mult.len(), &cofactor.pow(k), k, d));
        Ok(cache.write().expect("section cache").entry(mult).or_insert(s).clone())
    };
    let system = CechSystem { field, size: charts.opens.len(), sections: &sections };
    cech_dims(&system, top_level, options.engine, options.tuple_cap)
}

/// `Hⁿ(𝔛, M̃)_d` for `n = 0..ℓ` over the window, each cell stabilized in `K`.
pub fn punctured_cohomology(
    ders: &Derivations,
    lattice: &IntersectionLattice,
    module: OracleModule,
    window: (i64, i64),
    options: &OracleOptions,
) -> Result<PuncturedCohomologyResult> {
    if window.0 > window.1 {
        return Err(Error::InvalidParameters(format!("empty degree window {}:{}", window.0, window.1)));
    }
    if options.k_max < 2 {
        return Err(Error::InvalidParameters(format!("k_max must be at least 2, got {}", options.k_max)));
    }
    let a = ders.arrangement();
    let ell = a.ell();
    let charts = Charts::new(a, lattice, options.cover);
    let ring = PolynomialRing { field: a.field(), ell };
    let global = DerivationModule::global(ders);
    let m: &dyn GradedModule = match module {
        OracleModule::Derivations => &global,
        OracleModule::Structure => &ring,
    };
    let top_level = ell - 1;
    let degrees: Vec<i64> = (window.0..=window.1).collect();
    let rows: Vec<Vec<PuncturedCell>> = degrees
        .par_iter()
        .map(|&d| {
            let k0 = first_level(d, charts.top.len());
            let cells = stabilize(k0, options.k_max, ell, |k| truncated_dims(m, &charts, k, d, options, top_level))?;
            Ok(cells
                .into_iter()
                .enumerate()
                .map(|(n, c)| PuncturedCell { n, d, dim: c.dim, level: c.level, stable: c.stable })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cells: Vec<PuncturedCell> = rows.into_iter().flatten().collect();
    cells.sort_by_key(|c| (c.n, c.d));
    Ok(PuncturedCohomologyResult {
        arrangement: a.label(),
        field: a.field().label(),
        ell,
        module,
        cover: options.cover,
        engine: options.engine,
        window: [window.0, window.1],
        k_max: options.k_max,
        cells,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalCohomologyCell {
    pub i: usize,
    pub d: i64,
    pub dim: usize,
    /// `None` for the cells that vanish by depth, not by computation.
    pub level: Option<usize>,
    pub stable: bool,
}

/// `H^i_𝔪(M)_d` for `i = 0..=ℓ`, via `H^{i+1}_𝔪 = H^i(𝔛, ·)` for `i ≥ 1`.
pub fn local_cohomology_dims(punctured: &PuncturedCohomologyResult) -> Vec<LocalCohomologyCell> {
    let [lo, hi] = punctured.window;
    let mut out = Vec::new();
    for i in 0..=punctured.ell {
        for d in lo..=hi {
            if i < 2 {
                out.push(LocalCohomologyCell { i, d, dim: 0, level: None, stable: true });
                continue;
            }
            let c = punctured.cell(i - 1, d).expect("cell in window");
            out.push(LocalCohomologyCell { i, d, dim: c.dim, level: Some(c.level), stable: c.stable });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PdEstimate {
    /// Smallest `p` consistent with the stable cells on the window.
    pub value: usize,
    /// Set when unstable cells could still raise the value.
    pub lower_bound_only: bool,
    pub window: [i64; 2],
    pub witness: Option<(usize, i64)>,
    pub unstable_cells: Vec<(usize, i64)>,
}

/// `pd ≤ p` iff `H^i_𝔪(D) = 0` for `i < ℓ − p`, observed on the window.
pub fn pd_from_local_cohomology(ell: usize, window: [i64; 2], cells: &[LocalCohomologyCell]) -> PdEstimate {
    let mut value = 0;
    let mut witness = None;
    for c in cells.iter().filter(|c| c.stable && c.dim > 0 && c.i < ell) {
        let p = ell - c.i;
        if p > value {
            value = p;
            witness = Some((c.i, c.d));
        }
    }
    let unstable_cells: Vec<(usize, i64)> =
        cells.iter().filter(|c| !c.stable && c.i < ell - value).map(|c| (c.i, c.d)).collect();
    PdEstimate { value, lower_bound_only: !unstable_cells.is_empty(), window, witness, unstable_cells }
}

pub fn pd_oracle(ders: &Derivations, lattice: &IntersectionLattice, window: (i64, i64), options: &OracleOptions) -> Result<PdEstimate> {
    let r = punctured_cohomology(ders, lattice, OracleModule::Derivations, window, options)?;
    Ok(pd_from_local_cohomology(r.ell, r.window, &local_cohomology_dims(&r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::catalog;

    fn setup(name: &str, params: &[usize]) -> (IntersectionLattice, Derivations) {
        let a = catalog(name, params).unwrap();
        (IntersectionLattice::build(&a), Derivations::new(&a))
    }

    #[test]
    fn structure_module_plane() {
        let (l, ders) = setup("boolean", &[2]);
        let r = punctured_cohomology(&ders, &l, OracleModule::Structure, (-5, 4), &OracleOptions::default()).unwrap();
        for d in -5..=4i64 {
            let h0 = if d >= 0 { (d + 1) as usize } else { 0 };
            let h1 = if d <= -2 { (-d - 1) as usize } else { 0 };
            assert_eq!(r.cell(0, d).unwrap().dim, h0);
            assert_eq!(r.cell(1, d).unwrap().dim, h1);
        }
        assert!(r.unstable().is_empty());
    }

    #[test]
    fn derivations_of_boolean_two() {
        let (l, ders) = setup("boolean", &[2]);
        let r = punctured_cohomology(&ders, &l, OracleModule::Derivations, (-3, 3), &OracleOptions::default()).unwrap();
        for d in 1..=3 {
            assert_eq!(r.cell(0, d).unwrap().dim, ders.space(&[0, 1], d).dim());
        }
    }

    #[test]
    fn covers_agree_on_small_window() {
        let (l, ders) = setup("braid", &[3]);
        let coords = OracleOptions { k_max: 4, ..OracleOptions::default() };
        let arr = OracleOptions { cover: OracleCover::Arrangement, ..coords };
        let a = punctured_cohomology(&ders, &l, OracleModule::Derivations, (-1, 2), &coords).unwrap();
        let b = punctured_cohomology(&ders, &l, OracleModule::Derivations, (-1, 2), &arr).unwrap();
        let dims = |r: &PuncturedCohomologyResult| r.cells.iter().map(|c| (c.n, c.d, c.dim)).collect::<Vec<_>>();
        assert_eq!(dims(&a), dims(&b));
    }

    #[test]
    fn localization_identity_on_braid() {
        let (l, ders) = setup("braid", &[3]);
        let lines = l.lines();
        let check = localization_identity(&ders, &l, lines[0], l.top(), 1, 1).unwrap();
        assert!(check.holds(), "{check:?}");
        let check = localization_identity(&ders, &l, l.bottom() + 1, lines[2], 0, 2).unwrap();
        assert!(check.holds(), "{check:?}");
    }

    #[test]
    fn truncation_at_level_zero() {
        let (l, ders) = setup("boolean", &[2]);
        let x = l.find(&[0]).unwrap();
        let q = ders.arrangement().cofactor_forms(l.members(x)).unwrap();
        let p = localized_derivations(&ders, l.members(x), &q, 0, 1);
        assert_eq!(p.dim(), ders.space(&[0], 1).dim());
        let p = localized_derivations(&ders, l.members(x), &q, 1, 0);
        assert_eq!(p.dim(), 3);
    }
}
