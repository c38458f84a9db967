//! Verdicts assembled from the lattice engine, the oracle and the certificate.
//!
//! Only the freeness certificate is unconditional. Everything read off a
//! cohomology table holds on its degree window, and oracle cells also depend
//! on their truncation level; both are carried in the output.

use serde::Serialize;

use crate::arrangement::Arrangement;
use crate::cech::{default_window, lattice_cohomology_table, CechOptions, CohomologyTable, FunctorKind};
use crate::derivations::{Derivations, FreenessCertificate};
use crate::error::{Error, Result};
use crate::lattice::IntersectionLattice;
use crate::oracle::{local_cohomology_dims, pd_from_local_cohomology, punctured_cohomology, OracleModule, OracleOptions, PdEstimate, PuncturedCohomologyResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub n: usize,
    pub d: i64,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FreenessVerdict {
    pub free: bool,
    /// Exact and independent of any window.
    pub certificate: FreenessCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<usize>>,
    pub window: [i64; 2],
    /// `Hⁿ(L₀, D)_d = 0` for `0 < n < ℓ−1` at every `d` of the window.
    pub middle_vanishing: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

fn first_middle_witness(table: &CohomologyTable) -> Option<Witness> {
    table.middle_nonzero().first().map(|e| Witness { n: e.n, d: e.d, dim: e.dim })
}

/// Certificate plus observed vanishing; returns the verdict and, separately, a
/// description of any contradiction between the two.
fn assess_freeness(certificate: FreenessCertificate, table: &CohomologyTable) -> (FreenessVerdict, Option<String>) {
    let witness = first_middle_witness(table);
    let free = certificate.is_free();
    let exponents = match &certificate {
        FreenessCertificate::Free { exponents } => Some(exponents.0.clone()),
        _ => None,
    };
    let issue = match (&witness, free) {
        (Some(w), true) => Some(format!(
            "certified free but H^{}(L0, D)_{} has dimension {}",
            w.n, w.d, w.dim
        )),
        _ => None,
    };
    let verdict = FreenessVerdict { free, certificate, exponents, window: table.window, middle_vanishing: witness.is_none(), witness };
    (verdict, issue)
}

/// Fails with a consistency error when the certificate and the table disagree.
pub fn freeness_verdict(derivations: &Derivations, table: &CohomologyTable) -> Result<FreenessVerdict> {
    let (verdict, issue) = assess_freeness(derivations.freeness_certificate(), table);
    match issue {
        Some(msg) => Err(Error::Consistency(msg)),
        None => Ok(verdict),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticePd {
    pub value: usize,
    pub window: [i64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// Smallest `p` with `Hⁿ(L₀, D)_d = 0` for `0 < n < ℓ−1−p` on the window.
pub fn pd_via_lattice(table: &CohomologyTable) -> LatticePd {
    let lowest = table.middle_nonzero().into_iter().min_by_key(|e| (e.n, e.d)).map(|e| Witness { n: e.n, d: e.d, dim: e.dim });
    let value = lowest.as_ref().map_or(0, |w| table.ell - 1 - w.n);
    LatticePd { value, window: table.window, witness: lowest }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// The two sides must be equal.
    Equal,
    /// Left side at least the right side.
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KunnethCell {
    pub n: usize,
    pub d: i64,
    /// `Hⁿ(𝔛, D̃)_d` from the oracle.
    pub lhs: usize,
    pub rhs: usize,
    pub relation: Relation,
    pub holds: bool,
    pub oracle_level: usize,
    pub oracle_stable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KunnethReport {
    pub window: [i64; 2],
    pub k_max: usize,
    pub oracle: OracleOptions,
    /// Stable cells with `n < ℓ−1` where the sides differ.
    pub mismatches: Vec<(usize, i64)>,
    /// Oracle cells with `n < ℓ−1` that did not stabilize; excluded from the comparison.
    pub unstable: Vec<(usize, i64)>,
    pub compared: usize,
    /// Cells with `n = ℓ−1` where the inequality fails. At this `n` the
    /// right side is the left side plus `H^{ℓ−1}(L₀, D)_d`, so the
    /// inequality is equivalent to vanishing of that lattice group.
    pub top_degree_failures: Vec<(usize, i64)>,
    pub cells: Vec<KunnethCell>,
}

impl KunnethReport {
    pub fn all_match(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn unstable_fraction(&self) -> f64 {
        let total = self.compared + self.unstable.len();
        if total == 0 {
            0.0
        } else {
            self.unstable.len() as f64 / total as f64
        }
    }

    pub fn ensure(&self) -> Result<()> {
        if self.all_match() {
            return Ok(());
        }
        Err(Error::Consistency(format!("oracle and lattice cohomology differ at (n, d) = {:?}", self.mismatches)))
    }
}

/// Compares the oracle with a lattice `D` table over the oracle's window.
pub fn kunneth_compare(lattice_table: &CohomologyTable, oracle: &PuncturedCohomologyResult, options: &OracleOptions) -> Result<KunnethReport> {
    let ell = oracle.ell;
    let mut cells = Vec::new();
    let (mut mismatches, mut unstable, mut top_degree_failures) = (Vec::new(), Vec::new(), Vec::new());
    let mut compared = 0;
    for c in &oracle.cells {
        let lattice = lattice_table
            .get(c.n, c.d)
            .ok_or_else(|| Error::InvalidParameters(format!("lattice table has no cell ({}, {})", c.n, c.d)))?;
        let (rhs, relation) = if c.n + 1 < ell { (lattice, Relation::Equal) } else { (c.dim + lattice, Relation::AtLeast) };
        let holds = match relation {
            Relation::Equal => c.dim == rhs,
            Relation::AtLeast => c.dim >= rhs,
        };
        if c.n + 1 < ell {
            if !c.stable {
                unstable.push((c.n, c.d));
            } else {
                compared += 1;
                if !holds {
                    mismatches.push((c.n, c.d));
                }
            }
        } else if !holds {
            top_degree_failures.push((c.n, c.d));
        }
        cells.push(KunnethCell { n: c.n, d: c.d, lhs: c.dim, rhs, relation, holds, oracle_level: c.level, oracle_stable: c.stable });
    }
    Ok(KunnethReport { window: oracle.window, k_max: oracle.k_max, oracle: *options, mismatches, unstable, compared, top_degree_failures, cells })
}

/// Runs both engines on the window and compares them cell by cell.
pub fn kunneth_verify(
    arrangement: &Arrangement,
    lattice: &IntersectionLattice,
    derivations: &Derivations,
    window: (i64, i64),
    cech: &CechOptions,
    oracle: &OracleOptions,
) -> Result<KunnethReport> {
    let table = lattice_cohomology_table(arrangement, lattice, derivations, FunctorKind::Derivations, window, cech)?;
    let punctured = punctured_cohomology(derivations, lattice, OracleModule::Derivations, window, oracle)?;
    kunneth_compare(&table, &punctured, oracle)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorizationStatus {
    Match,
    Mismatch,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorizationCheck {
    pub status: FactorizationStatus,
    /// Coefficients of `χ(A, t)`, lowest degree first.
    pub characteristic_polynomial: Vec<i64>,
    /// Coefficients of `∏ (t − eᵢ)` when exponents are known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent_product: Option<Vec<i64>>,
}

/// Coefficients of `∏ (t − eᵢ)`, lowest degree first.
pub fn exponent_polynomial(exponents: &[usize]) -> Vec<i64> {
    let mut p = vec![1i64];
    for &e in exponents {
        let mut next = vec![0i64; p.len() + 1];
        for (i, c) in p.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * e as i64;
        }
        p = next;
    }
    p
}

pub fn factorization_check(lattice: &IntersectionLattice, certificate: &FreenessCertificate) -> FactorizationCheck {
    let chi = lattice.characteristic_polynomial();
    match certificate {
        FreenessCertificate::Free { exponents } => {
            let product = exponent_polynomial(&exponents.0);
            let status = if product == chi { FactorizationStatus::Match } else { FactorizationStatus::Mismatch };
            FactorizationCheck { status, characteristic_polynomial: chi, exponent_product: Some(product) }
        }
        _ => FactorizationCheck { status: FactorizationStatus::NotApplicable, characteristic_polynomial: chi, exponent_product: None },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VanishingSummary {
    pub n: usize,
    pub nonzero_cells: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_nonzero_degree: Option<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ReportOptions {
    pub window: (i64, i64),
    pub cech: CechOptions,
    pub oracle: OracleOptions,
}

impl ReportOptions {
    pub fn for_arrangement(a: &Arrangement) -> Self {
        Self { window: default_window(a), cech: CechOptions::default(), oracle: OracleOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportSettings {
    pub window: [i64; 2],
    pub cech: CechOptions,
    pub oracle: OracleOptions,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagnosticsReport {
    pub arrangement: String,
    pub field: String,
    pub ell: usize,
    pub hyperplanes: usize,
    pub settings: ReportSettings,
    pub freeness: FreenessVerdict,
    pub lattice_vanishing: Vec<VanishingSummary>,
    pub pd_via_lattice: LatticePd,
    pub pd_via_oracle: PdEstimate,
    pub kunneth: KunnethReport,
    pub factorization: FactorizationCheck,
    /// Contradictions between independent computations; empty on a sound run.
    pub consistency: Vec<String>,
}

impl DiagnosticsReport {
    pub fn is_consistent(&self) -> bool {
        self.consistency.is_empty()
    }
}

pub fn diagnostics_report(arrangement: &Arrangement, options: &ReportOptions) -> Result<DiagnosticsReport> {
    let lattice = IntersectionLattice::build(arrangement);
    let derivations = Derivations::new(arrangement);
    let ell = arrangement.ell();
    let table = lattice_cohomology_table(arrangement, &lattice, &derivations, FunctorKind::Derivations, options.window, &options.cech)?;
    let punctured = punctured_cohomology(&derivations, &lattice, OracleModule::Derivations, options.window, &options.oracle)?;
    let mut consistency = Vec::new();

    let (freeness, issue) = assess_freeness(derivations.freeness_certificate(), &table);
    consistency.extend(issue);

    let lattice_vanishing = (1..ell)
        .map(|n| {
            let nonzero: Vec<i64> = table.entries.iter().filter(|e| e.n == n && e.dim > 0).map(|e| e.d).collect();
            VanishingSummary { n, nonzero_cells: nonzero.len(), first_nonzero_degree: nonzero.first().copied() }
        })
        .collect();
    if !table.beyond_top.is_empty() {
        consistency.push(format!("{} nonzero lattice cells above degree ℓ−1", table.beyond_top.len()));
    }

    let pd_lattice = pd_via_lattice(&table);
    let pd_oracle = pd_from_local_cohomology(ell, punctured.window, &local_cohomology_dims(&punctured));
    if !pd_oracle.lower_bound_only && pd_oracle.value != pd_lattice.value {
        consistency.push(format!("projective dimension {} from the lattice, {} from the oracle", pd_lattice.value, pd_oracle.value));
    }
    if ell >= 2 && pd_lattice.value > ell - 2 {
        consistency.push(format!("projective dimension {} exceeds ℓ−2", pd_lattice.value));
    }

    let kunneth = kunneth_compare(&table, &punctured, &options.oracle)?;
    if !kunneth.all_match() {
        consistency.push(format!("oracle and lattice cohomology differ at (n, d) = {:?}", kunneth.mismatches));
    }

    let factorization = factorization_check(&lattice, &freeness.certificate);
    if factorization.status == FactorizationStatus::Mismatch {
        consistency.push("characteristic polynomial does not factor by the certified exponents".into());
    }

    Ok(DiagnosticsReport {
        arrangement: arrangement.label(),
        field: arrangement.field().label(),
        ell,
        hyperplanes: arrangement.len(),
        settings: ReportSettings { window: [options.window.0, options.window.1], cech: options.cech, oracle: options.oracle },
        freeness,
        lattice_vanishing,
        pd_via_lattice: pd_lattice,
        pd_via_oracle: pd_oracle,
        kunneth,
        factorization,
        consistency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::catalog;

    #[test]
    fn exponent_products() {
        assert_eq!(exponent_polynomial(&[1, 2, 3]), vec![-6, 11, -6, 1]);
        assert_eq!(exponent_polynomial(&[1, 1]), vec![1, -2, 1]);
        assert_eq!(exponent_polynomial(&[]), vec![1]);
    }

    #[test]
    fn braid_three_report() {
        let a = catalog("braid", &[3]).unwrap();
        let mut options = ReportOptions::for_arrangement(&a);
        options.window = (-4, 4);
        let r = diagnostics_report(&a, &options).unwrap();
        assert!(r.is_consistent(), "{:?}", r.consistency);
        assert!(r.freeness.free && r.freeness.middle_vanishing);
        assert_eq!(r.freeness.exponents, Some(vec![1, 2, 3]));
        assert_eq!(r.pd_via_lattice.value, 0);
        assert_eq!(r.pd_via_oracle.value, 0);
        assert_eq!(r.factorization.status, FactorizationStatus::Match);
    }

    #[test]
    fn generic_is_not_free() {
        let a = catalog("generic", &[3, 4]).unwrap();
        let l = IntersectionLattice::build(&a);
        let ders = Derivations::new(&a);
        let table = lattice_cohomology_table(&a, &l, &ders, FunctorKind::Derivations, (-2, 3), &CechOptions::default()).unwrap();
        let v = freeness_verdict(&ders, &table).unwrap();
        assert!(!v.free);
        assert_eq!(v.witness, Some(Witness { n: 1, d: 0, dim: 1 }));
        assert_eq!(pd_via_lattice(&table).value, 1);
        assert_eq!(factorization_check(&l, &v.certificate).status, FactorizationStatus::NotApplicable);
    }

    #[test]
    fn plane_arrangements_are_free() {
        let a = catalog("generic", &[2, 5]).unwrap();
        let l = IntersectionLattice::build(&a);
        let ders = Derivations::new(&a);
        let table = lattice_cohomology_table(&a, &l, &ders, FunctorKind::Derivations, (-7, 5), &CechOptions::default()).unwrap();
        let v = freeness_verdict(&ders, &table).unwrap();
        assert!(v.free);
        assert_eq!(v.exponents.as_ref().map(|e| e.iter().sum::<usize>()), Some(5));
    }
}
