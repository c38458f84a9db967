//! Truncated localizations of graded modules.
//!
//! For a module `M ⊆ S^r`, a multiplier `f` and a level `K`, the truncated
//! piece `{m / f^K : m ∈ M_{d + K·deg f}}` is embedded into a common top
//! localization `M_g` (with `f | g`) by multiplying numerators by `(g/f)^K`.
//! Both the structure sheaf on `L₀` and the punctured-spectrum oracle use this.

use std::sync::Arc;

use crate::derivations::Derivations;
use crate::field::FieldSpec;
use crate::linalg::{Subspace, SparseVec};
use crate::poly::{dim_s, mul_blocks, Poly};

/// A graded submodule of `S^r` given degree by degree.
pub trait GradedModule: Sync {
    fn field(&self) -> FieldSpec;
    /// Number of variables.
    fn ell(&self) -> usize;
    /// Rank `r` of the ambient free module.
    fn blocks(&self) -> usize;
    fn piece(&self, e: i64) -> Arc<Subspace>;
    fn label(&self) -> &'static str;
}

/// `S` itself.
#[derive(Clone, Debug)]
pub struct PolynomialRing {
    pub field: FieldSpec,
    pub ell: usize,
}

impl GradedModule for PolynomialRing {
    fn field(&self) -> FieldSpec {
        self.field
    }

    fn ell(&self) -> usize {
        self.ell
    }

    fn blocks(&self) -> usize {
        1
    }

    fn piece(&self, e: i64) -> Arc<Subspace> {
        Arc::new(Subspace::full(self.field, dim_s(self.ell, e)))
    }

    fn label(&self) -> &'static str {
        "O"
    }
}

/// `D(A_X)` for a fixed set of hyperplanes.
pub struct DerivationModule<'a> {
    pub derivations: &'a Derivations,
    pub members: Vec<usize>,
}

impl<'a> DerivationModule<'a> {
    /// The module `D(A)` of the whole arrangement.
    pub fn global(derivations: &'a Derivations) -> Self {
        Self { derivations, members: (0..derivations.arrangement().len()).collect() }
    }
}

impl GradedModule for DerivationModule<'_> {
    fn field(&self) -> FieldSpec {
        self.derivations.field()
    }

    fn ell(&self) -> usize {
        self.derivations.ell()
    }

    fn blocks(&self) -> usize {
        self.derivations.ell()
    }

    fn piece(&self, e: i64) -> Arc<Subspace> {
        self.derivations.space(&self.members, e)
    }

    fn label(&self) -> &'static str {
        "D"
    }
}

/// Dimension of the common ambient `S^r_{top}` for the given top degree.
pub fn top_ambient(m: &dyn GradedModule, top_degree: i64) -> usize {
    m.blocks() * dim_s(m.ell(), top_degree)
}

/// `{m / f^K : m ∈ M_{d + K·deg f}}` inside `S^r_{d + K·deg g}` via `(g/f)^K`.
///
/// `cofactor_power` is `(g/f)^K`, already expanded.
pub fn truncated_section(m: &dyn GradedModule, f_degree: usize, cofactor_power: &Poly, k: usize, d: i64) -> Subspace {
    let e = d + (k * f_degree) as i64;
    let top = e + cofactor_power.degree() as i64;
    let ambient = top_ambient(m, top);
    if e < 0 {
        return Subspace::zero(m.field(), ambient);
    }
    let piece = m.piece(e);
    let images: Vec<SparseVec> =
        piece.basis().iter().map(|b| mul_blocks(cofactor_power, b, m.blocks(), e as usize)).collect();
    Subspace::span(m.field(), ambient, images)
}

/// Smallest level at which the top degree `d + K·top_degree` is nonnegative.
pub fn first_level(d: i64, top_multiplier_degree: usize) -> usize {
    if d >= 0 || top_multiplier_degree == 0 {
        return 1;
    }
    let t = top_multiplier_degree as i64;
    (((-d) + t - 1) / t).max(1) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::catalog;

    const Q: FieldSpec = FieldSpec::Rationals;

    #[test]
    fn level_zero_is_the_piece_itself() {
        let a = catalog("braid", &[3]).unwrap();
        let ders = Derivations::new(&a);
        let m = DerivationModule::global(&ders);
        let one = Poly::one(Q, 3);
        for d in 0..4 {
            let s = truncated_section(&m, 2, &one, 0, d);
            assert_eq!(s.dim(), ders.space(&m.members, d).dim());
        }
    }

    #[test]
    fn first_level_covers_negative_degrees() {
        assert_eq!(first_level(5, 3), 1);
        assert_eq!(first_level(-8, 3), 3);
        assert_eq!(first_level(-9, 3), 3);
        assert_eq!(first_level(-1, 6), 1);
    }

    #[test]
    fn ring_sections_embed() {
        let ring = PolynomialRing { field: Q, ell: 2 };
        let y = Poly::variable(Q, 2, 1);
        // x-chart at level 1, degree -1: g/x with g constant, times y
        let s = truncated_section(&ring, 1, &y, 1, -1);
        assert_eq!(s.dim(), 1);
        assert_eq!(s.ambient(), 2);
    }
}
