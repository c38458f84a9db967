//! The intersection lattice `L(A)` and its opposite `L₀ = (L(A) ∖ {T(A)})^op`.
//!
//! Elements are flats, identified by their localization `A_X`. In `L(A)`,
//! `X ≤ Y` iff `X ⊇ Y`; `V` is the bottom and `T(A) = {0}` the top. In `L₀`
//! the order is inclusion, so the `L₀`-join of two flats is their `L(A)`-meet.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::arrangement::Arrangement;
use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::linalg::{EchelonBasis, ExactMatrix};

/// A flat of the arrangement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeElement {
    /// RREF basis of the span of `{α_H : H ⊇ X}`.
    pub span_rref: ExactMatrix,
    /// Sorted indices of the hyperplanes containing the flat.
    pub members: Vec<usize>,
    pub codim: usize,
}

impl LatticeElement {
    fn sort_key(&self) -> (usize, Vec<Scalar>) {
        let flat: Vec<Scalar> = self.span_rref.to_dense().into_iter().flatten().collect();
        (self.codim, flat)
    }
}

#[derive(Clone, Debug)]
pub struct IntersectionLattice {
    field: FieldSpec,
    ell: usize,
    num_hyperplanes: usize,
    elements: Vec<LatticeElement>,
    by_members: HashMap<Vec<usize>, usize>,
    meet: Vec<Vec<usize>>,
    join: Vec<Vec<usize>>,
    mobius: Vec<i64>,
}

fn closure(a: &Arrangement, generators: &[usize]) -> LatticeElement {
    let mut basis = EchelonBasis::new(a.field());
    for &g in generators {
        basis.insert(a.hyperplane(g).normal_vec());
    }
    let members: Vec<usize> = (0..a.len()).filter(|&i| basis.contains(&a.hyperplane(i).normal_vec())).collect();
    let (_, rows) = basis.into_rref();
    let codim = rows.len();
    LatticeElement { span_rref: ExactMatrix::from_rows(a.field(), a.ell(), rows), members, codim }
}

impl IntersectionLattice {
    /// Breadth-first closure from `V` under intersection with each hyperplane.
    pub fn build(a: &Arrangement) -> Self {
        let mut found: HashMap<Vec<usize>, LatticeElement> = HashMap::new();
        let bottom = closure(a, &[]);
        let mut queue = VecDeque::from([bottom.members.clone()]);
        found.insert(bottom.members.clone(), bottom);
        while let Some(members) = queue.pop_front() {
            for h in 0..a.len() {
                if members.contains(&h) {
                    continue;
                }
                let mut gens = members.clone();
                gens.push(h);
                let next = closure(a, &gens);
                if !found.contains_key(&next.members) {
                    queue.push_back(next.members.clone());
                    found.insert(next.members.clone(), next);
                }
            }
        }
        let mut elements: Vec<LatticeElement> = found.into_values().collect();
        elements.sort_by_cached_key(LatticeElement::sort_key);
        let by_members: HashMap<Vec<usize>, usize> =
            elements.iter().enumerate().map(|(i, e)| (e.members.clone(), i)).collect();

        let n = elements.len();
        let mut meet = vec![vec![0; n]; n];
        let mut join = vec![vec![0; n]; n];
        for i in 0..n {
            for j in i..n {
                let common: Vec<usize> =
                    elements[i].members.iter().copied().filter(|m| elements[j].members.contains(m)).collect();
                let m = by_members[&common];
                let mut union = elements[i].members.clone();
                union.extend(elements[j].members.iter().copied());
                let jn = by_members[&closure(a, &union).members];
                meet[i][j] = m;
                meet[j][i] = m;
                join[i][j] = jn;
                join[j][i] = jn;
            }
        }

        let mut mobius = vec![0i64; n];
        for x in 0..n {
            if x == 0 {
                mobius[x] = 1;
                continue;
            }
            // sorted by codim, so every strictly smaller element comes first
            let below: i64 = (0..x)
                .filter(|&z| is_proper_subset(&elements[z].members, &elements[x].members))
                .map(|z| mobius[z])
                .sum();
            mobius[x] = -below;
        }

        Self { field: a.field(), ell: a.ell(), num_hyperplanes: a.len(), elements, by_members, meet, join, mobius }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn num_hyperplanes(&self) -> usize {
        self.num_hyperplanes
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[LatticeElement] {
        &self.elements
    }

    pub fn element(&self, x: usize) -> &LatticeElement {
        &self.elements[x]
    }

    pub fn members(&self, x: usize) -> &[usize] {
        &self.elements[x].members
    }

    pub fn codim(&self, x: usize) -> usize {
        self.elements[x].codim
    }

    /// `V`, the whole space.
    pub fn bottom(&self) -> usize {
        0
    }

    /// `T(A) = {0}`.
    pub fn top(&self) -> usize {
        self.elements.len() - 1
    }

    pub fn find(&self, members: &[usize]) -> Option<usize> {
        let mut key = members.to_vec();
        key.sort_unstable();
        self.by_members.get(&key).copied()
    }

    pub fn check(&self, x: usize) -> Result<usize> {
        if x < self.len() {
            Ok(x)
        } else {
            Err(Error::NotInLattice(x))
        }
    }

    /// `A_X`.
    pub fn localization(&self, x: usize) -> &[usize] {
        self.members(x)
    }

    /// `X ∧ Y` in `L(A)`: the smallest flat containing both, with `A_{X∧Y} = A_X ∩ A_Y`.
    /// This is the join in `L₀`.
    pub fn meet(&self, x: usize, y: usize) -> usize {
        self.meet[x][y]
    }

    /// `X ∨ Y = X ∩ Y` in `L(A)`.
    pub fn join(&self, x: usize, y: usize) -> usize {
        self.join[x][y]
    }

    /// `L₀`-join of several flats.
    pub fn l0_join(&self, xs: &[usize]) -> usize {
        xs.iter().fold(self.top(), |acc, &x| if acc == self.top() { x } else { self.meet(acc, x) })
    }

    /// `Y ⊆ X` as subspaces, i.e. `Y ≤ X` in `L₀`.
    pub fn is_subflat(&self, y: usize, x: usize) -> bool {
        self.elements[x].members.iter().all(|m| self.elements[y].members.contains(m))
    }

    /// `L₀` in the fixed linear order.
    pub fn l0(&self) -> Vec<usize> {
        (0..self.top()).collect()
    }

    /// Minimal elements of `L₀`: the one-dimensional flats.
    pub fn lines(&self) -> Vec<usize> {
        (0..self.top()).filter(|&x| self.codim(x) + 1 == self.ell).collect()
    }

    pub fn mobius(&self, x: usize) -> i64 {
        self.mobius[x]
    }

    /// `χ(A, t) = Σ μ(X) t^{dim X}`, lowest degree first.
    pub fn characteristic_polynomial(&self) -> Vec<i64> {
        let mut coeffs = vec![0i64; self.ell + 1];
        for (x, e) in self.elements.iter().enumerate() {
            coeffs[self.ell - e.codim] += self.mobius[x];
        }
        coeffs
    }

    /// Number of elements of each codimension.
    pub fn rank_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.ell + 1];
        for e in &self.elements {
            counts[e.codim] += 1;
        }
        counts
    }

    /// Length of the longest chain in `L₀`.
    pub fn l0_dimension(&self) -> usize {
        let l0 = self.l0();
        let mut longest = vec![0usize; self.len()];
        // codim decreasing order walks L₀ upward from the lines
        for &x in l0.iter().rev() {
            for &y in &l0 {
                if y != x && self.is_subflat(x, y) {
                    longest[y] = longest[y].max(longest[x] + 1);
                }
            }
        }
        l0.iter().map(|&x| longest[x]).max().unwrap_or(0)
    }

    pub fn summary(&self) -> LatticeSummary {
        LatticeSummary {
            elements: self
                .elements
                .iter()
                .enumerate()
                .map(|(i, e)| ElementSummary { index: i, codim: e.codim, members: e.members.clone(), mobius: self.mobius[i] })
                .collect(),
            rank_counts: self.rank_counts(),
            characteristic_polynomial: self.characteristic_polynomial(),
        }
    }
}

fn is_proper_subset(a: &[usize], b: &[usize]) -> bool {
    a.len() < b.len() && a.iter().all(|x| b.contains(x))
}

#[derive(Clone, Debug, Serialize)]
pub struct ElementSummary {
    pub index: usize,
    pub codim: usize,
    pub members: Vec<usize>,
    pub mobius: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeSummary {
    pub elements: Vec<ElementSummary>,
    pub rank_counts: Vec<usize>,
    pub characteristic_polynomial: Vec<i64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::catalog;

    #[test]
    fn boolean_two() {
        let l = IntersectionLattice::build(&catalog("boolean", &[2]).unwrap());
        assert_eq!(l.len(), 4);
        let mu: Vec<i64> = (0..4).map(|x| l.mobius(x)).collect();
        assert_eq!(mu, vec![1, -1, -1, 1]);
        assert_eq!(l.characteristic_polynomial(), vec![1, -2, 1]);
        let (x, y) = (l.find(&[0]).unwrap(), l.find(&[1]).unwrap());
        assert_eq!(l.meet(x, y), l.bottom());
        assert_eq!(l.join(x, y), l.top());
    }

    #[test]
    fn braid_three_counts() {
        let l = IntersectionLattice::build(&catalog("braid", &[3]).unwrap());
        assert_eq!(l.rank_counts(), vec![1, 6, 7, 1]);
        assert_eq!(l.characteristic_polynomial(), vec![-6, 11, -6, 1]);
        assert_eq!(l.l0_dimension(), 2);
        let triple = l.lines().into_iter().find(|&x| l.members(x).len() == 3).unwrap();
        assert_eq!(l.localization(triple).len(), 3);
    }

    #[test]
    fn generic_three_four() {
        let l = IntersectionLattice::build(&catalog("generic", &[3, 4]).unwrap());
        assert_eq!(l.rank_counts(), vec![1, 4, 6, 1]);
        assert_eq!(l.characteristic_polynomial(), vec![-3, 6, -4, 1]);
    }

    #[test]
    fn meet_identities() {
        let l = IntersectionLattice::build(&catalog("braid", &[3]).unwrap());
        for x in 0..l.len() {
            assert_eq!(l.meet(x, l.bottom()), l.bottom());
            assert_eq!(l.meet(x, x), x);
            assert_eq!(l.localization(l.top()).len(), 6);
            assert!(l.localization(l.bottom()).is_empty());
        }
    }
}
