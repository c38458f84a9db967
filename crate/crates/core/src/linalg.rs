//! Exact linear algebra over a [`FieldSpec`].
//!
//! Everything is stored sparsely: vectors are sorted `(index, value)` lists
//! without explicit zeros, and matrices are lists of sparse rows. Elimination
//! always pivots on the first nonzero column, so every basis produced here is
//! deterministic.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};

/// A sparse vector: strictly increasing indices, no stored zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVec {
    entries: Vec<(usize, Scalar)>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    /// Builds from arbitrary `(index, value)` pairs, summing duplicates.
    pub fn from_pairs(mut pairs: Vec<(usize, Scalar)>) -> Self {
        pairs.sort_by_key(|(i, _)| *i);
        let mut entries: Vec<(usize, Scalar)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            match entries.last_mut() {
                Some((j, acc)) if *j == i => *acc = &*acc + &v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|(_, v)| !v.is_zero());
        Self { entries }
    }

    pub fn from_dense(values: &[Scalar]) -> Self {
        Self {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i, v.clone()))
                .collect(),
        }
    }

    pub fn unit(index: usize, field: FieldSpec) -> Self {
        Self { entries: vec![(index, field.one())] }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, Scalar)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(usize, Scalar)> {
        self.entries
    }

    pub fn leading(&self) -> Option<&(usize, Scalar)> {
        self.entries.first()
    }

    pub fn get(&self, index: usize) -> Option<&Scalar> {
        self.entries
            .binary_search_by_key(&index, |(i, _)| *i)
            .ok()
            .map(|pos| &self.entries[pos].1)
    }

    pub fn to_dense(&self, len: usize, field: FieldSpec) -> Vec<Scalar> {
        let mut out = vec![field.zero(); len];
        for (i, v) in &self.entries {
            out[*i] = v.clone();
        }
        out
    }

    pub fn scale(&self, factor: &Scalar) -> SparseVec {
        if factor.is_zero() {
            return SparseVec::new();
        }
        Self { entries: self.entries.iter().map(|(i, v)| (*i, v * factor)).collect() }
    }

    pub fn neg(&self) -> SparseVec {
        Self { entries: self.entries.iter().map(|(i, v)| (*i, -v)).collect() }
    }

    /// Adds `offset` to every index.
    pub fn shifted(&self, offset: usize) -> SparseVec {
        Self { entries: self.entries.iter().map(|(i, v)| (i + offset, v.clone())).collect() }
    }

    /// `self += factor * other`.
    pub fn axpy(&mut self, factor: &Scalar, other: &SparseVec) {
        if factor.is_zero() || other.is_empty() {
            return;
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let mut a = std::mem::take(&mut self.entries).into_iter().peekable();
        let mut b = other.entries.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (Some((ia, _)), Some((ib, _))) if ia < ib => out.push(a.next().unwrap()),
                (Some((ia, _)), Some((ib, _))) if ia > ib => {
                    let (i, v) = b.next().unwrap();
                    out.push((*i, factor * v));
                }
                (Some(_), Some(_)) => {
                    let (i, mut v) = a.next().unwrap();
                    let (_, w) = b.next().unwrap();
                    v.add_mul_assign(factor, w);
                    if !v.is_zero() {
                        out.push((i, v));
                    }
                }
                (Some(_), None) => out.push(a.next().unwrap()),
                (None, Some(_)) => {
                    let (i, v) = b.next().unwrap();
                    out.push((*i, factor * v));
                }
                (None, None) => break,
            }
        }
        self.entries = out;
    }

    pub fn dot_dense(&self, dense: &[Scalar], field: FieldSpec) -> Scalar {
        let mut acc = field.zero();
        for (i, v) in &self.entries {
            acc.add_mul_assign(v, &dense[*i]);
        }
        acc
    }
}

/// A row-echelon basis built one vector at a time.
///
/// Each stored row has leading coefficient one and no two rows share a
/// leading index. Rows are only partially reduced until [`Self::into_rref`].
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    field: FieldSpec,
    rows: BTreeMap<usize, SparseVec>,
}

impl EchelonBasis {
    pub fn new(field: FieldSpec) -> Self {
        Self { field, rows: BTreeMap::new() }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the stored rows until its leading index is new.
    pub fn reduce_leading(&self, mut v: SparseVec) -> SparseVec {
        while let Some((lead, coeff)) = v.leading() {
            match self.rows.get(lead) {
                Some(row) => {
                    let factor = -coeff;
                    v.axpy(&factor, row);
                }
                None => break,
            }
        }
        v
    }

    /// Inserts `v`; returns whether it was independent of the stored rows.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let v = self.reduce_leading(v);
        match v.leading() {
            None => false,
            Some((lead, coeff)) => {
                let lead = *lead;
                let inv = coeff.inv();
                self.rows.insert(lead, v.scale(&inv));
                true
            }
        }
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce_leading(v.clone()).is_empty()
    }

    /// Back-substitutes into reduced row echelon form; rows ordered by pivot.
    pub fn into_rref(self) -> (Vec<usize>, Vec<SparseVec>) {
        let pivots: Vec<usize> = self.rows.keys().copied().collect();
        let mut rows: Vec<SparseVec> = self.rows.into_values().collect();
        for r in (0..rows.len()).rev() {
            // rows below r are already fully reduced
            let mut row = std::mem::take(&mut rows[r]);
            let mut k = r + 1;
            while k < rows.len() {
                let p = pivots[k];
                if let Some(c) = row.get(p) {
                    let factor = -c;
                    row.axpy(&factor, &rows[k]);
                }
                k += 1;
            }
            rows[r] = row;
        }
        (pivots, rows)
    }
}

/// A matrix of field elements, stored as sparse rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMatrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<SparseVec>,
}

impl ExactMatrix {
    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Self { field, rows, cols, data: vec![SparseVec::new(); rows] }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        Self {
            field,
            rows: n,
            cols: n,
            data: (0..n).map(|i| SparseVec::unit(i, field)).collect(),
        }
    }

    pub fn from_i64(field: FieldSpec, grid: &[Vec<i64>]) -> Self {
        let cols = grid.first().map_or(0, Vec::len);
        let data = grid
            .iter()
            .map(|row| {
                assert_eq!(row.len(), cols, "ragged matrix literal");
                SparseVec::from_dense(&row.iter().map(|&v| field.from_i64(v)).collect::<Vec<_>>())
            })
            .collect();
        Self { field, rows: grid.len(), cols, data }
    }

    pub fn from_rows(field: FieldSpec, cols: usize, rows: Vec<SparseVec>) -> Self {
        debug_assert!(rows.iter().all(|r| r.entries().last().map_or(true, |(i, _)| *i < cols)));
        Self { field, rows: rows.len(), cols, data: rows }
    }

    pub fn from_columns(field: FieldSpec, rows: usize, columns: &[SparseVec]) -> Self {
        let mut data = vec![Vec::new(); rows];
        for (c, col) in columns.iter().enumerate() {
            for (r, v) in col.entries() {
                data[*r].push((c, v.clone()));
            }
        }
        Self {
            field,
            rows,
            cols: columns.len(),
            data: data.into_iter().map(|entries| SparseVec { entries }).collect(),
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &SparseVec {
        &self.data[r]
    }

    pub fn row_vectors(&self) -> &[SparseVec] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        self.data[r].get(c).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn columns(&self) -> Vec<SparseVec> {
        let mut cols = vec![Vec::new(); self.cols];
        for (r, row) in self.data.iter().enumerate() {
            for (c, v) in row.entries() {
                cols[*c].push((r, v.clone()));
            }
        }
        cols.into_iter().map(|entries| SparseVec { entries }).collect()
    }

    pub fn transpose(&self) -> ExactMatrix {
        ExactMatrix { field: self.field, rows: self.cols, cols: self.rows, data: self.columns() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(SparseVec::is_empty)
    }

    pub fn to_dense(&self) -> Vec<Vec<Scalar>> {
        self.data.iter().map(|r| r.to_dense(self.cols, self.field)).collect()
    }

    pub fn mul(&self, other: &ExactMatrix) -> Result<ExactMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .map(|row| {
                let mut acc = SparseVec::new();
                for (k, v) in row.entries() {
                    acc.axpy(v, &other.data[*k]);
                }
                acc
            })
            .collect();
        Ok(ExactMatrix { field: self.field, rows: self.rows, cols: other.cols, data })
    }

    /// Applies the matrix to a sparse column vector.
    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let dense = v.to_dense(self.cols, self.field);
        SparseVec::from_pairs(
            self.data
                .iter()
                .enumerate()
                .map(|(r, row)| (r, row.dot_dense(&dense, self.field)))
                .collect(),
        )
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &ExactMatrix) -> Result<ExactMatrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch("vstack column counts differ".into()));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(ExactMatrix { field: self.field, rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (ExactMatrix, Vec<usize>) {
        let mut basis = EchelonBasis::new(self.field);
        for row in &self.data {
            basis.insert(row.clone());
        }
        let (pivots, mut rows) = basis.into_rref();
        rows.resize(self.rows, SparseVec::new());
        (ExactMatrix { field: self.field, rows: self.rows, cols: self.cols, data: rows }, pivots)
    }

    pub fn rank(&self) -> usize {
        rank_of(self.field, self.data.iter().cloned())
    }

    /// Columns form a basis of the right null space.
    pub fn kernel_basis(&self) -> ExactMatrix {
        let cols = kernel_vectors(self.field, self.cols, self.data.iter().cloned());
        ExactMatrix::from_columns(self.field, self.cols, &cols)
    }

    /// A particular solution of `self · x = rhs`, or `None` when inconsistent.
    pub fn solve_consistent(&self, rhs: &[Scalar]) -> Result<Option<Vec<Scalar>>> {
        if rhs.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has length {}, matrix has {} rows",
                rhs.len(),
                self.rows
            )));
        }
        let aug = self.cols;
        let mut basis = EchelonBasis::new(self.field);
        for (row, b) in self.data.iter().zip(rhs) {
            let mut r = row.clone();
            if !b.is_zero() {
                r.entries.push((aug, b.clone()));
            }
            basis.insert(r);
        }
        let (pivots, rows) = basis.into_rref();
        if pivots.last() == Some(&aug) {
            return Ok(None);
        }
        let mut x = vec![self.field.zero(); self.cols];
        for (p, row) in pivots.iter().zip(&rows) {
            if let Some(v) = row.get(aug) {
                x[*p] = v.clone();
            }
        }
        Ok(Some(x))
    }
}

/// Rank of the span of the given vectors.
pub fn rank_of(field: FieldSpec, vectors: impl IntoIterator<Item = SparseVec>) -> usize {
    let mut basis = EchelonBasis::new(field);
    for v in vectors {
        basis.insert(v);
    }
    basis.rank()
}

/// Basis of `{x : row · x = 0 for all rows}` in dimension `cols`.
pub fn kernel_vectors(field: FieldSpec, cols: usize, rows: impl IntoIterator<Item = SparseVec>) -> Vec<SparseVec> {
    keyed_kernel(field, cols, rows).1
}

/// Kernel basis together with its free columns: vector `k` has a one at the
/// `k`-th free column and zeros at the other free columns.
fn keyed_kernel(
    field: FieldSpec,
    cols: usize,
    rows: impl IntoIterator<Item = SparseVec>,
) -> (Vec<usize>, Vec<SparseVec>) {
    let mut basis = EchelonBasis::new(field);
    for r in rows {
        basis.insert(r);
    }
    let (pivots, rref) = basis.into_rref();
    let mut is_pivot = vec![false; cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut free_slot = vec![usize::MAX; cols];
    let mut free = Vec::new();
    let mut out: Vec<Vec<(usize, Scalar)>> = Vec::new();
    for c in 0..cols {
        if !is_pivot[c] {
            free_slot[c] = out.len();
            free.push(c);
            out.push(vec![(c, field.one())]);
        }
    }
    for (p, row) in pivots.iter().zip(&rref) {
        for (c, v) in row.entries() {
            if *c != *p {
                out[free_slot[*c]].push((*p, -v));
            }
        }
    }
    (free, out.into_iter().map(SparseVec::from_pairs).collect())
}

/// A subspace of `field^ambient`, held as a reduced echelon basis.
///
/// Basis vector `i` has coefficient one at `keys[i]` and zero at every other
/// key, so the coordinates of a member vector are its entries at the keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    field: FieldSpec,
    ambient: usize,
    keys: Vec<usize>,
    basis: Vec<SparseVec>,
}

impl Subspace {
    pub fn zero(field: FieldSpec, ambient: usize) -> Self {
        Self { field, ambient, keys: Vec::new(), basis: Vec::new() }
    }

    pub fn full(field: FieldSpec, ambient: usize) -> Self {
        Self {
            field,
            ambient,
            keys: (0..ambient).collect(),
            basis: (0..ambient).map(|i| SparseVec::unit(i, field)).collect(),
        }
    }

    pub fn span(field: FieldSpec, ambient: usize, vectors: impl IntoIterator<Item = SparseVec>) -> Self {
        let mut basis = EchelonBasis::new(field);
        for v in vectors {
            basis.insert(v);
        }
        let (keys, basis) = basis.into_rref();
        Self { field, ambient, keys, basis }
    }

    /// Null space of the given rows, keyed at the free columns.
    pub fn kernel(field: FieldSpec, ambient: usize, rows: impl IntoIterator<Item = SparseVec>) -> Self {
        let (keys, basis) = keyed_kernel(field, ambient, rows);
        let s = Self { field, ambient, keys, basis };
        debug_assert!(s.keys_are_clean());
        s
    }

    fn keys_are_clean(&self) -> bool {
        self.basis.iter().enumerate().all(|(i, b)| {
            self.keys.iter().enumerate().all(|(j, k)| match b.get(*k) {
                Some(v) => i == j && v.is_one(),
                None => i != j,
            })
        })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn keys(&self) -> &[usize] {
        &self.keys
    }

    pub fn basis(&self) -> &[SparseVec] {
        &self.basis
    }

    /// Basis vectors as the columns of an `ambient × dim` matrix.
    pub fn basis_matrix(&self) -> ExactMatrix {
        ExactMatrix::from_columns(self.field, self.ambient, &self.basis)
    }

    /// Normal form of `v` modulo the subspace; zero exactly on members.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut out = v.clone();
        for (k, b) in self.keys.iter().zip(&self.basis) {
            if let Some(c) = out.get(*k).cloned() {
                out.axpy(&-c, b);
            }
        }
        out
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Coordinates of a member vector in this basis.
    pub fn coordinates(&self, v: &SparseVec) -> Result<SparseVec> {
        let coords = SparseVec::from_pairs(
            self.keys
                .iter()
                .enumerate()
                .filter_map(|(i, k)| v.get(*k).map(|c| (i, c.clone())))
                .collect(),
        );
        let mut residual = v.clone();
        for (i, c) in coords.entries() {
            residual.axpy(&-c, &self.basis[*i]);
        }
        if !residual.is_empty() {
            return Err(Error::NotInSubspace(format!(
                "residual with {} nonzero entries in ambient dimension {}",
                residual.nnz(),
                self.ambient
            )));
        }
        Ok(coords)
    }

    /// The vector with the given coordinates.
    pub fn combine(&self, coords: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, c) in coords.entries() {
            out.axpy(c, &self.basis[*i]);
        }
        out
    }

    /// Matrix of the inclusion `self ⊆ target` in the two bases.
    pub fn inclusion_into(&self, target: &Subspace) -> Result<ExactMatrix> {
        let cols = self
            .basis
            .iter()
            .map(|b| target.coordinates(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExactMatrix::from_columns(self.field, target.dim(), &cols))
    }

    /// `{v ∈ field^source : images(v) ∈ target}`, where `images[i]` is the image of `e_i`.
    pub fn preimage(field: FieldSpec, source: usize, images: &[SparseVec], target: &Subspace) -> Subspace {
        let reduced: Vec<SparseVec> = images.iter().map(|v| target.reduce(v)).collect();
        let rel = ExactMatrix::from_columns(field, target.ambient(), &reduced);
        Subspace::kernel(field, source, rel.row_vectors().iter().cloned())
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient && self.basis.iter().all(|b| other.contains(b))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        Subspace::span(self.field, self.ambient, self.basis.iter().chain(&other.basis).cloned())
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        // combinations of our basis whose normal form modulo `other` vanishes
        let images: Vec<SparseVec> = self.basis.iter().map(|b| other.reduce(b)).collect();
        let rel = ExactMatrix::from_columns(self.field, self.ambient, &images);
        let kernel = kernel_vectors(self.field, self.dim(), rel.row_vectors().iter().cloned());
        Subspace::span(self.field, self.ambient, kernel.iter().map(|k| self.combine(k)))
    }
}
