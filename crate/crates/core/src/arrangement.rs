//! Central hyperplane arrangements, their text format and a small catalog.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::linalg::{rank_of, ExactMatrix, SparseVec};

/// A linear hyperplane `ker α`, stored by the coefficients of `α`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hyperplane {
    normal: Vec<Scalar>,
}

impl Hyperplane {
    pub fn new(normal: Vec<Scalar>) -> Self {
        Self { normal }
    }

    pub fn normal(&self) -> &[Scalar] {
        &self.normal
    }

    pub fn normal_vec(&self) -> SparseVec {
        SparseVec::from_dense(&self.normal)
    }

    /// Index of the first nonzero coefficient.
    pub fn pivot(&self) -> usize {
        self.normal.iter().position(|c| !c.is_zero()).expect("nonzero normal")
    }
}

/// An essential central arrangement in `field^ell`.
///
/// Equality ignores the optional name.
#[derive(Clone, Debug)]
pub struct Arrangement {
    field: FieldSpec,
    ell: usize,
    hyperplanes: Vec<Hyperplane>,
    name: Option<String>,
}

/// An unexpanded product of defining forms, as indices into the hyperplane list.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FormProduct {
    factors: Vec<usize>,
}

impl FormProduct {
    pub fn new(mut factors: Vec<usize>) -> Self {
        factors.sort_unstable();
        factors.dedup();
        Self { factors }
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    /// Factors of `self` missing from `other` (the quotient when `other | self`).
    pub fn without(&self, other: &FormProduct) -> FormProduct {
        FormProduct { factors: self.factors.iter().copied().filter(|f| !other.factors.contains(f)).collect() }
    }

    pub fn divides(&self, other: &FormProduct) -> bool {
        self.factors.iter().all(|f| other.factors.contains(f))
    }

    pub fn lcm(&self, other: &FormProduct) -> FormProduct {
        FormProduct::new(self.factors.iter().chain(&other.factors).copied().collect())
    }
}

impl PartialEq for Arrangement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.ell == other.ell && self.hyperplanes == other.hyperplanes
    }
}

impl Eq for Arrangement {}

impl Arrangement {
    /// Validates and builds an arrangement.
    pub fn new(field: FieldSpec, ell: usize, normals: Vec<Vec<Scalar>>) -> Result<Self> {
        if ell < 2 {
            return Err(Error::DimensionTooSmall(ell));
        }
        let mut hyperplanes: Vec<Hyperplane> = Vec::with_capacity(normals.len());
        for (index, normal) in normals.into_iter().enumerate() {
            if normal.len() != ell {
                return Err(Error::DimensionMismatch(format!(
                    "hyperplane {index} has {} coefficients, expected {ell}",
                    normal.len()
                )));
            }
            if normal.iter().any(|c| c.field() != field) {
                return Err(Error::DimensionMismatch(format!("hyperplane {index} is over a different field")));
            }
            if normal.iter().all(Scalar::is_zero) {
                return Err(Error::ZeroNormal { index });
            }
            let h = Hyperplane::new(normal);
            for (first, g) in hyperplanes.iter().enumerate() {
                if rank_of(field, [g.normal_vec(), h.normal_vec()]) < 2 {
                    return Err(Error::DuplicateHyperplane { first, second: index });
                }
            }
            hyperplanes.push(h);
        }
        let rank = rank_of(field, hyperplanes.iter().map(Hyperplane::normal_vec));
        if rank < ell {
            return Err(Error::NonEssential { rank, ell });
        }
        Ok(Self { field, ell, hyperplanes, name: None })
    }

    pub fn from_i64(field: FieldSpec, ell: usize, normals: &[Vec<i64>]) -> Result<Self> {
        Self::new(field, ell, normals.iter().map(|n| n.iter().map(|&c| field.from_i64(c)).collect()).collect())
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn len(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperplanes.is_empty()
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    pub fn hyperplane(&self, i: usize) -> &Hyperplane {
        &self.hyperplanes[i]
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| format!("arrangement({}, {})", self.ell, self.len()))
    }

    pub fn normals_matrix(&self) -> ExactMatrix {
        ExactMatrix::from_rows(self.field, self.ell, self.hyperplanes.iter().map(Hyperplane::normal_vec).collect())
    }

    /// `Q(A) = ∏ α_H` as a form product.
    pub fn defining_form(&self) -> FormProduct {
        FormProduct::new((0..self.len()).collect())
    }

    /// `Q(X)`: the product of the forms whose hyperplanes do not contain `X`.
    ///
    /// `members` is the localization `A_X`.
    pub fn cofactor_forms(&self, members: &[usize]) -> Result<FormProduct> {
        if let Some(&bad) = members.iter().find(|&&m| m >= self.len()) {
            return Err(Error::NotInLattice(bad));
        }
        Ok(FormProduct::new((0..self.len()).filter(|i| !members.contains(i)).collect()))
    }

    /// The restriction to the hyperplanes in `members`, in the same ambient space.
    /// The result may be non-essential, so it is returned as plain normals.
    pub fn localization_normals(&self, members: &[usize]) -> Vec<&Hyperplane> {
        members.iter().map(|&i| &self.hyperplanes[i]).collect()
    }

    /// Writes the line-oriented text format.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        if let Some(name) = &self.name {
            let _ = writeln!(out, "name {name}");
        }
        match self.field {
            FieldSpec::Rationals => out.push_str("field Q\n"),
            FieldSpec::PrimeField { characteristic } => {
                let _ = writeln!(out, "field Fp {characteristic}");
            }
        }
        let _ = writeln!(out, "dim {}", self.ell);
        for h in &self.hyperplanes {
            out.push_str("hyperplane");
            for c in h.normal() {
                let _ = write!(out, " {c}");
            }
            out.push('\n');
        }
        out
    }
}

/// Parses the arrangement text format.
///
/// ```text
/// # comments and blank lines are ignored
/// name my arrangement  # optional
/// field Q            # or: field Fp <prime>
/// dim 3
/// hyperplane 1 0 0
/// hyperplane 1 -1 1/2
/// ```
pub fn parse_arrangement(text: &str) -> Result<Arrangement> {
    let mut field: Option<FieldSpec> = None;
    let mut ell: Option<usize> = None;
    let mut normals = Vec::new();
    let mut name: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let malformed = |message: String| Error::Malformed { line: lineno + 1, message };
        let mut words = line.split_whitespace();
        let keyword = words.next().unwrap_or("");
        let rest: Vec<&str> = words.collect();
        match keyword {
            "name" if name.is_none() && !rest.is_empty() => name = Some(rest.join(" ")),
            "field" if field.is_none() => {
                field = Some(match rest.as_slice() {
                    ["Q"] => FieldSpec::Rationals,
                    ["Fp", p] => {
                        let p: u64 = p.parse().map_err(|_| malformed(format!("invalid characteristic `{p}`")))?;
                        FieldSpec::prime(p)?
                    }
                    _ => return Err(malformed("expected `field Q` or `field Fp <prime>`".into())),
                });
            }
            "dim" if field.is_some() && ell.is_none() => {
                let d = match rest.as_slice() {
                    [d] => d.parse::<usize>().map_err(|_| malformed(format!("invalid dimension `{d}`")))?,
                    _ => return Err(malformed("expected `dim <ell>`".into())),
                };
                if d < 2 {
                    return Err(Error::DimensionTooSmall(d));
                }
                ell = Some(d);
            }
            "hyperplane" if ell.is_some() => {
                let f = field.expect("field precedes dim");
                let d = ell.expect("checked");
                if rest.len() != d {
                    return Err(malformed(format!("expected {d} coefficients, found {}", rest.len())));
                }
                let normal = rest
                    .iter()
                    .map(|w| f.parse_scalar(w))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| malformed(e.to_string()))?;
                normals.push(normal);
            }
            _ => return Err(malformed(format!("unexpected line `{line}`"))),
        }
    }
    let field = field.ok_or_else(|| Error::Parse("missing `field` line".into()))?;
    let ell = ell.ok_or_else(|| Error::Parse("missing `dim` line".into()))?;
    let a = Arrangement::new(field, ell, normals)?;
    Ok(match name {
        Some(n) => a.with_name(n),
        None => a,
    })
}

/// Quotients out the common intersection `T(A)`, returning an essential
/// arrangement in dimension `rank`.
pub fn essentialize(field: FieldSpec, normals: &[Vec<Scalar>]) -> Result<Arrangement> {
    let ell = normals.first().map_or(0, Vec::len);
    let m = ExactMatrix::from_rows(field, ell, normals.iter().map(|n| SparseVec::from_dense(n)).collect());
    let (rref, pivots) = m.rref();
    // coordinates of each normal in the rref row basis are its entries at the pivots
    let reduced = normals
        .iter()
        .map(|n| pivots.iter().map(|&p| n[p].clone()).collect::<Vec<_>>())
        .collect::<Vec<_>>();
    debug_assert!(normals.iter().zip(&reduced).all(|(n, c)| {
        let mut v = SparseVec::new();
        for (k, ck) in c.iter().enumerate() {
            v.axpy(ck, rref.row(k));
        }
        v == SparseVec::from_dense(n)
    }));
    Arrangement::new(field, pivots.len(), reduced)
}

/// Named arrangements over ℚ.
pub fn catalog(name: &str, params: &[usize]) -> Result<Arrangement> {
    let q = FieldSpec::Rationals;
    let invalid = |m: &str| Error::InvalidParameters(format!("{name}: {m}"));
    let unit = |ell: usize, i: usize| (0..ell).map(|j| i64::from(i == j)).collect::<Vec<i64>>();
    match name {
        "boolean" => {
            let &[ell] = params else { return Err(invalid("expected one parameter ell")) };
            let normals: Vec<Vec<i64>> = (0..ell).map(|i| unit(ell, i)).collect();
            Ok(Arrangement::from_i64(q, ell, &normals)?.with_name(format!("boolean {ell}")))
        }
        "braid" => {
            // x_0 = 0 slice of x_i - x_j in ell + 1 coordinates
            let &[ell] = params else { return Err(invalid("expected one parameter ell")) };
            let mut normals: Vec<Vec<i64>> = (0..ell).map(|i| unit(ell, i)).collect();
            for i in 0..ell {
                for j in i + 1..ell {
                    let mut n = vec![0; ell];
                    n[i] = 1;
                    n[j] = -1;
                    normals.push(n);
                }
            }
            Ok(Arrangement::from_i64(q, ell, &normals)?.with_name(format!("braid {ell}")))
        }
        "generic" => {
            let &[ell, n] = params else { return Err(invalid("expected parameters ell n")) };
            if n < ell {
                return Err(invalid("need n >= ell"));
            }
            let mut normals: Vec<Vec<i64>> = (0..ell).map(|i| unit(ell, i)).collect();
            for t in 1..=(n - ell) as i64 {
                normals.push((0..ell as u32).map(|k| t.pow(k)).collect());
            }
            let a = Arrangement::from_i64(q, ell, &normals)?;
            if !every_subset_independent(&a) {
                return Err(invalid("normals are not in general position"));
            }
            Ok(a.with_name(format!("generic {ell} {n}")))
        }
        "near-pencil" => {
            let &[n] = params else { return Err(invalid("expected one parameter n")) };
            if n < 3 {
                return Err(invalid("need n >= 3"));
            }
            // n - 1 planes through the z-axis plus z = 0
            let mut normals: Vec<Vec<i64>> = vec![vec![0, 1, 0]];
            for i in 0..(n - 2) as i64 {
                normals.push(vec![1, i, 0]);
            }
            normals.push(vec![0, 0, 1]);
            Ok(Arrangement::from_i64(q, 3, &normals)?.with_name(format!("near-pencil {n}")))
        }
        _ => Err(Error::UnknownCatalog(name.to_string())),
    }
}

/// Parses a catalog spec such as `braid 3`, `generic 3 4` or `generic(3,4)`.
pub fn catalog_from_spec(spec: &str) -> Result<Arrangement> {
    let cleaned: String = spec.chars().map(|c| if matches!(c, '(' | ')' | ',') { ' ' } else { c }).collect();
    let mut words = cleaned.split_whitespace();
    let name = words.next().ok_or_else(|| Error::UnknownCatalog(spec.to_string()))?;
    let params = words
        .map(|w| w.parse::<usize>().map_err(|_| Error::InvalidParameters(format!("`{w}` is not a nonnegative integer"))))
        .collect::<Result<Vec<_>>>()?;
    catalog(name, &params)
}

fn every_subset_independent(a: &Arrangement) -> bool {
    fn rec(a: &Arrangement, start: usize, chosen: &mut Vec<usize>) -> bool {
        if chosen.len() == a.ell() {
            return rank_of(a.field(), chosen.iter().map(|&i| a.hyperplane(i).normal_vec())) == a.ell();
        }
        (start..a.len()).all(|i| {
            chosen.push(i);
            let ok = rec(a, i + 1, chosen);
            chosen.pop();
            ok
        })
    }
    rec(a, 0, &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_boolean_two() {
        let a = parse_arrangement("field Q\ndim 2\nhyperplane 1 0\nhyperplane 0 1\n").unwrap();
        assert_eq!(a, catalog("boolean", &[2]).unwrap());
    }

    #[test]
    fn rejects_duplicates_and_non_essential() {
        let dup = parse_arrangement("field Q\ndim 2\nhyperplane 1 0\nhyperplane 0 1\nhyperplane 2 0\n");
        assert!(matches!(dup, Err(Error::DuplicateHyperplane { first: 0, second: 2 })));
        let flat = parse_arrangement("field Q\ndim 3\nhyperplane 1 0 0\nhyperplane 0 1 0\n");
        assert!(matches!(flat, Err(Error::NonEssential { rank: 2, ell: 3 })));
        assert!(matches!(parse_arrangement("field Q\ndim 1\n"), Err(Error::DimensionTooSmall(1))));
        assert!(matches!(parse_arrangement("field Fp 4\ndim 2\n"), Err(Error::NotPrime(4))));
        assert!(matches!(
            parse_arrangement("field Q\ndim 2\nhyperplane 1\n"),
            Err(Error::Malformed { line: 3, .. })
        ));
        assert!(parse_arrangement("dim 2\n").is_err());
    }

    #[test]
    fn parses_rationals_and_comments() {
        let a = parse_arrangement("# a pencil\nfield Q\ndim 2\nhyperplane 1/2 0 # x\nhyperplane 0 1\nhyperplane 1 -1\n").unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a.hyperplane(0).normal()[0], FieldSpec::Rationals.parse_scalar("1/2").unwrap());
    }

    #[test]
    fn prime_field_reduces_coefficients() {
        let a = parse_arrangement("field Fp 5\ndim 2\nhyperplane 1 0\nhyperplane 0 1\nhyperplane 6 -1\n").unwrap();
        let f = a.field();
        assert_eq!(a.hyperplane(2).normal(), &[f.from_i64(1), f.from_i64(4)]);
        // 1,1 and 6,6 coincide mod 5
        assert!(parse_arrangement("field Fp 5\ndim 2\nhyperplane 1 1\nhyperplane 6 6\nhyperplane 1 0\n").is_err());
    }

    #[test]
    fn catalog_entries() {
        let b3 = catalog("boolean", &[3]).unwrap();
        assert_eq!(b3.len(), 3);
        let br = catalog("braid", &[3]).unwrap();
        assert_eq!(br.len(), 6);
        assert_eq!(br.normals_matrix().rank(), 3);
        let g = catalog("generic", &[3, 4]).unwrap();
        assert_eq!(g.hyperplane(3).normal_vec(), SparseVec::from_dense(&[1, 1, 1].map(|c| FieldSpec::Rationals.from_i64(c))));
        assert!(every_subset_independent(&g));
        assert!(catalog("generic", &[3, 6]).is_ok());
        assert_eq!(catalog("near-pencil", &[5]).unwrap().len(), 5);
        assert!(matches!(catalog("nope", &[]), Err(Error::UnknownCatalog(_))));
        assert!(matches!(catalog("braid", &[1]), Err(Error::DimensionTooSmall(1))));
        assert!(catalog_from_spec("generic(3,5)").is_ok());
    }

    #[test]
    fn cofactor_forms_partition() {
        let b2 = catalog("boolean", &[2]).unwrap();
        assert_eq!(b2.cofactor_forms(&[0]).unwrap().factors(), &[1]);
        assert_eq!(b2.cofactor_forms(&[]).unwrap().factors(), &[0, 1]);
        assert!(b2.cofactor_forms(&[7]).is_err());
    }

    #[test]
    fn essentialize_drops_common_intersection() {
        let q = FieldSpec::Rationals;
        let normals: Vec<Vec<Scalar>> = [[1, 0, 0], [0, 1, 0], [1, 1, 0]]
            .iter()
            .map(|r| r.iter().map(|&c| q.from_i64(c)).collect())
            .collect();
        let a = essentialize(q, &normals).unwrap();
        assert_eq!(a.ell(), 2);
        assert_eq!(a.len(), 3);
    }
}
