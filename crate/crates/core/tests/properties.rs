use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use arrsheaf::cech::{
    build_cech_complex, cover_cohomology, CoverIndex, CoverKind, DerivationSheaf, Engine, StructureSheaf, DEFAULT_TUPLE_CAP,
};
use arrsheaf::poly::{mul_blocks, Poly};
use arrsheaf::truncation::{truncated_section, DerivationModule, PolynomialRing};
use arrsheaf::{catalog, parse_arrangement, Derivations, ExactMatrix, FieldSpec, IntersectionLattice, Scalar, SparseVec, Subspace};

const Q: FieldSpec = FieldSpec::Rationals;

fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..5, 1usize..6).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-3i64..=3, c), r))
}

fn dense(v: &SparseVec, n: usize) -> Vec<Scalar> {
    v.to_dense(n, Q)
}

proptest! {
    #[test]
    fn rank_plus_nullity(grid in small_matrix()) {
        let m = ExactMatrix::from_i64(Q, &grid);
        let k = m.kernel_basis();
        prop_assert_eq!(m.rank() + k.cols(), m.cols());
        prop_assert!(m.mul(&k).unwrap().is_zero());
    }

    #[test]
    fn rref_is_idempotent(grid in small_matrix()) {
        let m = ExactMatrix::from_i64(Q, &grid);
        let (r, pivots) = m.rref();
        let (rr, pivots2) = r.rref();
        prop_assert_eq!(r.to_dense(), rr.to_dense());
        prop_assert_eq!(pivots, pivots2);
    }

    #[test]
    fn rref_keeps_row_space(grid in small_matrix()) {
        let m = ExactMatrix::from_i64(Q, &grid);
        let (r, _) = m.rref();
        let a = Subspace::span(Q, m.cols(), m.row_vectors().iter().cloned());
        let b = Subspace::span(Q, m.cols(), r.row_vectors().iter().cloned());
        prop_assert!(a.is_subspace_of(&b) && b.is_subspace_of(&a));
    }

    #[test]
    fn prime_field_kernel_by_enumeration(grid in prop::collection::vec(prop::collection::vec(0i64..3, 4), 1..4)) {
        let f = FieldSpec::prime(3).unwrap();
        let m = ExactMatrix::from_i64(f, &grid);
        let mut count = 0usize;
        for code in 0..81usize {
            let x: Vec<i64> = (0..4).map(|i| (code / 3usize.pow(i)) as i64 % 3).collect();
            let zero = grid.iter().all(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum::<i64>() % 3 == 0);
            count += usize::from(zero);
        }
        prop_assert_eq!(count, 3usize.pow((4 - m.rank()) as u32));
    }

    #[test]
    fn intersection_and_sum_dimensions(a in small_matrix(), b in small_matrix()) {
        let n = a[0].len().min(b[0].len());
        let cut = |g: &Vec<Vec<i64>>| g.iter().map(|r| SparseVec::from_dense(&r[..n].iter().map(|&v| Q.from_i64(v)).collect::<Vec<_>>())).collect::<Vec<_>>();
        let (u, w) = (Subspace::span(Q, n, cut(&a)), Subspace::span(Q, n, cut(&b)));
        prop_assert_eq!(u.sum(&w).dim() + u.intersection(&w).dim(), u.dim() + w.dim());
        for v in u.intersection(&w).basis() {
            prop_assert!(u.contains(v) && w.contains(v));
        }
    }

    #[test]
    fn parse_serialize_round_trip(rows in prop::collection::vec(prop::collection::vec(-4i64..=4, 3), 3..7), p in prop::sample::select(vec![0u64, 5, 7])) {
        let field = if p == 0 { Q } else { FieldSpec::prime(p).unwrap() };
        let Ok(a) = arrsheaf::Arrangement::from_i64(field, 3, &rows) else { return Ok(()) };
        let b = parse_arrangement(&a.serialize()).unwrap();
        prop_assert_eq!(a.serialize(), b.serialize());
        prop_assert_eq!(a.len(), b.len());
    }

    #[test]
    fn euler_lies_in_every_localization(seed in 0u64..1000) {
        let a = catalog("braid", &[3]).unwrap();
        let ders = Derivations::new(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut members: Vec<usize> = (0..a.len()).filter(|_| rng.gen_bool(0.5)).collect();
        members.sort_unstable();
        prop_assert!(ders.space(&members, 1).contains(&ders.euler()));
    }
}

#[test]
fn rationals_stay_exact() {
    let m = ExactMatrix::from_i64(Q, &[vec![3, 1], vec![1, 3]]);
    let x = m.solve_consistent(&[Q.from_i64(1), Q.from_i64(0)]).unwrap().unwrap();
    assert_eq!(x[0].to_string(), "3/8");
    assert_eq!(x[1].to_string(), "-1/8");
    let v = SparseVec::from_dense(&x);
    assert_eq!(dense(&v, 2), x);
}

#[test]
fn inclusions_compose() {
    for (name, params) in [("braid", vec![3]), ("generic", vec![3, 5]), ("boolean", vec![3])] {
        let a = catalog(name, &params).unwrap();
        let l = IntersectionLattice::build(&a);
        let ders = Derivations::new(&a);
        for d in 0..4 {
            for z in 0..l.len() {
                for y in 0..l.len() {
                    if !l.is_subflat(z, y) {
                        continue;
                    }
                    for x in 0..l.len() {
                        if !l.is_subflat(y, x) {
                            continue;
                        }
                        let zy = ders.inclusion_matrix(&l, z, y, d).unwrap();
                        let yx = ders.inclusion_matrix(&l, y, x, d).unwrap();
                        let zx = ders.inclusion_matrix(&l, z, x, d).unwrap();
                        assert_eq!(yx.mul(&zy).unwrap().to_dense(), zx.to_dense(), "{name} {z} {y} {x} d={d}");
                    }
                }
            }
        }
    }
}

#[test]
fn coboundary_squares_to_zero() {
    let a = catalog("braid", &[3]).unwrap();
    let l = IntersectionLattice::build(&a);
    let ders = Derivations::new(&a);
    let sheaf = DerivationSheaf { lattice: &l, derivations: &ders };
    for kind in [CoverKind::Minimal, CoverKind::Full] {
        let cover = CoverIndex::new(&l, kind);
        for d in [0, 2] {
            let c = build_cech_complex(&sheaf, &cover, d, 3, DEFAULT_TUPLE_CAP).unwrap();
            assert!(c.is_complex());
        }
    }
    let o = StructureSheaf::new(&a, &l, 2);
    let c = build_cech_complex(&o, &CoverIndex::new(&l, CoverKind::Minimal), -3, 3, DEFAULT_TUPLE_CAP).unwrap();
    assert!(c.is_complex());
}

#[test]
fn truncation_embeds_into_next_level() {
    let a = catalog("generic", &[3, 4]).unwrap();
    let ders = Derivations::new(&a);
    let module = DerivationModule::global(&ders);
    let ring = PolynomialRing { field: Q, ell: 3 };
    let x = Poly::variable(Q, 3, 0);
    let rest = Poly::variable(Q, 3, 1).mul(&Poly::variable(Q, 3, 2));
    for d in -3..3 {
        for k in 1..4 {
            // chart D(x1) inside D(x1 x2 x3): multiplier x1, cofactor x2 x3
            let here = truncated_section(&module, 1, &rest.pow(k), k, d);
            let next = truncated_section(&module, 1, &rest.pow(k + 1), k + 1, d);
            let step = x.mul(&rest);
            let top = (d + 3 * k as i64) as usize;
            for b in here.basis() {
                assert!(next.contains(&mul_blocks(&step, b, 3, top)), "D d={d} K={k}");
            }
            let here = truncated_section(&ring, 1, &rest.pow(k), k, d);
            let next = truncated_section(&ring, 1, &rest.pow(k + 1), k + 1, d);
            assert!(here.dim() <= next.dim());
            for b in here.basis() {
                assert!(next.contains(&mul_blocks(&step, b, 1, top)), "O d={d} K={k}");
            }
        }
    }
}

#[test]
fn engines_agree_on_random_degrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let entries = [("boolean", vec![2]), ("boolean", vec![3]), ("generic", vec![3, 4]), ("near-pencil", vec![4])];
    for (name, params) in entries {
        let a = catalog(name, &params).unwrap();
        let l = IntersectionLattice::build(&a);
        let ders = Derivations::new(&a);
        let sheaf = DerivationSheaf { lattice: &l, derivations: &ders };
        let cover = CoverIndex::new(&l, CoverKind::Minimal);
        let top = cover.centers.len() - 1;
        let mut degrees: Vec<i64> = (-2..4).collect();
        degrees.shuffle(&mut rng);
        for &d in &degrees[..3] {
            let direct = cover_cohomology(&sheaf, &cover, d, top, Engine::Direct, DEFAULT_TUPLE_CAP).unwrap();
            let quotient = cover_cohomology(&sheaf, &cover, d, top, Engine::Quotient, DEFAULT_TUPLE_CAP).unwrap();
            assert_eq!(direct, quotient, "{name} d={d}");
        }
    }
}
