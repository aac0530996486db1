//! Enumeration oracles for the linear algebra layer. Every oracle below works
//! on explicit sets of vectors and only borrows scalar arithmetic from the
//! field (which is itself checked exhaustively in the unit tests).

use std::collections::BTreeSet;

use netcode_mp::galois::{rref, solve, Coset, FMatrix, FVector, Field, Gf, OpCount, Subspace};
use proptest::prelude::*;

fn ops() -> OpCount {
    OpCount::default()
}

fn all_vectors(f: &Field, n: usize) -> Vec<FVector> {
    let mut out = vec![FVector(vec![])];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                f.elements().map(move |x| {
                    let mut w = v.clone();
                    w.0.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Every linear combination of `gens`, as an explicit set.
fn brute_span(f: &Field, n: usize, gens: &[FVector]) -> BTreeSet<FVector> {
    let mut set = BTreeSet::new();
    set.insert(FVector::zeros(n));
    for g in gens {
        let mut next = BTreeSet::new();
        for v in &set {
            for c in f.elements() {
                let w: Vec<Gf> = v.0.iter().zip(&g.0).map(|(&a, &b)| f.add(a, f.mul(c, b))).collect();
                next.insert(FVector(w));
            }
        }
        set = next;
    }
    set
}

fn brute_mat_vec(f: &Field, a: &FMatrix, x: &FVector) -> FVector {
    FVector(
        (0..a.rows())
            .map(|r| (0..a.cols()).fold(Gf::ZERO, |acc, c| f.add(acc, f.mul(a.get(r, c), x.0[c]))))
            .collect(),
    )
}

fn vecs(f: &Field, n: usize, raw: &[u32]) -> Vec<FVector> {
    raw.chunks(n).map(|c| FVector(c.iter().map(|&x| Gf(x % f.order())).collect())).collect()
}

fn coset_set(c: &Coset) -> BTreeSet<FVector> {
    c.enumerate().into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_matches_span_size(raw in proptest::collection::vec(0u32..3, 16)) {
        let f = Field::gf(3, 1).unwrap();
        let rows = vecs(&f, 4, &raw);
        let m = FMatrix::from_rows(&f, 4, &rows).unwrap();
        let r = rref(&m, &mut ops());
        let span = brute_span(&f, 4, &rows);
        prop_assert_eq!(span.len(), 3usize.pow(r.rank as u32));
        // row equivalence: the reduced rows span the same set
        prop_assert_eq!(brute_span(&f, 4, &r.matrix.to_rows()), span);
        // canonical form is idempotent
        prop_assert_eq!(rref(&r.matrix, &mut ops()).matrix, r.matrix);
    }

    #[test]
    fn solve_matches_enumeration(raw in proptest::collection::vec(0u32..4, 25), x in proptest::collection::vec(0u32..4, 5)) {
        let f = Field::gf(2, 2).unwrap();
        let a = FMatrix::from_rows(&f, 5, &vecs(&f, 5, &raw)).unwrap();
        let x = FVector(x.into_iter().map(Gf).collect());
        let b = brute_mat_vec(&f, &a, &x); // consistent by construction
        let sol = solve(&a, &b, &mut ops()).unwrap().expect("consistent");
        let expected: BTreeSet<FVector> =
            all_vectors(&f, 5).into_iter().filter(|c| brute_mat_vec(&f, &a, c) == b).collect();
        prop_assert_eq!(coset_set(&sol), expected);
    }

    #[test]
    fn solve_detects_infeasible(raw in proptest::collection::vec(0u32..2, 12), b in proptest::collection::vec(0u32..2, 4)) {
        let f = Field::gf(2, 1).unwrap();
        let a = FMatrix::from_rows(&f, 3, &vecs(&f, 3, &raw)).unwrap();
        let b = FVector(b.into_iter().map(Gf).collect());
        let any = all_vectors(&f, 3).iter().any(|c| brute_mat_vec(&f, &a, c) == b);
        let sol = solve(&a, &b, &mut ops()).unwrap();
        prop_assert_eq!(sol.is_some(), any);
        if let Some(c) = sol {
            for x in c.enumerate() {
                prop_assert_eq!(brute_mat_vec(&f, &a, &x), b.clone());
            }
        }
    }

    #[test]
    fn sum_of_lines_matches_enumeration(raw in proptest::collection::vec(0u32..3, 9)) {
        let f = Field::gf(3, 1).unwrap();
        let gens = vecs(&f, 3, &raw);
        let lines: Vec<Subspace> =
            gens.iter().map(|g| Subspace::span(&f, 3, std::slice::from_ref(g), &mut ops()).unwrap()).collect();
        let s = Subspace::sum_all(&f, 3, &lines, &mut ops()).unwrap();
        let oracle = brute_span(&f, 3, &gens);
        prop_assert_eq!(3usize.pow(s.dim() as u32), oracle.len());
        prop_assert_eq!(s.enumerate().into_iter().collect::<BTreeSet<_>>(), oracle);
    }

    #[test]
    fn intersection_matches_enumeration(ra in proptest::collection::vec(0u32..2, 8), rb in proptest::collection::vec(0u32..2, 8)) {
        let f = Field::gf(2, 1).unwrap();
        let (ga, gb) = (vecs(&f, 4, &ra), vecs(&f, 4, &rb));
        let a = Subspace::span(&f, 4, &ga, &mut ops()).unwrap();
        let b = Subspace::span(&f, 4, &gb, &mut ops()).unwrap();
        let i = a.intersect(&b, &mut ops()).unwrap();
        let (sa, sb) = (brute_span(&f, 4, &ga), brute_span(&f, 4, &gb));
        let oracle: BTreeSet<FVector> = sa.intersection(&sb).cloned().collect();
        prop_assert_eq!(i.enumerate().into_iter().collect::<BTreeSet<_>>(), oracle);
        // dimension formula
        let s = a.sum(&b, &mut ops()).unwrap();
        prop_assert_eq!(s.dim() + i.dim(), a.dim() + b.dim());
    }

    #[test]
    fn dimension_formula_gf16(ra in proptest::collection::vec(0u32..16, 12), rb in proptest::collection::vec(0u32..16, 8)) {
        let f = Field::gf(2, 4).unwrap();
        let a = Subspace::span(&f, 4, &vecs(&f, 4, &ra), &mut ops()).unwrap();
        let b = Subspace::span(&f, 4, &vecs(&f, 4, &rb), &mut ops()).unwrap();
        let s = a.sum(&b, &mut ops()).unwrap();
        let i = a.intersect(&b, &mut ops()).unwrap();
        prop_assert_eq!(s.dim() + i.dim(), a.dim() + b.dim());
        prop_assert!(i.is_subspace_of(&a, &mut ops()) && i.is_subspace_of(&b, &mut ops()));
        prop_assert!(a.is_subspace_of(&s, &mut ops()) && b.is_subspace_of(&s, &mut ops()));
        // re-canonicalizing is the identity
        prop_assert_eq!(Subspace::span(&f, 4, i.basis(), &mut ops()).unwrap(), i);
    }

    #[test]
    fn coset_intersection_matches_enumeration(
        ra in proptest::collection::vec(0u32..3, 6), rb in proptest::collection::vec(0u32..3, 3),
        pa in proptest::collection::vec(0u32..3, 3), pb in proptest::collection::vec(0u32..3, 3),
    ) {
        let f = Field::gf(3, 1).unwrap();
        let a = Coset::new(FVector(pa.into_iter().map(Gf).collect()),
            Subspace::span(&f, 3, &vecs(&f, 3, &ra), &mut ops()).unwrap(), &mut ops()).unwrap();
        let b = Coset::new(FVector(pb.into_iter().map(Gf).collect()),
            Subspace::span(&f, 3, &vecs(&f, 3, &rb), &mut ops()).unwrap(), &mut ops()).unwrap();
        let (sa, sb) = (coset_set(&a), coset_set(&b));
        let oracle: BTreeSet<FVector> = sa.intersection(&sb).cloned().collect();
        match a.intersect(&b, &mut ops()).unwrap() {
            None => prop_assert!(oracle.is_empty()),
            Some(c) => prop_assert_eq!(coset_set(&c), oracle),
        }
        // membership agrees with enumeration everywhere in F^3
        for x in all_vectors(&f, 3) {
            prop_assert_eq!(a.contains(&x, &mut ops()), sa.contains(&x));
        }
        // canonical idempotence
        prop_assert_eq!(Coset::new(a.rep().clone(), a.space().clone(), &mut ops()).unwrap(), a.clone());
        // coset ordering: subset test agrees with sets
        prop_assert_eq!(a.is_subset_of(&b, &mut ops()), sa.is_subset(&sb));
    }
}

#[test]
fn counters_grow_with_work() {
    let f = Field::gf(2, 4).unwrap();
    let mut small = ops();
    let mut big = ops();
    let m = |k: usize| {
        let rows: Vec<FVector> =
            (0..k).map(|i| FVector((0..k).map(|j| Gf(((i * 7 + j * 3 + i * j) % 15 + 1) as u32)).collect())).collect();
        FMatrix::from_rows(&f, k, &rows).unwrap()
    };
    rref(&m(4), &mut small);
    rref(&m(8), &mut big);
    assert!(big.mul > small.mul && big.add > small.add);
}
