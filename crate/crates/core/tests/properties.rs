use gi_core::abelianization::{
    consistency_check, tfg_abelianization, tfg_abelianization_with, Decomposition,
};
use gi_core::aut::{aut_equivalent_mod, orbit_witness};
use gi_core::group::direct_sum;
use gi_core::homology::iterated_kunneth;
use gi_core::table::{compose, equal, eval_word, inverse, Arity, Gen, TableElement};
use gi_core::*;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn matrix(max_n: usize, max_entry: i64) -> impl Strategy<Value = IntMatrix> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(0..=max_entry, n * n).prop_map(move |e| {
            let rows: Vec<Vec<i64>> = e.chunks(n).map(|c| c.to_vec()).collect();
            IntMatrix::from_rows(&rows)
        })
    })
}

fn sft(max_n: usize, max_entry: i64) -> impl Strategy<Value = SftMatrix> {
    matrix(max_n, max_entry).prop_filter_map("valid adjacency matrix", |m| validate(m).ok())
}

fn signed_matrix() -> impl Strategy<Value = IntMatrix> {
    (1..=5usize, 1..=5usize).prop_flat_map(|(r, c)| {
        prop::collection::vec(-9i64..=9, r * c).prop_map(move |e| {
            let rows: Vec<Vec<i64>> = e.chunks(c).map(|x| x.to_vec()).collect();
            IntMatrix::from_rows(&rows)
        })
    })
}

fn small_torsion() -> impl Strategy<Value = FgGroup> {
    prop::collection::vec(2u32..=6, 0..=3).prop_map(|ds| {
        let orders: Vec<BigInt> = ds.into_iter().map(BigInt::from).collect();
        FgGroup::from_cyclic_orders(&orders)
    })
}

fn bounds() -> SearchBounds {
    SearchBounds::default()
}

/// `(f, t) -> (εf, M t + f y)` over all `ε`, `M ∈ Aut(T)`, `y ∈ T`.
fn rank_one_brute_force(g: &FgGroup, a: &FgElement, b: &FgElement, e: &BigInt) -> bool {
    let t = g.torsion_subgroup();
    let auts = enumerate_automorphisms(&t, &bounds()).unwrap();
    let ta = FgElement {
        free: vec![],
        torsion: a.torsion.clone(),
    };
    let tb = FgElement {
        free: vec![],
        torsion: b.torsion.clone(),
    };
    let fa = &a.free[0];
    let fb = &b.free[0];
    for eps in [BigInt::one(), -BigInt::one()] {
        let df = &eps * fa - fb;
        let free_ok = if e.is_positive() {
            (&df % e).is_zero()
        } else {
            df.is_zero()
        };
        if !free_ok {
            continue;
        }
        for m in &auts {
            let img = m.apply(&ta);
            for y in t.elements() {
                let x = t.sub(&t.add(&img, &t.scale(&y, fa)), &tb);
                if t.is_multiple_of(&x, e) {
                    return true;
                }
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snf_factorization(m in signed_matrix()) {
        let r = smith_normal_form(&m);
        prop_assert_eq!(&(&r.u * &m) * &r.v, r.s.clone());
        prop_assert!(r.u.determinant().abs().is_one());
        prop_assert!(r.v.determinant().abs().is_one());
        prop_assert_eq!(&r.u * &r.u_inv, IntMatrix::identity(m.rows()));
        prop_assert!(r.s.is_diagonal());
        let d = r.diagonal();
        for w in d.windows(2) {
            prop_assert!(!w[0].is_negative());
            if !w[0].is_zero() {
                prop_assert!((&w[1] % &w[0]).is_zero());
            } else {
                prop_assert!(w[1].is_zero());
            }
        }
        prop_assert_eq!(r.rank(), m.rank());
    }

    #[test]
    fn torsion_orbits_match_enumeration(t in small_torsion(), i in 0usize..1000, j in 0usize..1000) {
        let elems: Vec<FgElement> = t.elements().collect();
        let a = &elems[i % elems.len()];
        let b = &elems[j % elems.len()];
        let auts = enumerate_automorphisms(&t, &bounds()).unwrap();
        let brute = auts.iter().any(|h| h.apply(a) == *b);
        prop_assert_eq!(aut_orbit_equivalent(&t, a, b, &bounds()).unwrap(), brute);
    }

    #[test]
    fn mixed_orbits_match_enumeration(
        t in small_torsion(),
        fa in -6i64..=6, fb in -6i64..=6,
        i in 0usize..1000, j in 0usize..1000,
        e in prop::sample::select(vec![0i64, 0, 2, 3, 4, 6]),
    ) {
        let g = direct_sum(&[FgGroup::free(1), t.clone()]);
        let elems: Vec<FgElement> = t.elements().collect();
        let a = FgElement { free: vec![BigInt::from(fa)], torsion: elems[i % elems.len()].torsion.clone() };
        let b = FgElement { free: vec![BigInt::from(fb)], torsion: elems[j % elems.len()].torsion.clone() };
        let e = BigInt::from(e);
        let got = aut_equivalent_mod(&g, &a, &b, &e, &bounds()).unwrap();
        prop_assert_eq!(got, rank_one_brute_force(&g, &a, &b, &e));
        if e.is_zero() && got {
            let h = orbit_witness(&g, &a, &b, &bounds()).unwrap().unwrap();
            prop_assert!(h.is_automorphism());
            prop_assert_eq!(h.apply(&a), b);
        }
    }

    #[test]
    fn rank_two_witnesses(
        t in small_torsion(),
        f in prop::collection::vec(-5i64..=5, 4),
        i in 0usize..1000, j in 0usize..1000,
    ) {
        let g = direct_sum(&[FgGroup::free(2), t.clone()]);
        let elems: Vec<FgElement> = t.elements().collect();
        let a = FgElement { free: vec![BigInt::from(f[0]), BigInt::from(f[1])], torsion: elems[i % elems.len()].torsion.clone() };
        let b = FgElement { free: vec![BigInt::from(f[2]), BigInt::from(f[3])], torsion: elems[j % elems.len()].torsion.clone() };
        let yes = aut_orbit_equivalent(&g, &a, &b, &bounds()).unwrap();
        if a.free_content() != b.free_content() {
            prop_assert!(!yes);
        }
        match orbit_witness(&g, &a, &b, &bounds()).unwrap() {
            Some(h) => {
                prop_assert!(yes);
                prop_assert!(h.is_automorphism());
                prop_assert_eq!(h.apply(&a), b);
            }
            None => prop_assert!(!yes),
        }
    }

    #[test]
    fn automorphisms_preserve_order(t in small_torsion(), i in 0usize..1000) {
        let elems: Vec<FgElement> = t.elements().collect();
        let a = &elems[i % elems.len()];
        for h in enumerate_automorphisms(&t, &bounds()).unwrap().iter().take(50) {
            prop_assert_eq!(t.element_order(&h.apply(a)), t.element_order(a));
        }
    }

    #[test]
    fn relabeling_invariance(a in sft(4, 3), seed in any::<u64>()) {
        let n = a.size();
        let mut perm: Vec<usize> = (0..n).collect();
        // deterministic Fisher-Yates from the seed
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(perm[i], perm[j])] = a.matrix()[(i, j)].clone();
            }
        }
        let b = validate(m).unwrap();
        let (ia, ib) = (invariants(&a), invariants(&b));
        prop_assert_eq!(&ia.bf, &ib.bf);
        prop_assert_eq!(&ia.det, &ib.det);
        prop_assert_eq!(&ia.k1, &ib.k1);
        prop_assert!(sft_isomorphic(&a, &b, &bounds()).unwrap().isomorphic);
    }

    #[test]
    fn isomorphism_is_an_equivalence(a in sft(3, 3), b in sft(3, 3), c in sft(3, 3)) {
        let iso = |x: &SftMatrix, y: &SftMatrix| sft_isomorphic(x, y, &bounds()).unwrap().isomorphic;
        prop_assert!(iso(&a, &a));
        prop_assert_eq!(iso(&a, &b), iso(&b, &a));
        if iso(&a, &b) && iso(&b, &c) {
            prop_assert!(iso(&a, &c));
        }
        let single = product_isomorphic(std::slice::from_ref(&a), std::slice::from_ref(&b), &bounds()).unwrap();
        prop_assert_eq!(single.isomorphic, iso(&a, &b));
    }

    #[test]
    fn products_are_permutation_invariant(fs in prop::collection::vec(sft(3, 3), 1..=3)) {
        let mut rev = fs.clone();
        rev.reverse();
        match product_isomorphic(&fs, &rev, &bounds()) {
            Ok(v) => prop_assert!(v.isomorphic),
            Err(ClassifyError::NoFiniteReduction) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
        let h = product_homology(&fs);
        prop_assert!(h.same_groups(&product_homology(&rev)));
    }

    #[test]
    fn closed_form_homology(fs in prop::collection::vec(sft(4, 3), 1..=3)) {
        let h = product_homology(&fs);
        let k = iterated_kunneth(&fs);
        prop_assert!(h.same_groups(&k));
        prop_assert!(hk_check(&fs).holds());
    }

    #[test]
    fn abelianization_is_decomposition_independent(fs in prop::collection::vec(sft(3, 3), 1..=3)) {
        prop_assert_eq!(
            tfg_abelianization(&fs),
            tfg_abelianization_with(&fs, Decomposition::Primary)
        );
        prop_assert!(consistency_check(&fs).is_ok(), "{:?}", consistency_check(&fs));
    }

    #[test]
    fn table_group_laws(
        k in prop::collection::vec(2u32..=4, 1..=3),
        raw in prop::collection::vec((0usize..2, 1usize..4, 1usize..4), 1..=6),
        raw2 in prop::collection::vec((0usize..2, 1usize..4, 1usize..4), 1..=6),
        raw3 in prop::collection::vec((0usize..2, 1usize..4, 1usize..4), 1..=6),
    ) {
        let arity = Arity::new(k.clone()).unwrap();
        let word = |raw: &[(usize, usize, usize)]| -> Vec<Gen> {
            raw.iter()
                .map(|&(kind, i, d)| if kind == 0 { Gen::Tau(i) } else { Gen::S(i, (d - 1) % k.len() + 1) })
                .collect()
        };
        let f = eval_word(&word(&raw), &arity).unwrap();
        let g = eval_word(&word(&raw2), &arity).unwrap();
        let h = eval_word(&word(&raw3), &arity).unwrap();
        prop_assert!(f.is_well_formed());
        let fi = inverse(&f);
        prop_assert!(fi.is_well_formed());
        let id = TableElement::identity(&arity);
        prop_assert!(equal(&compose(&f, &fi).unwrap(), &id).unwrap());
        let left = compose(&compose(&f, &g).unwrap(), &h).unwrap();
        let right = compose(&f, &compose(&g, &h).unwrap()).unwrap();
        prop_assert!(left.is_well_formed());
        prop_assert!(equal(&left, &right).unwrap());
    }
}
