use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use k3lattice::discform::{are_isomorphic, disc_form, isotropic_subgroups, overlattice_disc};
use k3lattice::genus::{enumerate_reduced, fingerprint, short_vectors};
use k3lattice::intlat::{det_exact, smith_normal_form, IntMatrix};
use k3lattice::{genus_class_count, is_isometric, AdeConfig, GenusSpec, GramLattice, ReducedForm, RootComponent};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x6b33),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

/// Cofactor expansion, independent of the elimination code.
fn laplace(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i128>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &v)| v).collect())
                .collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] * laplace(&minor)
        })
        .sum()
}

fn unimodular(n: usize, ops: &[(usize, usize, i64)]) -> IntMatrix {
    let mut p = IntMatrix::identity(n);
    for &(i, j, k) in ops {
        let (i, j) = (i % n, j % n);
        if i == j {
            continue;
        }
        for c in 0..n {
            let v = &p[(j, c)] * BigInt::from(k);
            p[(i, c)] += v;
        }
    }
    p
}

fn component() -> impl Strategy<Value = RootComponent> {
    prop_oneof![
        (1usize..=5).prop_map(RootComponent::a),
        (4usize..=5).prop_map(RootComponent::d),
        Just(RootComponent::e(6)),
        Just(RootComponent::e(7)),
    ]
}

fn small_config() -> impl Strategy<Value = AdeConfig> {
    prop::collection::vec(component(), 1..=3)
        .prop_map(|cs| AdeConfig::from_components(cs.into_iter().map(|c| (1, c))).unwrap())
}

fn reduced_form() -> impl Strategy<Value = ReducedForm> {
    (1usize..=3, 2u64..=60, any::<prop::sample::Index>()).prop_filter_map("no form", |(r, d, ix)| {
        let v = enumerate_reduced(r, d).ok()?;
        (!v.is_empty()).then(|| ix.get(&v).clone())
    })
}

fn transform(f: &ReducedForm, ops: &[(usize, usize, i64)]) -> ReducedForm {
    let n = f.rank();
    let p = unimodular(n, ops);
    let g = &(&p * &f.gram()) * &p.transpose();
    ReducedForm::reduce(g.to_i64_rows().unwrap()).unwrap()
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn snf_reconstructs_and_matches_det(rows in prop::collection::vec(prop::collection::vec(-9i64..=9, 4), 1..=4)) {
        let n = rows.len();
        let sq: Vec<Vec<i64>> = rows.iter().map(|r| r[..n].to_vec()).collect();
        let a = IntMatrix::from_rows(&sq);
        let s = smith_normal_form(&a);
        prop_assert_eq!(&(&(&s.u * &a) * &s.v), &s.diagonal());
        for w in s.d.windows(2) {
            prop_assert!(w[1].is_zero() || (&w[1] % &w[0]).is_zero());
        }
        let det = det_exact(&a).unwrap();
        let wide: Vec<Vec<i128>> = sq.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
        prop_assert_eq!(det.clone(), BigInt::from(laplace(&wide)));
        let prod: BigInt = s.d.iter().product();
        prop_assert_eq!(prod.abs(), det.abs());
    }

    #[test]
    fn short_vectors_match_box_search(f in reduced_form(), extra in 0i64..=6) {
        let bound = f.entries()[0][0] + 2 * extra;
        let mut fast: Vec<Vec<i64>> = short_vectors(&f, bound).into_iter().map(|(v, _)| v).collect();
        fast.sort();
        // reduced forms have (G^-1)_ii <= 2/g_ii <= 1, so |x_i| <= sqrt(bound) <= 12
        let n = f.rank();
        let g = f.entries();
        let r = bound.min(12);
        let mut slow = Vec::new();
        let mut x = vec![-r; n];
        loop {
            let mut norm = 0;
            for a in 0..n { for b in 0..n { norm += x[a] * g[a][b] * x[b]; } }
            if norm > 0 && norm <= bound { slow.push(x.clone()); }
            let mut k = 0;
            while k < n && x[k] == r { x[k] = -r; k += 1; }
            if k == n { break; }
            x[k] += 1;
        }
        slow.sort();
        prop_assert_eq!(fast, slow);
    }
}

proptest! {
    #![proptest_config(config(300))]

    #[test]
    fn disc_form_basis_invariance(cfg in small_config(), ops in prop::collection::vec((0usize..16, 0usize..16, -2i64..=2), 0..12)) {
        let l = cfg.lattice();
        let p = unimodular(l.rank(), &ops);
        let g2 = &(&p * l.gram()) * &p.transpose();
        let l2 = GramLattice::new(g2).unwrap();
        let q1 = disc_form(&l).unwrap();
        let q2 = disc_form(&l2).unwrap();
        prop_assert_eq!(q1.value_census().unwrap(), q2.value_census().unwrap());
        prop_assert!(are_isomorphic(&q1, &q2).unwrap());
    }

    #[test]
    fn overlattice_order_law(cfg in small_config(), pick in any::<prop::sample::Index>()) {
        let q = disc_form(&cfg.lattice()).unwrap();
        for p in [2u64, 3, 5] {
            if q.group_order() % (p * p) != 0 { continue; }
            let subs = isotropic_subgroups(&q, p).unwrap();
            if subs.is_empty() { continue; }
            let h = pick.get(&subs);
            let over = overlattice_disc(&q, h).unwrap();
            prop_assert_eq!(over.group_order() * p * p, q.group_order());
        }
    }

    #[test]
    fn isometry_is_an_equivalence(f in reduced_form(), o1 in prop::collection::vec((0usize..3, 0usize..3, -2i64..=2), 0..8), o2 in prop::collection::vec((0usize..3, 0usize..3, -2i64..=2), 0..8)) {
        let g = transform(&f, &o1);
        let h = transform(&g, &o2);
        prop_assert!(is_isometric(&f, &f));
        prop_assert!(is_isometric(&f, &g) && is_isometric(&g, &f));
        prop_assert!(is_isometric(&g, &h) && is_isometric(&f, &h));
        let b = 2 * f.entries()[f.rank() - 1][f.rank() - 1];
        prop_assert_eq!(fingerprint(&f, b), fingerprint(&g, b));
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn genus_enumeration_closure(f in reduced_form()) {
        let spec = GenusSpec::of_lattice(&f.lattice()).unwrap();
        let (n, reps) = genus_class_count(&spec).unwrap();
        prop_assert_eq!(n, reps.len());
        prop_assert_eq!(reps.iter().filter(|r| is_isometric(r, &f)).count(), 1);
        for (i, r) in reps.iter().enumerate() {
            prop_assert!(are_isomorphic(&disc_form(&r.lattice()).unwrap(), &spec.disc).unwrap());
            for s in &reps[i + 1..] {
                prop_assert!(!is_isometric(r, s));
            }
        }
    }
}
