use std::collections::BTreeMap;

use k3lattice::factor::primary_decomposition;
use k3lattice::groups::{h3_bar_resolution, order_census};
use k3lattice::lattice::disc_group;
use k3lattice::pipeline::*;
use k3lattice::{AdeConfig, Error, FiniteGroup, GroupFile, GenusSpec};
use num_bigint::BigInt;

fn group_file(name: &str) -> FiniteGroup {
    let path = format!("{}/data/groups/{name}.json", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(path).unwrap();
    GroupFile::from_json(&text).unwrap().build().unwrap()
}

fn record(name: &str) -> ActionRecord {
    shipped_records().into_iter().find(|r| r.name == name).unwrap()
}

#[test]
fn shipped_census_matches_group_files() {
    for (rec, file) in [
        ("C2", "c2"),
        ("C3", "c3"),
        ("C4", "c4"),
        ("C5", "c5"),
        ("C6", "c6"),
        ("C7", "c7"),
        ("C8", "c8"),
        ("S4", "s4"),
        ("L2(7)", "l27"),
        ("A5", "a5"),
        ("A6", "a6"),
        ("M20", "m20"),
    ] {
        let g = group_file(file);
        let r = record(rec);
        assert_eq!(g.order() as u64, r.group_order, "{rec}");
        assert_eq!(Some(order_census(&g).unwrap()), r.census, "{rec}");
    }
}

#[test]
fn every_record_balances() {
    let f = FixedPointProfile::standard();
    for r in shipped_records() {
        assert!(xiao_consistency(&r.config, r.group_order), "{}", r.name);
        let census = r.census.as_ref().unwrap();
        assert_eq!(rank_from_group(census, r.group_order, &f).unwrap(), r.rank(), "{}", r.name);
    }
}

#[test]
fn chains_divide_exactly_with_signs() {
    for r in shipped_records().into_iter().filter(|r| r.glue_index.is_some()) {
        let rep = discriminant_chain(&r).unwrap();
        assert!(rep.sign_ok && rep.xiao_ok, "{}", r.name);
        assert_eq!(rep.d_sg.magnitude(), rep.d_h2g.magnitude());
        assert_eq!(rep.rank_sg, r.config.rank());
        assert!(glue_witness(&r).unwrap(), "{}", r.name);
    }
}

#[test]
fn one_step_mutations() {
    // (record, glue, h3, chain still exact?)
    let cases = [
        ("S4", 1, 2, true),
        ("S4", 3, 2, true),
        ("S4", 2, 1, true),
        ("S4", 2, 3, true),
        ("S4", 5, 2, false),
        ("L2(7)", 2, 2, true),
        ("L2(7)", 1, 3, false),
        ("L2(7)", 1, 1, true),
        ("C2", 3, 1, false),
        ("C2", 2, 2, true),
        ("C7", 6, 1, false),
        ("C7", 7, 2, false),
    ];
    for (name, glue, h3, ok) in cases {
        let mut r = record(name);
        r.glue_index = Some(glue);
        r.h3_order = Some(h3);
        let res = discriminant_chain(&r);
        assert_eq!(res.is_ok(), ok, "{name} glue {glue} h3 {h3}: {res:?}");
        if let Err(e) = res {
            assert!(matches!(e, Error::Inconsistent { .. }));
        }
    }
}

#[test]
fn a5_discriminant_group() {
    let r = record("A5");
    let factors = disc_group(&r.config.lattice()).unwrap();
    let primary = primary_decomposition(&factors);
    assert_eq!(
        primary,
        vec![(2, 1), (2, 1), (2, 1), (2, 1), (3, 1), (3, 1), (3, 1), (5, 1), (5, 1)]
    );
    assert_eq!(r.rank(), 18);
    assert_eq!(glue_quotient_order(&r).unwrap(), 1);
    assert_eq!(discriminant_chain(&r).unwrap().d_sg, BigInt::from(300));
}

#[test]
fn h3_of_small_groups() {
    for n in 1..=8 {
        assert!(h3_bar_resolution(&FiniteGroup::cyclic(n)).unwrap().factors.is_empty());
    }
    let v4 = h3_bar_resolution(&group_file("c2xc2")).unwrap();
    assert_eq!(v4.factors, vec![BigInt::from(2)]);
    assert!(h3_bar_resolution(&group_file("s3")).unwrap().factors.is_empty());
    assert!(matches!(h3_bar_resolution(&group_file("s4")), Err(Error::Resource(_))));
}

#[test]
fn perturbed_cyclic_configs_are_rejected() {
    let base = shipped_records();
    let perturb = [("C2", "7*A1"), ("C3", "7*A2"), ("C4", "4*A3,3*A1"), ("C5", "5*A4"), ("C6", "2*A5,2*A2,3*A1"), ("C7", "2*A6"), ("C8", "2*A7,A3,2*A1")];
    for (name, cfg) in perturb {
        let mut recs = base.clone();
        recs.iter_mut().find(|r| r.name == name).unwrap().config = cfg.parse().unwrap();
        assert!(matches!(derive_fixed_point_profile(&recs), Err(Error::Inconsistent { .. })), "{name}");
    }
}

#[test]
fn record_json_round_trip() {
    let recs = shipped_records();
    let text = serde_json::to_string_pretty(&recs).unwrap();
    assert_eq!(parse_records(&text).unwrap(), recs);
}

#[test]
fn perfect_group_complement_genera() {
    let mut counts = BTreeMap::new();
    for name in ["L2(7)", "A6", "M20"] {
        let cfg: AdeConfig = record(name).config;
        let spec = GenusSpec::complement_of(&cfg.lattice(), 3).unwrap();
        let (n, reps) = k3lattice::genus_class_count(&spec).unwrap();
        for (i, a) in reps.iter().enumerate() {
            for b in &reps[i + 1..] {
                assert!(!k3lattice::is_isometric(a, b));
            }
        }
        counts.insert(name, n);
    }
    assert_eq!(counts, BTreeMap::from([("A6", 2), ("L2(7)", 2), ("M20", 1)]));
}
