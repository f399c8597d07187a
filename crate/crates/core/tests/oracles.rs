//! Library output checked against exact rational arithmetic and a
//! brute-force tree generator.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use proptest::prelude::*;
use srkqi::tableau::{Builtin, Tableau};
use srkqi::trees::{enumerate_trees, residual_table, Family};

fn exact(b: Builtin) -> ExactTableau {
    match b {
        Builtin::Scheme21 => ExactTableau::scheme_2_1(),
        Builtin::Scheme22 => ExactTableau::scheme_2_2(),
        Builtin::Midpoint => ExactTableau::midpoint(),
    }
}

#[test]
fn defect_matrices_match_rational_sums() {
    for b in Builtin::ALL {
        let d = b.tableau().defect_matrices();
        let ex = exact(b).defects();
        for (m, e) in [&d.m0, &d.m1, &d.mstar].into_iter().zip(&ex) {
            for (i, row) in e.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    assert!((m[(i, j)] - to_f64(v)).abs() <= 1e-14, "{} ({i},{j})", b.label());
                }
            }
        }
    }
}

#[test]
fn scheme_2_1_defect_table() {
    let expected = [
        [q(0, 1), q(1, 6), q(-1, 6)],
        [q(1, 6), q(-4, 9), q(5, 18)],
        [q(-1, 6), q(5, 18), q(-1, 9)],
    ];
    for m in ExactTableau::scheme_2_1().defects() {
        for i in 0..3 {
            assert_eq!(m[i].as_slice(), expected[i].as_slice());
        }
    }
}

#[test]
fn scheme_2_2_spot_entries() {
    let [m0, m1, mstar] = ExactTableau::scheme_2_2().defects();
    for m in [&m0, &m1, &mstar] {
        assert_eq!(m[0][1], q(1, 8));
        assert_eq!(m[1][1], q(-1, 4));
        assert_eq!(m[0][0], q(-1, 16));
    }
}

#[test]
fn midpoint_defects_vanish_exactly() {
    for m in ExactTableau::midpoint().defects() {
        assert_eq!(m, vec![vec![q(0, 1)]]);
    }
}

#[test]
fn residual_values_match_rational_oracle() {
    for b in Builtin::ALL {
        let tab = b.tableau();
        let ex = exact(b);
        for r in residual_table(&tab, 6).unwrap() {
            let (l, rt) = (Node::from_tree(&r.left), Node::from_tree(&r.right));
            let want = to_f64(exact_residual(&ex, &l, &rt));
            assert!(
                (r.value - want).abs() <= 1e-14,
                "{} {} {}: {} vs {want}",
                b.label(),
                r.left,
                r.right,
                r.value
            );
            assert_eq!(r.order2_sum, l.order2() + rt.order2());
        }
    }
}

#[test]
fn residual_table_has_exactly_the_expected_pairings() {
    let trees = brute_force_trees(5);
    let mut want = BTreeSet::new();
    for (i, (ci, ti)) in trees.iter().enumerate() {
        for (j, (cj, tj)) in trees.iter().enumerate() {
            if ti.order2() + tj.order2() > 6 {
                continue;
            }
            let family = match (ti.color, tj.color) {
                (0, 0) if i <= j => "M0",
                (1, 1) if i <= j => "M1",
                (0, 1) => "MSTAR",
                _ => continue,
            };
            let key = if ti.color == tj.color && cj < ci { (cj.clone(), ci.clone()) } else { (ci.clone(), cj.clone()) };
            want.insert((key.0, key.1, family));
        }
    }
    let table = residual_table(&Builtin::Scheme21.tableau(), 6).unwrap();
    let got: BTreeSet<_> = table
        .iter()
        .map(|r| {
            let (a, b) = (Node::from_tree(&r.left).canon(), Node::from_tree(&r.right).canon());
            let key = if r.family != Family::MStar && b < a { (b, a) } else { (a, b) };
            (key.0, key.1, r.family.label())
        })
        .collect();
    assert_eq!(got.len(), table.len(), "duplicate pairing");
    assert_eq!(got, want);
}

#[test]
fn first_failing_pairs_are_minus_one_sixty_fourth() {
    let leaf_pair = |s: &str| Node::from_tree(&s.parse().unwrap());
    let (l, r) = (leaf_pair("[t1]1"), leaf_pair("[[t1]1]1"));
    assert_eq!(exact_residual(&ExactTableau::scheme_2_1(), &l, &r), q(-1, 64));
    let t = leaf_pair("[[t1]1]1");
    assert_eq!(exact_residual(&ExactTableau::scheme_2_2(), &t, &t), q(-1, 64));
}

#[test]
fn enumeration_matches_brute_force_through_order_three() {
    let lib = enumerate_trees(6).unwrap();
    let mut got: BTreeMap<(u8, u32), BTreeSet<String>> = BTreeMap::new();
    for t in lib.iter() {
        let n = Node::from_tree(t);
        assert_eq!(n.order2(), t.order2());
        assert!(got.entry((n.color, n.order2())).or_default().insert(n.canon()), "duplicate {t}");
    }
    let mut want: BTreeMap<(u8, u32), BTreeSet<String>> = BTreeMap::new();
    for (c, n) in brute_force_trees(6) {
        want.entry((n.color, n.order2())).or_default().insert(c);
    }
    assert_eq!(got, want);
}

#[test]
fn printed_listings_match_tree_for_tree() {
    let sets = enumerate_trees(5).unwrap();
    for (printed, lib) in [(&PRINTED_GAMMA0[..], &sets.gamma0), (&PRINTED_GAMMA1[..], &sets.gamma1)] {
        let p: BTreeSet<String> = printed_canon(printed).into_iter().collect();
        assert_eq!(p.len(), printed.len(), "printed listing repeats a tree");
        let l: BTreeSet<String> = lib.iter().map(|t| Node::from_tree(t).canon()).collect();
        assert_eq!(p, l);
    }
    assert_eq!((sets.gamma0.len(), sets.gamma1.len()), (12, 32));
}

fn small_rational() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, d)| q(p, d))
}

fn exact_tableau(s: usize) -> impl Strategy<Value = ExactTableau> {
    let mat = || proptest::collection::vec(proptest::collection::vec(small_rational(), s), s);
    let vec = || proptest::collection::vec(small_rational(), s);
    (mat(), mat(), vec(), vec()).prop_map(|(a, b, alpha, beta)| ExactTableau { a, b, alpha, beta })
}

fn to_tableau(e: &ExactTableau) -> Tableau {
    let m = |x: &Vec<Vec<Q>>| x.iter().map(|r| r.iter().map(|&v| to_f64(v)).collect()).collect();
    let v = |x: &Vec<Q>| x.iter().map(|&v| to_f64(v)).collect();
    Tableau::new("random", m(&e.a), m(&e.b), v(&e.alpha), v(&e.beta)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_tableau_residuals_agree_with_rationals(e in (1usize..=3).prop_flat_map(exact_tableau)) {
        let tab = to_tableau(&e);
        for r in residual_table(&tab, 5).unwrap() {
            let want = to_f64(exact_residual(&e, &Node::from_tree(&r.left), &Node::from_tree(&r.right)));
            prop_assert!((r.value - want).abs() <= 1e-9 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn m0_and_m1_are_symmetric(e in (1usize..=3).prop_flat_map(exact_tableau)) {
        let d = to_tableau(&e).defect_matrices();
        let s = e.stages();
        for i in 0..s {
            for j in 0..s {
                prop_assert_eq!(d.m0[(i, j)], d.m0[(j, i)]);
                prop_assert_eq!(d.m1[(i, j)], d.m1[(j, i)]);
            }
        }
    }
}
