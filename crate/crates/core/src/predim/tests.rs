use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::corpus;
use crate::structures::load_structure;

fn spec(s: &str) -> PredimensionSpec {
    s.parse().unwrap()
}

/// The 5-point example: b, c, d, e carry four triples, a is free.
pub(crate) fn five_point() -> PreStructure {
    PreStructure::relational(
        &["a", "b", "c", "d", "e"],
        &[["b", "c", "d"], ["b", "d", "e"], ["b", "c", "e"], ["c", "d", "e"]],
    )
    .unwrap()
}

fn set(m: &PreStructure, l: &[&str]) -> PointSet {
    m.set_of(l).unwrap()
}

/// Naive minimum of δ over every superset, by full enumeration.
fn naive_partial(pd: &Predim<'_>, x: PointSet) -> i64 {
    pd.domain()
        .difference(x)
        .subsets()
        .map(|s| pd.delta_unchecked(x.union(s)))
        .min()
        .unwrap()
}

#[test]
fn trivial_r_delta() {
    let m = PreStructure::relational(&["1", "2", "3", "4"], &[["1", "2", "3"], ["2", "3", "4"]])
        .unwrap();
    let pd = Predim::new(&PredimensionSpec::TrivialR, &m).unwrap();
    assert_eq!(pd.delta(set(&m, &["1", "2", "3"])).unwrap(), 2);
    assert_eq!(pd.delta(PointSet::EMPTY).unwrap(), 0);
}

#[test]
fn fusion_delta() {
    let m = load_structure(
        br#"{"points":["a","b","c","x","y","z"],
            "sorts":{"D":["a","b","c"],"A":["x","y","z"],"bijection":{"a":"x","b":"y","c":"z"}},
            "oracles":{"d1":{"kind":"linear","field":2,"vectors":{"a":[1,0],"b":[0,1],"c":[1,1]},"sort":"D"},
                       "d2":{"kind":"free","sort":"A"}}}"#,
    )
    .unwrap();
    let pd = Predim::new(&spec("fusion:d1,d2"), &m).unwrap();
    assert_eq!(pd.delta(set(&m, &["a", "b", "c"])).unwrap(), 2);
    // Points of sort A are outside the fusion domain.
    assert!(pd.delta(set(&m, &["x"])).is_err());
}

#[test]
fn fusion_on_unsorted_is_binding_error() {
    let m = five_point();
    assert!(matches!(
        Predim::new(&spec("fusion:d1,d2"), &m),
        Err(Error::Binding(_))
    ));
}

#[test]
fn multi_f_fixed_point() {
    let m = load_structure(
        br#"{"points":["x"],"functions":{"f":{"x":"x"}},"oracles":{"d":{"kind":"free"}}}"#,
    )
    .unwrap();
    let pd = Predim::new(&spec("multi_f:d,f"), &m).unwrap();
    assert_eq!(pd.delta(set(&m, &["x"])).unwrap(), 0);
}

#[test]
fn field_f_exclusion_deletes_points() {
    let m = load_structure(
        br#"{"points":["z","a"],"functions":{"f":{"z":"z","a":"z"}},"oracles":{"d":{"kind":"free"}}}"#,
    )
    .unwrap();
    let plain = Predim::new(&spec("field_f:d,f"), &m).unwrap();
    let excl = Predim::new(&spec("field_f:d,f/z"), &m).unwrap();
    let z = set(&m, &["z"]);
    assert_eq!(plain.delta(z).unwrap(), 0);
    assert_eq!(excl.delta(z).unwrap(), 0);
    let za = set(&m, &["z", "a"]);
    // {a} ∪ f(a) = {a, z}: 2 − 1
    assert_eq!(excl.delta(za).unwrap(), 1);
    assert_eq!(plain.delta(za).unwrap(), 0);
}

#[test]
fn delta_rel_examples() {
    let m = PreStructure::relational(&["a", "b", "c"], &[["a", "b", "c"]]).unwrap();
    let pd = Predim::new(&PredimensionSpec::TrivialR, &m).unwrap();
    assert_eq!(pd.delta_rel(set(&m, &["a", "b", "c"]), set(&m, &["a"])).unwrap(), 1);
    let ab = set(&m, &["a", "b"]);
    assert_eq!(pd.delta_rel(ab, ab).unwrap(), 0);
    assert!(pd.delta_rel(set(&m, &["a"]), ab).is_err());

    let m = PreStructure::relational(&["a", "b", "c"], &[["a", "b", "c"], ["b", "a", "c"]]).unwrap();
    let pd = Predim::new(&PredimensionSpec::TrivialR, &m).unwrap();
    assert_eq!(pd.delta_rel(m.points(), set(&m, &["a", "b"])).unwrap(), -1);
}

#[test]
fn gs_check_examples() {
    let m = PreStructure::relational(
        &["a", "b", "c"],
        &[["a", "b", "c"], ["b", "a", "c"], ["a", "c", "b"], ["b", "c", "a"]],
    )
    .unwrap();
    let pd = Predim::new(&PredimensionSpec::TrivialR, &m).unwrap();
    assert_eq!(pd.gs_check().unwrap(), GsOutcome::Witness(m.points()));
    assert_eq!(pd.delta(m.points()).unwrap(), -1);

    let free = PreStructure::relational::<&str>(&["a", "b", "c"], &[]).unwrap();
    let pd = Predim::new(&PredimensionSpec::TrivialR, &free).unwrap();
    assert_eq!(pd.gs_check().unwrap(), GsOutcome::Ok);
}

#[test]
fn gs_witness_is_minimal_when_negative_set_is_small() {
    // Negative pair {a,b} inside a bigger negative set.
    let m = PreStructure::relational(
        &["a", "b", "c", "d"],
        &[["a", "a", "b"], ["b", "b", "a"], ["a", "b", "a"], ["c", "d", "c"], ["a", "c", "d"]],
    )
    .unwrap();
    let pd = Predim::new(&PredimensionSpec::TrivialR, &m).unwrap();
    let GsOutcome::Witness(w) = pd.gs_check().unwrap() else {
        panic!("expected witness")
    };
    assert_eq!(w, set(&m, &["a", "b"]));
}

#[test]
fn five_point_partial_and_strong() {
    let m = five_point();
    let pd = Predim::new(&PredimensionSpec::TrivialR, &m).unwrap();
    assert_eq!(pd.d_partial(set(&m, &["b"])).unwrap(), 0);
    assert_eq!(pd.d_partial(set(&m, &["a"])).unwrap(), 1);
    assert_eq!(pd.d_partial(PointSet::EMPTY).unwrap(), 0);
    assert!(pd.is_strong(set(&m, &["a"])).unwrap());
    assert!(!pd.is_strong(set(&m, &["b"])).unwrap());
    assert!(pd.is_strong(m.points()).unwrap());
    assert_eq!(
        pd.strong_closure(set(&m, &["b"])).unwrap(),
        set(&m, &["b", "c", "d", "e"])
    );
    assert_eq!(pd.strong_closure(set(&m, &["a"])).unwrap(), set(&m, &["a"]));
    assert_eq!(pd.strong_closure(PointSet::EMPTY).unwrap(), PointSet::EMPTY);
}

#[test]
fn strong_embedding_examples() {
    let l = five_point();
    let b = Budget::default();
    let single = |label: &str| PreStructure::relational::<&str>(&[label], &[]).unwrap();
    for (label, expected) in [("a", true), ("b", false)] {
        let m = single(label);
        let e = Embedding::by_labels(&m, &l).unwrap();
        assert_eq!(
            is_strong_embedding(&PredimensionSpec::TrivialR, &m, &l, &e, &b).unwrap(),
            expected,
            "{label}"
        );
    }
    let id = Embedding::identity(l.n());
    assert!(is_strong_embedding(&PredimensionSpec::TrivialR, &l, &l, &id, &b).unwrap());
}

#[test]
fn strong_embedding_rejects_invalid_map() {
    let l = five_point();
    let m = PreStructure::relational(&["b", "c", "d"], &[]).unwrap();
    let e = Embedding::by_labels(&m, &l).unwrap();
    assert!(is_strong_embedding(&PredimensionSpec::TrivialR, &m, &l, &e, &Budget::default()).is_err());
}

#[test]
fn exp_not_submodular_for_non_modular_d2() {
    // d1 free with f the identity makes the first term |X|; d2 = U(1).
    let m = load_structure(
        br#"{"points":["a","b"],"functions":{"f":{"a":"a","b":"b"}},
            "oracles":{"d1":{"kind":"free"},"d2":{"kind":"uniform","k":1}}}"#,
    )
    .unwrap();
    let pd = Predim::new(&spec("exp:d1,d2,f"), &m).unwrap();
    assert!(!pd.is_submodular());
    let (a, b) = (set(&m, &["a"]), set(&m, &["b"]));
    let lhs = pd.delta(a.union(b)).unwrap() + pd.delta(PointSet::EMPTY).unwrap();
    let rhs = pd.delta(a).unwrap() + pd.delta(b).unwrap();
    assert!(lhs > rhs);
}

#[test]
fn multi_f_closure_uses_brute_force() {
    let m = load_structure(
        br#"{"points":["x","y"],"functions":{"f":{"x":"y","y":"y"},"g":{"x":"x","y":"x"}},
            "oracles":{"d":{"kind":"uniform","k":1}}}"#,
    )
    .unwrap();
    let pd = Predim::new(&spec("multi_f:d,f+g"), &m).unwrap();
    let x = set(&m, &["x"]);
    let cl = pd.strong_closure(x).unwrap();
    assert!(pd.is_strong(cl).unwrap());
    assert!(x.is_subset(cl));
}

fn all_minimizers_agree(pd: &Predim<'_>) {
    let dom = pd.domain();
    for x in dom.subsets() {
        let min = pd.minimize(x, dom).unwrap();
        assert_eq!(min.value, naive_partial(pd, x), "{} at {x:?}", pd.spec());
        assert_eq!(pd.delta_unchecked(min.set), min.value);
    }
}

#[test]
fn flow_and_branch_and_bound_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..30 {
        let n = rand::Rng::gen_range(&mut rng, 1..=7);
        let m = corpus::random_full(&mut rng, n);
        for s in ["trivial_r", "field_r:d", "field_f:d,f", "field_f:lin,g", "exp:d1,d2,f", "fusion:d1,d2"] {
            if let Ok(pd) = Predim::new(&spec(s), &m) {
                all_minimizers_agree(&pd);
            }
        }
        let sorted = corpus::random_sorted(&mut rng, n.min(5));
        all_minimizers_agree(&Predim::new(&spec("fusion:d1,d2"), &sorted).unwrap());
    }
}

#[test]
fn closure_is_least_minimizer() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let m = corpus::random_full(&mut rng, 6);
        for s in ["trivial_r", "field_f:d,f", "field_r:lin"] {
            let pd = Predim::new(&spec(s), &m).unwrap();
            for x in m.points().subsets() {
                let cl = pd.strong_closure(x).unwrap();
                let value = pd.d_partial(x).unwrap();
                assert_eq!(pd.delta(cl).unwrap(), value);
                // every minimizer contains the closure
                for y in m.points().difference(x).subsets() {
                    let y = y.union(x);
                    if pd.delta_unchecked(y) == value {
                        assert!(cl.is_subset(y), "{s}");
                    }
                }
            }
        }
    }
}

fn submodular_pairs(pd: &Predim<'_>) -> bool {
    let subs: Vec<PointSet> = pd.domain().subsets().collect();
    subs.iter().all(|&x| {
        subs.iter().all(|&y| {
            pd.delta_unchecked(x.union(y)) + pd.delta_unchecked(x.intersection(y))
                <= pd.delta_unchecked(x) + pd.delta_unchecked(y)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn submodular_presets(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = corpus::random_full(&mut rng, n);
        for s in ["trivial_r", "field_r:d", "field_f:d,f", "exp:d1,d2,f"] {
            prop_assert!(submodular_pairs(&Predim::new(&spec(s), &m).unwrap()), "{}", s);
        }
        let sorted = corpus::random_sorted(&mut rng, n.min(4));
        prop_assert!(submodular_pairs(&Predim::new(&spec("fusion:d1,d2"), &sorted).unwrap()));
    }

    #[test]
    fn aut_is_nonnegative(seed in any::<u64>(), n in 1usize..=7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = corpus::random_full(&mut rng, n);
        let pd = Predim::new(&spec("aut:d,g"), &m).unwrap();
        prop_assert!(m.points().subsets().all(|x| pd.delta_unchecked(x) >= 0));
        prop_assert_eq!(pd.gs_check().unwrap(), GsOutcome::Ok);
    }

    #[test]
    fn partial_monotone_and_below_delta(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = corpus::random_full(&mut rng, n);
        for s in ["trivial_r", "field_f:d,f", "multi_f:d,f+g"] {
            let pd = Predim::new(&spec(s), &m).unwrap();
            for x in m.points().subsets() {
                let dx = pd.d_partial(x).unwrap();
                prop_assert!(dx <= pd.delta_unchecked(x));
                for p in m.points().difference(x).iter() {
                    prop_assert!(dx <= pd.d_partial(x.with(p)).unwrap());
                }
            }
        }
    }

    #[test]
    fn gs_witness_minimality(seed in any::<u64>(), n in 1usize..=7, t in 0usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = corpus::random_relational(&mut rng, n, t);
        let pd = Predim::new(&PredimensionSpec::TrivialR, &m).unwrap();
        let any_negative = m.points().subsets().any(|x| pd.delta_unchecked(x) < 0);
        match pd.gs_check().unwrap() {
            GsOutcome::Ok => prop_assert!(!any_negative),
            GsOutcome::Witness(w) => {
                prop_assert!(pd.delta_unchecked(w) < 0);
                for x in w.iter() {
                    prop_assert!(pd.delta_unchecked(w.without(x)) >= 0);
                }
                prop_assert!(w.subsets().filter(|&s| s != w).all(|s| pd.delta_unchecked(s) >= 0));
            }
        }
    }
}
