use laminar_core::forest::check_directed;
use laminar_core::fullvcmin::BoolExpr;
use laminar_core::models::{
    builtin_formulas, load_model, parse_model, random_ultrametric, save_model, to_json,
    FamilyModel, Model, ModelError, OrderModel, UltrametricModel, MODEL_FILE_EXTENSION,
};
use laminar_core::SetFamily;
use proptest::prelude::*;

/// Leaves under `v` by walking parent pointers from every leaf.
fn leaves_below(m: &UltrametricModel, v: usize) -> Vec<usize> {
    (0..m.leaf_count())
        .filter(|&x| {
            let mut u = Some(m.leaf_node(x));
            while let Some(w) = u {
                if w == v {
                    return true;
                }
                u = m.parents()[w];
            }
            false
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn generator_is_deterministic_and_well_formed(
        leaves in 2usize..80,
        branching in 2usize..6,
        seed in any::<u64>(),
    ) {
        let a = random_ultrametric(leaves, branching, seed).unwrap();
        let b = random_ultrametric(leaves, branching, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.leaf_count(), leaves);
        prop_assert_eq!(a.parents()[a.root()], None);
        for v in 0..a.node_count() {
            prop_assert!(a.children(v).len() <= branching);
            let below = leaves_below(&a, v);
            prop_assert_eq!(a.ball(v).ones().collect::<Vec<_>>(), below.clone());
            prop_assert_eq!(a.ball_size(v), below.len());
        }
    }

    #[test]
    fn lca_is_the_lowest_common_ancestor(
        leaves in 2usize..40,
        seed in any::<u64>(),
        u in any::<usize>(),
        v in any::<usize>(),
    ) {
        let m = random_ultrametric(leaves, 3, seed).unwrap();
        let (u, v) = (u % m.node_count(), v % m.node_count());
        let w = m.lca(u, v);
        prop_assert!(m.is_ancestor(w, u) && m.is_ancestor(w, v));
        for &c in m.children(w) {
            prop_assert!(!(m.is_ancestor(c, u) && m.is_ancestor(c, v)));
        }
    }

    #[test]
    fn file_round_trip(leaves in 2usize..30, seed in any::<u64>(), size in 1usize..40) {
        let dir = tempfile::tempdir().unwrap();
        let models = [
            Model::Ultrametric(random_ultrametric(leaves, 3, seed).unwrap()),
            Model::Order(OrderModel::with_seed(size, Some(seed))),
        ];
        for (i, m) in models.iter().enumerate() {
            let path = dir.path().join(format!("m{i}{MODEL_FILE_EXTENSION}"));
            save_model(m, &path).unwrap();
            prop_assert_eq!(&load_model(&path).unwrap(), m);
            prop_assert_eq!(&parse_model(&to_json(m)).unwrap(), m);
        }
    }

    #[test]
    fn designated_families_are_directed(leaves in 2usize..50, seed in any::<u64>(), size in 1usize..50) {
        let u = Model::Ultrametric(random_ultrametric(leaves, 4, seed).unwrap());
        let o = Model::Order(OrderModel::new(size));
        prop_assert!(check_directed(u.designated_family()).is_ok());
        prop_assert!(check_directed(o.designated_family()).is_ok());
    }

    #[test]
    fn corpus_certificates_hold(
        leaves in 2usize..30,
        seed in any::<u64>(),
        y0 in any::<usize>(),
        y1 in any::<usize>(),
    ) {
        let m = random_ultrametric(leaves, 3, seed).unwrap();
        let params = [y0 % m.leaf_count(), y1 % m.leaf_count()];
        for f in builtin_formulas(&m, "corpus").unwrap() {
            prop_assert!(f.verify_instance(&m, &params), "{} at {:?}", f.name(), params);
        }
        for kind in ["twin-ball-0", "twin-ball-2", "boolean-mix-1-0", "boolean-mix-3-2"] {
            for f in builtin_formulas(&m, kind).unwrap() {
                prop_assert!(f.verify_instance(&m, &params), "{} at {:?}", f.name(), params);
            }
        }
    }
}

#[test]
fn crossing_family_files_load_but_are_not_directed() {
    let m = parse_model(r#"{"kind":"family","universe":3,"sets":[[0,1],[1,2]]}"#).unwrap();
    assert_eq!(m.carrier().size(), 3);
    let c = check_directed(m.designated_family()).unwrap_err();
    assert_eq!((c.0, c.1), (0, 1));
    let explicit = Model::Family(FamilyModel::new(
        SetFamily::from_indices(3, [vec![0, 1], vec![1, 2]]).unwrap(),
        None,
    ));
    assert_eq!(m, explicit);
}

#[test]
fn malformed_files_report_a_line() {
    let cases = [
        ("{\n  \"kind\": \"order\",\n  \"size\": \"x\"\n}", 3),
        (
            "{\n  \"kind\": \"ultrametric\",\n  \"parent\": [1, 0]\n}",
            3,
        ),
        ("{\n  \"kind\": \"torus\"\n}", 2),
        (
            "{\n  \"kind\": \"order\",\n  \"size\": 4,\n  \"colour\": 1\n}",
            4,
        ),
        ("{\n  \"kind\": \"order\",\n  \"size\": 4", 3),
    ];
    for (text, expected) in cases {
        match parse_model(text) {
            Err(ModelError::Parse { line, .. }) => assert_eq!(line, expected, "{text}"),
            other => panic!("expected a parse error for {text}, got {other:?}"),
        }
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_model(dir.path().join("absent.model.json")).unwrap_err();
    assert!(matches!(err, ModelError::Io { .. }));
}

#[test]
fn unknown_corpus_kind_is_rejected() {
    let m = random_ultrametric(8, 2, 0).unwrap();
    assert!(builtin_formulas(&m, "spiral").is_err());
}

#[test]
fn boolean_expressions_evaluate() {
    let (_, cert) = laminar_core::fullvcmin::dlo_instance(5);
    let d1 = cert.delta1();
    let e = BoolExpr::Or(vec![BoolExpr::atom(0, vec![0, 3]), BoolExpr::Const(false)]);
    assert!(e.eval(d1, 3) && !e.eval(d1, 2));
    let f = BoolExpr::And(vec![e.clone(), BoolExpr::atom(1, vec![3, 0]).negate()]);
    assert!(f.eval(d1, 3) && !f.eval(d1, 4));
}
