use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use so_lab::formulas::{classify, parse, prenex_so, Formula, HierarchyLabel};
use so_lab::gen::{random_sentence, random_structure, rng, FormulaConfig};
use so_lab::structures::{
    all_structures, eval_so_full_with, find_isomorphism, fingerprint, Assignment, EvalOptions, FiniteStructure, Relation, Signature,
};
use so_lab::ultra::{henkin_eval, DecomposableHenkinModel};

fn big() -> EvalOptions {
    EvalOptions::with_budget(1 << 40)
}

fn truth(a: &FiniteStructure, f: &Formula) -> bool {
    eval_so_full_with(a, f, &Assignment::new(), big()).unwrap()
}

fn small_cfg() -> FormulaConfig {
    FormulaConfig {
        max_depth: 3,
        max_so_arity: 1,
        so_cells: 4,
        cells_base: 2,
        max_connectives: 4,
    }
}

#[test]
fn prenex_form_is_equivalent_on_small_structures() {
    let sig = Signature::new([("p", 1)]).unwrap();
    let structures: Vec<FiniteStructure> = (1..=2)
        .flat_map(|n| all_structures(&sig, n, big()).unwrap().collect::<Vec<_>>())
        .collect();
    let mut r = rng(11);
    let mut with_so = 0;
    for _ in 0..300 {
        let f = random_sentence(&mut r, &sig, &small_cfg());
        let p = prenex_so(&f);
        assert!(
            matches!(classify(&p), HierarchyLabel::Delta0 | HierarchyLabel::Sigma(_) | HierarchyLabel::Pi(_)),
            "{p} is not prenex"
        );
        if f.has_so() {
            with_so += 1;
        }
        for a in &structures {
            assert_eq!(truth(a, &f), truth(a, &p), "{f} vs {p} on {a}");
        }
    }
    assert!(with_so > 50, "only {with_so} sentences had relation quantifiers");
}

#[test]
fn arity_raising_example() {
    let f = parse("ALL x EX2 R:1 (R(x))").unwrap();
    let p = prenex_so(&f);
    assert_eq!(classify(&p), HierarchyLabel::Sigma(1));
    match &p {
        Formula::ExistsSo { arity, .. } => assert_eq!(*arity, 2),
        other => panic!("unexpected {other}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>(), spacing in 1usize..4) {
        let sig = Signature::new([("edge", 2), ("p", 1)]).unwrap();
        let f = random_sentence(&mut rng(seed), &sig, &FormulaConfig::default());
        let text = f.to_string();
        prop_assert_eq!(parse(&text).unwrap(), f.clone());
        let spread = text.replace(' ', &" \n".repeat(spacing));
        prop_assert_eq!(parse(&spread).unwrap(), f);
    }
}

#[test]
fn truth_is_invariant_under_relabeling() {
    let sig = Signature::new([("edge", 2), ("p", 1)]).unwrap();
    let mut r = rng(5);
    for _ in 0..150 {
        let n = r.gen_range(1..=4);
        let a = random_structure(&mut r, &sig, n);
        let mut h: Vec<usize> = (0..n).collect();
        h.shuffle(&mut r);
        let b = a.relabel(&h).unwrap();
        assert_eq!(fingerprint(&a), fingerprint(&b));
        let iso = find_isomorphism(&a, &b).unwrap().expect("relabeling is an isomorphism");
        for (name, k) in sig.iter() {
            for t in a.relation(name).unwrap().tuples() {
                let image: Vec<usize> = t.iter().map(|&x| iso[x]).collect();
                assert!(b.relation(name).unwrap().contains(&image), "{name}{t:?} not preserved");
            }
            assert_eq!(a.relation(name).unwrap().len(), b.relation(name).unwrap().len(), "arity {k}");
        }
        for _ in 0..5 {
            let f = random_sentence(&mut r, &sig, &small_cfg());
            assert_eq!(truth(&a, &f), truth(&b, &f), "{f}");
        }
    }
}

// A first-order sentence mentioning the extra unary symbol R.
fn body_in_r(r: &mut impl Rng, sig: &Signature) -> Formula {
    let with_r = sig.extended([("R", 1)]).unwrap();
    let cfg = FormulaConfig {
        max_so_arity: 0,
        ..small_cfg()
    };
    loop {
        let phi = random_sentence(r, &with_r, &cfg);
        if phi.names().contains("R") {
            return phi;
        }
    }
}

#[test]
fn henkin_truth_grows_with_the_relation_universe() {
    let sig = Signature::new([("edge", 2)]).unwrap();
    let mut r = rng(17);
    let mut strict = 0;
    for _ in 0..200 {
        let n = r.gen_range(1..=3);
        let a = random_structure(&mut r, &sig, n);
        let full = DecomposableHenkinModel::full(a.clone(), 1, EvalOptions::default()).unwrap();
        let all = full.upsilon(1).to_vec();
        let sub: Vec<Relation> = all.iter().filter(|_| r.gen_bool(0.5)).cloned().collect();
        let small = DecomposableHenkinModel::with_upsilon(a.clone(), BTreeMap::from([(1, sub)])).unwrap();
        let phi = body_in_r(&mut r, &sig);
        let f = Formula::exists_so("R", 1, phi.clone());
        let (lo, hi) = (henkin_eval(&small, &f).unwrap(), henkin_eval(&full, &f).unwrap());
        assert!(!lo || hi, "{f}: true on a sub-universe, false on the full one");
        assert_eq!(hi, truth(&a, &f), "{f}");
        // a universal quantifier moves the other way
        let g = Formula::forall_so("R", 1, phi);
        assert!(!henkin_eval(&full, &g).unwrap() || henkin_eval(&small, &g).unwrap(), "{g}");
        if hi && !lo {
            strict += 1;
        }
    }
    assert!(strict > 0, "no sentence separated a sub-universe from the full one");
}
