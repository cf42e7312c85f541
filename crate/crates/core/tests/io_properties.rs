mod common;

use common::*;
use polypol::io::{self, Model};
use polypol::param::{simplify, Inequality, Normalized, ParamError, ParamSet, Relation};
use proptest::prelude::*;
use rand::Rng;

fn random_inequalities(r: &mut TestRng, params: &ParamSet, count: usize) -> Vec<Inequality> {
    (0..count)
        .map(|_| {
            let rel = if r.gen_bool(0.5) { Relation::Lt } else { Relation::Le };
            Inequality::new(random_term(r, params), rel, random_term(r, params))
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn constraint_text_round_trip(seed in any::<u64>(), count in 0usize..8) {
        let mut r = rng(seed);
        let params = ParamSet::new(param_names("p", r.gen_range(1..=4))).unwrap();
        let Ok(k) = simplify(random_inequalities(&mut r, &params, count)) else { return Ok(()) };
        let text = io::render_constraint(&k, &params);
        let (parsed_params, parsed) = io::parse_constraint(&text).unwrap();
        prop_assert_eq!(&parsed_params, &params);
        prop_assert_eq!(&parsed, &k);
        prop_assert_eq!(io::render_constraint(&parsed, &parsed_params), text);
    }

    #[test]
    fn simplification_preserves_meaning(seed in any::<u64>(), count in 1usize..8) {
        let mut r = rng(seed);
        let params = ParamSet::new(param_names("p", r.gen_range(1..=3))).unwrap();
        let raw = random_inequalities(&mut r, &params, count);
        let simplified = simplify(raw.clone());
        for _ in 0..20 {
            let pi = random_instantiation(&mut r, &params, -10, 10);
            let all_hold = raw.iter().all(|i| i.holds_at(&pi).unwrap());
            match &simplified {
                Ok(k) => prop_assert_eq!(k.satisfies(&pi).unwrap(), all_hold),
                Err(ParamError::Contradiction) => prop_assert!(!all_hold),
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }
        if let Ok(k) = simplified {
            prop_assert_eq!(simplify(k.inequalities().to_vec()).unwrap(), k);
        }
    }

    #[test]
    fn normalization_is_idempotent_and_sound(seed in any::<u64>()) {
        let mut r = rng(seed);
        let params = ParamSet::new(param_names("p", 3)).unwrap();
        let ineq = random_inequalities(&mut r, &params, 1).remove(0);
        if let Normalized::Inequality(n) = ineq.normalize() {
            prop_assert_eq!(n.normalize(), Normalized::Inequality(n.clone()));
            for _ in 0..10 {
                let pi = random_instantiation(&mut r, &params, -10, 10);
                prop_assert_eq!(n.holds_at(&pi).unwrap(), ineq.holds_at(&pi).unwrap());
            }
        }
    }

    #[test]
    fn term_text_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let params = ParamSet::new(param_names("x", 4)).unwrap();
        let t = random_term(&mut r, &params);
        prop_assert_eq!(io::parse_term(&t.display(&params).to_string(), &params).unwrap(), t);
    }

    #[test]
    fn instantiation_text_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let params = ParamSet::new(param_names("p", r.gen_range(1..=5))).unwrap();
        let pi = random_instantiation(&mut r, &params, -50, 50);
        let text = io::render_instantiation(&pi, &params);
        prop_assert_eq!(io::parse_instantiation(&text, &params).unwrap(), pi);
    }

    #[test]
    fn model_documents_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = if r.gen_bool(0.5) {
            Model::Pmdp(random_pmdp(&mut r, 5, 3, 3))
        } else {
            Model::Pdwg(random_pmatrix(&mut r, 5))
        };
        let text = io::render_model(&model);
        let parsed = io::parse_model(&text).unwrap();
        prop_assert_eq!(&parsed, &model);
        prop_assert_eq!(io::render_model(&parsed), text);
    }
}

#[test]
fn shipped_models_parse() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/models");
    let pmdp = std::fs::read_to_string(format!("{dir}/paris_bologna.pmdp.json")).unwrap();
    let Model::Pmdp(m) = io::parse_model(&pmdp).unwrap() else {
        panic!("expected an MDP")
    };
    assert_eq!(m.states(), ["P", "M", "B"]);
    assert_eq!(m.num_transitions(), 5);
    let pdwg = std::fs::read_to_string(format!("{dir}/four_node.pdwg.json")).unwrap();
    let Model::Pdwg(g) = io::parse_model(&pdwg).unwrap() else {
        panic!("expected a matrix")
    };
    assert_eq!(g.edges().count(), 9);
}

#[test]
fn every_validation_failure_is_reported() {
    let doc = r#"{
      "type": "pmdp",
      "parameters": ["p", "p"],
      "states": ["A", "B"],
      "absorbing": "B",
      "actions": ["go", "stay"],
      "transitions": []
    }"#;
    let Err(io::IoError::Validation(errs)) = io::parse_model(doc) else {
        panic!()
    };
    assert!(errs[0].contains("duplicate"));

    let doc = r#"{
      "type": "pmdp",
      "parameters": [],
      "states": ["A", "B"],
      "absorbing": "C",
      "actions": ["go"],
      "transitions": []
    }"#;
    let Err(io::IoError::Validation(errs)) = io::parse_model(doc) else {
        panic!()
    };
    assert!(errs[0].contains("absorbing"));

    let doc = r#"{
      "type": "pmdp",
      "parameters": ["p"],
      "states": ["A", "B"],
      "absorbing": "B",
      "actions": ["go", "stay"],
      "transitions": [
        {"from": "A", "action": "run", "weight": "p", "to": [{"state": "B", "prob": "3/2"}]},
        {"from": "B", "action": "stay", "weight": "q", "to": [{"state": "Z", "prob": "1"}]}
      ]
    }"#;
    let Err(io::IoError::Validation(errs)) = io::parse_model(doc) else {
        panic!()
    };
    let joined = errs.join("\n");
    assert!(joined.contains("transitions[0].action"), "{joined}");
    assert!(joined.contains("transitions[1].weight"), "{joined}");
    assert!(joined.contains("transitions[1].to[0].state"), "{joined}");

    let doc = r#"{
      "type": "pmdp",
      "parameters": [],
      "states": ["A", "B"],
      "absorbing": "B",
      "actions": ["go", "stay"],
      "transitions": [
        {"from": "A", "action": "go", "weight": "1", "to": [{"state": "A", "prob": "1"}]},
        {"from": "B", "action": "stay", "weight": "0", "to": [{"state": "B", "prob": "1"}]}
      ]
    }"#;
    let Err(io::IoError::Validation(errs)) = io::parse_model(doc) else {
        panic!()
    };
    assert!(errs[0].contains("never reaches"), "{errs:?}");

    let doc = r#"{"type": "pdwg", "parameters": [], "states": ["1"],
        "edges": [{"from": "1", "to": "1", "weight": "1"}, {"from": "1", "to": "1", "weight": "2"}]}"#;
    let Err(io::IoError::Validation(errs)) = io::parse_model(doc) else {
        panic!()
    };
    assert!(errs[0].contains("twice"), "{errs:?}");

    let doc = r#"{"type": "pdwg", "parameters": [], "states": ["1"], "edges": [], "extra": 1}"#;
    assert!(matches!(io::parse_model(doc), Err(io::IoError::Syntax { .. })));
}
