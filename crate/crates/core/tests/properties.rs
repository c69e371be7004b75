mod common;

use std::collections::{BTreeMap, BTreeSet};

use parity_mu::bridge::{game_to_term, term_to_game};
use parity_mu::game::{zielonka_solve, Outcome, Player};
use parity_mu::generate::{random_game, random_term, GameParams, TermParams};
use parity_mu::oracle::{count_sequence, OracleError};
use parity_mu::semantics::{
    eval, finiteness_analysis, sized_env, Env, EvalError, Finiteness, SetValue,
};
use parity_mu::term::{
    alpha_eq, barendregt, free_vars, is_barendregt, parse, print, substitute, MuTerm,
};
use proptest::prelude::*;

const BUDGET: usize = 64;

fn term(seed: u64, params: &[&str], depth: usize) -> MuTerm {
    let p = TermParams {
        max_depth: depth,
        params: params.iter().map(|s| s.to_string()).collect(),
        ..TermParams::default()
    };
    random_term(&mut common::rng(seed), &p)
}

/// `None` when the evaluation hits a resource limit.
fn value(t: &MuTerm, env: &Env) -> Option<SetValue> {
    match eval(t, env, BUDGET) {
        Ok(v) => Some(v),
        Err(EvalError::ResourceLimit(_)) => None,
        Err(e) => panic!("{} failed: {e}", print(t)),
    }
}

fn same_value(a: &SetValue, b: &SetValue) -> bool {
    match (a.elements(), b.elements()) {
        (Some(x), Some(y)) => x == y,
        (None, None) => true,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_then_parse_is_alpha_equal(seed in any::<u64>()) {
        let t = term(seed, &["A", "B"], 5);
        let back = parse(&print(&t)).expect("printed terms parse");
        prop_assert!(alpha_eq(&t, &back), "{}", print(&t));
    }

    #[test]
    fn substitution_commutes_with_evaluation(seed in any::<u64>(), a in 0usize..3) {
        let t = term(seed, &["X", "A"], 4);
        let s = term(seed.wrapping_add(1), &["A"], 3);
        let env = sized_env([("A", a)]);
        let Some(sv) = value(&s, &env) else { return Ok(()) };
        let Some(elems) = sv.elements() else { return Ok(()) };
        let mut inner = env.clone();
        inner.insert("X".into(), elems.clone());
        let Some(lhs) = value(&substitute(&t, "X", &s), &env) else { return Ok(()) };
        let Some(rhs) = value(&t, &inner) else { return Ok(()) };
        prop_assert!(same_value(&lhs, &rhs), "{} with X = {}", print(&t), print(&s));
    }

    #[test]
    fn renaming_binders_preserves_values(seed in any::<u64>(), a in 0usize..3) {
        let t = term(seed, &["A"], 5);
        let s = term(seed.wrapping_add(7), &["A"], 3);
        // Substitution shares `s`, which may leave shadowed binders behind.
        let shared = substitute(&t, "A", &MuTerm::prod(vec![s.clone(), MuTerm::var("A")]));
        let (canon, _) = barendregt(&shared);
        prop_assert!(is_barendregt(&canon));
        prop_assert!(alpha_eq(&shared, &canon));
        let env = sized_env([("A", a)]);
        if let (Some(x), Some(y)) = (value(&shared, &env), value(&canon, &env)) {
            prop_assert!(same_value(&x, &y), "{}", print(&shared));
        }
    }

    #[test]
    fn analysis_agrees_with_evaluation(seed in any::<u64>(), a in 0usize..4, b in 0usize..4) {
        let t = term(seed, &["A", "B"], 5);
        let env = sized_env([("A", a), ("B", b)]);
        let an = finiteness_analysis(&t, [("A", a), ("B", b)]).expect("analysis");
        let Some(v) = value(&t, &env) else { return Ok(()) };
        let expected = match v.cardinality() {
            None => Finiteness::Infinite,
            Some(0) => Finiteness::Empty,
            Some(_) => Finiteness::NonemptyFinite,
        };
        prop_assert_eq!(an.verdict, expected, "{}", print(&t));
        prop_assert_eq!(an.certificate.is_some(), expected == Finiteness::Infinite);
    }

    #[test]
    fn emptiness_matches_the_game(seed in any::<u64>(), a in 0usize..2, b in 0usize..2) {
        let t = term(seed, &["A", "B"], 5);
        let g = term_to_game(&t);
        let outcome = |n: usize| if n > 0 { Outcome::Win } else { Outcome::Lose };
        let assumption: BTreeMap<String, Outcome> =
            [("A".to_string(), outcome(a)), ("B".to_string(), outcome(b))].into();
        let r = zielonka_solve(&g, &assumption).expect("solvable");
        let init = g.initial().expect("initial vertex");
        let eva_wins = match g.label(init) {
            Some(x) => assumption[x] == Outcome::Win,
            None => r.winner(init) == Some(Player::Eva),
        };
        let an = finiteness_analysis(&t, [("A", a), ("B", b)]).expect("analysis");
        prop_assert_eq!(eva_wins, an.verdict != Finiteness::Empty, "{}", print(&t));
    }

    #[test]
    fn better_assumptions_only_help_eva(seed in any::<u64>()) {
        let t = term(seed, &["A", "B", "C"], 5);
        let g = term_to_game(&t);
        let labels = g.labels();
        let mut rng = common::rng(seed);
        let low: BTreeMap<String, Outcome> = labels
            .iter()
            .map(|x| (x.clone(), if rand::Rng::gen_bool(&mut rng, 0.5) { Outcome::Win } else { Outcome::Lose }))
            .collect();
        let mut high = low.clone();
        if let Some(x) = labels.first() {
            high.insert(x.clone(), Outcome::Win);
        }
        let lo = zielonka_solve(&g, &low).expect("solvable");
        let hi = zielonka_solve(&g, &high).expect("solvable");
        prop_assert!(lo.eva_region.is_subset(&hi.eva_region));
        prop_assert!(hi.adam_region.is_subset(&lo.adam_region));
    }

    #[test]
    fn prefix_counts_never_decrease(seed in any::<u64>()) {
        let g = random_game(&mut common::rng(seed), &GameParams::default());
        match count_sequence(&g, 8) {
            Ok(seq) => prop_assert!(seq.windows(2).all(|w| w[0] <= w[1]), "{:?}", seq),
            Err(OracleError::TooLarge { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn term_game_term_preserves_values(seed in any::<u64>(), a in 0usize..3) {
        let t = term(seed, &["A"], 4);
        let back = game_to_term(&term_to_game(&t)).expect("translatable");
        let fv: BTreeSet<String> = free_vars(&back).names().iter().cloned().collect();
        prop_assert!(fv.iter().all(|x| x == "A"), "{:?}", fv);
        let env = sized_env([("A", a)]);
        if let (Some(x), Some(y)) = (value(&t, &env), value(&back, &env)) {
            prop_assert_eq!(x.cardinality(), y.cardinality(), "{} vs {}", print(&t), print(&back));
        }
    }
}
