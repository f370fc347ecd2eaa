mod common;

use std::collections::BTreeSet;

use common::*;
use num_bigint::BigUint;
use oraclemine::distinguish::{distinguishes, equivalent, minimal_distinguishing_test};
use oraclemine::encoding::{
    count_models, encode_class, find_nonequivalent_pair, CandidateCount, PairOutcome,
};
use oraclemine::exec::{partition_responses, reduce};
use oraclemine::format::{parse_fsm, render_fsm};
use oraclemine::harness::{embed, inject_uncertainty, random_dfsm};
use oraclemine::json::FsmObject;
use oraclemine::mining::{precise_oracle_mining, EmulatedExpert, MiningConfig};
use oraclemine::{Fsm, InputSymbol};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn machine(seed: u64) -> Fsm {
    small_machine(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn symbols(m: &Fsm, w: &[usize]) -> Vec<InputSymbol> {
    w.iter().map(|&x| m.inputs()[x].clone()).collect()
}

fn test_word() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..2usize, 1..=5)
}

/// Reachable transition-id sets of the candidates of `m` that satisfy the
/// brute-force filter.
fn domain(m: &Fsm, keep: impl Fn(&Choice) -> bool) -> BTreeSet<BTreeSet<String>> {
    candidates(m)
        .iter()
        .filter(|c| keep(c))
        .map(|c| reachable_ids(m, c))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_covers_every_candidate_once(seed in any::<u64>(), w in test_word()) {
        let m = machine(seed);
        let p = partition_responses(&m, &symbols(&m, &w)).unwrap();
        let all = candidates(&m);
        let mut total = BigUint::from(0u32);
        for class in &p.classes {
            let y = outputs_of(&m, &class.response);
            let brute = all.iter().filter(|c| run(&m, c, &w) == y).count();
            prop_assert!(brute > 0, "implausible response offered");
            prop_assert_eq!(&class.subdomain_size, &BigUint::from(brute));
            total += &class.subdomain_size;
        }
        prop_assert_eq!(total, BigUint::from(all.len()));
        let brute_responses: BTreeSet<Vec<usize>> = all.iter().map(|c| run(&m, c, &w)).collect();
        prop_assert_eq!(brute_responses.len(), p.classes.len());
    }

    #[test]
    fn class_formula_counts_match_brute_force(seed in any::<u64>(), w in test_word()) {
        let m = machine(seed);
        let p = partition_responses(&m, &symbols(&m, &w)).unwrap();
        for class in &p.classes {
            let y = outputs_of(&m, &class.response);
            let brute = candidates(&m).iter().filter(|c| run(&m, c, &w) == y).count();
            let phi = encode_class(&m, class).unwrap();
            prop_assert_eq!(count_models(&m, &phi, None), CandidateCount::Exact(BigUint::from(brute)));
        }
    }

    #[test]
    fn reduction_keeps_every_consistent_candidate(seed in any::<u64>(), w in test_word()) {
        let m = machine(seed);
        let test = symbols(&m, &w);
        let p = partition_responses(&m, &test).unwrap();
        for class in &p.classes {
            let y = outputs_of(&m, &class.response);
            let reduced = reduce(&m, &test, &class.response, class).unwrap();
            prop_assert!(reduced.is_complete());
            let brute = domain(&m, |c| run(&m, c, &w) == y);
            let dom = domain(&reduced, |_| true);
            prop_assert!(brute.is_subset(&dom));
            // Reducing again on the same observation changes nothing.
            let again = partition_responses(&reduced, &test).unwrap();
            let class2 = again.class(&class.response).expect("response still plausible");
            let twice = reduce(&reduced, &test, &class.response, class2).unwrap();
            prop_assert!(twice.same_transitions(&reduced));
        }
    }

    #[test]
    fn responses_of_extensions_refine_prefixes(seed in any::<u64>(), w in test_word(), x in 0..2usize) {
        let m = machine(seed);
        let short = partition_responses(&m, &symbols(&m, &w)).unwrap();
        let mut longer = w.clone();
        longer.push(x);
        let long = partition_responses(&m, &symbols(&m, &longer)).unwrap();
        let prefixes: BTreeSet<_> = long.classes.iter().map(|c| c.response[..w.len()].to_vec()).collect();
        let shorts: BTreeSet<_> = short.classes.iter().map(|c| c.response.clone()).collect();
        prop_assert_eq!(prefixes, shorts);
        for class in &short.classes {
            let sum: BigUint = long
                .classes
                .iter()
                .filter(|c| c.response[..w.len()] == class.response[..])
                .map(|c| c.subdomain_size.clone())
                .sum();
            prop_assert_eq!(&sum, &class.subdomain_size);
        }
    }

    #[test]
    fn pair_search_agrees_with_brute_force(seed in any::<u64>(), w in test_word(), pick in any::<prop::sample::Index>()) {
        let m = machine(seed);
        let p = partition_responses(&m, &symbols(&m, &w)).unwrap();
        let class = pick.get(&p.classes);
        let phi = encode_class(&m, class).unwrap();
        let y = outputs_of(&m, &class.response);
        let models: Vec<Choice> = candidates(&m).into_iter().filter(|c| run(&m, c, &w) == y).collect();
        match find_nonequivalent_pair(&m, &phi, 1 << 12).unwrap() {
            PairOutcome::Single { dfsm, .. } => {
                let d = choice_of(&dfsm);
                for c in &models {
                    prop_assert!(brute_equivalent(&m, c, &dfsm, &d));
                }
            }
            PairOutcome::Pair { first, second, first_model, second_model, test } => {
                prop_assert!(first_model.satisfies(&phi) && second_model.satisfies(&phi));
                prop_assert!(distinguishes(&first, &second, &test).unwrap());
            }
            PairOutcome::Inconclusive { .. } => prop_assert!(false, "cap reached on a tiny machine"),
        }
    }

    #[test]
    fn minimal_test_is_shortest(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_dfsm(rng.random_range(1..=4), 2, 2, rng.random()).unwrap();
        let b = random_dfsm(rng.random_range(1..=4), 2, 2, rng.random()).unwrap();
        let (ca, cb) = (choice_of(&a), choice_of(&b));
        let brute = brute_min_distinguishing(&a, &ca, &b, &cb, 8);
        match minimal_distinguishing_test(&a, &b).unwrap() {
            Some(test) => {
                prop_assert_eq!(Some(test.len()), brute);
                prop_assert!(distinguishes(&a, &b, &test).unwrap());
                prop_assert!(!distinguishes(&a, &b, &test[..test.len() - 1]).unwrap());
            }
            None => {
                prop_assert!(brute.is_none());
                prop_assert!(brute_equivalent(&a, &ca, &b, &cb));
            }
        }
        prop_assert_eq!(equivalent(&a, &b).unwrap(), equivalent(&b, &a).unwrap());
        prop_assert!(equivalent(&a, &a).unwrap());
    }

    #[test]
    fn text_and_json_round_trip(seed in any::<u64>()) {
        let m = machine(seed);
        prop_assert_eq!(&parse_fsm(&render_fsm(&m)).unwrap(), &m);
        let json = serde_json::to_string(&FsmObject::from(&m)).unwrap();
        let back: FsmObject = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back.into_fsm().unwrap(), &m);
    }

    #[test]
    fn random_plants_are_reproducible_and_well_formed(n in 1..12usize, k in 1..4usize, l in 1..4usize, seed in any::<u64>()) {
        let a = random_dfsm(n, k, l, seed).unwrap();
        prop_assert_eq!(&a, &random_dfsm(n, k, l, seed).unwrap());
        prop_assert!(a.is_deterministic() && a.is_complete());
        prop_assert!(a.check_connected().is_ok());
        prop_assert_eq!(a.states().len(), n);
    }

    #[test]
    fn injection_contains_the_plant(n in 2..8usize, degree in 2..4usize, seed in any::<u64>()) {
        let plant = random_dfsm(n, 2, 2, seed).unwrap();
        let m = inject_uncertainty(&plant, degree, seed ^ 1).unwrap();
        prop_assert_eq!(m.uncertainty_degree().unwrap(), degree);
        prop_assert_eq!(m.candidate_count().unwrap(), BigUint::from(degree).pow((n * 2) as u32));
        let model = embed(&plant, &m).expect("plant is a candidate");
        let dfsm = oraclemine::encoding::extract_dfsm(&m, &model);
        prop_assert!(equivalent(&dfsm, &plant).unwrap());
    }

    #[test]
    fn mining_recovers_any_candidate(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let m = machine(seed);
        let all = candidates(&m);
        let plant_choice = pick.get(&all);
        let keep: BTreeSet<usize> = plant_choice.iter().copied().collect();
        let plant = m.submachine(|t| keep.contains(&t), false);
        let mut expert = EmulatedExpert::new(plant.clone()).unwrap();
        let out = precise_oracle_mining(&m, &[], &mut expert, &MiningConfig::default()).unwrap();
        prop_assert!(equivalent(&out.mined, &plant).unwrap());
        // The returned tests separate the plant from every other behaviour.
        for c in &all {
            if !brute_equivalent(&m, c, &plant, &choice_of(&plant)) {
                let seen = out.adequate_tests.iter().any(|t| run(&m, c, &input_indices(&m, t)) != run(&plant, &choice_of(&plant), &input_indices(&plant, t)));
                prop_assert!(seen, "adequate tests miss a non-equivalent candidate");
            }
        }
    }
}
