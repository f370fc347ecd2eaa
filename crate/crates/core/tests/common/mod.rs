//! Brute-force reference implementations shared by the integration tests.
//! They walk choice functions directly and never call into the mining
//! engine, so they serve as independent oracles.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::Path;

use oraclemine::format::parse_fsm;
use oraclemine::harness::random_dfsm;
use oraclemine::{Fsm, InputSymbol, TransitionDef};
use rand::Rng;

pub fn load(name: &str) -> Fsm {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples/data")
        .join(format!("{name}.fsm"));
    parse_fsm(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn word(s: &str) -> Vec<InputSymbol> {
    s.chars()
        .map(|c| InputSymbol::from(c.to_string()))
        .collect()
}

/// One transition index per slot (`state * |X| + input`).
pub type Choice = Vec<usize>;

/// Every choice function of a complete machine.
pub fn candidates(fsm: &Fsm) -> Vec<Choice> {
    let n_in = fsm.inputs().len();
    let per_slot: Vec<Vec<usize>> = (0..fsm.states().len() * n_in)
        .map(|slot| {
            let (s, x) = (slot / n_in, slot % n_in);
            (0..fsm.transitions().len())
                .filter(|&t| fsm.transitions()[t].src == s && fsm.transitions()[t].input == x)
                .collect()
        })
        .collect();
    let mut out = vec![Vec::new()];
    for options in per_slot {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |&t| {
                    let mut c = prefix.clone();
                    c.push(t);
                    c
                })
            })
            .collect();
    }
    out
}

/// Outputs of a choice function on input indices.
pub fn run(fsm: &Fsm, choice: &Choice, test: &[usize]) -> Vec<usize> {
    let n_in = fsm.inputs().len();
    let mut s = fsm.initial();
    test.iter()
        .map(|&x| {
            let t = &fsm.transitions()[choice[s * n_in + x]];
            s = t.tgt;
            t.output
        })
        .collect()
}

pub fn input_indices(fsm: &Fsm, test: &[InputSymbol]) -> Vec<usize> {
    test.iter()
        .map(|x| fsm.inputs().iter().position(|y| y == x).unwrap())
        .collect()
}

pub fn outputs_of(fsm: &Fsm, response: &[oraclemine::OutputSymbol]) -> Vec<usize> {
    response
        .iter()
        .map(|y| fsm.outputs().iter().position(|z| z == y).unwrap())
        .collect()
}

/// Ids of the transitions reachable from the initial state under `choice`.
pub fn reachable_ids(fsm: &Fsm, choice: &Choice) -> BTreeSet<String> {
    let n_in = fsm.inputs().len();
    let mut seen = vec![false; fsm.states().len()];
    let mut stack = vec![fsm.initial()];
    seen[fsm.initial()] = true;
    let mut ids = BTreeSet::new();
    while let Some(s) = stack.pop() {
        for x in 0..n_in {
            let t = &fsm.transitions()[choice[s * n_in + x]];
            ids.insert(t.id.to_string());
            if !seen[t.tgt] {
                seen[t.tgt] = true;
                stack.push(t.tgt);
            }
        }
    }
    ids
}

/// All input words of length `len` over `k` symbols, in lexicographic
/// order.
pub fn words(k: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..k).map(move |x| {
                    let mut w = w.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Length of a shortest test separating two choice functions (possibly on
/// different machines with the same input order), searched up to `max`.
pub fn brute_min_distinguishing(
    a: &Fsm,
    ca: &Choice,
    b: &Fsm,
    cb: &Choice,
    max: usize,
) -> Option<usize> {
    let k = a.inputs().len();
    (1..=max).find(|&len| {
        words(k, len).iter().any(|w| {
            let ya: Vec<String> = run(a, ca, w)
                .iter()
                .map(|&y| a.outputs()[y].to_string())
                .collect();
            let yb: Vec<String> = run(b, cb, w)
                .iter()
                .map(|&y| b.outputs()[y].to_string())
                .collect();
            ya != yb
        })
    })
}

/// The choice function of a deterministic machine.
pub fn choice_of(fsm: &Fsm) -> Choice {
    candidates(fsm).pop().unwrap()
}

/// Whether two choice functions are equivalent, by Moore partition
/// refinement on the disjoint union of both machines. Outputs are compared
/// by name; inputs are matched by position.
pub fn brute_equivalent(a: &Fsm, ca: &Choice, b: &Fsm, cb: &Choice) -> bool {
    let k = a.inputs().len();
    let na = a.states().len();
    let n = na + b.states().len();
    let step = |s: usize, x: usize| -> (String, usize) {
        if s < na {
            let t = &a.transitions()[ca[s * k + x]];
            (a.outputs()[t.output].to_string(), t.tgt)
        } else {
            let t = &b.transitions()[cb[(s - na) * k + x]];
            (b.outputs()[t.output].to_string(), na + t.tgt)
        }
    };
    let mut class = vec![0usize; n];
    loop {
        let sigs: Vec<(usize, Vec<(String, usize)>)> = (0..n)
            .map(|s| {
                (
                    class[s],
                    (0..k)
                        .map(|x| {
                            let (y, t) = step(s, x);
                            (y, class[t])
                        })
                        .collect(),
                )
            })
            .collect();
        let mut distinct: Vec<&(usize, Vec<(String, usize)>)> = sigs.iter().collect();
        distinct.sort();
        distinct.dedup();
        let next: Vec<usize> = sigs
            .iter()
            .map(|sig| distinct.binary_search(&sig).unwrap())
            .collect();
        let stable = distinct.len() == {
            let mut c = class.clone();
            c.sort();
            c.dedup();
            c.len()
        };
        class = next;
        if stable {
            break;
        }
    }
    class[a.initial()] == class[na + b.initial()]
}

/// A random complete machine with at most 4 states, 2 inputs and 2 outputs
/// where each slot gets a second transition with probability 1/2.
pub fn small_machine(rng: &mut impl Rng) -> Fsm {
    let n = rng.random_range(1..=4);
    let plant = random_dfsm(n, 2, 2, rng.random()).unwrap();
    let mut defs: Vec<TransitionDef> = plant.transition_defs();
    let mut next = defs.len() + 1;
    for slot in 0..plant.num_slots() {
        if !rng.random_bool(0.5) {
            continue;
        }
        let t = plant.transition(plant.slot_transitions(slot)[0]);
        let (out, tgt) = loop {
            let pair = (rng.random_range(0..2), rng.random_range(0..n));
            if pair != (t.output, t.tgt) {
                break pair;
            }
        };
        defs.push(TransitionDef::new(
            format!("t{next}"),
            plant.states()[t.src].clone(),
            plant.inputs()[t.input].clone(),
            plant.outputs()[out].clone(),
            plant.states()[tgt].clone(),
        ));
        next += 1;
    }
    // declaration order by slot, so uncertain pairs sit together
    defs.sort_by_key(|d| {
        (
            plant.state_index(&d.src).unwrap(),
            plant.input_index(&d.input).unwrap(),
        )
    });
    Fsm::new(
        "R",
        plant.states().to_vec(),
        plant.initial_state().clone(),
        plant.inputs().to_vec(),
        plant.outputs().to_vec(),
        defs,
    )
    .unwrap()
}
