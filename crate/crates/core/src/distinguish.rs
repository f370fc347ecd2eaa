//! Equivalence and shortest distinguishing tests for deterministic machines.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::fsm::{Fsm, InputSymbol, Test};

fn step(fsm: &Fsm, state: usize, input: usize) -> (usize, usize) {
    let t = fsm.transition(fsm.slot_transitions(fsm.slot(state, input))[0]);
    (t.output, t.tgt)
}

fn check(a: &Fsm, b: &Fsm) -> Result<Vec<usize>> {
    a.check_deterministic()?;
    b.check_deterministic()?;
    if a.inputs().len() != b.inputs().len() || a.outputs().len() != b.outputs().len() {
        return Err(Error::AlphabetMismatch);
    }
    if a.outputs().iter().any(|y| b.output_index(y).is_none()) {
        return Err(Error::AlphabetMismatch);
    }
    // input index of `a` -> input index of `b`
    a.inputs()
        .iter()
        .map(|x| b.input_index(x).ok_or(Error::AlphabetMismatch))
        .collect()
}

/// A shortest test on which `a` and `b` respond differently, or `None` if
/// they are equivalent. Among shortest tests the least one in the input
/// order of `a` is returned.
///
/// Breadth-first search over the reachable part of the product machine.
pub fn minimal_distinguishing_test(a: &Fsm, b: &Fsm) -> Result<Option<Test>> {
    let map = check(a, b)?;
    let out_b: Vec<usize> = b
        .outputs()
        .iter()
        .map(|y| a.output_index(y).expect("checked"))
        .collect();
    let start = (a.initial(), b.initial());
    // product state -> (predecessor, input) on a shortest path from `start`
    type Pair = (usize, usize);
    let mut parent: HashMap<Pair, Option<(Pair, usize)>> = HashMap::new();
    parent.insert(start, None);
    let mut queue = VecDeque::from([start]);
    while let Some(pair) = queue.pop_front() {
        for (x, &xb) in map.iter().enumerate() {
            let (ya, na) = step(a, pair.0, x);
            let (yb, nb) = step(b, pair.1, xb);
            if ya != out_b[yb] {
                let mut word = vec![x];
                let mut cur = pair;
                while let Some((prev, input)) = parent[&cur] {
                    word.push(input);
                    cur = prev;
                }
                word.reverse();
                return Ok(Some(
                    word.into_iter().map(|i| a.inputs()[i].clone()).collect(),
                ));
            }
            if let Entry::Vacant(slot) = parent.entry((na, nb)) {
                slot.insert(Some((pair, x)));
                queue.push_back((na, nb));
            }
        }
    }
    Ok(None)
}

/// Whether `a` and `b` produce the same response to every test.
pub fn equivalent(a: &Fsm, b: &Fsm) -> Result<bool> {
    Ok(minimal_distinguishing_test(a, b)?.is_none())
}

/// Whether `test` separates the two machines.
pub fn distinguishes(a: &Fsm, b: &Fsm, test: &[InputSymbol]) -> Result<bool> {
    Ok(a.response(test)? != b.response(test)?)
}
