//! Deterministic executions, response partitions and the reduction of an
//! imprecise machine by a test/response pair.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::encoding::{self, count_models, CandidateCount};
use crate::error::{Error, Result};
use crate::fsm::{Fsm, InputSymbol, OutputSymbol, Response, Test, TransitionId};

/// Default bound on the number of deterministic executions enumerated for
/// one test.
pub const DEFAULT_EXECUTION_CAP: usize = 1_000_000;

/// A path of transitions from the initial state, stored as indices into the
/// host machine.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Execution {
    transitions: Vec<usize>,
}

impl Execution {
    /// Resolves transition ids against `fsm` and checks that they form a
    /// path from the initial state.
    pub fn from_ids(fsm: &Fsm, ids: &[TransitionId]) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::Empty("execution"));
        }
        let transitions = ids
            .iter()
            .map(|id| {
                fsm.transition_index(id)
                    .ok_or_else(|| Error::UnknownTransition(id.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let e = Self { transitions };
        e.check_path(fsm)?;
        Ok(e)
    }

    pub(crate) fn from_indices(transitions: Vec<usize>) -> Self {
        Self { transitions }
    }

    pub fn transitions(&self) -> &[usize] {
        &self.transitions
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn ids(&self, fsm: &Fsm) -> Vec<TransitionId> {
        self.transitions
            .iter()
            .map(|&t| fsm.transition(t).id.clone())
            .collect()
    }

    /// Space-separated transition ids.
    pub fn display(&self, fsm: &Fsm) -> String {
        self.ids(fsm)
            .iter()
            .map(TransitionId::as_str)
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub(crate) fn check_path(&self, fsm: &Fsm) -> Result<()> {
        let mut state = fsm.initial();
        for (i, &t) in self.transitions.iter().enumerate() {
            let tr = fsm
                .transitions()
                .get(t)
                .ok_or_else(|| Error::UnknownTransition(format!("#{t}")))?;
            if tr.src != state {
                return Err(Error::BrokenPath(i));
            }
            state = tr.tgt;
        }
        Ok(())
    }

    /// Checks that no two transitions of the execution share a (state,
    /// input) pair while differing.
    pub fn check_deterministic(&self, fsm: &Fsm) -> Result<()> {
        let mut committed: Vec<Option<usize>> = vec![None; fsm.num_slots()];
        for &t in &self.transitions {
            let slot = fsm.slot_of(t);
            match committed[slot] {
                Some(prev) if prev != t => {
                    let tr = fsm.transition(t);
                    return Err(Error::NondeterministicExecution {
                        state: fsm.states()[tr.src].to_string(),
                        input: fsm.inputs()[tr.input].to_string(),
                    });
                }
                _ => committed[slot] = Some(t),
            }
        }
        Ok(())
    }

    pub(crate) fn outputs(&self, fsm: &Fsm) -> Vec<usize> {
        self.transitions
            .iter()
            .map(|&t| fsm.transition(t).output)
            .collect()
    }
}

/// `E_{x̄/ȳ}` together with the size of the candidate subdomain producing
/// `response`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionClass {
    pub response: Response,
    pub executions: Vec<Execution>,
    pub subdomain_size: BigUint,
}

/// The plausible responses to a test with their execution classes, ordered
/// lexicographically by response.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResponsePartition {
    pub test: Test,
    pub classes: Vec<ExecutionClass>,
}

impl ResponsePartition {
    pub fn class(&self, response: &[OutputSymbol]) -> Option<&ExecutionClass> {
        self.classes.iter().find(|c| c.response == response)
    }

    pub fn responses(&self) -> impl Iterator<Item = &Response> {
        self.classes.iter().map(|c| &c.response)
    }
}

/// All deterministic executions from the initial state whose input
/// projection is `test`.
pub fn deterministic_executions(fsm: &Fsm, test: &[InputSymbol]) -> Result<Vec<Execution>> {
    deterministic_executions_capped(fsm, test, DEFAULT_EXECUTION_CAP)
}

pub fn deterministic_executions_capped(
    fsm: &Fsm,
    test: &[InputSymbol],
    cap: usize,
) -> Result<Vec<Execution>> {
    if test.is_empty() {
        return Err(Error::Empty("test"));
    }
    fsm.check_complete()?;
    let test = fsm.encode_test(test)?;
    let mut out = Vec::new();
    let mut committed: Vec<Option<usize>> = vec![None; fsm.num_slots()];
    let mut path = Vec::with_capacity(test.len());
    extend(
        fsm,
        &test,
        fsm.initial(),
        &mut committed,
        &mut path,
        &mut out,
        cap,
    )?;
    Ok(out)
}

fn extend(
    fsm: &Fsm,
    test: &[usize],
    state: usize,
    committed: &mut Vec<Option<usize>>,
    path: &mut Vec<usize>,
    out: &mut Vec<Execution>,
    cap: usize,
) -> Result<()> {
    let depth = path.len();
    if depth == test.len() {
        if out.len() >= cap {
            return Err(Error::ExecutionCapExceeded(cap));
        }
        out.push(Execution::from_indices(path.clone()));
        return Ok(());
    }
    let slot = fsm.slot(state, test[depth]);
    if let Some(t) = committed[slot] {
        path.push(t);
        let r = extend(fsm, test, fsm.transition(t).tgt, committed, path, out, cap);
        path.pop();
        return r;
    }
    for &t in fsm.slot_transitions(slot) {
        committed[slot] = Some(t);
        path.push(t);
        let r = extend(fsm, test, fsm.transition(t).tgt, committed, path, out, cap);
        path.pop();
        committed[slot] = None;
        r?;
    }
    Ok(())
}

/// Groups deterministic executions by response, without subdomain sizes.
pub(crate) fn group_by_response(
    fsm: &Fsm,
    test: &[InputSymbol],
    cap: usize,
) -> Result<Vec<(Response, Vec<Execution>)>> {
    let mut groups: BTreeMap<Response, Vec<Execution>> = BTreeMap::new();
    for e in deterministic_executions_capped(fsm, test, cap)? {
        let response = fsm.decode_response(&e.outputs(fsm));
        groups.entry(response).or_default().push(e);
    }
    Ok(groups.into_iter().collect())
}

/// `Y_{M,x̄}` with `E_{x̄/ȳ}` and `|P_{x̄/ȳ}|` for every plausible response.
pub fn partition_responses(fsm: &Fsm, test: &[InputSymbol]) -> Result<ResponsePartition> {
    let mut classes = Vec::new();
    for (response, executions) in group_by_response(fsm, test, DEFAULT_EXECUTION_CAP)? {
        let mut class = ExecutionClass {
            response,
            executions,
            subdomain_size: BigUint::zero(),
        };
        let formula = encoding::encode_class(fsm, &class)?;
        class.subdomain_size = match count_models(fsm, &formula, None) {
            CandidateCount::Exact(n) => n,
            CandidateCount::AtLeast(_) => unreachable!("unbounded count is exact"),
        };
        classes.push(class);
    }
    Ok(ResponsePartition {
        test: test.to_vec(),
        classes,
    })
}

/// Transitions eligible for the candidates involved in `e`: those `e` uses,
/// plus every transition at a (state, input) pair `e` never visits.
pub fn eligible_transitions(fsm: &Fsm, e: &Execution) -> Vec<TransitionId> {
    let mask = eligible_mask(fsm, e);
    fsm.transitions()
        .iter()
        .zip(mask)
        .filter(|(_, m)| *m)
        .map(|(t, _)| t.id.clone())
        .collect()
}

fn eligible_mask(fsm: &Fsm, e: &Execution) -> Vec<bool> {
    let mut mask = vec![true; fsm.transitions().len()];
    let mut used = vec![false; fsm.transitions().len()];
    for &t in e.transitions() {
        used[t] = true;
    }
    for &t in e.transitions() {
        for &other in fsm.slot_transitions(fsm.slot_of(t)) {
            if !used[other] {
                mask[other] = false;
            }
        }
    }
    mask
}

/// `M_{x̄/ȳ}`: keeps the transitions eligible for some execution of the
/// class, then drops states no longer reachable from the initial state.
pub fn reduce(
    fsm: &Fsm,
    test: &[InputSymbol],
    response: &[OutputSymbol],
    class: &ExecutionClass,
) -> Result<Fsm> {
    if class.executions.is_empty() {
        return Err(Error::ResponseNotOffered(crate::fsm::format_word(response)));
    }
    let test = fsm.encode_test(test)?;
    let response_idx = fsm.encode_response(response)?;
    let mut keep = vec![false; fsm.transitions().len()];
    for e in &class.executions {
        e.check_path(fsm)?;
        e.check_deterministic(fsm)?;
        let inputs: Vec<usize> = e
            .transitions()
            .iter()
            .map(|&t| fsm.transition(t).input)
            .collect();
        if inputs != test || e.outputs(fsm) != response_idx {
            return Err(Error::Protocol(
                "execution class does not match the test/response pair".into(),
            ));
        }
        for (k, m) in keep.iter_mut().zip(eligible_mask(fsm, e)) {
            *k |= m;
        }
    }
    Ok(fsm.submachine(|t| keep[t], true))
}
