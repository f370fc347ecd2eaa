//! Finite state machines with named, stably ordered transitions.
//!
//! A single [`Fsm`] type represents imprecise oracles (nondeterministic
//! machines), candidate oracles (deterministic submachines) and everything
//! in between. States, symbols and transitions keep their declaration order;
//! every iteration in the crate follows it.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(name: impl Into<String>) -> Self {
                Self(name.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

name_type!(StateId);
name_type!(InputSymbol);
name_type!(OutputSymbol);
name_type!(
    /// Stable transition name, e.g. `t5`. Doubles as the Boolean variable
    /// name in the propositional encoding.
    TransitionId
);

/// A test: a sequence of inputs applied from the initial state.
pub type Test = Vec<InputSymbol>;
/// The output sequence produced in answer to a test.
pub type Response = Vec<OutputSymbol>;

/// Transition by name, as written in a machine document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionDef {
    pub id: TransitionId,
    pub src: StateId,
    pub input: InputSymbol,
    pub output: OutputSymbol,
    pub tgt: StateId,
}

impl TransitionDef {
    pub fn new(
        id: impl Into<TransitionId>,
        src: impl Into<StateId>,
        input: impl Into<InputSymbol>,
        output: impl Into<OutputSymbol>,
        tgt: impl Into<StateId>,
    ) -> Self {
        Self {
            id: id.into(),
            src: src.into(),
            input: input.into(),
            output: output.into(),
            tgt: tgt.into(),
        }
    }
}

/// A transition resolved against its host machine: the fields are indices
/// into the host's declared state, input and output lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub id: TransitionId,
    pub src: usize,
    pub input: usize,
    pub output: usize,
    pub tgt: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub complete: bool,
    pub initially_connected: bool,
    pub deterministic: bool,
    pub uncertain_transitions: Vec<TransitionId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub inputs: Test,
    pub outputs: Response,
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}",
            format_word(&self.inputs),
            format_word(&self.outputs)
        )
    }
}

#[derive(Clone, Debug)]
pub struct Fsm {
    name: String,
    states: Vec<StateId>,
    initial: usize,
    inputs: Vec<InputSymbol>,
    outputs: Vec<OutputSymbol>,
    transitions: Vec<Transition>,
    state_index: HashMap<StateId, usize>,
    input_index: HashMap<InputSymbol, usize>,
    output_index: HashMap<OutputSymbol, usize>,
    transition_index: HashMap<TransitionId, usize>,
    // slot = state * |inputs| + input
    slots: Vec<Vec<usize>>,
}

impl PartialEq for Fsm {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.states == other.states
            && self.initial == other.initial
            && self.inputs == other.inputs
            && self.outputs == other.outputs
            && self.transitions == other.transitions
    }
}

impl Eq for Fsm {}

fn index_names<T: Clone + Eq + std::hash::Hash + fmt::Display>(
    items: &[T],
    kind: &'static str,
) -> Result<HashMap<T, usize>> {
    let mut map = HashMap::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        if map.insert(item.clone(), i).is_some() {
            return Err(Error::Duplicate {
                kind,
                name: item.to_string(),
            });
        }
    }
    Ok(map)
}

impl Fsm {
    /// Builds a machine, checking structural well-formedness only.
    /// Completeness and connectivity are reported by [`Fsm::validate`].
    pub fn new(
        name: impl Into<String>,
        states: Vec<StateId>,
        initial: StateId,
        inputs: Vec<InputSymbol>,
        outputs: Vec<OutputSymbol>,
        transitions: Vec<TransitionDef>,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::NoStates);
        }
        if inputs.is_empty() {
            return Err(Error::EmptyAlphabet("input"));
        }
        if outputs.is_empty() {
            return Err(Error::EmptyAlphabet("output"));
        }
        let state_index = index_names(&states, "state")?;
        let input_index = index_names(&inputs, "input symbol")?;
        let output_index = index_names(&outputs, "output symbol")?;
        let initial = *state_index
            .get(&initial)
            .ok_or_else(|| Error::UnknownState(initial.to_string()))?;

        let mut resolved = Vec::with_capacity(transitions.len());
        let mut transition_index = HashMap::with_capacity(transitions.len());
        let mut quads: HashMap<(usize, usize, usize, usize), usize> = HashMap::new();
        for def in transitions {
            let src = *state_index
                .get(&def.src)
                .ok_or_else(|| Error::UnknownState(def.src.to_string()))?;
            let tgt = *state_index
                .get(&def.tgt)
                .ok_or_else(|| Error::UnknownState(def.tgt.to_string()))?;
            let input = *input_index
                .get(&def.input)
                .ok_or_else(|| Error::UnknownInput(def.input.to_string()))?;
            let output = *output_index
                .get(&def.output)
                .ok_or_else(|| Error::UnknownOutput(def.output.to_string()))?;
            let idx = resolved.len();
            if transition_index.insert(def.id.clone(), idx).is_some() {
                return Err(Error::Duplicate {
                    kind: "transition id",
                    name: def.id.to_string(),
                });
            }
            if let Some(&other) = quads.get(&(src, input, output, tgt)) {
                let other: &Transition = &resolved[other];
                return Err(Error::DuplicateTransition(
                    other.id.to_string(),
                    def.id.to_string(),
                ));
            }
            quads.insert((src, input, output, tgt), idx);
            resolved.push(Transition {
                id: def.id,
                src,
                input,
                output,
                tgt,
            });
        }

        let mut slots = vec![Vec::new(); states.len() * inputs.len()];
        for (i, t) in resolved.iter().enumerate() {
            slots[t.src * inputs.len() + t.input].push(i);
        }

        Ok(Self {
            name: name.into(),
            states,
            initial,
            inputs,
            outputs,
            transitions: resolved,
            state_index,
            input_index,
            output_index,
            transition_index,
            slots,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn initial_state(&self) -> &StateId {
        &self.states[self.initial]
    }

    pub fn inputs(&self) -> &[InputSymbol] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[OutputSymbol] {
        &self.outputs
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, idx: usize) -> &Transition {
        &self.transitions[idx]
    }

    pub fn transition_defs(&self) -> Vec<TransitionDef> {
        self.transitions
            .iter()
            .map(|t| TransitionDef {
                id: t.id.clone(),
                src: self.states[t.src].clone(),
                input: self.inputs[t.input].clone(),
                output: self.outputs[t.output].clone(),
                tgt: self.states[t.tgt].clone(),
            })
            .collect()
    }

    pub fn transition_ids(&self) -> impl Iterator<Item = &TransitionId> {
        self.transitions.iter().map(|t| &t.id)
    }

    pub fn state_index(&self, s: &StateId) -> Option<usize> {
        self.state_index.get(s).copied()
    }

    pub fn input_index(&self, x: &InputSymbol) -> Option<usize> {
        self.input_index.get(x).copied()
    }

    pub fn output_index(&self, y: &OutputSymbol) -> Option<usize> {
        self.output_index.get(y).copied()
    }

    pub fn transition_index(&self, id: &TransitionId) -> Option<usize> {
        self.transition_index.get(id).copied()
    }

    pub fn has_transition(&self, id: &TransitionId) -> bool {
        self.transition_index.contains_key(id)
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    /// Slot index of a (state, input) pair.
    pub fn slot(&self, state: usize, input: usize) -> usize {
        state * self.inputs.len() + input
    }

    /// `T(s, x)` for a slot, as transition indices in declaration order.
    pub fn slot_transitions(&self, slot: usize) -> &[usize] {
        &self.slots[slot]
    }

    pub fn slot_of(&self, transition: usize) -> usize {
        let t = &self.transitions[transition];
        self.slot(t.src, t.input)
    }

    pub fn slot_state(&self, slot: usize) -> usize {
        slot / self.inputs.len()
    }

    pub fn slot_input(&self, slot: usize) -> usize {
        slot % self.inputs.len()
    }

    pub fn is_uncertain(&self, transition: usize) -> bool {
        self.slots[self.slot_of(transition)].len() > 1
    }

    pub fn is_deterministic(&self) -> bool {
        self.slots.iter().all(|s| s.len() <= 1)
    }

    pub fn is_complete(&self) -> bool {
        self.slots.iter().all(|s| !s.is_empty())
    }

    /// States reachable from the initial state, as a mask over states.
    pub fn reachable_states(&self) -> Vec<bool> {
        self.reachable_with(|_| true)
    }

    fn reachable_with(&self, allowed: impl Fn(usize) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(s) = queue.pop_front() {
            for x in 0..self.inputs.len() {
                for &t in &self.slots[self.slot(s, x)] {
                    if !allowed(t) {
                        continue;
                    }
                    let tgt = self.transitions[t].tgt;
                    if !seen[tgt] {
                        seen[tgt] = true;
                        queue.push_back(tgt);
                    }
                }
            }
        }
        seen
    }

    pub fn validate(&self) -> ValidationReport {
        ValidationReport {
            complete: self.is_complete(),
            initially_connected: self.reachable_states().iter().all(|&r| r),
            deterministic: self.is_deterministic(),
            uncertain_transitions: (0..self.transitions.len())
                .filter(|&t| self.is_uncertain(t))
                .map(|t| self.transitions[t].id.clone())
                .collect(),
        }
    }

    pub fn check_complete(&self) -> Result<()> {
        match self.slots.iter().position(|s| s.is_empty()) {
            None => Ok(()),
            Some(slot) => Err(Error::Incomplete {
                state: self.states[self.slot_state(slot)].to_string(),
                input: self.inputs[self.slot_input(slot)].to_string(),
            }),
        }
    }

    pub fn check_connected(&self) -> Result<()> {
        match self.reachable_states().iter().position(|r| !r) {
            None => Ok(()),
            Some(s) => Err(Error::Disconnected(self.states[s].to_string())),
        }
    }

    pub fn check_deterministic(&self) -> Result<()> {
        self.check_complete()?;
        match self.slots.iter().position(|s| s.len() > 1) {
            None => Ok(()),
            Some(slot) => Err(Error::Nondeterministic(format!(
                "state `{}` has {} transitions on input `{}`",
                self.states[self.slot_state(slot)],
                self.slots[slot].len(),
                self.inputs[self.slot_input(slot)]
            ))),
        }
    }

    /// `U_S`: the largest number of transitions sharing a (state, input).
    pub fn uncertainty_degree(&self) -> Result<usize> {
        self.check_complete()?;
        Ok(self.slots.iter().map(Vec::len).max().unwrap_or(1))
    }

    /// `|Dom(M)|`: the number of complete deterministic submachines over all
    /// states, i.e. the product of `|T(s, x)|` over every slot.
    pub fn candidate_count(&self) -> Result<BigUint> {
        self.check_complete()?;
        Ok(self
            .slots
            .iter()
            .fold(BigUint::one(), |acc, s| acc * BigUint::from(s.len())))
    }

    pub fn encode_test(&self, test: &[InputSymbol]) -> Result<Vec<usize>> {
        test.iter()
            .map(|x| {
                self.input_index(x)
                    .ok_or_else(|| Error::UnknownInput(x.to_string()))
            })
            .collect()
    }

    pub fn encode_response(&self, response: &[OutputSymbol]) -> Result<Vec<usize>> {
        response
            .iter()
            .map(|y| {
                self.output_index(y)
                    .ok_or_else(|| Error::UnknownOutput(y.to_string()))
            })
            .collect()
    }

    pub fn decode_response(&self, outputs: &[usize]) -> Response {
        outputs.iter().map(|&y| self.outputs[y].clone()).collect()
    }

    /// Output sequence of a deterministic machine from the initial state.
    pub fn response(&self, test: &[InputSymbol]) -> Result<Response> {
        self.check_deterministic()?;
        let test = self.encode_test(test)?;
        Ok(self.decode_response(&self.response_indices(&test)))
    }

    /// Index-level response of a complete deterministic machine. Callers
    /// must have checked determinism and completeness.
    pub(crate) fn response_indices(&self, test: &[usize]) -> Vec<usize> {
        let mut state = self.initial;
        test.iter()
            .map(|&x| {
                let t = &self.transitions[self.slots[self.slot(state, x)][0]];
                state = t.tgt;
                t.output
            })
            .collect()
    }

    pub fn trace_of(&self, e: &crate::exec::Execution) -> Result<Trace> {
        e.check_path(self)?;
        Ok(Trace {
            inputs: e
                .transitions()
                .iter()
                .map(|&t| self.inputs[self.transitions[t].input].clone())
                .collect(),
            outputs: e
                .transitions()
                .iter()
                .map(|&t| self.outputs[self.transitions[t].output].clone())
                .collect(),
        })
    }

    /// The submachine keeping the transitions selected by `keep` and the
    /// states they touch (plus the initial state). With `prune` set, states
    /// unreachable from the initial state over kept transitions are dropped
    /// together with their outgoing transitions.
    pub fn submachine(&self, keep: impl Fn(usize) -> bool, prune: bool) -> Fsm {
        let reachable = if prune {
            self.reachable_with(&keep)
        } else {
            vec![true; self.states.len()]
        };
        let kept: Vec<usize> = (0..self.transitions.len())
            .filter(|&t| keep(t) && reachable[self.transitions[t].src])
            .collect();
        let mut used = vec![false; self.states.len()];
        used[self.initial] = true;
        for &t in &kept {
            used[self.transitions[t].src] = true;
            used[self.transitions[t].tgt] = true;
        }
        let states = self
            .states
            .iter()
            .zip(&used)
            .filter(|(_, &u)| u)
            .map(|(s, _)| s.clone())
            .collect();
        let defs = self.transition_defs();
        let transitions = kept.into_iter().map(|t| defs[t].clone()).collect();
        Fsm::new(
            self.name.clone(),
            states,
            self.initial_state().clone(),
            self.inputs.clone(),
            self.outputs.clone(),
            transitions,
        )
        .expect("a submachine of a well-formed machine is well-formed")
    }

    /// Transition ids of `self` that are absent from `other`.
    pub fn removed_in(&self, other: &Fsm) -> Vec<TransitionId> {
        self.transition_ids()
            .filter(|id| !other.has_transition(id))
            .cloned()
            .collect()
    }

    /// Whether the transition id sets coincide.
    pub fn same_transitions(&self, other: &Fsm) -> bool {
        let a: HashSet<&TransitionId> = self.transition_ids().collect();
        let b: HashSet<&TransitionId> = other.transition_ids().collect();
        a == b
    }
}

/// Parses a test or response written either as a run of single-character
/// symbols (`babaab`) or as symbols separated by commas or whitespace.
pub fn parse_word<T: From<String>>(text: &str) -> Vec<T> {
    let text = text.trim();
    if text.contains(',') || text.contains(char::is_whitespace) {
        text.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| T::from(s.to_owned()))
            .collect()
    } else {
        text.chars().map(|c| T::from(c.to_string())).collect()
    }
}

/// Inverse of [`parse_word`]: concatenates single-character symbols and
/// comma-separates anything longer.
pub fn format_word<T: fmt::Display>(word: &[T]) -> String {
    let parts: Vec<String> = word.iter().map(ToString::to_string).collect();
    if parts.iter().all(|p| p.chars().count() == 1) {
        parts.concat()
    } else {
        parts.join(",")
    }
}
