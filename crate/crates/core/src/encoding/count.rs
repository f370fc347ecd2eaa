//! Candidate counting for formulas over a machine's transition variables.
//!
//! Counts the choice functions (one transition per slot) of a machine that
//! satisfy a formula. Exactly-one blocks matching a slot hold by
//! construction and are skipped; the remaining constraints (class
//! disjunctions, in practice) are decided by branching over slot choices
//! with three-valued evaluation. Once every constraint holds, the free
//! slots contribute the product of their sizes without enumeration.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::formula::Formula;
use crate::fsm::{Fsm, TransitionId};

/// A model count, exact or a lower bound when the search budget ran out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CandidateCount {
    Exact(BigUint),
    AtLeast(BigUint),
}

impl CandidateCount {
    pub fn lower_bound(&self) -> &BigUint {
        match self {
            CandidateCount::Exact(n) | CandidateCount::AtLeast(n) => n,
        }
    }

    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            CandidateCount::Exact(n) => Some(n),
            CandidateCount::AtLeast(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, CandidateCount::Exact(n) if n.is_zero())
    }
}

impl fmt::Display for CandidateCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CandidateCount::Exact(n) => write!(f, "{n}"),
            CandidateCount::AtLeast(n) => write!(f, ">={n}"),
        }
    }
}

/// Serialized as a JSON number when it fits in `u64`, as a decimal string
/// otherwise, and as `{"at_least": n}` when capped.
impl Serialize for CandidateCount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        fn number<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
            match u64::try_from(n) {
                Ok(v) => s.serialize_u64(v),
                Err(_) => s.serialize_str(&n.to_string()),
            }
        }
        match self {
            CandidateCount::Exact(n) => number(n, s),
            CandidateCount::AtLeast(n) => {
                use serde::ser::SerializeMap;
                struct Num<'a>(&'a BigUint);
                impl Serialize for Num<'_> {
                    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                        number(self.0, s)
                    }
                }
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("at_least", &Num(n))?;
                m.end()
            }
        }
    }
}

/// Renders a count in the `1.07E9` style with three significant figures.
pub fn format_scientific(n: &BigUint) -> String {
    let digits = n.to_string();
    if digits.len() <= 3 {
        return digits;
    }
    let exp = digits.len() - 1;
    let lead: u64 = digits[..4].parse().unwrap();
    let mut mantissa = (lead + 5) / 10;
    let mut exp = exp;
    if mantissa >= 1000 {
        mantissa /= 10;
        exp += 1;
    }
    format!("{}.{:02}E{}", mantissa / 100, mantissa % 100, exp)
}

impl<'de> Deserialize<'de> for CandidateCount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Num {
            Int(u64),
            Text(String),
        }
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Exact(Num),
            AtLeast { at_least: Num },
        }
        fn big<E: serde::de::Error>(n: Num) -> Result<BigUint, E> {
            match n {
                Num::Int(v) => Ok(BigUint::from(v)),
                Num::Text(t) => t.parse().map_err(E::custom),
            }
        }
        Ok(match Repr::deserialize(d)? {
            Repr::Exact(n) => CandidateCount::Exact(big(n)?),
            Repr::AtLeast { at_least } => CandidateCount::AtLeast(big(at_least)?),
        })
    }
}

struct Counter<'a> {
    fsm: &'a Fsm,
    slot_of: HashMap<&'a TransitionId, (usize, usize)>,
    assign: Vec<Option<usize>>,
    nodes: usize,
    budget: Option<usize>,
    capped: bool,
}

impl Counter<'_> {
    fn eval(&self, f: &Formula) -> Option<bool> {
        match f {
            Formula::True => Some(true),
            Formula::False => Some(false),
            Formula::Var(v) => self.var_value(v),
            Formula::Not(inner) => self.eval(inner).map(|b| !b),
            Formula::And(fs) => {
                let mut unknown = false;
                for c in fs {
                    match self.eval(c) {
                        Some(false) => return Some(false),
                        None => unknown = true,
                        Some(true) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(true)
                }
            }
            Formula::Or(fs) => {
                let mut unknown = false;
                for c in fs {
                    match self.eval(c) {
                        Some(true) => return Some(true),
                        None => unknown = true,
                        Some(false) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(false)
                }
            }
            Formula::ExactlyOne(vs) => {
                let mut trues = 0;
                let mut unknown = 0;
                for v in vs {
                    match self.var_value(v) {
                        Some(true) => trues += 1,
                        None => unknown += 1,
                        Some(false) => {}
                    }
                }
                match (trues, unknown) {
                    (t, _) if t > 1 => Some(false),
                    (_, 0) => Some(trues == 1),
                    _ => None,
                }
            }
        }
    }

    fn var_value(&self, v: &TransitionId) -> Option<bool> {
        let &(slot, t) = self.slot_of.get(v)?;
        match self.assign[slot] {
            Some(chosen) => Some(chosen == t),
            None if self.fsm.slot_transitions(slot).len() == 1 => Some(true),
            None => None,
        }
    }

    /// First unassigned, genuinely uncertain slot mentioned by `f` whose
    /// value is still open.
    fn branch_slot(&self, f: &Formula) -> Option<usize> {
        match f {
            Formula::Var(v) => {
                let &(slot, _) = self.slot_of.get(v)?;
                (self.assign[slot].is_none() && self.fsm.slot_transitions(slot).len() > 1)
                    .then_some(slot)
            }
            Formula::Not(inner) => self.branch_slot(inner),
            Formula::And(fs) | Formula::Or(fs) => fs
                .iter()
                .filter(|c| self.eval(c).is_none())
                .find_map(|c| self.branch_slot(c)),
            Formula::ExactlyOne(vs) => vs
                .iter()
                .find_map(|v| self.branch_slot(&Formula::Var(v.clone()))),
            Formula::True | Formula::False => None,
        }
    }

    fn free_product(&self) -> BigUint {
        self.assign
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_none())
            .fold(BigUint::one(), |acc, (slot, _)| {
                acc * BigUint::from(self.fsm.slot_transitions(slot).len())
            })
    }

    fn count(&mut self, constraints: &[&Formula]) -> BigUint {
        self.nodes += 1;
        if let Some(b) = self.budget {
            if self.nodes > b {
                self.capped = true;
                return BigUint::zero();
            }
        }
        let mut pending = Vec::with_capacity(constraints.len());
        for &c in constraints {
            match self.eval(c) {
                Some(false) => return BigUint::zero(),
                Some(true) => {}
                None => pending.push(c),
            }
        }
        if pending.is_empty() {
            return self.free_product();
        }
        let slot = self
            .branch_slot(pending[0])
            .expect("an undecided constraint mentions an open slot");
        let mut total = BigUint::zero();
        for &t in self.fsm.slot_transitions(slot) {
            self.assign[slot] = Some(t);
            total += self.count(&pending);
            if self.capped {
                break;
            }
        }
        self.assign[slot] = None;
        total
    }
}

/// Number of candidates of `fsm` (complete deterministic submachines over
/// all its slots) satisfying `formula`. Variables of transitions outside
/// `fsm` are treated as in [`Formula::restrict_to`]. With a node budget the
/// result may be a lower bound.
pub fn count_models(fsm: &Fsm, formula: &Formula, budget: Option<usize>) -> CandidateCount {
    let restricted = formula.restrict_to(fsm);
    let slot_sets: HashSet<Vec<&TransitionId>> = (0..fsm.num_slots())
        .map(|s| {
            let mut ids: Vec<&TransitionId> = fsm
                .slot_transitions(s)
                .iter()
                .map(|&t| &fsm.transition(t).id)
                .collect();
            ids.sort();
            ids
        })
        .collect();
    let constraints: Vec<&Formula> = restricted
        .conjuncts()
        .iter()
        .filter(|c| match c {
            Formula::ExactlyOne(vs) => {
                let mut ids: Vec<&TransitionId> = vs.iter().collect();
                ids.sort();
                !slot_sets.contains(&ids)
            }
            Formula::Var(v) => fsm
                .transition_index(v)
                .map(|t| fsm.is_uncertain(t))
                .unwrap_or(true),
            Formula::True => false,
            _ => true,
        })
        .collect();
    if fsm.num_slots() == 0 || (0..fsm.num_slots()).any(|s| fsm.slot_transitions(s).is_empty()) {
        return CandidateCount::Exact(BigUint::zero());
    }
    let mut slot_of = HashMap::new();
    for s in 0..fsm.num_slots() {
        for &t in fsm.slot_transitions(s) {
            slot_of.insert(&fsm.transition(t).id, (s, t));
        }
    }
    let mut counter = Counter {
        fsm,
        slot_of,
        assign: vec![None; fsm.num_slots()],
        nodes: 0,
        budget,
        capped: false,
    };
    let n = counter.count(&constraints);
    if counter.capped {
        CandidateCount::AtLeast(n)
    } else {
        CandidateCount::Exact(n)
    }
}
