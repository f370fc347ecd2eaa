//! Boolean encoding of candidate spaces.
//!
//! Every transition of the imprecise machine is a propositional variable.
//! [`encode_machine`] builds the conjunction of exactly-one blocks whose
//! models are the candidate oracles; [`encode_class`] characterises the
//! candidates producing one response to one test. Models are found with the
//! bundled [`SatSolver`], counted with [`count_models`], and turned back
//! into machines with [`extract_dfsm`].

mod cnf;
mod count;
mod formula;
mod solver;

use std::collections::BTreeMap;

pub use cnf::Cnf;
pub use count::{count_models, format_scientific, CandidateCount};
pub use formula::Formula;
pub use solver::{Lit, SatSolver};

use crate::distinguish;
use crate::error::{Error, Result};
use crate::exec::{Execution, ExecutionClass};
use crate::fsm::{Fsm, Test, TransitionId};

/// Default number of candidate models examined by the pair search.
pub const DEFAULT_PAIR_CAP: usize = 64;

/// `ξ_τ` over a set of transitions.
pub fn exactly_one(vars: impl IntoIterator<Item = TransitionId>) -> Result<Formula> {
    Formula::exactly_one(vars)
}

/// `φ_M`: one exactly-one block per (state, input) pair. Blocks of certain
/// transitions (bare variables) come first in declaration order, followed by
/// the uncertain blocks in slot order.
pub fn encode_machine(fsm: &Fsm) -> Result<Formula> {
    fsm.check_complete()?;
    let mut certain: Vec<usize> = Vec::new();
    let mut blocks = Vec::new();
    for slot in 0..fsm.num_slots() {
        let ts = fsm.slot_transitions(slot);
        if ts.len() == 1 {
            certain.push(ts[0]);
        } else {
            blocks.push(Formula::exactly_one(
                ts.iter().map(|&t| fsm.transition(t).id.clone()),
            )?);
        }
    }
    certain.sort_unstable();
    Ok(Formula::and(
        certain
            .into_iter()
            .map(|t| Formula::Var(fsm.transition(t).id.clone()))
            .chain(blocks),
    ))
}

/// `φ_e`: the conjunction of the uncertain transitions used by `e`, in
/// order of first use.
pub fn encode_execution(fsm: &Fsm, e: &Execution) -> Result<Formula> {
    e.check_path(fsm)?;
    e.check_deterministic(fsm)?;
    let mut seen = vec![false; fsm.transitions().len()];
    let mut vars = Vec::new();
    for &t in e.transitions() {
        if fsm.is_uncertain(t) && !seen[t] {
            seen[t] = true;
            vars.push(Formula::Var(fsm.transition(t).id.clone()));
        }
    }
    Ok(Formula::and(vars))
}

/// `φ_E`: the disjunction of the execution formulas of a class.
pub fn encode_class(fsm: &Fsm, class: &ExecutionClass) -> Result<Formula> {
    if class.executions.is_empty() {
        return Err(Error::Empty("execution class"));
    }
    let terms = class
        .executions
        .iter()
        .map(|e| encode_execution(fsm, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(Formula::or(terms))
}

/// One transition per (state, input) pair of a host machine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateModel {
    chosen: BTreeMap<(String, String), TransitionId>,
    // slot-indexed transition choice on the host machine
    slots: Vec<usize>,
}

impl CandidateModel {
    fn from_assignment(fsm: &Fsm, cnf: &Cnf, model: &[bool]) -> Self {
        let slots: Vec<usize> = (0..fsm.num_slots())
            .map(|slot| {
                *fsm.slot_transitions(slot)
                    .iter()
                    .find(|&&t| model[cnf.lookup(&fsm.transition(t).id).expect("registered")])
                    .expect("exactly one transition per slot")
            })
            .collect();
        Self::from_slots(fsm, slots)
    }

    /// Builds a model from one transition index per slot of `fsm`.
    pub fn from_slots(fsm: &Fsm, slots: Vec<usize>) -> Self {
        let chosen = slots
            .iter()
            .enumerate()
            .map(|(slot, &t)| {
                (
                    (
                        fsm.states()[fsm.slot_state(slot)].to_string(),
                        fsm.inputs()[fsm.slot_input(slot)].to_string(),
                    ),
                    fsm.transition(t).id.clone(),
                )
            })
            .collect();
        Self { chosen, slots }
    }

    /// Chosen transition keyed by (state, input) names.
    pub fn chosen(&self) -> &BTreeMap<(String, String), TransitionId> {
        &self.chosen
    }

    pub fn contains(&self, id: &TransitionId) -> bool {
        self.chosen.values().any(|t| t == id)
    }

    pub fn transition_ids(&self) -> impl Iterator<Item = &TransitionId> {
        self.chosen.values()
    }

    /// Evaluates a formula with exactly the chosen transitions set true.
    pub fn satisfies(&self, f: &Formula) -> bool {
        f.eval(&|id| self.contains(id))
    }
}

fn blocking_clause(
    fsm: &Fsm,
    cnf: &Cnf,
    slots: &[usize],
    only: impl Fn(usize) -> bool,
) -> Vec<Lit> {
    slots
        .iter()
        .enumerate()
        .filter(|&(slot, &t)| only(slot) && fsm.is_uncertain(t))
        .map(|(_, &t)| {
            Lit::new(
                cnf.lookup(&fsm.transition(t).id).expect("registered"),
                false,
            )
        })
        .collect()
}

fn machine_cnf(fsm: &Fsm, phi: &Formula) -> Result<Cnf> {
    let mut cnf = Cnf::for_machine(fsm);
    cnf.assert_formula(&encode_machine(fsm)?);
    cnf.assert_formula(&phi.restrict_to(fsm));
    Ok(cnf)
}

/// A model of `φ_M ∧ φ` differing on the uncertain variables from every
/// blocked model, or `None` if none is left.
pub fn solve(
    fsm: &Fsm,
    phi: &Formula,
    blocked: &[CandidateModel],
) -> Result<Option<CandidateModel>> {
    let mut cnf = machine_cnf(fsm, phi)?;
    for b in blocked {
        if b.slots.len() != fsm.num_slots() {
            return Err(Error::Protocol(
                "blocked model belongs to another machine".into(),
            ));
        }
        let clause = blocking_clause(fsm, &cnf, &b.slots, |_| true);
        cnf.add_clause(clause);
    }
    Ok(cnf
        .solver()
        .solve()
        .map(|m| CandidateModel::from_assignment(fsm, &cnf, &m)))
}

/// Every model of `φ_M ∧ φ`, up to `limit` of them; `None` when there are
/// more.
pub fn all_models(fsm: &Fsm, phi: &Formula, limit: usize) -> Result<Option<Vec<CandidateModel>>> {
    let cnf = machine_cnf(fsm, phi)?;
    let mut solver = cnf.solver();
    let mut out = Vec::new();
    while let Some(assignment) = solver.solve() {
        if out.len() == limit {
            return Ok(None);
        }
        let model = CandidateModel::from_assignment(fsm, &cnf, &assignment);
        let clause = blocking_clause(fsm, &cnf, &model.slots, |_| true);
        if clause.is_empty() {
            out.push(model);
            break;
        }
        solver.add_clause(&clause);
        out.push(model);
    }
    Ok(Some(out))
}

/// Whether `φ_M ∧ φ` has a model.
pub fn is_satisfiable(fsm: &Fsm, phi: &Formula) -> Result<bool> {
    Ok(machine_cnf(fsm, phi)?.solver().solve().is_some())
}

/// DIMACS text for `φ_M ∧ φ` and its `var_index transition_id` sidecar.
pub fn to_dimacs(fsm: &Fsm, phi: &Formula) -> Result<(String, String)> {
    let cnf = machine_cnf(fsm, phi)?;
    Ok((cnf.to_dimacs(), cnf.var_map()))
}

/// The deterministic submachine made of the chosen transitions, restricted
/// to the states reachable from the initial state.
pub fn extract_dfsm(fsm: &Fsm, model: &CandidateModel) -> Fsm {
    let mut keep = vec![false; fsm.transitions().len()];
    for &t in &model.slots {
        keep[t] = true;
    }
    fsm.submachine(|t| keep[t], true)
}

fn reachable_slots(fsm: &Fsm, slots: &[usize]) -> Vec<bool> {
    let n_inputs = fsm.inputs().len();
    let mut seen = vec![false; fsm.states().len()];
    let mut stack = vec![fsm.initial()];
    seen[fsm.initial()] = true;
    while let Some(s) = stack.pop() {
        for x in 0..n_inputs {
            let tgt = fsm.transition(slots[fsm.slot(s, x)]).tgt;
            if !seen[tgt] {
                seen[tgt] = true;
                stack.push(tgt);
            }
        }
    }
    (0..fsm.num_slots())
        .map(|slot| seen[fsm.slot_state(slot)])
        .collect()
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum PairOutcome {
    /// Every model of the formula is equivalent to this one.
    Single { dfsm: Fsm, model: CandidateModel },
    /// Two non-equivalent models and a minimal test distinguishing them.
    Pair {
        first: Fsm,
        second: Fsm,
        first_model: CandidateModel,
        second_model: CandidateModel,
        test: Test,
    },
    /// The cap was reached before the question was settled.
    Inconclusive { examined: usize },
}

/// Decides whether `φ_M ∧ φ` admits two non-equivalent candidates.
///
/// A first model `S1` is extracted. Then, for every uncertain slot
/// reachable in `S1`, models choosing differently at that slot are drawn
/// and compared with `S1`. A model equivalent to `S1` is blocked on the
/// uncertain choices at its own reachable slots, which excludes exactly the
/// models sharing its reachable part. When no slot admits a different
/// choice every model has `S1`'s reachable part, hence is equivalent.
pub fn find_nonequivalent_pair(fsm: &Fsm, phi: &Formula, cap: usize) -> Result<PairOutcome> {
    let cnf = machine_cnf(fsm, phi)?;
    let mut solver = cnf.solver();
    let first = solver.solve().ok_or(Error::Unsatisfiable)?;
    let first_model = CandidateModel::from_assignment(fsm, &cnf, &first);
    let first_dfsm = extract_dfsm(fsm, &first_model);
    let reachable = reachable_slots(fsm, &first_model.slots);
    let mut examined = 1;
    for (slot, &live) in reachable.iter().enumerate() {
        if !live || fsm.slot_transitions(slot).len() < 2 {
            continue;
        }
        let chosen = first_model.slots[slot];
        let avoid = Lit::new(
            cnf.lookup(&fsm.transition(chosen).id).expect("registered"),
            false,
        );
        while let Some(assignment) = solver.solve_with(&[avoid]) {
            if examined >= cap {
                return Ok(PairOutcome::Inconclusive { examined });
            }
            examined += 1;
            let model = CandidateModel::from_assignment(fsm, &cnf, &assignment);
            let dfsm = extract_dfsm(fsm, &model);
            if let Some(test) = distinguish::minimal_distinguishing_test(&first_dfsm, &dfsm)? {
                return Ok(PairOutcome::Pair {
                    first: first_dfsm,
                    second: dfsm,
                    first_model,
                    second_model: model,
                    test,
                });
            }
            let own = reachable_slots(fsm, &model.slots);
            let clause = blocking_clause(fsm, &cnf, &model.slots, |s| own[s]);
            solver.add_clause(&clause);
        }
    }
    Ok(PairOutcome::Single {
        dfsm: first_dfsm,
        model: first_model,
    })
}
