use std::collections::VecDeque;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::transcript::Event;
use super::{MiningConfig, OfferedResponse, VisitOrder};
use crate::encoding::{self, count_models, CandidateCount, CandidateModel, Formula, PairOutcome};
use crate::error::{Error, Result};
use crate::exec::{self, Execution, ExecutionClass};
use crate::fsm::{format_word, Fsm, InputSymbol, OutputSymbol, Response, Test, TransitionId};
use crate::json::FsmObject;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    /// A test is pending and the expert has to pick a response.
    AwaitingChoice,
    /// The tests are exhausted and two non-equivalent candidates remain;
    /// [`MiningSession::generate`] queues the distinguishing test.
    NeedsGeneration,
    Done,
    /// The pair search hit its cap.
    Inconclusive,
}

/// A test waiting for the expert.
#[derive(Clone, Debug)]
pub struct PendingChoice {
    pub test: Test,
    pub generated: bool,
    pub offered: Vec<OfferedResponse>,
    classes: Vec<ExecutionClass>,
}

/// One answered test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub test: Test,
    pub generated: bool,
    pub offered: Vec<OfferedResponse>,
    pub chosen: Response,
    /// Transitions the reduction removed from the machine.
    pub removed: Vec<TransitionId>,
}

/// Evidence that a choice for a generated test shrank the candidate set:
/// a model of the formula before the choice that the choice rules out.
#[derive(Clone, Debug)]
pub struct ProgressWitness {
    pub test: Test,
    pub chosen: Response,
    pub excluded: CandidateModel,
    pub excluded_dfsm: Fsm,
    pub formula_before: Formula,
    pub formula_after: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChoiceOutcome {
    Applied,
    /// The same choice was already applied to this test; nothing changed.
    Replayed,
}

struct LastPair {
    test: Test,
    first: (CandidateModel, Fsm),
    second: (CandidateModel, Fsm),
}

/// The state of one mining run, advanced one expert choice at a time.
///
/// A session created with [`MiningSession::new`] runs test generation
/// until a single candidate is left (precise oracle mining). One created
/// with [`MiningSession::adequacy`] only visits the given tests and stops in
/// [`SessionStatus::NeedsGeneration`] when they are not adequate.
pub struct MiningSession {
    original: Fsm,
    machine: Fsm,
    formula: Formula,
    config: MiningConfig,
    generate: bool,
    queue: VecDeque<Test>,
    pending: Option<PendingChoice>,
    adequate_tests: Vec<Test>,
    next_test: Option<Test>,
    history: Vec<Step>,
    witnesses: Vec<ProgressWitness>,
    events: Vec<Event>,
    status: SessionStatus,
    result: Option<(CandidateModel, Fsm)>,
    last_pair: Option<LastPair>,
    examined: usize,
    step_started: Instant,
    compute_time: Duration,
}

impl MiningSession {
    /// Starts precise oracle mining from `machine` with initial `tests`.
    pub fn new(machine: Fsm, tests: Vec<Test>, config: MiningConfig) -> Result<Self> {
        Self::start(machine, Formula::True, tests, config, true)
    }

    /// Starts an adequacy check of `tests` from `machine` and `φ`.
    pub fn adequacy(
        machine: Fsm,
        phi: Formula,
        tests: Vec<Test>,
        config: MiningConfig,
    ) -> Result<Self> {
        Self::start(machine, phi, tests, config, false)
    }

    fn start(
        machine: Fsm,
        phi: Formula,
        tests: Vec<Test>,
        config: MiningConfig,
        generate: bool,
    ) -> Result<Self> {
        machine.check_complete()?;
        machine.check_connected()?;
        let mut unique: Vec<Test> = Vec::new();
        for t in tests {
            if t.is_empty() {
                return Err(Error::Empty("test"));
            }
            machine.encode_test(&t)?;
            if !unique.contains(&t) {
                unique.push(t);
            }
        }
        let mut queue = unique.clone();
        if let VisitOrder::Seeded(seed) = config.visit_order {
            queue.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        let mut session = Self {
            original: machine.clone(),
            machine,
            formula: phi,
            config: config.clone(),
            generate,
            queue: queue.into(),
            pending: None,
            adequate_tests: unique.clone(),
            next_test: None,
            history: Vec::new(),
            witnesses: Vec::new(),
            events: Vec::new(),
            status: SessionStatus::NeedsGeneration,
            result: None,
            last_pair: None,
            examined: 0,
            step_started: Instant::now(),
            compute_time: Duration::ZERO,
        };
        session.events.push(Event::Start {
            machine: FsmObject::from(&session.original),
            tests: unique,
            config,
            generate,
        });
        if !encoding::is_satisfiable(&session.machine, &session.formula)? {
            return Err(Error::Unsatisfiable);
        }
        session.timed(|s| {
            if s.queue.is_empty() {
                s.search()
            } else {
                s.present_next()
            }
        })?;
        Ok(session)
    }

    fn timed(&mut self, f: impl FnOnce(&mut Self) -> Result<()>) -> Result<()> {
        self.step_started = Instant::now();
        let r = f(self);
        self.compute_time += self.step_started.elapsed();
        r
    }

    fn check_budget(&self) -> Result<()> {
        match self.config.time_budget {
            Some(budget) if self.compute_time + self.step_started.elapsed() > budget => {
                Err(Error::BudgetExceeded)
            }
            _ => Ok(()),
        }
    }

    /// Runs the pair search on the current machine and formula and moves to
    /// the next state.
    fn search(&mut self) -> Result<()> {
        self.check_budget()?;
        match encoding::find_nonequivalent_pair(&self.machine, &self.formula, self.config.pair_cap)?
        {
            PairOutcome::Single { dfsm, model } => {
                log::debug!("single equivalence class left");
                self.queue.clear();
                self.next_test = None;
                self.last_pair = None;
                self.events.push(Event::Done {
                    mined: FsmObject::from(&dfsm),
                    adequate_tests: self.adequate_tests.clone(),
                });
                self.result = Some((model, dfsm));
                self.status = SessionStatus::Done;
                Ok(())
            }
            PairOutcome::Pair {
                first,
                second,
                first_model,
                second_model,
                test,
            } => {
                log::debug!(
                    "non-equivalent candidates remain, distinguished by {}",
                    format_word(&test)
                );
                self.next_test = Some(test.clone());
                self.last_pair = Some(LastPair {
                    test,
                    first: (first_model, first),
                    second: (second_model, second),
                });
                if !self.queue.is_empty() {
                    self.present_next()
                } else if self.generate {
                    self.queue_generated()
                } else {
                    self.status = SessionStatus::NeedsGeneration;
                    Ok(())
                }
            }
            PairOutcome::Inconclusive { examined } => {
                self.examined = examined;
                self.status = SessionStatus::Inconclusive;
                self.events.push(Event::Inconclusive { examined });
                Ok(())
            }
        }
    }

    fn queue_generated(&mut self) -> Result<()> {
        let test = self
            .next_test
            .clone()
            .ok_or_else(|| Error::Protocol("no generated test".into()))?;
        if !self.adequate_tests.contains(&test) {
            self.adequate_tests.push(test.clone());
        }
        self.events.push(Event::Generated { test: test.clone() });
        self.queue = VecDeque::from([test]);
        self.present_next()
    }

    /// Queues the last generated distinguishing test, as the outer loop of
    /// precise oracle mining does.
    pub fn generate(&mut self) -> Result<()> {
        if self.status != SessionStatus::NeedsGeneration {
            return Err(Error::Protocol(format!(
                "cannot generate a test in state {:?}",
                self.status
            )));
        }
        self.timed(Self::queue_generated)
    }

    fn present_next(&mut self) -> Result<()> {
        self.check_budget()?;
        let test = self.queue.pop_front().expect("queue is not empty");
        let generated = self.next_test.as_ref() == Some(&test) && self.last_pair.is_some();
        let groups = exec::group_by_response(&self.machine, &test, self.config.execution_cap)?;
        let mut offered = Vec::new();
        let mut classes = Vec::new();
        for (response, executions) in groups {
            let class = ExecutionClass {
                response,
                executions,
                subdomain_size: Default::default(),
            };
            let class_formula = encoding::encode_class(&self.machine, &class)?;
            let conj = Formula::and([self.formula.clone(), class_formula]);
            if !encoding::is_satisfiable(&self.machine, &conj)? {
                log::debug!(
                    "response {} has no consistent candidate",
                    format_word(&class.response)
                );
                continue;
            }
            let subdomain_size = self
                .config
                .size_budget
                .map(|b| count_models(&self.original, &conj, Some(b)));
            offered.push(OfferedResponse {
                response: class.response.clone(),
                subdomain_size,
                execution_count: class.executions.len(),
            });
            classes.push(class);
        }
        self.pending = Some(PendingChoice {
            test,
            generated,
            offered,
            classes,
        });
        self.status = SessionStatus::AwaitingChoice;
        Ok(())
    }

    /// Applies the expert's choice for the pending test.
    ///
    /// With `token` set to the test the choice answers, repeating a choice
    /// that was already applied is a no-op.
    pub fn submit_choice(
        &mut self,
        token: Option<&[InputSymbol]>,
        response: &[OutputSymbol],
    ) -> Result<ChoiceOutcome> {
        if let (Some(token), Some(last)) = (token, self.history.last()) {
            let pending_differs = self.pending.as_ref().is_none_or(|p| p.test != token);
            if last.test == token && last.chosen == response && pending_differs {
                return Ok(ChoiceOutcome::Replayed);
            }
        }
        let Some(pending) = self.pending.as_ref() else {
            return Err(Error::Protocol(format!(
                "no pending choice in state {:?}",
                self.status
            )));
        };
        if let Some(token) = token {
            if pending.test != token {
                return Err(Error::Protocol(format!(
                    "choice answers `{}` but the pending test is `{}`",
                    format_word(token),
                    format_word(&pending.test)
                )));
            }
        }
        if !pending.classes.iter().any(|c| c.response == response) {
            return Err(Error::ResponseNotOffered(format_word(response)));
        }
        let pending = self.pending.take().expect("checked");
        self.timed(|s| s.apply(pending, response))?;
        Ok(ChoiceOutcome::Applied)
    }

    fn apply(&mut self, pending: PendingChoice, response: &[OutputSymbol]) -> Result<()> {
        let class = pending
            .classes
            .iter()
            .find(|c| c.response == response)
            .expect("checked");
        let class_formula = encoding::encode_class(&self.machine, class)?;
        let before = self.formula.clone();
        self.formula = Formula::and([before.clone(), class_formula]);
        let reduced = exec::reduce(&self.machine, &pending.test, response, class)?;
        let removed = self.machine.removed_in(&reduced);
        log::debug!(
            "{}/{}: removed {} transitions",
            format_word(&pending.test),
            format_word(response),
            removed.len()
        );
        self.machine = reduced;

        if let Some(pair) = self.last_pair.take().filter(|p| p.test == pending.test) {
            let (excluded, dfsm) = if pair.first.1.response(&pair.test)? != response {
                pair.first
            } else {
                pair.second
            };
            self.witnesses.push(ProgressWitness {
                test: pending.test.clone(),
                chosen: response.to_vec(),
                excluded,
                excluded_dfsm: dfsm,
                formula_before: before,
                formula_after: self.formula.clone(),
            });
        }
        self.events.push(Event::Choice {
            test: pending.test.clone(),
            offered: pending.offered.clone(),
            chosen: response.to_vec(),
            removed: removed.clone(),
        });
        self.history.push(Step {
            test: pending.test,
            generated: pending.generated,
            offered: pending.offered,
            chosen: response.to_vec(),
            removed,
        });
        self.search()
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn pending(&self) -> Option<&PendingChoice> {
        self.pending.as_ref()
    }

    /// The imprecise machine the session started from.
    pub fn original(&self) -> &Fsm {
        &self.original
    }

    /// The current reduced machine.
    pub fn machine(&self) -> &Fsm {
        &self.machine
    }

    /// `φ` without the machine encoding: the conjunction of the chosen
    /// class formulas.
    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn config(&self) -> &MiningConfig {
        &self.config
    }

    /// Initial tests followed by the generated ones, in order.
    pub fn adequate_tests(&self) -> &[Test] {
        &self.adequate_tests
    }

    /// The last distinguishing test found by the pair search.
    pub fn next_test(&self) -> Option<&Test> {
        self.next_test.as_ref()
    }

    pub fn history(&self) -> &[Step] {
        &self.history
    }

    pub fn witnesses(&self) -> &[ProgressWitness] {
        &self.witnesses
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// The mined machine once the session is done.
    pub fn result(&self) -> Option<&Fsm> {
        self.result.as_ref().map(|(_, dfsm)| dfsm)
    }

    pub fn result_model(&self) -> Option<&CandidateModel> {
        self.result.as_ref().map(|(model, _)| model)
    }

    /// Candidates examined by the pair search when it gave up.
    pub fn examined(&self) -> usize {
        self.examined
    }

    /// Time spent in the engine, excluding the time waiting for choices.
    pub fn compute_time(&self) -> Duration {
        self.compute_time
    }

    /// Candidates of the original machine consistent with every choice so
    /// far.
    pub fn candidate_count_remaining(&self, budget: Option<usize>) -> CandidateCount {
        count_models(&self.original, &self.formula, budget)
    }
}

impl std::fmt::Debug for MiningSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MiningSession")
            .field("status", &self.status)
            .field("machine", &self.machine.name())
            .field("steps", &self.history.len())
            .finish_non_exhaustive()
    }
}

impl PendingChoice {
    /// Executions of the pending test producing `response`.
    pub fn executions(&self, response: &[OutputSymbol]) -> Option<&[Execution]> {
        self.classes
            .iter()
            .find(|c| c.response == response)
            .map(|c| c.executions.as_slice())
    }
}
