//! Adequacy verification and oracle mining over a pluggable expert.
//!
//! [`verify_test_adequacy_for_mining`] runs a set of tests past the expert,
//! reducing the imprecise machine after every answer, and reports whether
//! the answers pin down a single candidate up to equivalence.
//! [`precise_oracle_mining`] keeps feeding the generated distinguishing
//! tests back until they do. Both drive a [`MiningSession`], which exposes
//! the same loop one choice at a time for interactive front ends.

mod session;
mod transcript;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use session::{
    ChoiceOutcome, MiningSession, PendingChoice, ProgressWitness, SessionStatus, Step,
};
pub use transcript::{read_transcript, replay, write_transcript, Event};

use crate::encoding::{CandidateCount, Formula, DEFAULT_PAIR_CAP};
use crate::error::{Error, Result};
use crate::exec::DEFAULT_EXECUTION_CAP;
use crate::fsm::{format_word, Fsm, InputSymbol, Response, Test};

/// A plausible response offered to the expert.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OfferedResponse {
    pub response: Response,
    /// Candidates of the original machine consistent with the previous
    /// choices and this response. Advisory; absent when not computed.
    pub subdomain_size: Option<CandidateCount>,
    pub execution_count: usize,
}

/// Picks the expected response to a test among the offered ones.
pub trait Expert {
    fn choose(&mut self, test: &[InputSymbol], offered: &[OfferedResponse]) -> Result<Response>;
}

impl<F> Expert for F
where
    F: FnMut(&[InputSymbol], &[OfferedResponse]) -> Result<Response>,
{
    fn choose(&mut self, test: &[InputSymbol], offered: &[OfferedResponse]) -> Result<Response> {
        self(test, offered)
    }
}

/// An expert answering with the responses of a deterministic machine.
#[derive(Clone, Debug)]
pub struct EmulatedExpert {
    dfsm: Fsm,
}

impl EmulatedExpert {
    pub fn new(dfsm: Fsm) -> Result<Self> {
        dfsm.check_deterministic()?;
        Ok(Self { dfsm })
    }

    pub fn machine(&self) -> &Fsm {
        &self.dfsm
    }
}

impl Expert for EmulatedExpert {
    fn choose(&mut self, test: &[InputSymbol], offered: &[OfferedResponse]) -> Result<Response> {
        let response = self.dfsm.response(test)?;
        if offered.iter().any(|o| o.response == response) {
            Ok(response)
        } else {
            Err(Error::ResponseNotOffered(format_word(&response)))
        }
    }
}

pub fn emulated_expert(dfsm: Fsm) -> Result<EmulatedExpert> {
    EmulatedExpert::new(dfsm)
}

/// Order in which the initial tests are visited.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisitOrder {
    #[default]
    Insertion,
    /// Shuffled with the given seed.
    Seeded(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MiningConfig {
    /// Candidates the pair search may examine before giving up.
    pub pair_cap: usize,
    /// Deterministic executions enumerated per test.
    pub execution_cap: usize,
    /// Node budget for the subdomain sizes shown to the expert; `None`
    /// skips them.
    pub size_budget: Option<usize>,
    pub visit_order: VisitOrder,
    /// Engine time allowed for the whole session.
    pub time_budget: Option<Duration>,
}

impl Default for MiningConfig {
    fn default() -> Self {
        Self {
            pair_cap: DEFAULT_PAIR_CAP,
            execution_cap: DEFAULT_EXECUTION_CAP,
            size_budget: Some(100_000),
            visit_order: VisitOrder::Insertion,
            time_budget: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AdequacyReport {
    pub verdict: bool,
    pub reduced_machine: Fsm,
    /// The conjunction of the chosen class formulas (the machine encoding
    /// is implied).
    pub formula: Formula,
    /// A minimal test distinguishing two remaining candidates, when the
    /// verdict is negative.
    pub next_test: Option<Test>,
}

#[derive(Clone, Debug)]
pub struct MiningOutcome {
    pub adequate_tests: Vec<Test>,
    pub mined: Fsm,
    pub steps: Vec<Step>,
    pub witnesses: Vec<ProgressWitness>,
    pub events: Vec<Event>,
}

fn drive(session: &mut MiningSession, expert: &mut impl Expert) -> Result<()> {
    while let Some(pending) = session.pending() {
        let test = pending.test.clone();
        let response = expert.choose(&test, &pending.offered)?;
        session.submit_choice(Some(&test), &response)?;
    }
    match session.status() {
        SessionStatus::Inconclusive => Err(Error::Inconclusive(session.examined())),
        _ => Ok(()),
    }
}

/// Visits `tests` with the expert, starting from `machine` and `φ`.
///
/// When `tests` is empty the pair search runs once up front, so a negative
/// verdict always comes with a next test.
pub fn verify_test_adequacy_for_mining(
    machine: &Fsm,
    phi: &Formula,
    tests: &[Test],
    expert: &mut impl Expert,
    config: &MiningConfig,
) -> Result<AdequacyReport> {
    let mut session =
        MiningSession::adequacy(machine.clone(), phi.clone(), tests.to_vec(), config.clone())?;
    drive(&mut session, expert)?;
    Ok(AdequacyReport {
        verdict: session.status() == SessionStatus::Done,
        reduced_machine: session.machine().clone(),
        formula: session.formula().clone(),
        next_test: match session.status() {
            SessionStatus::Done => None,
            _ => session.next_test().cloned(),
        },
    })
}

/// Mines a deterministic oracle from `machine`, generating distinguishing
/// tests until the answers leave a single candidate up to equivalence.
pub fn precise_oracle_mining(
    machine: &Fsm,
    tests: &[Test],
    expert: &mut impl Expert,
    config: &MiningConfig,
) -> Result<MiningOutcome> {
    let mut session = MiningSession::new(machine.clone(), tests.to_vec(), config.clone())?;
    drive(&mut session, expert)?;
    let mined = session
        .result()
        .cloned()
        .expect("a finished session has a result");
    Ok(MiningOutcome {
        adequate_tests: session.adequate_tests().to_vec(),
        mined,
        steps: session.history().to_vec(),
        witnesses: session.witnesses().to_vec(),
        events: session.events().to_vec(),
    })
}
