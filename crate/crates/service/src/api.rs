//! Request and response payloads. Machines use the structured form of the
//! text format; tests and responses are symbol arrays, and requests also
//! accept them as strings (`"babaab"` or `"b,a,b"`).

use oraclemine::encoding::CandidateCount;
use oraclemine::format::render_fsm;
use oraclemine::fsm::parse_word;
use oraclemine::json::FsmObject;
use oraclemine::mining::{Event, MiningSession, OfferedResponse, SessionStatus, Step};
use oraclemine::{Test, TransitionId};
use serde::{Deserialize, Serialize};

/// A machine given either as a text document or as a structured object.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum MachineInput {
    Text(String),
    Object(FsmObject),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Word {
    Text(String),
    Symbols(Vec<String>),
}

impl Word {
    pub fn symbols<T: From<String>>(self) -> Vec<T> {
        match self {
            Word::Text(s) => parse_word(&s),
            Word::Symbols(v) => v.into_iter().map(T::from).collect(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct CreateSession {
    pub fsm: MachineInput,
    #[serde(default)]
    pub initial_tests: Vec<Word>,
    /// Shuffles the initial tests before they are visited.
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ChoiceRequest {
    pub response: Word,
    /// The test being answered. When present, a repeated choice is a no-op
    /// and a choice for a test that is no longer pending is rejected.
    pub test: Option<Word>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SessionState {
    pub id: String,
    pub status: SessionStatus,
    /// The uploaded machine was already deterministic and is its own result.
    pub deterministic_input: bool,
    pub pending_test: Option<Test>,
    /// Whether the pending test was generated by the engine.
    pub pending_generated: bool,
    pub offered_responses: Vec<OfferedResponse>,
    pub candidate_count_remaining: CandidateCount,
    pub machine_view: FsmObject,
    /// Transitions removed by the last choice.
    pub removed_last: Vec<TransitionId>,
    pub history: Vec<Step>,
    pub adequate_tests: Vec<Test>,
    pub result: Option<FsmObject>,
    /// Candidates examined by an inconclusive pair search.
    pub examined: Option<usize>,
    pub created_at: u64,
    pub updated_at: u64,
}

impl SessionState {
    pub fn new(
        id: &str,
        session: &MiningSession,
        count: CandidateCount,
        created_at: u64,
        updated_at: u64,
    ) -> Self {
        let pending = session.pending();
        Self {
            id: id.to_owned(),
            status: session.status(),
            deterministic_input: session.original().is_deterministic(),
            pending_test: pending.map(|p| p.test.clone()),
            pending_generated: pending.is_some_and(|p| p.generated),
            offered_responses: pending.map(|p| p.offered.clone()).unwrap_or_default(),
            candidate_count_remaining: count,
            machine_view: FsmObject::from(session.machine()),
            removed_last: session
                .history()
                .last()
                .map(|s| s.removed.clone())
                .unwrap_or_default(),
            history: session.history().to_vec(),
            adequate_tests: session.adequate_tests().to_vec(),
            result: session.result().map(FsmObject::from),
            examined: (session.status() == SessionStatus::Inconclusive).then(|| session.examined()),
            created_at,
            updated_at,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResultView {
    pub id: String,
    pub mined_text: String,
    pub mined_machine: FsmObject,
    pub adequate_tests: Vec<Test>,
    pub transcript: Vec<Event>,
}

impl ResultView {
    /// `None` until the session is done.
    pub fn new(id: &str, session: &MiningSession) -> Option<Self> {
        let mined = session.result()?;
        Some(Self {
            id: id.to_owned(),
            mined_text: render_fsm(mined),
            mined_machine: FsmObject::from(mined),
            adequate_tests: session.adequate_tests().to_vec(),
            transcript: session.events().to_vec(),
        })
    }
}
