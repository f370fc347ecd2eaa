//! JSON Lines session transcripts.
//!
//! A transcript opens with a `start` event (machine, initial tests, config)
//! followed by one `choice` event per answered test, `generated` events for
//! the tests produced by the pair search, and a final `done` or
//! `inconclusive` event. Replaying the choices against the start event
//! reproduces the session exactly.

use serde::{Deserialize, Serialize};

use super::session::{MiningSession, SessionStatus};
use super::{MiningConfig, OfferedResponse};
use crate::error::{Error, Result};
use crate::fsm::{format_word, Response, Test, TransitionId};
use crate::json::FsmObject;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Start {
        machine: FsmObject,
        tests: Vec<Test>,
        config: MiningConfig,
        #[serde(default = "yes")]
        generate: bool,
    },
    Generated {
        test: Test,
    },
    Choice {
        test: Test,
        offered: Vec<OfferedResponse>,
        chosen: Response,
        removed: Vec<TransitionId>,
    },
    Done {
        mined: FsmObject,
        adequate_tests: Vec<Test>,
    },
    Inconclusive {
        examined: usize,
    },
}

fn yes() -> bool {
    true
}

impl Event {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("events serialize")
    }
}

/// Renders events as JSON Lines.
pub fn write_transcript(events: &[Event]) -> String {
    events.iter().map(|e| e.to_line() + "\n").collect()
}

pub fn read_transcript(text: &str) -> Result<Vec<Event>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Transcript(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

/// Re-runs a transcript. Every recorded choice must be asked for again in
/// the same order, and a recorded outcome must match the replayed one.
///
/// A transcript cut short (as left behind by a crashed service) replays to
/// the session state after its last choice.
pub fn replay(events: &[Event]) -> Result<MiningSession> {
    let Some(Event::Start {
        machine,
        tests,
        config,
        generate,
    }) = events.first()
    else {
        return Err(Error::Transcript(
            "transcript does not open with a start event".into(),
        ));
    };
    let machine = machine.clone().into_fsm()?;
    let mut session = if *generate {
        MiningSession::new(machine, tests.clone(), config.clone())?
    } else {
        MiningSession::adequacy(
            machine,
            crate::encoding::Formula::True,
            tests.clone(),
            config.clone(),
        )?
    };
    for event in &events[1..] {
        match event {
            Event::Start { .. } => return Err(Error::Transcript("second start event".into())),
            Event::Generated { test } => {
                if session.status() == SessionStatus::NeedsGeneration {
                    session.generate()?;
                }
                if session.pending().map(|p| &p.test) != Some(test) {
                    return Err(Error::Transcript(format!(
                        "generated test `{}` diverges",
                        format_word(test)
                    )));
                }
            }
            Event::Choice { test, chosen, .. } => {
                let pending = session.pending().map(|p| p.test.clone());
                if pending.as_ref() != Some(test) {
                    return Err(Error::Transcript(format!(
                        "recorded choice for `{}` but the session asks {}",
                        format_word(test),
                        pending.map_or("nothing".to_owned(), |t| format!("`{}`", format_word(&t)))
                    )));
                }
                session.submit_choice(Some(test), chosen)?;
            }
            Event::Done {
                mined,
                adequate_tests,
            } => {
                let ok = session.result().map(FsmObject::from).as_ref() == Some(mined)
                    && session.adequate_tests() == adequate_tests.as_slice();
                if !ok {
                    return Err(Error::Transcript(
                        "replayed result differs from the recorded one".into(),
                    ));
                }
            }
            Event::Inconclusive { .. } => {
                if session.status() != SessionStatus::Inconclusive {
                    return Err(Error::Transcript(
                        "recorded inconclusive search did not recur".into(),
                    ));
                }
            }
        }
    }
    Ok(session)
}
