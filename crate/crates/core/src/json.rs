//! Structured (JSON) form of a machine document, with the keywords of the
//! text format as field names.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fsm::{Fsm, InputSymbol, OutputSymbol, StateId, TransitionDef};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsmObject {
    #[serde(default = "default_name")]
    pub fsm: String,
    pub states: Vec<StateId>,
    pub initial: StateId,
    pub inputs: Vec<InputSymbol>,
    pub outputs: Vec<OutputSymbol>,
    pub trans: Vec<TransitionDef>,
}

fn default_name() -> String {
    "M".to_owned()
}

impl FsmObject {
    pub fn into_fsm(self) -> Result<Fsm> {
        Fsm::new(
            self.fsm,
            self.states,
            self.initial,
            self.inputs,
            self.outputs,
            self.trans,
        )
    }
}

impl From<&Fsm> for FsmObject {
    fn from(fsm: &Fsm) -> Self {
        Self {
            fsm: fsm.name().to_owned(),
            states: fsm.states().to_vec(),
            initial: fsm.initial_state().clone(),
            inputs: fsm.inputs().to_vec(),
            outputs: fsm.outputs().to_vec(),
            trans: fsm.transition_defs(),
        }
    }
}
