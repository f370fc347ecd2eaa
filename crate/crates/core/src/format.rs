//! Line-oriented machine documents and Graphviz rendering.
//!
//! ```text
//! # comments run to the end of the line
//! fsm M
//! states 1 2 3 4
//! initial 1
//! inputs a b
//! outputs 0 1
//! trans t1: 1 b/0 2
//! trans 1 a/0 1        # id omitted: named t<n> after its position
//! ```
//!
//! Header lines may appear in any order but each exactly once; `fsm` is
//! optional. Parsing checks well-formedness only; completeness and
//! connectivity are left to the caller.

use std::collections::HashSet;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::fsm::{Fsm, TransitionDef};

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

struct Header {
    line: usize,
    values: Vec<String>,
}

pub fn parse_fsm(text: &str) -> Result<Fsm> {
    let mut name: Option<Header> = None;
    let mut states: Option<Header> = None;
    let mut initial: Option<Header> = None;
    let mut inputs: Option<Header> = None;
    let mut outputs: Option<Header> = None;
    let mut trans: Vec<(usize, Option<String>, String)> = Vec::new();
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let (keyword, rest) = content
            .split_once(char::is_whitespace)
            .unwrap_or((content, ""));
        let rest = rest.trim();
        let slot = match keyword {
            "fsm" => &mut name,
            "states" => &mut states,
            "initial" => &mut initial,
            "inputs" => &mut inputs,
            "outputs" => &mut outputs,
            "trans" => {
                let (id, body) = match rest.split_once(':') {
                    Some((id, body)) => {
                        let id = id.trim();
                        if id.is_empty() || id.contains(char::is_whitespace) {
                            return Err(err(line, format!("bad transition id `{id}`")));
                        }
                        (Some(id.to_owned()), body.trim())
                    }
                    None => (None, rest),
                };
                trans.push((line, id, body.to_owned()));
                continue;
            }
            other => return Err(err(line, format!("unknown keyword `{other}`"))),
        };
        if slot.is_some() {
            return Err(err(line, format!("`{keyword}` declared twice")));
        }
        let values: Vec<String> = rest.split_whitespace().map(str::to_owned).collect();
        if values.is_empty() {
            return Err(err(line, format!("`{keyword}` needs at least one value")));
        }
        *slot = Some(Header { line, values });
    }

    if [&name, &states, &initial, &inputs, &outputs]
        .iter()
        .all(|h| h.is_none())
        && trans.is_empty()
    {
        return Err(err(1, "empty document"));
    }
    let missing = |kw: &str| err(last_line.max(1), format!("missing `{kw}` line"));
    let states = states.ok_or_else(|| missing("states"))?;
    let initial = initial.ok_or_else(|| missing("initial"))?;
    let inputs = inputs.ok_or_else(|| missing("inputs"))?;
    let outputs = outputs.ok_or_else(|| missing("outputs"))?;
    for h in name.iter().chain([&initial]) {
        if h.values.len() != 1 {
            return Err(err(h.line, "expected a single value"));
        }
    }
    let check_unique = |h: &Header, kind: &str| -> Result<()> {
        let mut seen = HashSet::new();
        for v in &h.values {
            if !seen.insert(v) {
                return Err(err(h.line, format!("duplicate {kind} `{v}`")));
            }
        }
        Ok(())
    };
    check_unique(&states, "state")?;
    check_unique(&inputs, "input symbol")?;
    check_unique(&outputs, "output symbol")?;
    if !states.values.contains(&initial.values[0]) {
        return Err(err(
            initial.line,
            format!("unknown state `{}`", initial.values[0]),
        ));
    }

    let mut ids = HashSet::new();
    let mut defs = Vec::with_capacity(trans.len());
    for (pos, (line, id, body)) in trans.iter().enumerate() {
        let line = *line;
        let parts: Vec<&str> = body.split_whitespace().collect();
        let [src, label, tgt] = parts[..] else {
            return Err(err(
                line,
                format!("expected `<src> <input>/<output> <tgt>`, found `{body}`"),
            ));
        };
        let Some((input, output)) = label.split_once('/') else {
            return Err(err(
                line,
                format!("expected `<input>/<output>`, found `{label}`"),
            ));
        };
        let id = id.clone().unwrap_or_else(|| format!("t{}", pos + 1));
        for (value, list, kind) in [
            (src, &states.values, "state"),
            (tgt, &states.values, "state"),
            (input, &inputs.values, "input symbol"),
            (output, &outputs.values, "output symbol"),
        ] {
            if !list.iter().any(|v| v == value) {
                return Err(err(line, format!("unknown {kind} `{value}`")));
            }
        }
        if !ids.insert(id.clone()) {
            return Err(err(line, format!("duplicate transition id `{id}`")));
        }
        defs.push(TransitionDef::new(id, src, input, output, tgt));
    }

    let fsm_name = name
        .map(|h| h.values[0].clone())
        .unwrap_or_else(|| "M".to_owned());
    Fsm::new(
        fsm_name,
        states.values.into_iter().map(Into::into).collect(),
        initial.values[0].clone().into(),
        inputs.values.into_iter().map(Into::into).collect(),
        outputs.values.into_iter().map(Into::into).collect(),
        defs,
    )
    .map_err(|e| match &e {
        Error::DuplicateTransition(_, second) => {
            let line = trans
                .iter()
                .enumerate()
                .find(|(pos, (_, id, _))| {
                    id.clone().unwrap_or_else(|| format!("t{}", pos + 1)) == *second
                })
                .map_or(0, |(_, (line, _, _))| *line);
            err(line, e.to_string())
        }
        _ => err(0, e.to_string()),
    })
}

/// Canonical document for `fsm`; [`parse_fsm`] reads it back unchanged.
pub fn render_fsm(fsm: &Fsm) -> String {
    let join = |items: Vec<String>| items.join(" ");
    let mut out = String::new();
    writeln!(out, "fsm {}", fsm.name()).unwrap();
    writeln!(
        out,
        "states {}",
        join(fsm.states().iter().map(ToString::to_string).collect())
    )
    .unwrap();
    writeln!(out, "initial {}", fsm.initial_state()).unwrap();
    writeln!(
        out,
        "inputs {}",
        join(fsm.inputs().iter().map(ToString::to_string).collect())
    )
    .unwrap();
    writeln!(
        out,
        "outputs {}",
        join(fsm.outputs().iter().map(ToString::to_string).collect())
    )
    .unwrap();
    for d in fsm.transition_defs() {
        writeln!(
            out,
            "trans {}: {} {}/{} {}",
            d.id, d.src, d.input, d.output, d.tgt
        )
        .unwrap();
    }
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz `digraph`: one node per state (initial state double-circled),
/// one edge per transition labelled `id: input/output`, uncertain
/// transitions dashed.
pub fn render_dot(fsm: &Fsm) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(fsm.name())).unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    for (i, s) in fsm.states().iter().enumerate() {
        let shape = if i == fsm.initial() {
            "doublecircle"
        } else {
            "circle"
        };
        writeln!(out, "  {} [shape={shape}];", quote(s.as_str())).unwrap();
    }
    for (i, t) in fsm.transitions().iter().enumerate() {
        let label = format!(
            "{}: {}/{}",
            t.id,
            fsm.inputs()[t.input],
            fsm.outputs()[t.output]
        );
        let style = if fsm.is_uncertain(i) {
            ", style=dashed"
        } else {
            ""
        };
        writeln!(
            out,
            "  {} -> {} [label={}{style}];",
            quote(fsm.states()[t.src].as_str()),
            quote(fsm.states()[t.tgt].as_str()),
            quote(&label)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
