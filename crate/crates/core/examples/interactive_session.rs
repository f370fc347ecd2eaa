//! Drives a mining session one choice at a time, the way an interactive
//! front end does. Answers are typed on standard input; an empty line
//! picks the first offered response.
//!
//! cargo run --example interactive_session

use std::io::{self, BufRead, Write};

use oraclemine::format::{parse_fsm, render_fsm};
use oraclemine::fsm::{format_word, parse_word};
use oraclemine::mining::{MiningConfig, MiningSession, SessionStatus};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = parse_fsm(include_str!("data/imprecise.fsm"))?;
    let mut session = MiningSession::new(m, vec![parse_word("babaab")], MiningConfig::default())?;
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();

    while let Some(pending) = session.pending() {
        println!(
            "\n{} candidates left; test {}",
            session.candidate_count_remaining(None),
            format_word(&pending.test)
        );
        for o in &pending.offered {
            let size = o
                .subdomain_size
                .as_ref()
                .map(ToString::to_string)
                .unwrap_or_default();
            println!(
                "  {}  ({size} candidates, {} executions)",
                format_word(&o.response),
                o.execution_count
            );
        }
        print!("> ");
        io::stdout().flush()?;
        let line = lines.next().transpose()?.unwrap_or_default();
        let response = if line.trim().is_empty() {
            pending.offered[0].response.clone()
        } else {
            parse_word(&line)
        };
        let test = pending.test.clone();
        if let Err(e) = session.submit_choice(Some(&test), &response) {
            println!("{e}");
        }
    }
    match session.status() {
        SessionStatus::Done => print!("\nmined:\n{}", render_fsm(session.result().expect("done"))),
        status => println!("session ended {status:?}"),
    }
    Ok(())
}
