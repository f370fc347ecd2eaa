//! Checks whether a test set is adequate for mining, and what test to add
//! when it is not.
//!
//! cargo run --example adequacy_check

use oraclemine::encoding::Formula;
use oraclemine::format::parse_fsm;
use oraclemine::fsm::{format_word, parse_word};
use oraclemine::mining::{verify_test_adequacy_for_mining, EmulatedExpert, MiningConfig};
use oraclemine::Test;

fn main() -> oraclemine::Result<()> {
    let m = parse_fsm(include_str!("data/imprecise.fsm"))?;
    let proper = parse_fsm(include_str!("data/proper.fsm"))?;

    let mut tests: Vec<Test> = vec![parse_word("babaab")];
    loop {
        let mut expert = EmulatedExpert::new(proper.clone())?;
        let report = verify_test_adequacy_for_mining(
            &m,
            &Formula::True,
            &tests,
            &mut expert,
            &MiningConfig::default(),
        )?;
        let shown: Vec<String> = tests.iter().map(|t| format_word(t)).collect();
        println!(
            "{{{}}}: adequate={} ({} transitions left)",
            shown.join(", "),
            report.verdict,
            report.reduced_machine.transitions().len()
        );
        match report.next_test {
            Some(next) if !report.verdict => {
                println!("  add {}", format_word(&next));
                tests.push(next);
            }
            _ => break,
        }
    }
    Ok(())
}
