//! Mines a deterministic oracle from the imprecise one, with a known
//! machine standing in for the expert.
//!
//! cargo run --example mine_oracle

use oraclemine::distinguish::equivalent;
use oraclemine::format::{parse_fsm, render_fsm};
use oraclemine::fsm::format_word;
use oraclemine::mining::{precise_oracle_mining, EmulatedExpert, MiningConfig};

fn main() -> oraclemine::Result<()> {
    let m = parse_fsm(include_str!("data/imprecise.fsm"))?;
    let proper = parse_fsm(include_str!("data/proper.fsm"))?;
    let mut expert = EmulatedExpert::new(proper.clone())?;

    let out = precise_oracle_mining(
        &m,
        &[oraclemine::fsm::parse_word("babaab")],
        &mut expert,
        &MiningConfig::default(),
    )?;
    for step in &out.steps {
        println!(
            "{:<8} -> {}{}  removed {}",
            format_word(&step.test),
            format_word(&step.chosen),
            if step.generated { " (generated)" } else { "" },
            step.removed
                .iter()
                .map(|t| t.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        );
    }
    let tests: Vec<String> = out.adequate_tests.iter().map(|t| format_word(t)).collect();
    println!("adequate tests: {}", tests.join(" "));
    println!(
        "equivalent to the expert's machine: {}",
        equivalent(&out.mined, &proper)?
    );
    print!("{}", render_fsm(&out.mined));
    Ok(())
}
