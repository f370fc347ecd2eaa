//! Walks through the small imprecise oracle in `data/imprecise.fsm`:
//! its plausible responses to `babaab`, the executions behind them, and the
//! machine left after the expert picks `000100`.
//!
//! cargo run --example running_example

use oraclemine::exec::{partition_responses, reduce};
use oraclemine::format::{parse_fsm, render_fsm};
use oraclemine::fsm::{format_word, parse_word};
use oraclemine::Test;

fn main() -> oraclemine::Result<()> {
    let m = parse_fsm(include_str!("data/imprecise.fsm"))?;
    let report = m.validate();
    let uncertain: Vec<&str> = report
        .uncertain_transitions
        .iter()
        .map(|t| t.as_str())
        .collect();
    println!(
        "{} candidates, uncertain transitions {}",
        m.candidate_count()?,
        uncertain.join(" ")
    );

    let test: Test = parse_word("babaab");
    let p = partition_responses(&m, &test)?;
    for class in &p.classes {
        println!(
            "{} -> {} candidates",
            format_word(&class.response),
            class.subdomain_size
        );
        for e in &class.executions {
            println!("    {}", e.display(&m));
        }
    }

    let chosen = parse_word::<oraclemine::OutputSymbol>("000100");
    let class = p.class(&chosen).expect("000100 is plausible");
    let reduced = reduce(&m, &test, &chosen, class)?;
    let removed: Vec<String> = m
        .removed_in(&reduced)
        .iter()
        .map(ToString::to_string)
        .collect();
    println!(
        "\nremoved {}; {} candidates remain in",
        removed.join(" "),
        reduced.candidate_count()?
    );
    print!("{}", render_fsm(&reduced));
    Ok(())
}
