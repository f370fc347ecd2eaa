//! Finds shortest tests telling deterministic machines apart.
//!
//! cargo run --example distinguishing_tests

use oraclemine::distinguish::{equivalent, minimal_distinguishing_test};
use oraclemine::format::parse_fsm;
use oraclemine::fsm::format_word;
use oraclemine::harness::random_dfsm;

fn main() -> oraclemine::Result<()> {
    let proper = parse_fsm(include_str!("data/proper.fsm"))?;
    let other = parse_fsm(include_str!("data/inappropriate.fsm"))?;
    if let Some(test) = minimal_distinguishing_test(&proper, &other)? {
        println!(
            "{}: {} answers {}, {} answers {}",
            format_word(&test),
            proper.name(),
            format_word(&proper.response(&test)?),
            other.name(),
            format_word(&other.response(&test)?)
        );
    }

    // Random machines over the same alphabets: how long do the tests get?
    let mut longest = 0;
    let mut same = 0;
    for seed in 0..200 {
        let a = random_dfsm(5, 2, 2, seed)?;
        let b = random_dfsm(5, 2, 2, seed + 1000)?;
        match minimal_distinguishing_test(&a, &b)? {
            Some(t) => longest = longest.max(t.len()),
            None => {
                assert!(equivalent(&a, &b)?);
                same += 1;
            }
        }
    }
    println!("200 random pairs with 5 states: {same} equivalent, longest shortest test {longest}");
    Ok(())
}
