//! Encodes the imprecise oracle and the class of `babaab/000100` as
//! propositional formulas, counts their models and exports DIMACS.
//!
//! cargo run --example boolean_encoding

use oraclemine::encoding::{
    all_models, count_models, encode_class, encode_machine, extract_dfsm, to_dimacs,
};
use oraclemine::exec::partition_responses;
use oraclemine::format::parse_fsm;
use oraclemine::fsm::parse_word;

fn main() -> oraclemine::Result<()> {
    let m = parse_fsm(include_str!("data/imprecise.fsm"))?;
    println!("machine:  {}", encode_machine(&m)?);

    let test = parse_word("babaab");
    let p = partition_responses(&m, &test)?;
    let class = p
        .class(&parse_word::<oraclemine::OutputSymbol>("000100"))
        .expect("plausible");
    let phi = encode_class(&m, class)?;
    println!("000100:   {phi}");
    println!("models:   {}", count_models(&m, &phi, None));

    for model in all_models(&m, &phi, 16)?.expect("few models") {
        let ids: Vec<String> = extract_dfsm(&m, &model)
            .transition_ids()
            .map(ToString::to_string)
            .collect();
        println!("  {}", ids.join(" "));
    }

    let (cnf, vars) = to_dimacs(&m, &phi)?;
    println!("\n{cnf}\nc variable map\n{vars}");
    Ok(())
}
