//! Records a mining session as JSON Lines and replays it.
//!
//! cargo run --example transcript_replay

use oraclemine::format::parse_fsm;
use oraclemine::mining::{
    precise_oracle_mining, read_transcript, replay, write_transcript, EmulatedExpert, MiningConfig,
};

fn main() -> oraclemine::Result<()> {
    let m = parse_fsm(include_str!("data/imprecise.fsm"))?;
    let mut expert = EmulatedExpert::new(parse_fsm(include_str!("data/proper.fsm"))?)?;
    let out = precise_oracle_mining(&m, &[], &mut expert, &MiningConfig::default())?;

    let text = write_transcript(&out.events);
    for line in text.lines() {
        println!("{}", &line[..line.len().min(110)]);
    }

    let session = replay(&read_transcript(&text)?)?;
    assert_eq!(session.result(), Some(&out.mined));
    println!(
        "\nreplayed {} choices to the same machine",
        session.history().len()
    );
    Ok(())
}
