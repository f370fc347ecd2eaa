//! Repeats mining experiments on random machines and prints the rows as CSV.
//!
//! cargo run --release --example experiment -- [reps] [seed]

use std::time::Duration;

use oraclemine::harness::{run_experiment, to_csv, trend_violations, ExperimentConfig, RowLabel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let reps: usize = args.next().map_or(Ok(5), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(1), |s| s.parse())?;

    // Vary the uncertainty degree on 10-state machines...
    let mut rows = Vec::new();
    let mut config = ExperimentConfig::new(10, 3, 2, 2);
    config.repetitions = reps;
    config.seed = seed;
    config.time_budget = Some(Duration::from_secs(60));
    for degree in [2, 3] {
        config.degree = degree;
        rows.push(run_experiment(&config)?);
    }
    print!("{}", to_csv(&config, &rows));
    println!("# median-time decreases: {}", trend_violations(&rows));

    // ...then the number of states at degree 3.
    let mut rows = Vec::new();
    config.degree = 3;
    config.label = RowLabel::States;
    for states in [5, 7, 10] {
        config.num_states = states;
        rows.push(run_experiment(&config)?);
    }
    print!("{}", to_csv(&config, &rows));
    println!("# median-time decreases: {}", trend_violations(&rows));
    Ok(())
}
