use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use oraclemine::distinguish::minimal_distinguishing_test;
use oraclemine::encoding::{encode_machine, format_scientific, to_dimacs};
use oraclemine::exec::partition_responses;
use oraclemine::format::{parse_fsm, render_dot, render_fsm};
use oraclemine::fsm::{format_word, parse_word};
use oraclemine::harness::{run_experiment, to_csv, trend_violations, ExperimentConfig, RowLabel};
use oraclemine::mining::{
    precise_oracle_mining, read_transcript, replay, write_transcript, EmulatedExpert, Expert,
    MiningConfig, MiningOutcome, OfferedResponse, SessionStatus, VisitOrder,
};
use oraclemine::{Error, Fsm, InputSymbol, Response, Test};
use oraclemine_service::ServiceConfig;

/// Mine a precise test oracle from an imprecise finite state machine.
#[derive(Parser)]
#[command(name = "oraclemine", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a machine is complete and initially connected.
    Validate { file: PathBuf },
    /// List the plausible responses to a test with their candidate counts.
    Responses {
        file: PathBuf,
        #[arg(long)]
        test: String,
        /// Also print the deterministic executions of each class.
        #[arg(long)]
        executions: bool,
    },
    /// Mine a deterministic oracle, asking an expert for expected responses.
    Mine {
        file: PathBuf,
        /// Deterministic machine answering for the expert.
        #[arg(
            long,
            conflicts_with = "interactive",
            required_unless_present = "interactive"
        )]
        expert: Option<PathBuf>,
        /// Ask for every response on the terminal.
        #[arg(long)]
        interactive: bool,
        /// Initial tests, e.g. `--tests babaab baa`.
        #[arg(long, num_args = 1..)]
        tests: Vec<String>,
        /// Shuffle the initial tests with this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the mined machine here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write the session transcript (JSON Lines) here.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Replay a session transcript and print its outcome.
    Replay { transcript: PathBuf },
    /// Print the Boolean encoding of a machine.
    Encode {
        file: PathBuf,
        /// Print DIMACS CNF instead of the formula; the variable map goes to
        /// standard error.
        #[arg(long)]
        dimacs: bool,
    },
    /// Print a shortest test on which two deterministic machines differ.
    Distinguish { first: PathBuf, second: PathBuf },
    /// Render a machine as a Graphviz graph.
    Dot { file: PathBuf },
    /// Mine oracles of random machines with injected uncertainty and print
    /// aggregate metrics as CSV.
    Experiment {
        /// Number of states; a comma list varies it across rows.
        #[arg(long, value_delimiter = ',', default_value = "10")]
        states: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        inputs: usize,
        #[arg(long, default_value_t = 2)]
        outputs: usize,
        /// Uncertainty degree; a comma list varies it across rows.
        #[arg(long, value_delimiter = ',', default_value = "2")]
        degree: Vec<usize>,
        #[arg(long, default_value_t = 30)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Engine time allowed per atomic experiment.
        #[arg(long)]
        budget_ms: Option<u64>,
        /// Random tests handed to the miner up front.
        #[arg(long, default_value_t = 0)]
        initial_tests: usize,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Serve the session API (and the console, if built).
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Keep one transcript per session here and restore them on start.
        #[arg(long)]
        transcripts: Option<PathBuf>,
        /// Directory with the built console, served under `/`.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Domain(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> CliResult<Fsm> {
    parse_fsm(&read(path)?).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ORACLEMINE_LOG", "warn"))
        .init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Validate { file } => validate(&file),
        Command::Responses {
            file,
            test,
            executions,
        } => responses(&file, &test, executions),
        Command::Mine {
            file,
            expert,
            interactive: _,
            tests,
            seed,
            output,
            transcript,
        } => mine(
            &file,
            expert.as_deref(),
            &tests,
            seed,
            output.as_deref(),
            transcript.as_deref(),
        ),
        Command::Replay { transcript } => replay_transcript(&transcript),
        Command::Encode { file, dimacs } => encode(&file, dimacs),
        Command::Distinguish { first, second } => distinguish(&first, &second),
        Command::Dot { file } => {
            print!("{}", render_dot(&load(&file)?));
            Ok(())
        }
        Command::Experiment {
            states,
            inputs,
            outputs,
            degree,
            reps,
            seed,
            budget_ms,
            initial_tests,
            workers,
        } => experiment(
            &states,
            inputs,
            outputs,
            &degree,
            reps,
            seed,
            budget_ms,
            initial_tests,
            workers,
        ),
        Command::Serve {
            port,
            host,
            transcripts,
            static_dir,
        } => serve(SocketAddr::new(host, port), transcripts, static_dir),
    }
}

fn validate(file: &Path) -> CliResult {
    let m = load(file)?;
    let report = m.validate();
    let uncertain = (0..m.num_slots())
        .filter(|&s| m.slot_transitions(s).len() > 1)
        .count();
    println!("machine {}", m.name());
    println!(
        "{} states, {} inputs, {} outputs, {} transitions",
        m.states().len(),
        m.inputs().len(),
        m.outputs().len(),
        m.transitions().len()
    );
    println!("uncertain slots: {uncertain}");
    if let Ok(n) = m.candidate_count() {
        println!("candidates: {n} ({})", format_scientific(&n));
    }
    println!("deterministic: {}", m.is_deterministic());
    m.check_complete()?;
    m.check_connected()?;
    println!("ok: complete and initially connected");
    log::debug!("{report:?}");
    Ok(())
}

fn responses(file: &Path, test: &str, executions: bool) -> CliResult {
    let m = load(file)?;
    m.check_complete()?;
    let test: Test = parse_word(test);
    let p = partition_responses(&m, &test)?;
    for class in &p.classes {
        println!(
            "{}\t{} candidates\t{} executions",
            format_word(&class.response),
            class.subdomain_size,
            class.executions.len()
        );
        if executions {
            for e in &class.executions {
                println!("  {}", e.display(&m));
            }
        }
    }
    Ok(())
}

/// Reads choices from standard input.
struct TerminalExpert;

impl Expert for TerminalExpert {
    fn choose(
        &mut self,
        test: &[InputSymbol],
        offered: &[OfferedResponse],
    ) -> oraclemine::Result<Response> {
        let stdin = io::stdin();
        loop {
            eprintln!("test {}:", format_word(test));
            for (i, o) in offered.iter().enumerate() {
                let size = o
                    .subdomain_size
                    .as_ref()
                    .map_or(String::new(), |s| format!(" (candidates: {s})"));
                eprintln!("  [{}] {}{size}", i + 1, format_word(&o.response));
            }
            eprint!("expected response (number or word): ");
            io::stderr().flush().ok();
            let mut line = String::new();
            if stdin
                .lock()
                .read_line(&mut line)
                .map_err(|e| Error::Protocol(e.to_string()))?
                == 0
            {
                return Err(Error::Protocol(
                    "input closed before the session finished".into(),
                ));
            }
            let line = line.trim();
            if let Some(o) = line
                .parse::<usize>()
                .ok()
                .and_then(|i| i.checked_sub(1))
                .and_then(|i| offered.get(i))
            {
                return Ok(o.response.clone());
            }
            let word: Response = parse_word(line);
            if offered.iter().any(|o| o.response == word) {
                return Ok(word);
            }
            eprintln!("`{line}` is not one of the offered responses");
        }
    }
}

fn mine(
    file: &Path,
    expert: Option<&Path>,
    tests: &[String],
    seed: Option<u64>,
    output: Option<&Path>,
    transcript: Option<&Path>,
) -> CliResult {
    let m = load(file)?;
    let tests: Vec<Test> = tests.iter().map(|t| parse_word(t)).collect();
    let config = MiningConfig {
        visit_order: seed.map_or(VisitOrder::Insertion, VisitOrder::Seeded),
        ..MiningConfig::default()
    };
    let outcome: MiningOutcome = match expert {
        Some(path) => {
            let mut expert = EmulatedExpert::new(load(path)?)?;
            precise_oracle_mining(&m, &tests, &mut expert, &config)?
        }
        None => precise_oracle_mining(&m, &tests, &mut TerminalExpert, &config)?,
    };
    if let Some(path) = transcript {
        write(path, &write_transcript(&outcome.events))?;
    }
    let text = render_fsm(&outcome.mined);
    match output {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    let tests: Vec<String> = outcome
        .adequate_tests
        .iter()
        .map(|t| format_word(t))
        .collect();
    eprintln!("adequate tests: {}", tests.join(" "));
    Ok(())
}

fn replay_transcript(path: &Path) -> CliResult {
    let events = read_transcript(&read(path)?)?;
    let session = replay(&events)?;
    match session.status() {
        SessionStatus::Done => {
            print!("{}", render_fsm(session.result().expect("done")));
            let tests: Vec<String> = session
                .adequate_tests()
                .iter()
                .map(|t| format_word(t))
                .collect();
            eprintln!("adequate tests: {}", tests.join(" "));
        }
        status => {
            let pending = session.pending().map_or(String::new(), |p| {
                format!(", pending test {}", format_word(&p.test))
            });
            println!(
                "session {status:?} after {} choices{pending}",
                session.history().len()
            );
        }
    }
    Ok(())
}

fn encode(file: &Path, dimacs: bool) -> CliResult {
    let m = load(file)?;
    let phi = encode_machine(&m)?;
    if dimacs {
        let (cnf, map) = to_dimacs(&m, &oraclemine::encoding::Formula::True)?;
        print!("{cnf}");
        eprint!("{map}");
    } else {
        println!("{phi}");
    }
    Ok(())
}

fn distinguish(first: &Path, second: &Path) -> CliResult {
    let (a, b) = (load(first)?, load(second)?);
    match minimal_distinguishing_test(&a, &b)? {
        Some(test) => {
            println!("{}", format_word(&test));
            println!("{}: {}", a.name(), format_word(&a.response(&test)?));
            println!("{}: {}", b.name(), format_word(&b.response(&test)?));
        }
        None => println!("equivalent"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    states: &[usize],
    inputs: usize,
    outputs: usize,
    degrees: &[usize],
    reps: usize,
    seed: u64,
    budget_ms: Option<u64>,
    initial_tests: usize,
    workers: Option<usize>,
) -> CliResult {
    if states.len() > 1 && degrees.len() > 1 {
        return Err(Failure::Usage(
            "vary either --states or --degree, not both".into(),
        ));
    }
    let mut config = ExperimentConfig::new(states[0], inputs, outputs, degrees[0]);
    config.repetitions = reps;
    config.seed = seed;
    config.time_budget = budget_ms.map(Duration::from_millis);
    config.initial_tests = initial_tests;
    if let Some(w) = workers {
        config.workers = w;
    }
    let rows = if states.len() > 1 {
        config.label = RowLabel::States;
        states
            .iter()
            .map(|&n| {
                run_experiment(&ExperimentConfig {
                    num_states: n,
                    ..config.clone()
                })
            })
            .collect::<Result<Vec<_>, _>>()?
    } else {
        degrees
            .iter()
            .map(|&u| {
                run_experiment(&ExperimentConfig {
                    degree: u,
                    ..config.clone()
                })
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    print!("{}", to_csv(&config, &rows));
    for r in rows.iter().filter(|r| r.partial) {
        eprintln!(
            "warning: row {} aggregates only {} of {reps} runs (time budget)",
            r.label, r.runs
        );
    }
    if rows.len() > 1 {
        eprintln!("median-time decreases: {}", trend_violations(&rows));
    }
    Ok(())
}

fn serve(addr: SocketAddr, transcripts: Option<PathBuf>, static_dir: Option<PathBuf>) -> CliResult {
    if let Some(dir) = &transcripts {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::Domain(format!("{}: {e}", dir.display())))?;
    }
    let config = ServiceConfig {
        transcript_dir: transcripts,
        static_dir,
        ..ServiceConfig::default()
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Domain(e.to_string()))?;
    eprintln!("serving on http://{addr}");
    runtime
        .block_on(oraclemine_service::serve(addr, config))
        .map_err(|e| Failure::Domain(e.to_string()))
}
