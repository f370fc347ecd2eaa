//! Random plants, uncertainty injection and repeated mining experiments.
//!
//! An atomic experiment generates a random complete DFSM (the plant), adds
//! uncertain transitions to it, mines an oracle from the result with the
//! plant acting as expert, and checks that the mined machine is equivalent
//! to the plant. A row aggregates repeated atomic experiments.

use std::fmt::Write as _;
use std::time::Duration;

use num_bigint::BigUint;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::distinguish;
use crate::encoding::CandidateModel;
use crate::error::{Error, Result};
use crate::fsm::{Fsm, InputSymbol, OutputSymbol, StateId, Test, TransitionDef};
use crate::mining::{EmulatedExpert, Expert, MiningConfig, MiningSession, SessionStatus};

fn input_names(k: usize) -> Vec<InputSymbol> {
    if k <= 26 {
        (0..k)
            .map(|i| char::from(b'a' + i as u8).to_string().into())
            .collect()
    } else {
        (0..k).map(|i| format!("x{i}").into()).collect()
    }
}

fn machine(
    name: &str,
    states: Vec<StateId>,
    initial: StateId,
    inputs: Vec<InputSymbol>,
    outputs: Vec<OutputSymbol>,
    // (src, input, output, tgt) in slot order
    quads: Vec<(usize, usize, usize, usize)>,
) -> Fsm {
    let defs = quads
        .into_iter()
        .enumerate()
        .map(|(i, (s, x, y, t))| {
            TransitionDef::new(
                format!("t{}", i + 1),
                states[s].clone(),
                inputs[x].clone(),
                outputs[y].clone(),
                states[t].clone(),
            )
        })
        .collect();
    Fsm::new(name, states, initial, inputs, outputs, defs)
        .expect("generated machines are well-formed")
}

/// A random complete, initially connected DFSM with states `1..=n`, inputs
/// `a, b, …` and outputs `0, 1, …`.
///
/// A random spanning tree rooted at the initial state is laid first, then
/// the remaining (state, input) pairs get uniform targets; outputs are
/// uniform everywhere.
pub fn random_dfsm(
    num_states: usize,
    num_inputs: usize,
    num_outputs: usize,
    seed: u64,
) -> Result<Fsm> {
    for (v, what) in [
        (num_states, "states"),
        (num_inputs, "inputs"),
        (num_outputs, "outputs"),
    ] {
        if v == 0 {
            return Err(Error::Protocol(format!(
                "number of {what} must be positive"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, k) = (num_states, num_inputs);
    let mut target: Vec<Option<usize>> = vec![None; n * k];
    let mut order: Vec<usize> = (1..n).collect();
    order.shuffle(&mut rng);
    let mut free: Vec<usize> = (0..k).collect();
    for s in order {
        let pick = rng.random_range(0..free.len());
        let slot = free.swap_remove(pick);
        target[slot] = Some(s);
        free.extend(s * k..s * k + k);
    }
    let quads = (0..n * k)
        .map(|slot| {
            let t = target[slot].unwrap_or_else(|| rng.random_range(0..n));
            (slot / k, slot % k, rng.random_range(0..num_outputs), t)
        })
        .collect();
    let outputs = (0..num_outputs).map(|i| i.to_string().into()).collect();
    let states: Vec<StateId> = (1..=n).map(|i| i.to_string().into()).collect();
    Ok(machine(
        "S",
        states.clone(),
        states[0].clone(),
        input_names(k),
        outputs,
        quads,
    ))
}

/// Adds transitions to a DFSM until every (state, input) pair carries
/// exactly `degree` transitions with distinct (output, target) pairs.
///
/// The transitions of each pair are shuffled and the ids renumbered in
/// pair order, so the plant's transitions sit at random positions.
pub fn inject_uncertainty(dfsm: &Fsm, degree: usize, seed: u64) -> Result<Fsm> {
    dfsm.check_deterministic()?;
    let n = dfsm.states().len();
    let l = dfsm.outputs().len();
    if degree < 2 {
        return Err(Error::InvalidDegree {
            degree,
            reason: "at least 2 transitions per pair are needed".into(),
        });
    }
    if degree > n * l {
        return Err(Error::InvalidDegree {
            degree,
            reason: format!("only {} distinct (output, target) pairs exist", n * l),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut quads = Vec::with_capacity(dfsm.num_slots() * degree);
    for slot in 0..dfsm.num_slots() {
        let t = dfsm.transition(dfsm.slot_transitions(slot)[0]);
        let existing = t.output * n + t.tgt;
        let others: Vec<usize> = (0..n * l).filter(|&p| p != existing).collect();
        let mut pairs: Vec<usize> = others
            .choose_multiple(&mut rng, degree - 1)
            .copied()
            .collect();
        pairs.push(existing);
        pairs.shuffle(&mut rng);
        let (s, x) = (dfsm.slot_state(slot), dfsm.slot_input(slot));
        quads.extend(pairs.into_iter().map(|p| (s, x, p / n, p % n)));
    }
    Ok(machine(
        "M",
        dfsm.states().to_vec(),
        dfsm.initial_state().clone(),
        dfsm.inputs().to_vec(),
        dfsm.outputs().to_vec(),
        quads,
    ))
}

/// The candidate of `machine` that behaves like `dfsm` transition for
/// transition, if there is one.
pub fn embed(dfsm: &Fsm, machine: &Fsm) -> Option<CandidateModel> {
    let mut slots = Vec::with_capacity(machine.num_slots());
    for slot in 0..machine.num_slots() {
        let s = &machine.states()[machine.slot_state(slot)];
        let x = &machine.inputs()[machine.slot_input(slot)];
        let ds = dfsm.slot(dfsm.state_index(s)?, dfsm.input_index(x)?);
        let d = dfsm.transition(*dfsm.slot_transitions(ds).first()?);
        let found = machine.slot_transitions(slot).iter().copied().find(|&t| {
            let t = machine.transition(t);
            machine.outputs()[t.output] == dfsm.outputs()[d.output]
                && machine.states()[t.tgt] == dfsm.states()[d.tgt]
        })?;
        slots.push(found);
    }
    Some(CandidateModel::from_slots(machine, slots))
}

/// Which parameter a row stands for in the first CSV column.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum RowLabel {
    #[default]
    Degree,
    States,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExperimentConfig {
    pub num_states: usize,
    pub num_inputs: usize,
    pub num_outputs: usize,
    pub degree: usize,
    pub repetitions: usize,
    pub seed: u64,
    /// Engine time allowed per atomic experiment.
    pub time_budget: Option<Duration>,
    /// Random tests (of length `num_states`) handed to the miner up front.
    pub initial_tests: usize,
    pub workers: usize,
    pub label: RowLabel,
}

impl ExperimentConfig {
    pub fn new(num_states: usize, num_inputs: usize, num_outputs: usize, degree: usize) -> Self {
        Self {
            num_states,
            num_inputs,
            num_outputs,
            degree,
            repetitions: 30,
            seed: 0,
            time_budget: None,
            initial_tests: 0,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            label: RowLabel::Degree,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.num_states == 0 || self.num_inputs == 0 || self.num_outputs == 0 {
            return Err(Error::Protocol(
                "states, inputs and outputs must be positive".into(),
            ));
        }
        if self.degree < 2 || self.degree > self.num_states * self.num_outputs {
            return Err(Error::InvalidDegree {
                degree: self.degree,
                reason: format!("expected 2..={}", self.num_states * self.num_outputs),
            });
        }
        Ok(())
    }

    /// Seed of the `rep`-th atomic experiment.
    pub fn run_seed(&self, rep: usize) -> u64 {
        self.seed
            .wrapping_add((rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

/// Outcome of one atomic experiment.
#[derive(Clone, Debug, Serialize)]
pub struct AtomicRun {
    pub seed: u64,
    pub adequate_tests: Vec<Test>,
    pub compute_time: Duration,
    /// Whether every choice for a generated test came with a witness: a
    /// candidate admitted before the choice and excluded by it.
    pub progress: bool,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExperimentRow {
    pub label: usize,
    #[serde(serialize_with = "as_decimal")]
    pub dom_size: BigUint,
    pub ts_min: usize,
    pub ts_max: usize,
    pub len_min: usize,
    pub len_max: usize,
    pub t_min_ms: u128,
    pub t_max_ms: u128,
    pub t_med_ms: u128,
    pub runs: usize,
    /// Some atomic experiments ran out of time and are not aggregated.
    pub partial: bool,
}

fn as_decimal<S: serde::Serializer>(n: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

/// Plant and imprecise machine of the `rep`-th atomic experiment.
pub fn atomic_setup(config: &ExperimentConfig, rep: usize) -> Result<(Fsm, Fsm)> {
    config.validate()?;
    let seed = config.run_seed(rep);
    let plant = random_dfsm(
        config.num_states,
        config.num_inputs,
        config.num_outputs,
        seed,
    )?;
    let machine = inject_uncertainty(&plant, config.degree, seed ^ 0x0005_DEEC_E66D)?;
    Ok((plant, machine))
}

/// One atomic experiment; fails with [`Error::Soundness`] if the mined
/// machine differs from the plant.
pub fn run_atomic(config: &ExperimentConfig, rep: usize) -> Result<AtomicRun> {
    let seed = config.run_seed(rep);
    let (plant, machine) = atomic_setup(config, rep)?;
    let mut rng = ChaCha8Rng::seed_from_u64(!seed);
    let tests: Vec<Test> = (0..config.initial_tests)
        .map(|_| {
            (0..config.num_states)
                .map(|_| plant.inputs().choose(&mut rng).unwrap().clone())
                .collect()
        })
        .collect();
    let mining = MiningConfig {
        size_budget: None,
        time_budget: config.time_budget,
        ..MiningConfig::default()
    };
    let mut expert = EmulatedExpert::new(plant.clone())?;
    let mut session = MiningSession::new(machine, tests, mining)?;
    while let Some(p) = session.pending() {
        let test = p.test.clone();
        let y = expert.choose(&test, &p.offered)?;
        session.submit_choice(Some(&test), &y)?;
    }
    if session.status() != SessionStatus::Done {
        return Err(Error::Inconclusive(session.examined()));
    }
    if !distinguish::equivalent(session.result().unwrap(), &plant)? {
        return Err(Error::Soundness(seed));
    }
    let generated = session.history().iter().filter(|s| s.generated).count();
    let progress = session.witnesses().len() == generated
        && session.witnesses().iter().all(|w| {
            w.excluded.satisfies(&w.formula_before) && !w.excluded.satisfies(&w.formula_after)
        });
    Ok(AtomicRun {
        seed,
        adequate_tests: session.adequate_tests().to_vec(),
        compute_time: session.compute_time(),
        progress,
        steps: session.history().len(),
    })
}

/// All atomic experiments of a row, in repetition order. Runs that ran
/// out of time are `None`.
pub fn run_atomics(config: &ExperimentConfig) -> Result<Vec<Option<AtomicRun>>> {
    config.validate()?;
    let workers = config.workers.clamp(1, config.repetitions.max(1));
    let mut results: Vec<Option<Result<AtomicRun>>> =
        (0..config.repetitions).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<Vec<usize>> = (0..workers)
            .map(|w| (w..config.repetitions).step_by(workers).collect())
            .collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|reps| {
                scope.spawn(move || {
                    reps.into_iter()
                        .map(|r| (r, run_atomic(config, r)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (r, res) in h.join().expect("worker panicked") {
                results[r] = Some(res);
            }
        }
    });
    results
        .into_iter()
        .map(|r| match r.expect("every repetition ran") {
            Ok(run) => Ok(Some(run)),
            Err(Error::BudgetExceeded) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// Runs a row of atomic experiments and aggregates their metrics.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRow> {
    let runs = run_atomics(config)?;
    let (_, machine) = atomic_setup(config, 0)?;
    let dom_size = machine.candidate_count()?;
    let partial = runs.iter().any(Option::is_none);
    let done: Vec<AtomicRun> = runs.into_iter().flatten().collect();
    Ok(aggregate(config, dom_size, &done, partial))
}

fn aggregate(
    config: &ExperimentConfig,
    dom_size: BigUint,
    runs: &[AtomicRun],
    partial: bool,
) -> ExperimentRow {
    let sizes: Vec<usize> = runs.iter().map(|r| r.adequate_tests.len()).collect();
    let lengths: Vec<usize> = runs
        .iter()
        .flat_map(|r| r.adequate_tests.iter().map(Vec::len))
        .collect();
    let mut times: Vec<u128> = runs.iter().map(|r| r.compute_time.as_millis()).collect();
    times.sort_unstable();
    let median = match times.len() {
        0 => 0,
        n if n % 2 == 1 => times[n / 2],
        n => (times[n / 2 - 1] + times[n / 2]) / 2,
    };
    ExperimentRow {
        label: match config.label {
            RowLabel::Degree => config.degree,
            RowLabel::States => config.num_states,
        },
        dom_size,
        ts_min: sizes.iter().copied().min().unwrap_or(0),
        ts_max: sizes.iter().copied().max().unwrap_or(0),
        len_min: lengths.iter().copied().min().unwrap_or(0),
        len_max: lengths.iter().copied().max().unwrap_or(0),
        t_min_ms: times.first().copied().unwrap_or(0),
        t_max_ms: times.last().copied().unwrap_or(0),
        t_med_ms: median,
        runs: runs.len(),
        partial,
    }
}

pub const CSV_HEADER: &str =
    "U_or_M,dom_size,ts_min,ts_max,len_min,len_max,t_min_ms,t_max_ms,t_med_ms";

/// CSV document: a `# config:` echo line, the header, one line per row.
pub fn to_csv(config: &ExperimentConfig, rows: &[ExperimentRow]) -> String {
    // The varied parameter is echoed with every value it took.
    let varied = |label: RowLabel, fixed: usize| {
        if config.label == label && !rows.is_empty() {
            rows.iter()
                .map(|r| r.label.to_string())
                .collect::<Vec<_>>()
                .join(",")
        } else {
            fixed.to_string()
        }
    };
    let mut out = format!(
        "# config: states={} inputs={} outputs={} degree={} reps={} seed={} initial_tests={}",
        varied(RowLabel::States, config.num_states),
        config.num_inputs,
        config.num_outputs,
        varied(RowLabel::Degree, config.degree),
        config.repetitions,
        config.seed,
        config.initial_tests
    );
    if let Some(b) = config.time_budget {
        write!(out, " budget_ms={}", b.as_millis()).unwrap();
    }
    out.push('\n');
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.label,
            r.dom_size,
            r.ts_min,
            r.ts_max,
            r.len_min,
            r.len_max,
            r.t_min_ms,
            r.t_max_ms,
            r.t_med_ms
        )
        .unwrap();
    }
    out
}

/// Number of adjacent rows whose median time decreases. Timing depends on
/// the host, so callers report this rather than fail on it.
pub fn trend_violations(rows: &[ExperimentRow]) -> usize {
    rows.windows(2)
        .filter(|w| w[1].t_med_ms < w[0].t_med_ms)
        .count()
}
