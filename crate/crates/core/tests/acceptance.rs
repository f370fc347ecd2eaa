//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status
//! if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use num_bigint::BigUint;
use oraclemine::encoding::{all_models, encode_class, extract_dfsm, format_scientific, Formula};
use oraclemine::exec::{partition_responses, reduce};
use oraclemine::harness::{inject_uncertainty, random_dfsm, run_atomics, ExperimentConfig};
use oraclemine::mining::{
    precise_oracle_mining, EmulatedExpert, MiningConfig, MiningSession, SessionStatus,
};
use oraclemine::{distinguish, OutputSymbol, TransitionId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn resp(s: &str) -> Vec<OutputSymbol> {
    s.chars()
        .map(|c| OutputSymbol::from(c.to_string()))
        .collect()
}

fn uncertain_truth_table(f: &Formula, g: impl Fn(&dyn Fn(u32) -> bool) -> bool) -> bool {
    (0u32..64).all(|bits| {
        let v = |i: u32| bits >> (i - 5) & 1 == 1;
        let value = |id: &TransitionId| {
            let i: u32 = id.as_str()[1..].parse().unwrap();
            !(5..=10).contains(&i) || v(i)
        };
        f.eval(&value) == g(&v)
    })
}

fn criterion_1() -> Outcome {
    let m = load("imprecise");
    let t0 = Instant::now();
    let p = partition_responses(&m, &word("babaab")).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    let sizes: Vec<(String, BigUint)> = p
        .classes
        .iter()
        .map(|c| {
            (
                oraclemine::fsm::format_word(&c.response),
                c.subdomain_size.clone(),
            )
        })
        .collect();
    let expected: Vec<(String, BigUint)> = vec![
        ("000000".into(), 2u32.into()),
        ("000100".into(), 4u32.into()),
        ("000110".into(), 2u32.into()),
    ];
    ensure(sizes == expected, || format!("classes {sizes:?}"))?;
    let phi = |r: &str| encode_class(&m, p.class(&resp(r)).unwrap()).unwrap();
    ensure(
        uncertain_truth_table(&phi("000100"), |v| (v(5) && v(9)) || (v(5) && v(10))),
        || "φ 000100".into(),
    )?;
    ensure(
        uncertain_truth_table(&phi("000110"), |v| v(6) && v(7)),
        || "φ 000110".into(),
    )?;
    ensure(
        uncertain_truth_table(&phi("000000"), |v| v(6) && v(8)),
        || "φ 000000".into(),
    )?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "3 classes 000000:2 000100:4 000110:2 in {elapsed:?}"
    ))
}

fn criterion_2() -> Outcome {
    let m = load("imprecise");
    let p = partition_responses(&m, &word("babaab")).map_err(|e| e.to_string())?;
    let m1 = reduce(
        &m,
        &word("babaab"),
        &resp("000100"),
        p.class(&resp("000100")).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    let removed = m.removed_in(&m1);
    ensure(removed == vec![TransitionId::from("t6")], || {
        format!("removed {removed:?}")
    })?;
    ensure(m1.states() == m.states(), || "states changed".into())?;
    let p1 = partition_responses(&m1, &word("babaaa")).map_err(|e| e.to_string())?;
    let class = p1
        .class(&resp("000100"))
        .ok_or("000100 not plausible for babaaa")?;
    let m2 = reduce(&m1, &word("babaaa"), &resp("000100"), class).map_err(|e| e.to_string())?;
    ensure(
        m2.same_transitions(&m1) && m2.states() == m1.states(),
        || format!("babaaa/000100 removed {:?}", m1.removed_in(&m2)),
    )?;
    Ok("babaab/000100 removes exactly t6; babaaa/000100 keeps M'".into())
}

/// Mines the running example and returns the outcome with the candidate
/// counts seen before each choice on a generated test.
fn criterion_3() -> Outcome {
    let m = load("imprecise");
    let proper = load("proper");
    let t0 = Instant::now();
    let mut expert = EmulatedExpert::new(proper.clone()).unwrap();
    let out = precise_oracle_mining(&m, &[word("babaab")], &mut expert, &MiningConfig::default())
        .map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    ensure(
        brute_equivalent(
            &out.mined,
            &choice_of(&out.mined),
            &proper,
            &choice_of(&proper),
        ),
        || "mined machine differs from the proper oracle".into(),
    )?;
    let pc = choice_of(&proper);
    let mut checked = 0;
    for c in candidates(&m) {
        if brute_equivalent(&m, &c, &proper, &pc) {
            continue;
        }
        checked += 1;
        let caught = out.adequate_tests.iter().any(|t| {
            let got: Vec<String> = run(&m, &c, &input_indices(&m, t))
                .iter()
                .map(|&o| m.outputs()[o].to_string())
                .collect();
            let want: Vec<String> = proper
                .response(t)
                .unwrap()
                .iter()
                .map(ToString::to_string)
                .collect();
            got != want
        });
        ensure(caught, || {
            format!("candidate {:?} is not distinguished", reachable_ids(&m, &c))
        })?;
    }
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    let tests: Vec<String> = out
        .adequate_tests
        .iter()
        .map(|t| oraclemine::fsm::format_word(t))
        .collect();
    Ok(format!(
        "mined ≡ proper oracle, TS_m = {{{}}} separates all {checked} non-equivalent candidates, {elapsed:?}",
        tests.join(", ")
    ))
}

/// A random machine with at most 4 states, 2 inputs, 2 outputs and at most
/// two transitions per (state, input).
/// Candidates of M' answering 000100 to babaaa, and the domain size of the
/// machine reduced on that response (M' itself).
fn running_example_class_vs_dom() -> Result<(usize, usize), String> {
    let m = load("imprecise");
    let p = partition_responses(&m, &word("babaab")).map_err(|e| e.to_string())?;
    let m1 = reduce(
        &m,
        &word("babaab"),
        &resp("000100"),
        p.class(&resp("000100")).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    let test = word("babaaa");
    let y = outputs_of(&m1, &resp("000100"));
    let w = input_indices(&m1, &test);
    let brute = candidates(&m1)
        .iter()
        .filter(|c| run(&m1, c, &w) == y)
        .count();
    let p1 = partition_responses(&m1, &test).map_err(|e| e.to_string())?;
    let m2 = reduce(
        &m1,
        &test,
        &resp("000100"),
        p1.class(&resp("000100")).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    Ok((brute, candidates(&m2).len()))
}

fn criterion_4() -> Outcome {
    let (running_brute, running_dom) = running_example_class_vs_dom()?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut machines = 0;
    let mut pairs = 0;
    let mut dom_mismatches = 0;
    let mut formula_mismatches = 0;
    let mut not_included = 0;
    let mut first_dom_mismatch = None;
    while machines < 200 {
        let m = small_machine(&mut rng);
        if m.is_deterministic() {
            continue;
        }
        machines += 1;
        let all = candidates(&m);
        for len in 1..=6 {
            for w in words(2, len) {
                let test: Vec<_> = w.iter().map(|&x| m.inputs()[x].clone()).collect();
                let p = partition_responses(&m, &test).map_err(|e| e.to_string())?;
                for class in &p.classes {
                    pairs += 1;
                    let y = outputs_of(&m, &class.response);
                    let brute: BTreeSet<BTreeSet<String>> = all
                        .iter()
                        .filter(|c| run(&m, c, &w) == y)
                        .map(|c| reachable_ids(&m, c))
                        .collect();
                    let reduced =
                        reduce(&m, &test, &class.response, class).map_err(|e| e.to_string())?;
                    let dom: BTreeSet<BTreeSet<String>> = candidates(&reduced)
                        .iter()
                        .map(|c| reachable_ids(&reduced, c))
                        .collect();
                    let phi = encode_class(&m, class).map_err(|e| e.to_string())?;
                    let models: BTreeSet<BTreeSet<String>> = all_models(&m, &phi, 1024)
                        .map_err(|e| e.to_string())?
                        .ok_or("more than 1024 models")?
                        .iter()
                        .map(|model| {
                            extract_dfsm(&m, model)
                                .transition_ids()
                                .map(ToString::to_string)
                                .collect()
                        })
                        .collect();
                    if brute != models {
                        formula_mismatches += 1;
                    }
                    if !brute.is_subset(&dom) {
                        not_included += 1;
                    }
                    if brute != dom {
                        dom_mismatches += 1;
                        first_dom_mismatch.get_or_insert_with(|| {
                            format!(
                                "{} on {}/{}",
                                oraclemine::format::render_fsm(&m).replace('\n', "; "),
                                oraclemine::fsm::format_word(&test),
                                oraclemine::fsm::format_word(&class.response)
                            )
                        });
                    }
                }
            }
        }
    }
    let summary = format!(
        "{machines} machines, {pairs} test/response pairs: formula mismatches {formula_mismatches}, \
         reduced-machine mismatches {dom_mismatches} (of which not over-approximations: {not_included}); \
         running example M' on babaaa/000100: {running_brute} candidates vs Dom(reduced) {running_dom}"
    );
    if formula_mismatches == 0 && dom_mismatches == 0 {
        Ok(summary)
    } else {
        Err(format!(
            "{summary}; first reduced-machine mismatch: {}",
            first_dom_mismatch.unwrap_or_default()
        ))
    }
}

fn criterion_5_and_8() -> (Outcome, Vec<Outcome>) {
    let mut lines = Vec::new();
    let mut progress = Vec::new();
    let mut failed = false;
    for states in [7, 10] {
        for degree in [2, 3] {
            let mut config = ExperimentConfig::new(states, 3, 2, degree);
            config.seed = 2024;
            config.time_budget = Some(Duration::from_secs(60));
            match run_atomics(&config) {
                Ok(runs) => {
                    let done: Vec<_> = runs.iter().flatten().collect();
                    let slowest = done
                        .iter()
                        .map(|r| r.compute_time)
                        .max()
                        .unwrap_or_default();
                    let stalled = done.iter().filter(|r| !r.progress).count();
                    if done.len() != runs.len() {
                        failed = true;
                        lines.push(format!(
                            "({states},{degree}) {} of {} runs over 60 s",
                            runs.len() - done.len(),
                            runs.len()
                        ));
                    } else {
                        lines.push(format!(
                            "({states},{degree}) 30/30 ≡ plant, slowest {slowest:?}"
                        ));
                    }
                    progress.push(if stalled == 0 {
                        Ok(format!(
                            "({states},{degree}) every generated test excluded a witness candidate"
                        ))
                    } else {
                        Err(format!(
                            "({states},{degree}) {stalled} runs without progress witness"
                        ))
                    });
                }
                Err(e) => {
                    failed = true;
                    lines.push(format!("({states},{degree}) {e}"));
                }
            }
        }
    }
    let summary = lines.join("; ");
    (if failed { Err(summary) } else { Ok(summary) }, progress)
}

fn criterion_6() -> Outcome {
    let plant = random_dfsm(10, 3, 2, 6).map_err(|e| e.to_string())?;
    let mut found = Vec::new();
    for (degree, expected, shown) in [
        (2u32, BigUint::from(2u32).pow(30), "1.07E9"),
        (3, BigUint::from(3u32).pow(30), "2.06E14"),
    ] {
        let m = inject_uncertainty(&plant, degree as usize, 60 + u64::from(degree))
            .map_err(|e| e.to_string())?;
        let count = m.candidate_count().map_err(|e| e.to_string())?;
        ensure(count == expected, || format!("U={degree}: {count}"))?;
        ensure(format_scientific(&count) == shown, || {
            format!("U={degree}: rendered {}", format_scientific(&count))
        })?;
        found.push(format!("U={degree}: {count} ({shown})"));
    }
    Ok(found.join(", "))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut pairs = 0;
    let mut longest = 0;
    while pairs < 500 {
        let k = rng.random_range(1..=3);
        let a = random_dfsm(rng.random_range(1..=5), k, 2, rng.random()).unwrap();
        let b = random_dfsm(rng.random_range(1..=5), k, 2, rng.random()).unwrap();
        let (ca, cb) = (choice_of(&a), choice_of(&b));
        if brute_equivalent(&a, &ca, &b, &cb) {
            ensure(
                distinguish::minimal_distinguishing_test(&a, &b)
                    .unwrap()
                    .is_none(),
                || "equivalent pair got a test".into(),
            )?;
            continue;
        }
        pairs += 1;
        let x = distinguish::minimal_distinguishing_test(&a, &b)
            .map_err(|e| e.to_string())?
            .ok_or("non-equivalent pair reported equivalent")?;
        let xi = input_indices(&a, &x);
        let (ya, yb) = (run(&a, &ca, &xi), run(&b, &cb, &xi));
        ensure(ya != yb, || "responses agree on the test".into())?;
        ensure(ya[..ya.len() - 1] == yb[..yb.len() - 1], || {
            "responses differ on a proper prefix".into()
        })?;
        let brute = brute_min_distinguishing(&a, &ca, &b, &cb, x.len()).unwrap();
        ensure(brute == x.len(), || {
            format!("length {} but a length-{brute} test exists", x.len())
        })?;
        longest = longest.max(x.len());
    }
    Ok(format!("{pairs} pairs, all minimal (longest {longest})"))
}

/// Candidate counts must drop across every choice on a generated test.
fn criterion_8_small() -> Outcome {
    let m = load("imprecise");
    let proper = load("proper");
    let mut s = MiningSession::new(m, vec![word("babaab")], MiningConfig::default())
        .map_err(|e| e.to_string())?;
    let mut counts = vec![s
        .candidate_count_remaining(Some(100_000))
        .lower_bound()
        .clone()];
    while s.status() == SessionStatus::AwaitingChoice {
        let p = s.pending().unwrap();
        let (test, generated) = (p.test.clone(), p.generated);
        s.submit_choice(Some(&test), &proper.response(&test).unwrap())
            .map_err(|e| e.to_string())?;
        let now = s.candidate_count_remaining(Some(100_000));
        let now = now.exact().ok_or("count capped")?.clone();
        if generated {
            ensure(&now < counts.last().unwrap(), || {
                format!(
                    "count did not drop after {}",
                    oraclemine::fsm::format_word(&test)
                )
            })?;
        }
        counts.push(now);
    }
    let shown: Vec<String> = counts.iter().map(ToString::to_string).collect();
    Ok(format!("running example counts {}", shown.join(" → ")))
}

fn main() {
    let mut all_ok = true;
    let mut report = |name: &str, outcome: Outcome| match &outcome {
        Ok(detail) => println!("criterion {name}: PASS  {detail}"),
        Err(detail) => {
            all_ok = false;
            println!("criterion {name}: FAIL  {detail}");
        }
    };
    report("1 (running-example partition)", criterion_1());
    report("2 (running-example reduction)", criterion_2());
    report("3 (running-example mining)", criterion_3());
    report("4 (reduction and encoding vs brute force)", criterion_4());
    let (c5, c8_large) = criterion_5_and_8();
    report("5 (mining soundness at desk scale)", c5);
    report("6 (candidate-count reproduction)", criterion_6());
    report("7 (minimal distinguishing tests)", criterion_7());
    let mut c8 = vec![criterion_8_small()];
    c8.extend(c8_large);
    let c8: Outcome = match c8.iter().find(|o| o.is_err()) {
        Some(Err(e)) => Err(e.clone()),
        _ => Ok(c8
            .into_iter()
            .map(Result::unwrap)
            .collect::<Vec<_>>()
            .join("; ")),
    };
    report("8 (progress)", c8);
    if !all_ok {
        std::process::exit(1);
    }
}
