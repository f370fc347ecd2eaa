use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use oraclemine::distinguish::equivalent;
use oraclemine::format::parse_fsm;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/examples/data")
        .join(format!("{name}.fsm"))
}

fn oraclemine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oraclemine"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_reports_the_running_example() {
    let out = oraclemine(&["validate", path(&data("imprecise"))]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("4 states, 2 inputs, 2 outputs, 11 transitions"));
    assert!(text.contains("candidates: 8"));
    assert!(text.contains("deterministic: false"));
}

#[test]
fn validate_rejects_incomplete_machines_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m.fsm");
    std::fs::write(&file, "states 1 2\ninitial 1\ninputs a b\noutputs 0\ntrans t1: 1 a/0 2\ntrans t2: 2 a/0 1\ntrans t3: 2 b/0 2\n")
        .unwrap();
    let out = oraclemine(&["validate", path(&file)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not complete"));

    std::fs::write(
        &file,
        "states 1\ninitial 1\ninputs a\noutputs 0\ntrans t1: 1 a/0 9\n",
    )
    .unwrap();
    let out = oraclemine(&["validate", path(&file)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 5"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(oraclemine(&[]).status.code(), Some(2));
    assert_eq!(
        oraclemine(&["mine", path(&data("imprecise"))])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        oraclemine(&["experiment", "--states", "5,7", "--degree", "2,3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        oraclemine(&["responses", path(&data("imprecise"))])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn responses_lists_the_partition() {
    let out = oraclemine(&[
        "responses",
        path(&data("imprecise")),
        "--test",
        "babaab",
        "--executions",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<String> = stdout(&out)
        .lines()
        .filter(|l| !l.starts_with(' '))
        .map(str::to_owned)
        .collect();
    assert_eq!(
        lines,
        [
            "000000\t2 candidates\t1 executions",
            "000100\t4 candidates\t2 executions",
            "000110\t2 candidates\t1 executions"
        ]
    );
    let out = oraclemine(&["responses", path(&data("imprecise")), "--test", "bxb"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn mine_with_an_emulated_expert_writes_machine_and_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let mined = dir.path().join("mined.fsm");
    let transcript = dir.path().join("session.jsonl");
    let out = oraclemine(&[
        "mine",
        path(&data("imprecise")),
        "--expert",
        path(&data("proper")),
        "--tests",
        "babaab",
        "--output",
        path(&mined),
        "--transcript",
        path(&transcript),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).starts_with("adequate tests: babaab"));
    let mined = parse_fsm(&std::fs::read_to_string(&mined).unwrap()).unwrap();
    let proper = parse_fsm(&std::fs::read_to_string(data("proper")).unwrap()).unwrap();
    assert!(equivalent(&mined, &proper).unwrap());

    let out = oraclemine(&["replay", path(&transcript)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(parse_fsm(&stdout(&out)).unwrap(), mined);
}

#[test]
fn interactive_mining_reads_choices_from_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_oraclemine"))
        .args([
            "mine",
            path(&data("imprecise")),
            "--interactive",
            "--tests",
            "babaab",
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    // A bad answer is asked again; then numbered and spelled-out choices.
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"nonsense\n000100\n1\n1\n1\n1\n1\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("not one of the offered responses"));
    let mined = parse_fsm(&stdout(&out)).unwrap();
    assert!(mined.is_deterministic());

    // Input ending early is a domain error.
    let mut child = Command::new(env!("CARGO_BIN_EXE_oraclemine"))
        .args(["mine", path(&data("imprecise")), "--interactive"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    drop(child.stdin.take());
    assert_eq!(child.wait_with_output().unwrap().status.code(), Some(1));
}

#[test]
fn distinguish_and_dot() {
    let out = oraclemine(&[
        "distinguish",
        path(&data("proper")),
        path(&data("inappropriate")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().next(), Some("baa"));
    let out = oraclemine(&["distinguish", path(&data("proper")), path(&data("proper"))]);
    assert_eq!(stdout(&out).trim(), "equivalent");
    let out = oraclemine(&[
        "distinguish",
        path(&data("proper")),
        path(&data("imprecise")),
    ]);
    assert_eq!(out.status.code(), Some(1));

    let out = oraclemine(&["dot", path(&data("imprecise"))]);
    let dot = stdout(&out);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("dashed").count(), 6);
}

#[test]
fn encode_prints_formula_and_dimacs() {
    let out = oraclemine(&["encode", path(&data("imprecise"))]);
    assert!(stdout(&out).starts_with("t1 ∧ t2 ∧ t3 ∧ t4 ∧ t11 ∧ "));
    let out = oraclemine(&["encode", path(&data("imprecise")), "--dimacs"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().any(|l| l.starts_with("p cnf 11 ")));
    assert_eq!(stderr(&out).lines().count(), 11);
}

#[test]
fn experiment_prints_csv() {
    let out = oraclemine(&[
        "experiment",
        "--states",
        "4",
        "--inputs",
        "2",
        "--degree",
        "2,3",
        "--reps",
        "3",
        "--seed",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "# config: states=4 inputs=2 outputs=2 degree=2,3 reps=3 seed=9 initial_tests=0"
    );
    assert_eq!(
        lines[1],
        "U_or_M,dom_size,ts_min,ts_max,len_min,len_max,t_min_ms,t_max_ms,t_med_ms"
    );
    assert!(lines[2].starts_with("2,256,"));
    assert!(lines[3].starts_with("3,6561,"));
    // Same seed, same tests (times aside).
    let again = stdout(&oraclemine(&[
        "experiment",
        "--states",
        "4",
        "--inputs",
        "2",
        "--degree",
        "2,3",
        "--reps",
        "3",
        "--seed",
        "9",
    ]));
    let strip = |s: &str| {
        s.lines()
            .map(|l| l.split(',').take(6).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&text), strip(&again));

    let out = oraclemine(&[
        "experiment",
        "--states",
        "3",
        "--degree",
        "9",
        "--reps",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn serve_answers_http() {
    use std::io::Read;
    use std::net::{TcpListener, TcpStream};
    use std::time::{Duration, Instant};

    let port = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_oraclemine"))
        .args(["serve", "--port", &port.to_string()])
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let started = Instant::now();
    let mut stream = loop {
        match TcpStream::connect(("127.0.0.1", port)) {
            Ok(s) => break s,
            Err(_) if started.elapsed() < Duration::from_secs(20) => {
                std::thread::sleep(Duration::from_millis(50))
            }
            Err(e) => panic!("service did not come up: {e}"),
        }
    };
    stream.write_all(b"GET /api/v1/sessions/unknown HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").unwrap();
    let mut reply = String::new();
    stream.read_to_string(&mut reply).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(reply.starts_with("HTTP/1.1 404"), "{reply}");
}
