use std::path::Path;
use std::process::{Command, Output};

fn tmlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmlab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn run_reports_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let o = tmlab(dir.path(), &["run", "--machine", "L0", "--n", "6"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("outcome: Accepted"));
    let o = tmlab(dir.path(), &["run", "--machine", "L0", "--n", "4"]);
    assert!(stdout(&o).contains("outcome: Rejected"));
    let o = tmlab(
        dir.path(),
        &["run", "--machine", "coLAM", "--n", "12", "--oracle-script"],
    );
    assert!(stdout(&o).contains("outcome: Accepted"));
}

#[test]
fn run_reads_machine_files_and_scripts() {
    let dir = tempfile::tempdir().unwrap();
    let spec = "states: q0 acc\ninput: a\nblank: _\ninitial: q0\naccept: acc\ntransitions:\n\
                (q0, a) -> (q0, a, R)\n(q0, a) -> (acc, a, S)\n(q0, _) -> (acc, a, S)\n";
    std::fs::write(dir.path().join("m.tm"), spec).unwrap();
    std::fs::write(dir.path().join("s.txt"), "0,0,1\n").unwrap();
    let o = tmlab(
        dir.path(),
        &[
            "run",
            "--machine",
            "m.tm",
            "--input",
            "aaaa",
            "--script",
            "s.txt",
            "--crossings",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("outcome: Accepted"));
    assert!(out.contains("time: 3"));
    assert!(out.contains("crossing lengths by boundary: 0 1 1"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&tmlab(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&tmlab(dir.path(), &["run", "--machine", "nope", "--n", "1"])), 1);
    assert_eq!(code(&tmlab(dir.path(), &["run", "--machine", "L0"])), 1);
    assert_eq!(code(&tmlab(dir.path(), &["profile", "--machine", "L0", "--n", ""])), 1);
    assert_eq!(code(&tmlab(dir.path(), &["karp", "--language", "XX"])), 1);
    assert_eq!(code(&tmlab(dir.path(), &["--help"])), 0);
}

#[test]
fn profile_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let o = tmlab(
        dir.path(),
        &[
            "profile",
            "--machine",
            "L0",
            "--n",
            "2^6..2^12",
            "--out",
            "l0.csv",
            "--plot",
            "l0.gp",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("l0.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8);
    assert!(csv.starts_with("n,resource,measure,value,exactness,outcome\n64,time,strong,"));
    let plot = std::fs::read_to_string(dir.path().join("l0.gp")).unwrap();
    assert!(plot.contains("'l0.csv'"));
}

#[test]
fn profile_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["profile", "--machine", "mod3", "--n", "0..6", "--measure", "weak"];
    let a = stdout(&tmlab(dir.path(), &args));
    let b = stdout(&tmlab(dir.path(), &args));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 8);
}

#[test]
fn scripted_weak_rows_are_upper_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let o = tmlab(
        dir.path(),
        &[
            "profile",
            "--machine",
            "coLAM",
            "--n",
            "2,4,12",
            "--resource",
            "crossing",
            "--measure",
            "weak",
            "--oracle-script",
        ],
    );
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.contains(",upper-bound,accepted")));
}

#[test]
fn ratio_check_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // The sweeper runs in linear time, so value/n cannot increase strictly.
    let args = [
        "profile",
        "--machine",
        "sweeper",
        "--n",
        "2^2..2^6",
        "--check",
        "n",
        "--out",
        "s.csv",
    ];
    assert_eq!(code(&tmlab(dir.path(), &args)), 0);
    let mut strict = args.to_vec();
    strict.push("--increasing");
    assert_eq!(code(&tmlab(dir.path(), &strict)), 2);
    let o = tmlab(dir.path(), &["check", "s.csv", "--check", "1", "--fit-at", "4"]);
    assert_eq!(code(&o), 2);
    let o = tmlab(dir.path(), &["check", "s.csv", "--check", "nlogn"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("bound holds"));
}

#[test]
fn experiments_come_from_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("lab.toml"),
        "[experiments.small]\nmachine = \"mod2\"\nn = \"1..4\"\nmeasure = \"accept\"\n",
    )
    .unwrap();
    let o = tmlab(dir.path(), &["profile", "--experiment", "small"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("\n4,time,accept,"));
    assert_eq!(code(&tmlab(dir.path(), &["profile", "--experiment", "other"])), 1);
    std::fs::write(dir.path().join("bad.toml"), "slack = 0\n").unwrap();
    let o = tmlab(
        dir.path(),
        &["--config", "bad.toml", "run", "--machine", "mod2", "--n", "1"],
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn nfa_agreement_and_disagreement() {
    let dir = tempfile::tempdir().unwrap();
    let o = tmlab(
        dir.path(),
        &[
            "nfa",
            "--machine",
            "sweeper",
            "--k",
            "1",
            "--max-len",
            "10",
            "--export",
            "n.nfa",
        ],
    );
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("agreement on all 11 words up to length 10"));
    assert!(dir.path().join("n.nfa").exists());
    let o = tmlab(
        dir.path(),
        &["nfa", "--machine", "coLAM", "--k", "2", "--max-len", "64"],
    );
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("disagreement at length 2"));
    let o = tmlab(
        dir.path(),
        &[
            "nfa",
            "--machine",
            "coLAM",
            "--k",
            "2",
            "--max-len",
            "64",
            "--expect-disagreement",
        ],
    );
    assert_eq!(code(&o), 0);
    let o = tmlab(dir.path(), &["nfa", "--machine", "sweeper", "--k", "0"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("degenerate"));
}

#[test]
fn karp_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = tmlab(dir.path(), &["karp", "--language", "LAM", "--n-max", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 3);
    let o = tmlab(
        dir.path(),
        &[
            "karp",
            "--language",
            "LAM",
            "--n-max",
            "256",
            "--out",
            "k.csv",
            "--min-witnesses",
            "5",
        ],
    );
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("k.csv")).unwrap();
    assert_eq!(csv.lines().count(), 258);
    let o = tmlab(
        dir.path(),
        &["karp", "--language", "LAM", "--n-max", "4", "--min-witnesses", "5"],
    );
    assert_eq!(code(&o), 2);
    std::fs::write(dir.path().join("bits.txt"), "0\n1\n0\n1\n0\n1\n").unwrap();
    let o = tmlab(dir.path(), &["karp", "--bits", "bits.txt", "--n-max", "5"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("     5        2          4     no"));
}

#[test]
fn splices() {
    let dir = tempfile::tempdir().unwrap();
    let o = tmlab(
        dir.path(),
        &[
            "splice",
            "--machine",
            "sweeper",
            "--input1",
            "aaa",
            "--b1",
            "2",
            "--input2",
            "aaa",
            "--b2",
            "2",
        ],
    );
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("identical to the first computation"));
    let o = tmlab(
        dir.path(),
        &[
            "splice",
            "--machine",
            "sweeper",
            "--input1",
            "a^3",
            "--b1",
            "1",
            "--input2",
            "a^5",
            "--b2",
            "3",
        ],
    );
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("spliced input: aaaaa"));
    assert!(out.contains("spliced outcome: Accepted"));
    let o = tmlab(
        dir.path(),
        &[
            "splice",
            "--machine",
            "mod3",
            "--input1",
            "aaa",
            "--b1",
            "1",
            "--input2",
            "aaaaa",
            "--b2",
            "3",
        ],
    );
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("splice error"));
}
