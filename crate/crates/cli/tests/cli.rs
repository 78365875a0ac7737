use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn clauseroute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clauseroute"))
        .args(args)
        .env_remove("CLAUSEROUTE_API_KEY")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn help_and_bad_usage_exit_codes() {
    assert_eq!(clauseroute(&["--help"]).status.code(), Some(0));
    assert_eq!(clauseroute(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(clauseroute(&["solve"]).status.code(), Some(1));
    let unknown_current = clauseroute(&["solve", "--key", "NONE", "--current", "not-a-model"]);
    assert_eq!(unknown_current.status.code(), Some(1));
    assert!(stderr(&unknown_current).contains("no endpoint matches"));
}

#[test]
fn solve_reports_the_selection() {
    let o = clauseroute(&["solve", "--key", "I want a model with cheaper output prices.", "--current", "GPT-4", "--mode", "completeness"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("selected ("));
    assert!(out.contains("feasible"));

    let oracle = clauseroute(&["solve", "--key", "NONE", "--oracle"]);
    assert_eq!(oracle.status.code(), Some(0));
    assert!(stdout(&oracle).contains("oracle skipped"));
}

#[test]
fn unrecognized_key_lists_accepted_forms() {
    let o = clauseroute(&["solve", "--key", "make it purple"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("accepted forms"));
}

#[test]
fn missing_store_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = clauseroute(&["fit-prior", "--store", p(&dir.path().join("absent.jsonl"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn live_agent_without_credentials_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("endpoint.toml");
    fs::write(&cfg, "base_url = \"http://127.0.0.1:9\"\nmodel = \"m\"\n").unwrap();
    let keys = dir.path().join("keys.tsv");
    fs::write(&keys, "NONE\n").unwrap();
    let o = clauseroute(&[
        "run-batch", "--keys", p(&keys), "--out", p(&dir.path().join("runs.jsonl")), "--agent", "live", "--endpoint", p(&cfg),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn batches_resume_without_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let keys = dir.path().join("keys.tsv");
    fs::write(&keys, "# key\tcount\tcurrent\nNONE\t5\nI want a cheaper model.\t3\tGPT-4\n").unwrap();
    let store = dir.path().join("runs.jsonl");
    let args = ["run-batch", "--keys", p(&keys), "--out", p(&store), "--agent", "noisy", "--seed", "7", "--timestamp", "0"];
    let first = clauseroute(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let text = fs::read_to_string(&store).unwrap();
    assert_eq!(text.lines().count(), 8);

    // Drop the last record as if the batch had been interrupted.
    let partial: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
    fs::write(&store, partial).unwrap();
    let second = clauseroute(&args);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&store).unwrap(), text);

    let third = clauseroute(&args);
    assert_eq!(third.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&store).unwrap(), text);
}

/// A store of `n` NONE runs from a prior agent with the given intercept.
fn prior_store(dir: &Path, intercept: f64, n: usize) -> std::path::PathBuf {
    let prior = dir.join("prior.txt");
    fs::write(&prior, format!("intercept {intercept}\nreasoning_enabled 1.5\n")).unwrap();
    let keys = dir.join("keys.tsv");
    fs::write(&keys, format!("NONE\t{n}\n")).unwrap();
    let store = dir.join("runs.jsonl");
    let o = clauseroute(&[
        "run-batch", "--keys", p(&keys), "--out", p(&store), "--agent", "prior", "--prior", p(&prior), "--seed", "1",
        "--timestamp", "0",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    store
}

#[test]
fn all_ones_store_reports_without_a_prior() {
    let dir = tempfile::tempdir().unwrap();
    let store = prior_store(dir.path(), 40.0, 6);
    let out_dir = dir.path().join("report");
    let o = clauseroute(&["report", "--store", p(&store), "--out-dir", p(&out_dir)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let outcomes = fs::read_to_string(out_dir.join("outcomes.tsv")).unwrap();
    assert!(outcomes.contains("NONE\t0\t0\t0\t6 (100.00%)\t6\t0"), "{outcomes}");
    let prior = fs::read_to_string(out_dir.join("prior_report.txt")).unwrap();
    assert!(prior.starts_with("prior fit skipped"), "{prior}");

    let fit = clauseroute(&["fit-prior", "--store", p(&store)]);
    assert_eq!(fit.status.code(), Some(2));
    assert!(stderr(&fit).contains("no CASE_S runs"));
}

#[test]
fn singleton_grid_and_permutation_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let store = prior_store(dir.path(), -0.8, 30);
    let fit = clauseroute(&["fit-prior", "--store", p(&store), "--grid", "0.5", "--n-perm", "0"]);
    assert_eq!(fit.status.code(), Some(0), "{}", stderr(&fit));
    assert!(stdout(&fit).contains("R\t0.5"), "{}", stdout(&fit));

    let few = clauseroute(&["permtest", "--store", p(&store), "--n-perm", "5"]);
    assert_eq!(few.status.code(), Some(1));

    let ok = clauseroute(&["permtest", "--store", p(&store), "--n-perm", "19", "--grid", "0.1,1"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert!(stdout(&ok).contains("n_perm\t19"));
}

#[test]
fn repl_answers_keys_and_commands() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_clauseroute"))
        .args(["repl", "--with-agent"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"current o3\nI want a cheaper model.\nhelp\nquit\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("selected ("));
}
