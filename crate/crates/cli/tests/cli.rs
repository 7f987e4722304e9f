use std::path::Path;
use std::process::{Command, Output};

use num_bigint::BigInt;
use pairsolve::io::{parse_instance, parse_solution, write_instance, write_solution, SolutionFile};
use proptest::prelude::*;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairsolve")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn gen_to(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name);
    let mut args = vec!["gen", "-o", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    path.to_str().unwrap().to_string()
}

fn solve_to(dir: &Path, inst: &str) -> String {
    let sol = dir.join("out.sol");
    let o = run(&["solve", inst, "-o", sol.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    sol.to_str().unwrap().to_string()
}

#[test]
fn gen_solve_verify() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_to(dir.path(), "a.txt", &["--seed", "3"]);
    let sol = solve_to(dir.path(), &inst);
    let o = run(&["verify", &inst, &sol]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("ok:"));
}

#[test]
fn gen_is_byte_deterministic() {
    let a = run(&["gen", "--p", "7", "--seed", "11"]);
    let b = run(&["gen", "--p", "7", "--seed", "11"]);
    let c = run(&["gen", "--p", "7", "--seed", "12"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn tampered_solution_fails_congruence() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_to(dir.path(), "a.txt", &["--seed", "5"]);
    let sol = solve_to(dir.path(), &inst);
    let mut s = parse_solution(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    let i = s.x.iter().position(|v| *v != BigInt::from(0)).unwrap();
    s.x[i] += 1;
    std::fs::write(&sol, write_solution(&s)).unwrap();
    let o = run(&["verify", &inst, &sol]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("congruence"));
}

#[test]
fn all_zero_solution_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_to(dir.path(), "a.txt", &["--seed", "6"]);
    let pair = parse_instance(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    let s = SolutionFile { p: 5, tau: 1, precision: 6, x: vec![BigInt::from(0); pair.s()], pair: (0, 1) };
    let sol = dir.path().join("zero.sol");
    std::fs::write(&sol, write_solution(&s)).unwrap();
    let o = run(&["verify", &inst, sol.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("trivial"));
}

#[test]
fn too_few_variables_is_out_of_scope() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("5 1\n");
    for i in 1..=798 {
        text += &format!("{i} {}\n", 2 * i + 1);
    }
    let inst = dir.path().join("short.txt");
    std::fs::write(&inst, text).unwrap();
    assert_eq!(code(&run(&["solve", inst.to_str().unwrap()])), 2);
}

#[test]
fn malformed_and_unsupported_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "5 one\n1 2\n").unwrap();
    let o = run(&["solve", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    std::fs::write(&bad, "3 1\n1 2\n").unwrap();
    assert_eq!(code(&run(&["solve", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["gen", "--hint", "no-such-branch"])), 1);
}

#[test]
fn proportional_pair_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("5 1\n");
    for _ in 0..801 {
        text += "1 2\n";
    }
    let inst = dir.path().join("deg.txt");
    std::fs::write(&inst, text).unwrap();
    assert_eq!(code(&run(&["solve", inst.to_str().unwrap()])), 3);
}

#[test]
fn profile_reports_the_aimed_branch() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_to(dir.path(), "a.txt", &["--seed", "2", "--hint", "r=-1"]);
    let o = run(&["profile", &inst]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("r = -1"), "{out}");
    assert!(out.contains("[r=-1]"), "{out}");
    assert!(out.contains("sum m_l = 801"), "{out}");
}

#[test]
fn solve_json_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_to(dir.path(), "a.txt", &["--seed", "9"]);
    let o = run(&["solve", &inst, "--json", "--oracle", "--log"]);
    assert_eq!(code(&o), 0);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["p"], 5);
    assert_eq!(doc["x"].as_array().unwrap().len(), 801);
    assert!(String::from_utf8_lossy(&o.stderr).contains("oracle: agrees"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instance_files_round_trip(c in prop::collection::vec((any::<i64>(), 1i64..i64::MAX), 1..40)) {
        let text: String = std::iter::once("7 1\n".to_string()).chain(c.iter().map(|(a, b)| format!("{a} {b}\n"))).collect();
        let pair = parse_instance(&text).unwrap();
        prop_assert_eq!(parse_instance(&write_instance(&pair, &["note".into()])).unwrap(), pair);
    }

    #[test]
    fn solution_files_round_trip(x in prop::collection::vec(0u64..u64::MAX, 2..30), i in 0usize..2) {
        let s = SolutionFile { p: 5, tau: 2, precision: 9, x: x.iter().map(|&v| BigInt::from(v)).collect(), pair: (i, x.len() - 1) };
        prop_assert_eq!(parse_solution(&write_solution(&s)).unwrap(), s);
    }
}
