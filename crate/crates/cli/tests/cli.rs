use std::path::PathBuf;
use std::process::{Command, Output};

use gammaflow_core::dataflow::parse_graph_text;
use gammaflow_core::fixtures;
use gammaflow_core::gamma::{parse_program, print_program};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn gammaflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gammaflow"))
        .args(args)
        .env_remove("GAMMAFLOW_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn parse_echoes_canonical_program() {
    let o = gammaflow(&["parse", &fixture("example1.gamma")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), print_program(&fixtures::example1_program()));
}

#[test]
fn parse_reports_position_of_syntax_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.gamma");
    std::fs::write(&bad, "R = replace [x, 'A']\n  by [x + , 'B']\n").unwrap();
    let o = gammaflow(&["parse", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("bad.gamma:2:11"), "{}", stderr(&o));
}

#[test]
fn parse_summarises_example2_graph() {
    let o = gammaflow(&["parse", "--format", "summary", &fixture("example2.df")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("9 operators"), "{}", stdout(&o));
    let echoed = gammaflow(&["parse", &fixture("example2.df")]);
    assert_eq!(parse_graph_text(&stdout(&echoed)).unwrap(), fixtures::example2_graph());
}

#[test]
fn parse_respects_type_override() {
    let o = gammaflow(&["parse", "--type", "df", &fixture("example1.gamma")]);
    assert_eq!(code(&o), 1);
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("prog.txt");
    std::fs::write(&plain, fixtures::MIN_GAMMA).unwrap();
    assert_eq!(code(&gammaflow(&["parse", plain.to_str().unwrap()])), 1);
    assert_eq!(code(&gammaflow(&["parse", "--type", "gamma", plain.to_str().unwrap()])), 0);
}

#[test]
fn convert_example1_to_gamma_and_fuse() {
    let o = gammaflow(&["convert", &fixture("example1.df")]);
    assert_eq!(code(&o), 0);
    let p = parse_program(&stdout(&o)).unwrap();
    assert_eq!(p.reactions.len(), 3);
    assert_eq!(p.initial, fixtures::example1_program().initial);

    let fused = gammaflow(&["convert", "--fuse", &fixture("example1.df")]);
    assert_eq!(code(&fused), 0);
    assert_eq!(parse_program(&stdout(&fused)).unwrap().reactions.len(), 1);
}

#[test]
fn convert_gamma_writes_one_graph_per_reaction() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("graphs");
    let o = gammaflow(&["convert", &fixture("example1.gamma"), "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names, ["R1.df", "R2.df", "R3.df"]);
    for n in names {
        parse_graph_text(&std::fs::read_to_string(out.join(n)).unwrap()).unwrap();
    }
}

#[test]
fn convert_links_and_instantiates() {
    let linked = gammaflow(&["convert", "--link", &fixture("example1.gamma")]);
    assert_eq!(code(&linked), 0);
    let g = parse_graph_text(&stdout(&linked)).unwrap();
    assert!(gammaflow_core::dataflow::isomorphic(&g, &fixtures::example1_graph()));

    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("six.mset");
    std::fs::write(&m, "[1,'e'] [2,'e'] [3,'e'] [4,'e'] [5,'e'] [6,'e']").unwrap();
    let o = gammaflow(&["convert", "--instantiate", "--inputs", m.to_str().unwrap(), &fixture("min.gamma")]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("R: 3 instance(s)"), "{}", stderr(&o));
}

#[test]
fn run_example1_program() {
    let o = gammaflow(&["run", "--seed", "7", &fixture("example1.gamma")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("multiset: {[0, 'm', 0]}"), "{}", stdout(&o));
}

#[test]
fn run_example2_graph() {
    let o = gammaflow(&["run", "--seed", "7", "--set", "y=4", "--set", "z=3", "--set", "x=2", &fixture("example2.df")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("sinks: {(C14, 14)}"), "{}", stdout(&o));
    let zero = gammaflow(&["run", "--set", "z=0", "--format", "summary", &fixture("example2.df")]);
    assert!(stdout(&zero).ends_with("{(C14, 2)}\n"), "{}", stdout(&zero));
}

#[test]
fn zero_budget_exhausts() {
    for f in ["example1.df", "example1.gamma", "example2.df", "min.gamma"] {
        let o = gammaflow(&["run", "--max-steps", "0", &fixture(f)]);
        assert_eq!(code(&o), 4, "{f}");
        assert!(stdout(&o).contains("status: budget-exhausted"), "{f}");
    }
}

#[test]
fn execution_fault_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("div.df");
    std::fs::write(&g, "node a source 3\nnode b div 0\nnode t sink\nedge L a b\nedge M b t\n").unwrap();
    let o = gammaflow(&["run", g.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("division by zero"));
}

#[test]
fn check_equiv_agrees_on_fixtures() {
    for f in ["example1.df", "example2.df"] {
        let o = gammaflow(&["check-equiv", "--seeds", "1..=5", &fixture(f)]);
        assert_eq!(code(&o), 0, "{f}: {}", stdout(&o));
        assert!(stdout(&o).contains("25 agree, 0 diverge"), "{f}");
    }
    let o = gammaflow(&["check-equiv", "--seeds", "3,4", "--format", "summary", &fixture("example1.df")]);
    assert_eq!(stdout(&o), "3 3 agree\n3 4 agree\n4 3 agree\n4 4 agree\n");
}

#[test]
fn corrupted_conversion_is_a_divergence() {
    let o = gammaflow(&["check-equiv", "--corrupt", "--seeds", "1..=5", &fixture("example1.df")]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("0 agree, 25 diverge"), "{}", stdout(&o));
}

#[test]
fn output_is_reproducible() {
    let args = ["run", "--trace", "--seed", "11", &fixture("example2.df")];
    assert_eq!(gammaflow(&args).stdout, gammaflow(&args).stdout);
    let via_env = Command::new(env!("CARGO_BIN_EXE_gammaflow"))
        .args(["run", "--trace", &fixture("example2.df")])
        .env("GAMMAFLOW_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(via_env.stdout, gammaflow(&args).stdout);
    let other = gammaflow(&["run", "--trace", "--seed", "12", &fixture("example2.df")]);
    assert_eq!(stdout(&other).lines().last(), stdout(&gammaflow(&args)).lines().last());
}

#[test]
fn dot_for_graphs_and_reactions() {
    let g = gammaflow(&["dot", &fixture("example1.df")]);
    assert_eq!(code(&g), 0);
    assert!(stdout(&g).starts_with("digraph \"dataflow\" {"));
    let p = gammaflow(&["dot", &fixture("example2.gamma")]);
    assert_eq!(code(&p), 0);
    assert_eq!(stdout(&p).matches("digraph").count(), 9);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&gammaflow(&["bogus"])), 1);
    assert_eq!(code(&gammaflow(&["run"])), 1);
    assert_eq!(code(&gammaflow(&["check-equiv", "--seeds", "5..5", &fixture("example1.df")])), 1);
    assert_eq!(code(&gammaflow(&["run", "--set", "nope=1", &fixture("example1.df")])), 1);
    assert_eq!(code(&gammaflow(&["--help"])), 0);
}
