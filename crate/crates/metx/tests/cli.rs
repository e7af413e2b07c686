//! The `metx` binary: outputs and exit codes.

use std::io::Write;
use std::process::{Command, Output};

fn metx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metx"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("metx runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_sum_prints_79() {
    for f in ["examples/sum.mex", "examples/sum.fe", "examples/sum.sc"] {
        let o = metx(&["run", f]);
        assert_eq!(o.status.code(), Some(0), "{f}: {}", stderr(&o));
        assert_eq!(stdout(&o).lines().next(), Some("79"), "{f}");
    }
    assert_eq!(stdout(&metx(&["run", "examples/sum.mex"])), "79\n");
    assert_eq!(stdout(&metx(&["run", "examples/sum.sc"])), "79\nomega: %0\n");
}

#[test]
fn unsafe_program_is_a_locked_variable() {
    let o = metx(&["check", "examples/unsafe.mex"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error[LockedVar]: variable `f` is locked"), "{}", stderr(&o));
}

#[test]
fn translate_gen() {
    let o = metx(&["translate", "examples/gen.fe"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "mod<[yield]> (fun (x: Int) -> do yield x)\n");
}

/// The `.mex` rendering of any translation checks again.
#[test]
fn translations_pipe_into_check() {
    for f in ["examples/gen.fe", "examples/sum.fe", "examples/app.fe", "examples/sum.sc", "examples/app_call.sc"] {
        let t = metx(&["translate", "--format", "mex", f]);
        assert_eq!(t.status.code(), Some(0), "{f}: {}", stderr(&t));
        let dir = std::env::temp_dir().join(format!("metx-pipe-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("{}.mex", f.replace(['/', '.'], "_")));
        std::fs::File::create(&path).unwrap().write_all(&t.stdout).unwrap();
        let c = metx(&["check", path.to_str().unwrap()]);
        assert_eq!(c.status.code(), Some(0), "{f}: {}\n{}", stdout(&t), stderr(&c));
    }
}

#[test]
fn exit_codes() {
    let dir = std::env::temp_dir().join(format!("metx-codes-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.mex");
    std::fs::write(&bad, "fun (x: Int) ->").unwrap();
    assert_eq!(metx(&["check", bad.to_str().unwrap()]).status.code(), Some(2));
    let spin = dir.join("spin.fe");
    std::fs::write(
        &spin,
        "effect ask : 1 =>> Int\nhandle<> (do ask () + do ask () + do ask ()) with { ask p r -> r 1 }",
    )
    .unwrap();
    assert_eq!(metx(&["run", "--fuel", "3", spin.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(metx(&["run", "examples/gen.sc"]).status.code(), Some(3));
    assert_eq!(metx(&["check", "--theory", "sets", "examples/gen.fe"]).status.code(), Some(2));
    assert_eq!(metx(&["check", "--effects", "yield", "examples/gen.sc"]).status.code(), Some(2));
    assert_eq!(metx(&["check", "examples/missing.mex"]).status.code(), Some(2));
}

#[test]
fn overrides_apply_to_core_programs() {
    let o = metx(&["check", "--effects", "yield, ask", "examples/gen.mex"]);
    assert_eq!(stdout(&o), "Int -> 1 @ yield,ask\n");
    let o = metx(&["check", "--effects", ".", "examples/gen.mex"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("EffectNotAvailable"));
}

#[test]
fn suspended_runs_report_the_operation() {
    let o = metx(&["run", "examples/app.mex"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "suspended: do yield 42\n");
}

#[test]
fn trace_lists_states() {
    let o = metx(&["trace", "examples/sum.mex"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("0: handle"), "{out}");
    assert!(out.trim_end().ends_with("79"), "{out}");
}

#[test]
fn diff_matches_and_emits_json() {
    let o = metx(&["diff", "examples/sum.sc"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("sum: match"));
    let o = metx(&["diff", "--format", "json", "examples/sum.fe"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["verdict"], "match");
}

#[test]
fn corpus_passes() {
    let o = metx(&["corpus"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains(", 0 failed"));
}

#[test]
fn json_check() {
    let o = metx(&["check", "--format", "json", "examples/unsafe.mex"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["error"], "LockedVar");
}
