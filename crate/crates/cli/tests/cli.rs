use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn zxtoric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zxtoric"))
        .args(args)
        .env_remove("ZXTORIC_SEED")
        .env_remove("ZXTORIC_THREADS")
        .env_remove("ZXTORIC_OUT")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_lists_global_flags_and_subcommands() {
    let out = zxtoric(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for word in [
        "--config",
        "--seed",
        "--out",
        "--threads",
        "sweep",
        "negativity",
        "collapse",
        "validate",
        "oracle-check",
        "emit-plot",
    ] {
        assert!(text.contains(word), "missing {word}");
    }
}

#[test]
fn validate_passes_and_identity_shift_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = zxtoric(&["validate", "--out", path(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("validate.json").exists());

    let out = zxtoric(&["validate", "--shift", "identity", "--out", path(dir.path())]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("table1.channel.strong"));
}

#[test]
fn usage_and_io_errors() {
    assert_eq!(code(&zxtoric(&["sweep", "--bogus"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere");
    let out = zxtoric(&["emit-plot", "--figure", "fig4b", "--run", path(&missing)]);
    assert_eq!(code(&out), 3);

    let out = zxtoric(&["sweep", "--config", path(&missing)]);
    assert_eq!(code(&out), 3);
}

#[test]
fn sweep_then_emit_plot() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.toml");
    fs::write(
        &config,
        "name = \"tiny\"\nsizes = [[6, 6], [8, 8]]\nr_grid = [0.4, 0.5, 0.6]\nsamples = 20\nseed = 3\n\n\
         [observables]\nnegativity = true\nsymmetry = true\n",
    )
    .unwrap();
    let run = dir.path().join("run");
    let out = zxtoric(&["sweep", "--config", path(&config), "--out", path(&run)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["config.toml", "trajectories.jsonl", "summary.csv"] {
        assert!(run.join(file).exists(), "missing {file}");
    }

    let out = zxtoric(&["emit-plot", "--figure", "all", "--run", path(&run)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let fig4b = fs::read_to_string(run.join("plots/fig4b.csv")).unwrap();
    assert_eq!(fig4b.lines().next().unwrap(), "r,F,stderr,Lx,Ly");
    assert_eq!(fig4b.lines().count(), 1 + 2 * 3);

    let out = zxtoric(&["emit-plot", "--figure", "fig9", "--run", path(&run)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn sweep_output_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.toml");
    fs::write(
        &config,
        "name = \"tiny\"\nsizes = [[6, 6]]\nr_grid = [0.5]\nsamples = 16\nseed = 9\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let run = dir.path().join(format!("t{threads}"));
        let out = zxtoric(&[
            "sweep",
            "--config",
            path(&config),
            "--threads",
            threads,
            "--out",
            path(&run),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(fs::read(run.join("trajectories.jsonl")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
