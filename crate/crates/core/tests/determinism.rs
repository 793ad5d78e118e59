use zxtoric::ensemble::{run_sweep, RunConfig};

fn config() -> RunConfig {
    RunConfig::from_toml_str(
        r#"
        sizes = [[6, 6], [8, 6]]
        r_grid = [0.2, 0.5, 0.8]
        samples = 24
        [observables]
        symmetry = true
        "#,
    )
    .unwrap()
}

fn bytes(threads: usize, seed: u64) -> Vec<u8> {
    let mut cfg = config();
    cfg.threads = Some(threads);
    let mut out = Vec::new();
    run_sweep(&cfg, seed, Some(&mut out)).unwrap();
    out
}

#[test]
fn trajectory_file_is_identical_across_thread_counts() {
    let one = bytes(1, 42);
    assert_eq!(one, bytes(4, 42));
    assert_eq!(one, bytes(16, 42));
    assert_ne!(one, bytes(1, 43));
}
