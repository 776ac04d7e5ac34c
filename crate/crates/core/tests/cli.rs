use std::path::Path;
use std::process::Command;

fn vfpg(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_vfpg")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const TINY: &str = "n_tau = 6\nhidden = 3\ncomponents = 2\nlatent_sample_count = 16\nbatch_size = 8\nmax_epochs = 3\n\
learning_rate = 0.01\nruns = 2\nestimate_samples = 32\nscan_points = 3\ndiagonal_min = -3\ndiagonal_max = 3\n\
diagonal_points = 5\ndiagnose_paths = 40\ndiagnose_snapshots = 3\ned_box = 10\ned_points = 999\ned_states = 12\n";

#[test]
fn every_subcommand_writes_a_complete_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "tiny.cfg", TINY);
    for (sub, artifact) in [
        ("train", "model.ckpt"),
        ("scan", "scan.csv"),
        ("ground-state", "density.csv"),
        ("diagnose", "scatter.csv"),
        ("oracle", "kernel.csv"),
    ] {
        let out = dir.path().join(sub);
        let o = vfpg(&[sub, "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "11"]);
        assert!(o.status.success(), "{sub}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join(artifact).exists(), "{sub} missing {artifact}");
        let manifest = std::fs::read_to_string(out.join("MANIFEST")).unwrap();
        assert!(manifest.starts_with("status complete\n"));
        let resolved = std::fs::read_to_string(out.join("resolved.cfg")).unwrap();
        assert!(resolved.contains("seed = 11\n"), "{resolved}");
        assert!(resolved.contains(&format!("kind = {sub}\n")));
    }
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "tiny.cfg", TINY);
    for out in ["a", "b"] {
        let p = dir.path().join(out);
        assert!(vfpg(&["train", "--config", &cfg, "--out", p.to_str().unwrap(), "--seed", "5"]).status.success());
    }
    let a = std::fs::read(dir.path().join("a/MANIFEST")).unwrap();
    let b = std::fs::read(dir.path().join("b/MANIFEST")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bad_configs_fail_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.cfg", "n_tau = 6\nomgea = 2\n");
    let o = vfpg(&["oracle", "--config", &bad, "--out", dir.path().join("o").to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("omgea"), "{err}");

    let wrong = write(dir.path(), "wrong.cfg", "kind = scan\n");
    let o = vfpg(&["train", "--config", &wrong, "--out", dir.path().join("w").to_str().unwrap()]);
    assert!(!o.status.success());

    let o = vfpg(&["train", "--config", dir.path().join("missing.cfg").to_str().unwrap(), "--out", "x"]);
    assert!(!o.status.success());
}
