use std::fs;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lowrank-lab"));
    c.env_remove("LOWRANK_LAB_OUT");
    c
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(bin().output().unwrap().status.code(), Some(1));
    assert_eq!(
        bin().arg("frobnicate").output().unwrap().status.code(),
        Some(1)
    );
    let dir = tempfile::tempdir().unwrap();
    // No seed anywhere.
    let out = bin()
        .args(["run", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["oracle", "nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_honours_env_dir_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, "seed = 3\nmax_epochs = 100\nn_test = 30\n").unwrap();
    let out_dir = dir.path().join("from-env");
    let out = bin()
        .env("LOWRANK_LAB_OUT", &out_dir)
        .args(["run", "--max-epochs", "4", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let metrics = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 5);
    let echoed = fs::read_to_string(out_dir.join("config.txt")).unwrap();
    assert!(echoed.contains("seed = 3") && echoed.contains("max_epochs = 4"));

    // --out wins over the environment.
    let flag_dir = dir.path().join("from-flag");
    let out = bin()
        .env("LOWRANK_LAB_OUT", &out_dir)
        .args(["run", "--seed", "1", "--max-epochs", "2", "--out"])
        .arg(&flag_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(flag_dir.join("metrics.csv").exists());
}

#[test]
fn divergence_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "run",
            "--seed",
            "1",
            "--dataset",
            "gaussian-regression",
            "--layers",
            "dense:1:linear",
            "--step-size",
            "50",
            "--max-epochs",
            "500",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(dir.path().join("metrics.csv").exists());
}

#[test]
fn gen_compare_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["gen", "--seed", "0", "--out"])
        .arg(dir.path().join("data"))
        .output()
        .unwrap();
    assert!(out.status.success());
    for split in ["train", "val", "test"] {
        assert!(dir
            .path()
            .join("data")
            .join(format!("{split}.csv"))
            .exists());
    }

    let out = bin()
        .args([
            "compare",
            "--variant",
            "none,dlr,alr/inv_t",
            "--seeds",
            "0,1",
            "--max-epochs",
            "10",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);

    let out = bin()
        .args(["oracle", "theorem3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("oracle-theorem3.json")).unwrap())
            .unwrap();
    assert_eq!(json["verdict"], "pass");
}
