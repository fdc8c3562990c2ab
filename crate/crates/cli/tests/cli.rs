use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_navier-pc"))
}

const SMALL: [&str; 6] = ["--dim", "2", "--s", "0", "--T", "0.0625"];

#[test]
fn run_writes_csv_and_logs_when_verbose() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("run")
        .args(SMALL)
        .args(["--scheme", "explicit-star", "--verbose", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().filter(|l| l.starts_with("scheme=explicit-star step=")).count(), 8);
    assert!(stderr.contains("theta_visc=") && stderr.contains("cfl_adv="));
    let steps = std::fs::read_to_string(dir.path().join("steps_explicit-star_d2_s0_l0_temporal.csv")).unwrap();
    assert!(steps.starts_with(
        "step,t,err_l2_pred,err_h1_pred,err_l2_end,err_l2_pres,theta_visc,theta_conv,cfl_adv,mom_iters,poisson_iters\n"
    ));
    assert!(dir.path().join("summary_explicit-star_d2_s0_l0_temporal.csv").exists());
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("case.cfg");
    std::fs::write(&cfg, "# small 2D case\nscheme = implicit\ndim = 2\ns = 0\nT = 0.03125\n").unwrap();
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .args(["--scheme", "explicit", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    // the flag wins over the file
    assert!(dir.path().join("summary_explicit_d2_s0_l0_temporal.csv").exists());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("steps=4/4"));
}

#[test]
fn sweep_prints_rate_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("sweep")
        .args(SMALL)
        .args(["--scheme", "implicit", "--l", "0..1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("rates_temporal.csv").exists());
    assert!(dir.path().join("plot_temporal.gp").exists());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("implicit")).count(), 2);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "viscosity = 1\n").unwrap();
    for args in [
        vec!["run", "--l=-1"],
        vec!["run", "--T", "0.3"],
        vec!["run", "--config", cfg.to_str().unwrap()],
        vec!["sweep", "--l", "3..1"],
        vec!["run", "--s", "4"],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
    let out = bin().args(["run", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).contains("viscosity"));
}

#[test]
fn unknown_subcommand_is_rejected() {
    let out = bin().arg("plot").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
