use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udw-witness"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn witness_csv_layout() {
    let o = run(&[
        "witness",
        "--traj",
        "inertial:0.6",
        "--tau-max",
        "10",
        "--samples",
        "11",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("tau,re_chi,im_chi,re_w,im_w,abs_w,violates")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0], ["0", "0", "0", "1", "0", "1", "false"]);
    assert_eq!(rows[10][0], "10");
    for r in &rows {
        assert_eq!(r.len(), 7);
        for field in &r[..6] {
            let digits = field
                .trim_start_matches('-')
                .split('e')
                .next()
                .unwrap()
                .replace('.', "");
            assert!(digits.trim_start_matches('0').len() <= 12, "{field}");
            field.parse::<f64>().unwrap();
        }
        let violated = r[5].parse::<f64>().unwrap() > 1.0 + 1e-9;
        assert_eq!(r[6], if violated { "true" } else { "false" });
    }
}

#[test]
fn coherent_run_never_violates() {
    let o = run(&[
        "witness",
        "--state",
        "coherent:0.7,-0.4",
        "--traj",
        "accel:1.2",
        "--tau-max",
        "30",
        "--samples",
        "60",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for line in stdout(&o).lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert!((f[5].parse::<f64>().unwrap() - 1.0).abs() < 1e-11, "{line}");
        assert_eq!(f[6], "false");
    }
}

#[test]
fn omega_override_reproduces_intro_model() {
    let omega = (4.0 / std::f64::consts::PI.sqrt()).to_string();
    let o = run(&[
        "witness",
        "--k0",
        "1",
        "--L",
        "2",
        "--x0",
        "1",
        "--lambda",
        "1.7",
        "--omega-override",
        &omega,
        "--tau-max",
        "2.7841639984",
        "--samples",
        "3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mid: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    // half a period: |W| = 2.89π − 1
    let w: f64 = mid[5].parse().unwrap();
    assert!(
        (w - (2.89 * std::f64::consts::PI - 1.0)).abs() < 1e-9,
        "{w}"
    );
    assert_eq!(mid[6], "true");
}

#[test]
fn omega_override_requires_static_detector() {
    let o = run(&[
        "witness",
        "--omega-override",
        "2",
        "--traj",
        "inertial:0.5",
        "--samples",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("omega_override"));
}

#[test]
fn invalid_parameters_exit_2() {
    for args in [
        &["witness", "--samples", "0"][..],
        &["witness", "--traj", "inertial:1.2"],
        &["witness", "--L", "-3"],
        &["witness", "--state", "cat:-1"],
        &["witness", "--state", "banana"],
        &["witness", "--tol", "0"],
        &["scan-velocity", "--from", "0.5", "--to", "1.5"],
        &["scan-acceleration", "--from", "0", "--to", "1"],
        &[
            "scan-alpha",
            "--traj",
            "static",
            "--from",
            "0.1",
            "--to",
            "1",
        ],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    let o = run(&["witness", "--samples", "0"]);
    assert!(stderr(&o).contains("samples"));
}

#[test]
fn quadrature_failure_exits_3_naming_sample() {
    let o = run(&[
        "witness",
        "--traj",
        "accel:0.8",
        "--tau-max",
        "5",
        "--samples",
        "3",
        "--tol",
        "1e-300",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("tau=") && err.contains("quadrature"), "{err}");
}

#[test]
fn force_quadrature_matches_closed_form() {
    let args = [
        "witness",
        "--traj",
        "inertial:0.6",
        "--tau-max",
        "40",
        "--samples",
        "9",
    ];
    let a = stdout(&run(&args));
    let mut forced = args.to_vec();
    forced.push("--force-quadrature");
    let b = stdout(&run(&forced));
    for (x, y) in a.lines().skip(1).zip(b.lines().skip(1)) {
        let xs: Vec<f64> = x.split(',').take(6).map(|s| s.parse().unwrap()).collect();
        let ys: Vec<f64> = y.split(',').take(6).map(|s| s.parse().unwrap()).collect();
        for (p, q) in xs.iter().zip(&ys) {
            assert!((p - q).abs() < 1e-8, "{x} vs {y}");
        }
    }
}

#[test]
fn zero_coupling_acceleration_scan_is_one() {
    let o = run(&[
        "scan-acceleration",
        "--lambda",
        "0",
        "--from",
        "0.5",
        "--to",
        "5",
        "--steps",
        "10",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,asymptote_abs_w"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.ends_with(",1")));
}

#[test]
fn scan_point_failures_become_nan() {
    // a = 0.001 has not reached the wall by T = 500
    let o = run(&[
        "scan-acceleration",
        "--from",
        "0.001",
        "--to",
        "1",
        "--steps",
        "2",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().ends_with(",nan"));
    assert!(!text.lines().nth(2).unwrap().ends_with(",nan"));
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn alpha_scan_violates_only_at_small_amplitude() {
    let o = run(&[
        "scan-alpha",
        "--traj",
        "accel:0.8",
        "--eval-at",
        "100",
        "--from",
        "0.05",
        "--to",
        "6",
        "--steps",
        "120",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<(f64, f64)> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert!(rows.iter().any(|(_, w)| *w > 1.0));
    let tail: Vec<f64> = rows
        .iter()
        .filter(|(a, _)| *a > 4.0)
        .map(|(_, w)| *w)
        .collect();
    assert!(tail.iter().all(|w| *w <= 1.0), "{tail:?}");
}

#[test]
fn oracle_subcommand_paths() {
    let o = run(&["oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(
        stdout(&o).lines().filter(|l| l.starts_with("ok")).count(),
        9
    );

    let o = run(&["oracle", "--cutoff", "4", "--no-trotter"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("truncation too small"));
    assert!(stderr(&o).contains("end-to-end"));

    let o = run(&["oracle", "--state", "coherent:0,0", "--no-trotter"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let o = run(&[
        "witness",
        "--samples",
        "5",
        "--tau-max",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 6);
}
