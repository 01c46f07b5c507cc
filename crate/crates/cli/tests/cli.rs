use std::process::Command as Process;

use liouville_cli::report::{from_json, to_csv, to_json};
use liouville_cli::{parse_command, run_suite, Command, Format, Suite, EXIT_CHECK_FAILED, EXIT_IO, EXIT_OK, EXIT_USAGE};

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_liouville"))
}

fn report_for(argv: &[&str]) -> liouville_cli::VerificationReport {
    run_suite(&parse_command(argv).unwrap()).unwrap().0
}

#[test]
fn parses_documented_examples() {
    let c = parse_command(["constants", "--n", "2"]).unwrap();
    assert_eq!(c.command, Command::Constants);
    assert_eq!(c.n, 2);

    let c = parse_command(["verify", "pohozaev", "--n", "3", "--lambda", "1", "--R", "1"]).unwrap();
    assert_eq!(c.command, Command::Verify { suite: Suite::Pohozaev });
    assert_eq!((c.n, c.lambda, c.radius), (3, 1.0, 1.0));
    assert_eq!(c.format, Format::Json);

    assert!(parse_command(["verify", "bogus"]).is_err());
    assert!(parse_command(["constants", "--frobnicate"]).is_err());
}

#[test]
fn global_flags_before_and_after_the_subcommand() {
    let a = parse_command(["--n", "4", "--alpha", "-1.5", "shoot"]).unwrap();
    let b = parse_command(["shoot", "--n", "4", "--alpha", "-1.5"]).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.alpha, Some(-1.5));
}

#[test]
fn verify_all_passes_for_the_plane() {
    let r = report_for(&["verify", "all", "--n", "2", "--lambda", "1"]);
    assert_eq!(r.summary.failed, 0, "{:#?}", r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    assert_eq!(r.summary.total, r.checks.len());
    assert!(r.checks.len() >= 20);
}

#[test]
fn verify_all_passes_across_dimensions_and_scales() {
    for n in ["3", "4", "6"] {
        for lambda in ["0.5", "2"] {
            let r = report_for(&["verify", "all", "--n", n, "--lambda", lambda]);
            assert_eq!(r.summary.failed, 0, "n = {n}, λ = {lambda}");
        }
    }
}

#[test]
fn limit_mass_single_check() {
    let r = report_for(&["verify", "limit-mass", "--n", "2"]);
    assert_eq!(r.checks.len(), 1);
    let c = &r.checks[0];
    assert!(c.pass);
    assert!((c.lhs - 25.13274).abs() < 1e-5);
    assert_eq!(c.rhs, 8.0 * std::f64::consts::PI);
}

#[test]
fn shoot_matches_the_unit_family() {
    let r = report_for(&["shoot", "--n", "2", "--alpha", "2.079442", "--rmax", "50"]);
    let sup = r.checks.iter().find(|c| c.name == "integrate_radial.sup_error").unwrap();
    assert!(sup.pass && sup.tolerance == 1e-6 && sup.lhs < 1e-6);
    assert_eq!(r.summary.failed, 0);
}

#[test]
fn shot_subject_runs_every_suite() {
    let r = report_for(&["verify", "all", "--n", "3", "--alpha", "1", "--rmax", "1e6"]);
    assert_eq!(r.summary.failed, 0);
}

#[test]
fn short_profiles_fail_with_a_note() {
    let r = report_for(&["verify", "asymptotics", "--n", "4", "--alpha", "0", "--rmax", "100"]);
    assert!(r.summary.failed > 0);
    assert!(r.checks.iter().all(|c| c.note.as_deref().is_some_and(|n| n.contains("--rmax"))));
}

#[test]
fn sweep_is_ordered() {
    let r = report_for(&["sweep", "--n", "2", "--alpha-min", "-1", "--alpha-max", "3", "--count", "3"]);
    let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names[0], "integrate_radial.sup_error[0]");
    assert_eq!(names[3], "integrate_radial.sup_error[1]");
    assert_eq!(names.len(), 9);
    assert_eq!(r.summary.failed, 0);
}

#[test]
fn json_round_trip() {
    for argv in [&["verify", "all"][..], &["exact", "--n", "5"], &["shoot", "--alpha", "0.5", "--rmax", "20"]] {
        let r = report_for(argv);
        let back = from_json(&to_json(&r)).unwrap();
        assert_eq!(back, r);
    }
}

#[test]
fn failed_computations_serialize_as_null() {
    // A profile too short for the default level grid still produces a report.
    let r = report_for(&["verify", "levelsets", "--alpha", "0", "--rmax", "1e-3"]);
    assert!(r.summary.failed > 0);
    let json = String::from_utf8(to_json(&r)).unwrap();
    assert!(json.contains("null"));
    let back = from_json(json.as_bytes()).unwrap();
    assert!(back.checks.iter().zip(&r.checks).all(|(a, b)| a.name == b.name && a.pass == b.pass));
}

#[test]
fn csv_header_once_and_one_row_per_check() {
    let r = report_for(&["verify", "all", "--n", "3"]);
    let text = String::from_utf8(to_csv(&r)).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "name,lhs,rhs,residual,tolerance,pass");
    assert_eq!(lines.iter().filter(|l| l.starts_with("name,")).count(), 1);
    assert_eq!(lines.len() - 1, r.checks.len());
}

#[test]
fn numbers_carry_seventeen_digits() {
    let json = String::from_utf8(to_json(&report_for(&["constants"]))).unwrap();
    assert!(json.contains("2.5132741228718345e1"));
    let keys: Vec<usize> = ["schema_version", "command", "\"n\"", "inputs", "checks", "summary", "timing_ms"]
        .iter()
        .map(|k| json.find(k).unwrap())
        .collect();
    assert!(keys.windows(2).all(|p| p[0] < p[1]));
}

#[test]
fn exit_codes() {
    let status = |args: &[&str]| bin().args(args).output().unwrap().status.code().unwrap();
    assert_eq!(status(&["constants"]), EXIT_OK);
    assert_eq!(status(&["--help"]), EXIT_OK);
    assert_eq!(status(&["verify", "bogus"]), EXIT_USAGE);
    assert_eq!(status(&["constants", "--n", "1"]), EXIT_USAGE);
    assert_eq!(status(&["constants", "--lambda", "-1"]), EXIT_USAGE);
    assert_eq!(status(&["verify", "asymptotics", "--n", "4", "--alpha", "0", "--rmax", "100"]), EXIT_CHECK_FAILED);
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no/such/dir/report.json");
    assert_eq!(status(&["constants", "--out", missing.to_str().unwrap()]), EXIT_IO);
}

#[test]
fn byte_identical_runs_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (k, threads) in ["1", "4", "4"].iter().enumerate() {
        let path = dir.path().join(format!("r{k}.json"));
        let st = bin()
            .args(["verify", "all", "--n", "3", "--out", path.to_str().unwrap()])
            .env("RAYON_NUM_THREADS", threads)
            .status()
            .unwrap();
        assert!(st.success());
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn dumps_have_their_headers() {
    let dir = tempfile::tempdir().unwrap();
    let profile = dir.path().join("profile.csv");
    let levels = dir.path().join("levels.csv");
    assert!(bin()
        .args(["shoot", "--alpha", "1", "--rmax", "100", "--profile-out", profile.to_str().unwrap()])
        .output()
        .unwrap()
        .status
        .success());
    assert!(bin()
        .args(["verify", "levelsets", "--levels-out", levels.to_str().unwrap()])
        .output()
        .unwrap()
        .status
        .success());
    let p = std::fs::read_to_string(profile).unwrap();
    assert!(p.starts_with("r,U,dU_dr,flux,mass_in_ball\n"));
    assert!(p.lines().count() > 10);
    let l = std::fs::read_to_string(levels).unwrap();
    assert!(l.starts_with("t,R,volume,mass,perimeter_grad,coarea,D1,D2,D3,D4\n"));
    assert_eq!(l.lines().count(), 51);
}

#[test]
fn timing_is_zero_unless_requested() {
    let out = bin().args(["verify", "all"]).output().unwrap();
    let r = from_json(&out.stdout).unwrap();
    assert_eq!(r.timing_ms, 0);
    assert_eq!(r.command, "verify all");
    assert_eq!(r.schema_version, "1");
}

#[test]
fn csv_format_flag() {
    let out = bin().args(["constants", "--format", "csv"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("name,lhs,rhs,residual,tolerance,pass\n"));
}
