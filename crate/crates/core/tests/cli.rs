use std::process::Command;

use jc_magnus::cli::{
    cmd_report, cmd_sweep, cmd_verify, compute_row, csv_document, parse_config_text, parse_grid,
    sweep_rows, RunConfig, Status, CSV_HEADER,
};
use jc_magnus::Error;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jc-magnus"))
}

fn field_of(err: Error) -> String {
    match err {
        Error::Config { field, .. } => field,
        other => panic!("expected a config error, got {other}"),
    }
}

#[test]
fn grid_syntax() {
    assert_eq!(
        parse_grid("g", "0.01, 0.02,0.04").unwrap(),
        vec![0.01, 0.02, 0.04]
    );
    assert_eq!(
        parse_grid("t", "0:1:5").unwrap(),
        vec![0.0, 0.25, 0.5, 0.75, 1.0]
    );
    assert_eq!(parse_grid("t", "2:9:1").unwrap(), vec![2.0]);
    assert_eq!(field_of(parse_grid("t_grid", "0:1").unwrap_err()), "t_grid");
    assert_eq!(
        field_of(parse_grid("g_grid", "0.1,x").unwrap_err()),
        "g_grid"
    );
}

#[test]
fn config_file_and_override_precedence() {
    let text =
        "# sweep\nomega = 1.0\nomega0-grid = 0.5,0.8 # two points\ng = 0.02\nfock_dim = 10\n";
    let mut pairs = parse_config_text(text).unwrap();
    pairs.push(("g".into(), "0.03".into()));
    let cfg = RunConfig::from_pairs(pairs).unwrap();
    assert_eq!(cfg.omega0, vec![0.5, 0.8]);
    assert_eq!(cfg.g, vec![0.03]);
    assert_eq!(cfg.fock_dim, 10);
    assert_eq!(cfg.t, vec![1.0]);
    assert_eq!(cfg.points().len(), 2);
}

#[test]
fn validation_names_the_field() {
    let cases = [
        ("fock_dim", "3"),
        ("omega", "0"),
        ("omega0", "-1"),
        ("g", "-0.1"),
        ("t", "inf"),
        ("buffer", "11"),
        ("step_tol", "0"),
        ("quad_steps", "10"),
        ("bogus", "1"),
    ];
    for (key, value) in cases {
        let err = RunConfig::from_pairs([(key, value)]).unwrap_err();
        assert_eq!(field_of(err), key);
    }
    assert!(parse_config_text("omega 1").is_err());
}

#[test]
fn sweep_rows_follow_grid_order_and_match_single_points() {
    let cfg = RunConfig {
        omega0: vec![0.8, 1.2],
        g: vec![0.01, 0.05],
        t: vec![0.5, 1.0],
        ..RunConfig::default()
    };
    let rows = sweep_rows(&cfg).unwrap();
    assert_eq!(rows.len(), 8);
    for (row, (w0, g, t)) in rows.iter().zip(cfg.points()) {
        assert_eq!((row.omega0, row.g, row.t), (w0, g, t));
        assert_eq!(*row, compute_row(&cfg, w0, g, t).unwrap());
    }
    assert_eq!((rows[1].omega0, rows[1].g, rows[1].t), (0.8, 0.01, 1.0));
    assert_eq!((rows[2].omega0, rows[2].g, rows[2].t), (0.8, 0.05, 0.5));
}

#[test]
fn csv_schema() {
    let rows = sweep_rows(&RunConfig::default()).unwrap();
    let csv = csv_document(&rows);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    let row = lines.next().unwrap();
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells.len(), CSV_HEADER.len());
    assert_eq!(cells[0], "1.0000000000000000e0");
    for cell in cells.iter().filter(|c| c.contains('e')) {
        let mantissa = cell.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 17, "{cell}");
        let parsed: f64 = cell.parse().unwrap();
        assert_eq!(format!("{parsed:.16e}"), *cell);
    }
}

#[test]
fn coupling_grid_error_ratios() {
    let cfg = RunConfig {
        g: vec![0.01, 0.02, 0.04],
        ..RunConfig::default()
    };
    let rows = sweep_rows(&cfg).unwrap();
    for pair in rows.windows(2) {
        let r1 = pair[1].err_magnus1 / pair[0].err_magnus1;
        let r2 = pair[1].err_magnus2 / pair[0].err_magnus2;
        assert!((3.5..4.5).contains(&r1), "{r1}");
        assert!((7.0..9.0).contains(&r2), "{r2}");
    }
}

#[test]
fn zeta_continuous_through_resonance() {
    let cfg = RunConfig {
        omega0: parse_grid("omega0", "0.9:1.1:21").unwrap(),
        fock_dim: 6,
        ..RunConfig::default()
    };
    let rows = sweep_rows(&cfg).unwrap();
    let jumps: Vec<f64> = rows
        .windows(2)
        .map(|w| (w[1].zeta_re - w[0].zeta_re).hypot(w[1].zeta_im - w[0].zeta_im))
        .collect();
    assert!(rows
        .iter()
        .all(|r| r.zeta_re.is_finite() && r.zeta_im.is_finite()));
    for k in 1..jumps.len() - 1 {
        assert!(jumps[k] <= 10.0 * jumps[k - 1].max(jumps[k + 1]), "{k}");
    }
}

#[test]
fn report_lists_each_row_field_once() {
    let text = cmd_report(&RunConfig::default()).unwrap();
    for field in CSV_HEADER {
        let hits = text
            .lines()
            .filter(|l| l.starts_with(&format!("{field} = ")))
            .count();
        assert_eq!(hits, 1, "{field}");
    }
    assert!(text.contains("closed form"));
    let row = &sweep_rows(&RunConfig::default()).unwrap()[0];
    for (name, value) in row.fields() {
        assert!(text.contains(&format!("{name} = {value}\n")));
    }
}

#[test]
fn report_at_resonance_and_without_coupling() {
    let cfg = RunConfig::from_pairs([("omega0", "1.0")]).unwrap();
    assert!(cmd_report(&cfg).unwrap().contains("resonance branch"));

    let cfg = RunConfig::from_pairs([("g", "0")]).unwrap();
    let row = &sweep_rows(&cfg).unwrap()[0];
    assert_eq!(
        (row.err_rwa, row.err_magnus1, row.err_magnus2, row.r_pred),
        (0.0, 0.0, 0.0, 0.0)
    );
    assert!(cmd_report(&RunConfig::from_pairs([("g_grid", "0.1,0.2")]).unwrap()).is_err());
}

#[test]
fn bloch_siegert_column_empty_outside_regime() {
    let cfg = RunConfig::from_pairs([("g", "1.0"), ("t", "2.0")]).unwrap();
    let row = &sweep_rows(&cfg).unwrap()[0];
    assert!(row.bs_measured.is_none());
    assert!(row.csv_line().contains(",,"));
}

#[test]
fn verify_default_passes_and_large_coupling_skips() {
    let checks = cmd_verify(&RunConfig::default()).unwrap();
    assert!(checks.len() >= 12);
    assert!(
        checks.iter().all(|c| c.status == Status::Pass),
        "{checks:?}"
    );

    let cfg = RunConfig::from_pairs([("g", "5")]).unwrap();
    let checks = cmd_verify(&cfg).unwrap();
    let skipped: Vec<_> = checks.iter().filter(|c| c.status == Status::Skip).collect();
    assert!(skipped.iter().any(|c| c.name == "ERROR_SCALING"));
    assert!(skipped
        .iter()
        .all(|c| c.note.as_deref().unwrap().contains("margin")));
    assert!(checks.iter().all(|c| c.status != Status::Fail));
}

#[test]
fn sweep_is_deterministic_and_writes_file() {
    let dir = std::env::temp_dir().join(format!("jc-magnus-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sweep.csv");
    let cfg = RunConfig {
        t: vec![0.5, 1.0, 1.5],
        output_path: Some(path.clone()),
        ..RunConfig::default()
    };
    let first = cmd_sweep(&cfg).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), first);
    assert_eq!(cmd_sweep(&cfg).unwrap(), first);

    let bad = RunConfig {
        output_path: Some(dir.join("missing").join("x.csv")),
        ..RunConfig::default()
    };
    assert!(matches!(cmd_sweep(&bad), Err(Error::Io(_))));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn binary_end_to_end() {
    let out = bin().arg("verify").output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for line in stdout.lines() {
        let parts: Vec<&str> = line.split(' ').collect();
        assert_eq!(parts.len(), 3, "{line}");
        assert!(["PASS", "FAIL", "SKIP"].contains(&parts[1]));
        parts[2].parse::<f64>().unwrap();
    }

    let out = bin().args(["verify", "--fock-dim", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("fock_dim"));
    assert!(out.stdout.is_empty());

    let a = bin()
        .args(["sweep", "--g-grid", "0.01,0.02"])
        .output()
        .unwrap();
    let b = bin()
        .args(["sweep", "--g-grid", "0.01,0.02"])
        .output()
        .unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap().lines().count(), 3);
}
