mod common;

use common::{cli, fcc_band_edge_constant, json_lines};
use greenfcc::oracle_quadrature::{green_by_quadrature, QuadratureSpec};
use greenfcc::GreenParams;

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn eval_converges_and_matches_quadrature() {
    let out = cli(&[
        "eval", "--t", "4", "--gamma", "1", "--lmn", "0", "0", "0", "--method", "series5", "--tol",
        "1e-10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json_lines(&out);
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!(r["converged"], true);
    assert_eq!(r["method"], "series5");
    assert_eq!(r["accel"], "none");
    assert!(r["wall_time_ms"].as_f64().unwrap() >= 0.0);
    let p = GreenParams::isotropic(4.0, 0, 0, 0).unwrap();
    let q = green_by_quadrature(&p, &QuadratureSpec::default())
        .unwrap()
        .value;
    assert!((r["value"].as_f64().unwrap() - q).abs() < 1e-9);
}

#[test]
fn odd_site_sum_is_rejected() {
    let out = cli(&["eval", "--t", "4", "--lmn", "1", "1", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("l+m+n must be even"));
    assert!(out.stdout.is_empty());
}

#[test]
fn inside_the_band_is_a_domain_error() {
    for method in ["series5", "series6", "quadrature"] {
        let out = cli(&[
            "eval", "--t", "2.5", "--gamma", "1", "--lmn", "0", "0", "0", "--method", method,
        ]);
        assert_eq!(out.status.code(), Some(1), "{method}");
        assert!(
            stderr(&out).contains("2 + gamma"),
            "{method}: {}",
            stderr(&out)
        );
    }
}

#[test]
fn unconverged_sum_exits_two() {
    let out = cli(&["eval", "--t", "3", "--n-max", "50", "--no-timing"]);
    assert_eq!(out.status.code(), Some(2));
    let rows = json_lines(&out);
    assert_eq!(rows[0]["converged"], false);
    assert_eq!(rows[0]["terms_used"], 50);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["eval", "--t"][..],
        &["eval", "--t", "four"],
        &["eval", "--t", "4", "--method", "simpson"],
        &["eval", "--t", "4", "--accel", "levin"],
        &["eval", "--t", "4", "--format", "xml"],
        &["eval", "--t", "4", "--n-max", "5000"],
        &["eval", "--t", "4", "--method", "series5,series6"],
        &["eval"],
        &["frobnicate"],
        &[],
    ] {
        let out = cli(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!stderr(&out).is_empty(), "{args:?}");
    }
    let out = cli(&["eval", "--t", "four"]);
    assert!(
        stderr(&out).contains("Usage: greenfcc eval"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn help_and_version_exit_zero() {
    for args in [&["--help"][..], &["--version"], &["sweep", "--help"]] {
        let out = cli(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn sweep_has_fourteen_decreasing_rows() {
    let out = cli(&[
        "sweep",
        "--t-range",
        "3.5",
        "10",
        "0.5",
        "--lmn",
        "0",
        "0",
        "0",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,gamma,l,m,n,method,value,error,terms,converged,note"
    );
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 14);
    let ts: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ts.first(), Some(&3.5));
    assert_eq!(ts.last(), Some(&10.0));
    let values: Vec<f64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
    for w in values.windows(2) {
        assert!(w[1] < w[0]);
    }
    for (t, v) in ts.iter().zip(&values) {
        let p = GreenParams::isotropic(*t, 0, 0, 0).unwrap();
        let q = green_by_quadrature(&p, &QuadratureSpec::default())
            .unwrap()
            .value;
        assert!((v - q).abs() < 1e-9, "t={t}");
    }
}

#[test]
fn sweep_pairs_columns_for_two_methods() {
    let out = cli(&[
        "sweep",
        "--t-range",
        "4",
        "5",
        "0.5",
        "--method",
        "series5,series6",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json_lines(&out);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        let a = r["series5_value"].as_f64().unwrap();
        let b = r["series6_value"].as_f64().unwrap();
        assert!((a - b).abs() < 1e-9);
        assert_eq!(r["series5_converged"], true);
        assert_eq!(r["series6_converged"], true);
        assert!(r.get("method").is_none());
    }
}

#[test]
fn sweep_records_domain_errors_in_row() {
    let out = cli(&["sweep", "--t-range", "2.5", "3.5", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let rows = json_lines(&out);
    assert_eq!(rows.len(), 3);
    assert!(rows[0]["value"].is_null());
    assert!(rows[0]["note"].as_str().unwrap().contains("2 + gamma"));
    assert_eq!(rows[2]["converged"], true);
}

#[test]
fn empty_or_invalid_ranges_exit_one() {
    for range in [
        ["4", "3", "0.5"],
        ["3", "4", "0"],
        ["3", "4", "-1"],
        ["3", "inf", "1"],
    ] {
        let out = cli(&["sweep", "--t-range", range[0], range[1], range[2]]);
        assert_eq!(out.status.code(), Some(1), "{range:?}");
    }
}

#[test]
fn sweep_over_gamma() {
    let out = cli(&[
        "sweep",
        "--t",
        "5",
        "--gamma-range",
        "0.5",
        "2",
        "0.5",
        "--lmn",
        "2",
        "0",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json_lines(&out);
    let gammas: Vec<f64> = rows.iter().map(|r| r["gamma"].as_f64().unwrap()).collect();
    assert_eq!(gammas, [0.5, 1.0, 1.5, 2.0]);
}

#[test]
fn convergence_table_shape_and_ratio() {
    let out = cli(&[
        "convergence",
        "--t",
        "5",
        "--lmn",
        "0",
        "0",
        "0",
        "--terms",
        "30",
        "--tol",
        "1e-9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json_lines(&out);
    assert_eq!(rows.len(), 30);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r["i"], i);
        assert!(r["accelerated_estimate_i"].is_null());
    }
    let terms: Vec<f64> = rows.iter().map(|r| r["term_i"].as_f64().unwrap()).collect();
    let ratios: Vec<f64> = (10..30).map(|i| terms[i] / terms[i - 1]).collect();
    // increasing toward 3/5 from below
    for w in ratios.windows(2) {
        assert!(w[1] > w[0] && w[1] < 0.6);
    }
    assert!((ratios.last().unwrap() - 0.6).abs() < 0.05);
}

#[test]
fn convergence_at_large_t_is_done_after_one_term() {
    let out = cli(&["convergence", "--t", "1e6", "--terms", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json_lines(&out);
    let first = rows[0]["partial_sum_i"].as_f64().unwrap();
    assert_eq!(first, 1e-6);
    assert!(rows[0]["tail_bound_i"].as_f64().unwrap() < 1e-10);
}

#[test]
fn convergence_at_the_band_edge_with_wynn() {
    let out = cli(&[
        "convergence",
        "--t",
        "3",
        "--terms",
        "400",
        "--accel",
        "wynn",
    ]);
    let rows = json_lines(&out);
    assert_eq!(rows.len(), 400);
    let w = fcc_band_edge_constant();
    let last = &rows[399];
    let raw = last["partial_sum_i"].as_f64().unwrap();
    let acc = last["accelerated_estimate_i"].as_f64().unwrap();
    assert!(last["tail_bound_i"].is_null());
    assert!(
        last["term_i"].as_f64().unwrap() > 1e-6,
        "raw column still moving"
    );
    assert!((acc - w).abs() < 1e-8);
    assert!((acc - w).abs() < (raw - w).abs() / 1e4);
}

#[test]
fn convergence_rejects_quadrature() {
    let out = cli(&["convergence", "--t", "4", "--method", "quadrature"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn compare_reports_every_method() {
    let out = cli(&["compare", "--t", "4", "--lmn", "2", "1", "1", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json_lines(&out);
    let methods: Vec<&str> = rows.iter().map(|r| r["method"].as_str().unwrap()).collect();
    assert_eq!(methods, ["series5", "series6", "quadrature"]);
    for r in &rows {
        assert!(r["diff_from_first"].as_f64().unwrap().abs() < 1e-9);
        assert!(r["wall_time_ms"].is_null());
    }
}

#[test]
fn out_file_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let dest = dir.path().join("result.csv");
    std::fs::write(
        &cfg,
        format!(
            "# sweep settings\nt-range = 3.5 4.5 0.5\nlmn = 2 0 0\nmethod = series6\nformat = csv\nout = {}\n",
            dest.display()
        ),
    )
    .unwrap();
    let out = cli(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&dest).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("3.5,1.0,2,0,0,series6,"));

    // flags override the file
    let out = cli(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        dest.to_str().unwrap(),
        "--t-range",
        "5",
        "5",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&dest).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("{\"t\":5.0,"));

    std::fs::write(&cfg, "seed = 1\n").unwrap();
    let out = cli(&["eval", "--config", cfg.to_str().unwrap(), "--t", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown key"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = [
        "sweep",
        "--t-range",
        "3",
        "6",
        "0.25",
        "--method",
        "series5,quadrature",
        "--accel",
        "wynn",
        "--format",
        "csv",
    ];
    let a = cli(&args);
    let b = cli(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
}
