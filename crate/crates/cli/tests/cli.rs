use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lapreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lapreg"))
        .args(args)
        .output()
        .expect("failed to spawn lapreg")
}

fn ok(args: &[&str]) -> Output {
    let out = lapreg(args);
    assert!(
        out.status.success(),
        "lapreg {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

/// Drops the timing columns so runs can be compared.
fn error_columns(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            format!("{},{},{},{},{},{}", f[0], f[1], f[2], f[3], f[4], f[7])
        })
        .collect()
}

#[test]
fn generate_fit_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model, pred) = (path(dir.path(), "c.csv"), path(dir.path(), "m.json"), path(dir.path(), "p.csv"));
    ok(&["generate", "--family", "circles", "--n", "300", "--seed", "4", "--out", &data]);
    let text = fs::read_to_string(&data).unwrap();
    assert!(text.starts_with("x0,x1,y\n"));
    assert_eq!(text.lines().count(), 301);

    ok(&["fit", "--data", &data, "--sigma", "0.2", "--p", "n", "--out", &model]);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(json["basis_kind"], "landmark_kernel");
    assert_eq!(json["coefficients"].as_array().unwrap().len(), 300);

    ok(&["predict", "--model", &model, "--data", &data, "--out", &pred]);
    let rows: Vec<Vec<String>> = fs::read_to_string(&pred)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows[0], ["x0", "x1", "score", "label"]);
    assert_eq!(rows.len(), 301);
    // The labeled rows come first and keep their labels.
    let labeled: Vec<&str> = text.lines().skip(1).take(4).map(|l| l.rsplit(',').next().unwrap()).collect();
    for (row, y) in rows[1..5].iter().zip(labeled) {
        assert_eq!(row[3].parse::<f64>().unwrap(), y.parse::<f64>().unwrap());
    }
}

#[test]
fn baselines_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = path(dir.path(), "g.csv");
    ok(&["generate", "--n", "60", "--d", "3", "--seed", "2", "--out", &data]);
    let graph = ok(&["fit", "--data", &data, "--baseline", "graph", "--graph-sigma", "auto"]);
    let text = String::from_utf8(graph.stdout).unwrap();
    assert!(text.starts_with("x0,x1,x2,score,label\n"));
    assert_eq!(text.lines().count(), 1 + 54);
    let krr = ok(&["fit", "--data", &data, "--baseline", "krr", "--sigma", "1.5"]);
    let json: serde_json::Value = serde_json::from_slice(&krr.stdout).unwrap();
    assert_eq!(json["coefficients"].as_array().unwrap().len(), 6);
}

#[test]
fn eigenvector_export() {
    let dir = tempfile::tempdir().unwrap();
    let (data, grid, out) = (path(dir.path(), "c.csv"), path(dir.path(), "grid.csv"), path(dir.path(), "e.csv"));
    ok(&["generate", "--family", "circles", "--n", "120", "--out", &data]);
    fs::write(&grid, "x0,x1\n0,1\n0,2\n1.5,0\n").unwrap();
    ok(&["eigvecs", "--data", &data, "--grid", &grid, "--sigma", "0.3", "--count", "2", "--out", &out]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("x0,x1,e1,e2\n"));
    assert_eq!(text.lines().count(), 4);
    let header_only = ok(&["eigvecs", "--data", &data, "--sigma", "0.3", "--count", "0"]);
    assert_eq!(String::from_utf8(header_only.stdout).unwrap(), "x0,x1\n");
}

#[test]
fn bench_is_reproducible_and_plots_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let (r1, r2) = (path(dir.path(), "r1.csv"), path(dir.path(), "r2.csv"));
    let args = ["bench-error", "--preset", "fig2", "--n-grid", "30,60", "--trials", "2", "--methods", "kernel_laplacian,graph,krr,exact"];
    ok(&[&args[..], &["--out", &r1, "--workers", "2"]].concat());
    ok(&[&args[..], &["--out", &r2, "--workers", "1"]].concat());
    let (t1, t2) = (fs::read_to_string(&r1).unwrap(), fs::read_to_string(&r2).unwrap());
    assert!(t1.starts_with("method,n,n_labeled,trial,error,fit_seconds,predict_seconds,seed\n"));
    assert_eq!(t1.lines().count(), 1 + 4 * 2 * 2);
    assert_eq!(error_columns(&t1), error_columns(&t2));

    let (s1, s2) = (path(dir.path(), "a.svg"), path(dir.path(), "b.svg"));
    ok(&["plot", "--records", &r1, "--out", &s1]);
    ok(&["plot", "--records", &r1, "--out", &s2]);
    let svg = fs::read(&s1).unwrap();
    assert_eq!(svg, fs::read(&s2).unwrap());
    assert_eq!(String::from_utf8(svg).unwrap().matches("<polyline").count(), 4);
}

#[test]
fn bench_time_records_positive_times() {
    let out = ok(&["bench-time", "--preset", "fig2", "--n-grid", "100", "--trials", "1", "--baseline", "graph"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let t: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
        assert!(t > 0.0 && t.is_finite());
    }
}

#[test]
fn config_file_overlays_preset_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "cfg.json");
    fs::write(&cfg, r#"{"methods": ["krr"], "n_grid": [40], "trials": 3, "seed": 9}"#).unwrap();
    let out = ok(&["bench-error", "--preset", "fig2", "--config", &cfg, "--trials", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("krr,40,4,0,"));

    fs::write(&cfg, r#"{"trails": 3}"#).unwrap();
    assert_eq!(lapreg(&["bench-error", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = path(dir.path(), "g.csv");
    ok(&["generate", "--n", "400", "--d", "10", "--out", &data]);

    assert_eq!(lapreg(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(lapreg(&["fit", "--data", &data, "--lambda=-1"]).status.code(), Some(2));
    assert_eq!(lapreg(&["fit", "--data", &path(dir.path(), "missing.csv")]).status.code(), Some(2));
    assert_eq!(lapreg(&["bench-error", "--n-grid", "50,20"]).status.code(), Some(2));

    // Dense basis 400 · 11 = 4400 exceeds the default cap.
    let out = lapreg(&["fit", "--data", &data, "--method", "exact"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resource limit"));

    // Coordinates this far apart overflow the squared distance.
    let far = path(dir.path(), "far.csv");
    fs::write(&far, "x0,y\n1e300,1\n-1e300,\n0,-1\n5,\n").unwrap();
    let out = lapreg(&["fit", "--data", &far, "--sigma", "1e-160", "--p", "n"]);
    assert_eq!(out.status.code(), Some(3));

    let bad = path(dir.path(), "bad.csv");
    fs::write(&bad, "method,n,n_labeled,trial,error,fit_seconds,predict_seconds,seed\ngraph,x,1,0,0.5,0.1,0,3\n").unwrap();
    let out = lapreg(&["plot", "--records", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
