use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_durrmeyer"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn eval_linear_function() {
    let o = run(&[
        "eval",
        "--n",
        "10",
        "--alpha",
        "1/20",
        "--x",
        "0.5,1",
        "--function",
        "t^1",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "x,operator,function,error_estimate");
    assert!(rows[1].starts_with("0.5,0.6,0.5,"));
    assert!(rows[2].starts_with("1,1.1,1,"));
}

#[test]
fn eval_sampled_data() {
    let dir = std::env::temp_dir().join(format!("durrmeyer-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("line.csv");
    let body: String = (0..=400)
        .map(|k| format!("{},{}\n", k as f64 * 0.1, 2.0 + k as f64 * 0.1))
        .collect();
    std::fs::write(&path, format!("t,f\n{body}")).unwrap();
    let o = run(&["eval", "--n", "20", "--x", "3", "--samples", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let u = v["points"][0]["operator"].as_f64().unwrap();
    assert!((u - 5.05).abs() < 1e-8, "{u}");
}

#[test]
fn inadmissible_alpha_fails() {
    let o = run(&["eval", "--n", "3", "--alpha", "1/2", "--x", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("inadmissible"));
}

#[test]
fn table_json_has_nulls_for_dashes() {
    let o = run(&["table", "--ns", "5,10", "--denominators", "5,10"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"][0]["cells"][0], 2.01244);
    assert!(v["rows"][1]["cells"][0].is_null());
}

#[test]
fn figure_and_statconv_csv() {
    let o = run(&["figure", "--figure", "f1", "--points", "3", "--format", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("x,f,n=15 alpha=1/60,n=35 alpha=1/60\n"));
    let o = run(&[
        "statconv", "--matrix", "identity", "--moment", "1", "--ns", "10,100", "--format", "csv",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().nth(1).unwrap(), "10,0.1,0.1,0.1,1");
}

#[test]
fn suite_exit_codes() {
    let dir = std::env::temp_dir().join(format!("durrmeyer-suite-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("good.cfg");
    std::fs::write(&good, "ns = 2, 10\nxs = 0, 1\nchecks = partition, gruss, table\n").unwrap();
    let o = run(&["suite", "--config", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);

    let loose = dir.join("loose.cfg");
    std::fs::write(&loose, "ns = 10\nxs = 1\neps_tail = 1e-2\nchecks = partition\n").unwrap();
    assert_eq!(
        run(&["suite", "--config", loose.to_str().unwrap()]).status.code(),
        Some(1)
    );

    let bad = dir.join("bad.cfg");
    std::fs::write(&bad, "ns = 10\nns = 20\n").unwrap();
    let o = run(&["suite", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("duplicate"));
}

#[test]
fn thread_override_keeps_output_identical() {
    let args = ["figure", "--figure", "f2", "--points", "21", "--format", "csv"];
    let one = Command::new(env!("CARGO_BIN_EXE_durrmeyer"))
        .args(args)
        .env("DURRMEYER_THREADS", "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_durrmeyer"))
        .args(args)
        .env("DURRMEYER_THREADS", "4")
        .output()
        .unwrap();
    assert!(one.status.success() && many.status.success());
    assert_eq!(one.stdout, many.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_durrmeyer"))
        .args(args)
        .env("DURRMEYER_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
