use std::path::Path;
use std::process::{Command, Output};

use ratio_prox::{q_value, ProxProblem};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ratio-prox"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn prox_reproduces_table_records() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "p.jsonl",
        "{\"y\":[4,4,3,3,2,2],\"mu\":13}\n{\"y\":[0,0,0],\"mu\":2,\"a\":0.5}\n{\"y\":[9,7,6,4,2],\"mu\":1}\n",
    );
    let o = run(&["prox", &input]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = json_lines(&o);
    assert_eq!(recs.len(), 3);

    let m = &recs[0]["members"][0];
    assert_eq!(m["k"], 6);
    assert!((m["q"].as_f64().unwrap() - 29.403).abs() < 1e-3);
    assert_eq!(recs[0]["is_set_valued"], false);

    let z = &recs[1]["members"][0];
    assert_eq!(z["k"], 0);
    assert_eq!(floats(&z["x"]), vec![0.0; 3]);
    assert_eq!(z["q"].as_f64().unwrap(), 1.0);
    assert_eq!(recs[1]["contains_zero"], true);

    let m = &recs[2]["members"][0];
    assert_eq!(m["k"], 5);
    assert!((m["q"].as_f64().unwrap() - 2.051).abs() < 1e-3);
}

#[test]
fn json_output_round_trips_q() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "p.csv", "4,-4,3,3,-2,2\n0.3,-1.7,0.01,2.2\n9,7,6,4,2\n");
    for mu in ["0.5", "13", "48"] {
        let o = run(&["prox", &input, "--mu", mu, "--a", "0.5", "--all-solutions"]);
        assert!(o.status.success());
        let ys = [vec![4.0, -4.0, 3.0, 3.0, -2.0, 2.0], vec![0.3, -1.7, 0.01, 2.2], vec![9.0, 7.0, 6.0, 4.0, 2.0]];
        for (rec, y) in json_lines(&o).iter().zip(ys) {
            let p = ProxProblem::new(y, mu.parse().unwrap(), 0.5).unwrap();
            for m in rec["members"].as_array().unwrap() {
                let q = q_value(&floats(&m["x"]), &p);
                assert!((q - m["q"].as_f64().unwrap()).abs() <= 1e-12, "{q} vs {}", m["q"]);
            }
        }
    }
}

#[test]
fn table_output_has_three_decimals() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "p.csv", "4,4,3,3,2,2\n");
    let o = run(&["prox", &input, "--mu", "1", "--table"]);
    let text = stdout(&o);
    assert!(text.contains("2.360"), "{text}");
    assert!(text.contains("[4.033, 4.033, 2.990, 2.990, 1.948, 1.948]"), "{text}");
}

#[test]
fn all_solutions_lists_origin_tie() {
    // y = 2, mu = 4, a = 0.5: F(1) = -2 + 4 = 2 = mu*a
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "p.csv", "2\n");
    let o = run(&["prox", &input, "--mu", "4", "--a", "0.5", "--all-solutions"]);
    let rec = &json_lines(&o)[0];
    assert_eq!(rec["is_set_valued"], true);
    assert_eq!(rec["contains_zero"], true);
    assert_eq!(rec["members"].as_array().unwrap().len(), 2);
    let o = run(&["prox", &input, "--mu", "4", "--a", "0.5"]);
    assert_eq!(json_lines(&o)[0]["members"].as_array().unwrap().len(), 1);
}

#[test]
fn modes_agree() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "p.csv", "4,4,3,3,2,2\n9,7,6,4,2\n1,-0.5,0.25,3\n");
    let a = json_lines(&run(&["prox", &input, "--mu", "3", "--mode", "naive"]));
    let b = json_lines(&run(&["prox", &input, "--mu", "3", "--mode", "optimized"]));
    for (ra, rb) in a.iter().zip(&b) {
        let (ma, mb) = (&ra["members"][0], &rb["members"][0]);
        assert_eq!(ma["k"], mb["k"]);
        assert!((ma["q"].as_f64().unwrap() - mb["q"].as_f64().unwrap()).abs() < 1e-9);
    }
}

fn sweep_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).filter(|l| !l.is_empty()).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn sweep_rows_follow_existence() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "s.csv", "9,7,6,4,2\n");
    let o = run(&["sweep", &input, "--mu", "48"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("k,A_k,exists,lambda_star,F,Q"));
    let rows = sweep_rows(&text);
    assert_eq!(rows.len(), 5);
    for row in &rows[..4] {
        assert!(!row[4].is_empty() && !row[5].is_empty(), "{row:?}");
    }
    assert!(rows[4][3].is_empty() && rows[4][4].is_empty() && rows[4][5].is_empty());
    assert!((rows[1][5].parse::<f64>().unwrap() - 94.789).abs() < 1e-3);
}

#[test]
fn sweep_zigzag_existence_column() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "s.csv", "1,1,0.92,0.92,0.8,0.8,0.8,0.5\n");
    let mu = 0.795f64.powf(-1.5).to_string();
    let rows = sweep_rows(&stdout(&run(&["sweep", &input, "--mu", &mu])));
    let exists: Vec<usize> =
        rows.iter().filter(|r| r[2] == "true" && r[0] != "1").map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(exists, vec![2, 4, 5, 6, 7]);
}

#[test]
fn sweep_separates_records() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "s.jsonl", "{\"y\":[1,2],\"mu\":0.1}\n{\"y\":[3],\"mu\":0.1}\n");
    let text = stdout(&run(&["sweep", &input]));
    assert_eq!(text.lines().filter(|l| l.is_empty()).count(), 1);
    assert_eq!(sweep_rows(&text).len(), 3);
}

#[test]
fn parse_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.csv", "1,2\n3,oops\n");
    let o = run(&["prox", &bad, "--mu", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("record 1"));

    let empty = write(&dir, "empty.csv", "\n");
    assert_eq!(run(&["prox", &empty, "--mu", "1"]).status.code(), Some(2));

    let ok = write(&dir, "ok.csv", "1,2\n");
    assert_eq!(run(&["prox", &ok]).status.code(), Some(2), "missing mu");
    assert_eq!(run(&["prox", &ok, "--mu", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["prox", &ok, "--mu", "1", "--a", "2"]).status.code(), Some(2));
    assert_eq!(run(&["prox", "/nonexistent/file.csv", "--mu", "1"]).status.code(), Some(2));
    assert_eq!(run(&["prox", &ok, "--mu", "1", "--mode", "fast"]).status.code(), Some(2));
}

#[test]
fn format_flag_overrides_extension() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "records.txt", "{\"y\":[3,1],\"mu\":0.2}\n");
    assert_eq!(run(&["prox", &input]).status.code(), Some(2));
    let o = run(&["prox", &input, "--format", "jsonl"]);
    assert!(o.status.success());
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "p.csv", "3,1\n");
    let out = dir.path().join("out.jsonl");
    let o = run(&["prox", &input, "--mu", "0.2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success() && o.stdout.is_empty());
    assert!(Path::new(&out).exists());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 1);
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "p.csv", &"0.3,-1.1,2.5,0.7\n".repeat(50));
    let a = run(&["prox", &input, "--mu", "0.7"]);
    let b = run(&["prox", &input, "--mu", "0.7"]);
    assert_eq!(a.stdout, b.stdout);
    let lines = stdout(&a);
    assert!(lines.lines().enumerate().all(|(i, l)| l.starts_with(&format!("{{\"record\":{i},"))));
}

#[test]
fn check_reference_vectors() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "c.jsonl",
        "{\"y\":[4,4,3,3,2,2],\"mu\":1}\n{\"y\":[4,4,3,3,2,2],\"mu\":13}\n{\"y\":[9,7,6,4,2],\"mu\":1}\n{\"y\":[9,7,6,4,2],\"mu\":48}\n{\"y\":[0,0],\"mu\":1}\n",
    );
    let o = run(&["check", &input]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("failures = 0"));
}

#[test]
fn check_random_instances() {
    let o = run(&["check", "--random", "500", "--dim", "3", "--seed", "7"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("checked 500 records"));
}

#[test]
fn check_rejects_large_records() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "c.csv", "1,2,3,4,5,6,7,8,9\n");
    assert_eq!(run(&["check", &input, "--mu", "1"]).status.code(), Some(2));
}

#[test]
fn bench_emits_csv() {
    let o = run(&["bench", "--n", "1,50", "--trials", "3", "--seed", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,time,mode"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!((rows[0][0], rows[0][2]), ("1", "optimized"));
    assert_eq!((rows[1][0], rows[1][2]), ("1", "naive"));
    assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() >= 0.0));
}
