use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn shapeprog(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapeprog"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Every file under `dir` with its contents, by relative path.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.push((p.strip_prefix(root).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}

#[test]
fn sample_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    for d in ["a", "b"] {
        ok(&shapeprog(
            &["sample", "--tables", "4", "--chairs", "3", "--seed", "7", "-o", d],
            tmp.path(),
        ));
    }
    let (a, b) = (snapshot(&tmp.path().join("a")), snapshot(&tmp.path().join("b")));
    assert_eq!(a.len(), 1 + 3 * 7);
    assert_eq!(a, b);
}

#[test]
fn exec_then_eval_against_itself() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&shapeprog(
        &["sample", "--tables", "1", "--chairs", "1", "--seed", "3", "-o", "ds"],
        dir,
    ));
    fs::create_dir_all(dir.join("pred")).unwrap();
    fs::create_dir_all(dir.join("gt")).unwrap();
    for i in ["000000", "000001"] {
        let prog = format!("ds/programs/{i}.sp");
        ok(&shapeprog(&["exec", &prog, "-o", &format!("pred/{i}.binvox")], dir));
        fs::copy(dir.join(format!("ds/voxels/{i}.binvox")), dir.join(format!("gt/{i}.binvox"))).unwrap();
    }
    ok(&shapeprog(
        &["eval", "--pred", "pred", "--gt", "gt", "-o", "report.jsonl"],
        dir,
    ));
    let report = fs::read_to_string(dir.join("report.jsonl")).unwrap();
    let rows: Vec<Value> = report.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r["iou"], 1.0);
        assert_eq!(r["cd"], 0.0);
    }
    assert_eq!(rows[2]["id"], "mean");
}

#[test]
fn fit_recovers_a_single_block() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(
        dir.join("one.sp"),
        "for(Trans, i=4, u=(0,0,6)) {\n  draw(Leg, Cyl, P=(4,0,4), G=(18,2))\n}\n",
    )
    .unwrap();
    ok(&shapeprog(&["exec", "one.sp", "-o", "one.binvox", "--obj", "one.obj"], dir));
    assert!(fs::read_to_string(dir.join("one.obj")).unwrap().contains("\nf "));
    ok(&shapeprog(&["fit", "one.binvox", "-o", "fit/out.sp", "--seed", "1"], dir));
    for f in ["out.sp", "out.tok", "out.binvox", "out.fit.json"] {
        assert!(dir.join("fit").join(f).is_file(), "{f}");
    }
    let trace: Value = serde_json::from_str(&fs::read_to_string(dir.join("fit/out.fit.json")).unwrap()).unwrap();
    assert!(trace["result"]["final_iou"].as_f64().unwrap() >= 0.99);
    // the fitted program parses and reproduces the reconstruction
    ok(&shapeprog(&["exec", "fit/out.sp", "-o", "again.binvox"], dir));
    assert_eq!(
        fs::read(dir.join("again.binvox")).unwrap(),
        fs::read(dir.join("fit/out.binvox")).unwrap()
    );
}

#[test]
fn token_files_roundtrip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let text = "draw(Top, Cub, P=(8,20,8), G=(2,16,16))\nfor(Rot, i=4, theta=90, axis=Y) {\n  draw(Leg, Line, P=(4,0,4), G=(10,12,10))\n}\n";
    fs::write(dir.join("p.sp"), text).unwrap();
    ok(&shapeprog(&["tokenize", "p.sp", "-o", "p.tok"], dir));
    ok(&shapeprog(&["tokenize", "p.sp", "-o", "p.json", "--json"], dir));
    for f in ["p.tok", "p.json"] {
        let out = shapeprog(&["detokenize", f], dir);
        ok(&out);
        assert_eq!(String::from_utf8(out.stdout).unwrap(), text);
    }
    let out = shapeprog(&["parse", "p.sp"], dir);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), text);
}

#[test]
fn analyze_reports_table_and_json() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&shapeprog(
        &["sample", "--tables", "2", "--chairs", "2", "--seed", "1", "-o", "ds"],
        dir,
    ));
    let out = shapeprog(&["analyze", "ds", "-o", "an.json", "--connectivity", "6"], dir);
    ok(&out);
    assert!(String::from_utf8(out.stdout).unwrap().contains("Stable (%)"));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.join("an.json")).unwrap()).unwrap();
    assert_eq!(v["shapes"].as_array().unwrap().len(), 4);
    assert_eq!(v["connectivity"], "Six");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_eq!(code(&shapeprog(&["--help"], dir)), 0);
    assert_eq!(code(&shapeprog(&["no-such-command"], dir)), 1);
    fs::write(dir.join("bad.sp"), "draw(Top, Cub").unwrap();
    let out = shapeprog(&["parse", "bad.sp", "--json-errors"], dir);
    assert_eq!(code(&out), 1);
    let err: Value = serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap();
    assert_eq!(err["error"], "syntax");
    assert_eq!(err["exit_code"], 1);
    fs::write(dir.join("big.sp"), "draw(Top, Cub, P=(0,0,0), G=(1,1,40))").unwrap();
    assert_eq!(code(&shapeprog(&["parse", "big.sp"], dir)), 1);
    // the same program is valid on a wider grid
    assert_eq!(code(&shapeprog(&["parse", "big.sp", "--dims", "48,48,48"], dir)), 0);

    fs::write(
        dir.join("t.sp"),
        "draw(Top, Cub, P=(4,4,4), G=(6,9,5))\ndraw(Leg, Cyl, P=(20,0,20), G=(8,3))\n",
    )
    .unwrap();
    ok(&shapeprog(&["exec", "t.sp", "-o", "t.binvox"], dir));
    let out = shapeprog(&["fit", "t.binvox", "-o", "f.sp", "--budget", "50", "--json-errors"], dir);
    assert_eq!(code(&out), 2);
    let err: Value = serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap();
    assert_eq!(err["error"], "budget");
    assert_eq!(
        code(&shapeprog(&["fit", "t.binvox", "-o", "g.sp", "--dims", "16,16,16"], dir)),
        1
    );
    assert_eq!(
        code(&shapeprog(&["fit", "t.binvox", "-o", "g.sp", "--min-gain", "0"], dir)),
        1
    );
}

#[test]
fn eval_requires_matching_predictions() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&shapeprog(&["sample", "--tables", "1", "--seed", "2", "-o", "ds"], dir));
    fs::create_dir_all(dir.join("empty")).unwrap();
    let out = shapeprog(&["eval", "--pred", "empty", "--gt", "ds/voxels", "-o", "r.jsonl"], dir);
    assert_eq!(code(&out), 1);
    assert!(!dir.join("r.jsonl").exists());
}
