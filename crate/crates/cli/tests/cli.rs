use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use layoutir::corpus::save_layout_jsonl;
use layoutir::gen::generate_corpus;
use layoutir::{api, Domain, LayoutDoc};
use serde_json::Value;

const ROW2_IR: &str = r#"[ [e:title] [e:description [prop:size "small"] ] [e:link] ]"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_layoutir"));
    c.env("LAYOUTIR_LOG", "error");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn corpus(dir: &Path, domain: Domain, n: usize) -> PathBuf {
    let path = dir.join(format!("{}.jsonl", domain.as_str()));
    let docs: Vec<LayoutDoc> = generate_corpus(domain, 5, n).collect();
    save_layout_jsonl(&path, &docs).unwrap();
    path
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/appendix.jsonl")
}

#[test]
fn synth_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let input = corpus(dir.path(), Domain::WebUi, 60);
    let outs: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("ds{i}.jsonl"))).collect();
    for (i, out) in outs.iter().enumerate() {
        let jobs = if i == 0 { "1" } else { "3" };
        let o = run(&["--jobs", jobs, "synth", "--in", s(&input), "--r", "0.1", "--seed", "7", "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(&outs[0]).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(&outs[1]).unwrap());

    let m: Value = serde_json::from_slice(&std::fs::read(dir.path().join("ds0.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["subcommand"], "synth");
    assert_eq!(m["seed"], 7);
    assert_eq!(m["version"], layoutir::VERSION);
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["summary"]["written"], 60);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["synth", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["nope"]).status.code(), Some(2));
    assert_eq!(run(&["validate-ir", "--ir", ROW2_IR, "--domain", "desktop"]).status.code(), Some(2));
    assert_eq!(run(&["--jobs", "0", "validate-ir", "--ir", ROW2_IR]).status.code(), Some(2));
}

#[test]
fn validate_ir_on_appendix_row() {
    let o = run(&["validate-ir", "--ir", ROW2_IR]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim_end(), api::validate_ir(ROW2_IR, "webui").unwrap());

    let o = run(&["validate-ir", "--ir", "[ [e:title ]"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("SyntaxError"), "{err}");
    assert_eq!(err.lines().filter(|l| l.contains("SyntaxError")).count(), 1);
}

#[test]
fn data_errors_exit_1_with_line_and_id() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("irs.jsonl");
    std::fs::write(
        &input,
        format!("{{\"id\":\"ok\",\"ir\":{}}}\n{{\"id\":\"bad\",\"ir\":\"[ [e:nope] ]\"}}\n", Value::from(ROW2_IR)),
    )
    .unwrap();
    let out = dir.path().join("cs.jsonl");
    let o = run(&["compile", "--in", s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains(":2: [bad] UnknownType"), "{err}");
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 1);
}

#[test]
fn cli_matches_api_on_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let text = std::fs::read_to_string(&fx).unwrap();

    let enc = dir.path().join("enc.jsonl");
    assert!(run(&["encode", "--in", s(&fx), "--out", s(&enc)]).status.success());
    let enc_lines: Vec<Value> =
        std::fs::read_to_string(&enc).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();

    let cs = dir.path().join("cs.jsonl");
    assert!(run(&["compile", "--in", s(&fx), "--out", s(&cs)]).status.success());
    let cs_lines: Vec<Value> =
        std::fs::read_to_string(&cs).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();

    assert_eq!(enc_lines.len(), 4);
    for (i, line) in text.lines().enumerate() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(enc_lines[i]["layout_seq"].as_str().unwrap(), api::encode(line).unwrap());
        assert_eq!(enc_lines[i]["id"], v["id"]);
        let ir = v["ir"].as_str().unwrap();
        let domain = v["domain"].as_str().unwrap();
        assert_eq!(cs_lines[i]["constraint_seq"].as_str().unwrap(), api::compile(ir, domain).unwrap());
    }

    // Decoding the encoded sequences and encoding again is a fixed point.
    let dec = dir.path().join("dec.jsonl");
    let webui: Vec<&Value> = enc_lines.iter().filter(|e| !e["id"].as_str().unwrap().ends_with('3')).collect();
    let enc_webui = dir.path().join("enc-webui.jsonl");
    std::fs::write(&enc_webui, webui.iter().map(|v| v.to_string() + "\n").collect::<String>()).unwrap();
    assert!(run(&["decode", "--in", s(&enc_webui), "--out", s(&dec)]).status.success());
    for (line, e) in std::fs::read_to_string(&dec).unwrap().lines().zip(webui) {
        assert_eq!(api::encode(line).unwrap(), e["layout_seq"].as_str().unwrap());
        let direct = api::decode(e["layout_seq"].as_str().unwrap(), "webui", 1200.0, 1200.0).unwrap();
        assert_eq!(api::encode(&direct).unwrap(), api::encode(line).unwrap());
    }
}

#[test]
fn place_matches_api() {
    let dir = tempfile::tempdir().unwrap();
    let cs = dir.path().join("cs.txt");
    let seqs = ["title top undefined", "button undefined small | image undefined large | title undefined undefined"];
    std::fs::write(&cs, seqs.join("\n") + "\n").unwrap();
    let out = dir.path().join("placed.jsonl");
    let o = run(&["place", "--constraints", s(&cs), "--seed", "3", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = serde_json::json!({ "seed": 3 }).to_string();
    for (line, seq) in std::fs::read_to_string(&out).unwrap().lines().zip(seqs) {
        let v: Value = serde_json::from_str(line).unwrap();
        let expected: Value = serde_json::from_str(&api::place(seq, "webui", &cfg, None).unwrap()).unwrap();
        assert_eq!(v["layouts"], expected);
    }
}

#[test]
fn pipeline_on_100_docs() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    let start = Instant::now();
    for domain in [Domain::WebUi, Domain::Rico] {
        let d = domain.as_str();
        let input = corpus(dir.path(), domain, 50);
        let steps: Vec<Vec<String>> = vec![
            vec![
                "stats".into(),
                "--in".into(),
                s(&input).into(),
                "--domain".into(),
                d.into(),
                "--out".into(),
                s(&p("stats.json")).into(),
            ],
            vec!["synth".into(), "--in".into(), s(&input).into(), "--out".into(), s(&p("ds.jsonl")).into()],
            vec![
                "compile".into(),
                "--in".into(),
                s(&p("ds.jsonl")).into(),
                "--domain".into(),
                d.into(),
                "--out".into(),
                s(&p("cs.jsonl")).into(),
            ],
            vec![
                "place".into(),
                "--constraints".into(),
                s(&p("cs.jsonl")).into(),
                "--stats".into(),
                s(&p("stats.json")).into(),
                "--domain".into(),
                d.into(),
                "--out".into(),
                s(&p("placed.jsonl")).into(),
            ],
            vec![
                "eval".into(),
                "--in".into(),
                s(&p("placed.jsonl")).into(),
                "--train".into(),
                s(&input).into(),
                "--domain".into(),
                d.into(),
                "--out".into(),
                s(&p("report.json")).into(),
                "--csv".into(),
                s(&p("report.csv")).into(),
            ],
            vec![
                "render".into(),
                "--in".into(),
                s(&input).into(),
                "--out-dir".into(),
                s(&p(&format!("svg-{d}"))).into(),
            ],
        ];
        for args in &steps {
            let o = bin().args(["--jobs", "1"]).args(args).output().unwrap();
            assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        }
        let report: Value = serde_json::from_str(&std::fs::read_to_string(p("report.json")).unwrap()).unwrap();
        assert_eq!(report["type_cons"], 1.0, "{d}");
        assert_eq!(report["pos_size_cons"], 1.0, "{d}");
        assert_eq!(report["hier_cons"], 1.0, "{d}");
        assert_eq!(report["n"]["pairs"], 200, "{d}");
        assert!(report["um"].as_f64().unwrap() > 0.0);
        assert_eq!(std::fs::read_to_string(p("report.csv")).unwrap().lines().count(), 2);
        let svgs = std::fs::read_dir(p(&format!("svg-{d}"))).unwrap();
        assert_eq!(svgs.filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg")).count(), 50);
        assert!(p(&format!("svg-{d}/manifest.json")).exists());
        assert!(p("placed.jsonl.manifest.json").exists());
    }
    assert!(start.elapsed().as_secs_f64() < 10.0, "{:?}", start.elapsed());
}
