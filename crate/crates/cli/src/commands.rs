use std::io::Write;
use std::path::Path;

use layoutir::api::{self, ApiError};
use layoutir::corpus::{doc_to_json, parse_record, read_records, StatsBuilder};
use layoutir::synth::build_synthetic_dataset;
use layoutir::{
    decode_layout, encode_layout, metrics, parse_constraint_tokens, parse_ir, parse_layout_tokens, place_samples,
    render_svg, Canvas, CorpusStats, Domain, GridSpec, IrRoot, LayoutDoc, PlacerConfig, RenderStyle, SynthParams,
};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::io::{
    digest, io_err, json_line, manifest_path, map_lines, open_in, open_out, scan_lines, str_field, write_manifest,
    CliError, Diag, RunManifest, Tally,
};
use crate::{
    CompileArgs, DecodeArgs, EncodeArgs, EvalArgs, PlaceArgs, RenderArgs, StatsArgs, SynthArgs, ValidateIrArgs,
};

fn manifest<P: Serialize>(
    out: Option<std::path::PathBuf>,
    subcommand: &'static str,
    params: &P,
    inputs: &[&Path],
    seed: u64,
    summary: Value,
) -> Result<(), CliError> {
    let m = RunManifest {
        subcommand,
        params: serde_json::to_value(params).expect("params serialize"),
        inputs: inputs.iter().map(|p| digest(p)).collect::<Result<_, _>>()?,
        version: layoutir::VERSION,
        seed,
        summary,
    };
    write_manifest(out, &m)
}

fn tally_json(t: Tally) -> Value {
    serde_json::to_value(t).expect("tally serializes")
}

fn missing(field: &str) -> ApiError {
    ApiError { code: "SchemaViolation", message: format!("missing string field `{field}`") }
}

struct Field {
    id: Option<String>,
    text: String,
    /// The record's own `domain`, if it names one.
    domain: Option<String>,
}

/// Raw text, or the `field` of a JSON line with its record id.
fn text_or_field(line: &str, field: &str) -> Result<Field, Diag> {
    match json_line(line).map_err(|e| Diag::new(None, e))? {
        None => Ok(Field { id: None, text: line.trim().to_string(), domain: None }),
        Some(v) => {
            let id = str_field(&v, "id").map(str::to_string);
            let domain = str_field(&v, "domain").map(str::to_string);
            match str_field(&v, field) {
                Some(s) => Ok(Field { id, text: s.to_string(), domain }),
                None => Err(Diag::new(id, missing(field))),
            }
        }
    }
}

fn object(id: Option<String>, fields: Vec<(&str, Value)>) -> String {
    let mut m = Map::new();
    if let Some(id) = id {
        m.insert("id".into(), Value::String(id));
    }
    for (k, v) in fields {
        m.insert(k.into(), v);
    }
    Value::Object(m).to_string()
}

fn default_canvas(domain: Domain) -> Canvas {
    match domain {
        Domain::WebUi => Canvas::new(1200.0, 1200.0),
        Domain::Rico => Canvas::new(1440.0, 2560.0),
    }
}

fn parse_canvas(spec: Option<&str>, domain: Domain) -> Result<Canvas, CliError> {
    let Some(spec) = spec else { return Ok(default_canvas(domain)) };
    let bad = || CliError::Usage(format!("--canvas expects WxH with positive extents, got `{spec}`"));
    let (w, h) = spec.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: f64 = w.trim().parse().map_err(|_| bad())?;
    let h: f64 = h.trim().parse().map_err(|_| bad())?;
    if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
        return Err(bad());
    }
    Ok(Canvas::new(w, h))
}

pub fn validate_ir(a: &ValidateIrArgs, seed: u64) -> Result<(), CliError> {
    let domain = Domain::from(a.domain).as_str();
    let mut out = open_out(&a.out)?;
    let (tally, inputs): (Tally, Vec<&Path>) = match (&a.ir, &a.input) {
        (Some(ir), _) => {
            let t = match api::validate_ir(ir, domain) {
                Ok(c) => {
                    writeln!(out, "{c}").and_then(|_| out.flush()).map_err(io_err(&a.out))?;
                    Tally { ok: 1, failed: 0 }
                }
                Err(e) => {
                    log::error!("{}", Diag::new(None, e));
                    Tally { ok: 0, failed: 1 }
                }
            };
            (t, vec![])
        }
        (None, Some(input)) => {
            let t = map_lines(input, &mut out, |_, line| {
                let f = text_or_field(line, "ir")?;
                let d = f.domain.as_deref().unwrap_or(domain);
                api::validate_ir(&f.text, d).map(|c| vec![c]).map_err(|e| Diag::new(f.id, e))
            })?;
            (t, vec![input.as_path()])
        }
        (None, None) => return Err(CliError::Usage("one of --in or --ir is required".into())),
    };
    manifest(manifest_path(&a.out), "validate-ir", a, &inputs, seed, tally_json(tally))?;
    tally.check()
}

pub fn synth(a: &SynthArgs, seed: u64) -> Result<(), CliError> {
    let params = SynthParams {
        discard_rate: a.discard_rate,
        keep_prob_pos: a.pos_prob,
        keep_prob_size: a.size_prob,
        keep_prob_hier: a.hier_prob,
        seed,
        ..SynthParams::default()
    };
    params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if a.chunk_size == 0 {
        return Err(CliError::Usage("--chunk-size must be at least 1".into()));
    }
    let docs = read_records(open_in(&a.input)?).map(|r| r.map(|rec| rec.doc));
    let mut out = open_out(&a.out)?;
    let summary = build_synthetic_dataset(docs, &params, &mut out, a.chunk_size)
        .map_err(|e| CliError::Data(format!("{}: {e}", e.code())))?;
    out.flush().map_err(io_err(&a.out))?;
    log::info!("synth: read {} written {} skipped {}", summary.read, summary.written, summary.skipped);
    let summary = serde_json::to_value(summary).expect("summary serializes");
    manifest(manifest_path(&a.out), "synth", a, &[&a.input], seed, summary)
}

pub fn compile(a: &CompileArgs, seed: u64) -> Result<(), CliError> {
    let domain = Domain::from(a.domain).as_str();
    let mut out = open_out(&a.out)?;
    let tally = map_lines(&a.input, &mut out, |_, line| {
        let f = text_or_field(line, "ir")?;
        let cs =
            api::compile(&f.text, f.domain.as_deref().unwrap_or(domain)).map_err(|e| Diag::new(f.id.clone(), e))?;
        Ok(vec![object(f.id, vec![("ir", Value::String(f.text)), ("constraint_seq", Value::String(cs))])])
    })?;
    manifest(manifest_path(&a.out), "compile", a, &[&a.input], seed, tally_json(tally))?;
    tally.check()
}

pub fn encode(a: &EncodeArgs, seed: u64) -> Result<(), CliError> {
    let mut out = open_out(&a.out)?;
    let tally = map_lines(&a.input, &mut out, |n, line| {
        let rec = parse_record(line, n).map_err(|e| Diag::new(None, e.into()))?;
        let doc = rec.doc;
        let seq = encode_layout(&doc, GridSpec::for_domain(doc.domain), &Default::default())
            .map_err(|e| Diag::new(Some(doc.id.clone()), e.into()))?;
        Ok(vec![object(Some(doc.id), vec![("layout_seq", Value::String(seq.to_string()))])])
    })?;
    manifest(manifest_path(&a.out), "encode", a, &[&a.input], seed, tally_json(tally))?;
    tally.check()
}

pub fn decode(a: &DecodeArgs, seed: u64) -> Result<(), CliError> {
    let domain = Domain::from(a.domain);
    let canvas = parse_canvas(a.canvas.as_deref(), domain)?;
    let grid = GridSpec::for_domain(domain);
    let mut out = open_out(&a.out)?;
    let tally = map_lines(&a.input, &mut out, |n, line| {
        let Field { id, text, .. } = text_or_field(line, "layout_seq")?;
        let diag = |e: ApiError| Diag::new(id.clone(), e);
        let seq = parse_layout_tokens(&text, domain.vocabulary()).map_err(|e| diag(e.into()))?;
        let mut doc = decode_layout(&seq, grid, canvas, domain).map_err(|e| diag(e.into()))?;
        doc.id = id.clone().unwrap_or_else(|| format!("line-{n}"));
        Ok(vec![doc_to_json(&doc).to_string()])
    })?;
    manifest(manifest_path(&a.out), "decode", a, &[&a.input], seed, tally_json(tally))?;
    tally.check()
}

pub fn place(a: &PlaceArgs, seed: u64) -> Result<(), CliError> {
    let domain = Domain::from(a.domain);
    let cfg = PlacerConfig {
        grid: GridSpec::for_domain(domain),
        k: a.k,
        n_samples: a.samples,
        completion_enabled: !a.no_completion,
        seed,
        ..PlacerConfig::default()
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let stats: Option<CorpusStats> = match &a.stats {
        None => None,
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(io_err(p))?;
            let s: CorpusStats = serde_json::from_str(&text)
                .map_err(|e| CliError::Data(format!("{}: InvalidJson: {e}", p.display())))?;
            if s.grid != cfg.grid {
                return Err(CliError::Usage(format!("{}: statistics grid does not match --domain", p.display())));
            }
            Some(s)
        }
    };
    let mut out = open_out(&a.out)?;
    let tally = map_lines(&a.constraints, &mut out, |_, line| {
        let v = json_line(line).map_err(|e| Diag::new(None, e))?;
        let id = v.as_ref().and_then(|v| str_field(v, "id")).map(str::to_string);
        let ir = v.as_ref().and_then(|v| str_field(v, "ir")).map(str::to_string);
        let text = text_or_field(line, "constraint_seq")?.text;
        let diag = |e: ApiError| Diag::new(id.clone(), e);
        let cs = parse_constraint_tokens(&text, domain.vocabulary()).map_err(|e| diag(e.into()))?;
        let layouts = place_samples(&cs, &cfg, stats.as_ref()).map_err(|e| diag(e.into()))?;
        let layouts = layouts.iter().map(|l| Value::String(l.to_string())).collect();
        let mut fields = vec![("constraint_seq", Value::String(cs.to_string())), ("layouts", Value::Array(layouts))];
        if let Some(ir) = ir {
            fields.push(("ir", Value::String(ir)));
        }
        Ok(vec![object(id, fields)])
    })?;
    let mut inputs = vec![a.constraints.as_path()];
    inputs.extend(a.stats.as_deref());
    manifest(manifest_path(&a.out), "place", a, &inputs, seed, tally_json(tally))?;
    tally.check()
}

fn eval_pairs(line: &str, n: usize, domain: Domain, canvas: Canvas) -> Result<Vec<(IrRoot, LayoutDoc)>, Diag> {
    let v = json_line(line)
        .map_err(|e| Diag::new(None, e))?
        .ok_or_else(|| Diag::new(None, ApiError { code: "InvalidJson", message: "expected a JSON object".into() }))?;
    let id = str_field(&v, "id").map(str::to_string);
    let diag = |e: ApiError| Diag::new(id.clone(), e);
    let ir_text = str_field(&v, "ir").ok_or_else(|| diag(missing("ir")))?;
    let ir = parse_ir(ir_text, domain.vocabulary()).map_err(|e| diag(e.into()))?;
    match v.get("layouts").and_then(Value::as_array) {
        Some(layouts) => {
            let grid = GridSpec::for_domain(domain);
            layouts
                .iter()
                .enumerate()
                .map(|(k, l)| {
                    let text = l.as_str().ok_or_else(|| diag(missing("layouts[]")))?;
                    let seq = parse_layout_tokens(text, domain.vocabulary()).map_err(|e| diag(e.into()))?;
                    let mut doc = decode_layout(&seq, grid, canvas, domain).map_err(|e| diag(e.into()))?;
                    doc.id = format!("{}#{k}", id.as_deref().unwrap_or("line"));
                    Ok((ir.clone(), doc))
                })
                .collect()
        }
        None => {
            let rec = parse_record(line, n).map_err(|e| diag(e.into()))?;
            Ok(vec![(ir, rec.doc)])
        }
    }
}

fn load_docs(path: &Path) -> Result<Vec<LayoutDoc>, CliError> {
    let mut docs = Vec::new();
    let tally = scan_lines(
        path,
        |n, line| parse_record(line, n).map(|r| r.doc).map_err(|e| Diag::new(None, e.into())),
        |d| {
            docs.push(d);
            Ok(())
        },
    )?;
    tally.check()?;
    Ok(docs)
}

pub fn eval(a: &EvalArgs, seed: u64) -> Result<(), CliError> {
    let domain = Domain::from(a.domain);
    let canvas = parse_canvas(a.canvas.as_deref(), domain)?;
    let mut pairs = Vec::new();
    let tally = scan_lines(
        &a.input,
        |n, line| eval_pairs(line, n, domain, canvas),
        |p| {
            pairs.extend(p);
            Ok(())
        },
    )?;
    tally.check()?;
    let references = a.references.as_deref().map(load_docs).transpose()?;
    let train = a.train.as_deref().map(load_docs).transpose()?;
    let report = metrics::evaluate(&pairs, references.as_deref(), train.as_deref())
        .map_err(|e| CliError::Data(format!("{}: {e}", e.code())))?;
    let mut out = open_out(&a.out)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    writeln!(out, "{text}").and_then(|_| out.flush()).map_err(io_err(&a.out))?;
    if let Some(csv) = &a.csv {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let body = format!(
            "align,overlap,miou,um,type_cons,pos_size_cons,hier_cons,pairs\n{},{},{},{},{},{},{},{}\n",
            report.align,
            report.overlap,
            opt(report.miou),
            opt(report.um),
            report.type_cons,
            report.pos_size_cons,
            report.hier_cons,
            report.n.pairs
        );
        std::fs::write(csv, body).map_err(io_err(csv))?;
    }
    let mut inputs = vec![a.input.as_path()];
    inputs.extend(a.references.as_deref());
    inputs.extend(a.train.as_deref());
    manifest(manifest_path(&a.out), "eval", a, &inputs, seed, json!({ "records": tally.ok, "pairs": pairs.len() }))
}

fn file_stem(id: &str) -> String {
    let s: String =
        id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).take(64).collect();
    if s.is_empty() {
        "doc".into()
    } else {
        s
    }
}

pub fn render(a: &RenderArgs, seed: u64) -> Result<(), CliError> {
    std::fs::create_dir_all(&a.out_dir).map_err(io_err(&a.out_dir))?;
    let mut index = 0usize;
    let tally = scan_lines(
        &a.input,
        |n, line| {
            let doc = parse_record(line, n).map_err(|e| Diag::new(None, e.into()))?.doc;
            let svg = render_svg(&doc, &RenderStyle::for_domain(doc.domain));
            Ok((file_stem(&doc.id), svg))
        },
        |(stem, svg)| {
            let path = a.out_dir.join(format!("{index:06}-{stem}.svg"));
            index += 1;
            std::fs::write(&path, svg).map_err(io_err(&path))
        },
    )?;
    manifest(Some(a.out_dir.join("manifest.json")), "render", a, &[&a.input], seed, tally_json(tally))?;
    tally.check()
}

pub fn stats(a: &StatsArgs, seed: u64) -> Result<(), CliError> {
    let domain = Domain::from(a.domain);
    let mut builder = StatsBuilder::new(GridSpec::for_domain(domain));
    let tally = scan_lines(
        &a.input,
        |n, line| {
            let doc = parse_record(line, n).map_err(|e| Diag::new(None, e.into()))?.doc;
            if doc.domain != domain {
                let message = format!("document domain `{}` differs from --domain", doc.domain.as_str());
                return Err(Diag { id: Some(doc.id), code: "InvalidArgument", message });
            }
            Ok(doc)
        },
        |doc| {
            builder.add_doc(&doc);
            Ok(())
        },
    )?;
    tally.check()?;
    let stats = builder.finish().map_err(|e| CliError::Data(format!("{}: {e}", e.code())))?;
    let mut out = open_out(&a.out)?;
    let text = serde_json::to_string(&stats).expect("stats serialize");
    writeln!(out, "{text}").and_then(|_| out.flush()).map_err(io_err(&a.out))?;
    manifest(manifest_path(&a.out), "stats", a, &[&a.input], seed, tally_json(tally))
}
