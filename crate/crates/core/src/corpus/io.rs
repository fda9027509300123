//! JSONL persistence for layout documents.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Number, Value};

use super::{BBox, Canvas, CorpusError, ElementTreeNode, LayoutDoc, MAX_ELEMENTS_PER_DOC};
use crate::ir::Domain;

/// One JSONL line: a layout plus optional labels carried alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct DocRecord {
    pub doc: LayoutDoc,
    pub text: Option<String>,
    pub ir: Option<String>,
}

impl From<LayoutDoc> for DocRecord {
    fn from(doc: LayoutDoc) -> Self {
        DocRecord { doc, text: None, ir: None }
    }
}

fn violation(line: usize, field: impl Into<String>, message: impl Into<String>) -> CorpusError {
    CorpusError::SchemaViolation { line, field: field.into(), message: message.into() }
}

fn number(v: &Value, line: usize, field: &str) -> Result<f64, CorpusError> {
    v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| violation(line, field, "expected a finite number"))
}

struct NodeParser {
    domain: Domain,
    line: usize,
    typed: usize,
}

impl NodeParser {
    fn node(&mut self, v: &Value, path: &str) -> Result<ElementTreeNode, CorpusError> {
        let line = self.line;
        let obj = v.as_object().ok_or_else(|| violation(line, path, "expected an object"))?;
        let tag = match obj.get("tag") {
            Some(Value::String(s)) if !s.is_empty() => s.clone(),
            Some(_) => return Err(violation(line, format!("{path}.tag"), "expected a nonempty string")),
            None => return Err(violation(line, format!("{path}.tag"), "missing")),
        };
        let etype = match obj.get("type") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => {
                let t = self.domain.vocabulary().get(s).ok_or_else(|| {
                    violation(line, format!("{path}.type"), format!("unknown {} element type `{s}`", self.domain))
                })?;
                Some(t.clone())
            }
            Some(_) => return Err(violation(line, format!("{path}.type"), "expected a string")),
        };
        let field = format!("{path}.box");
        let bbox = match obj.get("box") {
            Some(Value::Array(a)) if a.len() == 4 => BBox::new(
                number(&a[0], line, &field)?,
                number(&a[1], line, &field)?,
                number(&a[2], line, &field)?,
                number(&a[3], line, &field)?,
            ),
            Some(_) => return Err(violation(line, field, "expected [l, t, w, h]")),
            None => return Err(violation(line, field, "missing")),
        };
        let mut node = ElementTreeNode::new(tag, bbox);
        node.etype = etype;
        if node.etype.is_some() {
            self.typed += 1;
            if self.typed > MAX_ELEMENTS_PER_DOC {
                return Err(violation(line, path, format!("more than {MAX_ELEMENTS_PER_DOC} typed elements")));
            }
        }
        match obj.get("attrs") {
            None | Some(Value::Null) => {}
            Some(Value::Object(m)) => {
                for (k, v) in m {
                    let s = match v {
                        Value::String(s) => s.clone(),
                        Value::Number(n) => n.to_string(),
                        Value::Bool(b) => b.to_string(),
                        _ => return Err(violation(line, format!("{path}.attrs.{k}"), "expected a scalar")),
                    };
                    node.attrs.insert(k.clone(), s);
                }
            }
            Some(_) => return Err(violation(line, format!("{path}.attrs"), "expected an object")),
        }
        match obj.get("children") {
            None | Some(Value::Null) => {}
            Some(Value::Array(children)) => {
                node.children.reserve(children.len());
                for (i, c) in children.iter().enumerate() {
                    node.children.push(self.node(c, &format!("{path}.children[{i}]"))?);
                }
            }
            Some(_) => return Err(violation(line, format!("{path}.children"), "expected an array")),
        }
        Ok(node)
    }
}

fn opt_string(obj: &Map<String, Value>, key: &str, line: usize) -> Result<Option<String>, CorpusError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(violation(line, key, "expected a string")),
    }
}

/// Parses one JSONL line. `line` is 1-based and only used in errors.
pub fn parse_record(text: &str, line: usize) -> Result<DocRecord, CorpusError> {
    let value: Value = serde_json::from_str(text).map_err(|e| violation(line, "<record>", e.to_string()))?;
    let obj = value.as_object().ok_or_else(|| violation(line, "<record>", "expected an object"))?;
    let id = match obj.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        Some(_) => return Err(violation(line, "id", "expected a string")),
        None => return Err(violation(line, "id", "missing")),
    };
    let domain: Domain = match obj.get("domain") {
        Some(Value::String(s)) => s.parse().map_err(|e: String| violation(line, "domain", e))?,
        Some(_) => return Err(violation(line, "domain", "expected a string")),
        None => return Err(violation(line, "domain", "missing")),
    };
    let canvas = match obj.get("canvas") {
        Some(Value::Object(c)) => {
            let w = number(c.get("w").unwrap_or(&Value::Null), line, "canvas.w")?;
            let h = number(c.get("h").unwrap_or(&Value::Null), line, "canvas.h")?;
            if w <= 0.0 || h <= 0.0 {
                return Err(violation(line, "canvas", "width and height must be positive"));
            }
            Canvas::new(w, h)
        }
        Some(_) => return Err(violation(line, "canvas", "expected an object")),
        None => return Err(violation(line, "canvas", "missing")),
    };
    let root = obj.get("root").ok_or_else(|| violation(line, "root", "missing"))?;
    let mut parser = NodeParser { domain, line, typed: 0 };
    let root = parser.node(root, "root")?;
    Ok(DocRecord {
        doc: LayoutDoc { id, domain, canvas, root },
        text: opt_string(obj, "text", line)?,
        ir: opt_string(obj, "ir", line)?,
    })
}

fn num(x: f64) -> Value {
    // Integral values print without a fractional part.
    if x.fract() == 0.0 && x.abs() < 9.0e15 && !(x == 0.0 && x.is_sign_negative()) {
        Value::Number(Number::from(x as i64))
    } else {
        Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
    }
}

fn node_to_json(node: &ElementTreeNode) -> Value {
    let mut m = Map::new();
    m.insert("tag".into(), Value::String(node.tag.clone()));
    if let Some(t) = &node.etype {
        m.insert("type".into(), Value::String(t.as_str().into()));
    }
    let b = node.bbox;
    m.insert("box".into(), Value::Array(vec![num(b.l), num(b.t), num(b.w), num(b.h)]));
    if !node.attrs.is_empty() {
        let attrs = node.attrs.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        m.insert("attrs".into(), Value::Object(attrs));
    }
    if !node.children.is_empty() {
        m.insert("children".into(), Value::Array(node.children.iter().map(node_to_json).collect()));
    }
    Value::Object(m)
}

pub fn doc_to_json(doc: &LayoutDoc) -> Value {
    let mut m = Map::new();
    m.insert("id".into(), Value::String(doc.id.clone()));
    m.insert("domain".into(), Value::String(doc.domain.as_str().into()));
    let mut canvas = Map::new();
    canvas.insert("w".into(), num(doc.canvas.w));
    canvas.insert("h".into(), num(doc.canvas.h));
    m.insert("canvas".into(), Value::Object(canvas));
    m.insert("root".into(), node_to_json(&doc.root));
    Value::Object(m)
}

pub fn record_to_json(rec: &DocRecord) -> Value {
    let mut v = doc_to_json(&rec.doc);
    let m = v.as_object_mut().expect("document serializes to an object");
    if let Some(t) = &rec.text {
        m.insert("text".into(), Value::String(t.clone()));
    }
    if let Some(ir) = &rec.ir {
        m.insert("ir".into(), Value::String(ir.clone()));
    }
    v
}

/// Streams records from a reader. Blank lines are skipped.
pub fn read_records<R: BufRead>(reader: R) -> impl Iterator<Item = Result<DocRecord, CorpusError>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(CorpusError::Io(e))),
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(parse_record(&l, i + 1)),
    })
}

pub fn load_records_jsonl(
    path: impl AsRef<Path>,
) -> Result<impl Iterator<Item = Result<DocRecord, CorpusError>>, CorpusError> {
    let file = File::open(path)?;
    Ok(read_records(BufReader::new(file)))
}

pub fn load_layout_jsonl(
    path: impl AsRef<Path>,
) -> Result<impl Iterator<Item = Result<LayoutDoc, CorpusError>>, CorpusError> {
    Ok(load_records_jsonl(path)?.map(|r| r.map(|rec| rec.doc)))
}

/// Line-at-a-time JSONL writer.
pub struct LayoutWriter<W: Write> {
    out: W,
}

impl<W: Write> LayoutWriter<W> {
    pub fn new(out: W) -> Self {
        LayoutWriter { out }
    }

    pub fn write_doc(&mut self, doc: &LayoutDoc) -> Result<(), CorpusError> {
        self.write_value(&doc_to_json(doc))
    }

    pub fn write_record(&mut self, rec: &DocRecord) -> Result<(), CorpusError> {
        self.write_value(&record_to_json(rec))
    }

    fn write_value(&mut self, v: &Value) -> Result<(), CorpusError> {
        serde_json::to_writer(&mut self.out, v).map_err(std::io::Error::from)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn into_inner(mut self) -> Result<W, CorpusError> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn save_layout_jsonl<'a, I>(path: impl AsRef<Path>, docs: I) -> Result<usize, CorpusError>
where
    I: IntoIterator<Item = &'a LayoutDoc>,
{
    let mut w = LayoutWriter::new(BufWriter::new(File::create(path)?));
    let mut n = 0;
    for d in docs {
        w.write_doc(d)?;
        n += 1;
    }
    w.into_inner()?;
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{"id":"a","domain":"webui","canvas":{"w":1200,"h":1200},"root":{"tag":"body","box":[0,0,1200,1200],"children":[{"tag":"h1","box":[130.25,0,930,40],"attrs":{"class":"hero"}},{"tag":"x","type":"background image","box":[0,50,1200,350]}]}}"#;

    #[test]
    fn parse_and_reserialize() {
        let rec = parse_record(LINE, 1).unwrap();
        assert_eq!(rec.doc.root.children.len(), 2);
        assert_eq!(rec.doc.root.children[0].bbox.l, 130.25);
        assert_eq!(rec.doc.root.children[1].etype.as_ref().unwrap().as_str(), "background image");
        let again = parse_record(&record_to_json(&rec).to_string(), 1).unwrap();
        assert_eq!(again, rec);
    }

    #[test]
    fn missing_canvas_is_schema_violation() {
        let err = parse_record(r#"{"id":"a","domain":"webui","root":{"tag":"b","box":[0,0,1,1]}}"#, 7).unwrap_err();
        match err {
            CorpusError::SchemaViolation { line, field, .. } => {
                assert_eq!(line, 7);
                assert_eq!(field, "canvas");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nested_field_paths() {
        let bad = r#"{"id":"a","domain":"webui","canvas":{"w":1,"h":1},"root":{"tag":"b","box":[0,0,1,1],"children":[{"tag":"c","box":[0,0]}]}}"#;
        match parse_record(bad, 1).unwrap_err() {
            CorpusError::SchemaViolation { field, .. } => assert_eq!(field, "root.children[0].box"),
            other => panic!("unexpected {other:?}"),
        }
        let unknown = r#"{"id":"a","domain":"webui","canvas":{"w":1,"h":1},"root":{"tag":"b","type":"pager indicator","box":[0,0,1,1]}}"#;
        assert!(matches!(parse_record(unknown, 1), Err(CorpusError::SchemaViolation { .. })));
    }

    #[test]
    fn empty_input_is_empty_stream() {
        assert_eq!(read_records(&b""[..]).count(), 0);
        assert_eq!(read_records(&b"\n\n"[..]).count(), 0);
    }

    #[test]
    fn labels_pass_through() {
        let mut v: Value = serde_json::from_str(LINE).unwrap();
        v["text"] = Value::String("a page".into());
        v["ir"] = Value::String("[e:title]".into());
        let rec = parse_record(&v.to_string(), 1).unwrap();
        assert_eq!(rec.text.as_deref(), Some("a page"));
        assert_eq!(rec.ir.as_deref(), Some("[e:title]"));
    }
}
