//! String-in, string-out entry points.
//!
//! Every function takes and returns plain text or JSON so that foreign
//! callers (scripting bindings, the command line tool) share one code path.
//! Errors carry the originating module's error code.

use std::fmt;

use serde_json::Value;

use crate::corpus::{doc_to_json, parse_record, CorpusStats, LayoutDoc};
use crate::ir::{parse_ir, Domain, IrRoot};
use crate::metrics::evaluate as evaluate_pairs;
use crate::placer::{place_samples, PlacerConfig};
use crate::seq::{
    compile_constraints, decode_layout, encode_layout, parse_constraint_tokens, parse_layout_tokens, GridSpec,
};
use crate::synth::{synthesize_record, SynthParams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for ApiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ApiError {}

macro_rules! from_coded {
    ($($t:ty),*) => {$(
        impl From<$t> for ApiError {
            fn from(e: $t) -> Self {
                ApiError { code: e.code(), message: e.to_string() }
            }
        }
    )*};
}

from_coded!(
    crate::ir::IrError,
    crate::seq::SeqError,
    crate::corpus::CorpusError,
    crate::synth::SynthError,
    crate::metrics::MetricsError,
    crate::placer::PlacerError
);

fn invalid(message: impl Into<String>) -> ApiError {
    ApiError { code: "InvalidArgument", message: message.into() }
}

fn json_err(e: serde_json::Error) -> ApiError {
    ApiError { code: "InvalidJson", message: e.to_string() }
}

pub fn parse_domain(domain: &str) -> Result<Domain, ApiError> {
    domain.parse().map_err(|_| invalid(format!("unknown domain `{domain}`")))
}

fn doc_from_value(v: &Value) -> Result<LayoutDoc, ApiError> {
    Ok(parse_record(&v.to_string(), 1)?.doc)
}

fn doc_from_json(text: &str) -> Result<LayoutDoc, ApiError> {
    Ok(parse_record(text, 1)?.doc)
}

/// IR text to constraint sequence text.
pub fn compile(ir_text: &str, domain: &str) -> Result<String, ApiError> {
    let ir = parse_ir(ir_text, parse_domain(domain)?.vocabulary())?;
    Ok(compile_constraints(&ir).to_string())
}

/// Canonical IR text.
pub fn validate_ir(ir_text: &str, domain: &str) -> Result<String, ApiError> {
    Ok(parse_ir(ir_text, parse_domain(domain)?.vocabulary())?.to_string())
}

/// Layout document JSON to layout sequence text on the domain's grid.
pub fn encode(doc_json: &str) -> Result<String, ApiError> {
    let doc = doc_from_json(doc_json)?;
    Ok(encode_layout(&doc, GridSpec::for_domain(doc.domain), &Default::default())?.to_string())
}

/// Layout sequence text to a layout document JSON on a `canvas_w x canvas_h`
/// canvas.
pub fn decode(seq_text: &str, domain: &str, canvas_w: f64, canvas_h: f64) -> Result<String, ApiError> {
    let domain = parse_domain(domain)?;
    if !(canvas_w > 0.0 && canvas_h > 0.0 && canvas_w.is_finite() && canvas_h.is_finite()) {
        return Err(invalid("canvas extents must be positive and finite"));
    }
    let seq = parse_layout_tokens(seq_text, domain.vocabulary())?;
    let doc =
        decode_layout(&seq, GridSpec::for_domain(domain), crate::corpus::Canvas::new(canvas_w, canvas_h), domain)?;
    Ok(doc_to_json(&doc).to_string())
}

/// One synthesized training record as JSON. `params_json` may be empty or
/// `{}` for defaults; `seed` overrides the seed it contains.
pub fn synthesize(doc_json: &str, params_json: &str, seed: u64) -> Result<String, ApiError> {
    let doc = doc_from_json(doc_json)?;
    let mut params: SynthParams = if params_json.trim().is_empty() {
        SynthParams::default()
    } else {
        serde_json::from_str(params_json).map_err(json_err)?
    };
    params.seed = seed;
    params.validate()?;
    Ok(serde_json::to_string(&synthesize_record(&doc, &params)?).expect("record serializes"))
}

/// Evaluation report as JSON.
///
/// Input: `{"domain": "webui", "pairs": [{"ir": "...", "doc": {...}}, ...],
/// "references": [doc, ...], "train": [doc, ...]}`; the last two are optional.
pub fn evaluate(pairs_json: &str) -> Result<String, ApiError> {
    let v: Value = serde_json::from_str(pairs_json).map_err(json_err)?;
    let domain = parse_domain(v.get("domain").and_then(Value::as_str).unwrap_or("webui"))?;
    let vocab = domain.vocabulary();
    let pairs = v.get("pairs").and_then(Value::as_array).ok_or_else(|| invalid("`pairs` must be an array"))?;
    let pairs: Vec<(IrRoot, LayoutDoc)> = pairs
        .iter()
        .map(|p| {
            let ir = p.get("ir").and_then(Value::as_str).ok_or_else(|| invalid("pair.ir must be a string"))?;
            let doc = p.get("doc").ok_or_else(|| invalid("pair.doc is missing"))?;
            Ok((parse_ir(ir, vocab)?, doc_from_value(doc)?))
        })
        .collect::<Result<_, ApiError>>()?;
    let docs = |key: &str| -> Result<Option<Vec<LayoutDoc>>, ApiError> {
        match v.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Array(a)) => a.iter().map(doc_from_value).collect::<Result<Vec<_>, _>>().map(Some),
            Some(_) => Err(invalid(format!("`{key}` must be an array"))),
        }
    };
    let references = docs("references")?;
    let train = docs("train")?;
    let report = evaluate_pairs(&pairs, references.as_deref(), train.as_deref())?;
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

/// Exact-match IR accuracy between two JSON arrays of IR strings.
pub fn ir_accuracy(pred_json: &str, gold_json: &str, domain: &str) -> Result<f64, ApiError> {
    let vocab = parse_domain(domain)?.vocabulary();
    let parse_all = |text: &str| -> Result<Vec<IrRoot>, ApiError> {
        let items: Vec<String> = serde_json::from_str(text).map_err(json_err)?;
        items.iter().map(|s| parse_ir(s, vocab).map_err(ApiError::from)).collect()
    };
    Ok(crate::ir::ir_accuracy(&parse_all(pred_json)?, &parse_all(gold_json)?)?)
}

/// Placed layout sequences for a constraint sequence, as a JSON array of
/// strings. `config_json` may be empty for defaults; `stats_json` is the
/// output of corpus statistics, if available.
pub fn place(cs_text: &str, domain: &str, config_json: &str, stats_json: Option<&str>) -> Result<String, ApiError> {
    let domain = parse_domain(domain)?;
    let cs = parse_constraint_tokens(cs_text, domain.vocabulary())?;
    let cfg: PlacerConfig = if config_json.trim().is_empty() {
        PlacerConfig { grid: GridSpec::for_domain(domain), ..PlacerConfig::default() }
    } else {
        serde_json::from_str(config_json).map_err(json_err)?
    };
    let stats: Option<CorpusStats> = stats_json.map(serde_json::from_str).transpose().map_err(json_err)?;
    let seqs = place_samples(&cs, &cfg, stats.as_ref())?;
    let out: Vec<String> = seqs.iter().map(ToString::to_string).collect();
    Ok(serde_json::to_string(&out).expect("strings serialize"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROW2_IR: &str = r#"[ [e:title] [e:description [prop:size "small"] ] [e:link] ]"#;

    #[test]
    fn compile_and_errors_carry_codes() {
        assert_eq!(
            compile(ROW2_IR, "webui").unwrap(),
            "description undefined small | link undefined undefined | title undefined undefined"
        );
        assert_eq!(compile("[ [e:title ]", "webui").unwrap_err().code, "SyntaxError");
        assert_eq!(compile(ROW2_IR, "desktop").unwrap_err().code, "InvalidArgument");
        assert_eq!(encode("{").unwrap_err().code, "SchemaViolation");
    }

    #[test]
    fn decode_encode_and_synthesize() {
        let seq = "button 54 33 10 10 | title 20 0 78 4";
        let doc = decode(seq, "webui", 1200.0, 1200.0).unwrap();
        assert_eq!(encode(&doc).unwrap(), seq);
        let rec: Value = serde_json::from_str(&synthesize(&doc, "", 3).unwrap()).unwrap();
        assert_eq!(rec["layout_seq"].as_str().unwrap().matches('|').count(), 1);
        assert_eq!(synthesize(&doc, "{}", 3).unwrap(), synthesize(&doc, "", 3).unwrap());
    }

    #[test]
    fn evaluate_and_accuracy() {
        let doc: Value = serde_json::from_str(&decode("title 20 0 78 4", "webui", 1200.0, 1200.0).unwrap()).unwrap();
        let input = serde_json::json!({"pairs": [{"ir": "[ [e:title [prop:position \"top\"] ] ]", "doc": doc}]});
        let report: Value = serde_json::from_str(&evaluate(&input.to_string()).unwrap()).unwrap();
        assert_eq!(report["type_cons"], 1.0);
        assert_eq!(report["pos_size_cons"], 1.0);
        assert!(report.get("miou").is_none());
        let a = serde_json::json!([ROW2_IR, "[ [e:title] ]"]).to_string();
        let b = serde_json::json!([ROW2_IR, "[ [e:link] ]"]).to_string();
        assert_eq!(ir_accuracy(&a, &b, "webui").unwrap(), 0.5);
    }

    #[test]
    fn place_returns_samples() {
        let out: Vec<String> = serde_json::from_str(&place("title top undefined", "webui", "", None).unwrap()).unwrap();
        assert_eq!(out.len(), PlacerConfig::default().n_samples);
    }
}
