use std::collections::BTreeSet;

use layoutir::corpus::{load_layout_jsonl, save_layout_jsonl};
use layoutir::ir::{ElementNode, GroupNode, IrNode};
use layoutir::metrics::{docsim, max_iou};
use layoutir::synth::{discard_elements, stream_rng};
use layoutir::*;
use proptest::prelude::*;

fn vocab(rico: bool) -> &'static TypeVocabulary {
    if rico {
        TypeVocabulary::rico()
    } else {
        TypeVocabulary::webui()
    }
}

fn element(rico: bool, with_repeat: bool) -> impl Strategy<Value = ElementNode> {
    let n = vocab(rico).len();
    (0..n, proptest::option::of(0..4usize), proptest::option::of(0..2usize), proptest::option::of(2..=ir::MAX_REPEAT))
        .prop_map(move |(t, p, s, r)| ElementNode {
            etype: vocab(rico).types()[t].clone(),
            position: p.map(|i| Position::ALL[i]),
            size: s.map(|i| SizeClass::ALL[i]),
            repeat: if with_repeat { r } else { None },
        })
}

fn ir_root(rico: bool) -> impl Strategy<Value = IrRoot> {
    let node = prop_oneof![
        3 => element(rico, true).prop_map(IrNode::Element),
        1 => (1..=ir::MAX_REPEAT, prop::collection::vec(element(rico, false), 1..4))
            .prop_map(|(repeat, items)| IrNode::Group(GroupNode { repeat, items })),
    ];
    prop::collection::vec(node, 1..7).prop_map(|children| IrRoot::new(children).unwrap())
}

fn flat_doc(rico: bool) -> impl Strategy<Value = LayoutDoc> {
    let n = vocab(rico).len();
    (
        200.0..2000.0f64,
        200.0..3000.0f64,
        prop::collection::vec((0..n, 0.0..0.9f64, 0.0..0.9f64, 0.05..1.0f64, 0.05..1.0f64), 1..15),
    )
        .prop_map(move |(w, h, els)| {
            let children = els
                .into_iter()
                .map(|(t, l, tp, fw, fh)| {
                    let bw = (1.0 - l) * fw * w;
                    let bh = (1.0 - tp) * fh * h;
                    ElementTreeNode::typed("n", vocab(rico).types()[t].clone(), BBox::new(l * w, tp * h, bw, bh))
                })
                .collect();
            LayoutDoc {
                id: "p".into(),
                domain: if rico { Domain::Rico } else { Domain::WebUi },
                canvas: Canvas::new(w, h),
                root: ElementTreeNode::new("root", BBox::new(0.0, 0.0, w, h)).with_children(children),
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_parse_identity((rico, ir) in any::<bool>().prop_flat_map(|r| (Just(r), ir_root(r)))) {
        prop_assert_eq!(parse_ir(&print_ir(&ir), vocab(rico)).unwrap(), ir);
    }

    #[test]
    fn constraint_text_round_trip(ir in ir_root(false)) {
        let cs = compile_constraints(&ir);
        let text = cs.to_string();
        let back = parse_constraint_tokens(&text, TypeVocabulary::webui()).unwrap();
        prop_assert_eq!(back.to_string(), text);
        prop_assert_eq!(&back, &cs);
    }

    #[test]
    fn layout_text_and_codec_round_trip(doc in flat_doc(true)) {
        let grid = GridSpec::RICO;
        let seq = encode_layout(&doc, grid, &BTreeSet::new()).unwrap();
        let text = seq.to_string();
        prop_assert_eq!(parse_layout_tokens(&text, TypeVocabulary::rico()).unwrap().to_string(), text.clone());
        let back = decode_layout(&seq, grid, doc.canvas, doc.domain).unwrap();
        // Decoded coordinates sit on bin edges, so re-encoding is exact.
        prop_assert_eq!(encode_layout(&back, grid, &BTreeSet::new()).unwrap().to_string(), text);
    }

    #[test]
    fn jsonl_save_load_identity(docs in prop::collection::vec(flat_doc(false), 1..5)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        save_layout_jsonl(&path, &docs).unwrap();
        let back: Vec<LayoutDoc> = load_layout_jsonl(&path).unwrap().collect::<Result<_, _>>().unwrap();
        prop_assert_eq!(back, docs);
    }

    #[test]
    fn discarding_partitions_indices(n in 0usize..60, r in 0.0..0.99f64, seed in any::<u64>()) {
        let mut rng = stream_rng(seed, "k", "discard");
        let (kept, dropped) = discard_elements(n, r, &mut rng);
        let mut all: Vec<usize> = kept.iter().chain(&dropped).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        if n > 0 {
            prop_assert!(!kept.is_empty());
        }
    }

    #[test]
    fn similarity_bounds(a in flat_doc(false), b in flat_doc(false)) {
        let self_sim = docsim(&a, &a).unwrap();
        prop_assert!(self_sim + 1e-12 >= docsim(&a, &b).unwrap());
        let m = max_iou(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&m));
        prop_assert!((max_iou(&a, &a).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn synthesis_is_seed_deterministic(idx in 0usize..200, seed in any::<u64>()) {
        let doc = gen::generate_doc(Domain::WebUi, 1, idx);
        let p = SynthParams { seed, ..SynthParams::default() };
        prop_assert_eq!(synthesize_ir(&doc, &p).unwrap(), synthesize_ir(&doc, &p).unwrap());
    }
}

#[test]
fn api_matches_library_on_fixtures() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");
    let text = std::fs::read_to_string(format!("{dir}/appendix.jsonl")).unwrap();
    for (i, line) in text.lines().enumerate() {
        let rec = layoutir::corpus::parse_record(line, i + 1).unwrap();
        let ir_text = rec.ir.clone().unwrap();
        let domain = rec.doc.domain.as_str();
        let ir = parse_ir(&ir_text, rec.doc.domain.vocabulary()).unwrap();
        assert_eq!(api::compile(&ir_text, domain).unwrap(), compile_constraints(&ir).to_string());
        let direct = encode_layout(&rec.doc, GridSpec::for_domain(rec.doc.domain), &BTreeSet::new()).unwrap();
        assert_eq!(api::encode(line).unwrap(), direct.to_string());
    }
}
