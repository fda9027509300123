//! Recursive-descent parser for the IR grammar.
//!
//! ```text
//! R       -> [ A+ ]            (a bare single A is also accepted)
//! A       -> Element | Group
//! Element -> [e: Type Prop* ]
//! Group   -> [ group Num [ item Element+ ] ]
//! Prop    -> [prop: position Pvalue] | [prop: size Svalue] | [prop: repeat Nvalue]
//! ```

use super::{
    ElementNode, GroupNode, IrError, IrNode, IrRoot, Position, Prop, PropKind, SizeClass, TypeVocabulary, MAX_REPEAT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok<'a> {
    Open,
    Close,
    Colon,
    Word(&'a str),
    Quoted(&'a str),
    Eof,
}

impl Tok<'_> {
    fn describe(&self) -> String {
        match self {
            Tok::Open => "`[`".into(),
            Tok::Close => "`]`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Word(w) => format!("`{w}`"),
            Tok::Quoted(q) => format!("\"{q}\""),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok<'_>, usize)>, IrError> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'[' => {
                toks.push((Tok::Open, i));
                i += 1;
            }
            b']' => {
                toks.push((Tok::Close, i));
                i += 1;
            }
            b':' => {
                toks.push((Tok::Colon, i));
                i += 1;
            }
            b'"' => {
                let start = i + 1;
                let Some(len) = text[start..].find('"') else {
                    return Err(IrError::Syntax {
                        position: i,
                        expected: vec!["closing `\"`"],
                        found: "end of input".into(),
                    });
                };
                toks.push((Tok::Quoted(&text[start..start + len]), i));
                i = start + len + 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                // Multi-byte UTF-8 sequences never contain ASCII delimiters, so
                // stepping byte-wise keeps `start..i` on char boundaries.
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && !matches!(bytes[i], b'[' | b']' | b':' | b'"')
                {
                    i += 1;
                }
                toks.push((Tok::Word(&text[start..i]), start));
            }
        }
    }
    toks.push((Tok::Eof, text.len()));
    Ok(toks)
}

struct Parser<'a, 'v> {
    toks: Vec<(Tok<'a>, usize)>,
    pos: usize,
    vocab: &'v TypeVocabulary,
}

/// Parses IR text against a domain vocabulary.
pub fn parse_ir(text: &str, vocab: &TypeVocabulary) -> Result<IrRoot, IrError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, vocab };
    let root = p.parse_root()?;
    p.expect(Tok::Eof, "end of input")?;
    root.validate()?;
    Ok(root)
}

impl<'a> Parser<'a, '_> {
    fn peek(&self) -> Tok<'a> {
        self.toks[self.pos].0
    }

    fn peek2(&self) -> Tok<'a> {
        self.toks.get(self.pos + 1).map_or(Tok::Eof, |t| t.0)
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok<'a> {
        let t = self.peek();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&'static str]) -> Result<T, IrError> {
        Err(IrError::Syntax { position: self.offset(), expected: expected.to_vec(), found: self.peek().describe() })
    }

    fn expect(&mut self, tok: Tok<'_>, what: &'static str) -> Result<(), IrError> {
        if self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(&[what])
        }
    }

    fn expect_keyword(&mut self, kw: &'static str) -> Result<(), IrError> {
        match self.peek() {
            Tok::Word(w) if w == kw => {
                self.bump();
                Ok(())
            }
            _ => self.error(&[kw]),
        }
    }

    fn at_element_head(&self) -> bool {
        matches!(self.peek(), Tok::Word("e")) && self.peek2() == Tok::Colon
    }

    fn at_group_head(&self) -> bool {
        matches!(self.peek(), Tok::Word("group"))
    }

    fn parse_root(&mut self) -> Result<IrRoot, IrError> {
        self.expect(Tok::Open, "`[`")?;
        if self.at_element_head() {
            let e = self.parse_element_body(false)?;
            return Ok(IrRoot { children: vec![IrNode::Element(e)] });
        }
        if self.at_group_head() {
            let g = self.parse_group_body()?;
            return Ok(IrRoot { children: vec![IrNode::Group(g)] });
        }
        if self.peek() != Tok::Open {
            return self.error(&["`[`", "`e:`", "`group`"]);
        }
        let mut children = Vec::new();
        while self.peek() == Tok::Open {
            children.push(self.parse_node()?);
        }
        self.expect(Tok::Close, "`]`")?;
        Ok(IrRoot { children })
    }

    fn parse_node(&mut self) -> Result<IrNode, IrError> {
        self.expect(Tok::Open, "`[`")?;
        if self.at_element_head() {
            Ok(IrNode::Element(self.parse_element_body(false)?))
        } else if self.at_group_head() {
            Ok(IrNode::Group(self.parse_group_body()?))
        } else {
            self.error(&["`e:`", "`group`"])
        }
    }

    /// Parses `e: Type Prop* ]`, the opening bracket already consumed.
    fn parse_element_body(&mut self, in_item: bool) -> Result<ElementNode, IrError> {
        self.expect_keyword("e")?;
        self.expect(Tok::Colon, "`:`")?;
        let type_start = self.offset();
        let mut words: Vec<&str> = Vec::new();
        while let Tok::Word(w) = self.peek() {
            words.push(w);
            self.bump();
        }
        if words.is_empty() {
            return self.error(&["element type"]);
        }
        let name = words.join(" ");
        let etype = self.vocab.get(&name).cloned().ok_or(IrError::UnknownType { name, position: type_start })?;
        let mut node = ElementNode::new(etype);
        while self.peek() == Tok::Open {
            let at = self.offset();
            if in_item && matches!(self.peek2(), Tok::Word("group")) {
                return Err(IrError::NestedGroup { position: at });
            }
            let prop = self.parse_prop()?;
            let duplicate = match prop {
                Prop::Position(p) => node.position.replace(p).is_some(),
                Prop::Size(s) => node.size.replace(s).is_some(),
                Prop::Repeat(n) => {
                    if in_item {
                        return Err(IrError::RepeatInItem { position: at });
                    }
                    node.repeat.replace(n).is_some()
                }
            };
            if duplicate {
                return Err(IrError::DuplicateProp { kind: prop.kind(), position: at });
            }
        }
        self.expect(Tok::Close, "`]`")?;
        Ok(node)
    }

    fn parse_prop(&mut self) -> Result<Prop, IrError> {
        self.expect(Tok::Open, "`[`")?;
        self.expect_keyword("prop")?;
        self.expect(Tok::Colon, "`:`")?;
        let kind = match self.peek() {
            Tok::Word("position") => PropKind::Position,
            Tok::Word("size") => PropKind::Size,
            Tok::Word("repeat") => PropKind::Repeat,
            _ => return self.error(&["position", "size", "repeat"]),
        };
        self.bump();
        let value = match self.peek() {
            Tok::Word(v) | Tok::Quoted(v) => v.trim(),
            _ => return self.error(&["property value"]),
        };
        let prop = match kind {
            PropKind::Position => match value.parse::<Position>() {
                Ok(p) => Prop::Position(p),
                Err(()) => return self.error(&["top", "bottom", "left", "right"]),
            },
            PropKind::Size => match value.parse::<SizeClass>() {
                Ok(s) => Prop::Size(s),
                Err(()) => return self.error(&["small", "large"]),
            },
            PropKind::Repeat => match value.parse::<u64>() {
                Ok(n) if n >= 1 && n <= MAX_REPEAT as u64 => Prop::Repeat(n as u32),
                Ok(n) => return Err(IrError::RepeatOutOfRange { value: n }),
                Err(_) => return self.error(&["positive integer"]),
            },
        };
        self.bump();
        self.expect(Tok::Close, "`]`")?;
        Ok(prop)
    }

    /// Parses `group Num [ item Element+ ] ]`, the opening bracket already consumed.
    fn parse_group_body(&mut self) -> Result<GroupNode, IrError> {
        self.expect_keyword("group")?;
        let at = self.offset();
        let repeat = match self.parse_prop()? {
            Prop::Repeat(n) => n,
            _ => {
                return Err(IrError::Syntax {
                    position: at,
                    expected: vec!["repeat property"],
                    found: "another property".into(),
                })
            }
        };
        self.expect(Tok::Open, "`[`")?;
        self.expect_keyword("item")?;
        let mut items = Vec::new();
        while self.peek() == Tok::Open {
            let at = self.offset();
            self.bump();
            if self.at_group_head() {
                return Err(IrError::NestedGroup { position: at });
            }
            if !self.at_element_head() {
                return self.error(&["`e:`"]);
            }
            items.push(self.parse_element_body(true)?);
        }
        if items.is_empty() {
            return self.error(&["`[`"]);
        }
        self.expect(Tok::Close, "`]`")?;
        self.expect(Tok::Close, "`]`")?;
        Ok(GroupNode { repeat, items })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{print_ir, ElementType};

    fn webui() -> &'static TypeVocabulary {
        TypeVocabulary::webui()
    }

    fn ty(name: &str) -> ElementType {
        webui().get(name).or_else(|| TypeVocabulary::rico().get(name)).unwrap().clone()
    }

    #[test]
    fn parses_title_and_repeated_description() {
        let ir =
            parse_ir(r#"[ [e:title [prop:position "top"] ] [e:description [prop:repeat "2"] ] ]"#, webui()).unwrap();
        assert_eq!(
            ir.children,
            vec![
                IrNode::Element(ElementNode::new(ty("title")).with_position(Position::Top)),
                IrNode::Element(ElementNode::new(ty("description")).with_repeat(2)),
            ]
        );
    }

    #[test]
    fn bare_element_is_a_single_child_root() {
        let ir = parse_ir("[e:title]", webui()).unwrap();
        assert_eq!(ir.children, vec![IrNode::Element(ElementNode::new(ty("title")))]);
        let ir = parse_ir(r#"[e:title [prop:position"top"]]"#, webui()).unwrap();
        assert_eq!(ir.children, vec![IrNode::Element(ElementNode::new(ty("title")).with_position(Position::Top))]);
    }

    #[test]
    fn bare_group_without_spaces() {
        let ir = parse_ir(r#"[group [prop:repeat"3"] [item[e:title][e:description]]]"#, webui()).unwrap();
        assert_eq!(
            ir.children,
            vec![IrNode::Group(GroupNode {
                repeat: 3,
                items: vec![ElementNode::new(ty("title")), ElementNode::new(ty("description"))],
            })]
        );
    }

    #[test]
    fn unquoted_values_and_loose_whitespace() {
        let a = parse_ir("[[e:title[prop:position top]]\n\t[e:link]]", webui()).unwrap();
        let b = parse_ir(r#"[ [e:title [prop:position "top"] ] [e:link] ]"#, webui()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multi_word_types() {
        let text = r#"[ [e:image [prop:position "top"] [prop:size "large"] ] [e:text] [e:pager indicator [prop:position "bottom"] ] ]"#;
        let ir = parse_ir(text, TypeVocabulary::rico()).unwrap();
        assert_eq!(print_ir(&ir), text);
    }

    #[test]
    fn trailing_bracket_is_a_syntax_error() {
        let err = parse_ir("[ [e:image] ]]", webui()).unwrap_err();
        match err {
            IrError::Syntax { position, .. } => assert_eq!(position, 13),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn error_kinds() {
        assert!(matches!(
            parse_ir("[ [e:drawer] ]", webui()),
            Err(IrError::UnknownType { ref name, .. }) if name == "drawer"
        ));
        assert!(matches!(
            parse_ir(r#"[ [e:title [prop:size "small"] [prop:size "large"] ] ]"#, webui()),
            Err(IrError::DuplicateProp { kind: PropKind::Size, .. })
        ));
        assert!(matches!(
            parse_ir(r#"[ [group [prop:repeat "2"] [item [group [prop:repeat "2"] [item [e:text] ] ] ] ] ]"#, webui()),
            Err(IrError::NestedGroup { .. })
        ));
        assert!(matches!(
            parse_ir(r#"[ [group [prop:repeat "2"] [item [e:text [prop:repeat "2"] ] ] ] ]"#, webui()),
            Err(IrError::RepeatInItem { .. })
        ));
        assert!(matches!(
            parse_ir(r#"[ [e:text [prop:repeat "0"] ] ]"#, webui()),
            Err(IrError::RepeatOutOfRange { value: 0 })
        ));
        assert!(matches!(
            parse_ir(r#"[ [e:text [prop:repeat "101"] ] ]"#, webui()),
            Err(IrError::RepeatOutOfRange { value: 101 })
        ));
        assert!(matches!(parse_ir(r#"[ [e:text [prop:position "middle"] ] ]"#, webui()), Err(IrError::Syntax { .. })));
        assert!(matches!(parse_ir("[ ]", webui()), Err(IrError::Syntax { .. })));
        assert!(matches!(parse_ir("", webui()), Err(IrError::Syntax { .. })));
        assert!(matches!(parse_ir(r#"[ [e:text [prop:size "small] ] ]"#, webui()), Err(IrError::Syntax { .. })));
        assert!(matches!(
            parse_ir(r#"[ [group [prop:size "small"] [item [e:text] ] ] ]"#, webui()),
            Err(IrError::Syntax { .. })
        ));
    }

    #[test]
    fn syntax_error_reports_expected_set() {
        let err = parse_ir("[ [e:title", webui()).unwrap_err();
        let IrError::Syntax { expected, found, .. } = err else { panic!() };
        assert_eq!(expected, vec!["`]`"]);
        assert_eq!(found, "end of input");
    }

    #[test]
    fn deleting_any_bracket_is_rejected() {
        let text = r#"[ [e:title] [e:button] [group [prop:repeat "5"] [item [e:image [prop:position "bottom"] ] [e:link [prop:position "bottom"] ] ] ] ]"#;
        assert!(parse_ir(text, webui()).is_ok());
        for (i, c) in text.char_indices() {
            if c == '[' || c == ']' {
                let mut mutated = text.to_string();
                mutated.remove(i);
                assert!(parse_ir(&mutated, webui()).is_err(), "accepted after deleting byte {i}: {mutated}");
            }
        }
    }
}
