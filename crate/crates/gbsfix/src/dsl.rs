//! The `.gbs` file format.
//!
//! ```text
//! # one vertex, one loop: BS(2,3)
//! vertex x
//! loop t: x[2] -- x[3]
//! root x
//! auto phi {
//!   t -> t x^2
//!   inverse {
//!     t -> t x^-2
//!   }
//! }
//! ```
//!
//! `loop t: v[p] -- v[q]` presents ⟨…, x_v, t | x_v^p = t x_v^q t^{-1}, …⟩.
//! Comments run from `#` to end of line. Self-edges must use `loop`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::autos::{AutoError, GeneratorMap};
use crate::graph::{GraphError, LabelledGraph, Presentation, RawEdge};
use crate::words::parse_word;
use std::sync::Arc;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslError {
    #[error("syntax error at line {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("duplicate id '{id}' at line {line}")]
    Duplicate { id: String, line: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GbsEdge {
    pub id: String,
    pub from: String,
    pub label_from: i64,
    pub to: String,
    pub label_to: i64,
    pub is_loop: bool,
}

/// A named automorphism description: generator images and the declared
/// inverse, both as raw word text (resolved against a presentation later).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GbsAuto {
    pub name: String,
    pub images: Vec<(String, String)>,
    pub inverses: Vec<(String, String)>,
}

impl GbsAuto {
    /// Resolves the description into a generator map over `pres`.
    pub fn to_generator_map(&self, pres: &Arc<Presentation>) -> Result<GeneratorMap, AutoError> {
        let mut map = GeneratorMap::new(pres);
        for (gen, word) in &self.images {
            map.set_image(gen, parse_word(word, pres)?)?;
        }
        for (gen, word) in &self.inverses {
            map.set_inverse_image(gen, parse_word(word, pres)?)?;
        }
        Ok(map)
    }
}

/// A parsed `.gbs` document, order-preserving so that print/parse round-trips.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GbsDocument {
    pub vertices: Vec<String>,
    pub edges: Vec<GbsEdge>,
    pub root: Option<String>,
    pub autos: Vec<GbsAuto>,
}

impl GbsDocument {
    pub fn to_graph(&self) -> Result<LabelledGraph, GraphError> {
        LabelledGraph::validate(
            self.vertices.clone(),
            self.edges
                .iter()
                .map(|e| RawEdge {
                    id: e.id.clone(),
                    from: e.from.clone(),
                    label_from: e.label_from,
                    to: e.to.clone(),
                    label_to: e.label_to,
                })
                .collect(),
        )
    }

    /// The root to use: the `root` directive if present, otherwise the
    /// lexicographically least vertex.
    pub fn root_vertex(&self) -> Option<String> {
        self.root
            .clone()
            .or_else(|| self.vertices.iter().min().cloned())
    }

    pub fn auto(&self, name: &str) -> Option<&GbsAuto> {
        self.autos.iter().find(|a| a.name == name)
    }

    /// Renders the document; `parse_gbs ∘ print` is the identity.
    pub fn print(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            writeln!(out, "vertex {v}").unwrap();
        }
        for e in &self.edges {
            let kw = if e.is_loop { "loop" } else { "edge" };
            writeln!(
                out,
                "{kw} {}: {}[{}] -- {}[{}]",
                e.id, e.from, e.label_from, e.to, e.label_to
            )
            .unwrap();
        }
        if let Some(r) = &self.root {
            writeln!(out, "root {r}").unwrap();
        }
        for a in &self.autos {
            writeln!(out, "auto {} {{", a.name).unwrap();
            for (g, w) in &a.images {
                writeln!(out, "  {g} -> {w}").unwrap();
            }
            writeln!(out, "  inverse {{").unwrap();
            for (g, w) in &a.inverses {
                writeln!(out, "    {g} -> {w}").unwrap();
            }
            writeln!(out, "  }}").unwrap();
            writeln!(out, "}}").unwrap();
        }
        out
    }
}

pub fn parse_gbs(text: &str) -> Result<GbsDocument, DslError> {
    let mut doc = GbsDocument::default();
    let mut lines = text.lines().enumerate().peekable();
    while let Some((lineno, raw)) = lines.next() {
        let line = strip_comment(raw);
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut cur = Cursor::new(line, lineno + 1);
        let keyword = cur.ident("a directive")?;
        match keyword.as_str() {
            "vertex" => {
                let id = cur.ident("a vertex id")?;
                cur.end()?;
                check_duplicate(&doc, &id, lineno + 1)?;
                doc.vertices.push(id);
            }
            "root" => {
                let id = cur.ident("a vertex id")?;
                cur.end()?;
                doc.root = Some(id);
            }
            "edge" | "loop" => {
                let is_loop = keyword == "loop";
                let id = cur.ident("an edge id")?;
                cur.expect(':')?;
                let (from, label_from) = cur.labelled_end()?;
                cur.expect('-')?;
                cur.expect('-')?;
                let (to, label_to) = cur.labelled_end()?;
                cur.end()?;
                check_duplicate(&doc, &id, lineno + 1)?;
                if is_loop && from != to {
                    return Err(cur.error("loop endpoints must coincide"));
                }
                if !is_loop && from == to {
                    return Err(cur.error("self-edges must use 'loop'"));
                }
                doc.edges.push(GbsEdge { id, from, label_from, to, label_to, is_loop });
            }
            "auto" => {
                let name = cur.ident("an automorphism name")?;
                cur.expect('{')?;
                cur.end()?;
                if doc.autos.iter().any(|a| a.name == name) {
                    return Err(DslError::Duplicate { id: name, line: lineno + 1 });
                }
                let auto = parse_auto_block(name, &mut lines)?;
                doc.autos.push(auto);
            }
            other => {
                return Err(DslError::Syntax {
                    line: lineno + 1,
                    col: 1,
                    message: format!("unknown directive '{other}'"),
                })
            }
        }
    }
    if doc.vertices.is_empty() {
        return Err(DslError::Syntax {
            line: 1,
            col: 1,
            message: "document declares no vertices".into(),
        });
    }
    Ok(doc)
}

fn parse_auto_block<'a, I>(name: String, lines: &mut I) -> Result<GbsAuto, DslError>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    let mut auto = GbsAuto { name, images: Vec::new(), inverses: Vec::new() };
    let mut in_inverse = false;
    let mut last_line = 0;
    for (lineno, raw) in lines.by_ref() {
        last_line = lineno + 1;
        let line = strip_comment(raw);
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed == "}" {
            if in_inverse {
                in_inverse = false;
                continue;
            }
            return Ok(auto);
        }
        if trimmed == "inverse {" || trimmed == "inverse{" {
            in_inverse = true;
            continue;
        }
        let Some((gen, word)) = trimmed.split_once("->") else {
            return Err(DslError::Syntax {
                line: lineno + 1,
                col: 1,
                message: "expected 'gen -> word', 'inverse {', or '}'".into(),
            });
        };
        let entry = (gen.trim().to_string(), word.trim().to_string());
        if in_inverse {
            auto.inverses.push(entry);
        } else {
            auto.images.push(entry);
        }
    }
    Err(DslError::Syntax {
        line: last_line,
        col: 1,
        message: "unterminated auto block".into(),
    })
}

fn check_duplicate(doc: &GbsDocument, id: &str, line: usize) -> Result<(), DslError> {
    if doc.vertices.iter().any(|v| v == id) || doc.edges.iter().any(|e| e.id == id) {
        return Err(DslError::Duplicate { id: id.to_string(), line });
    }
    Ok(())
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// A character cursor over one line with position-tracked errors.
struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: &'a str, lineno: usize) -> Self {
        Cursor { bytes: line.as_bytes(), pos: 0, line: lineno }
    }

    fn error(&self, message: impl Into<String>) -> DslError {
        DslError::Syntax { line: self.line, col: self.pos + 1, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, DslError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error(format!("expected {what}")));
        }
        Ok(std::str::from_utf8(&self.bytes[start..self.pos]).unwrap().to_string())
    }

    fn integer(&mut self) -> Result<i64, DslError> {
        self.skip_ws();
        let start = self.pos;
        if self.bytes.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse().map_err(|_| self.error("expected an integer label"))
    }

    fn expect(&mut self, c: char) -> Result<(), DslError> {
        self.skip_ws();
        if self.bytes.get(self.pos) == Some(&(c as u8)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    /// Parses `NAME [ INT ]`.
    fn labelled_end(&mut self) -> Result<(String, i64), DslError> {
        let name = self.ident("a vertex id")?;
        self.expect('[')?;
        let label = self.integer()?;
        self.expect(']')?;
        Ok((name, label))
    }

    fn end(&mut self) -> Result<(), DslError> {
        self.skip_ws();
        if self.pos < self.bytes.len() {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bs23() {
        let doc = parse_gbs("vertex v\nloop t: v[2] -- v[3]\n").unwrap();
        assert_eq!(doc.vertices, vec!["v"]);
        assert_eq!(doc.edges.len(), 1);
        let e = &doc.edges[0];
        assert!(e.is_loop);
        assert_eq!((e.label_from, e.label_to), (2, 3));
        let g = doc.to_graph().unwrap();
        assert_eq!(g.betti(), 1);
    }

    #[test]
    fn empty_file_rejected() {
        assert!(matches!(parse_gbs(""), Err(DslError::Syntax { .. })));
        assert!(matches!(parse_gbs("# only a comment\n"), Err(DslError::Syntax { .. })));
    }

    #[test]
    fn self_edge_must_be_loop() {
        let err = parse_gbs("vertex u\nedge e: u[2] -- u[3]\n").unwrap_err();
        assert!(matches!(err, DslError::Syntax { line: 2, .. }));
        let err = parse_gbs("vertex u\nvertex v\nloop e: u[2] -- v[3]\n").unwrap_err();
        assert!(matches!(err, DslError::Syntax { line: 3, .. }));
    }

    #[test]
    fn duplicates_rejected() {
        let err = parse_gbs("vertex v\nvertex v\n").unwrap_err();
        assert_eq!(err, DslError::Duplicate { id: "v".into(), line: 2 });
        let err = parse_gbs("vertex v\nloop v: v[2] -- v[3]\n").unwrap_err();
        assert_eq!(err, DslError::Duplicate { id: "v".into(), line: 2 });
    }

    #[test]
    fn comments_and_blank_lines() {
        let doc = parse_gbs("# a comment\nvertex v # trailing\n\nloop t: v[2] -- v[3]\n").unwrap();
        assert_eq!(doc.vertices, vec!["v"]);
    }

    #[test]
    fn auto_blocks() {
        let text = "vertex x\nloop t: x[2] -- x[4]\nauto phi {\n  t -> t x^2\n  inverse {\n    t -> t x^-2\n  }\n}\n";
        let doc = parse_gbs(text).unwrap();
        let a = doc.auto("phi").unwrap();
        assert_eq!(a.images, vec![("t".to_string(), "t x^2".to_string())]);
        assert_eq!(a.inverses, vec![("t".to_string(), "t x^-2".to_string())]);
        // The description resolves into a valid automorphism.
        let pres = Arc::new(doc.to_graph().unwrap().presentation("x").unwrap());
        let map = a.to_generator_map(&pres).unwrap();
        crate::autos::check_automorphism(map).unwrap();
    }

    #[test]
    fn roundtrip() {
        let text = "vertex x\nvertex y\nedge e: x[2] -- y[3]\nloop t: x[5] -- x[7]\nroot y\nauto phi {\n  t -> t x^2\n  inverse {\n    t -> t x^-2\n  }\n}\n";
        let doc = parse_gbs(text).unwrap();
        let reparsed = parse_gbs(&doc.print()).unwrap();
        assert_eq!(doc, reparsed);
    }

    mod roundtrip_corpus {
        use super::*;
        use proptest::prelude::*;

        fn gen_document() -> impl Strategy<Value = GbsDocument> {
            let vertices = 1..5usize;
            vertices.prop_flat_map(|n| {
                let edge = (0..n, 0..n, -9i64..=9, -9i64..=9);
                let edges = prop::collection::vec(edge, 0..5);
                let root = prop::option::of(0..n);
                let auto_words =
                    prop::collection::vec(("[a-z]{1,3}", "[a-z0-9^ -]{0,8}"), 0..3);
                let autos = prop::collection::vec(auto_words, 0..2);
                (edges, root, autos).prop_map(move |(edges, root, autos)| GbsDocument {
                    vertices: (0..n).map(|i| format!("v{i}")).collect(),
                    edges: edges
                        .into_iter()
                        .enumerate()
                        .map(|(i, (a, b, lf, lt))| GbsEdge {
                            id: format!("e{i}"),
                            from: format!("v{a}"),
                            label_from: if lf == 0 { 1 } else { lf },
                            to: format!("v{b}"),
                            label_to: if lt == 0 { 1 } else { lt },
                            is_loop: a == b,
                        })
                        .collect(),
                    root: root.map(|r| format!("v{r}")),
                    autos: autos
                        .into_iter()
                        .enumerate()
                        .map(|(i, entries)| GbsAuto {
                            name: format!("phi{i}"),
                            images: entries
                                .iter()
                                .enumerate()
                                .map(|(j, (g, w))| (format!("{g}{j}"), w.trim().to_string()))
                                .collect(),
                            inverses: Vec::new(),
                        })
                        .collect(),
                })
            })
        }

        proptest! {
            #[test]
            fn print_then_parse_is_identity(doc in gen_document()) {
                let reparsed = parse_gbs(&doc.print()).unwrap();
                prop_assert_eq!(doc, reparsed);
            }
        }
    }

    #[test]
    fn syntax_positions() {
        let err = parse_gbs("vertex v\nloop t v[2] -- v[3]\n").unwrap_err();
        match err {
            DslError::Syntax { line, col, .. } => {
                assert_eq!(line, 2);
                assert!(col > 1);
            }
            other => panic!("expected Syntax, got {other:?}"),
        }
    }
}
