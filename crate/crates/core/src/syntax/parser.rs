// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser for the generic operation form.
//!
//! Types and attribute values are scanned as opaque balanced lexemes; only
//! the operation/region/block skeleton is parsed structurally.

use super::tree::{OwnedNode, Rule, Span, SyntaxTree, TokenKind};

/// Operation nesting limit; deeper input is rejected instead of recursing.
const MAX_NESTING: usize = 96;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at byte {offset}: expected {}", .expected.join(" or "))]
pub struct SyntaxError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
}

type PResult<T> = Result<T, SyntaxError>;

/// Parses generic-syntax MLIR text into a tree rooted at `module-body`.
pub fn parse(text: &str) -> Result<SyntaxTree, SyntaxError> {
    let mut p = Parser { src: text, b: text.as_bytes(), pos: 0, nesting: 0 };
    let root = p.module_body()?;
    Ok(SyntaxTree::from_owned(root, text.to_string()))
}

/// Like [`parse`], but accepts arbitrary bytes.
pub fn parse_bytes(bytes: &[u8]) -> Result<SyntaxTree, SyntaxError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => Err(SyntaxError { offset: e.valid_up_to(), expected: vec!["valid UTF-8"] }),
    }
}

struct Parser<'a> {
    src: &'a str,
    b: &'a [u8],
    pos: usize,
    nesting: usize,
}

fn is_suffix_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, b'_' | b'$' | b'.' | b'-')
}

fn is_bare_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, b'_' | b'$' | b'.')
}

impl<'a> Parser<'a> {
    fn err(&self, expected: &[&'static str]) -> SyntaxError {
        SyntaxError { offset: self.pos, expected: expected.to_vec() }
    }

    fn skip_trivia(&mut self) {
        loop {
            while self.pos < self.b.len() && self.b[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.b[self.pos..].starts_with(b"//") {
                while self.pos < self.b.len() && self.b[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                return;
            }
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_trivia();
        self.b.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8, what: &'static str) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&[what]))
        }
    }

    fn slice(&self, start: usize) -> &'a str {
        &self.src[start..self.pos]
    }

    fn module_body(&mut self) -> PResult<OwnedNode> {
        let mut ops = Vec::new();
        loop {
            match self.peek() {
                None => break,
                Some(b'%') | Some(b'"') => ops.push(self.operation()?),
                Some(_) => return Err(self.err(&["operation", "end of input"])),
            }
        }
        Ok(OwnedNode::rule(Rule::ModuleBody, ops).with_span(Span::new(0, self.b.len())))
    }

    fn operation(&mut self) -> PResult<OwnedNode> {
        self.nesting += 1;
        if self.nesting > MAX_NESTING {
            return Err(self.err(&["shallower operation nesting"]));
        }
        self.skip_trivia();
        let start = self.pos;
        let mut children = Vec::with_capacity(7);

        let results_start = self.pos;
        let mut results = Vec::new();
        if self.peek() == Some(b'%') {
            loop {
                results.push(self.value_id(true)?);
                if !self.eat(b',') {
                    break;
                }
            }
            self.expect(b'=', "`=`")?;
        }
        let results_span = results_span(&results, results_start);
        children.push(OwnedNode::rule(Rule::ResultList, results).with_span(results_span));

        if self.peek() != Some(b'"') {
            return Err(self.err(&["quoted operation name"]));
        }
        let name = self.string_lit()?;
        let name_span = name.span;
        children.push(OwnedNode::rule(Rule::OpName, vec![name]).with_span(name_span));

        self.expect(b'(', "`(`")?;
        let operands_start = self.pos;
        let mut operands = Vec::new();
        if self.peek() != Some(b')') {
            loop {
                let v = self.value_id(false)?;
                let span = v.span;
                operands.push(OwnedNode::rule(Rule::ValueUse, vec![v]).with_span(span));
                if !self.eat(b',') {
                    break;
                }
            }
        }
        self.expect(b')', "`)`")?;
        children.push(OwnedNode::rule(Rule::OperandList, operands).with_span(Span::new(operands_start, self.pos - 1)));

        if self.peek() == Some(b'[') {
            let s = self.pos;
            self.pos += 1;
            let mut succ = Vec::new();
            loop {
                if self.peek() != Some(b'^') {
                    return Err(self.err(&["successor block"]));
                }
                succ.push(self.prefixed_id(b'^', TokenKind::CaretId)?);
                if !self.eat(b',') {
                    break;
                }
            }
            self.expect(b']', "`]`")?;
            children.push(OwnedNode::rule(Rule::SuccessorList, succ).with_span(Span::new(s, self.pos)));
        }

        if self.peek() == Some(b'(') {
            let s = self.pos;
            self.pos += 1;
            let mut regions = Vec::new();
            loop {
                regions.push(self.region()?);
                if !self.eat(b',') {
                    break;
                }
            }
            self.expect(b')', "`)`")?;
            children.push(OwnedNode::rule(Rule::RegionList, regions).with_span(Span::new(s, self.pos)));
        }

        if self.peek() == Some(b'{') {
            if let Some(dict) = self.attr_dict()? {
                children.push(dict);
            }
        }

        self.expect(b':', "`:`")?;
        children.push(self.function_type()?);

        self.nesting -= 1;
        Ok(OwnedNode::rule(Rule::Operation, children).with_span(Span::new(start, self.pos)))
    }

    fn region(&mut self) -> PResult<OwnedNode> {
        self.skip_trivia();
        let start = self.pos;
        self.expect(b'{', "`{`")?;
        let mut blocks = Vec::new();
        match self.peek() {
            Some(b'^') | Some(b'}') => {}
            _ => {
                let s = self.pos;
                let ops = self.block_ops()?;
                let end = ops.last().map_or(s, |o: &OwnedNode| o.span.end);
                blocks.push(OwnedNode::rule(Rule::Block, ops).with_span(Span::new(s, end)));
            }
        }
        while self.peek() == Some(b'^') {
            let s = self.pos;
            let label = self.block_label()?;
            let mut children = vec![label];
            children.extend(self.block_ops()?);
            let end = children.last().map_or(s, |o| o.span.end);
            blocks.push(OwnedNode::rule(Rule::Block, children).with_span(Span::new(s, end)));
        }
        self.expect(b'}', "`}`")?;
        Ok(OwnedNode::rule(Rule::Region, blocks).with_span(Span::new(start, self.pos)))
    }

    fn block_ops(&mut self) -> PResult<Vec<OwnedNode>> {
        let mut ops = Vec::new();
        loop {
            match self.peek() {
                Some(b'^') | Some(b'}') => return Ok(ops),
                Some(b'%') | Some(b'"') => ops.push(self.operation()?),
                _ => return Err(self.err(&["operation", "block label", "`}`"])),
            }
        }
    }

    fn block_label(&mut self) -> PResult<OwnedNode> {
        let start = self.pos;
        let mut children = vec![self.prefixed_id(b'^', TokenKind::CaretId)?];
        if self.eat(b'(') {
            if self.peek() != Some(b')') {
                loop {
                    self.skip_trivia();
                    let s = self.pos;
                    if self.peek() != Some(b'%') {
                        return Err(self.err(&["block argument"]));
                    }
                    let v = self.value_id(false)?;
                    self.expect(b':', "`:`")?;
                    let ty = self.ty()?;
                    children.push(OwnedNode::rule(Rule::BlockArg, vec![v, ty]).with_span(Span::new(s, self.pos)));
                    if !self.eat(b',') {
                        break;
                    }
                }
            }
            self.expect(b')', "`)`")?;
        }
        self.expect(b':', "`:`")?;
        Ok(OwnedNode::rule(Rule::BlockLabel, children).with_span(Span::new(start, self.pos)))
    }

    /// Returns `None` for an empty `{}` dictionary.
    fn attr_dict(&mut self) -> PResult<Option<OwnedNode>> {
        let start = self.pos;
        self.expect(b'{', "`{`")?;
        if self.eat(b'}') {
            return Ok(None);
        }
        let mut entries = Vec::new();
        loop {
            entries.push(self.attr_entry()?);
            if !self.eat(b',') {
                break;
            }
        }
        self.expect(b'}', "`}`")?;
        Ok(Some(OwnedNode::rule(Rule::AttrDict, entries).with_span(Span::new(start, self.pos))))
    }

    fn attr_entry(&mut self) -> PResult<OwnedNode> {
        self.skip_trivia();
        let start = self.pos;
        let name = match self.b.get(self.pos) {
            Some(b'"') => {
                let mut s = self.string_lit()?;
                s.kind = super::NodeKind::Token(TokenKind::BareId);
                s
            }
            Some(c) if c.is_ascii_alphabetic() || *c == b'_' => {
                while self.pos < self.b.len() && (is_bare_char(self.b[self.pos]) || self.b[self.pos] == b'-') {
                    self.pos += 1;
                }
                OwnedNode::token(TokenKind::BareId, self.slice(start)).with_span(Span::new(start, self.pos))
            }
            _ => return Err(self.err(&["attribute name"])),
        };
        let mut children = vec![name];
        if self.eat(b'=') {
            children.push(self.attr_value()?);
            if self.peek() == Some(b':') && self.b.get(self.pos + 1) != Some(&b':') {
                self.pos += 1;
                children.push(self.ty()?);
            }
        }
        Ok(OwnedNode::rule(Rule::AttrEntry, children).with_span(Span::new(start, self.pos)))
    }

    fn attr_value(&mut self) -> PResult<OwnedNode> {
        self.skip_trivia();
        let start = self.pos;
        loop {
            let Some(&c) = self.b.get(self.pos) else {
                return Err(self.err(&["`}`"]));
            };
            match c {
                b',' | b'}' => break,
                b':' if self.b.get(self.pos + 1) != Some(&b':') => break,
                b':' => self.pos += 2,
                b'"' => {
                    self.string_lit()?;
                }
                b'-' if self.b.get(self.pos + 1) == Some(&b'>') => self.pos += 2,
                b'(' | b'[' | b'{' | b'<' => self.skip_bracketed()?,
                b')' | b']' | b'>' => return Err(self.err(&["balanced attribute value"])),
                _ => self.pos += 1,
            }
        }
        let text = self.slice(start).trim_end();
        if text.is_empty() {
            return Err(self.err(&["attribute value"]));
        }
        let end = start + text.len();
        Ok(OwnedNode::token(TokenKind::of_attr_value(text), text).with_span(Span::new(start, end)))
    }

    /// Consumes a bracketed group starting at an opener, honoring nesting,
    /// string literals and `->` arrows.
    fn skip_bracketed(&mut self) -> PResult<()> {
        let mut stack: Vec<u8> = Vec::new();
        loop {
            let Some(&c) = self.b.get(self.pos) else {
                return Err(self.err(&["closing bracket"]));
            };
            match c {
                b'"' => {
                    self.string_lit()?;
                    continue;
                }
                b'-' if self.b.get(self.pos + 1) == Some(&b'>') => {
                    self.pos += 2;
                    continue;
                }
                b'(' => stack.push(b')'),
                b'[' => stack.push(b']'),
                b'{' => stack.push(b'}'),
                b'<' => stack.push(b'>'),
                b')' | b']' | b'}' | b'>' if stack.pop() != Some(c) => {
                    return Err(self.err(&["matching closing bracket"]));
                }
                _ => {}
            }
            self.pos += 1;
            if stack.is_empty() {
                return Ok(());
            }
        }
    }

    fn function_type(&mut self) -> PResult<OwnedNode> {
        self.skip_trivia();
        let start = self.pos;
        self.expect(b'(', "`(`")?;
        let inputs = self.type_list(start + 1, b')')?;
        self.skip_trivia();
        if !self.b[self.pos..].starts_with(b"->") {
            return Err(self.err(&["`->`"]));
        }
        self.pos += 2;
        let results = if self.peek() == Some(b'(') {
            self.pos += 1;
            let s = self.pos;
            self.type_list(s, b')')?
        } else {
            let ty = self.ty()?;
            let span = ty.span;
            OwnedNode::rule(Rule::TypeList, vec![ty]).with_span(span)
        };
        Ok(OwnedNode::rule(Rule::FunctionType, vec![inputs, results]).with_span(Span::new(start, self.pos)))
    }

    /// Parses `type (, type)*` up to and including `close`.
    fn type_list(&mut self, start: usize, close: u8) -> PResult<OwnedNode> {
        let mut types = Vec::new();
        if self.peek() != Some(close) {
            loop {
                types.push(self.ty()?);
                if !self.eat(b',') {
                    break;
                }
            }
        }
        let end = self.pos;
        self.expect(close, "`)`")?;
        Ok(OwnedNode::rule(Rule::TypeList, types).with_span(Span::new(start, end)))
    }

    fn ty(&mut self) -> PResult<OwnedNode> {
        self.skip_trivia();
        let start = self.pos;
        if self.b.get(self.pos) == Some(&b'!') {
            self.pos += 1;
        }
        let ident_start = self.pos;
        match self.b.get(self.pos) {
            Some(c) if c.is_ascii_alphabetic() || *c == b'_' => {}
            _ => return Err(self.err(&["type"])),
        }
        while self.pos < self.b.len() && is_bare_char(self.b[self.pos]) {
            self.pos += 1;
        }
        debug_assert!(self.pos > ident_start);
        if self.b.get(self.pos) == Some(&b'<') {
            self.skip_bracketed()?;
        }
        let span = Span::new(start, self.pos);
        let token = OwnedNode::token(TokenKind::TypeToken, self.slice(start)).with_span(span);
        Ok(OwnedNode::rule(Rule::Type, vec![token]).with_span(span))
    }

    fn value_id(&mut self, result: bool) -> PResult<OwnedNode> {
        self.skip_trivia();
        let start = self.pos;
        if self.b.get(self.pos) != Some(&b'%') {
            return Err(self.err(&["value id"]));
        }
        self.pos += 1;
        let body = self.pos;
        while self.pos < self.b.len() && is_suffix_char(self.b[self.pos]) {
            self.pos += 1;
        }
        if self.pos == body {
            return Err(self.err(&["value name"]));
        }
        let (sep, what) = if result { (b':', "result count") } else { (b'#', "result number") };
        if self.b.get(self.pos) == Some(&sep) && self.b.get(self.pos + 1).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
            while self.pos < self.b.len() && self.b[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        } else if self.b.get(self.pos) == Some(&sep) && !result {
            return Err(self.err(&[what]));
        }
        Ok(OwnedNode::token(TokenKind::ValueId, self.slice(start)).with_span(Span::new(start, self.pos)))
    }

    fn prefixed_id(&mut self, sigil: u8, kind: TokenKind) -> PResult<OwnedNode> {
        self.skip_trivia();
        let start = self.pos;
        if self.b.get(self.pos) != Some(&sigil) {
            return Err(self.err(&["identifier"]));
        }
        self.pos += 1;
        let body = self.pos;
        while self.pos < self.b.len() && is_suffix_char(self.b[self.pos]) {
            self.pos += 1;
        }
        if self.pos == body {
            return Err(self.err(&["identifier"]));
        }
        Ok(OwnedNode::token(kind, self.slice(start)).with_span(Span::new(start, self.pos)))
    }

    fn string_lit(&mut self) -> PResult<OwnedNode> {
        self.skip_trivia();
        let start = self.pos;
        if self.b.get(self.pos) != Some(&b'"') {
            return Err(self.err(&["string literal"]));
        }
        self.pos += 1;
        loop {
            match self.b.get(self.pos) {
                None | Some(b'\n') => {
                    self.pos = self.pos.min(self.b.len());
                    return Err(self.err(&["closing `\"`"]));
                }
                Some(b'\\') => self.pos += 2,
                Some(b'"') => {
                    self.pos += 1;
                    break;
                }
                Some(_) => self.pos += 1,
            }
        }
        Ok(OwnedNode::token(TokenKind::StringLit, self.slice(start)).with_span(Span::new(start, self.pos)))
    }
}

fn results_span(results: &[OwnedNode], at: usize) -> Span {
    match (results.first(), results.last()) {
        (Some(f), Some(l)) => Span::new(f.span.start, l.span.end),
        _ => Span::new(at, at),
    }
}
