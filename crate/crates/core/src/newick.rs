//! Newick reader and writer for leaf-labelled trees.
//!
//! Leaves must be named by the positive integers `1..=n`. Inner node names
//! are optional, branch lengths and `[...]` comments are skipped. A root
//! with a single child whose name is an integer is read as a leaf, so
//! `(2)1;` is the two-leaf tree rooted at leaf 1.

use thiserror::Error;

use crate::tree::{NodeId, TreeError, TreeTopology};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NewickError {
    #[error("newick syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("leaf at byte {pos} has name {name:?}, expected a positive integer")]
    BadLeafLabel { pos: usize, name: String },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    names: Vec<Option<String>>,
    labels: Vec<Option<usize>>,
    edges: Vec<(NodeId, NodeId)>,
}

fn is_delimiter(b: u8) -> bool {
    matches!(b, b'(' | b')' | b',' | b':' | b';' | b'[' | b']') || b.is_ascii_whitespace()
}

impl<'a> Parser<'a> {
    fn error<T>(&self, msg: impl Into<String>) -> Result<T, NewickError> {
        Err(NewickError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_trivia(&mut self) -> Result<(), NewickError> {
        loop {
            while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.peek() == Some(b'[') {
                let start = self.pos;
                while self.pos < self.text.len() && self.text[self.pos] != b']' {
                    self.pos += 1;
                }
                if self.pos == self.text.len() {
                    self.pos = start;
                    return self.error("unterminated comment");
                }
                self.pos += 1;
            } else {
                return Ok(());
            }
        }
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn new_node(&mut self) -> NodeId {
        self.names.push(None);
        self.labels.push(None);
        NodeId(self.names.len() - 1)
    }

    fn read_name(&mut self) -> Result<Option<(usize, String)>, NewickError> {
        self.skip_trivia()?;
        let start = self.pos;
        while self.pos < self.text.len() && !is_delimiter(self.text[self.pos]) {
            self.pos += 1;
        }
        if self.pos == start {
            return Ok(None);
        }
        let name = std::str::from_utf8(&self.text[start..self.pos])
            .map_err(|_| NewickError::Syntax {
                pos: start,
                msg: "invalid utf-8 in name".into(),
            })?
            .to_string();
        Ok(Some((start, name)))
    }

    fn skip_length(&mut self) -> Result<(), NewickError> {
        self.skip_trivia()?;
        if self.peek() == Some(b':') {
            self.pos += 1;
            self.skip_trivia()?;
            let start = self.pos;
            while self.pos < self.text.len() && !is_delimiter(self.text[self.pos]) {
                self.pos += 1;
            }
            let raw = std::str::from_utf8(&self.text[start..self.pos]).unwrap_or("");
            if raw.parse::<f64>().is_err() {
                self.pos = start;
                return self.error("expected a branch length");
            }
        }
        Ok(())
    }

    fn node(&mut self, parent: Option<NodeId>) -> Result<NodeId, NewickError> {
        self.skip_trivia()?;
        let v = self.new_node();
        if let Some(p) = parent {
            self.edges.push((p, v));
        }
        let mut has_children = false;
        if self.peek() == Some(b'(') {
            has_children = true;
            self.pos += 1;
            loop {
                self.node(Some(v))?;
                self.skip_trivia()?;
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(_) => return self.error("expected ',' or ')'"),
                    None => return self.error("unexpected end of input"),
                }
            }
        }
        let name = self.read_name()?;
        self.skip_length()?;
        let single_child_root = parent.is_none()
            && has_children
            && self.edges.iter().filter(|(p, _)| *p == v).count() == 1;
        match name {
            Some((pos, name)) if !has_children => {
                let label = parse_label(&name).ok_or(NewickError::BadLeafLabel { pos, name })?;
                self.labels[v.0] = Some(label);
            }
            Some((_, name)) if single_child_root && parse_label(&name).is_some() => {
                self.labels[v.0] = parse_label(&name);
            }
            Some((_, name)) => self.names[v.0] = Some(name),
            None if !has_children => return self.error("leaf without a name"),
            None => {}
        }
        Ok(v)
    }
}

fn parse_label(name: &str) -> Option<usize> {
    if !name.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    name.parse::<usize>().ok().filter(|&l| l > 0)
}

/// Parses a Newick string; the outermost node becomes the root.
pub fn parse_newick(text: &str) -> Result<TreeTopology, NewickError> {
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        names: Vec::new(),
        labels: Vec::new(),
        edges: Vec::new(),
    };
    let root = p.node(None)?;
    p.skip_trivia()?;
    if p.peek() != Some(b';') {
        return p.error("expected ';'");
    }
    p.pos += 1;
    p.skip_trivia()?;
    if p.pos != p.text.len() {
        return p.error("trailing input after ';'");
    }
    Ok(TreeTopology::from_parts(p.names, p.labels, &p.edges, root)?)
}

/// Canonical Newick serialization (children ordered by smallest leaf label).
pub fn to_newick(tree: &TreeTopology) -> String {
    tree.to_newick()
}
