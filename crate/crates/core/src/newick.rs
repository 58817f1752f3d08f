//! Newick parsing and writing.
//!
//! Grammar: `tree := subtree ";"`, `subtree := "(" subtree ("," subtree)* ")"
//! [label] | label`, with optional `:length` suffixes (parsed and discarded)
//! and `[...]` comments (skipped). Labels are unquoted identifiers or
//! single-quoted strings. Multifurcating trees are accepted, and so are
//! unary nodes: rooted trees routinely have them (a chain, or any tree
//! rooted at a leaf of its undirected form).

use thiserror::Error;

use crate::tree::{NodeId, RootedTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at byte {offset}: {message}")]
pub struct NewickError {
    pub offset: usize,
    pub message: String,
}

/// Parse result: the tree plus the original labels, indexed by node id
/// (entry 0 unused). Leaves are assigned ids `1..=L` in order of appearance;
/// internal nodes follow in order of their opening parenthesis.
#[derive(Debug, Clone)]
pub struct ParsedNewick {
    pub tree: RootedTree,
    pub labels: Vec<Option<String>>,
}

impl ParsedNewick {
    /// Id of the node carrying `label`, if any.
    pub fn id_of(&self, label: &str) -> Option<NodeId> {
        self.labels
            .iter()
            .position(|l| l.as_deref() == Some(label))
            .map(|i| i as NodeId)
    }

    /// Display name for a node: its label if present, else `n<id>`.
    pub fn name_of(&self, id: NodeId) -> String {
        match self.labels.get(id as usize).and_then(|l| l.clone()) {
            Some(l) => l,
            None => format!("n{}", id),
        }
    }
}

struct TmpNode {
    label: Option<String>,
    children: Vec<usize>,
    /// Preorder position of the opening parenthesis, for internal id order.
    open_order: usize,
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    nodes: Vec<TmpNode>,
    opens: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, NewickError> {
        Err(NewickError {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn skip_trivia(&mut self) -> Result<(), NewickError> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'[' {
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b']' {
                    self.pos += 1;
                }
                if self.pos == self.bytes.len() {
                    self.pos = start;
                    return self.err("unterminated comment");
                }
                self.pos += 1;
                continue;
            }
            return Ok(());
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn parse_label(&mut self) -> Result<Option<String>, NewickError> {
        self.skip_trivia()?;
        match self.peek() {
            Some(b'\'') => {
                self.pos += 1;
                let mut out = String::new();
                loop {
                    match self.peek() {
                        Some(b'\'') => {
                            // '' escapes a quote inside a quoted label.
                            if self.bytes.get(self.pos + 1) == Some(&b'\'') {
                                out.push('\'');
                                self.pos += 2;
                            } else {
                                self.pos += 1;
                                break;
                            }
                        }
                        Some(c) => {
                            out.push(c as char);
                            self.pos += 1;
                        }
                        None => return self.err("unterminated quoted label"),
                    }
                }
                Ok(Some(out))
            }
            Some(c) if is_label_byte(c) => {
                let start = self.pos;
                while self.peek().is_some_and(is_label_byte) {
                    self.pos += 1;
                }
                Ok(Some(
                    String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned(),
                ))
            }
            _ => Ok(None),
        }
    }

    fn skip_branch_length(&mut self) -> Result<(), NewickError> {
        self.skip_trivia()?;
        if self.peek() == Some(b':') {
            self.pos += 1;
            self.skip_trivia()?;
            let start = self.pos;
            while self
                .peek()
                .is_some_and(|c| c.is_ascii_digit() || matches!(c, b'.' | b'-' | b'+' | b'e' | b'E'))
            {
                self.pos += 1;
            }
            if self.pos == start {
                return self.err("expected a branch length after ':'");
            }
        }
        Ok(())
    }

    /// Iterative recursive-descent: an explicit frame stack keeps deeply
    /// nested inputs (chains written as Newick) off the call stack.
    fn parse_subtree(&mut self) -> Result<usize, NewickError> {
        let mut frames: Vec<(Vec<usize>, usize)> = Vec::new();
        loop {
            self.skip_trivia()?;
            while self.peek() == Some(b'(') {
                frames.push((Vec::new(), self.opens));
                self.opens += 1;
                self.pos += 1;
                self.skip_trivia()?;
            }
            let label = match self.parse_label()? {
                Some(l) => l,
                None => return self.err("expected a leaf label or '('"),
            };
            self.skip_branch_length()?;
            self.nodes.push(TmpNode {
                label: Some(label),
                children: Vec::new(),
                open_order: usize::MAX,
            });
            let mut completed = self.nodes.len() - 1;
            // Attach the completed node, closing frames on ')'.
            loop {
                match frames.last_mut() {
                    None => return Ok(completed),
                    Some((children, _)) => children.push(completed),
                }
                self.skip_trivia()?;
                match self.peek() {
                    Some(b',') => {
                        self.pos += 1;
                        break;
                    }
                    Some(b')') => {
                        self.pos += 1;
                        let (children, open_order) = frames.pop().expect("open frame");
                        let label = self.parse_label()?;
                        self.skip_branch_length()?;
                        self.nodes.push(TmpNode {
                            label,
                            children,
                            open_order,
                        });
                        completed = self.nodes.len() - 1;
                    }
                    Some(_) => return self.err("expected ',' or ')'"),
                    None => return self.err("unbalanced parentheses"),
                }
            }
        }
    }
}

fn is_label_byte(c: u8) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, b'_' | b'.' | b'-' | b'+' | b'|' | b'#' | b'&' | b'*')
}

/// Parse a Newick document into a [`RootedTree`] plus its label map. The
/// degree bound is computed from the tree, never assumed.
pub fn parse_newick(text: &str) -> Result<ParsedNewick, NewickError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
        nodes: Vec::new(),
        opens: 0,
    };
    p.skip_trivia()?;
    if p.pos == p.bytes.len() {
        return p.err("empty input");
    }
    let root_tmp = p.parse_subtree()?;
    p.skip_trivia()?;
    if p.peek() != Some(b';') {
        return p.err("expected ';'");
    }
    p.pos += 1;
    p.skip_trivia()?;
    if p.pos != p.bytes.len() {
        return p.err("trailing input after ';'");
    }

    // Dense ids: leaves first in appearance (arena) order, then internal
    // nodes by opening-parenthesis order.
    let n = p.nodes.len() as u32;
    let mut id_of = vec![0 as NodeId; p.nodes.len()];
    let mut next: NodeId = 1;
    for (i, node) in p.nodes.iter().enumerate() {
        if node.children.is_empty() {
            id_of[i] = next;
            next += 1;
        }
    }
    let mut internals: Vec<usize> = (0..p.nodes.len())
        .filter(|&i| !p.nodes[i].children.is_empty())
        .collect();
    internals.sort_by_key(|&i| p.nodes[i].open_order);
    for i in internals {
        id_of[i] = next;
        next += 1;
    }

    let mut parent = vec![None; n as usize + 1];
    let mut children = vec![Vec::new(); n as usize + 1];
    let mut labels = vec![None; n as usize + 1];
    for (i, node) in p.nodes.iter().enumerate() {
        let id = id_of[i];
        labels[id as usize] = node.label.clone();
        for &c in &node.children {
            parent[id_of[c] as usize] = Some(id);
            children[id as usize].push(id_of[c]);
        }
    }
    let tree = RootedTree::from_parents_ordered(n, id_of[root_tmp], parent, children, None)
        .map_err(|e| NewickError {
            offset: 0,
            message: e.to_string(),
        })?;
    Ok(ParsedNewick { tree, labels })
}

/// Serialize a tree in canonical Newick form: children in stored order, no
/// branch lengths. Labeled nodes keep their labels; unlabeled leaves are
/// written as `n<id>`, unlabeled internal nodes stay anonymous.
pub fn write_newick(tree: &RootedTree, labels: Option<&[Option<String>]>) -> String {
    fn quote_if_needed(label: &str) -> String {
        if !label.is_empty() && label.bytes().all(is_label_byte) {
            label.to_string()
        } else {
            format!("'{}'", label.replace('\'', "''"))
        }
    }
    let emit_label = |v: NodeId, out: &mut String| {
        let label = labels
            .and_then(|ls| ls.get(v as usize))
            .and_then(|l| l.as_deref());
        match label {
            Some(l) => out.push_str(&quote_if_needed(l)),
            None if tree.children(v).is_empty() => {
                out.push('n');
                out.push_str(&v.to_string());
            }
            None => {}
        }
    };

    enum Item {
        Node(NodeId),
        Close(NodeId),
        Sep,
    }
    let mut out = String::new();
    let mut stack = vec![Item::Node(tree.root())];
    while let Some(item) = stack.pop() {
        match item {
            Item::Sep => out.push(','),
            Item::Close(v) => {
                out.push(')');
                emit_label(v, &mut out);
            }
            Item::Node(v) => {
                let kids = tree.children(v);
                if kids.is_empty() {
                    emit_label(v, &mut out);
                } else {
                    out.push('(');
                    stack.push(Item::Close(v));
                    for i in (0..kids.len()).rev() {
                        stack.push(Item::Node(kids[i]));
                        if i > 0 {
                            stack.push(Item::Sep);
                        }
                    }
                }
            }
        }
    }
    out.push(';');
    out
}
