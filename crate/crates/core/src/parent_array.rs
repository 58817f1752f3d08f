//! Parent-array text format: a `n d root` header followed by one
//! `child parent` line per non-root node, children ascending.

use thiserror::Error;

use crate::tree::{NodeId, RootedTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parent-array format error on line {line}: {message}")]
pub struct ParentArrayError {
    pub line: usize,
    pub message: String,
}

pub fn write_parent_array(t: &RootedTree) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "{} {} {}", t.node_count(), t.degree_bound(), t.root()).unwrap();
    for v in t.nodes() {
        if let Some(p) = t.parent(v) {
            writeln!(out, "{} {}", v, p).unwrap();
        }
    }
    out
}

pub fn parse_parent_array(text: &str) -> Result<RootedTree, ParentArrayError> {
    let err = |line: usize, message: &str| ParentArrayError {
        line,
        message: message.to_string(),
    };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (line_no, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(err(line_no + 1, "header must be `n d root`"));
    }
    let n: u32 = fields[0]
        .parse()
        .map_err(|_| err(line_no + 1, "bad node count"))?;
    let d: u32 = fields[1]
        .parse()
        .map_err(|_| err(line_no + 1, "bad degree bound"))?;
    let root: NodeId = fields[2]
        .parse()
        .map_err(|_| err(line_no + 1, "bad root id"))?;

    let mut parent = vec![None; n as usize + 1];
    for (idx, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err(idx + 1, "expected `child parent`"));
        }
        let c: NodeId = fields[0].parse().map_err(|_| err(idx + 1, "bad child id"))?;
        let p: NodeId = fields[1]
            .parse()
            .map_err(|_| err(idx + 1, "bad parent id"))?;
        if c == 0 || c > n {
            return Err(err(idx + 1, "child id out of range"));
        }
        if parent[c as usize].is_some() {
            return Err(err(idx + 1, "duplicate child"));
        }
        parent[c as usize] = Some(p);
    }
    RootedTree::from_parents(n, root, parent, d).map_err(|e| err(0, &e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::tests::t_ex;

    #[test]
    fn round_trips() {
        let t = t_ex();
        let text = write_parent_array(&t);
        assert!(text.starts_with("7 3 1\n"));
        let back = parse_parent_array(&text).unwrap();
        assert!(t.same_edges(&back));
        assert_eq!(back.degree_bound(), 3);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_parent_array("").is_err());
        assert!(parse_parent_array("3 2\n").is_err());
        assert!(parse_parent_array("3 2 1\n2 1\n4 1\n").is_err());
        assert!(parse_parent_array("3 2 1\n2 1\n2 1\n").is_err());
        // Missing an edge: node 3 unreachable.
        assert!(parse_parent_array("3 2 1\n2 1\n").is_err());
    }
}
