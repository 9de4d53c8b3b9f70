//! AMR graphs and their PENMAN text form.
//!
//! Constants (quoted strings, numbers, polarity markers) become leaf nodes
//! with a synthetic variable and a concept equal to the literal, so every
//! edge target is a node.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Instance,
    /// A literal leaf; `quoted` records whether it was written as a string.
    Constant { quoted: bool },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmrNode {
    pub var: String,
    pub concept: String,
    pub kind: NodeKind,
}

impl AmrNode {
    pub fn instance(var: impl Into<String>, concept: impl Into<String>) -> Self {
        Self { var: var.into(), concept: concept.into(), kind: NodeKind::Instance }
    }

    pub fn constant(var: impl Into<String>, literal: impl Into<String>, quoted: bool) -> Self {
        Self { var: var.into(), concept: literal.into(), kind: NodeKind::Constant { quoted } }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, NodeKind::Constant { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AmrEdge {
    pub source: String,
    /// Relation label including the leading colon, e.g. `:ARG0-of`.
    pub relation: String,
    pub target: String,
}

impl AmrEdge {
    pub fn new(source: impl Into<String>, relation: impl Into<String>, target: impl Into<String>) -> Self {
        Self { source: source.into(), relation: relation.into(), target: target.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("root {0} is not a node")]
    UnknownRoot(String),
    #[error("empty variable name")]
    EmptyVar,
    #[error("node {0} has an empty concept")]
    EmptyConcept(String),
    #[error("duplicate variable {0}")]
    DuplicateVar(String),
    #[error("relation {0:?} must be non-empty and start with ':'")]
    BadRelation(String),
    #[error("edge endpoint {0} is not a node")]
    UnknownEndpoint(String),
    #[error("duplicate edge ({0}, {1}, {2})")]
    DuplicateEdge(String, String, String),
    #[error("node {0} is not reachable from the root")]
    Unreachable(String),
}

/// A rooted, labeled, directed graph for one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmrGraph {
    root: String,
    nodes: BTreeMap<String, AmrNode>,
    edges: Vec<AmrEdge>,
}

impl AmrGraph {
    /// Builds a graph and checks every structural invariant.
    pub fn new(root: impl Into<String>, nodes: Vec<AmrNode>, edges: Vec<AmrEdge>) -> Result<Self, GraphError> {
        let root = root.into();
        let mut map = BTreeMap::new();
        for node in nodes {
            if node.var.is_empty() {
                return Err(GraphError::EmptyVar);
            }
            if node.concept.is_empty() {
                return Err(GraphError::EmptyConcept(node.var));
            }
            if map.contains_key(&node.var) {
                return Err(GraphError::DuplicateVar(node.var));
            }
            map.insert(node.var.clone(), node);
        }
        if !map.contains_key(&root) {
            return Err(GraphError::UnknownRoot(root));
        }
        let mut seen = BTreeSet::new();
        for e in &edges {
            if e.relation.len() < 2 || !e.relation.starts_with(':') {
                return Err(GraphError::BadRelation(e.relation.clone()));
            }
            for end in [&e.source, &e.target] {
                if !map.contains_key(end) {
                    return Err(GraphError::UnknownEndpoint(end.clone()));
                }
            }
            if !seen.insert((&e.source, &e.relation, &e.target)) {
                return Err(GraphError::DuplicateEdge(e.source.clone(), e.relation.clone(), e.target.clone()));
            }
        }
        let graph = Self { root, nodes: map, edges };
        let reached = graph.reachable();
        for node in graph.nodes.values() {
            if reached.contains(node.var.as_str()) {
                continue;
            }
            let isolated = !graph.edges.iter().any(|e| e.source == node.var || e.target == node.var);
            if !(node.is_constant() && isolated) {
                return Err(GraphError::Unreachable(node.var.clone()));
            }
        }
        Ok(graph)
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn node(&self, var: &str) -> Option<&AmrNode> {
        self.nodes.get(var)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.nodes.contains_key(var)
    }

    /// Nodes in variable order.
    pub fn nodes(&self) -> impl Iterator<Item = &AmrNode> {
        self.nodes.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &[AmrEdge] {
        &self.edges
    }

    /// Outgoing edges of `var` ordered by relation label, then target var.
    pub fn outgoing(&self, var: &str) -> Vec<&AmrEdge> {
        let mut out: Vec<&AmrEdge> = self.edges.iter().filter(|e| e.source == var).collect();
        out.sort_by(|a, b| (&a.relation, &a.target).cmp(&(&b.relation, &b.target)));
        out
    }

    /// Incoming edges of `var` ordered by relation label, then source var.
    pub fn incoming(&self, var: &str) -> Vec<&AmrEdge> {
        let mut inc: Vec<&AmrEdge> = self.edges.iter().filter(|e| e.target == var).collect();
        inc.sort_by(|a, b| (&a.relation, &a.source).cmp(&(&b.relation, &b.source)));
        inc
    }

    /// Instance and constant vars in depth-first order from the root,
    /// followed by any unreachable nodes in var order.
    pub fn depth_first(&self) -> Vec<&AmrNode> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut visited = BTreeSet::new();
        self.visit(&self.root, &mut visited, &mut order);
        for node in self.nodes.values() {
            if !visited.contains(node.var.as_str()) {
                order.push(node);
            }
        }
        order
    }

    fn visit<'a>(&'a self, var: &'a str, visited: &mut BTreeSet<&'a str>, order: &mut Vec<&'a AmrNode>) {
        if !visited.insert(var) {
            return;
        }
        if let Some(node) = self.nodes.get(var) {
            order.push(node);
        }
        for e in self.outgoing(var) {
            self.visit(&e.target, visited, order);
        }
    }

    fn reachable(&self) -> BTreeSet<&str> {
        let mut seen = BTreeSet::new();
        let mut stack = alloc::vec![self.root.as_str()];
        while let Some(v) = stack.pop() {
            if seen.insert(v) {
                stack.extend(self.edges.iter().filter(|e| e.source == v).map(|e| e.target.as_str()));
            }
        }
        seen
    }

    /// Structural equality that ignores the synthetic vars of constants.
    ///
    /// Instance nodes must agree on var and concept; constant leaves are
    /// compared as a multiset of `(source, relation, literal, quoted)`.
    pub fn same_structure(&self, other: &AmrGraph) -> bool {
        fn signature(g: &AmrGraph) -> (BTreeSet<(String, String)>, BTreeSet<AmrEdge>, Vec<(String, String, String, NodeKind)>) {
            let instances = g
                .nodes
                .values()
                .filter(|n| !n.is_constant())
                .map(|n| (n.var.clone(), n.concept.clone()))
                .collect();
            let mut links = BTreeSet::new();
            let mut constants = Vec::new();
            for e in &g.edges {
                let target = &g.nodes[&e.target];
                if target.is_constant() {
                    constants.push((e.source.clone(), e.relation.clone(), target.concept.clone(), target.kind.clone()));
                } else {
                    links.insert(e.clone());
                }
            }
            for n in g.nodes.values().filter(|n| n.is_constant()) {
                if !g.edges.iter().any(|e| e.target == n.var) {
                    constants.push((String::new(), String::new(), n.concept.clone(), n.kind.clone()));
                }
            }
            constants.sort();
            (instances, links, constants)
        }
        self.root == other.root && signature(self) == signature(other)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    EmptyInput,
    UnbalancedParenthesis,
    MissingSlash,
    ExpectedVariable,
    ExpectedConcept,
    MissingTarget,
    UnterminatedString,
    UnexpectedChar(char),
    DuplicateVariable(String),
    DuplicateEdge,
    DanglingReference(String),
}

impl core::fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::EmptyInput => f.write_str("empty input"),
            Self::UnbalancedParenthesis => f.write_str("unbalanced parenthesis"),
            Self::MissingSlash => f.write_str("missing '/'"),
            Self::ExpectedVariable => f.write_str("expected variable"),
            Self::ExpectedConcept => f.write_str("expected concept"),
            Self::MissingTarget => f.write_str("missing relation target"),
            Self::UnterminatedString => f.write_str("unterminated string"),
            Self::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            Self::DuplicateVariable(v) => write!(f, "duplicate variable {v}"),
            Self::DuplicateEdge => f.write_str("duplicate edge"),
            Self::DanglingReference(v) => write!(f, "dangling reference {v}"),
        }
    }
}

/// PENMAN syntax error at a byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

enum PendingTarget {
    Var(String),
    Quoted(String),
    Bare(String),
}

struct PendingEdge {
    source: String,
    relation: String,
    target: PendingTarget,
    offset: usize,
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    nodes: Vec<AmrNode>,
    defined: BTreeSet<String>,
    edges: Vec<PendingEdge>,
}

fn is_delim(b: u8) -> bool {
    b.is_ascii_whitespace() || matches!(b, b'(' | b')' | b'"' | b'/' | b':')
}

impl<'a> Parser<'a> {
    fn err(&self, kind: ParseErrorKind, offset: usize) -> ParseError {
        ParseError { kind, offset }
    }

    fn eof(&self) -> ParseError {
        self.err(ParseErrorKind::UnbalancedParenthesis, self.bytes.len())
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn token(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.bytes.len() && !is_delim(self.bytes[self.pos]) {
            self.pos += 1;
        }
        &self.text[start..self.pos]
    }

    fn unexpected(&self) -> ParseError {
        let c = self.text[self.pos..].chars().next().unwrap_or('?');
        self.err(ParseErrorKind::UnexpectedChar(c), self.pos)
    }

    /// Parses `(var / concept ...)` starting at an opening parenthesis.
    fn node(&mut self) -> Result<String, ParseError> {
        self.pos += 1;
        self.skip_ws();
        let var_at = self.pos;
        let var = self.token();
        if var.is_empty() {
            return Err(if self.peek().is_none() { self.eof() } else { self.err(ParseErrorKind::ExpectedVariable, var_at) });
        }
        if !self.defined.insert(var.to_string()) {
            return Err(self.err(ParseErrorKind::DuplicateVariable(var.to_string()), var_at));
        }
        self.skip_ws();
        match self.peek() {
            None => return Err(self.eof()),
            Some(b'/') => self.pos += 1,
            Some(_) => return Err(self.err(ParseErrorKind::MissingSlash, self.pos)),
        }
        self.skip_ws();
        let concept_at = self.pos;
        let concept = self.token();
        if concept.is_empty() {
            return Err(if self.peek().is_none() { self.eof() } else { self.err(ParseErrorKind::ExpectedConcept, concept_at) });
        }
        self.nodes.push(AmrNode::instance(var, concept));
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Err(self.eof()),
                Some(b')') => {
                    self.pos += 1;
                    return Ok(var.to_string());
                }
                Some(b':') => {
                    let rel_at = self.pos;
                    self.pos += 1;
                    let label = self.token();
                    if label.is_empty() {
                        return Err(if self.peek().is_none() { self.eof() } else { self.unexpected() });
                    }
                    let relation = format!(":{label}");
                    self.skip_ws();
                    let target = match self.peek() {
                        None => return Err(self.eof()),
                        Some(b'(') => PendingTarget::Var(self.node()?),
                        Some(b'"') => PendingTarget::Quoted(self.string()?),
                        Some(_) => {
                            let tok = self.token();
                            if tok.is_empty() {
                                return Err(self.err(ParseErrorKind::MissingTarget, self.pos));
                            }
                            PendingTarget::Bare(tok.to_string())
                        }
                    };
                    self.edges.push(PendingEdge { source: var.to_string(), relation, target, offset: rel_at });
                }
                Some(_) => return Err(self.unexpected()),
            }
        }
    }

    fn string(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        let mut chars = self.text[self.pos..].char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, esc)) => out.push(esc),
                    None => break,
                },
                _ => out.push(c),
            }
        }
        Err(self.err(ParseErrorKind::UnterminatedString, start))
    }
}

fn is_bare_constant(tok: &str) -> bool {
    tok == "-" || tok == "+" || (tok.parse::<f64>().is_ok() && tok.bytes().any(|b| b.is_ascii_digit()))
}

/// Parses a single PENMAN expression.
///
/// ```
/// let g = eex_core::amr::parse_penman("(d / dispatch-01 :ARG0 (c / China))").unwrap();
/// assert_eq!(g.root(), "d");
/// assert_eq!(g.edges().len(), 1);
/// ```
pub fn parse_penman(text: &str) -> Result<AmrGraph, ParseError> {
    let mut p = Parser {
        text,
        bytes: text.as_bytes(),
        pos: 0,
        nodes: Vec::new(),
        defined: BTreeSet::new(),
        edges: Vec::new(),
    };
    p.skip_ws();
    match p.peek() {
        None => return Err(p.err(ParseErrorKind::EmptyInput, p.pos)),
        Some(b'(') => {}
        Some(b')') => return Err(p.err(ParseErrorKind::UnbalancedParenthesis, p.pos)),
        Some(_) => return Err(p.unexpected()),
    }
    let root = p.node()?;
    p.skip_ws();
    match p.peek() {
        None => {}
        Some(b')') => return Err(p.err(ParseErrorKind::UnbalancedParenthesis, p.pos)),
        Some(_) => return Err(p.unexpected()),
    }

    let Parser { mut nodes, defined, edges: pending, .. } = p;
    let mut next_const = 0usize;
    let mut fresh_var = |defined: &BTreeSet<String>| loop {
        let v = format!("_c{next_const}");
        next_const += 1;
        if !defined.contains(&v) {
            return v;
        }
    };
    let mut edges = Vec::with_capacity(pending.len());
    let mut seen = BTreeSet::new();
    for pe in pending {
        let target = match pe.target {
            PendingTarget::Var(v) => v,
            PendingTarget::Bare(tok) if defined.contains(&tok) => tok,
            PendingTarget::Bare(tok) if is_bare_constant(&tok) => {
                let v = fresh_var(&defined);
                nodes.push(AmrNode::constant(v.clone(), tok, false));
                v
            }
            PendingTarget::Bare(tok) => {
                return Err(ParseError { kind: ParseErrorKind::DanglingReference(tok), offset: pe.offset });
            }
            PendingTarget::Quoted(lit) => {
                let v = fresh_var(&defined);
                nodes.push(AmrNode::constant(v.clone(), lit, true));
                v
            }
        };
        if !seen.insert((pe.source.clone(), pe.relation.clone(), target.clone())) {
            return Err(ParseError { kind: ParseErrorKind::DuplicateEdge, offset: pe.offset });
        }
        edges.push(AmrEdge { source: pe.source, relation: pe.relation, target });
    }
    // The parser only produces connected trees plus re-entrancies, so the
    // invariants hold by construction.
    Ok(AmrGraph { root, nodes: nodes.into_iter().map(|n| (n.var.clone(), n)).collect(), edges })
}

/// Canonical PENMAN: depth-first from the root, children ordered by
/// relation label then target var, each node defined on first visit.
pub fn serialize_penman(graph: &AmrGraph) -> String {
    let mut out = String::new();
    let mut defined = BTreeSet::new();
    write_node(graph, graph.root(), &mut defined, &mut out);
    out
}

fn write_node<'a>(graph: &'a AmrGraph, var: &'a str, defined: &mut BTreeSet<&'a str>, out: &mut String) {
    defined.insert(var);
    let node = &graph.nodes[var];
    let _ = write!(out, "({} / {}", node.var, node.concept);
    for e in graph.outgoing(var) {
        out.push(' ');
        out.push_str(&e.relation);
        out.push(' ');
        let target = &graph.nodes[&e.target];
        match target.kind {
            NodeKind::Constant { quoted: true } => write_quoted(&target.concept, out),
            NodeKind::Constant { quoted: false } => out.push_str(&target.concept),
            NodeKind::Instance if defined.contains(e.target.as_str()) => out.push_str(&e.target),
            NodeKind::Instance => write_node(graph, &e.target, defined, out),
        }
    }
    out.push(')');
}

fn write_quoted(literal: &str, out: &mut String) {
    out.push('"');
    for c in literal.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}
