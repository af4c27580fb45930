//! Bracketed constituency trees and NP extraction.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{NPSpan, ParallelSentence, Side};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leaf {
    pub token: String,
    pub index: usize,
}

/// A constituency tree node. Preterminals carry a `leaf`; every other node
/// carries `children`. Leaf indices run 0.. left to right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTree {
    pub label: String,
    pub children: Vec<ParseTree>,
    pub leaf: Option<Leaf>,
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    next_leaf: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, offset: usize, reason: impl Into<String>) -> Error {
        Error::TreeParse {
            offset,
            reason: reason.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn atom(&mut self) -> &'a str {
        let rest = &self.text[self.pos..];
        let len = rest
            .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
            .unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn node(&mut self) -> Result<ParseTree> {
        let open = self.pos;
        match self.peek() {
            Some('(') => self.pos += 1,
            Some(c) => return Err(self.err(self.pos, format!("expected '(' but found {c:?}"))),
            None => return Err(self.err(self.pos, "unexpected end of input")),
        }
        self.skip_ws();
        let label = match self.peek() {
            Some('(') | Some(')') | None => "",
            Some(_) => self.atom(),
        }
        .to_string();
        let mut children = Vec::new();
        let mut leaf = None;
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Err(self.err(self.pos, "unbalanced brackets: unexpected end of input")),
                Some(')') => {
                    self.pos += 1;
                    break;
                }
                Some('(') => {
                    if leaf.is_some() {
                        return Err(self.err(self.pos, "node mixes a token with subtrees"));
                    }
                    children.push(self.node()?);
                }
                Some(_) => {
                    let at = self.pos;
                    if !children.is_empty() || leaf.is_some() {
                        return Err(self.err(at, "token must be the only child of a preterminal"));
                    }
                    let token = self.atom().to_string();
                    leaf = Some(Leaf {
                        token,
                        index: self.next_leaf,
                    });
                    self.next_leaf += 1;
                }
            }
        }
        if children.is_empty() && leaf.is_none() {
            return Err(self.err(open, "empty constituent"));
        }
        if leaf.is_some() && label.is_empty() {
            return Err(self.err(open, "preterminal without a tag"));
        }
        Ok(ParseTree { label, children, leaf })
    }
}

impl ParseTree {
    /// Parses a single bracketed tree such as `(NP (DT the) (NN dog))`.
    pub fn parse(text: &str) -> Result<ParseTree> {
        let mut p = Parser {
            text,
            pos: 0,
            next_leaf: 0,
        };
        p.skip_ws();
        if p.peek().is_none() {
            return Err(p.err(0, "empty tree text"));
        }
        let tree = p.node()?;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(p.err(p.pos, "trailing input after tree"));
        }
        Ok(tree)
    }

    pub fn is_preterminal(&self) -> bool {
        self.leaf.is_some()
    }

    pub fn leaf_count(&self) -> usize {
        match self.leaf {
            Some(_) => 1,
            None => self.children.iter().map(ParseTree::leaf_count).sum(),
        }
    }

    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Leaf>) {
        match &self.leaf {
            Some(l) => out.push(l),
            None => self.children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    /// Preterminal labels, i.e. the tag sequence the tree encodes.
    pub fn tags(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut Vec::new(), &mut |node, _| {
            if node.is_preterminal() {
                out.push(node.label.as_str());
            }
        });
        out
    }

    /// Half-open leaf range covered by this node.
    pub fn span(&self) -> (usize, usize) {
        match &self.leaf {
            Some(l) => (l.index, l.index + 1),
            None => {
                let first = self.children.first().map(|c| c.span().0).unwrap_or(0);
                let last = self.children.last().map(|c| c.span().1).unwrap_or(first);
                (first, last)
            }
        }
    }

    /// Pre-order traversal passing each node and its child-index path.
    pub fn walk<'a, F: FnMut(&'a ParseTree, &[usize])>(&'a self, path: &mut Vec<usize>, f: &mut F) {
        f(self, path);
        for (i, child) in self.children.iter().enumerate() {
            path.push(i);
            child.walk(path, f);
            path.pop();
        }
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.label)?;
        if let Some(l) = &self.leaf {
            write!(f, " {}", l.token)?;
        }
        for c in &self.children {
            write!(f, " {c}")?;
        }
        f.write_str(")")
    }
}

fn is_np_label(label: &str) -> bool {
    match label.strip_prefix("NP") {
        Some(rest) => rest.is_empty() || rest.starts_with('-') || rest.starts_with('='),
        None => false,
    }
}

fn is_pronoun_tag(side: Side, tag: &str) -> bool {
    match side {
        Side::En => tag == "PRP" || tag == "PRP$",
        Side::Zh => tag == "PN",
    }
}

fn is_proper_tag(side: Side, tag: &str) -> bool {
    match side {
        Side::En => tag == "NNP" || tag == "NNPS",
        Side::Zh => tag == "NR",
    }
}

fn dominates_coordination(node: &ParseTree) -> bool {
    let labels: Vec<&str> = node.children.iter().map(|c| c.label.as_str()).collect();
    labels.iter().enumerate().any(|(i, &l)| {
        l == "CC" && labels[..i].iter().any(|&x| is_np_label(x)) && labels[i + 1..].iter().any(|&x| is_np_label(x))
    })
}

/// Rightmost token in `[start, end)` whose tag begins with `N`, else `end - 1`.
pub fn head_token(start: usize, end: usize, pos: &[String]) -> usize {
    (start..end).rev().find(|&i| pos[i].starts_with('N')).unwrap_or(end - 1)
}

/// Every NP node in the tree as a span, sorted by `(start, -length)`.
///
/// Unary NP chains covering the same tokens collapse to one span (the
/// outermost node's path) with their flags OR-ed together.
pub fn extract_nps(tree: &ParseTree, pos: &[String], side: Side) -> Vec<NPSpan> {
    debug_assert_eq!(tree.leaf_count(), pos.len());
    let mut spans: Vec<NPSpan> = Vec::new();
    tree.walk(&mut Vec::new(), &mut |node, path| {
        if node.is_preterminal() || !is_np_label(&node.label) {
            return;
        }
        let (start, end) = node.span();
        if start >= end {
            return;
        }
        let is_conjunction = dominates_coordination(node);
        if let Some(existing) = spans.iter_mut().find(|s| s.start == start && s.end == end) {
            existing.is_conjunction |= is_conjunction;
            return;
        }
        let tags = &pos[start..end];
        spans.push(NPSpan {
            side,
            start,
            end,
            head: head_token(start, end, pos),
            node_path: path.to_vec(),
            is_pronoun: end - start == 1 && is_pronoun_tag(side, &tags[0]),
            is_conjunction,
            is_proper: tags.iter().any(|t| is_proper_tag(side, t)),
        });
    });
    spans.sort_by(|a, b| a.start.cmp(&b.start).then(b.end.cmp(&a.end)));
    spans
}

/// Both sides' NPs for one sentence pair; one line of the NP file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceNps {
    pub sent_id: String,
    pub en: Vec<NPSpan>,
    pub zh: Vec<NPSpan>,
}

impl SentenceNps {
    pub fn extract(pair: &ParallelSentence) -> Result<Self> {
        let side = |s: Side| -> Result<Vec<NPSpan>> { Ok(extract_nps(&pair.tree(s)?, pair.pos(s), s)) };
        Ok(SentenceNps {
            sent_id: pair.id.clone(),
            en: side(Side::En)?,
            zh: side(Side::Zh)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn parses_minimal_np() {
        let t = ParseTree::parse("(NP (DT the) (NN dog))").unwrap();
        assert_eq!(t.label, "NP");
        let leaves: Vec<_> = t.leaves().iter().map(|l| l.token.as_str()).collect();
        assert_eq!(leaves, ["the", "dog"]);
        assert_eq!(t.leaves()[1].index, 1);
        assert_eq!(t.tags(), ["DT", "NN"]);
    }

    #[test]
    fn dogs_are_intelligent() {
        let t = ParseTree::parse("(ROOT (S (NP (NNS Dogs)) (VP (VBP are) (ADJP (JJ intelligent))) (. .)))").unwrap();
        assert_eq!(t.leaf_count(), 4);
        let nps = extract_nps(&t, &tags("NNS VBP JJ ."), Side::En);
        assert_eq!(nps.len(), 1);
        assert_eq!((nps[0].start, nps[0].end), (0, 1));
    }

    #[test]
    fn unbalanced_reports_end_offset() {
        let text = "(NP (DT the";
        match ParseTree::parse(text).unwrap_err() {
            Error::TreeParse { offset, .. } => assert_eq!(offset, text.len()),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn rejects_empty_constituent_and_trailing_input() {
        assert!(matches!(
            ParseTree::parse("(NP ())"),
            Err(Error::TreeParse { offset: 4, .. })
        ));
        assert!(ParseTree::parse("(NP (NN a)) )").is_err());
        assert!(ParseTree::parse("").is_err());
        assert!(ParseTree::parse("(NP (DT the) dog)").is_err());
    }

    #[test]
    fn prints_canonical_bracketing() {
        let text = "( (S  (NP (DT the)\n (NN dog)) (VP (VBD ran))))";
        let t = ParseTree::parse(text).unwrap();
        let printed = t.to_string();
        assert_eq!(printed, "( (S (NP (DT the) (NN dog)) (VP (VBD ran))))");
        assert_eq!(ParseTree::parse(&printed).unwrap(), t);
    }

    #[test]
    fn nested_possessive() {
        let t = ParseTree::parse("(NP (NP (NNP Lisi) (POS 's)) (NN book))").unwrap();
        let pos = tags("NNP POS NN");
        let nps = extract_nps(&t, &pos, Side::En);
        let spans: Vec<_> = nps.iter().map(|s| (s.start, s.end)).collect();
        assert_eq!(spans, [(0, 3), (0, 2)]);
        assert!(nps[0].is_proper);
        assert_eq!(nps[0].head, 2);
        assert_eq!(nps[1].node_path, [0]);
    }

    #[test]
    fn coordination_flag() {
        let t = ParseTree::parse("(NP (NP (NNP Zhangsan)) (CC and) (NP (NNP Lisi)))").unwrap();
        let nps = extract_nps(&t, &tags("NNP CC NNP"), Side::En);
        assert_eq!(nps.len(), 3);
        assert!(nps[0].is_conjunction);
        assert!(!nps[1].is_conjunction && !nps[2].is_conjunction);
    }

    #[test]
    fn no_np_nodes() {
        let t = ParseTree::parse("(VP (VBD ran) (RB away))").unwrap();
        assert!(extract_nps(&t, &tags("VBD RB"), Side::En).is_empty());
    }

    #[test]
    fn unary_chain_deduplicated() {
        let t = ParseTree::parse("(S (NP (NP (PRP he))) (VP (VBD left)))").unwrap();
        let nps = extract_nps(&t, &tags("PRP VBD"), Side::En);
        assert_eq!(nps.len(), 1);
        assert_eq!(nps[0].node_path, [0]);
        assert!(nps[0].is_pronoun);
    }

    #[test]
    fn pronoun_flag_is_single_token_only() {
        let t = ParseTree::parse("(NP (PRP$ my) (NN mom))").unwrap();
        let nps = extract_nps(&t, &tags("PRP$ NN"), Side::En);
        assert!(!nps[0].is_pronoun);
        let t = ParseTree::parse("(NP (PN 我们))").unwrap();
        assert!(extract_nps(&t, &tags("PN"), Side::Zh)[0].is_pronoun);
    }

    #[test]
    fn function_tags_count_as_np() {
        let t = ParseTree::parse("(IP (NP-SBJ (NR 李四)) (VP (VV 走)))").unwrap();
        let nps = extract_nps(&t, &tags("NR VV"), Side::Zh);
        assert_eq!(nps.len(), 1);
        assert!(nps[0].is_proper);
    }

    #[test]
    fn head_rules() {
        assert_eq!(head_token(0, 3, &tags("DT JJ NN")), 2);
        assert_eq!(head_token(0, 1, &tags("NN VV")), 0);
        assert_eq!(head_token(0, 1, &tags("CD")), 0);
        assert_eq!(head_token(1, 3, &tags("DT CD M")), 2);
        assert_eq!(head_token(0, 4, &tags("CD NNS IN NN")), 3);
    }
}
