//! Propositional sentences over named atoms.
//!
//! Sentences are immutable, cheaply clonable trees. Each carries its
//! canonical rendering, which is the identity used for equality, ordering
//! and hashing throughout the engine.

mod parse;
mod worlds;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

pub use parse::parse_sentence;
pub use worlds::{
    is_consistent, plausible_worlds, plausible_worlds_capped, ComponentTerms, Location, WorldEnumerator, WorldSpace,
    DEFAULT_WORLD_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("empty sentence")]
    Empty,
    #[error("syntax error at {position} (found `{found}`): {message}")]
    Syntax {
        position: usize,
        found: String,
        message: String,
    },
    #[error("invalid atom name `{0}`")]
    InvalidAtom(String),
    #[error("atom `{0}` is not covered by the world")]
    UncoveredAtom(Atom),
    #[error("support is missing atom `{0}` used by the fragment")]
    SupportTooSmall(Atom),
    #[error("more than {cap} plausible worlds; enumeration aborted")]
    TooManyWorlds { cap: usize },
    #[error("no plausible world: the fragment is propositionally inconsistent")]
    Inconsistent,
    #[error("sentence `{0}` was not indexed in this world space")]
    NotIndexed(Sentence),
}

/// Atomic sentence symbol, `[a-z][a-z0-9_]*`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(Arc<str>);

impl Atom {
    pub fn new(name: &str) -> Result<Self, LogicError> {
        if is_atom_name(name) {
            Ok(Atom(Arc::from(name)))
        } else {
            Err(LogicError::InvalidAtom(name.to_string()))
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn is_atom_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connective {
    And,
    Or,
    Implies,
    Iff,
}

impl Connective {
    fn symbol(self) -> &'static str {
        match self {
            Connective::And => "&",
            Connective::Or => "|",
            Connective::Implies => "->",
            Connective::Iff => "<->",
        }
    }

    pub fn apply(self, l: bool, r: bool) -> bool {
        match self {
            Connective::And => l && r,
            Connective::Or => l || r,
            Connective::Implies => !l || r,
            Connective::Iff => l == r,
        }
    }
}

#[derive(Debug)]
pub enum Node {
    Top,
    Bottom,
    Atom(Atom),
    Not(Sentence),
    Binary(Connective, Sentence, Sentence),
}

#[derive(Clone)]
pub struct Sentence {
    node: Arc<Node>,
    key: Arc<str>,
}

impl Sentence {
    fn from_node(node: Node) -> Self {
        let key: Arc<str> = match &node {
            Node::Top => Arc::from("T"),
            Node::Bottom => Arc::from("F"),
            Node::Atom(a) => Arc::from(a.name()),
            Node::Not(s) => Arc::from(format!("~{}", s.key)),
            Node::Binary(c, l, r) => Arc::from(format!("({} {} {})", l.key, c.symbol(), r.key)),
        };
        Sentence {
            node: Arc::new(node),
            key,
        }
    }

    pub fn top() -> Self {
        Self::from_node(Node::Top)
    }

    pub fn bottom() -> Self {
        Self::from_node(Node::Bottom)
    }

    pub fn atom(a: Atom) -> Self {
        Self::from_node(Node::Atom(a))
    }

    /// Atom sentence from a name; panics on an invalid name.
    pub fn var(name: &str) -> Self {
        Self::atom(Atom::new(name).expect("valid atom name"))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(s: Sentence) -> Self {
        Self::from_node(Node::Not(s))
    }

    pub fn and(l: Sentence, r: Sentence) -> Self {
        Self::from_node(Node::Binary(Connective::And, l, r))
    }

    pub fn or(l: Sentence, r: Sentence) -> Self {
        Self::from_node(Node::Binary(Connective::Or, l, r))
    }

    pub fn implies(l: Sentence, r: Sentence) -> Self {
        Self::from_node(Node::Binary(Connective::Implies, l, r))
    }

    pub fn iff(l: Sentence, r: Sentence) -> Self {
        Self::from_node(Node::Binary(Connective::Iff, l, r))
    }

    pub fn binary(c: Connective, l: Sentence, r: Sentence) -> Self {
        Self::from_node(Node::Binary(c, l, r))
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    /// Canonical, fully parenthesized rendering.
    pub fn render(&self) -> &str {
        &self.key
    }

    pub fn as_atom(&self) -> Option<&Atom> {
        match &*self.node {
            Node::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// The sentence with one outer negation removed, if it has one.
    pub fn negated_body(&self) -> Option<&Sentence> {
        match &*self.node {
            Node::Not(s) => Some(s),
            _ => None,
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match &*self.node {
            Node::Top | Node::Bottom => {}
            Node::Atom(a) => {
                out.insert(a.clone());
            }
            Node::Not(s) => s.collect_atoms(out),
            Node::Binary(_, l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    pub fn eval(&self, w: &World) -> Result<bool, LogicError> {
        Ok(match &*self.node {
            Node::Top => true,
            Node::Bottom => false,
            Node::Atom(a) => w.get(a).ok_or_else(|| LogicError::UncoveredAtom(a.clone()))?,
            Node::Not(s) => !s.eval(w)?,
            Node::Binary(c, l, r) => c.apply(l.eval(w)?, r.eval(w)?),
        })
    }
}

impl PartialEq for Sentence {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for Sentence {}

impl PartialOrd for Sentence {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Sentence {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key.cmp(&other.key)
    }
}

impl Hash for Sentence {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key.hash(state)
    }
}

impl fmt::Debug for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key)
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key)
    }
}

pub fn eval_sentence(s: &Sentence, w: &World) -> Result<bool, LogicError> {
    s.eval(w)
}

pub fn atoms_of(s: &Sentence) -> BTreeSet<Atom> {
    s.atoms()
}

/// Total truth assignment over a finite atom set.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct World {
    assignment: BTreeMap<Atom, bool>,
}

impl World {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Atom, bool)>>(pairs: I) -> Self {
        World {
            assignment: pairs.into_iter().collect(),
        }
    }

    pub fn set(&mut self, atom: Atom, value: bool) {
        self.assignment.insert(atom, value);
    }

    pub fn get(&self, atom: &Atom) -> Option<bool> {
        self.assignment.get(atom).copied()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.assignment.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, bool)> {
        self.assignment.iter().map(|(a, v)| (a, *v))
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }
}

/// Finite set of sentences with set semantics under canonical rendering.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TheoryFragment {
    sentences: BTreeSet<Sentence>,
}

impl TheoryFragment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, s: Sentence) -> bool {
        self.sentences.insert(s)
    }

    pub fn extend<I: IntoIterator<Item = Sentence>>(&mut self, iter: I) {
        self.sentences.extend(iter)
    }

    pub fn contains(&self, s: &Sentence) -> bool {
        self.sentences.contains(s)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Sentence> {
        self.sentences.iter()
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn is_subset(&self, other: &TheoryFragment) -> bool {
        self.sentences.is_subset(&other.sentences)
    }

    /// First sentence (in canonical order) of `self` missing from `other`.
    pub fn first_missing_from(&self, other: &TheoryFragment) -> Option<&Sentence> {
        self.sentences.iter().find(|s| !other.contains(s))
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for s in &self.sentences {
            s.collect_atoms(&mut out);
        }
        out
    }

    pub fn union(&self, other: &TheoryFragment) -> TheoryFragment {
        TheoryFragment {
            sentences: self.sentences.union(&other.sentences).cloned().collect(),
        }
    }
}

impl FromIterator<Sentence> for TheoryFragment {
    fn from_iter<I: IntoIterator<Item = Sentence>>(iter: I) -> Self {
        TheoryFragment {
            sentences: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a TheoryFragment {
    type Item = &'a Sentence;
    type IntoIter = std::collections::btree_set::Iter<'a, Sentence>;

    fn into_iter(self) -> Self::IntoIter {
        self.sentences.iter()
    }
}
