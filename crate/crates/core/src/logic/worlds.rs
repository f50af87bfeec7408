//! World enumeration: DPLL-style backtracking with unit propagation over
//! arbitrary (non-CNF) sentences, plus a component-decomposed world space
//! used to optimize linear payoffs over all plausible worlds.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::Zero;

use super::{Atom, Connective, LogicError, Node, Sentence, TheoryFragment, World};
use crate::rational::Rational;

pub const DEFAULT_WORLD_CAP: usize = 1 << 20;

#[derive(Debug, Clone)]
enum Compiled {
    Const(bool),
    Var(usize),
    Not(Box<Compiled>),
    Binary(Connective, Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    fn build(s: &Sentence, index: &HashMap<Atom, usize>) -> Compiled {
        match s.node() {
            Node::Top => Compiled::Const(true),
            Node::Bottom => Compiled::Const(false),
            Node::Atom(a) => Compiled::Var(index[a]),
            Node::Not(inner) => Compiled::Not(Box::new(Self::build(inner, index))),
            Node::Binary(c, l, r) => {
                Compiled::Binary(*c, Box::new(Self::build(l, index)), Box::new(Self::build(r, index)))
            }
        }
    }

    /// Three-valued evaluation under a partial assignment.
    fn eval(&self, assign: &[Option<bool>]) -> Option<bool> {
        match self {
            Compiled::Const(b) => Some(*b),
            Compiled::Var(i) => assign[*i],
            Compiled::Not(inner) => inner.eval(assign).map(|b| !b),
            Compiled::Binary(c, l, r) => {
                let lv = l.eval(assign);
                match (c, lv) {
                    (Connective::And, Some(false)) => return Some(false),
                    (Connective::Or, Some(true)) => return Some(true),
                    (Connective::Implies, Some(false)) => return Some(true),
                    _ => {}
                }
                let rv = r.eval(assign);
                match (c, lv, rv) {
                    (_, Some(a), Some(b)) => Some(c.apply(a, b)),
                    (Connective::And, _, Some(false)) => Some(false),
                    (Connective::Or, _, Some(true)) => Some(true),
                    (Connective::Implies, _, Some(true)) => Some(true),
                    _ => None,
                }
            }
        }
    }
}

struct Constraint {
    formula: Compiled,
    vars: Vec<usize>,
}

struct Decision {
    trail_len: usize,
    var: usize,
    value: bool,
}

/// Lazily enumerates every total assignment over `atoms` that satisfies all
/// constraint sentences. Worlds come out in a fixed order (atoms in the
/// given order, `true` branch first).
pub struct WorldEnumerator {
    atoms: Vec<Atom>,
    constraints: Vec<Constraint>,
    watch: Vec<Vec<usize>>,
    assign: Vec<Option<bool>>,
    trail: Vec<usize>,
    stack: Vec<Decision>,
    descending: bool,
    finished: bool,
}

impl WorldEnumerator {
    /// `atoms` must cover every atom of `sentences`.
    pub fn new(atoms: Vec<Atom>, sentences: &[Sentence]) -> Result<Self, LogicError> {
        let index: HashMap<Atom, usize> = atoms.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        let mut watch = vec![Vec::new(); atoms.len()];
        let mut constraints = Vec::with_capacity(sentences.len());
        for s in sentences {
            let mut vars = Vec::new();
            for a in s.atoms() {
                match index.get(&a) {
                    Some(&i) => vars.push(i),
                    None => return Err(LogicError::SupportTooSmall(a)),
                }
            }
            for &v in &vars {
                watch[v].push(constraints.len());
            }
            constraints.push(Constraint {
                formula: Compiled::build(s, &index),
                vars,
            });
        }
        let n = atoms.len();
        let mut e = WorldEnumerator {
            atoms,
            constraints,
            watch,
            assign: vec![None; n],
            trail: Vec::new(),
            stack: Vec::new(),
            descending: true,
            finished: false,
        };
        let all: Vec<usize> = (0..e.constraints.len()).collect();
        if !e.propagate_constraints(all) {
            e.finished = true;
        }
        Ok(e)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    fn set(&mut self, var: usize, value: bool) {
        self.assign[var] = Some(value);
        self.trail.push(var);
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let v = self.trail.pop().expect("trail entry");
            self.assign[v] = None;
        }
    }

    /// Checks the given constraints and forces single-unknown ones;
    /// returns false on conflict.
    fn propagate_constraints(&mut self, mut pending: Vec<usize>) -> bool {
        while let Some(ci) = pending.pop() {
            let c = &self.constraints[ci];
            match c.formula.eval(&self.assign) {
                Some(true) => continue,
                Some(false) => return false,
                None => {}
            }
            let mut unknown = c.vars.iter().filter(|&&v| self.assign[v].is_none());
            let (Some(&u), None) = (unknown.next(), unknown.next()) else {
                continue;
            };
            self.assign[u] = Some(true);
            let with_true = c.formula.eval(&self.assign);
            self.assign[u] = Some(false);
            let with_false = c.formula.eval(&self.assign);
            self.assign[u] = None;
            let forced = match (with_true, with_false) {
                (Some(false), Some(false)) => return false,
                (Some(false), _) => false,
                (_, Some(false)) => true,
                _ => continue,
            };
            self.set(u, forced);
            pending.extend(self.watch[u].iter().copied());
        }
        true
    }

    fn assume(&mut self, var: usize, value: bool) -> bool {
        self.stack.push(Decision {
            trail_len: self.trail.len(),
            var,
            value,
        });
        self.set(var, value);
        let pending = self.watch[var].clone();
        self.propagate_constraints(pending)
    }

    /// Advances to the next satisfying assignment.
    pub fn next_assignment(&mut self) -> Option<Vec<bool>> {
        loop {
            if self.finished {
                return None;
            }
            if self.descending {
                match self.assign.iter().position(Option::is_none) {
                    None => {
                        self.descending = false;
                        return Some(self.assign.iter().map(|v| v.unwrap_or(false)).collect());
                    }
                    Some(var) => {
                        if !self.assume(var, true) {
                            self.descending = false;
                        }
                    }
                }
            } else {
                // backtrack to the most recent decision whose false branch is untried
                loop {
                    let Some(dec) = self.stack.pop() else {
                        self.finished = true;
                        break;
                    };
                    self.undo_to(dec.trail_len);
                    if dec.value && self.assume(dec.var, false) {
                        self.descending = true;
                        break;
                    }
                }
            }
        }
    }

    fn to_world(&self, values: &[bool]) -> World {
        World::from_pairs(self.atoms.iter().cloned().zip(values.iter().copied()))
    }
}

impl Iterator for WorldEnumerator {
    type Item = World;

    fn next(&mut self) -> Option<World> {
        let values = self.next_assignment()?;
        Some(self.to_world(&values))
    }
}

/// Per component: `(slot, coefficient)` pairs of a linear form.
pub type ComponentTerms = BTreeMap<usize, Vec<(usize, Rational)>>;

/// All worlds over `support` satisfying every sentence of `f`.
pub fn plausible_worlds(f: &TheoryFragment, support: &BTreeSet<Atom>) -> Result<Vec<World>, LogicError> {
    plausible_worlds_capped(f, support, DEFAULT_WORLD_CAP)
}

pub fn plausible_worlds_capped(
    f: &TheoryFragment,
    support: &BTreeSet<Atom>,
    cap: usize,
) -> Result<Vec<World>, LogicError> {
    if let Some(missing) = f.atoms().into_iter().find(|a| !support.contains(a)) {
        return Err(LogicError::SupportTooSmall(missing));
    }
    let sentences: Vec<Sentence> = f.iter().cloned().collect();
    let mut e = WorldEnumerator::new(support.iter().cloned().collect(), &sentences)?;
    let mut out = Vec::new();
    while let Some(values) = e.next_assignment() {
        if out.len() == cap {
            return Err(LogicError::TooManyWorlds { cap });
        }
        out.push(e.to_world(&values));
    }
    Ok(out)
}

pub fn is_consistent(f: &TheoryFragment) -> bool {
    WorldSpace::build(f, std::iter::empty(), DEFAULT_WORLD_CAP)
        .map(|ws| !ws.is_empty())
        .unwrap_or(true)
}

/// Where an indexed sentence's truth value lives inside a [`WorldSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// Atom-free sentence with a fixed truth value.
    Fixed(bool),
    Slot {
        component: usize,
        slot: usize,
    },
}

#[derive(Debug, Clone)]
struct Component {
    /// `truth[w][slot]`: truth of the slot sentence in plausible world `w`.
    truth: Vec<Vec<bool>>,
}

/// Plausible worlds of a fragment, factored into independent atom
/// components.
///
/// Atoms are linked when they co-occur in a fragment sentence or an indexed
/// sentence. Plausible worlds are the product of per-component plausible
/// worlds, so the extrema of a linear payoff decompose into per-component
/// extrema. Only components touching indexed sentences keep their worlds.
#[derive(Debug, Clone)]
pub struct WorldSpace {
    components: Vec<Component>,
    index: HashMap<Sentence, Location>,
    inconsistent: bool,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl WorldSpace {
    /// `cap` bounds the number of worlds enumerated per component.
    pub fn build<'a, I>(f: &TheoryFragment, interest: I, cap: usize) -> Result<Self, LogicError>
    where
        I: IntoIterator<Item = &'a Sentence>,
    {
        let interest: BTreeSet<Sentence> = interest.into_iter().cloned().collect();
        let mut atom_ids: BTreeMap<Atom, usize> = BTreeMap::new();
        let mut sentence_atoms: Vec<(Sentence, Vec<usize>)> = Vec::new();
        for s in f.iter().chain(interest.iter()) {
            let ids: Vec<usize> = s
                .atoms()
                .into_iter()
                .map(|a| {
                    let next = atom_ids.len();
                    *atom_ids.entry(a).or_insert(next)
                })
                .collect();
            sentence_atoms.push((s.clone(), ids));
        }
        let mut uf = UnionFind((0..atom_ids.len()).collect());
        for (_, ids) in &sentence_atoms {
            for w in ids.windows(2) {
                uf.union(w[0], w[1]);
            }
        }

        let mut inconsistent = false;
        let mut index = HashMap::new();
        // root atom id -> (fragment sentences, interest sentences)
        let mut groups: BTreeMap<usize, (Vec<Sentence>, Vec<Sentence>)> = BTreeMap::new();
        for (i, (s, ids)) in sentence_atoms.iter().enumerate() {
            let from_fragment = i < f.len();
            match ids.first() {
                None => {
                    let value = s.eval(&World::new())?;
                    if from_fragment {
                        inconsistent |= !value;
                    } else {
                        index.insert(s.clone(), Location::Fixed(value));
                    }
                }
                Some(&id) => {
                    let g = groups.entry(uf.find(id)).or_default();
                    if from_fragment {
                        g.0.push(s.clone());
                    } else {
                        g.1.push(s.clone());
                    }
                }
            }
        }

        let mut atoms_by_root: BTreeMap<usize, Vec<Atom>> = BTreeMap::new();
        for (atom, id) in &atom_ids {
            atoms_by_root.entry(uf.find(*id)).or_default().push(atom.clone());
        }

        let mut components = Vec::new();
        for (root, (constraints, slots)) in groups {
            let atoms = atoms_by_root.remove(&root).unwrap_or_default();
            let mut e = WorldEnumerator::new(atoms, &constraints)?;
            if slots.is_empty() {
                if e.next_assignment().is_none() {
                    inconsistent = true;
                }
                continue;
            }
            let compiled: Vec<(Compiled, usize)> = {
                let idx: HashMap<Atom, usize> = e.atoms().iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
                slots.iter().map(|s| (Compiled::build(s, &idx), 0)).collect()
            };
            let mut truth = Vec::new();
            while let Some(values) = e.next_assignment() {
                if truth.len() == cap {
                    return Err(LogicError::TooManyWorlds { cap });
                }
                let assign: Vec<Option<bool>> = values.into_iter().map(Some).collect();
                truth.push(compiled.iter().map(|(c, _)| c.eval(&assign).unwrap_or(false)).collect());
            }
            if truth.is_empty() {
                inconsistent = true;
            }
            let component = components.len();
            for (slot, s) in slots.into_iter().enumerate() {
                index.insert(s, Location::Slot { component, slot });
            }
            components.push(Component { truth });
        }

        Ok(WorldSpace {
            components,
            index,
            inconsistent,
        })
    }

    /// True when no plausible world exists.
    pub fn is_empty(&self) -> bool {
        self.inconsistent
    }

    pub fn locate(&self, s: &Sentence) -> Option<Location> {
        self.index.get(s).copied()
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn component_world_count(&self, component: usize) -> usize {
        self.components[component].truth.len()
    }

    /// (min, max) over the component's worlds of `Σ coef · [slot true]`.
    pub fn component_range(&self, component: usize, terms: &[(usize, Rational)]) -> (Rational, Rational) {
        let mut lo: Option<Rational> = None;
        let mut hi: Option<Rational> = None;
        for world in &self.components[component].truth {
            let mut v = Rational::zero();
            for (slot, coef) in terms {
                if world[*slot] {
                    v += coef;
                }
            }
            if lo.as_ref().is_none_or(|l| &v < l) {
                lo = Some(v.clone());
            }
            if hi.as_ref().is_none_or(|h| &v > h) {
                hi = Some(v);
            }
        }
        (lo.unwrap_or_else(Rational::zero), hi.unwrap_or_else(Rational::zero))
    }

    /// Groups a linear form by component; atom-free sentences fold into the
    /// returned constant.
    pub fn group<'a, I>(&self, terms: I) -> Result<(Rational, ComponentTerms), LogicError>
    where
        I: IntoIterator<Item = (&'a Sentence, &'a Rational)>,
    {
        let mut constant = Rational::zero();
        let mut grouped: BTreeMap<usize, Vec<(usize, Rational)>> = BTreeMap::new();
        for (s, coef) in terms {
            if coef.is_zero() {
                continue;
            }
            match self.locate(s) {
                None => return Err(LogicError::NotIndexed(s.clone())),
                Some(Location::Fixed(true)) => constant += coef,
                Some(Location::Fixed(false)) => {}
                Some(Location::Slot { component, slot }) => {
                    grouped.entry(component).or_default().push((slot, coef.clone()))
                }
            }
        }
        Ok((constant, grouped))
    }

    /// Extrema of `cash + Σ coef·[w ⊨ s]` over all plausible worlds.
    pub fn extrema<'a, I>(&self, cash: &Rational, terms: I) -> Result<(Rational, Rational), LogicError>
    where
        I: IntoIterator<Item = (&'a Sentence, &'a Rational)>,
    {
        if self.inconsistent {
            return Err(LogicError::Inconsistent);
        }
        let (constant, grouped) = self.group(terms)?;
        let mut lo = cash + &constant;
        let mut hi = lo.clone();
        for (component, ts) in grouped {
            let (l, h) = self.component_range(component, &ts);
            lo += l;
            hi += h;
        }
        Ok((lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_sentence;

    fn frag(texts: &[&str]) -> TheoryFragment {
        texts.iter().map(|t| parse_sentence(t).unwrap()).collect()
    }

    fn support(names: &[&str]) -> BTreeSet<Atom> {
        names.iter().map(|n| Atom::new(n).unwrap()).collect()
    }

    #[test]
    fn consistency_examples() {
        assert!(!is_consistent(&frag(&["a", "~a"])));
        assert!(is_consistent(&frag(&[])));
        assert!(is_consistent(&frag(&["a | b", "~a"])));
        assert!(!is_consistent(&frag(&["F"])));
        assert!(!is_consistent(&frag(&["a & ~a"])));
    }

    #[test]
    fn unit_propagation_example() {
        let ws = plausible_worlds(&frag(&["a | b", "~a"]), &support(&["a", "b"])).unwrap();
        assert_eq!(ws.len(), 1);
        assert_eq!(ws[0].get(&Atom::new("a").unwrap()), Some(false));
        assert_eq!(ws[0].get(&Atom::new("b").unwrap()), Some(true));
    }

    #[test]
    fn free_atom_doubles() {
        let ws = plausible_worlds(&frag(&["a"]), &support(&["a", "b"])).unwrap();
        assert_eq!(ws.len(), 2);
        assert!(ws.iter().all(|w| w.get(&Atom::new("a").unwrap()) == Some(true)));
    }

    #[test]
    fn support_must_cover_fragment() {
        assert_eq!(
            plausible_worlds(&frag(&["a & c"]), &support(&["a"])),
            Err(LogicError::SupportTooSmall(Atom::new("c").unwrap()))
        );
    }

    #[test]
    fn world_cap_is_enforced() {
        let names: Vec<String> = (0..5).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let res = plausible_worlds_capped(&frag(&[]), &support(&refs), 16);
        assert_eq!(res, Err(LogicError::TooManyWorlds { cap: 16 }));
    }

    #[test]
    fn world_space_extrema() {
        let phi = parse_sentence("phi").unwrap();
        let coef = crate::rational::int(1);
        let cash = -crate::rational::half();
        let ws = WorldSpace::build(&frag(&[]), [&phi], DEFAULT_WORLD_CAP).unwrap();
        let (lo, hi) = ws.extrema(&cash, [(&phi, &coef)]).unwrap();
        assert_eq!((lo, hi), (-crate::rational::half(), crate::rational::half()));
        let ws = WorldSpace::build(&frag(&["phi"]), [&phi], DEFAULT_WORLD_CAP).unwrap();
        let (lo, hi) = ws.extrema(&cash, [(&phi, &coef)]).unwrap();
        assert_eq!((lo, hi), (crate::rational::half(), crate::rational::half()));
    }

    #[test]
    fn world_space_flags_inconsistency() {
        let ws = WorldSpace::build(&frag(&["a", "~a", "b"]), [], DEFAULT_WORLD_CAP).unwrap();
        assert!(ws.is_empty());
        let phi = parse_sentence("a").unwrap();
        let ws = WorldSpace::build(&frag(&["a", "~a"]), [&phi], DEFAULT_WORLD_CAP).unwrap();
        assert!(ws.extrema(&Rational::zero(), []).is_err());
    }
}
