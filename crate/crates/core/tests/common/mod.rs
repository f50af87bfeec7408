//! Independent brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use logical_induction::logic::{Atom, Connective, Sentence, TheoryFragment, World};
use logical_induction::rational::{ratio, Rational};
use rand::Rng;

/// Truth value by direct recursion over the tree.
pub fn truth(s: &Sentence, w: &World) -> bool {
    use logical_induction::logic::Node;
    match s.node() {
        Node::Top => true,
        Node::Bottom => false,
        Node::Atom(a) => w.get(a).expect("atom covered"),
        Node::Not(x) => !truth(x, w),
        Node::Binary(c, l, r) => {
            let (l, r) = (truth(l, w), truth(r, w));
            match c {
                Connective::And => l && r,
                Connective::Or => l || r,
                Connective::Implies => !l || r,
                Connective::Iff => l == r,
            }
        }
    }
}

/// Every assignment of `atoms` satisfying all of `f`, in binary-count order.
pub fn brute_worlds(f: &TheoryFragment, atoms: &[Atom]) -> Vec<World> {
    let mut out = Vec::new();
    for bits in 0u64..(1 << atoms.len()) {
        let w = World::from_pairs(atoms.iter().enumerate().map(|(i, a)| (a.clone(), bits >> i & 1 == 1)));
        if f.iter().all(|s| truth(s, &w)) {
            out.push(w);
        }
    }
    out
}

pub fn brute_range(
    f: &TheoryFragment,
    atoms: &[Atom],
    cash: &Rational,
    terms: &[(Sentence, Rational)],
) -> Option<(Rational, Rational)> {
    brute_worlds(f, atoms)
        .iter()
        .map(|w| {
            let mut v = cash.clone();
            for (s, q) in terms {
                if truth(s, w) {
                    v += q;
                }
            }
            v
        })
        .fold(None, |acc, v| match acc {
            None => Some((v.clone(), v)),
            Some((a, b)) => Some((a.min(v.clone()), b.max(v))),
        })
}

pub fn atom_names(k: usize) -> Vec<Atom> {
    (0..k).map(|i| Atom::new(&format!("x{i}")).unwrap()).collect()
}

pub fn random_sentence(rng: &mut impl Rng, atoms: &[Atom], depth: u32) -> Sentence {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..20) {
            0 => Sentence::top(),
            1 => Sentence::bottom(),
            _ => Sentence::atom(atoms[rng.gen_range(0..atoms.len())].clone()),
        };
    }
    let l = random_sentence(rng, atoms, depth - 1);
    match rng.gen_range(0..5) {
        0 => Sentence::not(l),
        1 => Sentence::and(l, random_sentence(rng, atoms, depth - 1)),
        2 => Sentence::or(l, random_sentence(rng, atoms, depth - 1)),
        3 => Sentence::implies(l, random_sentence(rng, atoms, depth - 1)),
        _ => Sentence::iff(l, random_sentence(rng, atoms, depth - 1)),
    }
}

/// A fragment over at most `max_atoms` atoms plus a random position over
/// a few sentences on the same atoms.
pub struct Instance {
    pub atoms: Vec<Atom>,
    pub fragment: TheoryFragment,
    pub cash: Rational,
    pub terms: Vec<(Sentence, Rational)>,
}

pub fn random_instance(rng: &mut impl Rng, max_atoms: usize) -> Instance {
    let k = rng.gen_range(1..=max_atoms);
    let atoms = atom_names(k);
    let fragment: TheoryFragment = (0..rng.gen_range(0..=4))
        .map(|_| random_sentence(rng, &atoms, 3))
        .collect();
    let terms = (0..rng.gen_range(0..=5))
        .map(|_| {
            (
                random_sentence(rng, &atoms, 3),
                ratio(rng.gen_range(-8..=8), rng.gen_range(1..=4)),
            )
        })
        .collect();
    Instance {
        atoms,
        fragment,
        cash: ratio(rng.gen_range(-4..=4), 2),
        terms,
    }
}

/// Atoms actually mentioned, which is the support the engine enumerates.
pub fn support(inst: &Instance) -> BTreeSet<Atom> {
    let mut out: BTreeSet<Atom> = inst.atoms.iter().cloned().collect();
    for (s, _) in &inst.terms {
        out.extend(s.atoms());
    }
    out
}
