//! Offline re-verification of a posted trace.
//!
//! The replay recomputes every member's trade and budget scale from the
//! trace alone and values the firm's trade by enumerating worlds directly,
//! without the world-space factoring the inductor uses.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use super::io::CertificateRow;
use super::scenario::Scenario;
use super::HarnessError;
use crate::inductor::scale_from;
use crate::logic::{Atom, Sentence, TheoryFragment, World};
use crate::pricing::Pricing;
use crate::rational::{format_rational, Rational};
use crate::trading::{instantiate_trade, Holdings, Trade};

/// Enumeration limit per independent block of atoms.
pub const BLOCK_ATOM_LIMIT: usize = 22;

#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub days: u64,
    /// Days whose firm trade was revalued against `D_n`.
    pub replayed: u64,
    pub issues: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// `(min, max)` of `cash + Σ q·⟦w ⊨ φ⟧` over worlds satisfying `f`.
///
/// Atoms are split into blocks that share no sentence; each block is
/// enumerated over all `2^k` assignments. `None` when `f` has no model.
pub fn brute_value_range(
    f: &TheoryFragment,
    cash: &Rational,
    terms: &[(Sentence, Rational)],
) -> Result<Option<(Rational, Rational)>, HarnessError> {
    let mut index: BTreeMap<Atom, usize> = BTreeMap::new();
    let sentences: Vec<&Sentence> = f.iter().chain(terms.iter().map(|(s, _)| s)).collect();
    for s in &sentences {
        for a in s.atoms() {
            let next = index.len();
            index.entry(a).or_insert(next);
        }
    }
    let mut uf = UnionFind((0..index.len()).collect());
    for s in &sentences {
        let ids: Vec<usize> = s.atoms().iter().map(|a| index[a]).collect();
        for w in ids.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    let mut blocks: BTreeMap<usize, Vec<Atom>> = BTreeMap::new();
    for (a, &i) in &index {
        blocks.entry(uf.find(i)).or_default().push(a.clone());
    }

    let (mut lo, mut hi) = (cash.clone(), cash.clone());
    // Sentences without atoms are constant; fold them in directly.
    let empty = World::new();
    for s in f.iter().filter(|s| s.atoms().is_empty()) {
        if !s.eval(&empty)? {
            return Ok(None);
        }
    }
    for (s, q) in terms.iter().filter(|(s, _)| s.atoms().is_empty()) {
        if s.eval(&empty)? {
            lo += q;
            hi += q;
        }
    }
    for atoms in blocks.values() {
        if atoms.len() > BLOCK_ATOM_LIMIT {
            return Err(HarnessError::Config(format!(
                "a block of {} atoms exceeds the enumeration limit {BLOCK_ATOM_LIMIT}",
                atoms.len()
            )));
        }
        let root = uf.find(index[&atoms[0]]);
        let mut in_block = |s: &Sentence| s.atoms().iter().next().is_some_and(|a| uf.find(index[a]) == root);
        let facts: Vec<&Sentence> = f.iter().filter(|s| in_block(s)).collect();
        let block_terms: Vec<&(Sentence, Rational)> = terms.iter().filter(|(s, _)| in_block(s)).collect();
        let mut range: Option<(Rational, Rational)> = None;
        for bits in 0u64..(1u64 << atoms.len()) {
            let w = World::from_pairs(atoms.iter().enumerate().map(|(i, a)| (a.clone(), bits >> i & 1 == 1)));
            let mut ok = true;
            for s in &facts {
                if !s.eval(&w)? {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let mut v = Rational::zero();
            for (s, q) in &block_terms {
                if s.eval(&w)? {
                    v += q;
                }
            }
            range = Some(match range {
                None => (v.clone(), v),
                Some((a, b)) => (a.min(v.clone()), b.max(v)),
            });
        }
        let Some((a, b)) = range else {
            return Ok(None);
        };
        lo += a;
        hi += b;
    }
    Ok(Some((lo, hi)))
}

fn holdings_range(f: &TheoryFragment, h: &Holdings) -> Result<Option<(Rational, Rational)>, HarnessError> {
    let terms: Vec<(Sentence, Rational)> = h.terms().map(|(s, q)| (s.clone(), q.clone())).collect();
    brute_value_range(f, &h.cash, &terms)
}

/// Prices lie in `[0, 1]` and, with a resolution `1/k`, on its grid.
pub fn check_prices(pricings: &[Pricing], resolution: Option<&Rational>, report: &mut CheckReport) {
    let one = Rational::one();
    for (i, p) in pricings.iter().enumerate() {
        for (s, v) in p.iter() {
            if v.is_negative() || v > &one {
                report.issues.push(format!(
                    "day {}: price of `{s}` is {} outside [0, 1]",
                    i + 1,
                    format_rational(v)
                ));
            }
            if let Some(r) = resolution {
                if !(v / r).is_integer() {
                    report.issues.push(format!(
                        "day {}: price of `{s}` is {} off the {} grid",
                        i + 1,
                        format_rational(v),
                        format_rational(r)
                    ));
                }
            }
        }
    }
}

/// Replays `scenario` against `pricings`: recomputes `D_n`, each member's
/// trade and budget scale, and checks that the firm's best plausible
/// value stays within `ε_n`. Certificates, when given, must agree.
pub fn replay(
    scenario: &Scenario,
    pricings: &[Pricing],
    certificates: Option<&[CertificateRow]>,
    report: &mut CheckReport,
) -> Result<(), HarnessError> {
    let pool = &scenario.config.pool;
    let mut holdings = vec![Holdings::new(); pool.len()];
    for n in 1..=pricings.len() as u64 {
        let f = scenario.fragment(pricings, n)?;
        let active = pool.active(n).map_err(|e| HarnessError::Config(e.to_string()))?;
        let wcs: Vec<Option<(Rational, Rational)>> = holdings
            .iter()
            .take(active)
            .map(|h| holdings_range(&f, h))
            .collect::<Result<_, _>>()?;
        if wcs.iter().any(Option::is_none) || brute_value_range(&f, &Rational::zero(), &[])?.is_none() {
            report.issues.push(format!("day {n}: D_n has no plausible world"));
            return Ok(());
        }
        let mut firm = Trade::new();
        let mut scales = vec![Rational::zero(); pool.len()];
        let mut executed = vec![Trade::new(); pool.len()];
        for (i, m) in pool.members.iter().enumerate().take(active) {
            let t = instantiate_trade(&m.trader, pricings, n)?;
            let s = if t.is_empty() {
                Rational::one()
            } else {
                let wc = wcs[i].as_ref().map(|r| r.0.clone()).unwrap_or_default();
                let mut after = holdings[i].clone();
                after.add_scaled(&t, &Rational::one());
                let full = holdings_range(&f, &after)?.map(|r| r.0).unwrap_or_default();
                scale_from(&wc, &full, &m.budget)
            };
            firm.add_scaled(&t, &(&m.weight * &s));
            executed[i] = t.scaled(&s);
            scales[i] = s;
        }
        let terms: Vec<(Sentence, Rational)> = firm.terms().map(|(s, q)| (s.clone(), q.clone())).collect();
        let (_, value) = brute_value_range(&f, &firm.cash, &terms)?.unwrap_or_default();
        let epsilon = scenario.config.epsilon(n);
        if value > epsilon {
            report.issues.push(format!(
                "day {n}: firm trade reaches {} above epsilon {}",
                format_rational(&value),
                format_rational(&epsilon)
            ));
        }
        if let Some(row) = certificates.and_then(|c| c.iter().find(|r| r.day == n)) {
            if row.max_value != value {
                report.issues.push(format!(
                    "day {n}: certificate value {} but replay gives {}",
                    format_rational(&row.max_value),
                    format_rational(&value)
                ));
            }
            if row.scales != scales {
                report
                    .issues
                    .push(format!("day {n}: certificate scales differ from the replay"));
            }
            if row.epsilon != epsilon {
                report
                    .issues
                    .push(format!("day {n}: certificate epsilon differs from the replay"));
            }
        }
        for (h, t) in holdings.iter_mut().zip(&executed) {
            h.add_scaled(t, &Rational::one());
        }
        report.replayed += 1;
    }
    Ok(())
}

/// Full check of a trace file's contents.
pub fn check_trace(
    pricings: &[Pricing],
    scenario: Option<&Scenario>,
    certificates: Option<&[CertificateRow]>,
    resolution: Option<&Rational>,
) -> Result<CheckReport, HarnessError> {
    let mut report = CheckReport {
        days: pricings.len() as u64,
        ..Default::default()
    };
    let resolution = resolution.or(scenario.map(|s| &s.config.resolution));
    check_prices(pricings, resolution, &mut report);
    if let Some(rows) = certificates {
        let days: BTreeSet<u64> = rows.iter().map(|r| r.day).collect();
        for n in 1..=report.days {
            if !days.contains(&n) {
                report.issues.push(format!("day {n}: no certificate"));
            }
        }
        for r in rows {
            if r.max_value > r.epsilon {
                report
                    .issues
                    .push(format!("day {}: certified value exceeds its epsilon", r.day));
            }
        }
    }
    if let Some(s) = scenario {
        replay(s, pricings, certificates, &mut report)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_sentence;
    use crate::rational::{half, int, ratio};

    fn s(t: &str) -> Sentence {
        parse_sentence(t).unwrap()
    }

    #[test]
    fn brute_range_splits_blocks() {
        let f: TheoryFragment = [s("a -> b")].into_iter().collect();
        let terms = vec![(s("a"), int(1)), (s("~b"), int(1)), (s("c"), int(-2))];
        // a and ~b cannot both hold; c is free
        assert_eq!(
            brute_value_range(&f, &half(), &terms).unwrap(),
            Some((ratio(-3, 2), ratio(3, 2)))
        );
        let bad: TheoryFragment = [s("a"), s("~a")].into_iter().collect();
        assert_eq!(brute_value_range(&bad, &int(0), &[]).unwrap(), None);
    }

    #[test]
    fn grid_and_bounds() {
        let p: Pricing = [(s("a"), ratio(3, 2)), (s("b"), ratio(1, 3))].into_iter().collect();
        let mut r = CheckReport::default();
        check_prices(&[p], Some(&ratio(1, 1024)), &mut r);
        // 3/2 is out of range but on the grid; 1/3 is off the grid
        assert_eq!(r.issues.len(), 2);
    }
}
