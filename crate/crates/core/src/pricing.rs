use std::collections::BTreeMap;

use num_traits::Zero;

use crate::logic::Sentence;
use crate::rational::{half, Rational};

/// One day's belief state: finitely many sentence prices, every other
/// sentence priced at 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pricing {
    prices: BTreeMap<Sentence, Rational>,
}

impl Pricing {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, s: &Sentence) -> Rational {
        self.prices.get(s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn lookup(&self, s: &Sentence) -> Option<&Rational> {
        self.prices.get(s)
    }

    pub fn set(&mut self, s: Sentence, p: Rational) {
        self.prices.insert(s, p);
    }

    pub fn contains(&self, s: &Sentence) -> bool {
        self.prices.contains_key(s)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Sentence, &Rational)> {
        self.prices.iter()
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.prices.keys()
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

impl FromIterator<(Sentence, Rational)> for Pricing {
    fn from_iter<I: IntoIterator<Item = (Sentence, Rational)>>(iter: I) -> Self {
        Pricing {
            prices: iter.into_iter().collect(),
        }
    }
}

/// Read access to prices by day: posted days `1..=past.len()` plus an
/// optional in-progress pricing for the current day.
#[derive(Clone, Copy)]
pub struct PriceView<'a> {
    past: &'a [Pricing],
    current: Option<&'a Pricing>,
}

impl<'a> PriceView<'a> {
    /// History only; the current day is `past.len()`.
    pub fn posted(past: &'a [Pricing]) -> Self {
        PriceView { past, current: None }
    }

    /// History plus a candidate pricing for day `past.len() + 1`.
    pub fn with_candidate(past: &'a [Pricing], current: &'a Pricing) -> Self {
        PriceView {
            past,
            current: Some(current),
        }
    }

    pub fn today(&self) -> usize {
        self.past.len() + usize::from(self.current.is_some())
    }

    /// Price on `day`; days before 1 price at 1/2, unposted days at 0.
    pub fn price(&self, day: i64, s: &Sentence) -> Rational {
        if day < 1 {
            return half();
        }
        let d = day as usize;
        if d <= self.past.len() {
            self.past[d - 1].get(s)
        } else if d == self.past.len() + 1 {
            self.current.map(|p| p.get(s)).unwrap_or_else(Rational::zero)
        } else {
            Rational::zero()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn off_support_defaults_to_zero() {
        let mut p = Pricing::new();
        p.set(Sentence::var("a"), ratio(3, 4));
        assert_eq!(p.get(&Sentence::var("a")), ratio(3, 4));
        assert_eq!(p.get(&Sentence::var("b")), Rational::zero());
    }

    #[test]
    fn view_handles_prehistory_and_candidate() {
        let a = Sentence::var("a");
        let day1: Pricing = [(a.clone(), ratio(1, 4))].into_iter().collect();
        let cand: Pricing = [(a.clone(), ratio(3, 4))].into_iter().collect();
        let hist = vec![day1];
        let v = PriceView::with_candidate(&hist, &cand);
        assert_eq!(v.today(), 2);
        assert_eq!(v.price(0, &a), half());
        assert_eq!(v.price(-3, &a), half());
        assert_eq!(v.price(1, &a), ratio(1, 4));
        assert_eq!(v.price(2, &a), ratio(3, 4));
    }
}
