//! Traders, trades, holdings, and their valuation over plausible worlds.

pub mod dsl;
pub mod exploit;
pub mod feature;

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

pub use dsl::{load_strategy, parse_strategy, IndexRange, TemplateLine, Trader};
pub use exploit::{
    evaluate_exploitation, exploitation_from_trades, DayValue, ExploitError, ExploitationReport, Verdict,
};
pub use feature::{eval_feature, Feature, FeatureExpr, FeatureTemplate};

use crate::logic::{LogicError, Sentence, TheoryFragment, World, WorldSpace, DEFAULT_WORLD_CAP};
use crate::pricing::{PriceView, Pricing};
use crate::rational::Rational;
use crate::template::TemplateError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TradingError {
    #[error("strategy line {line}: {message}")]
    Strategy { line: usize, message: String },
    #[error("strategy line {line}: price offset {offset} refers to a future day")]
    FutureReference { line: usize, offset: String },
    #[error("strategy line {line}: template size is not polynomially bounded: {message}")]
    Unbounded { line: usize, message: String },
    #[error("unbound index variable `{0}`")]
    UnboundVariable(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("history covers {have} days, day {day} requested")]
    ShortHistory { have: usize, day: u64 },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// A self-financing bundle: shares bought (negative: sold) and the cash paid
/// for them at the execution prices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trade {
    pub shares: BTreeMap<Sentence, Rational>,
    pub cash: Rational,
}

impl Trade {
    pub fn new() -> Self {
        Self::default()
    }

    /// Buys `shares` at `prices`; zero entries are dropped.
    pub fn at_prices(shares: impl IntoIterator<Item = (Sentence, Rational)>, prices: &Pricing) -> Self {
        let mut t = Trade::new();
        for (s, q) in shares {
            if q.is_zero() {
                continue;
            }
            t.cash -= &q * prices.get(&s);
            *t.shares.entry(s).or_insert_with(Rational::zero) += q;
        }
        t.shares.retain(|_, q| !q.is_zero());
        t
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty() && self.cash.is_zero()
    }

    pub fn scaled(&self, k: &Rational) -> Trade {
        if k.is_zero() {
            return Trade::new();
        }
        Trade {
            shares: self.shares.iter().map(|(s, q)| (s.clone(), q * k)).collect(),
            cash: &self.cash * k,
        }
    }

    /// Adds `k · other` into `self`.
    pub fn add_scaled(&mut self, other: &Trade, k: &Rational) {
        if k.is_zero() {
            return;
        }
        for (s, q) in &other.shares {
            *self.shares.entry(s.clone()).or_insert_with(Rational::zero) += q * k;
        }
        self.shares.retain(|_, q| !q.is_zero());
        self.cash += &other.cash * k;
    }

    /// `Σ shares(φ)·(⟦w ⊨ φ⟧ − P(φ))` expressed as cash plus share terms.
    pub fn terms(&self) -> impl Iterator<Item = (&Sentence, &Rational)> {
        self.shares.iter()
    }
}

/// Cumulative position: the componentwise sum of executed trades.
pub type Holdings = Trade;

/// Day-`n` trade of `trader` against `past` (days `1..n-1`) and the
/// `current` day-`n` pricing.
pub fn trade_at(trader: &Trader, past: &[Pricing], current: &Pricing) -> Result<Trade, TradingError> {
    let view = PriceView::with_candidate(past, current);
    let n = view.today() as u64;
    let template = trader.day_template(n)?;
    Ok(Trade::at_prices(
        template.into_iter().map(|(s, e)| {
            let q = e.eval(&view);
            (s, q)
        }),
        current,
    ))
}

/// Day-`n` trade against `history`, which must cover days `1..=n`.
pub fn instantiate_trade(trader: &Trader, history: &[Pricing], n: u64) -> Result<Trade, TradingError> {
    if n == 0 || history.len() < n as usize {
        return Err(TradingError::ShortHistory {
            have: history.len(),
            day: n,
        });
    }
    let n = n as usize;
    trade_at(trader, &history[..n - 1], &history[n - 1])
}

pub fn apply_trade(h: &Holdings, t: &Trade) -> Holdings {
    let mut out = h.clone();
    out.add_scaled(t, &Rational::from_integer(1.into()));
    out
}

/// `cash + Σ shares(φ)·⟦w ⊨ φ⟧`.
pub fn world_value(h: &Holdings, w: &World) -> Result<Rational, LogicError> {
    let mut v = h.cash.clone();
    for (s, q) in &h.shares {
        if s.eval(w)? {
            v += q;
        }
    }
    Ok(v)
}

/// Extrema of [`world_value`] over the worlds consistent with `f`.
pub fn plausible_value_range(h: &Holdings, f: &TheoryFragment) -> Result<(Rational, Rational), LogicError> {
    let space = WorldSpace::build(f, h.shares.keys(), DEFAULT_WORLD_CAP)?;
    space.extrema(&h.cash, h.terms())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_sentence, Atom};
    use crate::rational::{half, int, ratio};

    fn s(t: &str) -> Sentence {
        parse_sentence(t).unwrap()
    }

    fn prices(pairs: &[(&str, Rational)]) -> Pricing {
        pairs.iter().map(|(t, p)| (s(t), p.clone())).collect()
    }

    #[test]
    fn self_financing_examples() {
        let t = Trade::at_prices([(s("phi"), int(2))], &prices(&[("phi", ratio(2, 5))]));
        assert_eq!(t.cash, ratio(-4, 5));
        let t = Trade::at_prices([(s("phi"), int(0))], &prices(&[("phi", ratio(2, 5))]));
        assert!(t.is_empty());
        let p = prices(&[("phi", ratio(3, 5)), ("psi", ratio(1, 5))]);
        let t = Trade::at_prices([(s("phi"), int(1)), (s("psi"), int(-1))], &p);
        assert_eq!(t.cash, ratio(-2, 5));
    }

    #[test]
    fn instantiate_from_strategy() {
        let trader = parse_strategy("phi : 2").unwrap();
        let hist = vec![prices(&[("phi", ratio(2, 5))])];
        let t = instantiate_trade(&trader, &hist, 1).unwrap();
        assert_eq!(t.shares[&s("phi")], int(2));
        assert_eq!(t.cash, ratio(-4, 5));
        assert!(instantiate_trade(&trader, &hist, 2).is_err());
    }

    #[test]
    fn apply_examples() {
        let a = Trade::at_prices([(s("phi"), int(2))], &prices(&[("phi", ratio(2, 5))]));
        let b = Trade {
            shares: [(s("phi"), int(-1))].into_iter().collect(),
            cash: ratio(-2, 5),
        };
        assert_eq!(apply_trade(&Holdings::new(), &a), a);
        assert_eq!(apply_trade(&a, &Trade::new()), a);
        let h = apply_trade(&a, &b);
        assert_eq!(h.cash, ratio(-6, 5));
        assert_eq!(h.shares[&s("phi")], int(1));
    }

    #[test]
    fn world_value_examples() {
        let h = Trade::at_prices([(s("phi"), int(2))], &prices(&[("phi", ratio(2, 5))]));
        let phi = Atom::new("phi").unwrap();
        assert_eq!(
            world_value(&h, &World::from_pairs([(phi.clone(), true)])).unwrap(),
            ratio(6, 5)
        );
        assert_eq!(
            world_value(&h, &World::from_pairs([(phi, false)])).unwrap(),
            ratio(-4, 5)
        );
        assert_eq!(world_value(&Holdings::new(), &World::new()).unwrap(), int(0));
        assert!(world_value(&h, &World::new()).is_err());
    }

    #[test]
    fn plausible_range_examples() {
        let h = Trade::at_prices([(s("phi"), int(1))], &prices(&[("phi", half())]));
        let empty = TheoryFragment::new();
        assert_eq!(plausible_value_range(&h, &empty).unwrap(), (-half(), half()));
        let proved: TheoryFragment = [s("phi")].into_iter().collect();
        assert_eq!(plausible_value_range(&h, &proved).unwrap(), (half(), half()));
        let bad: TheoryFragment = [s("a"), s("~a")].into_iter().collect();
        assert!(plausible_value_range(&h, &bad).is_err());
    }
}
