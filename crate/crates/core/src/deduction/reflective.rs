//! Reflective rules: the deductive process learns facts about the market's
//! own recorded prices, `lag` days after they were posted.

use super::DeductionError;
use crate::logic::{Sentence, TheoryFragment};
use crate::pricing::Pricing;
use crate::rational::Rational;
use crate::template::{bind_n, IndexExpr, SentenceTemplate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interval {
    /// `lo < x < hi`
    Open,
    /// `lo <= x < hi`
    ClosedOpen,
    /// `lo < x <= hi`
    OpenClosed,
    /// `lo <= x <= hi`
    Closed,
}

impl Interval {
    pub fn contains(self, lo: &Rational, hi: &Rational, x: &Rational) -> bool {
        let above = match self {
            Interval::Open | Interval::OpenClosed => x > lo,
            Interval::ClosedOpen | Interval::Closed => x >= lo,
        };
        let below = match self {
            Interval::Open | Interval::ClosedOpen => x < hi,
            Interval::OpenClosed | Interval::Closed => x <= hi,
        };
        above && below
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "open" => Some(Interval::Open),
            "closed_open" => Some(Interval::ClosedOpen),
            "open_closed" => Some(Interval::OpenClosed),
            "closed" => Some(Interval::Closed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ReflectiveKind {
    /// Atom `atom(m)` holds iff the price of `sentence(m)` on day
    /// `price_day(m)` lies in the interval.
    PriceFact {
        sentence: SentenceTemplate,
        lo: Rational,
        hi: Rational,
        interval: Interval,
        price_day: IndexExpr,
        atom: SentenceTemplate,
    },
    /// Atom `atom(m)` holds iff its own price on day `m` is below `threshold`.
    Diagonal {
        atom: SentenceTemplate,
        threshold: Rational,
    },
}

#[derive(Debug, Clone)]
pub struct ReflectiveRule {
    pub kind: ReflectiveKind,
    pub lag: u64,
}

impl ReflectiveRule {
    pub fn diagonal(atom: SentenceTemplate, threshold: Rational) -> Self {
        ReflectiveRule {
            kind: ReflectiveKind::Diagonal { atom, threshold },
            lag: 1,
        }
    }

    /// Price fact about `sentence(m)` on day `m`, with the default atom
    /// family `pr_{m}_<label>`.
    pub fn price_fact(sentence: SentenceTemplate, lo: Rational, hi: Rational) -> Result<Self, DeductionError> {
        let atom = SentenceTemplate::parse(&default_fact_atom(&sentence, &lo, &hi))?;
        Ok(ReflectiveRule {
            kind: ReflectiveKind::PriceFact {
                sentence,
                lo,
                hi,
                interval: Interval::Open,
                price_day: IndexExpr::var("n"),
                atom,
            },
            lag: 1,
        })
    }

    pub fn with_lag(mut self, lag: u64) -> Self {
        self.lag = lag;
        self
    }

    /// The atom template whose instances this rule settles.
    pub fn atom_family(&self) -> &SentenceTemplate {
        match &self.kind {
            ReflectiveKind::PriceFact { atom, .. } | ReflectiveKind::Diagonal { atom, .. } => atom,
        }
    }

    /// Day whose prices decide index `m`.
    pub fn price_day(&self, m: i64) -> Result<i64, DeductionError> {
        Ok(match &self.kind {
            ReflectiveKind::PriceFact { price_day, .. } => price_day.eval(&bind_n(m))?,
            ReflectiveKind::Diagonal { .. } => m,
        })
    }

    fn settle(&self, m: i64, prices: &Pricing) -> Result<Option<Sentence>, DeductionError> {
        let atom = match self.atom_family().at(m)? {
            Some(a) => a,
            None => return Ok(None),
        };
        if atom.as_atom().is_none() {
            return Err(DeductionError::Rule(format!(
                "reflective family must instantiate to an atom, got `{atom}`"
            )));
        }
        let holds = match &self.kind {
            ReflectiveKind::PriceFact {
                sentence,
                lo,
                hi,
                interval,
                ..
            } => {
                let Some(target) = sentence.at(m)? else {
                    return Ok(None);
                };
                interval.contains(lo, hi, &prices.get(&target))
            }
            ReflectiveKind::Diagonal { threshold, .. } => &prices.get(&atom) < threshold,
        };
        Ok(Some(if holds { atom } else { Sentence::not(atom) }))
    }
}

fn rational_tag(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}_{}", r.numer(), r.denom())
    }
}

/// `pr_{n}_<sentence>_<lo>_<hi>` with the sentence text folded to atom
/// characters.
fn default_fact_atom(sentence: &SentenceTemplate, lo: &Rational, hi: &Rational) -> String {
    let mut label = String::new();
    let mut depth = 0;
    for c in sentence.source().chars() {
        match c {
            '{' => {
                depth += 1;
                label.push('i');
            }
            '}' => depth -= 1,
            _ if depth > 0 => {}
            c if c.is_ascii_lowercase() || c.is_ascii_digit() => label.push(c),
            _ => {
                if !label.ends_with('_') {
                    label.push('_');
                }
            }
        }
    }
    let label = label.trim_matches('_');
    format!("pr_{{n}}_{}_{}_{}", label, rational_tag(lo), rational_tag(hi))
}

/// Reflective facts available on day `n`: every rule instance whose price
/// day `d` satisfies `d + lag <= n`. Reads only days `< n` of `history`.
pub fn reflective_extend(
    history: &[Pricing],
    rules: &[ReflectiveRule],
    n: u64,
) -> Result<TheoryFragment, DeductionError> {
    if n == 0 {
        return Err(DeductionError::BadDay(0));
    }
    let mut out = TheoryFragment::new();
    for rule in rules {
        if rule.lag == 0 {
            return Err(DeductionError::Rule("lag must be at least 1".into()));
        }
        for m in 1..=n as i64 {
            let day = rule.price_day(m)?;
            if day < 1 || day + rule.lag as i64 > n as i64 {
                continue;
            }
            let prices = history.get(day as usize - 1).ok_or(DeductionError::ShortHistory {
                have: history.len(),
                need: day as usize,
            })?;
            if let Some(s) = rule.settle(m, prices)? {
                out.insert(s);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_sentence;
    use crate::rational::{half, ratio};

    fn history_with(day: usize, s: &str, p: Rational) -> Vec<Pricing> {
        let mut h = vec![Pricing::new(); day];
        h[day - 1].set(parse_sentence(s).unwrap(), p);
        h
    }

    #[test]
    fn diagonal_below_threshold_is_true() {
        let rule = ReflectiveRule::diagonal(SentenceTemplate::parse("chi_{n}").unwrap(), half());
        let h = history_with(3, "chi_3", ratio(2, 5));
        let f = reflective_extend(&h, &[rule], 4).unwrap();
        assert!(f.contains(&parse_sentence("chi_3").unwrap()));
    }

    #[test]
    fn diagonal_at_threshold_is_false() {
        let rule = ReflectiveRule::diagonal(SentenceTemplate::parse("chi_{n}").unwrap(), half());
        let h = history_with(3, "chi_3", half());
        let f = reflective_extend(&h, &[rule], 4).unwrap();
        assert!(f.contains(&parse_sentence("~chi_3").unwrap()));
        assert!(!f.contains(&parse_sentence("chi_3").unwrap()));
    }

    #[test]
    fn price_fact_outside_band() {
        let rule =
            ReflectiveRule::price_fact(SentenceTemplate::parse("phi").unwrap(), ratio(1, 5), ratio(4, 5)).unwrap();
        let h = history_with(2, "phi", ratio(9, 10));
        let f = reflective_extend(&h, &[rule], 3).unwrap();
        assert!(f.contains(&parse_sentence("~pr_2_phi_1_5_4_5").unwrap()));
        // day 1 price was off-support (0): also outside the band
        assert!(f.contains(&parse_sentence("~pr_1_phi_1_5_4_5").unwrap()));
    }

    #[test]
    fn lag_delays_publication() {
        let rule = ReflectiveRule::diagonal(SentenceTemplate::parse("chi_{n}").unwrap(), half()).with_lag(2);
        let h = history_with(3, "chi_3", ratio(1, 4));
        let f = reflective_extend(&h, std::slice::from_ref(&rule), 4).unwrap();
        assert!(!f.contains(&parse_sentence("chi_3").unwrap()));
        let f = reflective_extend(&h, &[rule], 5);
        // history only covers 3 days, day 3 is enough for n = 5
        assert!(f.unwrap().contains(&parse_sentence("chi_3").unwrap()));
    }

    #[test]
    fn short_history_is_an_error() {
        let rule = ReflectiveRule::diagonal(SentenceTemplate::parse("chi_{n}").unwrap(), half());
        let h = vec![Pricing::new()];
        assert!(matches!(
            reflective_extend(&h, &[rule], 4),
            Err(DeductionError::ShortHistory { have: 1, need: 2 })
        ));
    }

    #[test]
    fn interval_kinds() {
        let (lo, hi) = (ratio(1, 4), ratio(1, 2));
        assert!(!Interval::Open.contains(&lo, &hi, &lo));
        assert!(Interval::ClosedOpen.contains(&lo, &hi, &lo));
        assert!(!Interval::ClosedOpen.contains(&lo, &hi, &hi));
        assert!(Interval::Closed.contains(&lo, &hi, &hi));
        assert!(Interval::OpenClosed.contains(&lo, &hi, &hi));
    }
}
