//! Stock traders. Each one is generated as strategy text and parsed, so
//! anything built here can also be written by hand.

use crate::rational::{format_rational, ratio, Rational};
use crate::trading::{parse_strategy, Trader, TradingError};

fn r(x: &Rational) -> String {
    format_rational(x)
}

/// Rewrites every `n` inside the `{...}` holes of a family template to
/// `(n-k)`, so `t_{2*n}` becomes `t_{2*(n-k)}`.
pub fn shift_family(family: &str) -> String {
    let mut out = String::new();
    let mut depth = 0;
    let chars: Vec<char> = family.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            'n' if depth > 0 => {
                let word = |j: Option<&char>| j.is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_');
                let before = i.checked_sub(1).and_then(|j| chars.get(j));
                if !word(before) && !word(chars.get(i + 1)) {
                    out.push_str("(n-k)");
                    continue;
                }
            }
            _ => {}
        }
        out.push(c);
    }
    out
}

/// Multiplies a feature by 0 before day `from` and 1 from then on.
fn gated(feature: String, from_day: Option<u64>) -> String {
    match from_day {
        Some(d) if d > 1 => format!("clamp(n - {}, 0, 1) * {feature}", d - 1),
        _ => feature,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamTrader {
    /// Sentence family, e.g. `t_{n}`.
    pub family: String,
    /// Price the trader pushes toward.
    pub target: Rational,
    pub slope: Rational,
    /// Also trades the previous `lookback` members of the family.
    pub lookback: u64,
    pub from_day: Option<u64>,
}

impl StreamTrader {
    pub fn new(family: &str, target: Rational) -> Self {
        StreamTrader {
            family: family.to_string(),
            target,
            slope: Rational::from_integer(1.into()),
            lookback: 0,
            from_day: None,
        }
    }

    fn text(&self, name: &str, buy: bool) -> String {
        let (sentence, range) = if self.lookback > 0 {
            (shift_family(&self.family), format!(" for k in 0..={}", self.lookback))
        } else {
            (self.family.clone(), String::new())
        };
        let (lo, hi, body) = if buy {
            (
                "0",
                "1",
                format!("{} * ({} - price(\"{sentence}\", 0))", r(&self.slope), r(&self.target)),
            )
        } else {
            (
                "-1",
                "0",
                format!("{} * ({} - price(\"{sentence}\", 0))", r(&self.slope), r(&self.target)),
            )
        };
        let feature = gated(format!("clamp({body}, {lo}, {hi})"), self.from_day);
        format!("trader {name}\n\"{sentence}\" : {feature}{range}\n")
    }
}

/// Buys members of a family while their price is below `target`.
pub fn theorem_buyer(name: &str, spec: &StreamTrader) -> Result<Trader, TradingError> {
    parse_strategy(&spec.text(name, true))
}

/// Sells members of a family while their price is above `target`.
pub fn theorem_seller(name: &str, spec: &StreamTrader) -> Result<Trader, TradingError> {
    parse_strategy(&spec.text(name, false))
}

/// Buys a sentence whose price fell since yesterday and sells one whose
/// price rose.
pub fn oscillation_arbitrageur(name: &str, sentences: &[String], slope: &Rational) -> Result<Trader, TradingError> {
    let mut text = format!("trader {name}\n");
    for s in sentences {
        text.push_str(&format!(
            "\"{s}\" : {} * (price(\"{s}\", 1) - price(\"{s}\", 0))\n",
            r(slope)
        ));
    }
    parse_strategy(&text)
}

/// Buys both sides of each pair when their prices sum below 1 and sells
/// both when above.
pub fn complement_arbitrageur(
    name: &str,
    pairs: &[(String, String)],
    slope: &Rational,
) -> Result<Trader, TradingError> {
    let mut text = format!("trader {name}\n");
    for (a, b) in pairs {
        let gap = format!("{} * (1 - price(\"{a}\", 0) - price(\"{b}\", 0))", r(slope));
        text.push_str(&format!("\"{a}\" : {gap}\n\"{b}\" : {gap}\n"));
    }
    parse_strategy(&text)
}

/// Trades a diagonal family toward `threshold`: buys below, sells above.
pub fn reflection_diagonal(
    name: &str,
    family: &str,
    threshold: &Rational,
    slope: &Rational,
) -> Result<Trader, TradingError> {
    parse_strategy(&format!(
        "trader {name}\n\"{family}\" : clamp({} * ({} - price(\"{family}\", 0)), -1, 1)\n",
        r(slope),
        r(threshold)
    ))
}

/// `min(clamp((x - lo)/δ, 0, 1), clamp((hi - x)/δ, 0, 1))` over
/// `x = price(sentence, 0)`; either side may be open-ended.
fn band_indicator(sentence: &str, lo: Option<&Rational>, hi: Option<&Rational>, inv_delta: &Rational) -> String {
    let x = format!("price(\"{sentence}\", 0)");
    let rise = lo.map(|a| format!("clamp({} * ({x} - {}), 0, 1)", r(inv_delta), r(a)));
    let fall = hi.map(|b| format!("clamp({} * ({} - {x}), 0, 1)", r(inv_delta), r(b)));
    match (rise, fall) {
        (Some(a), Some(b)) => format!("min({a}, {b})"),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => "1".into(),
    }
}

/// Prices a price-fact atom family at the continuous indicator of the
/// watched sentence's current price lying in `(lo, hi)`.
pub fn reflection_band(
    name: &str,
    sentence: &str,
    fact: &str,
    lo: &Rational,
    hi: &Rational,
    delta: &Rational,
    slope: &Rational,
) -> Result<Trader, TradingError> {
    let ind = band_indicator(
        sentence,
        Some(lo),
        Some(hi),
        &(Rational::from_integer(1.into()) / delta),
    );
    parse_strategy(&format!(
        "trader {name}\n\"{fact}\" : {} * ({ind} - price(\"{fact}\", 0))\n",
        r(slope)
    ))
}

/// Prices `bins` bin atoms `<prefix><j>_{n}` at hat functions of the
/// current price of `sentence`, centred on the bin midpoints. The hats sum
/// to 1, so the implied expectation of the binned variable tracks the
/// current price.
pub fn expectation_bins(
    name: &str,
    sentence: &str,
    prefix: &str,
    bins: u32,
    slope: &Rational,
) -> Result<Trader, TradingError> {
    let b = bins as i64;
    let mid = |j: i64| ratio(2 * j + 1, 2 * b);
    let width = Rational::from_integer(b.into());
    let mut text = format!("trader {name}\n");
    for j in 0..b {
        let lo = (j > 0).then(|| mid(j - 1));
        let hi = (j + 1 < b).then(|| mid(j + 1));
        let hat = band_indicator(sentence, lo.as_ref(), hi.as_ref(), &width);
        let atom = bin_atom(prefix, j as u32);
        text.push_str(&format!("\"{atom}\" : {} * ({hat} - price(\"{atom}\", 0))\n", r(slope)));
    }
    parse_strategy(&text)
}

/// `<prefix><j>_{n}`.
pub fn bin_atom(prefix: &str, j: u32) -> String {
    format!("{prefix}{j}_{{n}}")
}

/// Value attached to bin `j` of `bins`: its midpoint.
pub fn bin_value(j: u32, bins: u32) -> Rational {
    ratio(2 * j as i64 + 1, 2 * bins as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_sentence;
    use crate::pricing::{PriceView, Pricing};
    use crate::rational::{half, int};

    fn value_at(t: &Trader, day: u64, prices: &[(&str, Rational)]) -> Vec<(String, Rational)> {
        let today: Pricing = prices
            .iter()
            .map(|(s, p)| (parse_sentence(s).unwrap(), p.clone()))
            .collect();
        let past = vec![today.clone(); day as usize - 1];
        let view = PriceView::with_candidate(&past, &today);
        t.day_template(day)
            .unwrap()
            .into_iter()
            .map(|(s, e)| (s.render().to_string(), e.eval(&view)))
            .collect()
    }

    #[test]
    fn shifting_families() {
        assert_eq!(shift_family("t_{n}"), "t_{(n-k)}");
        assert_eq!(shift_family("t_{2*n+1}_n"), "t_{2*(n-k)+1}_n");
    }

    #[test]
    fn buyer_with_lookback_and_gate() {
        let mut spec = StreamTrader::new("t_{n}", ratio(63, 64));
        spec.lookback = 2;
        let t = theorem_buyer("buy", &spec).unwrap();
        let v = value_at(&t, 3, &[("t_3", half()), ("t_2", int(1))]);
        assert_eq!(v.len(), 3);
        assert_eq!(v[2], ("t_3".into(), ratio(31, 64)));
        assert_eq!(v[1], ("t_2".into(), int(0)));

        let mut gate = StreamTrader::new("a", ratio(63, 64));
        gate.from_day = Some(5);
        let t = theorem_buyer("late", &gate).unwrap();
        assert_eq!(value_at(&t, 4, &[("a", half())])[0].1, int(0));
        assert_eq!(value_at(&t, 5, &[("a", half())])[0].1, ratio(31, 64));
    }

    #[test]
    fn seller_sells_above_target() {
        let t = theorem_seller("sell", &StreamTrader::new("s_{n}", ratio(1, 64))).unwrap();
        assert_eq!(value_at(&t, 1, &[("s_1", half())])[0].1, ratio(-31, 64));
    }

    #[test]
    fn complement_and_diagonal() {
        let t = complement_arbitrageur("c", &[("u".into(), "~u".into())], &int(1)).unwrap();
        let v = value_at(&t, 1, &[("u", ratio(1, 4)), ("~u", ratio(1, 4))]);
        assert_eq!(v, vec![("u".into(), half()), ("~u".into(), half())]);
        let t = reflection_diagonal("d", "chi_{n}", &ratio(1, 4), &int(4)).unwrap();
        assert_eq!(value_at(&t, 2, &[("chi_2", ratio(1, 4))])[0].1, int(0));
        assert_eq!(value_at(&t, 2, &[("chi_2", int(1))])[0].1, int(-1));
    }

    #[test]
    fn band_indicator_levels() {
        let t = reflection_band("r", "u", "f_{n}", &ratio(1, 5), &ratio(4, 5), &ratio(1, 20), &int(1)).unwrap();
        assert_eq!(value_at(&t, 1, &[("u", half()), ("f_1", int(0))])[0].1, int(1));
        assert_eq!(value_at(&t, 1, &[("u", ratio(9, 10)), ("f_1", int(0))])[0].1, int(0));
        assert_eq!(value_at(&t, 1, &[("u", ratio(1, 5)), ("f_1", int(0))])[0].1, int(0));
    }

    #[test]
    fn hats_reproduce_the_price() {
        let t = expectation_bins("e", "t_{n}", "nb", 8, &int(1)).unwrap();
        for x in [ratio(1, 16), ratio(3, 10), half(), ratio(15, 16)] {
            let v = value_at(&t, 1, &[("t_1", x.clone())]);
            let mass: Rational = v.iter().map(|(_, q)| q.clone()).sum();
            assert_eq!(mass, int(1));
            let mean: Rational = v.iter().enumerate().map(|(j, (_, q))| q * bin_value(j as u32, 8)).sum();
            assert_eq!(mean, x);
        }
    }
}
