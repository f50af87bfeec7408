//! Strategy files.
//!
//! ```text
//! trader momentum
//! # one line per traded sentence (family)
//! "phi" : price(phi, 1) - price(phi, 0)
//! "t_{n-k}" : clamp(1 - price(t_{n-k}, 0), 0, 1) for k in 0..=3
//! ```
//!
//! Features: rationals (`0.9`, `1/2`), the day index `n` (and a range
//! variable), `price(<sentence>, <offset>)`, `+`, `-`, `*`, unary `-`,
//! `max(e, e)`, `min(e, e)`, `clamp(e, lo, hi)`. There is no division.

use std::collections::BTreeMap;
use std::path::Path;

use super::feature::{Feature, FeatureExpr, FeatureTemplate};
use super::TradingError;
use crate::logic::Sentence;
use crate::rational::{parse_rational, Rational};
use crate::template::{bind_n, Bindings, IndexExpr, SentenceTemplate, TemplateError};

#[derive(Debug, Clone, PartialEq)]
pub struct IndexRange {
    pub var: String,
    pub lo: IndexExpr,
    pub hi: IndexExpr,
    pub inclusive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateLine {
    pub sentence: SentenceTemplate,
    pub coefficient: FeatureTemplate,
    pub range: Option<IndexRange>,
}

/// A day-indexed trading strategy: a fixed list of template lines whose
/// day-`n` instance is a finite list of (sentence, price feature) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Trader {
    name: String,
    lines: Vec<TemplateLine>,
}

impl Trader {
    pub fn new(name: impl Into<String>, lines: Vec<TemplateLine>) -> Self {
        Trader {
            name: name.into(),
            lines,
        }
    }

    /// A trader that never trades.
    pub fn null(name: impl Into<String>) -> Self {
        Self::new(name, Vec::new())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lines(&self) -> &[TemplateLine] {
        &self.lines
    }

    /// Degree of the polynomial bounding the day-`n` template size.
    pub fn size_degree(&self) -> u32 {
        self.lines
            .iter()
            .map(|l| match &l.range {
                Some(r) => r.lo.degree("n").max(r.hi.degree("n")),
                None => 0,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn max_depth(&self) -> usize {
        self.lines.iter().map(|l| l.coefficient.depth()).max().unwrap_or(0)
    }

    /// Day-`n` strategy. Lines naming the same sentence are summed.
    pub fn day_template(&self, n: u64) -> Result<Vec<(Sentence, FeatureExpr)>, TradingError> {
        let mut out: BTreeMap<Sentence, FeatureExpr> = BTreeMap::new();
        let base = bind_n(n as i64);
        for line in &self.lines {
            let bindings: Vec<Bindings> = match &line.range {
                None => vec![base.clone()],
                Some(r) => {
                    let lo = r.lo.eval(&base)?;
                    let hi = r.hi.eval(&base)?;
                    let hi = if r.inclusive { hi } else { hi - 1 };
                    let var: &'static str = leak_var(&r.var);
                    (lo..=hi)
                        .map(|k| {
                            let mut b = base.clone();
                            b.insert(var, k);
                            b
                        })
                        .collect()
                }
            };
            for b in bindings {
                let Some(s) = line.sentence.instantiate(&b)? else {
                    continue;
                };
                let coef = line.coefficient.instantiate(&b)?;
                match out.remove(&s) {
                    Some(prev) => out.insert(s, prev.add(coef)),
                    None => out.insert(s, coef),
                };
            }
        }
        Ok(out.into_iter().collect())
    }
}

// Range variables are single lowercase identifiers; interning them keeps
// `Bindings` keyed by `&'static str`.
fn leak_var(name: &str) -> &'static str {
    use std::collections::HashSet;
    use std::sync::{Mutex, OnceLock};
    static POOL: OnceLock<Mutex<HashSet<&'static str>>> = OnceLock::new();
    let mut pool = POOL.get_or_init(Default::default).lock().expect("var pool");
    if let Some(v) = pool.get(name) {
        return v;
    }
    let leaked: &'static str = Box::leak(name.to_string().into_boxed_str());
    pool.insert(leaked);
    leaked
}

struct FeatureParser<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    vars: &'a [&'a str],
}

impl<'a> FeatureParser<'a> {
    fn err(&self, message: impl Into<String>) -> TradingError {
        TradingError::Strategy {
            line: self.line,
            message: format!("{} (at column {})", message.into(), self.pos + 1),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(|c: char| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), TradingError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<FeatureTemplate, TradingError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = lhs.add(self.term()?);
            } else if self.eat('-') {
                lhs = lhs.sub(self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<FeatureTemplate, TradingError> {
        let mut lhs = self.unary()?;
        while self.eat('*') {
            lhs = lhs.mul(self.unary()?);
        }
        self.skip_ws();
        if self.rest().starts_with('/') {
            return Err(self.err("division is not part of the feature language"));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<FeatureTemplate, TradingError> {
        if self.eat('-') {
            return Ok(Feature::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn number(&mut self) -> Result<Rational, TradingError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        if self.pos < bytes.len() && bytes[self.pos] == b'-' {
            self.pos += 1;
        }
        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
            self.pos += 1;
        }
        // fraction literal: digits '/' digits with no spaces
        if self.pos < bytes.len() && bytes[self.pos] == b'/' && bytes.get(self.pos + 1).is_some_and(u8::is_ascii_digit)
        {
            self.pos += 1;
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        parse_rational(&self.src[start..self.pos]).map_err(|e| self.err(e.to_string()))
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.rest().starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        self.src[start..self.pos].to_string()
    }

    fn sentence_arg(&mut self) -> Result<SentenceTemplate, TradingError> {
        self.skip_ws();
        let text = if self.eat('"') {
            let end = self
                .rest()
                .find('"')
                .ok_or_else(|| self.err("unterminated quoted sentence"))?;
            let t = &self.rest()[..end];
            self.pos += end + 1;
            t
        } else {
            let mut depth = 0i32;
            let mut end = None;
            for (i, c) in self.rest().char_indices() {
                match c {
                    '(' => depth += 1,
                    ')' if depth == 0 => break,
                    ')' => depth -= 1,
                    ',' if depth == 0 => {
                        end = Some(i);
                        break;
                    }
                    _ => {}
                }
            }
            let end = end.ok_or_else(|| self.err("expected `,` after the price sentence"))?;
            let t = &self.rest()[..end];
            self.pos += end;
            t
        };
        let template = SentenceTemplate::parse(text.trim()).map_err(|e| self.err(e.to_string()))?;
        check_vars(&template, self.vars).map_err(|m| self.err(m))?;
        Ok(template)
    }

    fn primary(&mut self) -> Result<FeatureTemplate, TradingError> {
        self.skip_ws();
        if self.eat('(') {
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(e);
        }
        if self.rest().starts_with(|c: char| c.is_ascii_digit() || c == '.') {
            return Ok(Feature::Const(self.number()?));
        }
        let name = self.ident();
        match name.as_str() {
            "" => Err(self.err("expected a feature expression")),
            "price" => {
                self.expect('(')?;
                let sentence = self.sentence_arg()?;
                self.expect(',')?;
                let offset = self.number()?;
                self.expect(')')?;
                if offset < Rational::from_integer(0.into()) {
                    return Err(TradingError::FutureReference {
                        line: self.line,
                        offset: offset.to_string(),
                    });
                }
                if !offset.is_integer() {
                    return Err(self.err("price offsets are whole days"));
                }
                let offset: u32 = offset
                    .to_integer()
                    .try_into()
                    .map_err(|_| self.err("offset too large"))?;
                Ok(Feature::Price { sentence, offset })
            }
            "max" | "min" => {
                self.expect('(')?;
                let a = self.expr()?;
                self.expect(',')?;
                let b = self.expr()?;
                self.expect(')')?;
                Ok(if name == "max" {
                    Feature::Max(Box::new(a), Box::new(b))
                } else {
                    Feature::Min(Box::new(a), Box::new(b))
                })
            }
            "clamp" => {
                self.expect('(')?;
                let e = self.expr()?;
                self.expect(',')?;
                let lo = self.number()?;
                self.expect(',')?;
                let hi = self.number()?;
                self.expect(')')?;
                if lo > hi {
                    return Err(self.err("clamp bounds are reversed"));
                }
                Ok(e.clamp(lo, hi))
            }
            v if self.vars.contains(&v) => Ok(Feature::Var(v.to_string())),
            other => Err(self.err(format!("unknown name `{other}`"))),
        }
    }
}

fn check_vars(t: &SentenceTemplate, vars: &[&str]) -> Result<(), String> {
    for hole in t.holes() {
        for v in hole.variables() {
            if !vars.contains(&v.as_str()) {
                return Err(format!("unbound index variable `{v}` in `{}`", t.source()));
            }
        }
    }
    Ok(())
}

/// Splits `<sentence> : <feature> [for <var> in <lo>..<hi>]`.
fn parse_line(text: &str, line: usize) -> Result<TemplateLine, TradingError> {
    let err = |message: String| TradingError::Strategy { line, message };
    let (sentence_text, rest) = if let Some(stripped) = text.strip_prefix('"') {
        let end = stripped
            .find('"')
            .ok_or_else(|| err("unterminated quoted sentence".into()))?;
        let rest = stripped[end + 1..].trim_start();
        let rest = rest
            .strip_prefix(':')
            .ok_or_else(|| err("expected `:` after the sentence".into()))?;
        (&stripped[..end], rest)
    } else {
        let (s, r) = text
            .split_once(':')
            .ok_or_else(|| err("expected `<sentence> : <feature>`".into()))?;
        (s, r)
    };

    let (feature_text, range) = match rest.rfind(" for ") {
        Some(idx) if !rest[idx..].contains(')') => {
            let spec = rest[idx + 5..].trim();
            let (var, bounds) = spec
                .split_once(" in ")
                .ok_or_else(|| err("expected `for <var> in <lo>..<hi>`".into()))?;
            let var = var.trim();
            if !crate::logic::is_atom_name(var) || var == "n" {
                return Err(err(format!("bad range variable `{var}`")));
            }
            let (lo, hi, inclusive) = match bounds.split_once("..=") {
                Some((l, h)) => (l, h, true),
                None => {
                    let (l, h) = bounds
                        .split_once("..")
                        .ok_or_else(|| err("expected `..` in range".into()))?;
                    (l, h, false)
                }
            };
            let parse_bound = |t: &str| -> Result<IndexExpr, TradingError> {
                let e = IndexExpr::parse(t).map_err(|e| match e {
                    TemplateError::NotPolynomial(m) => TradingError::Unbounded { line, message: m },
                    other => err(other.to_string()),
                })?;
                if e.variables().iter().any(|v| v != "n") {
                    return Err(err(format!("range bound `{t}` may only use `n`")));
                }
                Ok(e)
            };
            let range = IndexRange {
                var: var.to_string(),
                lo: parse_bound(lo)?,
                hi: parse_bound(hi)?,
                inclusive,
            };
            (&rest[..idx], Some(range))
        }
        _ => (rest, None),
    };

    let mut vars = vec!["n"];
    if let Some(r) = &range {
        vars.push(r.var.as_str());
    }
    let sentence = SentenceTemplate::parse(sentence_text.trim()).map_err(|e| match e {
        TemplateError::NotPolynomial(m) => TradingError::Unbounded { line, message: m },
        other => err(other.to_string()),
    })?;
    check_vars(&sentence, &vars).map_err(err)?;

    let mut p = FeatureParser {
        src: feature_text,
        pos: 0,
        line,
        vars: &vars,
    };
    let coefficient = p.expr()?;
    p.skip_ws();
    if p.pos != feature_text.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(TemplateLine {
        sentence,
        coefficient,
        range,
    })
}

/// Parses a strategy. The `trader <name>` header is optional for
/// single-expression snippets; the name then defaults to `anonymous`.
pub fn parse_strategy(text: &str) -> Result<Trader, TradingError> {
    let mut name: Option<String> = None;
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("trader ") {
            if name.is_some() || !lines.is_empty() {
                return Err(TradingError::Strategy {
                    line: line_no,
                    message: "the `trader` header must come first, once".into(),
                });
            }
            let n = rest.trim();
            if n.is_empty() || n.contains(char::is_whitespace) {
                return Err(TradingError::Strategy {
                    line: line_no,
                    message: format!("bad trader name `{n}`"),
                });
            }
            name = Some(n.to_string());
            continue;
        }
        lines.push(parse_line(line, line_no)?);
    }
    Ok(Trader::new(name.unwrap_or_else(|| "anonymous".into()), lines))
}

pub fn load_strategy(path: &Path) -> Result<Trader, TradingError> {
    let text = std::fs::read_to_string(path).map_err(|e| TradingError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_strategy(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::{PriceView, Pricing};
    use crate::rational::{int, ratio};
    use num_traits::{One, Zero};

    fn eval_line(t: &Trader, day: u64, past: &[Pricing], today: &Pricing) -> Vec<(String, Rational)> {
        let view = PriceView::with_candidate(past, today);
        t.day_template(day)
            .unwrap()
            .into_iter()
            .map(|(s, e)| (s.render().to_string(), e.eval(&view)))
            .collect()
    }

    #[test]
    fn clamp_buyer_reads_directly() {
        let t = parse_strategy("phi : clamp(0.9 - price(phi, 0), 0, 1)").unwrap();
        let phi = Sentence::var("phi");
        let today: Pricing = [(phi.clone(), ratio(1, 2))].into_iter().collect();
        assert_eq!(eval_line(&t, 1, &[], &today), vec![("phi".into(), ratio(2, 5))]);
        let today: Pricing = [(phi, ratio(19, 20))].into_iter().collect();
        assert_eq!(eval_line(&t, 1, &[], &today), vec![("phi".into(), Rational::zero())]);
    }

    #[test]
    fn momentum_uses_previous_day() {
        let t = parse_strategy("phi : price(phi, 1) - price(phi, 0)").unwrap();
        let phi = Sentence::var("phi");
        let day1: Pricing = [(phi.clone(), ratio(3, 5))].into_iter().collect();
        let today: Pricing = [(phi, ratio(1, 5))].into_iter().collect();
        assert_eq!(eval_line(&t, 2, &[day1], &today), vec![("phi".into(), ratio(2, 5))]);
    }

    #[test]
    fn future_reference_rejected() {
        assert!(matches!(
            parse_strategy("phi : price(phi, -1)"),
            Err(TradingError::FutureReference { line: 1, .. })
        ));
    }

    #[test]
    fn exponential_template_rejected() {
        assert!(matches!(
            parse_strategy("\"t_{k}\" : 1 for k in 1..=2^n"),
            Err(TradingError::Unbounded { line: 1, .. })
        ));
        let t = parse_strategy("\"t_{k}\" : 1 for k in 1..=n^2").unwrap();
        assert_eq!(t.size_degree(), 2);
        assert_eq!(t.day_template(3).unwrap().len(), 9);
    }

    #[test]
    fn families_and_ranges() {
        let text = "trader buyer\n\"t_{n-k}\" : clamp(1 - price(t_{n-k}, 0), 0, 1) for k in 0..=2\n";
        let t = parse_strategy(text).unwrap();
        assert_eq!(t.name(), "buyer");
        let names: Vec<String> = t
            .day_template(5)
            .unwrap()
            .into_iter()
            .map(|(s, _)| s.render().to_string())
            .collect();
        assert_eq!(names, vec!["t_3", "t_4", "t_5"]);
        // indices below 1 are skipped
        assert_eq!(t.day_template(1).unwrap().len(), 1);
    }

    #[test]
    fn day_variable_and_fractions() {
        let t = parse_strategy("a : 1/2 * n + -1").unwrap();
        let today = Pricing::new();
        assert_eq!(eval_line(&t, 4, &[], &today), vec![("a".into(), int(1))]);
    }

    #[test]
    fn quoted_sentences_with_connectives() {
        let t = parse_strategy("\"a & ~b\" : price(\"a & ~b\", 0) + price((a | b), 1)").unwrap();
        let view_today = Pricing::new();
        let got = eval_line(&t, 1, &[], &view_today);
        assert_eq!(got, vec![("(a & ~b)".into(), ratio(1, 2))]);
    }

    #[test]
    fn duplicate_lines_sum() {
        let t = parse_strategy("a : 1\na : 2").unwrap();
        assert_eq!(eval_line(&t, 1, &[], &Pricing::new()), vec![("a".into(), int(3))]);
    }

    #[test]
    fn syntax_errors() {
        assert!(parse_strategy("a : 1 / price(a, 0)").is_err());
        assert!(parse_strategy("a : foo(1)").is_err());
        assert!(parse_strategy("a 1").is_err());
        assert!(parse_strategy("a : clamp(price(a,0), 1, 0)").is_err());
        assert!(parse_strategy("\"t_{k}\" : 1").is_err());
        assert!(parse_strategy("a : 1\ntrader late").is_err());
        assert!(parse_strategy("a : price(a, 0.5)").is_err());
        assert!(parse_strategy("a : ").is_err());
    }

    #[test]
    fn null_trader_is_empty() {
        let t = parse_strategy("trader idle\n").unwrap();
        assert!(t.day_template(3).unwrap().is_empty());
        assert_eq!(t.max_depth(), 0);
        let _ = Rational::one();
    }
}
