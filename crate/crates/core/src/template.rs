//! Day-indexed families: integer polynomial index expressions (`4*n`,
//! `n+10`, `n-k`) and sentence templates with `{expr}` placeholders
//! (`t_{n}`, `pr_{n-1}_u`).

use std::collections::BTreeMap;
use std::fmt;

use crate::logic::{parse_sentence, LogicError, Sentence};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("bad index expression `{text}`: {message}")]
    Syntax { text: String, message: String },
    #[error("index expression `{0}` is not polynomially bounded (variable exponent)")]
    NotPolynomial(String),
    #[error("unbound index variable `{0}`")]
    Unbound(String),
    #[error("index arithmetic overflow in `{0}`")]
    Overflow(String),
    #[error("instantiated sentence `{text}` is invalid: {source}")]
    Sentence { text: String, source: LogicError },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum IExpr {
    Lit(i64),
    Var(String),
    Add(Box<IExpr>, Box<IExpr>),
    Sub(Box<IExpr>, Box<IExpr>),
    Mul(Box<IExpr>, Box<IExpr>),
    Pow(Box<IExpr>, u32),
    Neg(Box<IExpr>),
}

/// Integer polynomial in named index variables.
#[derive(Clone, PartialEq, Eq)]
pub struct IndexExpr {
    text: String,
    expr: IExpr,
}

pub type Bindings = BTreeMap<&'static str, i64>;

pub fn bind_n(n: i64) -> Bindings {
    let mut b = Bindings::new();
    b.insert("n", n);
    b
}

impl IndexExpr {
    pub fn parse(text: &str) -> Result<Self, TemplateError> {
        let toks = lex_index(text)?;
        let mut p = IParser {
            toks: &toks,
            pos: 0,
            text,
        };
        let expr = p.sum()?;
        if p.pos != toks.len() {
            return Err(TemplateError::Syntax {
                text: text.into(),
                message: "unexpected trailing input".into(),
            });
        }
        Ok(IndexExpr {
            text: text.trim().to_string(),
            expr,
        })
    }

    pub fn var(name: &str) -> Self {
        IndexExpr {
            text: name.to_string(),
            expr: IExpr::Var(name.to_string()),
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn eval(&self, b: &Bindings) -> Result<i64, TemplateError> {
        eval_i(&self.expr, b).ok_or_else(|| match first_unbound(&self.expr, b) {
            Some(v) => TemplateError::Unbound(v),
            None => TemplateError::Overflow(self.text.clone()),
        })
    }

    /// Polynomial degree in `var`.
    pub fn degree(&self, var: &str) -> u32 {
        degree(&self.expr, var)
    }

    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        collect_vars(&self.expr, &mut out);
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Debug for IndexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndexExpr({})", self.text)
    }
}

impl fmt::Display for IndexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn eval_i(e: &IExpr, b: &Bindings) -> Option<i64> {
    match e {
        IExpr::Lit(v) => Some(*v),
        IExpr::Var(name) => b.get(name.as_str()).copied(),
        IExpr::Add(l, r) => eval_i(l, b)?.checked_add(eval_i(r, b)?),
        IExpr::Sub(l, r) => eval_i(l, b)?.checked_sub(eval_i(r, b)?),
        IExpr::Mul(l, r) => eval_i(l, b)?.checked_mul(eval_i(r, b)?),
        IExpr::Pow(base, exp) => eval_i(base, b)?.checked_pow(*exp),
        IExpr::Neg(x) => eval_i(x, b)?.checked_neg(),
    }
}

fn first_unbound(e: &IExpr, b: &Bindings) -> Option<String> {
    let mut vars = Vec::new();
    collect_vars(e, &mut vars);
    vars.into_iter().find(|v| !b.contains_key(v.as_str()))
}

fn collect_vars(e: &IExpr, out: &mut Vec<String>) {
    match e {
        IExpr::Lit(_) => {}
        IExpr::Var(v) => out.push(v.clone()),
        IExpr::Add(l, r) | IExpr::Sub(l, r) | IExpr::Mul(l, r) => {
            collect_vars(l, out);
            collect_vars(r, out);
        }
        IExpr::Pow(x, _) | IExpr::Neg(x) => collect_vars(x, out),
    }
}

fn degree(e: &IExpr, var: &str) -> u32 {
    match e {
        IExpr::Lit(_) => 0,
        IExpr::Var(v) => u32::from(v == var),
        IExpr::Add(l, r) | IExpr::Sub(l, r) => degree(l, var).max(degree(r, var)),
        IExpr::Mul(l, r) => degree(l, var) + degree(r, var),
        IExpr::Pow(x, k) => degree(x, var) * k,
        IExpr::Neg(x) => degree(x, var),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ITok {
    Num(i64),
    Ident(String),
    Op(char),
}

fn lex_index(text: &str) -> Result<Vec<ITok>, TemplateError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse().map_err(|_| TemplateError::Overflow(text.into()))?;
            out.push(ITok::Num(v));
        } else if c.is_ascii_lowercase() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(ITok::Ident(chars[start..i].iter().collect()));
        } else if "+-*^()".contains(c) {
            out.push(ITok::Op(c));
            i += 1;
        } else {
            return Err(TemplateError::Syntax {
                text: text.into(),
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct IParser<'a> {
    toks: &'a [ITok],
    pos: usize,
    text: &'a str,
}

impl IParser<'_> {
    fn err(&self, message: &str) -> TemplateError {
        TemplateError::Syntax {
            text: self.text.into(),
            message: message.into(),
        }
    }

    fn eat(&mut self, op: char) -> bool {
        if self.toks.get(self.pos) == Some(&ITok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<IExpr, TemplateError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat('+') {
                lhs = IExpr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat('-') {
                lhs = IExpr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<IExpr, TemplateError> {
        let mut lhs = self.power()?;
        while self.eat('*') {
            lhs = IExpr::Mul(Box::new(lhs), Box::new(self.power()?));
        }
        Ok(lhs)
    }

    fn power(&mut self) -> Result<IExpr, TemplateError> {
        let base = self.atom()?;
        if self.eat('^') {
            return match self.toks.get(self.pos) {
                Some(ITok::Num(k)) => {
                    self.pos += 1;
                    let k = u32::try_from(*k).map_err(|_| self.err("exponent too large"))?;
                    Ok(IExpr::Pow(Box::new(base), k))
                }
                Some(_) => Err(TemplateError::NotPolynomial(self.text.into())),
                None => Err(self.err("missing exponent")),
            };
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<IExpr, TemplateError> {
        match self.toks.get(self.pos).cloned() {
            Some(ITok::Num(v)) => {
                self.pos += 1;
                Ok(IExpr::Lit(v))
            }
            Some(ITok::Ident(v)) => {
                self.pos += 1;
                Ok(IExpr::Var(v))
            }
            Some(ITok::Op('-')) => {
                self.pos += 1;
                Ok(IExpr::Neg(Box::new(self.power()?)))
            }
            Some(ITok::Op('(')) => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            _ => Err(self.err("expected a number, variable or `(`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Lit(String),
    Hole(IndexExpr),
}

/// Sentence text with `{expr}` index placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceTemplate {
    source: String,
    pieces: Vec<Piece>,
    /// Set when the template has no placeholders.
    fixed: Option<Sentence>,
}

impl SentenceTemplate {
    pub fn parse(text: &str) -> Result<Self, TemplateError> {
        let mut pieces = Vec::new();
        let mut rest = text;
        while let Some(open) = rest.find('{') {
            if open > 0 {
                pieces.push(Piece::Lit(rest[..open].to_string()));
            }
            let close = rest[open..].find('}').ok_or_else(|| TemplateError::Syntax {
                text: text.into(),
                message: "unclosed `{`".into(),
            })? + open;
            pieces.push(Piece::Hole(IndexExpr::parse(&rest[open + 1..close])?));
            rest = &rest[close + 1..];
        }
        if !rest.is_empty() {
            pieces.push(Piece::Lit(rest.to_string()));
        }
        let fixed = if pieces.iter().all(|p| matches!(p, Piece::Lit(_))) {
            Some(parse_sentence(text).map_err(|source| TemplateError::Sentence {
                text: text.into(),
                source,
            })?)
        } else {
            None
        };
        Ok(SentenceTemplate {
            source: text.trim().to_string(),
            pieces,
            fixed,
        })
    }

    pub fn fixed(s: Sentence) -> Self {
        SentenceTemplate {
            source: s.render().to_string(),
            pieces: vec![Piece::Lit(s.render().to_string())],
            fixed: Some(s),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn is_fixed(&self) -> bool {
        self.fixed.is_some()
    }

    pub fn holes(&self) -> impl Iterator<Item = &IndexExpr> {
        self.pieces.iter().filter_map(|p| match p {
            Piece::Hole(e) => Some(e),
            Piece::Lit(_) => None,
        })
    }

    /// Instantiates the template. Returns `None` when some placeholder
    /// evaluates below 1 (families are indexed from 1).
    pub fn instantiate(&self, b: &Bindings) -> Result<Option<Sentence>, TemplateError> {
        if let Some(s) = &self.fixed {
            return Ok(Some(s.clone()));
        }
        let mut text = String::new();
        for piece in &self.pieces {
            match piece {
                Piece::Lit(s) => text.push_str(s),
                Piece::Hole(e) => {
                    let v = e.eval(b)?;
                    if v < 1 {
                        return Ok(None);
                    }
                    text.push_str(&v.to_string());
                }
            }
        }
        parse_sentence(&text)
            .map(Some)
            .map_err(|source| TemplateError::Sentence { text, source })
    }

    pub fn at(&self, n: i64) -> Result<Option<Sentence>, TemplateError> {
        self.instantiate(&bind_n(n))
    }
}
