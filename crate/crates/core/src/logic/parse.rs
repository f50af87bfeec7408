use super::{Atom, Connective, LogicError, Sentence};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Top,
    Bottom,
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Top => "T".into(),
            Tok::Bottom => "F".into(),
            Tok::Not => "~".into(),
            Tok::And => "&".into(),
            Tok::Or => "|".into(),
            Tok::Implies => "->".into(),
            Tok::Iff => "<->".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

fn syntax(position: usize, found: &str, message: &str) -> LogicError {
    LogicError::Syntax {
        position,
        found: found.to_string(),
        message: message.to_string(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, LogicError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '~' | '!' => {
                out.push((start, Tok::Not));
                i += 1;
            }
            '&' => {
                out.push((start, Tok::And));
                i += 1;
            }
            '|' => {
                out.push((start, Tok::Or));
                i += 1;
            }
            '(' => {
                out.push((start, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((start, Tok::RParen));
                i += 1;
            }
            '-' if text[i..].starts_with("->") => {
                out.push((start, Tok::Implies));
                i += 2;
            }
            '<' if text[i..].starts_with("<->") => {
                out.push((start, Tok::Iff));
                i += 3;
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                match word {
                    "T" => out.push((start, Tok::Top)),
                    "F" => out.push((start, Tok::Bottom)),
                    w if super::is_atom_name(w) => out.push((start, Tok::Ident(w.to_string()))),
                    w => return Err(syntax(start, w, "invalid atom name")),
                }
            }
            _ => {
                let found: String = text[i..].chars().take(1).collect();
                return Err(syntax(start, &found, "unexpected character"));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn error_here(&self, message: &str) -> LogicError {
        match self.toks.get(self.pos) {
            Some((p, t)) => syntax(*p, &t.text(), message),
            None => syntax(self.end, "end of input", message),
        }
    }

    // iff (loosest, left-assoc) > implies (right-assoc) > or > and > not
    fn iff(&mut self) -> Result<Sentence, LogicError> {
        let mut lhs = self.implies()?;
        while self.peek() == Some(&Tok::Iff) {
            self.pos += 1;
            let rhs = self.implies()?;
            lhs = Sentence::binary(Connective::Iff, lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Sentence, LogicError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            let rhs = self.implies()?;
            return Ok(Sentence::binary(Connective::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Sentence, LogicError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            let rhs = self.and()?;
            lhs = Sentence::binary(Connective::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Sentence, LogicError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Sentence::binary(Connective::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Sentence, LogicError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Sentence::not(self.unary()?))
            }
            Some(Tok::Top) => {
                self.pos += 1;
                Ok(Sentence::top())
            }
            Some(Tok::Bottom) => {
                self.pos += 1;
                Ok(Sentence::bottom())
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(Sentence::atom(Atom::new(&name)?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.iff()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.error_here("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(self.error_here("expected a sentence")),
        }
    }
}

/// Parses sentence text. Precedence from tightest: `~`, `&`, `|`, `->`
/// (right-associative), `<->`.
pub fn parse_sentence(text: &str) -> Result<Sentence, LogicError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(LogicError::Empty);
    }
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let s = parser.iff()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.error_here("unexpected trailing input"));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_examples() {
        let s = parse_sentence("a & ~b").unwrap();
        assert_eq!(s, Sentence::and(Sentence::var("a"), Sentence::not(Sentence::var("b"))));
        assert_eq!(s.render(), "(a & ~b)");

        let s = parse_sentence("a -> b -> c").unwrap();
        assert_eq!(
            s,
            Sentence::implies(
                Sentence::var("a"),
                Sentence::implies(Sentence::var("b"), Sentence::var("c"))
            )
        );
    }

    #[test]
    fn precedence_ladder() {
        let s = parse_sentence("~a & b | c -> d <-> e").unwrap();
        assert_eq!(s.render(), "((((~a & b) | c) -> d) <-> e)");
        assert_eq!(parse_sentence("a | b & c").unwrap().render(), "(a | (b & c))");
    }

    #[test]
    fn syntax_error_reports_token() {
        match parse_sentence("a & | b") {
            Err(LogicError::Syntax { position, found, .. }) => {
                assert_eq!(position, 4);
                assert_eq!(found, "|");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(parse_sentence("   "), Err(LogicError::Empty));
        assert!(parse_sentence("(a & b").is_err());
        assert!(parse_sentence("a b").is_err());
        assert!(parse_sentence("Ab").is_err());
    }
}
