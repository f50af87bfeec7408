//! Deductive processes: nested, day-indexed generators of trusted sentence
//! sets.

mod halting;
mod reflective;
mod script;

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::logic::{is_consistent, LogicError, Sentence, TheoryFragment};
use crate::template::{bind_n, IndexExpr, SentenceTemplate, TemplateError};

pub use halting::{run_bounded, HaltingStream, Instr, Machine, MachineFamily};
pub use reflective::{reflective_extend, Interval, ReflectiveKind, ReflectiveRule};
pub use script::{load_script, parse_script};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeductionError {
    #[error("day index must be at least 1 (got {0})")]
    BadDay(i64),
    #[error("nestedness violated at day {day}: `{missing}` from day {} is missing", day - 1)]
    Integrity { day: u64, missing: Sentence },
    #[error("deductive fragment at day {day} is propositionally inconsistent")]
    Inconsistent { day: u64 },
    #[error("delay map `{map}` gives f({n}) = {value} < {n}")]
    BadDelay { map: String, n: i64, value: i64 },
    #[error("script line {line}: {message}")]
    Script { line: usize, message: String },
    #[error("non-monotone script: day {day} on line {line} follows day {previous}")]
    NonMonotone { line: usize, day: u64, previous: u64 },
    #[error("reading script {path}: {message}")]
    Io { path: String, message: String },
    #[error("history covers {have} days but day {need} is required")]
    ShortHistory { have: usize, need: usize },
    #[error("reflective rule: {0}")]
    Rule(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Scripted,
    Generated,
    Composite,
}

/// Day map `n -> f(n)` with `f(n) >= n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DayMap(IndexExpr);

impl DayMap {
    pub fn parse(text: &str) -> Result<Self, TemplateError> {
        Ok(DayMap(IndexExpr::parse(text)?))
    }

    pub fn identity() -> Self {
        DayMap(IndexExpr::var("n"))
    }

    pub fn text(&self) -> &str {
        self.0.text()
    }

    pub fn apply(&self, n: i64) -> Result<i64, TemplateError> {
        self.0.eval(&bind_n(n))
    }
}

#[derive(Clone)]
enum Source {
    Scripted(BTreeMap<u64, TheoryFragment>),
    TheoremStream { family: SentenceTemplate, delay: DayMap },
    Halting(Arc<HaltingStream>),
    Composite(Vec<DeductiveProcess>),
}

/// A nested sequence `D_1 ⊆ D_2 ⊆ ...` of finite sentence sets.
#[derive(Clone)]
pub struct DeductiveProcess {
    source: Source,
}

impl std::fmt::Debug for DeductiveProcess {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DeductiveProcess({:?})", self.provenance())
    }
}

impl DeductiveProcess {
    pub fn empty() -> Self {
        Self::scripted(BTreeMap::new())
    }

    /// Replays explicit fragments; a day without an entry repeats the most
    /// recent earlier entry.
    pub fn scripted(days: BTreeMap<u64, TheoryFragment>) -> Self {
        DeductiveProcess {
            source: Source::Scripted(days),
        }
    }

    /// `D_m = { φ_n : f(n) <= m }`.
    pub fn theorem_stream(family: SentenceTemplate, delay: DayMap) -> Self {
        DeductiveProcess {
            source: Source::TheoremStream { family, delay },
        }
    }

    pub fn halting(stream: HaltingStream) -> Self {
        DeductiveProcess {
            source: Source::Halting(Arc::new(stream)),
        }
    }

    pub fn composite(parts: Vec<DeductiveProcess>) -> Self {
        DeductiveProcess {
            source: Source::Composite(parts),
        }
    }

    pub fn provenance(&self) -> Provenance {
        match &self.source {
            Source::Scripted(_) => Provenance::Scripted,
            Source::TheoremStream { .. } | Source::Halting(_) => Provenance::Generated,
            Source::Composite(_) => Provenance::Composite,
        }
    }

    /// `D_n` without nestedness or consistency checks.
    pub fn fragment(&self, n: u64) -> Result<TheoryFragment, DeductionError> {
        match &self.source {
            Source::Scripted(days) => Ok(days.range(..=n).next_back().map(|(_, f)| f.clone()).unwrap_or_default()),
            Source::TheoremStream { family, delay } => {
                let mut out = TheoryFragment::new();
                for k in 1..=n as i64 {
                    let due = delay.apply(k)?;
                    if due < k {
                        return Err(DeductionError::BadDelay {
                            map: delay.text().into(),
                            n: k,
                            value: due,
                        });
                    }
                    if due <= n as i64 {
                        if let Some(s) = family.at(k)? {
                            out.insert(s);
                        }
                    }
                }
                Ok(out)
            }
            Source::Halting(h) => h.fragment(n),
            Source::Composite(parts) => {
                let mut out = TheoryFragment::new();
                for p in parts {
                    out.extend(p.fragment(n)?.iter().cloned());
                }
                Ok(out)
            }
        }
    }

    /// `D_n`, checked against `D_{n-1}` for nestedness and for consistency.
    pub fn step(&self, n: u64) -> Result<TheoryFragment, DeductionError> {
        if n == 0 {
            return Err(DeductionError::BadDay(0));
        }
        let current = self.fragment(n)?;
        if n > 1 {
            let previous = self.fragment(n - 1)?;
            check_nested(&previous, &current, n)?;
        }
        if !is_consistent(&current) {
            return Err(DeductionError::Inconsistent { day: n });
        }
        Ok(current)
    }
}

pub(crate) fn check_nested(
    previous: &TheoryFragment,
    current: &TheoryFragment,
    day: u64,
) -> Result<(), DeductionError> {
    match previous.first_missing_from(current) {
        Some(missing) => Err(DeductionError::Integrity {
            day,
            missing: missing.clone(),
        }),
        None => Ok(()),
    }
}

/// Convenience constructor used by tests and presets.
pub fn theorem_stream(family: &str, delay: &str) -> Result<DeductiveProcess, DeductionError> {
    Ok(DeductiveProcess::theorem_stream(
        SentenceTemplate::parse(family)?,
        DayMap::parse(delay)?,
    ))
}
