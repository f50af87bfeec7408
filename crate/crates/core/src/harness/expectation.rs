//! Finite-valued variables and their market expectation.

use std::collections::BTreeSet;

use super::HarnessError;
use crate::logic::{Sentence, TheoryFragment, WorldSpace, DEFAULT_WORLD_CAP};
use crate::pricing::Pricing;
use crate::rational::Rational;
use crate::template::IndexExpr;

/// A variable given by a partition: exactly one sentence `X = v_i` holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    partition: Vec<(Sentence, Rational)>,
}

impl Variable {
    /// Values must be distinct.
    pub fn new(partition: Vec<(Sentence, Rational)>) -> Result<Self, HarnessError> {
        let mut seen = BTreeSet::new();
        for (_, v) in &partition {
            if !seen.insert(v.clone()) {
                return Err(HarnessError::Config(format!("variable value {v} appears twice")));
            }
        }
        if partition.is_empty() {
            return Err(HarnessError::Config("a variable needs at least one outcome".into()));
        }
        Ok(Variable { partition })
    }

    /// `1(φ)`: 1 when φ holds, 0 otherwise.
    pub fn indicator(phi: Sentence) -> Self {
        Variable {
            partition: vec![
                (phi.clone(), Rational::from_integer(1.into())),
                (Sentence::not(phi), Rational::from_integer(0.into())),
            ],
        }
    }

    pub fn constant(v: Rational) -> Self {
        Variable {
            partition: vec![(Sentence::top(), v)],
        }
    }

    pub fn partition(&self) -> &[(Sentence, Rational)] {
        &self.partition
    }

    /// `a·X + b` over the same partition.
    pub fn affine(&self, a: &Rational, b: &Rational) -> Result<Self, HarnessError> {
        Variable::new(self.partition.iter().map(|(s, v)| (s.clone(), a * v + b)).collect())
    }

    /// Checks that, given `f`, the outcomes are pairwise exclusive and
    /// jointly exhaustive.
    pub fn is_partition_under(&self, f: &TheoryFragment) -> Result<bool, HarnessError> {
        let space = WorldSpace::build(f, self.partition.iter().map(|(s, _)| s), DEFAULT_WORLD_CAP)?;
        let one = Rational::from_integer(1.into());
        let terms: Vec<(&Sentence, &Rational)> = self.partition.iter().map(|(s, _)| (s, &one)).collect();
        let (lo, hi) = space.extrema(&Rational::from_integer(0.into()), terms)?;
        Ok(lo == one && hi == one)
    }
}

/// `Σ v_i · P(X = v_i)`.
pub fn expectation(p: &Pricing, x: &Variable) -> Rational {
    x.partition.iter().map(|(s, v)| v * p.get(s)).sum()
}

/// A day map with `f(n) > n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeferralFunction(IndexExpr);

impl DeferralFunction {
    /// Verifies `f(n) > n` on `1..=check_upto`.
    pub fn parse(text: &str, check_upto: u64) -> Result<Self, HarnessError> {
        let e = IndexExpr::parse(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        let f = DeferralFunction(e);
        for n in 1..=check_upto {
            if f.apply(n)? <= n {
                return Err(HarnessError::Config(format!("deferral `{text}` has f({n}) <= {n}")));
            }
        }
        Ok(f)
    }

    pub fn apply(&self, n: u64) -> Result<u64, HarnessError> {
        let v = self
            .0
            .eval(&crate::template::bind_n(n as i64))
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(v.max(0) as u64)
    }

    pub fn text(&self) -> &str {
        self.0.text()
    }
}
