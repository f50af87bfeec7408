//! Price features: continuous, division-free expressions over current and
//! past prices.

use num_traits::{One, Signed, Zero};

use super::TradingError;
use crate::logic::Sentence;
use crate::pricing::PriceView;
use crate::rational::{clamp, int, Rational};
use crate::template::{Bindings, SentenceTemplate};

#[derive(Debug, Clone, PartialEq)]
pub enum Feature<S> {
    Const(Rational),
    /// Index variable (`n`, or a range variable); template form only.
    Var(String),
    /// Price of a sentence `offset` days before the current day.
    Price {
        sentence: S,
        offset: u32,
    },
    Add(Box<Feature<S>>, Box<Feature<S>>),
    Mul(Box<Feature<S>>, Box<Feature<S>>),
    Neg(Box<Feature<S>>),
    Max(Box<Feature<S>>, Box<Feature<S>>),
    Min(Box<Feature<S>>, Box<Feature<S>>),
    Clamp(Box<Feature<S>>, Rational, Rational),
}

/// Feature with concrete sentences, ready to evaluate on a given day.
pub type FeatureExpr = Feature<Sentence>;
/// Feature as written in a strategy, with templated sentences.
pub type FeatureTemplate = Feature<SentenceTemplate>;

impl<S> Feature<S> {
    pub fn constant(r: Rational) -> Self {
        Feature::Const(r)
    }

    pub fn price(sentence: S, offset: u32) -> Self {
        Feature::Price { sentence, offset }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Self) -> Self {
        Feature::Add(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: Self) -> Self {
        Feature::Add(Box::new(self), Box::new(Feature::Neg(Box::new(other))))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Self) -> Self {
        Feature::Mul(Box::new(self), Box::new(other))
    }

    pub fn clamp(self, lo: Rational, hi: Rational) -> Self {
        Feature::Clamp(Box::new(self), lo, hi)
    }

    pub fn depth(&self) -> usize {
        match self {
            Feature::Const(_) | Feature::Var(_) | Feature::Price { .. } => 1,
            Feature::Neg(e) | Feature::Clamp(e, _, _) => 1 + e.depth(),
            Feature::Add(a, b) | Feature::Mul(a, b) | Feature::Max(a, b) | Feature::Min(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    pub fn for_each_price<'a>(&'a self, f: &mut impl FnMut(&'a S, u32)) {
        match self {
            Feature::Const(_) | Feature::Var(_) => {}
            Feature::Price { sentence, offset } => f(sentence, *offset),
            Feature::Neg(e) | Feature::Clamp(e, _, _) => e.for_each_price(f),
            Feature::Add(a, b) | Feature::Mul(a, b) | Feature::Max(a, b) | Feature::Min(a, b) => {
                a.for_each_price(f);
                b.for_each_price(f);
            }
        }
    }
}

impl FeatureTemplate {
    /// Binds index variables and instantiates sentence templates. Prices of
    /// sentences whose index falls below 1 become the constant 0.
    pub fn instantiate(&self, b: &Bindings) -> Result<FeatureExpr, TradingError> {
        let bx = |e: &FeatureTemplate| e.instantiate(b).map(Box::new);
        Ok(match self {
            Feature::Const(r) => Feature::Const(r.clone()),
            Feature::Var(v) => {
                let value = b
                    .get(v.as_str())
                    .ok_or_else(|| TradingError::UnboundVariable(v.clone()))?;
                Feature::Const(int(*value))
            }
            Feature::Price { sentence, offset } => match sentence.instantiate(b)? {
                Some(s) => Feature::Price {
                    sentence: s,
                    offset: *offset,
                },
                None => Feature::Const(Rational::zero()),
            },
            Feature::Add(x, y) => Feature::Add(bx(x)?, bx(y)?),
            Feature::Mul(x, y) => Feature::Mul(bx(x)?, bx(y)?),
            Feature::Neg(x) => Feature::Neg(bx(x)?),
            Feature::Max(x, y) => Feature::Max(bx(x)?, bx(y)?),
            Feature::Min(x, y) => Feature::Min(bx(x)?, bx(y)?),
            Feature::Clamp(x, lo, hi) => Feature::Clamp(bx(x)?, lo.clone(), hi.clone()),
        })
    }
}

impl FeatureExpr {
    /// Exact value on day `view.today()`.
    pub fn eval(&self, view: &PriceView<'_>) -> Rational {
        let today = view.today() as i64;
        match self {
            Feature::Const(r) => r.clone(),
            // template-only variant; a bound expression never contains it
            Feature::Var(_) => Rational::zero(),
            Feature::Price { sentence, offset } => view.price(today - *offset as i64, sentence),
            Feature::Add(a, b) => a.eval(view) + b.eval(view),
            Feature::Mul(a, b) => a.eval(view) * b.eval(view),
            Feature::Neg(a) => -a.eval(view),
            Feature::Max(a, b) => a.eval(view).max(b.eval(view)),
            Feature::Min(a, b) => a.eval(view).min(b.eval(view)),
            Feature::Clamp(a, lo, hi) => clamp(a.eval(view), lo, hi),
        }
    }

    /// Interval enclosing every value the expression can take when all
    /// prices range over `[0, 1]`.
    pub fn range(&self) -> (Rational, Rational) {
        match self {
            Feature::Const(r) => (r.clone(), r.clone()),
            Feature::Var(_) => (Rational::zero(), Rational::zero()),
            Feature::Price { .. } => (Rational::zero(), Rational::one()),
            Feature::Add(a, b) => {
                let ((al, ah), (bl, bh)) = (a.range(), b.range());
                (al + bl, ah + bh)
            }
            Feature::Mul(a, b) => {
                let ((al, ah), (bl, bh)) = (a.range(), b.range());
                let products = [&al * &bl, &al * &bh, &ah * &bl, &ah * &bh];
                let lo = products.iter().min().cloned().unwrap_or_default();
                let hi = products.iter().max().cloned().unwrap_or_default();
                (lo, hi)
            }
            Feature::Neg(a) => {
                let (l, h) = a.range();
                (-h, -l)
            }
            Feature::Max(a, b) => {
                let ((al, ah), (bl, bh)) = (a.range(), b.range());
                (al.max(bl), ah.max(bh))
            }
            Feature::Min(a, b) => {
                let ((al, ah), (bl, bh)) = (a.range(), b.range());
                (al.min(bl), ah.min(bh))
            }
            Feature::Clamp(a, lo, hi) => {
                let (l, h) = a.range();
                (clamp(l, lo, hi), clamp(h, lo, hi))
            }
        }
    }

    /// Lipschitz constant with respect to the sup-norm of the current day's
    /// pricing. Past prices are constants for this purpose.
    pub fn lipschitz(&self) -> Rational {
        match self {
            Feature::Const(_) | Feature::Var(_) => Rational::zero(),
            Feature::Price { offset, .. } => {
                if *offset == 0 {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            Feature::Add(a, b) => a.lipschitz() + b.lipschitz(),
            Feature::Mul(a, b) => {
                let bound = |e: &FeatureExpr| {
                    let (l, h) = e.range();
                    l.abs().max(h.abs())
                };
                a.lipschitz() * bound(b) + b.lipschitz() * bound(a)
            }
            Feature::Neg(a) | Feature::Clamp(a, _, _) => a.lipschitz(),
            Feature::Max(a, b) | Feature::Min(a, b) => a.lipschitz().max(b.lipschitz()),
        }
    }
}

/// Evaluates `e` on day `view.today()`.
pub fn eval_feature(e: &FeatureExpr, view: &PriceView<'_>) -> Rational {
    e.eval(view)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::Pricing;
    use crate::rational::{half, ratio};

    fn phi() -> Sentence {
        Sentence::var("phi")
    }

    #[test]
    fn max_arithmetic() {
        let e = FeatureExpr::constant(half()).sub(FeatureExpr::price(phi(), 0));
        let e = Feature::Max(Box::new(FeatureExpr::constant(Rational::zero())), Box::new(e));
        let today: Pricing = [(phi(), ratio(2, 5))].into_iter().collect();
        let past: Vec<Pricing> = vec![];
        assert_eq!(e.eval(&PriceView::with_candidate(&past, &today)), ratio(1, 10));
    }

    #[test]
    fn indicator_lower_edge_is_zero() {
        // clamp((x - p) * (1/δ), 0, 1) at x = p
        let p = ratio(3, 10);
        let e = FeatureExpr::price(phi(), 0)
            .sub(FeatureExpr::constant(p.clone()))
            .mul(FeatureExpr::constant(int(16)))
            .clamp(Rational::zero(), Rational::one());
        let today: Pricing = [(phi(), p)].into_iter().collect();
        assert_eq!(e.eval(&PriceView::with_candidate(&[], &today)), Rational::zero());
    }

    #[test]
    fn off_support_price_is_zero_and_prehistory_half() {
        let today = Pricing::new();
        let view = PriceView::with_candidate(&[], &today);
        assert_eq!(FeatureExpr::price(phi(), 0).eval(&view), Rational::zero());
        assert_eq!(FeatureExpr::price(phi(), 1).eval(&view), half());
    }

    #[test]
    fn lipschitz_of_product_uses_ranges() {
        let x = FeatureExpr::price(phi(), 0);
        let e = x.clone().mul(FeatureExpr::constant(int(3))).add(x.clone().mul(x));
        // d/dx (3x + x^2) <= 3 + 2 on [0,1]
        assert_eq!(e.lipschitz(), int(5));
    }
}
