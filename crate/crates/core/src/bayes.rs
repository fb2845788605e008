//! Probabilities, odds and weights of evidence.
//!
//! Weights are in decibans, `10 log10(factor)`, everywhere in the crate.

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(Error::InvalidProbability(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `p / (1 - p)`; infinite at certainty.
    pub fn odds(self) -> Odds {
        Odds(self.0 / (1.0 - self.0))
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Odds(f64);

impl Odds {
    pub fn new(o: f64) -> Result<Self> {
        if o >= 0.0 && !o.is_nan() {
            Ok(Self(o))
        } else {
            Err(Error::InvalidProbability(o))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn probability(self) -> Probability {
        if self.0.is_infinite() {
            Probability(1.0)
        } else {
            Probability(self.0 / (1.0 + self.0))
        }
    }

    pub fn weight(self) -> Weight {
        Weight::from_factor(self.0)
    }
}

/// Decibans.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Weight(pub f64);

/// Above this many decibans, factors overflow or underflow when multiplied
/// in linear space, so accumulation stays in logs.
pub const LINEAR_LIMIT_DB: f64 = 300.0;

impl Weight {
    pub fn from_factor(factor: f64) -> Self {
        Self(10.0 * factor.log10())
    }

    pub fn db(self) -> f64 {
        self.0
    }

    pub fn factor(self) -> f64 {
        10f64.powf(self.0 / 10.0)
    }

    /// Posterior probability for log-odds `prior_weight + self`, evaluated
    /// stably however large the weight gets.
    pub fn posterior_from(self, prior: Probability) -> Probability {
        let total = prior.odds().weight().0 + self.0;
        if total.is_nan() {
            return prior;
        }
        // 1 / (1 + 10^(-w/10)), never forming 10^(w/10) for large w
        Probability(1.0 / (1.0 + 10f64.powf(-total / 10.0)))
    }
}

impl Add for Weight {
    type Output = Weight;
    fn add(self, rhs: Weight) -> Weight {
        Weight(self.0 + rhs.0)
    }
}

impl AddAssign for Weight {
    fn add_assign(&mut self, rhs: Weight) {
        self.0 += rhs.0;
    }
}

impl Sub for Weight {
    type Output = Weight;
    fn sub(self, rhs: Weight) -> Weight {
        Weight(self.0 - rhs.0)
    }
}

impl Neg for Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight(-self.0)
    }
}

impl std::iter::Sum for Weight {
    fn sum<I: Iterator<Item = Weight>>(iter: I) -> Weight {
        iter.fold(Weight(0.0), Add::add)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} db", self.0)
    }
}

/// One observation: its probability if the hypothesis is true and if false.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evidence {
    pub likelihood_true: f64,
    pub likelihood_false: f64,
}

impl Evidence {
    pub fn new(likelihood_true: f64, likelihood_false: f64) -> Result<Self> {
        Probability::new(likelihood_true)?;
        Probability::new(likelihood_false)?;
        Ok(Self {
            likelihood_true,
            likelihood_false,
        })
    }

    pub fn bayes_factor(self) -> f64 {
        self.likelihood_true / self.likelihood_false
    }

    pub fn weight(self) -> Weight {
        Weight::from_factor(self.bayes_factor())
    }
}

/// `P(H|E) = L_t p / (L_t p + L_f (1 - p))`.
pub fn posterior(prior: Probability, likelihood_true: f64, likelihood_false: f64) -> Result<Probability> {
    let lt = Probability::new(likelihood_true)?.0;
    let lf = Probability::new(likelihood_false)?.0;
    let p = prior.0;
    let num = lt * p;
    let den = num + lf * (1.0 - p);
    if den <= 0.0 {
        return Err(Error::ImpossibleEvidence);
    }
    Ok(Probability(num / den))
}

pub fn sequential_update(prior: Probability, evidence: &[Evidence]) -> Result<Probability> {
    evidence
        .iter()
        .try_fold(prior, |p, e| posterior(p, e.likelihood_true, e.likelihood_false))
}

pub fn odds_update(odds: Odds, bayes_factor: f64) -> Result<Odds> {
    Odds::new(odds.0 * Odds::new(bayes_factor)?.0)
}

/// Multiplies the factors into the prior odds. Factors are combined as
/// summed weights, and converted back only at the end, once the running
/// weight leaves the linear-safe range.
pub fn accumulate(prior: Probability, factors: &[f64]) -> Result<Probability> {
    let mut odds = prior.odds();
    let mut weight = Weight(0.0);
    let mut in_logs = false;
    for &f in factors {
        Odds::new(f)?;
        weight += Weight::from_factor(f);
        if !in_logs && weight.0.abs() > LINEAR_LIMIT_DB {
            in_logs = true;
        }
        if !in_logs {
            odds = Odds(odds.0 * f);
        }
    }
    if in_logs {
        Ok(weight.posterior_from(prior))
    } else {
        Ok(odds.probability())
    }
}

/// The two-coin experiment: hypothesis "the coin is fair" against a
/// two-headed coin. A head has likelihood 1/2 if fair and 1 otherwise; a
/// tail is impossible for the two-headed coin.
pub fn coin_evidence(flip: char) -> Result<Evidence> {
    match flip.to_ascii_uppercase() {
        'H' => Evidence::new(0.5, 1.0),
        'T' => Evidence::new(0.5, 0.0),
        other => Err(Error::InvalidConfig(format!("flip {other:?} is neither H nor T"))),
    }
}

/// Posterior that the coin is fair after each flip, starting from 1/2.
pub fn coin_trajectory(flips: &str) -> Result<Vec<Probability>> {
    let mut p = Probability(0.5);
    let mut out = Vec::with_capacity(flips.len());
    for c in flips.chars().filter(|c| !c.is_whitespace()) {
        let e = coin_evidence(c)?;
        p = posterior(p, e.likelihood_true, e.likelihood_false)?;
        out.push(p);
    }
    Ok(out)
}
