//! Exact finite probability distributions.
//!
//! Masses are stored as nonnegative integer weights over one shared
//! denominator, so every probability is an exact rational and the total is
//! exactly one by construction.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::{Serialize, SerializeSeq, SerializeStruct, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputDistribution<O: Ord> {
    weights: BTreeMap<O, BigUint>,
    denom: BigUint,
}

impl<O: Ord + Clone> OutputDistribution<O> {
    pub fn point(outcome: O) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(outcome, BigUint::one());
        OutputDistribution {
            weights,
            denom: BigUint::one(),
        }
    }

    /// Normalizes unnormalized integer weights. Repeated outcomes accumulate;
    /// zero weights are dropped.
    pub fn from_weights<I, W>(weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (O, W)>,
        W: Into<BigUint>,
    {
        let mut acc: BTreeMap<O, BigUint> = BTreeMap::new();
        let mut total = BigUint::zero();
        for (o, w) in weights {
            let w = w.into();
            if w.is_zero() {
                continue;
            }
            total += &w;
            *acc.entry(o).or_default() += w;
        }
        if total.is_zero() {
            return Err(Error::InvalidParameters(
                "a distribution needs positive total weight".into(),
            ));
        }
        Ok(OutputDistribution {
            weights: acc,
            denom: total,
        })
    }

    /// Outcomes with exact probabilities. Repeated outcomes accumulate; the
    /// masses must sum to exactly one.
    pub fn from_probabilities<I>(probs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (O, BigRational)>,
    {
        let mut acc: BTreeMap<O, BigRational> = BTreeMap::new();
        for (o, p) in probs {
            if p < BigRational::zero() {
                return Err(Error::InvalidParameters(format!(
                    "negative probability {p}"
                )));
            }
            if p.is_zero() {
                continue;
            }
            *acc.entry(o).or_insert_with(BigRational::zero) += p;
        }
        let total: BigRational = acc.values().sum();
        if total != BigRational::one() {
            return Err(Error::InvalidParameters(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let denom = acc.values().fold(BigInt::one(), |l, p| l.lcm(p.denom()));
        let weights = acc
            .into_iter()
            .map(|(o, p)| {
                let w = p.numer() * (&denom / p.denom());
                (o, w.to_biguint().expect("nonnegative"))
            })
            .collect();
        Ok(OutputDistribution {
            weights,
            denom: denom.to_biguint().expect("positive"),
        })
    }

    /// Pushforward through `f`; colliding images merge.
    pub fn map<P: Ord + Clone, F: FnMut(&O) -> P>(&self, mut f: F) -> OutputDistribution<P> {
        let mut weights: BTreeMap<P, BigUint> = BTreeMap::new();
        for (o, w) in &self.weights {
            *weights.entry(f(o)).or_default() += w;
        }
        OutputDistribution {
            weights,
            denom: self.denom.clone(),
        }
    }
}

impl<O: Ord> OutputDistribution<O> {
    pub fn prob(&self, outcome: &O) -> BigRational {
        match self.weights.get(outcome) {
            Some(w) => ratio(w, &self.denom),
            None => BigRational::zero(),
        }
    }

    /// `Pr[outcome satisfies pred]`.
    pub fn mass_where<F: FnMut(&O) -> bool>(&self, mut pred: F) -> BigRational {
        let w: BigUint = self
            .weights
            .iter()
            .filter(|(o, _)| pred(o))
            .map(|(_, w)| w)
            .sum();
        ratio(&w, &self.denom)
    }

    /// Outcomes with positive mass, in outcome order.
    pub fn iter(&self) -> impl Iterator<Item = (&O, BigRational)> + '_ {
        self.weights.iter().map(|(o, w)| (o, ratio(w, &self.denom)))
    }

    pub fn support(&self) -> impl Iterator<Item = &O> + '_ {
        self.weights.keys()
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub(crate) fn weights(&self) -> &BTreeMap<O, BigUint> {
        &self.weights
    }

    pub(crate) fn weight(&self, outcome: &O) -> Option<&BigUint> {
        self.weights.get(outcome)
    }

    pub(crate) fn denominator(&self) -> &BigUint {
        &self.denom
    }

    pub fn total(&self) -> BigRational {
        let w: BigUint = self.weights.values().sum();
        ratio(&w, &self.denom)
    }
}

fn ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

/// `"num/den"` in lowest terms.
pub fn fraction_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Decimal approximation for display.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Serializes as `[{"outcome": .., "probability": "num/den"}, ..]`.
impl<O: Ord + Serialize> Serialize for OutputDistribution<O> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Entry<'a, O>(&'a O, BigRational);
        impl<O: Serialize> Serialize for Entry<'_, O> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut st = serializer.serialize_struct("Entry", 2)?;
                st.serialize_field("outcome", self.0)?;
                st.serialize_field("probability", &fraction_string(&self.1))?;
                st.end()
            }
        }
        let mut seq = serializer.serialize_seq(Some(self.weights.len()))?;
        for (o, p) in self.iter() {
            seq.serialize_element(&Entry(o, p))?;
        }
        seq.end()
    }
}
