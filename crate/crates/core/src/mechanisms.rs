//! Randomized subset-retrieval mechanisms.
//!
//! A mechanism maps a secret size-`d` subset `e` of `V` to a random subset
//! of `V`. The shipped mechanisms are:
//!
//! * `a1sphere`: uniform over the size-`d` subsets at distance exactly `beta`;
//! * `a1ball`: uniform over the size-`d` subsets at distance at most `beta`,
//!   `e` included;
//! * `a2`: `e ∪ B` with `B` uniform over all `beta`-subsets of `V`
//!   (`B` may overlap `e`);
//! * `identity` and `uniform` (uniform over all size-`d` subsets), the two
//!   calibration extremes;
//! * `clamp` and `resize`, post-processing wrappers around another mechanism.
//!
//! Every mechanism can be sampled and can produce its exact output
//! distribution for a given input.

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    ball_size, binomial, enumerate_ball, enumerate_sphere, k_subsets, sample_at_distance,
    sample_uniform_subset, sphere_size, subsets_of, Subset, MAX_GROUND_SET,
};
use crate::distribution::OutputDistribution;
use crate::error::{Error, Result};

/// Default bound on the number of realizations enumerated when building an
/// exact distribution.
pub const DEFAULT_OUTCOME_CAP: u128 = 1_000_000;

/// Anything that turns a size-`d` subset into a random subset of `V`.
///
/// Implementors that are equivariant under every permutation of `V` may
/// return `true` from [`SubsetMechanism::is_symmetric`], which lets the
/// auditor audit one canonical neighbor pair instead of all of them.
pub trait SubsetMechanism {
    /// `n`
    fn ground_size(&self) -> usize;
    /// `d`
    fn input_size(&self) -> usize;
    fn sample_output(&self, e: &Subset, rng: &mut dyn RngCore) -> Result<Subset>;
    fn output_distribution(&self, e: &Subset, cap: u128) -> Result<OutputDistribution<Subset>>;
    fn is_symmetric(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MechanismKind {
    #[serde(rename = "a1sphere")]
    A1Sphere,
    #[serde(rename = "a1ball")]
    A1Ball,
    #[serde(rename = "a2")]
    A2,
    #[serde(rename = "identity")]
    Identity,
    #[serde(rename = "uniform")]
    UniformOverE,
    /// Replaces outputs farther than `beta` from the input by the input.
    #[serde(rename = "clamp")]
    Clamp,
    /// Trims or pads outputs to exactly `d` items, uniformly at random.
    #[serde(rename = "resize")]
    Resize,
}

impl MechanismKind {
    pub fn is_transformer(self) -> bool {
        matches!(self, MechanismKind::Clamp | MechanismKind::Resize)
    }

    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::A1Sphere => "a1sphere",
            MechanismKind::A1Ball => "a1ball",
            MechanismKind::A2 => "a2",
            MechanismKind::Identity => "identity",
            MechanismKind::UniformOverE => "uniform",
            MechanismKind::Clamp => "clamp",
            MechanismKind::Resize => "resize",
        }
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "a1sphere" => MechanismKind::A1Sphere,
            "a1ball" => MechanismKind::A1Ball,
            "a2" => MechanismKind::A2,
            "identity" => MechanismKind::Identity,
            "uniform" => MechanismKind::UniformOverE,
            "clamp" => MechanismKind::Clamp,
            "resize" => MechanismKind::Resize,
            other => {
                return Err(Error::InvalidParameters(format!(
                    "unknown mechanism kind {other:?}"
                )))
            }
        })
    }
}

/// Immutable mechanism descriptor; serializes as `{kind, n, d, beta, inner?}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MechanismRecord")]
pub struct Mechanism {
    kind: MechanismKind,
    n: usize,
    d: usize,
    beta: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    inner: Option<Box<Mechanism>>,
}

#[derive(Deserialize)]
struct MechanismRecord {
    kind: MechanismKind,
    n: usize,
    d: usize,
    beta: usize,
    #[serde(default)]
    inner: Option<Box<Mechanism>>,
}

impl TryFrom<MechanismRecord> for Mechanism {
    type Error = Error;

    fn try_from(r: MechanismRecord) -> Result<Self> {
        let m = Mechanism {
            kind: r.kind,
            n: r.n,
            d: r.d,
            beta: r.beta,
            inner: r.inner,
        };
        m.validate()?;
        Ok(m)
    }
}

fn invalid<T>(msg: String) -> Result<T> {
    Err(Error::InvalidParameters(msg))
}

impl Mechanism {
    /// Builds a base (non-transformer) mechanism.
    pub fn new(kind: MechanismKind, n: usize, d: usize, beta: usize) -> Result<Self> {
        if kind.is_transformer() {
            return invalid(format!(
                "{kind} wraps another mechanism; use the transformer constructors"
            ));
        }
        let m = Mechanism {
            kind,
            n,
            d,
            beta,
            inner: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn a1_sphere(n: usize, d: usize, beta: usize) -> Result<Self> {
        Self::new(MechanismKind::A1Sphere, n, d, beta)
    }

    pub fn a1_ball(n: usize, d: usize, beta: usize) -> Result<Self> {
        Self::new(MechanismKind::A1Ball, n, d, beta)
    }

    pub fn a2(n: usize, d: usize, beta: usize) -> Result<Self> {
        Self::new(MechanismKind::A2, n, d, beta)
    }

    pub fn identity(n: usize, d: usize, beta: usize) -> Result<Self> {
        Self::new(MechanismKind::Identity, n, d, beta)
    }

    pub fn uniform_over_e(n: usize, d: usize, beta: usize) -> Result<Self> {
        Self::new(MechanismKind::UniformOverE, n, d, beta)
    }

    fn validate(&self) -> Result<()> {
        let Mechanism {
            kind, n, d, beta, ..
        } = *self;
        if n > MAX_GROUND_SET {
            return Err(Error::GroundSetTooLarge(n));
        }
        if d == 0 || d >= n {
            return invalid(format!("need 0 < d < n, got n={n}, d={d}"));
        }
        if beta == 0 {
            return invalid("beta must be at least 1".into());
        }
        match kind {
            MechanismKind::A1Sphere | MechanismKind::A1Ball if beta > d.min(n - d) => invalid(
                format!("{kind} needs beta <= min(d, n-d), got beta={beta} with n={n}, d={d}"),
            ),
            MechanismKind::A2 if beta > n => {
                invalid(format!("a2 needs beta <= n, got beta={beta}, n={n}"))
            }
            MechanismKind::Clamp | MechanismKind::Resize => match &self.inner {
                None => invalid(format!("{kind} requires an inner mechanism")),
                Some(inner) if inner.n != n || inner.d != d => {
                    invalid(format!("{kind} must match its inner mechanism's n and d"))
                }
                Some(_) => Ok(()),
            },
            _ if self.inner.is_some() => invalid(format!("{kind} takes no inner mechanism")),
            _ => Ok(()),
        }
    }

    pub fn kind(&self) -> MechanismKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn inner(&self) -> Option<&Mechanism> {
        self.inner.as_deref()
    }

    fn check_input(&self, e: &Subset) -> Result<()> {
        if e.n() != self.n || e.len() != self.d {
            return invalid(format!(
                "input {e} must be a {}-subset of a ground set of size {}, got size {} over {}",
                self.d,
                self.n,
                e.len(),
                e.n()
            ));
        }
        Ok(())
    }

    /// Draws one output for input `e`.
    pub fn sample<R: Rng + ?Sized>(&self, e: &Subset, rng: &mut R) -> Result<Subset> {
        self.check_input(e)?;
        self.sample_unchecked(e, rng)
    }

    fn sample_unchecked<R: Rng + ?Sized>(&self, e: &Subset, rng: &mut R) -> Result<Subset> {
        match self.kind {
            MechanismKind::A1Sphere => a1_sphere_sample(e, self.beta, rng),
            MechanismKind::A1Ball => a1_ball_sample(e, self.beta, rng),
            MechanismKind::A2 => a2_sample(e, self.beta, rng),
            MechanismKind::Identity => Ok(*e),
            MechanismKind::UniformOverE => sample_uniform_subset(self.n, self.d, rng),
            MechanismKind::Clamp => {
                let out = self.inner_ref().sample_unchecked(e, rng)?;
                Ok(if e.distance_unchecked(&out) <= self.beta {
                    out
                } else {
                    *e
                })
            }
            MechanismKind::Resize => {
                let out = self.inner_ref().sample_unchecked(e, rng)?;
                resize_output(&out, self.d, rng)
            }
        }
    }

    fn inner_ref(&self) -> &Mechanism {
        self.inner.as_deref().expect("validated transformer")
    }

    /// Exact distribution of the output on input `e`. `cap` bounds the number
    /// of realizations enumerated.
    pub fn exact_output_distribution(
        &self,
        e: &Subset,
        cap: u128,
    ) -> Result<OutputDistribution<Subset>> {
        self.check_input(e)?;
        self.distribution_unchecked(e, cap)
    }

    fn distribution_unchecked(&self, e: &Subset, cap: u128) -> Result<OutputDistribution<Subset>> {
        let (n, d, beta) = (self.n, self.d, self.beta);
        let guard = |needed: u128| {
            if needed > cap {
                Err(Error::CapExceeded {
                    what: "mechanism outcomes",
                    needed,
                    cap,
                })
            } else {
                Ok(())
            }
        };
        match self.kind {
            MechanismKind::A1Sphere => {
                guard(sphere_size(n, d, beta))?;
                OutputDistribution::from_weights(enumerate_sphere(e, beta).map(|s| (s, 1u32)))
            }
            MechanismKind::A1Ball => {
                guard(ball_size(n, d, beta))?;
                OutputDistribution::from_weights(enumerate_ball(e, beta).map(|s| (s, 1u32)))
            }
            MechanismKind::A2 => {
                guard(binomial(n, beta))?;
                OutputDistribution::from_weights(k_subsets(n, beta)?.map(|b| (e.union(&b), 1u32)))
            }
            MechanismKind::Identity => Ok(OutputDistribution::point(*e)),
            MechanismKind::UniformOverE => {
                guard(binomial(n, d))?;
                OutputDistribution::from_weights(k_subsets(n, d)?.map(|s| (s, 1u32)))
            }
            MechanismKind::Clamp => {
                let inner = self.inner_ref().distribution_unchecked(e, cap)?;
                Ok(inner.map(|s| {
                    if e.distance_unchecked(s) <= beta {
                        *s
                    } else {
                        *e
                    }
                }))
            }
            MechanismKind::Resize => {
                let inner = self.inner_ref().distribution_unchecked(e, cap)?;
                let mut work = 0u128;
                for s in inner.support() {
                    work += resize_choice_count(s, d);
                }
                guard(work)?;
                let mut probs = Vec::new();
                for (s, p) in inner.iter() {
                    let k = resize_choice_count(s, d);
                    let share = p / BigRational::from_integer(BigUint::from(k).into());
                    probs.extend(resize_choices(s, d).map(|r| (r, share.clone())));
                }
                OutputDistribution::from_probabilities(probs)
            }
        }
    }
}

impl SubsetMechanism for Mechanism {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn input_size(&self) -> usize {
        self.d
    }

    fn sample_output(&self, e: &Subset, rng: &mut dyn RngCore) -> Result<Subset> {
        self.sample(e, rng)
    }

    fn output_distribution(&self, e: &Subset, cap: u128) -> Result<OutputDistribution<Subset>> {
        self.exact_output_distribution(e, cap)
    }

    /// Every shipped mechanism commutes with relabelings of `V`.
    fn is_symmetric(&self) -> bool {
        true
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner {
            Some(inner) => write!(f, "{}({inner})", self.kind),
            None => write!(
                f,
                "{}(n={}, d={}, beta={})",
                self.kind, self.n, self.d, self.beta
            ),
        }
    }
}

/// Wraps `m` so that outputs farther than `beta` from the input are replaced
/// by the input itself. The result never violates accuracy.
pub fn clamp_to_accuracy(m: Mechanism) -> Mechanism {
    Mechanism {
        kind: MechanismKind::Clamp,
        n: m.n,
        d: m.d,
        beta: m.beta,
        inner: Some(Box::new(m)),
    }
}

/// Wraps `m` so that every output is trimmed or padded to exactly `d` items.
pub fn resize_to_d(m: Mechanism) -> Mechanism {
    Mechanism {
        kind: MechanismKind::Resize,
        n: m.n,
        d: m.d,
        beta: m.beta,
        inner: Some(Box::new(m)),
    }
}

/// Uniform over `N_beta(e)`.
pub fn a1_sphere_sample<R: Rng + ?Sized>(e: &Subset, beta: usize, rng: &mut R) -> Result<Subset> {
    sample_at_distance(e, beta, rng)
}

/// Uniform over the ball of radius `beta` around `e`, center included.
pub fn a1_ball_sample<R: Rng + ?Sized>(e: &Subset, beta: usize, rng: &mut R) -> Result<Subset> {
    let (n, d) = (e.n(), e.len());
    let total = ball_size(n, d, beta);
    let mut ticket = rng.random_range(0..total);
    for alpha in 0..=beta {
        let size = sphere_size(n, d, alpha);
        if ticket < size {
            return sample_at_distance(e, alpha, rng);
        }
        ticket -= size;
    }
    unreachable!("ticket below the ball size")
}

/// `e ∪ B` with `B` uniform over the `beta`-subsets of `V`.
pub fn a2_sample<R: Rng + ?Sized>(e: &Subset, beta: usize, rng: &mut R) -> Result<Subset> {
    let b = sample_uniform_subset(e.n(), beta, rng)?;
    Ok(e.union(&b))
}

fn resize_choice_count(s: &Subset, d: usize) -> u128 {
    let k = s.len();
    if k > d {
        binomial(k, k - d)
    } else {
        binomial(s.n() - k, d - k)
    }
}

/// The equally likely results of resizing `output` to `d` items: all ways
/// to drop the excess, or all ways to pad from the complement.
pub fn resize_choices(output: &Subset, d: usize) -> Box<dyn Iterator<Item = Subset>> {
    let s = *output;
    let k = s.len();
    if k > d {
        Box::new(subsets_of(&s, k - d).map(move |r| s.difference(&r)))
    } else {
        let comp = s.complement();
        Box::new(subsets_of(&comp, d - k).map(move |a| s.union(&a)))
    }
}

/// Trims or pads `output` to exactly `d` items, uniformly at random.
pub fn resize_output<R: Rng + ?Sized>(output: &Subset, d: usize, rng: &mut R) -> Result<Subset> {
    let k = output.len();
    if d > output.n() {
        return invalid(format!(
            "cannot resize to {d} items over a ground set of {}",
            output.n()
        ));
    }
    let pool = if k > d { *output } else { output.complement() };
    let count = k.abs_diff(d);
    let picks: Vec<usize> = pool.items().collect();
    let chosen = rand::seq::index::sample(rng, picks.len(), count);
    let change = Subset::new(output.n(), chosen.into_iter().map(|i| picks[i]))?;
    Ok(if k > d {
        output.difference(&change)
    } else {
        output.union(&change)
    })
}
