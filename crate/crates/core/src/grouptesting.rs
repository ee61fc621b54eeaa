//! Non-adaptive pooled testing with privacy noise.
//!
//! A [`PoolingDesign`] fixes `L` pools `T_1..T_L` over `V`. The testing
//! function maps the infected set `e` to an `L`-bit [`Syndrome`]:
//!
//! * noiseless: bit `i` is set iff `T_i ∩ e ≠ ∅`;
//! * noise before pooling: a random set `B` is contaminated first, bit `i`
//!   is set iff `T_i ∩ (e ∪ B) ≠ ∅`;
//! * noise after pooling: each bit is forced to 0, forced to 1, or passed
//!   through according to `U_i ∈ {0, 1, 2}`.
//!
//! Noise-before is the special case of noise-after with `U_i = 1` when
//! `T_i ∩ B ≠ ∅` and `U_i = 2` otherwise ([`induced_u_from_b`]).
//!
//! The decoder ([`decode_comp`]) sees the design and the syndrome, never the
//! noise realization.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, RngCore};
use serde::de::{self, Deserialize, Deserializer};
use serde::ser::Serializer;
use serde::Serialize;

use crate::combinatorics::{binomial, k_subsets, sample_uniform_subset, Subset, MAX_GROUND_SET};
use crate::distribution::OutputDistribution;
use crate::error::{Error, Result};
use crate::mechanisms::SubsetMechanism;

/// Outcome of `L` pooled tests; bit `i` is the result of pool `T_{i+1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syndrome(Subset);

impl Syndrome {
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let positives = bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i);
        Ok(Syndrome(Subset::new(bits.len(), positives)?))
    }

    /// Characteristic vector of `s` over `V`, the syndrome of the identity
    /// design.
    pub fn characteristic(s: &Subset) -> Self {
        Syndrome(*s)
    }

    pub fn len(&self) -> usize {
        self.0.n()
    }

    pub fn is_empty(&self) -> bool {
        self.0.n() == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    /// Indices of the positive tests.
    pub fn positives(&self) -> &Subset {
        &self.0
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Syndrome({self})")
    }
}

impl FromStr for Syndrome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameters(format!(
                    "syndrome bit must be 0 or 1, found {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Syndrome::from_bits(&bits)
    }
}

impl Serialize for Syndrome {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Ordered list of pools over `V`; serializes as `{n, pools: [[int]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PoolingDesign {
    n: usize,
    pools: Vec<Subset>,
}

#[derive(serde::Deserialize)]
struct DesignRecord {
    n: usize,
    pools: Vec<Vec<usize>>,
}

impl<'de> Deserialize<'de> for PoolingDesign {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = DesignRecord::deserialize(deserializer)?;
        PoolingDesign::from_pools(raw.n, raw.pools).map_err(de::Error::custom)
    }
}

/// Which design [`build_design`] produces.
#[derive(Clone, Debug, PartialEq)]
pub enum DesignKind {
    /// `L = n` singleton pools `T_i = {i}`.
    Identity { n: usize },
    /// `tests` pools, each item included independently with probability `p`.
    Bernoulli { n: usize, tests: usize, p: f64 },
}

impl PoolingDesign {
    pub fn new(n: usize, pools: Vec<Subset>) -> Result<Self> {
        if pools.is_empty() {
            return Err(Error::InvalidParameters(
                "a design needs at least one pool".into(),
            ));
        }
        if pools.len() > MAX_GROUND_SET {
            return Err(Error::InvalidParameters(format!(
                "at most {MAX_GROUND_SET} pools are supported, got {}",
                pools.len()
            )));
        }
        if let Some(bad) = pools.iter().find(|p| p.n() != n) {
            return Err(Error::GroundSetMismatch {
                left: n,
                right: bad.n(),
            });
        }
        Ok(PoolingDesign { n, pools })
    }

    pub fn from_pools(n: usize, pools: Vec<Vec<usize>>) -> Result<Self> {
        let pools = pools
            .into_iter()
            .map(|p| Subset::new(n, p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, pools)
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameters(
                "identity design needs n >= 1".into(),
            ));
        }
        let pools = (0..n)
            .map(|i| Subset::new(n, [i]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, pools)
    }

    pub fn bernoulli<R: Rng + ?Sized>(n: usize, tests: usize, p: f64, rng: &mut R) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameters(format!(
                "inclusion probability must lie in (0, 1), got {p}"
            )));
        }
        let pools = (0..tests)
            .map(|_| Subset::new(n, (0..n).filter(|_| rng.random_bool(p))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, pools)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of tests `L`.
    pub fn tests(&self) -> usize {
        self.pools.len()
    }

    pub fn pools(&self) -> &[Subset] {
        &self.pools
    }

    pub fn is_identity(&self) -> bool {
        self.pools.len() == self.n
            && self
                .pools
                .iter()
                .enumerate()
                .all(|(i, p)| p.len() == 1 && p.contains(i))
    }

    /// Whether every relabeling of `V` maps the design onto itself up to a
    /// reordering of tests. Holds for the identity design and for designs
    /// made only of empty and full pools.
    pub fn is_permutation_invariant(&self) -> bool {
        self.is_identity() || self.pools.iter().all(|p| p.is_empty() || p.len() == self.n)
    }
}

pub fn build_design(kind: &DesignKind, rng: &mut dyn RngCore) -> Result<PoolingDesign> {
    match *kind {
        DesignKind::Identity { n } => PoolingDesign::identity(n),
        DesignKind::Bernoulli { n, tests, p } => PoolingDesign::bernoulli(n, tests, p, rng),
    }
}

/// Per-test noise-after instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UValue {
    /// Force the result negative (`U_i = 0`).
    Zero,
    /// Force the result positive (`U_i = 1`).
    One,
    /// Report the true pooled result (`U_i = 2`).
    Pass,
}

impl UValue {
    pub fn code(self) -> u8 {
        match self {
            UValue::Zero => 0,
            UValue::One => 1,
            UValue::Pass => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(UValue::Zero),
            1 => Ok(UValue::One),
            2 => Ok(UValue::Pass),
            other => Err(Error::InvalidParameters(format!(
                "U values are 0, 1 or 2, got {other}"
            ))),
        }
    }
}

/// Distribution of the noise-after variables.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum UModel {
    /// `U_i` i.i.d. with `Pr[U_i = k] = q_k`.
    IndependentU {
        #[serde(serialize_with = "ser_fraction")]
        q0: BigRational,
        #[serde(serialize_with = "ser_fraction")]
        q1: BigRational,
        #[serde(serialize_with = "ser_fraction")]
        q2: BigRational,
    },
    /// `U` induced by a uniform `beta`-subset `B` as in noise-before.
    InducedFromB { beta: usize },
}

fn ser_fraction<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(&crate::distribution::fraction_string(r))
}

impl UModel {
    pub fn independent(q0: BigRational, q1: BigRational, q2: BigRational) -> Result<Self> {
        let zero = BigRational::zero();
        if q0 < zero || q1 < zero || q2 < zero {
            return Err(Error::InvalidParameters(
                "U probabilities must be nonnegative".into(),
            ));
        }
        if &q0 + &q1 + &q2 != BigRational::one() {
            return Err(Error::InvalidParameters(format!(
                "U probabilities must sum to 1, got {}",
                &q0 + &q1 + &q2
            )));
        }
        Ok(UModel::IndependentU { q0, q1, q2 })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum NoiseSpec {
    Noiseless,
    /// Contaminate a uniform `beta`-subset `B` of `V` before pooling.
    Before {
        beta: usize,
    },
    After(UModel),
}

impl NoiseSpec {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseSpec::Noiseless => "none",
            NoiseSpec::Before { .. } => "before",
            NoiseSpec::After(UModel::IndependentU { .. }) => "after-iid",
            NoiseSpec::After(UModel::InducedFromB { .. }) => "after-induced",
        }
    }
}

/// One draw of the testing function's randomness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NoiseRealization {
    None,
    Contamination(Subset),
    Overwrite(Vec<UValue>),
}

/// Applies the testing function for a fixed noise realization.
pub fn run_tests(design: &PoolingDesign, e: &Subset, noise: &NoiseRealization) -> Result<Syndrome> {
    if e.n() != design.n {
        return Err(Error::GroundSetMismatch {
            left: design.n,
            right: e.n(),
        });
    }
    let bits: Vec<bool> = match noise {
        NoiseRealization::None => design.pools.iter().map(|t| t.intersects(e)).collect(),
        NoiseRealization::Contamination(b) => {
            if b.n() != design.n {
                return Err(Error::GroundSetMismatch {
                    left: design.n,
                    right: b.n(),
                });
            }
            let tainted = e.union(b);
            design
                .pools
                .iter()
                .map(|t| t.intersects(&tainted))
                .collect()
        }
        NoiseRealization::Overwrite(u) => {
            if u.len() != design.tests() {
                return Err(Error::LengthMismatch {
                    expected: design.tests(),
                    found: u.len(),
                });
            }
            design
                .pools
                .iter()
                .zip(u)
                .map(|(t, u)| match u {
                    UValue::Zero => false,
                    UValue::One => true,
                    UValue::Pass => t.intersects(e),
                })
                .collect()
        }
    };
    Syndrome::from_bits(&bits)
}

/// `U_i = 1` if `T_i ∩ B ≠ ∅`, else `U_i = 2`.
pub fn induced_u_from_b(design: &PoolingDesign, b: &Subset) -> Vec<UValue> {
    design
        .pools
        .iter()
        .map(|t| {
            if t.intersects(b) {
                UValue::One
            } else {
                UValue::Pass
            }
        })
        .collect()
}

/// Integer thresholds for drawing `U` exactly: `(t0, t0 + t1, denominator)`.
fn u_thresholds(
    q0: &BigRational,
    q1: &BigRational,
    q2: &BigRational,
) -> Result<(u128, u128, u128)> {
    let den = q0.denom().lcm(q1.denom()).lcm(q2.denom());
    let scaled = |q: &BigRational| -> BigInt { q.numer() * (&den / q.denom()) };
    let too_fine =
        || Error::InvalidParameters("U probabilities need a denominator below 2^128".into());
    let a = scaled(q0).to_u128().ok_or_else(too_fine)?;
    let b = scaled(q1).to_u128().ok_or_else(too_fine)?;
    let d = den.to_u128().ok_or_else(too_fine)?;
    Ok((a, a + b, d))
}

/// Draws the testing function's randomness. Never looks at `e`.
pub fn sample_noise(
    noise: &NoiseSpec,
    design: &PoolingDesign,
    rng: &mut dyn RngCore,
) -> Result<NoiseRealization> {
    match noise {
        NoiseSpec::Noiseless => Ok(NoiseRealization::None),
        NoiseSpec::Before { beta } => Ok(NoiseRealization::Contamination(sample_uniform_subset(
            design.n, *beta, rng,
        )?)),
        NoiseSpec::After(UModel::InducedFromB { beta }) => {
            let b = sample_uniform_subset(design.n, *beta, rng)?;
            Ok(NoiseRealization::Overwrite(induced_u_from_b(design, &b)))
        }
        NoiseSpec::After(UModel::IndependentU { q0, q1, q2 }) => {
            let (cut0, cut1, den) = u_thresholds(q0, q1, q2)?;
            let u = (0..design.tests())
                .map(|_| {
                    let x = rng.random_range(0..den);
                    if x < cut0 {
                        UValue::Zero
                    } else if x < cut1 {
                        UValue::One
                    } else {
                        UValue::Pass
                    }
                })
                .collect();
            Ok(NoiseRealization::Overwrite(u))
        }
    }
}

/// COMP: every item that appears in a negative pool is declared clean; all
/// remaining items are returned.
pub fn decode_comp(design: &PoolingDesign, syndrome: &Syndrome) -> Result<Subset> {
    if syndrome.len() != design.tests() {
        return Err(Error::LengthMismatch {
            expected: design.tests(),
            found: syndrome.len(),
        });
    }
    let mut cleared = Subset::empty(design.n)?;
    for (i, pool) in design.pools.iter().enumerate() {
        if !syndrome.bit(i) {
            cleared = cleared.union(pool);
        }
    }
    Ok(cleared.complement())
}

/// Exact distribution of `T(e)` over `{0,1}^L`.
///
/// Contamination noise enumerates all `C(n, beta)` sets `B`. Independent
/// noise-after is computed test by test, so only syndromes with positive
/// mass are materialized; `cap` bounds their number.
pub fn syndrome_distribution_exact(
    design: &PoolingDesign,
    e: &Subset,
    noise: &NoiseSpec,
    cap: u128,
) -> Result<OutputDistribution<Syndrome>> {
    let guard = |needed: u128, what: &'static str| {
        if needed > cap {
            Err(Error::CapExceeded { what, needed, cap })
        } else {
            Ok(())
        }
    };
    match noise {
        NoiseSpec::Noiseless => Ok(OutputDistribution::point(run_tests(
            design,
            e,
            &NoiseRealization::None,
        )?)),
        NoiseSpec::Before { beta } | NoiseSpec::After(UModel::InducedFromB { beta }) => {
            guard(binomial(design.n, *beta), "noise sets B")?;
            let mut outcomes = Vec::new();
            for b in k_subsets(design.n, *beta)? {
                let realization = match noise {
                    NoiseSpec::Before { .. } => NoiseRealization::Contamination(b),
                    _ => NoiseRealization::Overwrite(induced_u_from_b(design, &b)),
                };
                outcomes.push((run_tests(design, e, &realization)?, 1u32));
            }
            OutputDistribution::from_weights(outcomes)
        }
        NoiseSpec::After(UModel::IndependentU { q1, q2, .. }) => {
            // bit i is 1 w.p. q1 + q2 * [T_i ∩ e ≠ ∅]
            let truth = run_tests(design, e, &NoiseRealization::None)?;
            let one = BigRational::one();
            let mut partial: Vec<(Vec<bool>, BigRational)> = vec![(Vec::new(), one)];
            for i in 0..design.tests() {
                let p1 = if truth.bit(i) { q1 + q2 } else { q1.clone() };
                let p0 = BigRational::one() - &p1;
                let mut next = Vec::with_capacity(partial.len() * 2);
                for (bits, p) in partial {
                    if !p0.is_zero() {
                        let mut b = bits.clone();
                        b.push(false);
                        next.push((b, &p * &p0));
                    }
                    if !p1.is_zero() {
                        let mut b = bits;
                        b.push(true);
                        next.push((b, &p * &p1));
                    }
                }
                guard(next.len() as u128, "syndromes")?;
                partial = next;
            }
            let probs = partial
                .into_iter()
                .map(|(bits, p)| Ok((Syndrome::from_bits(&bits)?, p)))
                .collect::<Result<Vec<_>>>()?;
            OutputDistribution::from_probabilities(probs)
        }
    }
}

/// Contents of one tube handed from the collector to the lab.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PooledSpecimen {
    /// Individuals whose own vial went into the tube.
    pub vials: Subset,
    /// Whether the tube received the known-contaminated mixture of all vials.
    pub spiked: bool,
}

/// Collects specimens, injects noise and assembles the pools. Has no
/// testing capability and is never told who is infected.
pub struct SpecimenCollector<'a> {
    design: &'a PoolingDesign,
    noise: &'a NoiseSpec,
}

impl<'a> SpecimenCollector<'a> {
    pub fn new(design: &'a PoolingDesign, noise: &'a NoiseSpec) -> Self {
        SpecimenCollector { design, noise }
    }

    /// Draws the noise and prepares one tube per pool.
    pub fn prepare(&self, rng: &mut dyn RngCore) -> Result<Vec<PooledSpecimen>> {
        let realization = sample_noise(self.noise, self.design, rng)?;
        Ok(self.assemble(&realization))
    }

    fn assemble(&self, realization: &NoiseRealization) -> Vec<PooledSpecimen> {
        self.design
            .pools
            .iter()
            .enumerate()
            .map(|(i, pool)| match realization {
                NoiseRealization::None => PooledSpecimen {
                    vials: *pool,
                    spiked: false,
                },
                // vials of B are swapped for the contaminated mixture
                NoiseRealization::Contamination(b) => PooledSpecimen {
                    vials: pool.difference(b),
                    spiked: pool.intersects(b),
                },
                NoiseRealization::Overwrite(u) => match u[i] {
                    UValue::Zero => PooledSpecimen {
                        vials: pool.difference(pool),
                        spiked: false,
                    },
                    UValue::One => PooledSpecimen {
                        vials: *pool,
                        spiked: true,
                    },
                    UValue::Pass => PooledSpecimen {
                        vials: *pool,
                        spiked: false,
                    },
                },
            })
            .collect()
    }
}

/// Runs the assays and decodes; knows the design and noise type only.
pub struct Lab<'a> {
    design: &'a PoolingDesign,
}

impl<'a> Lab<'a> {
    pub fn new(design: &'a PoolingDesign) -> Self {
        Lab { design }
    }

    /// A tube tests positive iff it holds contaminated material. `infected`
    /// stands in for the physical state of the vials.
    pub fn assay(&self, tubes: &[PooledSpecimen], infected: &Subset) -> Result<Syndrome> {
        if tubes.len() != self.design.tests() {
            return Err(Error::LengthMismatch {
                expected: self.design.tests(),
                found: tubes.len(),
            });
        }
        let bits: Vec<bool> = tubes
            .iter()
            .map(|t| t.spiked || t.vials.intersects(infected))
            .collect();
        Syndrome::from_bits(&bits)
    }

    pub fn decode(&self, syndrome: &Syndrome) -> Result<Subset> {
        decode_comp(self.design, syndrome)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimulationRecord {
    pub syndrome: Syndrome,
    pub decoded: Subset,
    pub distance_to_e: usize,
}

/// One collector-to-lab round on infected set `e`.
pub fn simulate(
    design: &PoolingDesign,
    e: &Subset,
    noise: &NoiseSpec,
    rng: &mut dyn RngCore,
) -> Result<SimulationRecord> {
    if e.n() != design.n {
        return Err(Error::GroundSetMismatch {
            left: design.n,
            right: e.n(),
        });
    }
    let tubes = SpecimenCollector::new(design, noise).prepare(rng)?;
    let lab = Lab::new(design);
    let syndrome = lab.assay(&tubes, e)?;
    let decoded = lab.decode(&syndrome)?;
    Ok(SimulationRecord {
        syndrome,
        decoded,
        distance_to_e: decoded.distance(e)?,
    })
}

/// Testing function followed by COMP decoding, viewed as a subset mechanism.
#[derive(Clone, Debug)]
pub struct GroupTestingPipeline {
    pub design: PoolingDesign,
    pub noise: NoiseSpec,
    pub d: usize,
}

impl SubsetMechanism for GroupTestingPipeline {
    fn ground_size(&self) -> usize {
        self.design.n
    }

    fn input_size(&self) -> usize {
        self.d
    }

    fn sample_output(&self, e: &Subset, rng: &mut dyn RngCore) -> Result<Subset> {
        Ok(simulate(&self.design, e, &self.noise, rng)?.decoded)
    }

    fn output_distribution(&self, e: &Subset, cap: u128) -> Result<OutputDistribution<Subset>> {
        let syndromes = syndrome_distribution_exact(&self.design, e, &self.noise, cap)?;
        let mut decoded = Vec::with_capacity(syndromes.support_len());
        for (s, p) in syndromes.iter() {
            decoded.push((decode_comp(&self.design, s)?, p));
        }
        OutputDistribution::from_probabilities(decoded)
    }

    fn is_symmetric(&self) -> bool {
        self.design.is_permutation_invariant()
    }
}

/// `q` as an exact rational from `"a/b"` or a finite decimal like `"0.25"`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::InvalidParameters(format!("cannot read {text:?} as a rational"));
    let text = text.trim();
    if let Some((a, b)) = text.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(a, b));
    }
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if frac.chars().any(|c| !c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = num_traits::pow(BigUint::from(10u32), frac.len());
    Ok(BigRational::new(digits, scale.into()))
}
