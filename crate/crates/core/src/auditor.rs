//! Exact privacy and accuracy audits.
//!
//! For an ordered pair of output distributions `p`, `q` and a multiplier
//! `t = e^eps2`, the smallest `delta` with `p(S) <= t q(S) + delta` for every
//! event `S` is attained at `S+ = {s : p(s) >= t q(s)}`, so
//!
//! ```text
//! delta*(p, q, t) = sum_s max(0, p(s) - t q(s))
//! ```
//!
//! and no event is ever enumerated. A mechanism's audited delta is the
//! maximum of that quantity over all ordered neighbor pairs `(e_i, e_j)`,
//! `d(e_i, e_j) = 1`. Everything on the exact path is rational arithmetic
//! over arbitrary-precision integers.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::combinatorics::{
    binomial, enumerate_sphere, k_subsets, sample_at_distance, sample_uniform_subset, Subset,
};
use crate::distribution::{fraction_string, to_f64, OutputDistribution};
use crate::error::{Error, Result};
use crate::grouptesting::{syndrome_distribution_exact, NoiseSpec, PoolingDesign};
use crate::mechanisms::{SubsetMechanism, DEFAULT_OUTCOME_CAP};

/// Default bound on the number of neighbor pairs (or inputs) a full scan visits.
pub const DEFAULT_PAIR_CAP: u128 = 10_000;

/// Extra random pairs audited to confirm the symmetric fast path.
pub const DEFAULT_VERIFY_PAIRS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanPolicy {
    /// Symmetric fast path when the audited object declares symmetry,
    /// full scan otherwise.
    Auto,
    Full,
    Symmetric,
}

/// How a report was actually produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    Full,
    Symmetric,
}

#[derive(Clone, Debug)]
pub struct AuditOptions {
    pub outcome_cap: u128,
    pub pair_cap: u128,
    pub scan: ScanPolicy,
    pub verify_pairs: usize,
    /// Seed for choosing verification pairs.
    pub seed: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            outcome_cap: DEFAULT_OUTCOME_CAP,
            pair_cap: DEFAULT_PAIR_CAP,
            scan: ScanPolicy::Auto,
            verify_pairs: DEFAULT_VERIFY_PAIRS,
            seed: 0,
        }
    }
}

impl AuditOptions {
    pub fn full() -> Self {
        AuditOptions {
            scan: ScanPolicy::Full,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub delta_star: BigRational,
    pub worst_pair: (Subset, Subset),
    pub pairs_scanned: u64,
    pub scan: ScanMode,
    pub multiplier: BigRational,
}

impl Serialize for AuditReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("AuditReport", 6)?;
        st.serialize_field("delta_star", &fraction_string(&self.delta_star))?;
        st.serialize_field("delta_star_decimal", &to_f64(&self.delta_star))?;
        st.serialize_field("worst_pair", &[self.worst_pair.0, self.worst_pair.1])?;
        st.serialize_field("pairs_scanned", &self.pairs_scanned)?;
        st.serialize_field("scan", &self.scan)?;
        st.serialize_field("multiplier", &fraction_string(&self.multiplier))?;
        st.end()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyReport {
    /// `max_e Pr[d(output, e) > beta]`.
    pub eps1_exact: BigRational,
    pub worst_input: Subset,
    pub inputs_scanned: u64,
    pub scan: ScanMode,
}

impl Serialize for AccuracyReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("AccuracyReport", 5)?;
        st.serialize_field("eps1", &fraction_string(&self.eps1_exact))?;
        st.serialize_field("eps1_decimal", &to_f64(&self.eps1_exact))?;
        st.serialize_field("worst_input", &self.worst_input)?;
        st.serialize_field("inputs_scanned", &self.inputs_scanned)?;
        st.serialize_field("scan", &self.scan)?;
        st.end()
    }
}

fn check_multiplier(t: &BigRational) -> Result<()> {
    if *t < BigRational::one() {
        return Err(Error::InvalidParameters(format!(
            "multiplier t = {t} must be >= 1"
        )));
    }
    Ok(())
}

/// `sum_s max(0, p(s) - t q(s))`, exact.
pub fn delta_star<O: Ord>(
    p: &OutputDistribution<O>,
    q: &OutputDistribution<O>,
    t: &BigRational,
) -> Result<BigRational> {
    check_multiplier(t)?;
    let dp = p.denominator();
    let dq = q.denominator();
    if dp == dq && t.is_one() {
        let mut acc = BigUint::zero();
        for (s, wp) in p.weights() {
            match q.weight(s) {
                Some(wq) if wq >= wp => {}
                Some(wq) => acc += wp - wq,
                None => acc += wp,
            }
        }
        return Ok(BigRational::new(acc.into(), dp.clone().into()));
    }
    // p(s) - t q(s) = (wp dq tden - wq dp tnum) / (dp dq tden)
    let scale_p = BigInt::from(dq.clone()) * t.denom();
    let scale_q = BigInt::from(dp.clone()) * t.numer();
    let mut acc = BigInt::zero();
    for (s, wp) in p.weights() {
        let lhs = BigInt::from(wp.clone()) * &scale_p;
        let term = match q.weight(s) {
            Some(wq) => lhs - BigInt::from(wq.clone()) * &scale_q,
            None => lhs,
        };
        if term.is_positive() {
            acc += term;
        }
    }
    let denom = BigInt::from(dp.clone()) * BigInt::from(dq.clone()) * t.denom();
    Ok(BigRational::new(acc, denom))
}

/// Total-variation distance, computed independently of [`delta_star`].
pub fn total_variation<O: Ord>(
    p: &OutputDistribution<O>,
    q: &OutputDistribution<O>,
) -> BigRational {
    let mut keys: Vec<&O> = p.support().chain(q.support()).collect();
    keys.sort();
    keys.dedup();
    let sum: BigRational = keys
        .into_iter()
        .map(|s| (p.prob(s) - q.prob(s)).abs())
        .sum();
    sum / BigRational::from_integer(2.into())
}

/// The neighbor pair every symmetric audit starts from:
/// `{0..d-1}` and `{0..d-2} ∪ {d}`.
pub fn canonical_pair(n: usize, d: usize) -> Result<(Subset, Subset)> {
    if d == 0 || d >= n {
        return Err(Error::InvalidParameters(format!(
            "need 0 < d < n, got n={n}, d={d}"
        )));
    }
    let e_i = Subset::prefix(n, d)?;
    let e_j = Subset::new(n, (0..d - 1).chain(std::iter::once(d)))?;
    Ok((e_i, e_j))
}

fn random_pair<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<(Subset, Subset)> {
    let e_i = sample_uniform_subset(n, d, rng)?;
    let e_j = sample_at_distance(&e_i, 1, rng)?;
    Ok((e_i, e_j))
}

fn neighbor_pair_count(n: usize, d: usize) -> u128 {
    binomial(n, d) * (d as u128) * ((n - d) as u128)
}

/// Shared pair-scanning engine for mechanisms and testing functions.
fn audit_pairs<O, F>(
    n: usize,
    d: usize,
    t: &BigRational,
    opts: &AuditOptions,
    symmetric: bool,
    mut dist: F,
) -> Result<AuditReport>
where
    O: Ord,
    F: FnMut(&Subset) -> Result<OutputDistribution<O>>,
{
    check_multiplier(t)?;
    let use_fast = match opts.scan {
        ScanPolicy::Auto => symmetric,
        ScanPolicy::Full => false,
        ScanPolicy::Symmetric => true,
    };
    if use_fast {
        let (e_i, e_j) = canonical_pair(n, d)?;
        let value = delta_star(&dist(&e_i)?, &dist(&e_j)?, t)?;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut agreed = true;
        for _ in 0..opts.verify_pairs {
            let (a, b) = random_pair(n, d, &mut rng)?;
            if delta_star(&dist(&a)?, &dist(&b)?, t)? != value {
                agreed = false;
                break;
            }
        }
        if agreed {
            return Ok(AuditReport {
                delta_star: value,
                worst_pair: (e_i, e_j),
                pairs_scanned: 1 + opts.verify_pairs as u64,
                scan: ScanMode::Symmetric,
                multiplier: t.clone(),
            });
        }
    }
    full_scan(n, d, t, opts, &mut dist)
}

fn full_scan<O, F>(
    n: usize,
    d: usize,
    t: &BigRational,
    opts: &AuditOptions,
    dist: &mut F,
) -> Result<AuditReport>
where
    O: Ord,
    F: FnMut(&Subset) -> Result<OutputDistribution<O>>,
{
    canonical_pair(n, d)?;
    let needed = neighbor_pair_count(n, d);
    if needed > opts.pair_cap {
        return Err(Error::CapExceeded {
            what: "neighbor pairs",
            needed,
            cap: opts.pair_cap,
        });
    }
    let mut cache: BTreeMap<Subset, OutputDistribution<O>> = BTreeMap::new();
    for e in k_subsets(n, d)? {
        cache.insert(e, dist(&e)?);
    }
    let mut best: Option<(BigRational, (Subset, Subset))> = None;
    let mut scanned = 0u64;
    for (e_i, p) in &cache {
        for e_j in enumerate_sphere(e_i, 1) {
            let value = delta_star(p, &cache[&e_j], t)?;
            scanned += 1;
            let better = match &best {
                None => true,
                Some((b, _)) => value.cmp(b) == Ordering::Greater,
            };
            if better {
                best = Some((value, (*e_i, e_j)));
            }
        }
    }
    let (delta_star, worst_pair) = best.expect("at least one neighbor pair");
    Ok(AuditReport {
        delta_star,
        worst_pair,
        pairs_scanned: scanned,
        scan: ScanMode::Full,
        multiplier: t.clone(),
    })
}

/// Exact delta for one ordered pair of inputs.
pub fn pair_delta<M: SubsetMechanism + ?Sized>(
    m: &M,
    e_i: &Subset,
    e_j: &Subset,
    t: &BigRational,
    cap: u128,
) -> Result<BigRational> {
    delta_star(
        &m.output_distribution(e_i, cap)?,
        &m.output_distribution(e_j, cap)?,
        t,
    )
}

/// Audited delta of a mechanism: the worst ordered neighbor pair.
pub fn audit_privacy<M: SubsetMechanism + ?Sized>(
    m: &M,
    t: &BigRational,
    opts: &AuditOptions,
) -> Result<AuditReport> {
    let cap = opts.outcome_cap;
    audit_pairs(
        m.ground_size(),
        m.input_size(),
        t,
        opts,
        m.is_symmetric(),
        |e| m.output_distribution(e, cap),
    )
}

/// Every ordered neighbor pair with its exact delta, in scan order.
pub fn all_pair_deltas<M: SubsetMechanism + ?Sized>(
    m: &M,
    t: &BigRational,
    opts: &AuditOptions,
) -> Result<Vec<((Subset, Subset), BigRational)>> {
    let (n, d) = (m.ground_size(), m.input_size());
    let needed = neighbor_pair_count(n, d);
    if needed > opts.pair_cap {
        return Err(Error::CapExceeded {
            what: "neighbor pairs",
            needed,
            cap: opts.pair_cap,
        });
    }
    let mut cache = BTreeMap::new();
    for e in k_subsets(n, d)? {
        cache.insert(e, m.output_distribution(&e, opts.outcome_cap)?);
    }
    let mut out = Vec::new();
    for (e_i, p) in &cache {
        for e_j in enumerate_sphere(e_i, 1) {
            out.push(((*e_i, e_j), delta_star(p, &cache[&e_j], t)?));
        }
    }
    Ok(out)
}

/// Exact accuracy failure `max_e Pr[d(output, e) > beta]`.
pub fn audit_accuracy<M: SubsetMechanism + ?Sized>(
    m: &M,
    beta: usize,
    opts: &AuditOptions,
) -> Result<AccuracyReport> {
    let (n, d) = (m.ground_size(), m.input_size());
    let failure = |e: &Subset| -> Result<BigRational> {
        let dist = m.output_distribution(e, opts.outcome_cap)?;
        Ok(dist.mass_where(|o| o.distance_unchecked(e) > beta))
    };
    let use_fast = match opts.scan {
        ScanPolicy::Auto => m.is_symmetric(),
        ScanPolicy::Full => false,
        ScanPolicy::Symmetric => true,
    };
    if use_fast {
        let (e0, _) = canonical_pair(n, d)?;
        let value = failure(&e0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut agreed = true;
        for _ in 0..opts.verify_pairs {
            let e = sample_uniform_subset(n, d, &mut rng)?;
            if failure(&e)? != value {
                agreed = false;
                break;
            }
        }
        if agreed {
            return Ok(AccuracyReport {
                eps1_exact: value,
                worst_input: e0,
                inputs_scanned: 1 + opts.verify_pairs as u64,
                scan: ScanMode::Symmetric,
            });
        }
    }
    let needed = binomial(n, d);
    if needed > opts.pair_cap {
        return Err(Error::CapExceeded {
            what: "inputs",
            needed,
            cap: opts.pair_cap,
        });
    }
    let mut best: Option<(BigRational, Subset)> = None;
    let mut scanned = 0;
    for e in k_subsets(n, d)? {
        let value = failure(&e)?;
        scanned += 1;
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, e));
        }
    }
    let (eps1_exact, worst_input) = best.expect("at least one input");
    Ok(AccuracyReport {
        eps1_exact,
        worst_input,
        inputs_scanned: scanned,
        scan: ScanMode::Full,
    })
}

/// Audited delta of a pooled testing function, over syndromes.
pub fn audit_testing_privacy(
    design: &PoolingDesign,
    noise: &NoiseSpec,
    d: usize,
    t: &BigRational,
    opts: &AuditOptions,
) -> Result<AuditReport> {
    let cap = opts.outcome_cap;
    audit_pairs(
        design.n(),
        d,
        t,
        opts,
        design.is_permutation_invariant(),
        |e| syndrome_distribution_exact(design, e, noise, cap),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub samples: u64,
    pub note: &'static str,
}

const MC_NOTE: &str =
    "plug-in estimate from empirical output frequencies; biased upward at small sample counts";

/// Monte-Carlo plug-in estimate of the pair delta: `samples` draws on each
/// input, empirical distributions, then [`delta_star`].
pub fn mc_estimate_delta<M: SubsetMechanism + ?Sized>(
    m: &M,
    pair: (&Subset, &Subset),
    t: &BigRational,
    samples: u64,
    rng: &mut dyn RngCore,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameters("need at least one sample".into()));
    }
    let mut empirical = |e: &Subset| -> Result<OutputDistribution<Subset>> {
        let mut counts: BTreeMap<Subset, u64> = BTreeMap::new();
        for _ in 0..samples {
            *counts.entry(m.sample_output(e, rng)?).or_default() += 1;
        }
        OutputDistribution::from_weights(counts)
    };
    let p = empirical(pair.0)?;
    let q = empirical(pair.1)?;
    let value = delta_star(&p, &q, t)?;
    Ok(McEstimate {
        estimate: to_f64(&value),
        samples,
        note: MC_NOTE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{clamp_to_accuracy, Mechanism};
    use proptest::prelude::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn s(n: usize, items: &[usize]) -> Subset {
        Subset::new(n, items.iter().copied()).unwrap()
    }

    #[test]
    fn delta_star_basic_cases() {
        let p = OutputDistribution::from_weights([(0u8, 1u32), (1, 1)]).unwrap();
        assert_eq!(delta_star(&p, &p, &q(1, 1)).unwrap(), q(0, 1));
        let a = OutputDistribution::point(0u8);
        let b = OutputDistribution::point(1u8);
        assert_eq!(delta_star(&a, &b, &q(1, 1)).unwrap(), q(1, 1));
        assert!(delta_star(&a, &b, &q(1, 2)).is_err());
        // mixed denominators and t > 1
        let p = OutputDistribution::from_weights([(0u8, 2u32), (1, 1)]).unwrap();
        let r = OutputDistribution::from_weights([(0u8, 1u32), (1, 1)]).unwrap();
        assert_eq!(delta_star(&p, &r, &q(1, 1)).unwrap(), q(1, 6));
        assert_eq!(delta_star(&p, &r, &q(5, 4)).unwrap(), q(2, 3) - q(5, 8));
    }

    #[test]
    fn ball_pair_example() {
        let m = Mechanism::a1_ball(6, 2, 1).unwrap();
        let v = pair_delta(
            &m,
            &s(6, &[0, 1]),
            &s(6, &[0, 2]),
            &q(1, 1),
            DEFAULT_OUTCOME_CAP,
        )
        .unwrap();
        assert_eq!(v, q(1, 3));
    }

    #[test]
    fn audits_of_spot_configuration() {
        let t = q(1, 1);
        for (m, want) in [
            (Mechanism::a1_ball(6, 2, 1).unwrap(), q(1, 3)),
            (Mechanism::a1_sphere(6, 2, 1).unwrap(), q(1, 2)),
            (Mechanism::a2(6, 2, 1).unwrap(), q(5, 6)),
        ] {
            let fast = audit_privacy(&m, &t, &AuditOptions::default()).unwrap();
            let full = audit_privacy(&m, &t, &AuditOptions::full()).unwrap();
            assert_eq!(fast.delta_star, want, "{m}");
            assert_eq!(full.delta_star, want, "{m}");
            assert_eq!(fast.scan, ScanMode::Symmetric);
            assert_eq!(full.scan, ScanMode::Full);
            assert_eq!(full.pairs_scanned, 15 * 8);
            assert_eq!(full.worst_pair.0.distance(&full.worst_pair.1).unwrap(), 1);
        }
    }

    #[test]
    fn accuracy_examples() {
        let opts = AuditOptions::full();
        let uniform = Mechanism::uniform_over_e(6, 2, 1).unwrap();
        assert_eq!(
            audit_accuracy(&uniform, 1, &opts).unwrap().eps1_exact,
            q(2, 5)
        );
        assert_eq!(
            audit_accuracy(&clamp_to_accuracy(uniform), 1, &opts)
                .unwrap()
                .eps1_exact,
            q(0, 1)
        );
        let a2 = Mechanism::a2(7, 3, 2).unwrap();
        assert_eq!(audit_accuracy(&a2, 2, &opts).unwrap().eps1_exact, q(0, 1));
    }

    /// A deliberately asymmetric mechanism: item 0 is never reported.
    struct DropZero;

    impl SubsetMechanism for DropZero {
        fn ground_size(&self) -> usize {
            5
        }
        fn input_size(&self) -> usize {
            2
        }
        fn sample_output(&self, e: &Subset, _rng: &mut dyn rand::RngCore) -> Result<Subset> {
            Ok(e.difference(&Subset::new(5, [0])?))
        }
        fn output_distribution(
            &self,
            e: &Subset,
            _cap: u128,
        ) -> Result<OutputDistribution<Subset>> {
            Ok(OutputDistribution::point(
                e.difference(&Subset::new(5, [0])?),
            ))
        }
    }

    #[test]
    fn unknown_mechanisms_get_a_full_scan() {
        let report = audit_privacy(&DropZero, &q(1, 1), &AuditOptions::default()).unwrap();
        assert_eq!(report.scan, ScanMode::Full);
        assert_eq!(report.pairs_scanned, 10 * 6);
        assert_eq!(report.delta_star, q(1, 1));
        // forcing the fast path still falls back once verification disagrees
        let forced = AuditOptions {
            scan: ScanPolicy::Symmetric,
            verify_pairs: 50,
            ..Default::default()
        };
        let report = audit_privacy(&DropZero, &q(1, 1), &forced).unwrap();
        assert_eq!(report.delta_star, q(1, 1));
    }

    #[test]
    fn pair_cap_is_enforced() {
        let m = Mechanism::a1_ball(12, 6, 1).unwrap();
        let err = audit_privacy(&m, &q(1, 1), &AuditOptions::full()).unwrap_err();
        assert!(matches!(
            err,
            Error::CapExceeded {
                what: "neighbor pairs",
                ..
            }
        ));
    }

    #[test]
    fn mc_estimates_track_exact_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let m = Mechanism::a1_ball(6, 2, 1).unwrap();
        let (a, b) = (s(6, &[0, 1]), s(6, &[0, 2]));
        let est = mc_estimate_delta(&m, (&a, &b), &q(1, 1), 20_000, &mut rng).unwrap();
        assert!((est.estimate - 1.0 / 3.0).abs() < 0.03, "{}", est.estimate);
        let same = mc_estimate_delta(&m, (&a, &a), &q(1, 1), 20_000, &mut rng).unwrap();
        assert!(same.estimate < 0.05);
        assert!(mc_estimate_delta(&m, (&a, &b), &q(1, 1), 0, &mut rng).is_err());
    }

    #[test]
    fn report_json_shape() {
        let m = Mechanism::a1_ball(6, 2, 1).unwrap();
        let report = audit_privacy(&m, &q(1, 1), &AuditOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&report).unwrap();
        assert_eq!(v["delta_star"], "1/3");
        assert_eq!(v["worst_pair"], serde_json::json!([[0, 1], [0, 2]]));
        assert_eq!(v["scan"], "symmetric");
    }

    fn small_dist() -> impl Strategy<Value = OutputDistribution<u8>> {
        proptest::collection::vec((0u8..6, 1u32..20), 1..6)
            .prop_map(|w| OutputDistribution::from_weights(w).unwrap())
    }

    proptest! {
        #[test]
        fn delta_star_at_one_is_total_variation(p in small_dist(), r in small_dist()) {
            prop_assert_eq!(delta_star(&p, &r, &q(1, 1)).unwrap(), total_variation(&p, &r));
        }

        #[test]
        fn delta_star_nonincreasing_in_t(p in small_dist(), r in small_dist(), a in 1i64..50, extra in 0i64..50) {
            let t1 = q(a + 10, 10);
            let t2 = q(a + 10 + extra, 10);
            let d1 = delta_star(&p, &r, &t1).unwrap();
            let d2 = delta_star(&p, &r, &t2).unwrap();
            prop_assert!(d2 <= d1);
            prop_assert!(d1 >= q(0, 1) && d1 <= q(1, 1));
        }
    }
}
