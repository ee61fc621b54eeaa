//! Cross-module identities checked exhaustively on small ground sets.
//!
//! Expected values come from brute-force oracles written here, independent
//! of the enumeration paths the library uses.

use std::collections::BTreeMap;

use dpsr_core::auditor::{all_pair_deltas, pair_delta, total_variation};
use dpsr_core::bounds::{
    thm1_lower_exact, thm1_upper_exact, thm2_upper_exact, union_size_probability,
};
use dpsr_core::combinatorics::{
    ball_size, binomial, enumerate_excess_set, enumerate_sphere, incidence_count, k_subsets,
    sample_at_distance, sample_uniform_subset, sphere_size, IncidenceKind,
};
use dpsr_core::grouptesting::{
    decode_comp, induced_u_from_b, run_tests, syndrome_distribution_exact, GroupTestingPipeline,
};
use dpsr_core::mechanisms::{clamp_to_accuracy, resize_choices, resize_to_d, DEFAULT_OUTCOME_CAP};
use dpsr_core::*;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn q(a: u128, b: u128) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn one() -> BigRational {
    q(1, 1)
}

/// Every subset of `V`, any size.
fn power_set(n: usize) -> impl Iterator<Item = Subset> {
    (0u128..1 << n).map(move |b| Subset::from_bits(n, b).unwrap())
}

/// Distance straight from the definition on index lists.
fn naive_distance(a: &Subset, b: &Subset) -> usize {
    let a = a.to_vec();
    let b = b.to_vec();
    let ab = a.iter().filter(|x| !b.contains(x)).count();
    let ba = b.iter().filter(|x| !a.contains(x)).count();
    ab.max(ba)
}

fn valid_triples(n_max: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        for d in 1..n {
            for b in 1..=d.min(n - d) {
                out.push((n, d, b));
            }
        }
    }
    out
}

#[test]
fn distance_is_a_metric_on_equal_size_subsets() {
    for n in 1..=6 {
        for d in 0..=n {
            let all: Vec<_> = k_subsets(n, d).unwrap().collect();
            for a in &all {
                for b in &all {
                    let dab = a.distance(b).unwrap();
                    assert_eq!(dab, naive_distance(a, b));
                    assert_eq!(dab, b.distance(a).unwrap());
                    assert_eq!(dab == 0, a == b);
                    for c in &all {
                        assert!(a.distance(c).unwrap() <= dab + b.distance(c).unwrap());
                    }
                }
            }
        }
    }
}

#[test]
fn spheres_match_brute_force_filtering() {
    for n in 1..=8 {
        for d in 0..=n {
            let all: Vec<_> = k_subsets(n, d).unwrap().collect();
            let center = all[all.len() / 2];
            for alpha in 0..=d {
                let mut got: Vec<_> = enumerate_sphere(&center, alpha).collect();
                got.sort();
                let mut want: Vec<_> = all
                    .iter()
                    .copied()
                    .filter(|x| naive_distance(x, &center) == alpha)
                    .collect();
                want.sort();
                assert_eq!(got, want);
                assert_eq!(got.len() as u128, sphere_size(n, d, alpha));
            }
        }
    }
}

#[test]
fn excess_set_size_is_pair_independent_closed_form() {
    for (n, d, b) in valid_triples(8) {
        let want = binomial(d - 1, b) * binomial(n - d - 1, b);
        for e_i in k_subsets(n, d).unwrap() {
            for e_j in enumerate_sphere(&e_i, 1) {
                let set = enumerate_excess_set(&e_i, &e_j, b).unwrap();
                assert_eq!(set.len() as u128, want, "n={n} d={d} beta={b}");
                // every member sits at exactly b from e_i and b+1 from e_j
                for l in &set {
                    assert_eq!(naive_distance(&e_i, l), b);
                    assert_eq!(naive_distance(&e_j, l), b + 1);
                }
            }
        }
    }
}

#[test]
fn excess_set_of_equal_inputs_is_empty() {
    for e in k_subsets(6, 3).unwrap() {
        for alpha in 0..=3 {
            assert!(enumerate_excess_set(&e, &e, alpha).unwrap().is_empty());
        }
    }
}

#[test]
fn incidence_counts_match_closed_forms() {
    for n in 2..=8 {
        for d in 1..n {
            let anchor = Subset::prefix(n, d).unwrap();
            for alpha in 0..=d.min(n - d) {
                for e_l in enumerate_sphere(&anchor, alpha) {
                    let through =
                        incidence_count(IncidenceKind::Through, &anchor, &e_l, alpha).unwrap();
                    assert_eq!(through, ((d - alpha) * (n - d - alpha)) as u128);
                }
                if alpha < d.min(n - d) {
                    for e_l in enumerate_sphere(&anchor, alpha + 1) {
                        let middle =
                            incidence_count(IncidenceKind::Middle, &anchor, &e_l, alpha).unwrap();
                        assert_eq!(middle, ((alpha + 1) * (alpha + 1)) as u128);
                    }
                }
            }
        }
    }
}

#[test]
fn a2_size_marginal_matches_closed_form() {
    for n in 2..=10 {
        for d in 1..n {
            for b in 1..=n {
                let m = Mechanism::a2(n, d, b).unwrap();
                let e = Subset::prefix(n, d).unwrap();
                let dist = m
                    .exact_output_distribution(&e, DEFAULT_OUTCOME_CAP)
                    .unwrap();
                assert_eq!(dist.total(), one());
                for alpha in 0..=b {
                    assert_eq!(
                        dist.mass_where(|o| o.len() == d + alpha),
                        union_size_probability(n, d, b, alpha),
                        "n={n} d={d} beta={b} alpha={alpha}"
                    );
                }
            }
        }
    }
}

#[test]
fn mechanism_supports() {
    for (n, d, b) in valid_triples(7) {
        let e = Subset::prefix(n, d).unwrap();
        let sphere = Mechanism::a1_sphere(n, d, b)
            .unwrap()
            .exact_output_distribution(&e, DEFAULT_OUTCOME_CAP)
            .unwrap();
        assert!(sphere.support().all(|o| naive_distance(o, &e) == b));
        assert_eq!(sphere.support_len() as u128, sphere_size(n, d, b));

        let ball = Mechanism::a1_ball(n, d, b)
            .unwrap()
            .exact_output_distribution(&e, DEFAULT_OUTCOME_CAP)
            .unwrap();
        let brute_ball: Vec<_> = k_subsets(n, d)
            .unwrap()
            .filter(|o| naive_distance(o, &e) <= b)
            .collect();
        assert_eq!(
            ball.support().copied().collect::<Vec<_>>().len(),
            brute_ball.len()
        );
        assert!(brute_ball
            .iter()
            .all(|o| ball.prob(o) == q(1, ball_size(n, d, b))));

        let a2 = Mechanism::a2(n, d, b)
            .unwrap()
            .exact_output_distribution(&e, DEFAULT_OUTCOME_CAP)
            .unwrap();
        let mut brute: Vec<_> = k_subsets(n, b).unwrap().map(|bb| e.union(&bb)).collect();
        brute.sort();
        brute.dedup();
        assert_eq!(a2.support().copied().collect::<Vec<_>>(), brute);
    }
}

/// Brute-force pair delta from the definition: maximize over every event
/// of the (small) joint support.
fn brute_force_event_delta(
    p: &OutputDistribution<Subset>,
    r: &OutputDistribution<Subset>,
) -> BigRational {
    let mut universe: Vec<Subset> = p.support().chain(r.support()).copied().collect();
    universe.sort();
    universe.dedup();
    assert!(universe.len() <= 16);
    let mut best = q(0, 1);
    for mask in 0u32..1 << universe.len() {
        let event: Vec<_> = (0..universe.len()).filter(|i| mask >> i & 1 == 1).collect();
        let lhs: BigRational = event.iter().map(|&i| p.prob(&universe[i])).sum();
        let rhs: BigRational = event.iter().map(|&i| r.prob(&universe[i])).sum();
        if lhs.clone() - rhs.clone() > best {
            best = lhs - rhs;
        }
    }
    best
}

#[test]
fn positive_part_sum_equals_worst_event() {
    let e_i = Subset::new(6, [0, 1]).unwrap();
    let e_j = Subset::new(6, [0, 2]).unwrap();
    for m in [
        Mechanism::a1_ball(6, 2, 1).unwrap(),
        Mechanism::a1_sphere(6, 2, 1).unwrap(),
        Mechanism::a2(6, 2, 1).unwrap(),
    ] {
        let p = m
            .exact_output_distribution(&e_i, DEFAULT_OUTCOME_CAP)
            .unwrap();
        let r = m
            .exact_output_distribution(&e_j, DEFAULT_OUTCOME_CAP)
            .unwrap();
        let fast = delta_star(&p, &r, &one()).unwrap();
        assert_eq!(fast, brute_force_event_delta(&p, &r), "{m}");
        assert_eq!(fast, total_variation(&p, &r));
    }
}

#[test]
fn shipped_mechanisms_are_pair_transitive() {
    for (n, d, b) in valid_triples(7) {
        for m in [
            Mechanism::a1_ball(n, d, b).unwrap(),
            Mechanism::a1_sphere(n, d, b).unwrap(),
            Mechanism::a2(n, d, b).unwrap(),
        ] {
            let all = all_pair_deltas(&m, &one(), &AuditOptions::full()).unwrap();
            assert_eq!(all.len() as u128, binomial(n, d) * (d * (n - d)) as u128);
            let first = &all[0].1;
            assert!(
                all.iter().all(|(_, v)| v == first),
                "{m} is not pair-transitive"
            );
            let fast = audit_privacy(&m, &one(), &AuditOptions::default()).unwrap();
            assert_eq!(&fast.delta_star, first);
        }
    }
}

#[test]
fn ball_delta_is_excess_over_ball() {
    for (n, d, b) in valid_triples(8) {
        let m = Mechanism::a1_ball(n, d, b).unwrap();
        let e_i = Subset::prefix(n, d).unwrap();
        let e_j = enumerate_sphere(&e_i, 1).last().unwrap();
        let excess = enumerate_excess_set(&e_i, &e_j, b).unwrap().len() as u128;
        let delta = pair_delta(&m, &e_i, &e_j, &one(), DEFAULT_OUTCOME_CAP).unwrap();
        assert_eq!(delta, q(excess, ball_size(n, d, b)));
    }
}

#[test]
fn general_sandwich_on_full_scans() {
    for (n, d, b) in valid_triples(9) {
        if b * b > n || n < 4 {
            continue;
        }
        let m = Mechanism::a1_ball(n, d, b).unwrap();
        let audited = audit_privacy(&m, &one(), &AuditOptions::full())
            .unwrap()
            .delta_star;
        assert!(thm1_lower_exact(n, d, b).unwrap() <= audited);
        assert!(audited <= thm1_upper_exact(n, d, b).unwrap());
    }
}

#[test]
fn resize_never_increases_distance() {
    // coupled enumeration: every inner output times every resize choice
    for n in 2..=6 {
        for d in 1..n {
            let e = Subset::prefix(n, d).unwrap();
            for out in power_set(n) {
                let before = naive_distance(&out, &e);
                for resized in resize_choices(&out, d) {
                    assert_eq!(resized.len(), d);
                    assert!(naive_distance(&resized, &e) <= before);
                }
            }
        }
    }
}

#[test]
fn resized_mechanisms_output_size_d() {
    for (n, d, b) in valid_triples(6) {
        let m = resize_to_d(Mechanism::a2(n, d, b).unwrap());
        let e = Subset::prefix(n, d).unwrap();
        let dist = m
            .exact_output_distribution(&e, DEFAULT_OUTCOME_CAP)
            .unwrap();
        assert!(dist.support().all(|o| o.len() == d));
        assert_eq!(dist.total(), one());
        let acc = audit_accuracy(&m, b, &AuditOptions::full()).unwrap();
        assert_eq!(acc.eps1_exact, q(0, 1));
    }
}

fn chi_square_accepts(
    counts: &BTreeMap<Subset, u64>,
    expected: &OutputDistribution<Subset>,
    draws: u64,
) {
    let mut stat = 0.0;
    for (o, p) in expected.iter() {
        let e = dpsr_core::distribution::to_f64(&p) * draws as f64;
        let c = *counts.get(o).unwrap_or(&0) as f64;
        stat += (c - e) * (c - e) / e;
    }
    assert!(
        counts.keys().all(|k| expected.prob(k) > q(0, 1)),
        "sample outside support"
    );
    let df = (expected.support_len() - 1) as f64;
    let critical = ChiSquared::new(df).unwrap().inverse_cdf(0.999);
    assert!(stat < critical, "chi-square {stat} >= {critical}");
}

fn tally<F: FnMut() -> Subset>(draws: u64, mut f: F) -> BTreeMap<Subset, u64> {
    let mut counts = BTreeMap::new();
    for _ in 0..draws {
        *counts.entry(f()).or_default() += 1;
    }
    counts
}

#[test]
fn samplers_are_uniform_chi_square() {
    const DRAWS: u64 = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let center = Subset::new(6, [0, 1]).unwrap();
    let sphere =
        OutputDistribution::from_weights(enumerate_sphere(&center, 1).map(|s| (s, 1u32))).unwrap();
    let counts = tally(DRAWS, || sample_at_distance(&center, 1, &mut rng).unwrap());
    chi_square_accepts(&counts, &sphere, DRAWS);

    let all =
        OutputDistribution::from_weights(k_subsets(5, 2).unwrap().map(|s| (s, 1u32))).unwrap();
    let counts = tally(DRAWS, || sample_uniform_subset(5, 2, &mut rng).unwrap());
    chi_square_accepts(&counts, &all, DRAWS);
}

#[test]
fn mechanism_samplers_match_exact_distributions() {
    const DRAWS: u64 = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let e = Subset::new(6, [0, 1]).unwrap();
    for m in [
        Mechanism::a1_sphere(6, 2, 1).unwrap(),
        Mechanism::a1_ball(6, 2, 1).unwrap(),
        Mechanism::a2(6, 2, 1).unwrap(),
        resize_to_d(Mechanism::a2(6, 2, 1).unwrap()),
        clamp_to_accuracy(Mechanism::uniform_over_e(6, 2, 1).unwrap()),
    ] {
        let exact = m
            .exact_output_distribution(&e, DEFAULT_OUTCOME_CAP)
            .unwrap();
        let counts = tally(DRAWS, || m.sample(&e, &mut rng).unwrap());
        chi_square_accepts(&counts, &exact, DRAWS);
    }
}

#[test]
fn before_noise_marginal_is_hypergeometric() {
    const DRAWS: u64 = 100_000;
    let design = PoolingDesign::identity(6).unwrap();
    let noise = NoiseSpec::Before { beta: 2 };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut hits = [0u64; 6];
    for _ in 0..DRAWS {
        match dpsr_core::grouptesting::sample_noise(&noise, &design, &mut rng).unwrap() {
            NoiseRealization::Contamination(b) => {
                for i in b.items() {
                    hits[i] += 1;
                }
            }
            other => panic!("unexpected realization {other:?}"),
        }
    }
    // Pr[i in B] = beta / n = 1/3, binomial sd ~ 0.0015
    for h in hits {
        let freq = h as f64 / DRAWS as f64;
        assert!((freq - 1.0 / 3.0).abs() < 0.01, "{freq}");
    }
}

#[test]
fn before_and_induced_after_noise_are_bit_identical() {
    for n in 1..=5 {
        // every design made of up to three arbitrary pools, plus identity
        let mut designs = vec![PoolingDesign::identity(n).unwrap()];
        let pools: Vec<_> = power_set(n).collect();
        for (i, a) in pools.iter().enumerate().step_by(3) {
            let b = pools[(i * 7 + 1) % pools.len()];
            designs.push(PoolingDesign::new(n, vec![*a, b, a.complement()]).unwrap());
        }
        for design in &designs {
            for e in power_set(n) {
                for b in power_set(n) {
                    let before =
                        run_tests(design, &e, &NoiseRealization::Contamination(b)).unwrap();
                    let after = run_tests(
                        design,
                        &e,
                        &NoiseRealization::Overwrite(induced_u_from_b(design, &b)),
                    )
                    .unwrap();
                    assert_eq!(before, after);
                }
            }
        }
    }
}

#[test]
fn identity_before_noise_is_the_union_mechanism() {
    for n in 2..=8 {
        let design = PoolingDesign::identity(n).unwrap();
        for d in 1..n {
            for b in 1..=2.min(n) {
                let m = Mechanism::a2(n, d, b).unwrap();
                for e in k_subsets(n, d).unwrap() {
                    let syndromes = syndrome_distribution_exact(
                        &design,
                        &e,
                        &NoiseSpec::Before { beta: b },
                        DEFAULT_OUTCOME_CAP,
                    )
                    .unwrap();
                    let image = m
                        .exact_output_distribution(&e, DEFAULT_OUTCOME_CAP)
                        .unwrap()
                        .map(Syndrome::characteristic);
                    assert_eq!(syndromes, image);
                }
            }
        }
    }
}

#[test]
fn identity_before_noise_meets_achievable_value() {
    for n in 2..=12 {
        for d in 1..n {
            for b in 1..n {
                if 2 * d * b * b >= n {
                    continue;
                }
                let design = PoolingDesign::identity(n).unwrap();
                let report = audit_testing_privacy(
                    &design,
                    &NoiseSpec::Before { beta: b },
                    d,
                    &one(),
                    &AuditOptions::default(),
                )
                .unwrap();
                assert!(report.delta_star <= thm2_upper_exact(n, d, b).unwrap());
            }
        }
    }
}

#[test]
fn accurate_shipped_configurations_respect_the_floor() {
    for (n, d, b) in valid_triples(8) {
        if b * b > n {
            continue;
        }
        let floor = thm1_lower_exact(n, d, b).unwrap();
        let candidates: Vec<Box<dyn SubsetMechanism>> = vec![
            Box::new(Mechanism::a1_ball(n, d, b).unwrap()),
            Box::new(Mechanism::a1_sphere(n, d, b).unwrap()),
            Box::new(Mechanism::a2(n, d, b).unwrap()),
            Box::new(resize_to_d(Mechanism::a2(n, d, b).unwrap())),
            Box::new(clamp_to_accuracy(
                Mechanism::uniform_over_e(n, d, b).unwrap(),
            )),
            Box::new(GroupTestingPipeline {
                design: PoolingDesign::identity(n).unwrap(),
                noise: NoiseSpec::Before { beta: b },
                d,
            }),
        ];
        for m in &candidates {
            let acc = audit_accuracy(m.as_ref(), b, &AuditOptions::default()).unwrap();
            if acc.eps1_exact != q(0, 1) {
                continue;
            }
            let audited = audit_privacy(m.as_ref(), &one(), &AuditOptions::default()).unwrap();
            assert!(audited.delta_star >= floor, "n={n} d={d} beta={b}");
        }
    }
}

#[test]
fn comp_keeps_every_true_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in 2..=6 {
        for trial in 0..5 {
            let design = PoolingDesign::bernoulli(n, 2 + trial, 0.5, &mut rng).unwrap();
            for e in power_set(n) {
                let clean = run_tests(&design, &e, &NoiseRealization::None).unwrap();
                assert!(e.is_subset_of(&decode_comp(&design, &clean).unwrap()));
                for b in power_set(n) {
                    let noisy =
                        run_tests(&design, &e, &NoiseRealization::Contamination(b)).unwrap();
                    let decoded = decode_comp(&design, &noisy).unwrap();
                    assert!(e.is_subset_of(&decoded));
                    assert!(e.union(&b).is_subset_of(&decoded));
                }
            }
        }
    }
}

#[test]
fn identity_pipeline_reconstructs_exactly() {
    for n in 1..=6 {
        let design = PoolingDesign::identity(n).unwrap();
        for e in power_set(n) {
            let s = run_tests(&design, &e, &NoiseRealization::None).unwrap();
            assert_eq!(decode_comp(&design, &s).unwrap(), e);
        }
    }
    // noise-before: output is e ∪ B, within beta of e
    let design = PoolingDesign::identity(6).unwrap();
    for e in k_subsets(6, 2).unwrap() {
        for b in k_subsets(6, 1).unwrap() {
            let s = run_tests(&design, &e, &NoiseRealization::Contamination(b)).unwrap();
            let out = decode_comp(&design, &s).unwrap();
            assert_eq!(out, e.union(&b));
            assert!(naive_distance(&out, &e) <= 1);
        }
    }
}

proptest! {
    #[test]
    fn colex_rank_roundtrip(n in 1usize..=128, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = (seed as usize) % (n + 1);
        let s = sample_uniform_subset(n, k, &mut rng).unwrap();
        let r = dpsr_core::combinatorics::colex_rank(&s);
        prop_assert!(r < binomial(n, k));
        prop_assert_eq!(dpsr_core::combinatorics::colex_unrank(n, k, r).unwrap(), s);
    }

    #[test]
    fn sphere_samples_land_on_the_sphere(n in 2usize..=40, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 1 + (seed as usize) % (n - 1);
        let alpha = (seed as usize >> 8) % (d.min(n - d) + 1);
        let e = sample_uniform_subset(n, d, &mut rng).unwrap();
        let x = sample_at_distance(&e, alpha, &mut rng).unwrap();
        prop_assert_eq!(x.len(), d);
        prop_assert_eq!(x.distance(&e).unwrap(), alpha);
    }
}
