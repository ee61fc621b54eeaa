//! Subsets of a small ground set, the retrieval distance, and sphere/ball
//! enumeration.
//!
//! A [`Subset`] is a bit set over `V = {0, .., n-1}` with `n <= 128`. Its
//! canonical form is the sorted list of member indices: ordering, display
//! and serialization all go through that list, while set algebra runs on
//! the machine word.
//!
//! All enumerations of `k`-subsets run in colexicographic order (increasing
//! value of the bit mask), which is also the order used by [`colex_rank`].

use std::cmp::Ordering;
use std::fmt;

use rand::seq::index;
use rand::Rng;
use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{Error, Result};

/// Largest supported ground set.
pub const MAX_GROUND_SET: usize = 128;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Subset {
    bits: u128,
    n: u16,
}

fn full_mask(n: usize) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

fn check_ground(n: usize) -> Result<()> {
    if n > MAX_GROUND_SET {
        Err(Error::GroundSetTooLarge(n))
    } else {
        Ok(())
    }
}

impl Subset {
    pub fn empty(n: usize) -> Result<Self> {
        check_ground(n)?;
        Ok(Subset {
            bits: 0,
            n: n as u16,
        })
    }

    /// The whole ground set `V`.
    pub fn full(n: usize) -> Result<Self> {
        check_ground(n)?;
        Ok(Subset {
            bits: full_mask(n),
            n: n as u16,
        })
    }

    /// Builds a subset from item indices in any order. Duplicates collapse.
    pub fn new<I: IntoIterator<Item = usize>>(n: usize, items: I) -> Result<Self> {
        check_ground(n)?;
        let mut bits = 0u128;
        for index in items {
            if index >= n {
                return Err(Error::IndexOutOfRange { index, n });
            }
            bits |= 1u128 << index;
        }
        Ok(Subset { bits, n: n as u16 })
    }

    pub fn from_bits(n: usize, bits: u128) -> Result<Self> {
        check_ground(n)?;
        if bits & !full_mask(n) != 0 {
            let index = 127 - (bits & !full_mask(n)).leading_zeros() as usize;
            return Err(Error::IndexOutOfRange { index, n });
        }
        Ok(Subset { bits, n: n as u16 })
    }

    /// `{0, .., k-1}`.
    pub fn prefix(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidParameters(format!(
                "prefix size {k} exceeds ground set size {n}"
            )));
        }
        Self::from_bits(n, full_mask(k))
    }

    pub(crate) fn from_bits_unchecked(n: usize, bits: u128) -> Self {
        debug_assert!(n <= MAX_GROUND_SET && bits & !full_mask(n) == 0);
        Subset { bits, n: n as u16 }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn bits(&self) -> u128 {
        self.bits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub fn contains(&self, index: usize) -> bool {
        index < self.n() && self.bits >> index & 1 == 1
    }

    /// Member indices in increasing order.
    pub fn items(&self) -> Items {
        Items { rest: self.bits }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.items().collect()
    }

    fn same_ground(&self, other: &Subset) -> Result<()> {
        if self.n != other.n {
            Err(Error::GroundSetMismatch {
                left: self.n(),
                right: other.n(),
            })
        } else {
            Ok(())
        }
    }

    pub fn union(&self, other: &Subset) -> Subset {
        debug_assert_eq!(self.n, other.n);
        Subset {
            bits: self.bits | other.bits,
            n: self.n,
        }
    }

    pub fn intersection(&self, other: &Subset) -> Subset {
        debug_assert_eq!(self.n, other.n);
        Subset {
            bits: self.bits & other.bits,
            n: self.n,
        }
    }

    /// `self \ other`.
    pub fn difference(&self, other: &Subset) -> Subset {
        debug_assert_eq!(self.n, other.n);
        Subset {
            bits: self.bits & !other.bits,
            n: self.n,
        }
    }

    pub fn complement(&self) -> Subset {
        Subset {
            bits: !self.bits & full_mask(self.n()),
            n: self.n,
        }
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn intersects(&self, other: &Subset) -> bool {
        self.bits & other.bits != 0
    }

    /// `max(|self \ other|, |other \ self|)`.
    pub fn distance(&self, other: &Subset) -> Result<usize> {
        self.same_ground(other)?;
        Ok(self.distance_unchecked(other))
    }

    #[inline]
    pub(crate) fn distance_unchecked(&self, other: &Subset) -> usize {
        let ab = (self.bits & !other.bits).count_ones();
        let ba = (other.bits & !self.bits).count_ones();
        ab.max(ba) as usize
    }
}

/// Iterator over the members of a [`Subset`], smallest first.
#[derive(Clone)]
pub struct Items {
    rest: u128,
}

impl Iterator for Items {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.rest == 0 {
            return None;
        }
        let i = self.rest.trailing_zeros() as usize;
        self.rest &= self.rest - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let k = self.rest.count_ones() as usize;
        (k, Some(k))
    }
}

impl ExactSizeIterator for Items {}

impl Ord for Subset {
    /// Lexicographic order of the sorted index lists, ground-set size first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| {
            let diff = self.bits ^ other.bits;
            if diff == 0 {
                return Ordering::Equal;
            }
            // first position where the sorted lists disagree
            let x = diff.trailing_zeros();
            let self_has_x = self.bits >> x & 1 == 1;
            let without = if self_has_x { other.bits } else { self.bits };
            // the side holding x is smaller iff the other side continues past x
            let without_continues = x < 127 && without >> (x + 1) != 0;
            if self_has_x == without_continues {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl PartialOrd for Subset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.items().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}/{}", self.n)
    }
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for i in self.items() {
            seq.serialize_element(&i)?;
        }
        seq.end()
    }
}

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    num_integer::binomial(n as u128, k as u128)
}

/// `|N_alpha(e)| = C(d, alpha) * C(n-d, alpha)`; zero for radii outside the
/// valid range.
pub fn sphere_size(n: usize, d: usize, alpha: usize) -> u128 {
    if d > n || alpha > d || alpha > n - d {
        return 0;
    }
    binomial(d, alpha) * binomial(n - d, alpha)
}

/// Number of size-`d` subsets within distance `beta` of a fixed one,
/// the center included.
pub fn ball_size(n: usize, d: usize, beta: usize) -> u128 {
    (0..=beta).map(|alpha| sphere_size(n, d, alpha)).sum()
}

/// `mu = C(n, d)`.
pub fn subset_count(n: usize, d: usize) -> u128 {
    binomial(n, d)
}

/// Colex successor of a `k`-subset mask of `{0, .., m-1}` (Gosper's hack).
fn colex_successor(x: u128, m: usize) -> Option<u128> {
    if x == 0 {
        return None;
    }
    let c = x & x.wrapping_neg();
    let r = x.checked_add(c)?;
    let next = (((r ^ x) >> 2) / c) | r;
    if next & !full_mask(m) != 0 {
        None
    } else {
        Some(next)
    }
}

/// All `k`-element bit masks over `m` positions, colex order.
#[derive(Clone)]
struct MaskCombinations {
    next: Option<u128>,
    m: usize,
}

impl MaskCombinations {
    fn new(m: usize, k: usize) -> Self {
        let next = if k > m { None } else { Some(full_mask(k)) };
        MaskCombinations { next, m }
    }
}

impl Iterator for MaskCombinations {
    type Item = u128;

    fn next(&mut self) -> Option<u128> {
        let current = self.next?;
        self.next = colex_successor(current, self.m);
        Some(current)
    }
}

/// Spreads the low bits of `positions` onto the set bits of `support`
/// (software `pdep`).
#[inline]
fn deposit(mut positions: u128, mut support: u128) -> u128 {
    let mut out = 0u128;
    while positions != 0 && support != 0 {
        let low = support & support.wrapping_neg();
        if positions & 1 == 1 {
            out |= low;
        }
        positions >>= 1;
        support &= support - 1;
    }
    out
}

/// Iterator over all size-`k` subsets of `V`, colex order.
#[derive(Clone)]
pub struct KSubsets {
    inner: MaskCombinations,
    n: usize,
}

impl Iterator for KSubsets {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        self.inner
            .next()
            .map(|bits| Subset::from_bits_unchecked(self.n, bits))
    }
}

/// All `C(n, k)` subsets of size `k`; empty when `k > n`.
pub fn k_subsets(n: usize, k: usize) -> Result<KSubsets> {
    check_ground(n)?;
    Ok(KSubsets {
        inner: MaskCombinations::new(n, k),
        n,
    })
}

/// All `r`-element subsets of `set`, colex order.
pub fn subsets_of(set: &Subset, r: usize) -> impl Iterator<Item = Subset> + Clone {
    let n = set.n();
    let support = set.bits;
    MaskCombinations::new(set.len(), r)
        .map(move |positions| Subset::from_bits_unchecked(n, deposit(positions, support)))
}

/// Position of a subset in the colex order of its size class.
pub fn colex_rank(s: &Subset) -> u128 {
    s.items().enumerate().map(|(i, c)| binomial(c, i + 1)).sum()
}

/// Inverse of [`colex_rank`].
pub fn colex_unrank(n: usize, k: usize, mut rank: u128) -> Result<Subset> {
    check_ground(n)?;
    if k > n || rank >= binomial(n, k) {
        return Err(Error::InvalidParameters(format!(
            "rank {rank} out of range for {k}-subsets of {n}"
        )));
    }
    let mut bits = 0u128;
    let mut top = n;
    for i in (1..=k).rev() {
        let mut c = top - 1;
        while binomial(c, i) > rank {
            c -= 1;
        }
        rank -= binomial(c, i);
        bits |= 1u128 << c;
        top = c;
    }
    Ok(Subset::from_bits_unchecked(n, bits))
}

/// Lazy iterator over `N_alpha(center)`.
///
/// Each member is the center with `alpha` of its items dropped and `alpha`
/// items of the complement added. Drops vary slowest.
#[derive(Clone)]
pub struct Sphere {
    center: Subset,
    complement: u128,
    drops: MaskCombinations,
    adds: MaskCombinations,
    alpha: usize,
    current_drop: Option<u128>,
}

impl Iterator for Sphere {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        loop {
            let drop = self.current_drop?;
            if let Some(add_positions) = self.adds.next() {
                let added = deposit(add_positions, self.complement);
                let bits = (self.center.bits & !drop) | added;
                return Some(Subset::from_bits_unchecked(self.center.n(), bits));
            }
            self.current_drop = self
                .drops
                .next()
                .map(|positions| deposit(positions, self.center.bits));
            self.adds = MaskCombinations::new(self.complement.count_ones() as usize, self.alpha);
        }
    }
}

/// Size-`|center|` subsets at distance exactly `alpha` from `center`.
/// Radii outside `0..=min(d, n-d)` give an empty iterator.
pub fn enumerate_sphere(center: &Subset, alpha: usize) -> Sphere {
    let d = center.len();
    let complement = center.complement().bits;
    let m = complement.count_ones() as usize;
    let mut drops = MaskCombinations::new(d, alpha);
    let current_drop = if alpha > m {
        None
    } else {
        drops
            .next()
            .map(|positions| deposit(positions, center.bits))
    };
    Sphere {
        center: *center,
        complement,
        drops,
        adds: MaskCombinations::new(m, alpha),
        alpha,
        current_drop,
    }
}

/// Concatenation of the spheres of radius `0..=beta`.
pub fn enumerate_ball(center: &Subset, beta: usize) -> impl Iterator<Item = Subset> + '_ {
    (0..=beta).flat_map(move |alpha| enumerate_sphere(center, alpha))
}

fn positions_mask(positions: index::IndexVec) -> u128 {
    positions.into_iter().fold(0u128, |acc, p| acc | 1u128 << p)
}

/// Uniform draw from `N_alpha(center)`.
pub fn sample_at_distance<R: Rng + ?Sized>(
    center: &Subset,
    alpha: usize,
    rng: &mut R,
) -> Result<Subset> {
    let n = center.n();
    let d = center.len();
    if alpha > d || alpha > n - d {
        return Err(Error::EmptySphere { n, d, alpha });
    }
    let complement = center.complement().bits;
    let drop = deposit(positions_mask(index::sample(rng, d, alpha)), center.bits);
    let add = deposit(positions_mask(index::sample(rng, n - d, alpha)), complement);
    Ok(Subset::from_bits_unchecked(n, (center.bits & !drop) | add))
}

/// Uniform draw among all `C(n, k)` subsets of size `k`.
pub fn sample_uniform_subset<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Subset> {
    check_ground(n)?;
    if k > n {
        return Err(Error::InvalidParameters(format!(
            "cannot draw {k} items from a ground set of size {n}"
        )));
    }
    Subset::new(n, index::sample(rng, n, k))
}

/// The excess set `E^i_{j,alpha}`: size-`d` subsets within `alpha` of `e_i`
/// but farther than `alpha` from `e_j`.
pub fn enumerate_excess_set(e_i: &Subset, e_j: &Subset, alpha: usize) -> Result<Vec<Subset>> {
    e_i.same_ground(e_j)?;
    if e_i.len() != e_j.len() {
        return Err(Error::InvalidParameters(
            "excess sets are defined for equal-size subsets".into(),
        ));
    }
    Ok(enumerate_ball(e_i, alpha)
        .filter(|l| e_j.distance_unchecked(l) > alpha)
        .collect())
}

/// Which incidence the proof-style counters enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IncidenceKind {
    /// `#{e_j in N_1(e_i) : e_l in E^i_{j,alpha}}` for `d(e_i, e_l) = alpha`.
    /// Closed form `(d - alpha)(n - d - alpha)`.
    Through,
    /// `#{e_i : d(e_j, e_i) = 1, d(e_i, e_l) = alpha}` for `d(e_j, e_l) = alpha + 1`.
    /// Closed form `(alpha + 1)^2`.
    Middle,
}

/// Counts incidences by enumeration. For [`IncidenceKind::Through`] the
/// fixed pair is `(e_i, e_l)`; for [`IncidenceKind::Middle`] it is `(e_j, e_l)`.
pub fn incidence_count(
    kind: IncidenceKind,
    anchor: &Subset,
    e_l: &Subset,
    alpha: usize,
) -> Result<u128> {
    anchor.same_ground(e_l)?;
    if anchor.len() != e_l.len() {
        return Err(Error::InvalidParameters(
            "incidence counts are defined for equal-size subsets".into(),
        ));
    }
    let gap = anchor.distance_unchecked(e_l);
    match kind {
        IncidenceKind::Through => {
            if gap != alpha {
                return Err(Error::InvalidParameters(format!(
                    "through-incidence needs d(e_i, e_l) = {alpha}, found {gap}"
                )));
            }
            // e_l is within alpha of e_i by precondition, so membership in
            // E^i_{j,alpha} reduces to d(e_j, e_l) > alpha
            Ok(enumerate_sphere(anchor, 1)
                .filter(|e_j| e_j.distance_unchecked(e_l) > alpha)
                .count() as u128)
        }
        IncidenceKind::Middle => {
            if gap != alpha + 1 {
                return Err(Error::InvalidParameters(format!(
                    "middle-incidence needs d(e_j, e_l) = {}, found {gap}",
                    alpha + 1
                )));
            }
            Ok(enumerate_sphere(anchor, 1)
                .filter(|e_i| e_i.distance_unchecked(e_l) == alpha)
                .count() as u128)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(n: usize, items: &[usize]) -> Subset {
        Subset::new(n, items.iter().copied()).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(s(4, &[0, 1]).distance(&s(4, &[0, 1])).unwrap(), 0);
        assert_eq!(s(4, &[0, 1]).distance(&s(4, &[0, 1, 2])).unwrap(), 1);
        assert_eq!(s(4, &[0, 1]).distance(&s(4, &[2, 3])).unwrap(), 2);
    }

    #[test]
    fn distance_rejects_mismatched_ground_sets() {
        assert!(matches!(
            s(4, &[0]).distance(&s(5, &[0])),
            Err(Error::GroundSetMismatch { left: 4, right: 5 })
        ));
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            Subset::new(3, [3]),
            Err(Error::IndexOutOfRange { index: 3, n: 3 })
        ));
        assert!(matches!(
            Subset::empty(129),
            Err(Error::GroundSetTooLarge(129))
        ));
        assert!(Subset::from_bits(3, 0b1000).is_err());
        let full = Subset::full(128).unwrap();
        assert_eq!(full.len(), 128);
        assert!(full.complement().is_empty());
    }

    #[test]
    fn sphere_size_examples() {
        assert_eq!(sphere_size(6, 2, 1), 8);
        assert_eq!(sphere_size(6, 2, 2), 6);
        assert_eq!(sphere_size(9, 4, 0), 1);
        assert_eq!(sphere_size(6, 2, 3), 0);
        assert_eq!(subset_count(6, 2), 15);
    }

    #[test]
    fn sphere_enumeration_example() {
        let got: Vec<_> = enumerate_sphere(&s(4, &[0, 1]), 1).collect();
        let mut got = got;
        got.sort();
        let want = vec![s(4, &[0, 2]), s(4, &[0, 3]), s(4, &[1, 2]), s(4, &[1, 3])];
        assert_eq!(got, want);
        // cross-check against brute force over all 2-subsets of 4
        let brute: Vec<_> = k_subsets(4, 2)
            .unwrap()
            .filter(|x| x.distance_unchecked(&s(4, &[0, 1])) == 1)
            .collect();
        assert_eq!(brute.len(), 4);
        assert!(brute.iter().all(|b| got.contains(b)));
    }

    #[test]
    fn sphere_of_radius_zero_is_center() {
        let c = s(7, &[1, 4, 6]);
        assert_eq!(enumerate_sphere(&c, 0).collect::<Vec<_>>(), vec![c]);
        assert_eq!(enumerate_sphere(&c, 4).count(), 0);
    }

    #[test]
    fn sphere_sizes_match_closed_form() {
        for n in 1..=8 {
            for d in 0..=n {
                let center = Subset::prefix(n, d).unwrap();
                for alpha in 0..=n {
                    let members: Vec<_> = enumerate_sphere(&center, alpha).collect();
                    assert_eq!(
                        members.len() as u128,
                        sphere_size(n, d, alpha),
                        "{n} {d} {alpha}"
                    );
                    for m in &members {
                        assert_eq!(m.len(), d);
                        assert_eq!(m.distance_unchecked(&center), alpha);
                    }
                    let mut dedup = members.clone();
                    dedup.sort();
                    dedup.dedup();
                    assert_eq!(dedup.len(), members.len());
                }
            }
        }
    }

    #[test]
    fn k_subsets_are_colex_and_rank_consistent() {
        for n in 0..=8 {
            for k in 0..=n {
                let all: Vec<_> = k_subsets(n, k).unwrap().collect();
                assert_eq!(all.len() as u128, binomial(n, k));
                for (r, x) in all.iter().enumerate() {
                    assert_eq!(colex_rank(x), r as u128);
                    assert_eq!(colex_unrank(n, k, r as u128).unwrap(), *x);
                }
                assert!(all.windows(2).all(|w| w[0].bits() < w[1].bits()));
            }
        }
        assert!(colex_unrank(5, 2, 10).is_err());
        assert_eq!(k_subsets(3, 4).unwrap().count(), 0);
    }

    #[test]
    fn subsets_of_a_set() {
        let base = s(8, &[1, 4, 6, 7]);
        let pairs: Vec<_> = subsets_of(&base, 2).collect();
        assert_eq!(pairs.len(), 6);
        assert!(pairs.iter().all(|p| p.len() == 2 && p.is_subset_of(&base)));
        assert_eq!(
            subsets_of(&base, 0).collect::<Vec<_>>(),
            vec![Subset::empty(8).unwrap()]
        );
        assert_eq!(subsets_of(&base, 5).count(), 0);
    }

    #[test]
    fn k_subsets_reach_the_top_bit() {
        let last = k_subsets(128, 1).unwrap().last().unwrap();
        assert_eq!(last.to_vec(), vec![127]);
        assert_eq!(k_subsets(128, 127).unwrap().count(), 128);
    }

    #[test]
    fn ordering_is_lexicographic_on_sorted_lists() {
        let mut all: Vec<Subset> = (0u128..64)
            .map(|b| Subset::from_bits(6, b).unwrap())
            .collect();
        all.sort();
        let lists: Vec<Vec<usize>> = all.iter().map(|x| x.to_vec()).collect();
        let mut expected = lists.clone();
        expected.sort();
        assert_eq!(lists, expected);
    }

    #[test]
    fn serializes_as_sorted_array() {
        let json = serde_json::to_string(&s(6, &[5, 0, 3])).unwrap();
        assert_eq!(json, "[0,3,5]");
        assert_eq!(s(6, &[5, 0, 3]).to_string(), "{0,3,5}");
    }

    #[test]
    fn samplers_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = s(6, &[0, 1]);
        assert_eq!(sample_at_distance(&c, 0, &mut rng).unwrap(), c);
        assert!(matches!(
            sample_at_distance(&c, 3, &mut rng),
            Err(Error::EmptySphere { .. })
        ));
        for _ in 0..200 {
            let x = sample_at_distance(&c, 2, &mut rng).unwrap();
            assert_eq!(x.distance_unchecked(&c), 2);
            assert_eq!(x.len(), 2);
        }
        assert!(sample_uniform_subset(5, 0, &mut rng).unwrap().is_empty());
        assert_eq!(
            sample_uniform_subset(5, 5, &mut rng).unwrap(),
            Subset::full(5).unwrap()
        );
        assert!(sample_uniform_subset(5, 6, &mut rng).is_err());
    }

    #[test]
    fn samplers_are_seed_deterministic() {
        let c = s(10, &[2, 3, 7]);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out: Vec<_> = (0..50)
                .map(|_| sample_at_distance(&c, 2, &mut rng).unwrap())
                .collect();
            out.extend((0..50).map(|_| sample_uniform_subset(10, 4, &mut rng).unwrap()));
            out
        };
        assert_eq!(run(11), run(11));
        assert_ne!(run(11), run(12));
    }

    #[test]
    fn excess_set_example() {
        let got = enumerate_excess_set(&s(6, &[0, 1]), &s(6, &[0, 2]), 1).unwrap();
        let mut got = got;
        got.sort();
        assert_eq!(got, vec![s(6, &[1, 3]), s(6, &[1, 4]), s(6, &[1, 5])]);
        assert!(enumerate_excess_set(&s(6, &[0, 1]), &s(6, &[0, 1]), 2)
            .unwrap()
            .is_empty());
        assert!(enumerate_excess_set(&s(6, &[0, 1]), &s(6, &[0]), 1).is_err());
    }

    #[test]
    fn incidence_examples() {
        let through = incidence_count(IncidenceKind::Through, &s(6, &[0, 1]), &s(6, &[0, 2]), 1);
        assert_eq!(through.unwrap(), 3);
        let middle = incidence_count(IncidenceKind::Middle, &s(6, &[0, 1]), &s(6, &[2, 3]), 1);
        assert_eq!(middle.unwrap(), 4);
        let full = incidence_count(IncidenceKind::Through, &s(6, &[0, 1]), &s(6, &[0, 1]), 0);
        assert_eq!(full.unwrap(), 2 * 4);
        assert!(incidence_count(IncidenceKind::Middle, &s(6, &[0, 1]), &s(6, &[0, 2]), 1).is_err());
    }
}
