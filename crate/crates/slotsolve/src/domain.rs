//! Finite integer domains with holes.
//!
//! A [`FiniteDomain`] is a set of integers stored as a sorted list of
//! disjoint, non-adjacent inclusive intervals: `{1..3,5,7..9}` is three
//! intervals. The representation is a normal form — two domains are equal
//! exactly when their interval lists are identical — and every constructor
//! and operation re-establishes it. Domains are immutable values: narrowing
//! an interval or punching a hole returns a new domain.

use std::fmt;
use std::hash::Hash;

use num_traits::PrimInt;

use crate::error::EmptyDomain;

/// Scalar types a domain can range over: primitive integers no wider than
/// 64 bits (they must widen losslessly to `i128` so interval arithmetic
/// never overflows).
pub trait DomainValue: PrimInt + Into<i128> + fmt::Debug + fmt::Display + Hash + 'static {}

impl<T> DomainValue for T where T: PrimInt + Into<i128> + fmt::Debug + fmt::Display + Hash + 'static {}

fn wide<T: DomainValue>(v: T) -> i128 {
    v.into()
}

/// A finite set of integers in interval-list normal form.
///
/// Invariants (maintained by construction): every pair satisfies `lo <= hi`,
/// and consecutive pairs `(a,b), (c,d)` satisfy `b + 1 < c`, so the list is
/// strictly increasing with at least one missing value between intervals.
/// The empty list is the unique empty domain.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FiniteDomain<T = i64> {
    intervals: Vec<(T, T)>,
}

impl<T: DomainValue> FiniteDomain<T> {
    /// The empty domain `{}`.
    pub fn empty() -> Self {
        FiniteDomain { intervals: Vec::new() }
    }

    /// The connected domain `{lo..hi}`, or the empty domain when `lo > hi`.
    pub fn interval(lo: T, hi: T) -> Self {
        if lo <= hi {
            FiniteDomain { intervals: vec![(lo, hi)] }
        } else {
            Self::empty()
        }
    }

    /// The one-value domain `{v}`.
    pub fn singleton(v: T) -> Self {
        Self::interval(v, v)
    }

    /// Builds a domain from arbitrary values (order and duplicates don't matter).
    pub fn from_values(vs: impl IntoIterator<Item = T>) -> Self {
        let mut vals: Vec<T> = vs.into_iter().collect();
        vals.sort_unstable();
        vals.dedup();
        let mut intervals: Vec<(T, T)> = Vec::new();
        for v in vals {
            match intervals.last_mut() {
                Some(&mut (_, ref mut hi)) if wide(v) == wide(*hi) + 1 => *hi = v,
                _ => intervals.push((v, v)),
            }
        }
        FiniteDomain { intervals }
    }

    /// Builds a domain from arbitrary `(lo, hi)` pairs: they may overlap,
    /// touch, or come in any order, and pairs with `lo > hi` are ignored.
    pub fn from_intervals(ivs: impl IntoIterator<Item = (T, T)>) -> Self {
        let mut raw: Vec<(T, T)> = ivs.into_iter().filter(|&(lo, hi)| lo <= hi).collect();
        raw.sort_unstable();
        let mut intervals: Vec<(T, T)> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            match intervals.last_mut() {
                // Overlapping or adjacent: fuse into the previous interval.
                Some(&mut (_, ref mut phi)) if wide(lo) <= wide(*phi) + 1 => {
                    if hi > *phi {
                        *phi = hi;
                    }
                }
                _ => intervals.push((lo, hi)),
            }
        }
        FiniteDomain { intervals }
    }

    /// The interval list itself (normal form, ascending).
    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    /// `self \ {v}`.
    pub fn remove(&self, v: T) -> Self {
        let idx = self.intervals.partition_point(|&(_, hi)| hi < v);
        let Some(&(lo, hi)) = self.intervals.get(idx) else {
            return self.clone();
        };
        if v < lo {
            return self.clone();
        }
        // Splitting one interval never creates adjacency, so the result is
        // already in normal form.
        let mut intervals = Vec::with_capacity(self.intervals.len() + 1);
        intervals.extend_from_slice(&self.intervals[..idx]);
        if lo < v {
            intervals.push((lo, v - T::one()));
        }
        if v < hi {
            intervals.push((v + T::one(), hi));
        }
        intervals.extend_from_slice(&self.intervals[idx + 1..]);
        FiniteDomain { intervals }
    }

    /// `self \ vs`, in one sweep.
    pub fn remove_all(&self, vs: impl IntoIterator<Item = T>) -> Self {
        let mut cut: Vec<T> = vs.into_iter().collect();
        cut.sort_unstable();
        cut.dedup();
        if cut.is_empty() || self.intervals.is_empty() {
            return self.clone();
        }
        let mut out: Vec<(T, T)> = Vec::with_capacity(self.intervals.len());
        for &(lo, hi) in &self.intervals {
            let from = cut.partition_point(|&v| v < lo);
            let to = cut.partition_point(|&v| v <= hi);
            // Walk the values that fall inside [lo, hi], emitting the kept
            // span before each one. `start` is None once hi itself is cut.
            let mut start = Some(lo);
            for &v in &cut[from..to] {
                let s = start.expect("cut values within [lo, hi] cannot pass a dead start");
                if v > s {
                    out.push((s, v - T::one()));
                }
                start = if v < hi { Some(v + T::one()) } else { None };
            }
            if let Some(s) = start {
                out.push((s, hi));
            }
        }
        FiniteDomain { intervals: out }
    }

    /// Exact set intersection.
    pub fn intersect(&self, other: &Self) -> Self {
        let a = &self.intervals;
        let b = &other.intervals;
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        FiniteDomain { intervals: out }
    }

    /// Least member; querying an empty domain is a contract violation.
    pub fn min(&self) -> Result<T, EmptyDomain> {
        self.intervals.first().map(|&(lo, _)| lo).ok_or(EmptyDomain)
    }

    /// Greatest member; querying an empty domain is a contract violation.
    pub fn max(&self) -> Result<T, EmptyDomain> {
        self.intervals.last().map(|&(_, hi)| hi).ok_or(EmptyDomain)
    }

    /// The smallest connected domain covering `self`; `hull({}) = {}`.
    pub fn hull(&self) -> Self {
        match (self.intervals.first(), self.intervals.last()) {
            (Some(&(lo, _)), Some(&(_, hi))) => Self::interval(lo, hi),
            _ => Self::empty(),
        }
    }

    /// Number of members, saturating at `u64::MAX`.
    pub fn size(&self) -> u64 {
        let mut n: u128 = 0;
        for &(lo, hi) in &self.intervals {
            n += (wide(hi) - wide(lo) + 1) as u128;
        }
        n.min(u128::from(u64::MAX)) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        matches!(self.intervals.as_slice(), [(lo, hi)] if lo == hi)
    }

    pub fn contains(&self, v: T) -> bool {
        let idx = self.intervals.partition_point(|&(_, hi)| hi < v);
        self.intervals.get(idx).is_some_and(|&(lo, _)| lo <= v)
    }

    /// True when every member of `self` is a member of `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.intersect(other) == *self
    }

    /// Members in strictly ascending order.
    pub fn iter(&self) -> Iter<'_, T> {
        Iter { rest: &self.intervals, cur: None }
    }
}

/// Ascending iterator over the members of a [`FiniteDomain`].
pub struct Iter<'a, T> {
    rest: &'a [(T, T)],
    cur: Option<(T, T)>,
}

impl<T: DomainValue> Iterator for Iter<'_, T> {
    type Item = T;

    fn next(&mut self) -> Option<T> {
        loop {
            if let Some((lo, hi)) = self.cur {
                self.cur = if lo < hi { Some((lo + T::one(), hi)) } else { None };
                return Some(lo);
            }
            let (&first, rest) = self.rest.split_first()?;
            self.cur = Some(first);
            self.rest = rest;
        }
    }
}

impl<'a, T: DomainValue> IntoIterator for &'a FiniteDomain<T> {
    type Item = T;
    type IntoIter = Iter<'a, T>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

impl<T: DomainValue> FromIterator<T> for FiniteDomain<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        Self::from_values(iter)
    }
}

impl<T: DomainValue> fmt::Display for FiniteDomain<T> {
    /// Renders `{1..3,5,7..9}`, or `{}` for the empty domain.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, &(lo, hi)) in self.intervals.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            if lo == hi {
                write!(f, "{lo}")?;
            } else {
                write!(f, "{lo}..{hi}")?;
            }
        }
        f.write_str("}")
    }
}

impl<T: DomainValue> fmt::Debug for FiniteDomain<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn dom(ivs: &[(i64, i64)]) -> FiniteDomain {
        FiniteDomain::from_intervals(ivs.iter().copied())
    }

    #[test]
    fn interval_constructor() {
        assert_eq!(FiniteDomain::interval(1, 5).iter().collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
        assert!(FiniteDomain::interval(3, 3).is_singleton());
        assert!(FiniteDomain::interval(5, 1).is_empty());
    }

    #[test]
    fn remove_splits_and_ignores_outsiders() {
        assert_eq!(FiniteDomain::interval(1, 5).remove(3), dom(&[(1, 2), (4, 5)]));
        assert_eq!(FiniteDomain::interval(1, 2).remove(7), FiniteDomain::interval(1, 2));
        assert_eq!(FiniteDomain::empty().remove(1), FiniteDomain::empty());
        assert_eq!(FiniteDomain::interval(1, 5).remove(1), FiniteDomain::interval(2, 5));
        assert_eq!(FiniteDomain::interval(1, 5).remove(5), FiniteDomain::interval(1, 4));
        assert!(FiniteDomain::singleton(2).remove(2).is_empty());
    }

    #[test]
    fn remove_all_batches() {
        assert_eq!(FiniteDomain::interval(1, 5).remove_all([1, 3, 5]), dom(&[(2, 2), (4, 4)]));
        assert_eq!(FiniteDomain::interval(1, 3).remove_all([]), FiniteDomain::interval(1, 3));
        assert!(FiniteDomain::singleton(2).remove_all([2]).is_empty());
        // Duplicates and out-of-domain values are harmless.
        assert_eq!(FiniteDomain::interval(1, 5).remove_all([0, 3, 3, 9]), dom(&[(1, 2), (4, 5)]));
    }

    #[test]
    fn intersect_examples() {
        assert_eq!(
            FiniteDomain::interval(1, 5).intersect(&FiniteDomain::interval(4, 9)),
            FiniteDomain::interval(4, 5)
        );
        assert!(FiniteDomain::from_values([1, 3, 5])
            .intersect(&FiniteDomain::from_values([2, 4]))
            .is_empty());
        let d = dom(&[(1, 3), (7, 9)]);
        assert_eq!(d.intersect(&d), d);
    }

    #[test]
    fn bounds_and_hull() {
        let d = FiniteDomain::from_values([2, 4, 9]);
        assert_eq!(d.min(), Ok(2));
        assert_eq!(d.max(), Ok(9));
        assert_eq!(FiniteDomain::<i64>::empty().min(), Err(EmptyDomain));
        assert_eq!(FiniteDomain::<i64>::empty().max(), Err(EmptyDomain));

        assert_eq!(FiniteDomain::from_values([1, 2, 4, 5]).hull(), FiniteDomain::interval(1, 5));
        assert_eq!(FiniteDomain::singleton(3).hull(), FiniteDomain::singleton(3));
        assert_eq!(FiniteDomain::<i64>::empty().hull(), FiniteDomain::empty());
    }

    #[test]
    fn cardinality_queries() {
        let d = FiniteDomain::from_values([1, 2, 4, 5]);
        assert_eq!(d.size(), 4);
        assert!(!d.is_empty());
        assert!(!d.is_singleton());
        assert!(FiniteDomain::singleton(7).is_singleton());
        assert!(d.contains(4));
        assert!(!d.contains(3));
        assert_eq!(FiniteDomain::interval(1, 3).iter().collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(FiniteDomain::<i64>::empty().size(), 0);
    }

    #[test]
    fn normalization_fuses_and_orders() {
        assert_eq!(dom(&[(4, 6), (1, 3)]), FiniteDomain::interval(1, 6));
        assert_eq!(dom(&[(1, 4), (3, 8)]), FiniteDomain::interval(1, 8));
        assert_eq!(dom(&[(5, 1), (2, 2)]), FiniteDomain::singleton(2));
        assert_eq!(dom(&[(1, 2), (4, 5)]).intervals(), &[(1, 2), (4, 5)]);
        assert_eq!(FiniteDomain::from_values([5, 1, 2, 2, 4]), dom(&[(1, 2), (4, 5)]));
    }

    #[test]
    fn rendering() {
        assert_eq!(dom(&[(1, 3), (5, 5), (7, 9)]).to_string(), "{1..3,5,7..9}");
        assert_eq!(FiniteDomain::<i64>::empty().to_string(), "{}");
        assert_eq!(FiniteDomain::singleton(-4).to_string(), "{-4}");
        assert_eq!(dom(&[(-3, -1)]).to_string(), "{-3..-1}");
    }

    #[test]
    fn works_at_scalar_extremes() {
        let d = FiniteDomain::interval(i64::MIN, i64::MIN + 2);
        assert_eq!(d.remove(i64::MIN + 1).size(), 2);
        let top = FiniteDomain::interval(i64::MAX - 2, i64::MAX);
        assert_eq!(top.remove(i64::MAX).max(), Ok(i64::MAX - 1));
        assert_eq!(FiniteDomain::interval(i64::MIN, i64::MAX).size(), u64::MAX);
    }

    #[test]
    fn other_scalar_widths() {
        let d: FiniteDomain<u8> = FiniteDomain::interval(250, 255);
        assert_eq!(d.remove(255).max(), Ok(254));
        let d: FiniteDomain<i16> = FiniteDomain::from_values([-2, 0, 1]);
        assert_eq!(d.to_string(), "{-2,0..1}");
    }

    fn arb_domain() -> impl Strategy<Value = FiniteDomain> {
        prop::collection::vec((-60i64..60, 0i64..8), 0..6)
            .prop_map(|raw| FiniteDomain::from_intervals(raw.into_iter().map(|(lo, w)| (lo, lo + w))))
    }

    fn model(d: &FiniteDomain) -> BTreeSet<i64> {
        d.iter().collect()
    }

    proptest! {
        #[test]
        fn normal_form_holds(d in arb_domain()) {
            for w in d.intervals().windows(2) {
                prop_assert!(w[0].1 + 1 < w[1].0, "{d} is not in normal form");
            }
            for &(lo, hi) in d.intervals() {
                prop_assert!(lo <= hi);
            }
        }

        #[test]
        fn matches_set_model(a in arb_domain(), b in arb_domain(), v in -70i64..70) {
            let (ma, mb) = (model(&a), model(&b));

            let mut m = ma.clone();
            m.remove(&v);
            prop_assert_eq!(model(&a.remove(v)), m);

            prop_assert_eq!(model(&a.intersect(&b)), ma.intersection(&mb).copied().collect::<BTreeSet<_>>());
            prop_assert_eq!(model(&a.remove_all(mb.iter().copied())), ma.difference(&mb).copied().collect::<BTreeSet<_>>());
        }

        #[test]
        fn remove_shrinks_by_membership(d in arb_domain(), v in -70i64..70) {
            let expect = d.size() - u64::from(d.contains(v));
            prop_assert_eq!(d.remove(v).size(), expect);
        }

        #[test]
        fn intersect_laws(a in arb_domain(), b in arb_domain(), c in arb_domain()) {
            prop_assert_eq!(a.intersect(&b), b.intersect(&a));
            prop_assert_eq!(a.intersect(&b).intersect(&c), a.intersect(&b.intersect(&c)));
            prop_assert_eq!(a.intersect(&a), a.clone());
        }

        #[test]
        fn hull_covers(d in arb_domain()) {
            prop_assert!(d.is_subset_of(&d.hull()));
        }

        #[test]
        fn iterate_round_trips(d in arb_domain()) {
            let vals: Vec<i64> = d.iter().collect();
            prop_assert_eq!(vals.len() as u64, d.size());
            prop_assert!(vals.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(FiniteDomain::from_values(vals), d);
        }

        #[test]
        fn rendering_round_trips_by_eye(d in arb_domain()) {
            // `{}`-wrapped, comma-separated, `..` only for true runs.
            let s = d.to_string();
            prop_assert!(s.starts_with('{') && s.ends_with('}'), "bad wrapping: {}", s);
            prop_assert_eq!(s.matches("..").count(),
                d.intervals().iter().filter(|(lo, hi)| lo != hi).count());
        }
    }
}
