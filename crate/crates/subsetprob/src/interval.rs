//! Finite unions of closed rational subintervals of the unit interval.
//!
//! [`UnitIntervalSet`] is the value space of the whole crate: experiments get
//! assigned one of these sets instead of a single number. The representation
//! is canonical (sorted, pairwise disjoint, non-adjacent components with exact
//! rational endpoints), so structural equality is semantic equality. Only
//! finite unions of closed intervals are representable; that is enough for
//! every construction in the crate and keeps all operations exact.
//!
//! Text form: `empty`, or components joined by `u`, where a component is
//! `[lo, hi]` or a point `{x}` and endpoints are fractions, integers, or
//! decimals. Example: `{1/4} u [3/5, 7/10]`. Printing always round-trips.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::rational::{in_unit_interval, one, zero, Rational};
use crate::scan::Cursor;

/// A closed interval inside [0, 1]; a single point when `lo == hi`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClosedInterval {
    lo: Rational,
    hi: Rational,
}

impl ClosedInterval {
    fn new(lo: Rational, hi: Rational) -> Result<Self, Error> {
        if !in_unit_interval(&lo) || !in_unit_interval(&hi) || lo > hi {
            return Err(Error::InvalidEndpoints { lo, hi });
        }
        Ok(ClosedInterval { lo, hi })
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }
}

impl fmt::Display for ClosedInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{{{}}}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

/// A canonical finite union of closed subintervals of [0, 1].
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitIntervalSet {
    components: Vec<ClosedInterval>,
}

impl UnitIntervalSet {
    /// The empty set. An experiment whose value is empty cannot be performed
    /// in that state.
    pub fn empty() -> Self {
        UnitIntervalSet { components: Vec::new() }
    }

    /// The whole unit interval [0, 1].
    pub fn full() -> Self {
        UnitIntervalSet {
            components: vec![ClosedInterval { lo: zero(), hi: one() }],
        }
    }

    /// The point {1}, the value of a certain experiment.
    pub fn one() -> Self {
        UnitIntervalSet {
            components: vec![ClosedInterval { lo: one(), hi: one() }],
        }
    }

    /// The point {0}.
    pub fn zero() -> Self {
        UnitIntervalSet {
            components: vec![ClosedInterval { lo: zero(), hi: zero() }],
        }
    }

    /// The point {x}, for `x` in [0, 1].
    pub fn singleton(x: Rational) -> Result<Self, Error> {
        if !in_unit_interval(&x) {
            return Err(Error::OutOfUnitInterval { what: "point", value: x });
        }
        Ok(UnitIntervalSet {
            components: vec![ClosedInterval { lo: x.clone(), hi: x }],
        })
    }

    /// The interval [lo, hi], for `0 <= lo <= hi <= 1`.
    pub fn interval(lo: Rational, hi: Rational) -> Result<Self, Error> {
        Ok(UnitIntervalSet { components: vec![ClosedInterval::new(lo, hi)?] })
    }

    /// Build the canonical set covering exactly the given closed intervals.
    /// Inputs may overlap, touch, or arrive in any order; endpoints must
    /// satisfy `0 <= lo <= hi <= 1`.
    pub fn normalize(
        pairs: impl IntoIterator<Item = (Rational, Rational)>,
    ) -> Result<Self, Error> {
        let mut components = Vec::new();
        for (lo, hi) in pairs {
            components.push(ClosedInterval::new(lo, hi)?);
        }
        Ok(Self::from_components(components))
    }

    /// Sort and merge intervals that are already individually valid.
    fn from_components(mut components: Vec<ClosedInterval>) -> Self {
        components.sort();
        let mut merged: Vec<ClosedInterval> = Vec::with_capacity(components.len());
        for c in components {
            match merged.last_mut() {
                // Closed intervals that touch form one interval, so merge on
                // c.lo == last.hi as well as on overlap.
                Some(last) if c.lo <= last.hi => {
                    if c.hi > last.hi {
                        last.hi = c.hi;
                    }
                }
                _ => merged.push(c),
            }
        }
        UnitIntervalSet { components: merged }
    }

    pub fn components(&self) -> &[ClosedInterval] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// The single point of a one-point set, if that is what this is.
    pub fn is_singleton(&self) -> Option<&Rational> {
        match self.components.as_slice() {
            [c] if c.is_point() => Some(&c.lo),
            _ => None,
        }
    }

    /// Least element, unless empty.
    pub fn min(&self) -> Option<&Rational> {
        self.components.first().map(|c| &c.lo)
    }

    /// Greatest element, unless empty.
    pub fn max(&self) -> Option<&Rational> {
        self.components.last().map(|c| &c.hi)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.components.iter().any(|c| c.contains(x))
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.components.clone();
        all.extend(other.components.iter().cloned());
        Self::from_components(all)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (a, b) = (&self.components, &other.components);
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let lo = a[i].lo.clone().max(b[j].lo.clone());
            let hi = a[i].hi.clone().min(b[j].hi.clone());
            if lo <= hi {
                out.push(ClosedInterval { lo, hi });
            }
            if a[i].hi <= b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        // Pieces sliced out of one component by several of the other stay
        // ordered and separated, so no merge pass is needed.
        UnitIntervalSet { components: out }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        let mut j = 0;
        for c in &self.components {
            while j < other.components.len() && other.components[j].hi < c.lo {
                j += 1;
            }
            match other.components.get(j) {
                Some(o) if o.lo <= c.lo && c.hi <= o.hi => {}
                _ => return false,
            }
        }
        true
    }

    /// The image of this set under `x -> 1 - x`.
    ///
    /// The map is an order-reversing bijection of [0, 1], so it commutes with
    /// union and intersection, is an involution, and fixes [0, 1] and the
    /// empty set.
    pub fn one_minus(&self) -> Self {
        let components = self
            .components
            .iter()
            .rev()
            .map(|c| ClosedInterval { lo: one() - &c.hi, hi: one() - &c.lo })
            .collect();
        UnitIntervalSet { components }
    }

    /// Smallest single interval containing the set. Undefined for the empty
    /// set, which has no endpoints to span.
    pub fn convex_hull(&self) -> Result<Self, Error> {
        match (self.min(), self.max()) {
            (Some(lo), Some(hi)) => Ok(UnitIntervalSet {
                components: vec![ClosedInterval { lo: lo.clone(), hi: hi.clone() }],
            }),
            _ => Err(Error::EmptyConvexHull),
        }
    }

    /// Union of a family; empty for an empty family.
    pub fn union_all<'a>(sets: impl IntoIterator<Item = &'a Self>) -> Self {
        let mut all = Vec::new();
        for s in sets {
            all.extend(s.components.iter().cloned());
        }
        Self::from_components(all)
    }

    /// Intersection of a family; the whole interval for an empty family.
    pub fn intersect_all<'a>(sets: impl IntoIterator<Item = &'a Self>) -> Self {
        sets.into_iter().fold(Self::full(), |acc, s| acc.intersect(s))
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        let mut cur = Cursor::new(s);
        let v = Self::parse_from(&mut cur)?;
        cur.finish()?;
        Ok(v)
    }

    /// Parse a set starting at the cursor and running to end of input; used
    /// directly by the table-file parser so columns stay line-relative.
    pub(crate) fn parse_from(cur: &mut Cursor) -> Result<Self, Error> {
        cur.skip_ws();
        if !matches!(cur.peek(), Some(b'[') | Some(b'{')) {
            let col = cur.col();
            let word = cur.ident().map_err(|_| Error::Parse {
                line: 1,
                col,
                msg: "expected `empty`, `[`, or `{`".to_string(),
            })?;
            if word != "empty" {
                return Err(Error::Parse {
                    line: 1,
                    col,
                    msg: format!("expected `empty`, `[`, or `{{`, found {word:?}"),
                });
            }
            cur.finish()?;
            return Ok(Self::empty());
        }
        let mut components = vec![Self::parse_component(cur)?];
        loop {
            cur.skip_ws();
            if cur.at_end() {
                break;
            }
            let col = cur.col();
            let sep = cur.ident().map_err(|_| Error::Parse {
                line: 1,
                col,
                msg: "expected `u` between components".to_string(),
            })?;
            if sep != "u" {
                return Err(Error::Parse {
                    line: 1,
                    col,
                    msg: format!("expected `u` between components, found {sep:?}"),
                });
            }
            cur.skip_ws();
            components.push(Self::parse_component(cur)?);
        }
        Ok(Self::from_components(components))
    }

    fn parse_component(cur: &mut Cursor) -> Result<ClosedInterval, Error> {
        if cur.eat(b'{') {
            cur.skip_ws();
            let col = cur.col();
            let x = cur.rational()?;
            cur.skip_ws();
            cur.expect(b'}')?;
            if !in_unit_interval(&x) {
                return Err(Error::Parse {
                    line: 1,
                    col,
                    msg: format!("point {x} lies outside [0, 1]"),
                });
            }
            Ok(ClosedInterval { lo: x.clone(), hi: x })
        } else {
            let col = cur.col();
            cur.expect(b'[')?;
            cur.skip_ws();
            let lo = cur.rational()?;
            cur.skip_ws();
            cur.expect(b',')?;
            cur.skip_ws();
            let hi = cur.rational()?;
            cur.skip_ws();
            cur.expect(b']')?;
            ClosedInterval::new(lo, hi).map_err(|e| Error::Parse {
                line: 1,
                col,
                msg: e.to_string(),
            })
        }
    }
}

impl fmt::Display for UnitIntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "empty");
        }
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, " u ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for UnitIntervalSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn set(s: &str) -> UnitIntervalSet {
        UnitIntervalSet::parse(s).unwrap()
    }

    #[test]
    fn normalize_merges_overlap() {
        let v = UnitIntervalSet::normalize(vec![
            (ratio(2, 10), ratio(5, 10)),
            (ratio(4, 10), ratio(9, 10)),
        ])
        .unwrap();
        assert_eq!(v, set("[0.2, 0.9]"));
    }

    #[test]
    fn normalize_merges_touching_intervals() {
        let v = UnitIntervalSet::normalize(vec![
            (ratio(1, 4), ratio(1, 2)),
            (ratio(1, 2), ratio(3, 4)),
        ])
        .unwrap();
        assert_eq!(v.components().len(), 1);
        assert_eq!(v, set("[1/4, 3/4]"));
    }

    #[test]
    fn normalize_sorts_components() {
        let v = UnitIntervalSet::normalize(vec![
            (ratio(3, 10), ratio(3, 10)),
            (ratio(1, 10), ratio(2, 10)),
        ])
        .unwrap();
        assert_eq!(v.to_string(), "[1/10, 1/5] u {3/10}");
    }

    #[test]
    fn normalize_of_nothing_is_empty() {
        let v = UnitIntervalSet::normalize(Vec::new()).unwrap();
        assert!(v.is_empty());
        assert_eq!(v, UnitIntervalSet::empty());
    }

    #[test]
    fn normalize_rejects_bad_endpoints() {
        assert!(UnitIntervalSet::normalize(vec![(ratio(5, 10), ratio(2, 10))]).is_err());
        assert!(UnitIntervalSet::normalize(vec![(ratio(-1, 10), ratio(2, 10))]).is_err());
        assert!(UnitIntervalSet::normalize(vec![(ratio(1, 2), ratio(3, 2))]).is_err());
    }

    #[test]
    fn union_examples() {
        assert_eq!(UnitIntervalSet::one().union(&UnitIntervalSet::one()), set("{1}"));
        let v = set("{0.3}").union(&set("{0.7}"));
        assert_eq!(v.components().len(), 2);
        assert_eq!(v, set("{3/10} u {7/10}"));
        let w = set("[0.1, 0.4]");
        assert_eq!(UnitIntervalSet::empty().union(&w), w);
    }

    #[test]
    fn intersect_examples() {
        assert_eq!(set("[0, 0.5]").intersect(&set("[0.3, 1]")), set("[0.3, 0.5]"));
        assert!(set("{0.2}").intersect(&set("{0.8}")).is_empty());
        assert_eq!(set("[0.3, 0.6]").intersect(&set("{0.4} u [0.55, 0.9]")), set("{2/5} u [11/20, 3/5]"));
    }

    #[test]
    fn intersect_cuts_one_component_into_pieces() {
        let a = set("[0, 1]");
        let b = set("{0.1} u [0.5, 0.6] u {0.9}");
        assert_eq!(a.intersect(&b), b);
    }

    #[test]
    fn subset_examples() {
        assert!(set("{1}").is_subset(&set("[0.9, 1]")));
        assert!(!set("[0.8, 1]").is_subset(&set("[0.9, 1]")));
        assert!(UnitIntervalSet::empty().is_subset(&UnitIntervalSet::empty()));
        assert!(UnitIntervalSet::empty().is_subset(&set("{0.5}")));
        assert!(!set("{0.5}").is_subset(&UnitIntervalSet::empty()));
        assert!(set("{0.2} u {0.6}").is_subset(&set("[0.1, 0.3] u [0.5, 0.7]")));
        assert!(!set("[0.2, 0.55]").is_subset(&set("[0.1, 0.3] u [0.5, 0.7]")));
    }

    #[test]
    fn contains_checks_membership() {
        let v = set("{1/4} u [3/5, 7/10]");
        assert!(v.contains(&ratio(1, 4)));
        assert!(v.contains(&ratio(3, 5)));
        assert!(v.contains(&ratio(13, 20)));
        assert!(!v.contains(&ratio(1, 2)));
        assert!(!UnitIntervalSet::empty().contains(&ratio(1, 2)));
    }

    #[test]
    fn singleton_detection() {
        assert_eq!(set("{1}").is_singleton(), Some(&ratio(1, 1)));
        assert_eq!(set("[0.2, 0.2]").is_singleton(), Some(&ratio(1, 5)));
        assert_eq!(set("[0.2, 0.3]").is_singleton(), None);
        assert_eq!(UnitIntervalSet::empty().is_singleton(), None);
    }

    #[test]
    fn one_minus_examples() {
        assert_eq!(set("[0.2, 0.5]").one_minus(), set("[0.5, 0.8]"));
        assert_eq!(set("{1}").one_minus(), set("{0}"));
        assert_eq!(UnitIntervalSet::full().one_minus(), UnitIntervalSet::full());
        assert!(UnitIntervalSet::empty().one_minus().is_empty());
        assert_eq!(set("{0.1} u [0.6, 0.7]").one_minus(), set("[3/10, 2/5] u {9/10}"));
    }

    #[test]
    fn convex_hull_examples() {
        assert_eq!(set("{0.1} u {0.9}").convex_hull().unwrap(), set("[0.1, 0.9]"));
        assert_eq!(set("{0.4}").convex_hull().unwrap(), set("{0.4}"));
        assert!(matches!(
            UnitIntervalSet::empty().convex_hull(),
            Err(Error::EmptyConvexHull)
        ));
    }

    #[test]
    fn display_matches_grammar() {
        assert_eq!(set("{1/4} u [3/5, 7/10]").to_string(), "{1/4} u [3/5, 7/10]");
        assert_eq!(UnitIntervalSet::empty().to_string(), "empty");
        assert_eq!(set("[0.25, 0.25]").to_string(), "{1/4}");
    }

    #[test]
    fn parse_accepts_decimals_and_fractions() {
        assert_eq!(set("[0.6, 7/10]"), set("[3/5, 0.7]"));
        assert_eq!(set("empty"), UnitIntervalSet::empty());
        assert_eq!(set("  { 1 }  "), UnitIntervalSet::one());
    }

    #[test]
    fn parse_rejects_malformed_input() {
        for bad in [
            "",
            "[0.5, 0.2]",
            "[0.2, 1.5]",
            "{1.5}",
            "[0.1 0.2]",
            "[0.1, 0.2] [0.3, 0.4]",
            "[0.1, 0.2] v [0.3, 0.4]",
            "{0.5} u",
            "emptyy",
            "full",
        ] {
            assert!(
                matches!(UnitIntervalSet::parse(bad), Err(Error::Parse { .. })),
                "expected parse error for {bad:?}"
            );
        }
    }

    #[test]
    fn parse_error_reports_column() {
        match UnitIntervalSet::parse("[0.1, 0.2] u [0.5, 0.3]") {
            Err(Error::Parse { line, col, .. }) => {
                assert_eq!(line, 1);
                assert_eq!(col, 14);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    prop_compose! {
        fn arb_unit_rational()(den in 1u32..=24, num in 0u32..=24) -> Rational {
            ratio((num % (den + 1)) as i64, den as i64)
        }
    }

    prop_compose! {
        fn arb_interval_set()(
            pairs in prop::collection::vec((arb_unit_rational(), arb_unit_rational()), 0..4)
        ) -> UnitIntervalSet {
            let ordered = pairs
                .into_iter()
                .map(|(a, b)| if a <= b { (a, b) } else { (b, a) });
            UnitIntervalSet::normalize(ordered).unwrap()
        }
    }

    proptest! {
        #[test]
        fn canonical_form_is_stable(v in arb_interval_set()) {
            let again = UnitIntervalSet::normalize(
                v.components().iter().map(|c| (c.lo().clone(), c.hi().clone())),
            ).unwrap();
            prop_assert_eq!(again, v);
        }

        #[test]
        fn union_and_intersection_agree_with_subset(
            a in arb_interval_set(),
            b in arb_interval_set(),
        ) {
            prop_assert_eq!(a.is_subset(&b), a.union(&b) == b);
            prop_assert_eq!(a.is_subset(&b), a.intersect(&b) == a);
        }

        #[test]
        fn union_commutes_and_absorbs(a in arb_interval_set(), b in arb_interval_set()) {
            prop_assert_eq!(a.union(&b), b.union(&a));
            prop_assert_eq!(a.intersect(&b), b.intersect(&a));
            prop_assert_eq!(a.union(&a.intersect(&b)), a.clone());
            prop_assert_eq!(a.intersect(&a.union(&b)), a.clone());
        }

        #[test]
        fn membership_tracks_set_algebra(
            a in arb_interval_set(),
            b in arb_interval_set(),
            x in arb_unit_rational(),
        ) {
            prop_assert_eq!(a.union(&b).contains(&x), a.contains(&x) || b.contains(&x));
            prop_assert_eq!(a.intersect(&b).contains(&x), a.contains(&x) && b.contains(&x));
            prop_assert_eq!(a.one_minus().contains(&x), a.contains(&(one() - &x)));
        }

        #[test]
        fn reflection_is_an_involution(v in arb_interval_set()) {
            prop_assert_eq!(v.one_minus().one_minus(), v);
        }

        #[test]
        fn reflection_commutes_with_meet_and_join(
            a in arb_interval_set(),
            b in arb_interval_set(),
        ) {
            prop_assert_eq!(a.intersect(&b).one_minus(), a.one_minus().intersect(&b.one_minus()));
            prop_assert_eq!(a.union(&b).one_minus(), a.one_minus().union(&b.one_minus()));
        }

        #[test]
        fn reflection_is_monotone(a in arb_interval_set(), b in arb_interval_set()) {
            let bigger = a.union(&b);
            prop_assert!(a.one_minus().is_subset(&bigger.one_minus()));
        }

        #[test]
        fn hull_contains_the_set(v in arb_interval_set()) {
            if !v.is_empty() {
                prop_assert!(v.is_subset(&v.convex_hull().unwrap()));
            }
        }

        #[test]
        fn printing_round_trips(v in arb_interval_set()) {
            prop_assert_eq!(UnitIntervalSet::parse(&v.to_string()).unwrap(), v);
        }
    }
}
