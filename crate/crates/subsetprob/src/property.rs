//! Deriving the property structure a system carries.
//!
//! Two experiment terms that are certain in exactly the same states describe
//! the same property of the entity, so properties are equivalence classes of
//! terms under equal certainty sets. Ordered by certainty-set inclusion the
//! classes form a complete lattice: the meet of two classes is the class of
//! the product of their representatives, the join is the intersection of the
//! upper bounds, the top is the class of the unit experiment, and the bottom
//! is the meet of everything (which contains the inverted unit and is certain
//! nowhere). Each state `p` carries the set of properties actual in `p`,
//! those whose certainty set contains `p`; states themselves are ordered by
//! `p <= q` when everything certain in `q` is certain in `p`.
//!
//! The derivation never enumerates the exponentially many terms. A class is
//! determined by its certainty set, every certainty set is an intersection
//! of literal certainty sets, and there are only `2n` literals; closing the
//! literal sets under intersection therefore finds every class, and the
//! least term of a class can be read off the candidate literals directly.
//! [`term_preorder`] and [`equivalence_classes`] do walk the full term
//! universe and serve as independent, brute-force views of the same
//! structure for small systems.
//!
//! [`derive_property_system_with`] generalizes certainty (value inside a
//! chosen target set, e.g. `[1 - eps, 1]`) and reports which lattice
//! guarantees survive the change.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::Error;
use crate::interval::UnitIntervalSet;
use crate::sep::{SepSystem, StateId};
use crate::term::{enumerate_terms, ExperimentTerm};

/// Index of a lattice element within its [`PropertyLattice`].
pub type ElementId = usize;

/// The set of states in which a term (or a whole class) is certain.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CertaintySet(BTreeSet<StateId>);

impl CertaintySet {
    pub fn contains(&self, state: &StateId) -> bool {
        self.0.contains(state)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        CertaintySet(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &StateId> {
        self.0.iter()
    }
}

impl FromIterator<StateId> for CertaintySet {
    fn from_iter<T: IntoIterator<Item = StateId>>(iter: T) -> Self {
        CertaintySet(iter.into_iter().collect())
    }
}

impl fmt::Display for CertaintySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// One property: a class of terms sharing a certainty set, named by the
/// least term in the class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeElement {
    pub representative: ExperimentTerm,
    pub certainty_set: CertaintySet,
}

/// The complete lattice of properties of one system.
///
/// Elements are indexed by [`ElementId`] in a deterministic order (sorted by
/// certainty set). The `top` element is the class of the unit experiment and
/// `bottom` is the meet of all elements; under the standard certainty notion
/// these are also the order maximum and minimum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyLattice {
    elements: Vec<LatticeElement>,
    le: Vec<Vec<bool>>,
    meet: Vec<Vec<ElementId>>,
    join: Vec<Vec<ElementId>>,
    top: ElementId,
    bottom: ElementId,
    literal_classes: BTreeMap<ExperimentTerm, ElementId>,
}

impl PropertyLattice {
    /// Assemble a lattice from explicit parts, checking only dimensions and
    /// index ranges. Meant for tests that need to corrupt a structure; the
    /// usual way to obtain a lattice is [`derive_property_system`].
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        elements: Vec<LatticeElement>,
        le: Vec<Vec<bool>>,
        meet: Vec<Vec<ElementId>>,
        join: Vec<Vec<ElementId>>,
        top: ElementId,
        bottom: ElementId,
        literal_classes: BTreeMap<ExperimentTerm, ElementId>,
    ) -> Result<Self, Error> {
        let n = elements.len();
        let square = |m: &Vec<Vec<ElementId>>| {
            m.len() == n && m.iter().all(|row| row.len() == n)
        };
        if !(le.len() == n && le.iter().all(|r| r.len() == n) && square(&meet) && square(&join)) {
            return Err(Error::LengthMismatch { expected: n, found: le.len() });
        }
        let in_range = |id: ElementId| id < n;
        if !meet.iter().chain(join.iter()).all(|row| row.iter().all(|&id| in_range(id)))
            || !in_range(top)
            || !in_range(bottom)
            || !literal_classes.values().all(|&id| in_range(id))
        {
            return Err(Error::LengthMismatch { expected: n, found: n + 1 });
        }
        Ok(PropertyLattice { elements, le, meet, join, top, bottom, literal_classes })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[LatticeElement] {
        &self.elements
    }

    pub fn element(&self, id: ElementId) -> &LatticeElement {
        &self.elements[id]
    }

    pub fn le(&self, a: ElementId, b: ElementId) -> bool {
        self.le[a][b]
    }

    pub fn meet(&self, a: ElementId, b: ElementId) -> ElementId {
        self.meet[a][b]
    }

    pub fn join(&self, a: ElementId, b: ElementId) -> ElementId {
        self.join[a][b]
    }

    /// Meet of a family; the unit class for an empty family.
    pub fn meet_all(&self, ids: impl IntoIterator<Item = ElementId>) -> ElementId {
        let mut ids = ids.into_iter();
        match ids.next() {
            None => self.top,
            Some(first) => ids.fold(first, |acc, id| self.meet[acc][id]),
        }
    }

    /// Join of a family; the bottom class for an empty family.
    pub fn join_all(&self, ids: impl IntoIterator<Item = ElementId>) -> ElementId {
        let mut ids = ids.into_iter();
        match ids.next() {
            None => self.bottom,
            Some(first) => ids.fold(first, |acc, id| self.join[acc][id]),
        }
    }

    pub fn top(&self) -> ElementId {
        self.top
    }

    pub fn bottom(&self) -> ElementId {
        self.bottom
    }

    /// Class of a literal, if the literal belongs to this system's base.
    pub fn class_of_literal(&self, literal: &ExperimentTerm) -> Option<ElementId> {
        self.literal_classes.get(literal).copied()
    }

    /// All literals of the underlying base with their classes, in term order.
    pub fn literal_classes(&self) -> &BTreeMap<ExperimentTerm, ElementId> {
        &self.literal_classes
    }

    /// Class of an arbitrary term over the system's base: canonicalize, then
    /// meet the classes of the literals.
    pub fn class_of_term(&self, term: &ExperimentTerm) -> Result<ElementId, Error> {
        let canonical = term.canonicalize()?;
        let mut ids = Vec::new();
        for lit in canonical.literals() {
            match self.class_of_literal(&lit) {
                Some(id) => ids.push(id),
                None => {
                    return Err(Error::UnknownExperiment { id: lit.to_string() })
                }
            }
        }
        Ok(self.meet_all(ids))
    }

    /// Every canonical term whose class is `id`, in term order. Walks the
    /// full term universe, so the base must be small.
    pub fn class_members(&self, id: ElementId) -> Result<Vec<ExperimentTerm>, Error> {
        let literals: Vec<&ExperimentTerm> = self.literal_classes.keys().collect();
        if literals.len() > 16 {
            return Err(Error::UniverseTooLarge { experiments: literals.len() / 2 });
        }
        let mut out = Vec::new();
        for mask in 1u32..(1 << literals.len()) {
            let chosen: Vec<ExperimentTerm> = literals
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, l)| (*l).clone())
                .collect();
            let class = self.meet_all(
                chosen.iter().map(|l| self.literal_classes[l]),
            );
            if class == id {
                out.push(ExperimentTerm::product(chosen).unwrap());
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Pairs `(a, b)` where `b` covers `a`: `a < b` with nothing in between.
    pub fn covers(&self) -> Vec<(ElementId, ElementId)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a == b || !self.le[a][b] {
                    continue;
                }
                let direct = (0..n).all(|c| {
                    c == a || c == b || !(self.le[a][c] && self.le[c][b])
                });
                if direct {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Graphviz rendering of the Hasse diagram, weakest property at the top.
    pub fn to_dot(&self) -> String {
        use fmt::Write;
        let mut out = String::new();
        writeln!(out, "digraph property_lattice {{").unwrap();
        writeln!(out, "  rankdir=BT;").unwrap();
        writeln!(out, "  node [shape=box, fontname=\"monospace\"];").unwrap();
        for (id, e) in self.elements.iter().enumerate() {
            writeln!(
                out,
                "  e{id} [label=\"{}\\n{}\"];",
                e.representative, e.certainty_set
            )
            .unwrap();
        }
        for (a, b) in self.covers() {
            writeln!(out, "  e{a} -> e{b};").unwrap();
        }
        writeln!(out, "}}").unwrap();
        out
    }
}

/// A derived state property system: the property lattice together with the
/// state ordering and the map from each state to its actual properties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatePropertySystem {
    states: Vec<StateId>,
    state_le: Vec<Vec<bool>>,
    lattice: PropertyLattice,
    actual: Vec<BTreeSet<ElementId>>,
}

impl StatePropertySystem {
    /// Assemble from explicit parts, checking dimensions and index ranges.
    /// Meant for tests that corrupt a derived structure.
    pub fn from_parts(
        states: Vec<StateId>,
        state_le: Vec<Vec<bool>>,
        lattice: PropertyLattice,
        actual: Vec<BTreeSet<ElementId>>,
    ) -> Result<Self, Error> {
        let n = states.len();
        if state_le.len() != n
            || state_le.iter().any(|r| r.len() != n)
            || actual.len() != n
        {
            return Err(Error::LengthMismatch { expected: n, found: state_le.len() });
        }
        if actual.iter().flatten().any(|&id| id >= lattice.len()) {
            return Err(Error::LengthMismatch {
                expected: lattice.len(),
                found: lattice.len() + 1,
            });
        }
        Ok(StatePropertySystem { states, state_le, lattice, actual })
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn lattice(&self) -> &PropertyLattice {
        &self.lattice
    }

    pub fn state_index(&self, state: &StateId) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    /// `p <= q`: everything certain in `q` is certain in `p`.
    pub fn state_le(&self, p: &StateId, q: &StateId) -> Option<bool> {
        Some(self.state_le[self.state_index(p)?][self.state_index(q)?])
    }

    pub fn state_le_matrix(&self) -> &Vec<Vec<bool>> {
        &self.state_le
    }

    /// The properties actual in a state, by element id.
    pub fn actual_properties(&self, state: &StateId) -> Result<&BTreeSet<ElementId>, Error> {
        self.state_index(state)
            .map(|i| &self.actual[i])
            .ok_or_else(|| Error::UnknownState { id: state.to_string() })
    }

    pub fn actual_by_index(&self) -> &[BTreeSet<ElementId>] {
        &self.actual
    }

    /// Check the defining laws of a state property system; an empty report
    /// means the structure is coherent. Derived systems always are, so this
    /// is chiefly a tool for auditing hand-built or mutated structures.
    ///
    /// The meet law is checked on pairs; finite meets follow by induction,
    /// so pairs are enough for a finite lattice.
    pub fn validate(&self) -> Vec<SpViolation> {
        let mut out = Vec::new();
        let lat = &self.lattice;
        let n_states = self.states.len();
        for (i, p) in self.states.iter().enumerate() {
            if !self.actual[i].contains(&lat.top()) {
                out.push(SpViolation::TopNotActual { state: p.clone() });
            }
            if self.actual[i].contains(&lat.bottom()) {
                out.push(SpViolation::BottomActual { state: p.clone() });
            }
            for a in 0..lat.len() {
                for b in (a + 1)..lat.len() {
                    let both = self.actual[i].contains(&a) && self.actual[i].contains(&b);
                    let meet_in = self.actual[i].contains(&lat.meet(a, b));
                    if both != meet_in {
                        out.push(SpViolation::MeetActualityMismatch {
                            state: p.clone(),
                            a: lat.element(a).representative.clone(),
                            b: lat.element(b).representative.clone(),
                        });
                    }
                }
            }
        }
        for i in 0..n_states {
            for j in 0..n_states {
                let by_actuality = self.actual[j].is_subset(&self.actual[i]);
                if self.state_le[i][j] != by_actuality {
                    out.push(SpViolation::StateOrderMismatch {
                        p: self.states[i].clone(),
                        q: self.states[j].clone(),
                    });
                }
            }
        }
        for a in 0..lat.len() {
            for b in 0..lat.len() {
                let by_actuality = (0..n_states)
                    .all(|i| !self.actual[i].contains(&a) || self.actual[i].contains(&b));
                if lat.le(a, b) != by_actuality {
                    out.push(SpViolation::PropertyOrderMismatch {
                        a: lat.element(a).representative.clone(),
                        b: lat.element(b).representative.clone(),
                    });
                }
            }
        }
        out
    }

    /// Multi-line text description: the property table, the actuality map,
    /// and the state order.
    pub fn report(&self) -> String {
        use fmt::Write;
        let mut out = String::new();
        let lat = &self.lattice;
        writeln!(out, "states: {}, properties: {}", self.states.len(), lat.len()).unwrap();
        writeln!(out, "properties (id, representative, certain in):").unwrap();
        for (id, e) in lat.elements().iter().enumerate() {
            let marker = if id == lat.top() {
                "  (top)"
            } else if id == lat.bottom() {
                "  (bottom)"
            } else {
                ""
            };
            writeln!(out, "  e{id}: {} {}{marker}", e.representative, e.certainty_set)
                .unwrap();
        }
        writeln!(out, "actual properties per state:").unwrap();
        for (i, p) in self.states.iter().enumerate() {
            let ids: Vec<String> =
                self.actual[i].iter().map(|id| format!("e{id}")).collect();
            writeln!(out, "  {p}: {}", ids.join(", ")).unwrap();
        }
        writeln!(out, "state order (stronger <= weaker):").unwrap();
        let mut any = false;
        for (i, p) in self.states.iter().enumerate() {
            for (j, q) in self.states.iter().enumerate() {
                if i != j && self.state_le[i][j] {
                    writeln!(out, "  {p} <= {q}").unwrap();
                    any = true;
                }
            }
        }
        if !any {
            writeln!(out, "  (no two distinct states are comparable)").unwrap();
        }
        out
    }
}

/// A broken law found by [`StatePropertySystem::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpViolation {
    /// The unit class is not actual in some state.
    TopNotActual { state: StateId },
    /// The bottom class is actual in some state.
    BottomActual { state: StateId },
    /// Joint actuality of two properties disagrees with their meet.
    MeetActualityMismatch { state: StateId, a: ExperimentTerm, b: ExperimentTerm },
    /// The state order disagrees with actuality-set inclusion.
    StateOrderMismatch { p: StateId, q: StateId },
    /// The property order disagrees with actuality propagation.
    PropertyOrderMismatch { a: ExperimentTerm, b: ExperimentTerm },
}

impl fmt::Display for SpViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpViolation::TopNotActual { state } => {
                write!(f, "the unit property is not actual in state `{state}`")
            }
            SpViolation::BottomActual { state } => {
                write!(f, "the bottom property is actual in state `{state}`")
            }
            SpViolation::MeetActualityMismatch { state, a, b } => write!(
                f,
                "in state `{state}`, actuality of `{a}` and `{b}` disagrees with their meet"
            ),
            SpViolation::StateOrderMismatch { p, q } => write!(
                f,
                "state order between `{p}` and `{q}` disagrees with actuality inclusion"
            ),
            SpViolation::PropertyOrderMismatch { a, b } => write!(
                f,
                "property order between `{a}` and `{b}` disagrees with actuality propagation"
            ),
        }
    }
}

/// A guarantee that does not survive replacing the certainty test with a
/// general target set; reported by [`derive_property_system_with`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DerivationWarning {
    /// The unit experiment does not meet the target in these states, so the
    /// unit class is not actual everywhere (the target excludes 1).
    UnitNotCertainEverywhere { missing: Vec<StateId> },
    /// The bottom class is actual in these states; with the standard
    /// certainty test it never is.
    BottomNotEmpty { states: Vec<StateId> },
    /// Two classes had no upper bound at all, so their join fell back to the
    /// unit class; the result is not a lattice.
    JoinFallback { a: ElementId, b: ElementId },
}

impl fmt::Display for DerivationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivationWarning::UnitNotCertainEverywhere { missing } => {
                let names: Vec<&str> = missing.iter().map(StateId::as_str).collect();
                write!(
                    f,
                    "the unit experiment misses the target in states: {}",
                    names.join(", ")
                )
            }
            DerivationWarning::BottomNotEmpty { states } => {
                let names: Vec<&str> = states.iter().map(StateId::as_str).collect();
                write!(f, "the bottom property is actual in states: {}", names.join(", "))
            }
            DerivationWarning::JoinFallback { a, b } => write!(
                f,
                "classes e{a} and e{b} have no upper bound; their join fell back to the unit class"
            ),
        }
    }
}

/// Certainty set of each literal under the given target: the states where
/// the literal's value is contained in `target`.
fn literal_certainty_sets(
    sys: &SepSystem,
    target: &UnitIntervalSet,
) -> Result<BTreeMap<ExperimentTerm, BTreeSet<StateId>>, Error> {
    let mut out = BTreeMap::new();
    for sym in sys.base() {
        let lit = ExperimentTerm::Base(sym.clone());
        let inv = lit.inverse();
        let mut cs_lit = BTreeSet::new();
        let mut cs_inv = BTreeSet::new();
        for p in sys.states() {
            let v = sys.base_probability(sym, p)?;
            if v.is_subset(target) {
                cs_lit.insert(p.clone());
            }
            if v.one_minus().is_subset(target) {
                cs_inv.insert(p.clone());
            }
        }
        out.insert(lit, cs_lit);
        out.insert(inv, cs_inv);
    }
    Ok(out)
}

/// The least canonical term whose certainty set is exactly `c`: the least
/// matching literal if one exists, otherwise the product of the shortest
/// prefix of candidate literals (those whose set contains `c`) whose sets
/// intersect down to `c`. That prefix product is the least such term in term
/// order, since dropping an earlier candidate only makes the first factor
/// larger.
fn representative_for(
    literal_cs: &BTreeMap<ExperimentTerm, BTreeSet<StateId>>,
    c: &BTreeSet<StateId>,
) -> ExperimentTerm {
    for (lit, cs) in literal_cs {
        if cs == c {
            return lit.clone();
        }
    }
    let mut chosen = Vec::new();
    let mut current: Option<BTreeSet<StateId>> = None;
    for (lit, cs) in literal_cs {
        if !c.is_subset(cs) {
            continue;
        }
        let next = match &current {
            None => cs.clone(),
            Some(cur) => cur.intersection(cs).cloned().collect(),
        };
        chosen.push(lit.clone());
        if next == *c {
            return ExperimentTerm::product(chosen).unwrap();
        }
        current = Some(next);
    }
    unreachable!("every member of the closure family is an intersection of literal sets")
}

fn derive_core(
    sys: &SepSystem,
    target: &UnitIntervalSet,
) -> Result<(StatePropertySystem, Vec<DerivationWarning>), Error> {
    sys.require_valid()?;
    let literal_cs = literal_certainty_sets(sys, target)?;

    // Close the literal certainty sets under intersection; the result is
    // exactly the family of class certainty sets.
    let mut family: BTreeSet<BTreeSet<StateId>> = literal_cs.values().cloned().collect();
    loop {
        let mut fresh: Vec<BTreeSet<StateId>> = Vec::new();
        for a in &family {
            for b in &family {
                let i: BTreeSet<StateId> = a.intersection(b).cloned().collect();
                if !family.contains(&i) {
                    fresh.push(i);
                }
            }
        }
        fresh.sort();
        fresh.dedup();
        if fresh.is_empty() {
            break;
        }
        family.extend(fresh);
    }

    let sets: Vec<BTreeSet<StateId>> = family.into_iter().collect();
    let index: BTreeMap<&BTreeSet<StateId>, ElementId> =
        sets.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let n = sets.len();

    let elements: Vec<LatticeElement> = sets
        .iter()
        .map(|cs| LatticeElement {
            representative: representative_for(&literal_cs, cs),
            certainty_set: cs.iter().cloned().collect(),
        })
        .collect();
    let literal_classes: BTreeMap<ExperimentTerm, ElementId> = literal_cs
        .iter()
        .map(|(lit, cs)| (lit.clone(), index[cs]))
        .collect();

    let le: Vec<Vec<bool>> = (0..n)
        .map(|a| (0..n).map(|b| sets[a].is_subset(&sets[b])).collect())
        .collect();
    let meet: Vec<Vec<ElementId>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let i: BTreeSet<StateId> =
                        sets[a].intersection(&sets[b]).cloned().collect();
                    index[&i]
                })
                .collect()
        })
        .collect();

    let unit_class = literal_classes[&ExperimentTerm::unit()];
    let mut warnings = Vec::new();
    let mut join = vec![vec![0; n]; n];
    for a in 0..n {
        for b in 0..n {
            let uppers: Vec<ElementId> =
                (0..n).filter(|&c| le[a][c] && le[b][c]).collect();
            join[a][b] = if uppers.is_empty() {
                if a <= b {
                    warnings.push(DerivationWarning::JoinFallback { a, b });
                }
                unit_class
            } else {
                let glb: BTreeSet<StateId> = uppers
                    .iter()
                    .fold(None::<BTreeSet<StateId>>, |acc, &c| match acc {
                        None => Some(sets[c].clone()),
                        Some(cur) => Some(cur.intersection(&sets[c]).cloned().collect()),
                    })
                    .unwrap();
                index[&glb]
            };
        }
    }

    let bottom_set: BTreeSet<StateId> = sets
        .iter()
        .skip(1)
        .fold(sets[0].clone(), |acc, s| acc.intersection(s).cloned().collect());
    let bottom = index[&bottom_set];

    let unit_missing: Vec<StateId> = sys
        .states()
        .iter()
        .filter(|p| !sets[unit_class].contains(p))
        .cloned()
        .collect();
    if !unit_missing.is_empty() {
        warnings.push(DerivationWarning::UnitNotCertainEverywhere {
            missing: unit_missing,
        });
    }
    if !bottom_set.is_empty() {
        warnings.push(DerivationWarning::BottomNotEmpty {
            states: bottom_set.iter().cloned().collect(),
        });
    }

    let lattice = PropertyLattice {
        elements,
        le,
        meet,
        join,
        top: unit_class,
        bottom,
        literal_classes,
    };

    // State order: p <= q when every literal certain in q is certain in p;
    // by the transfer law that extends from literals to all terms.
    let states = sys.states().to_vec();
    let lit_sets: Vec<BTreeSet<&ExperimentTerm>> = states
        .iter()
        .map(|p| {
            literal_cs
                .iter()
                .filter(|(_, cs)| cs.contains(p))
                .map(|(lit, _)| lit)
                .collect()
        })
        .collect();
    let state_le: Vec<Vec<bool>> = (0..states.len())
        .map(|i| {
            (0..states.len())
                .map(|j| lit_sets[j].is_subset(&lit_sets[i]))
                .collect()
        })
        .collect();

    let actual: Vec<BTreeSet<ElementId>> = states
        .iter()
        .map(|p| {
            (0..lattice.len())
                .filter(|&id| lattice.element(id).certainty_set.contains(p))
                .collect()
        })
        .collect();

    let sp = StatePropertySystem { states, state_le, lattice, actual };
    Ok((sp, warnings))
}

/// Derive the state property system of a valid system under the standard
/// notion of certainty (value equal to `{1}`). The result always passes
/// [`StatePropertySystem::validate`].
pub fn derive_property_system(sys: &SepSystem) -> Result<StatePropertySystem, Error> {
    let (sp, warnings) = derive_core(sys, &UnitIntervalSet::one())?;
    debug_assert!(warnings.is_empty(), "standard derivation warned: {warnings:?}");
    Ok(sp)
}

/// Derive with certainty replaced by "value contained in `target`". The same
/// construction runs, but its guarantees can fail for permissive targets;
/// each failure is reported as a [`DerivationWarning`] alongside the result.
pub fn derive_property_system_with(
    sys: &SepSystem,
    target: &UnitIntervalSet,
) -> Result<(StatePropertySystem, Vec<DerivationWarning>), Error> {
    derive_core(sys, target)
}

/// The state preorder alone: `p <= q` when everything certain in `q` is
/// certain in `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatePreorder {
    states: Vec<StateId>,
    le: Vec<Vec<bool>>,
}

impl StatePreorder {
    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn le(&self, p: &StateId, q: &StateId) -> Option<bool> {
        let i = self.states.iter().position(|s| s == p)?;
        let j = self.states.iter().position(|s| s == q)?;
        Some(self.le[i][j])
    }

    pub fn equivalent(&self, p: &StateId, q: &StateId) -> Option<bool> {
        Some(self.le(p, q)? && self.le(q, p)?)
    }
}

pub fn state_preorder(sys: &SepSystem) -> Result<StatePreorder, Error> {
    let (sp, _) = derive_core(sys, &UnitIntervalSet::one())?;
    Ok(StatePreorder { states: sp.states.clone(), le: sp.state_le.clone() })
}

/// The preorder on the full canonical term universe, computed by direct
/// evaluation of every term in every state. Exponential in the base size;
/// a brute-force companion to the lattice for small systems.
#[derive(Clone, Debug)]
pub struct TermPreorder {
    terms: Vec<ExperimentTerm>,
    index: BTreeMap<ExperimentTerm, usize>,
    le: Vec<Vec<bool>>,
}

impl TermPreorder {
    pub fn terms(&self) -> &[ExperimentTerm] {
        &self.terms
    }

    /// `s <= t` when every state making `s` certain makes `t` certain.
    /// Arbitrary trees are accepted and canonicalized for lookup.
    pub fn le(&self, s: &ExperimentTerm, t: &ExperimentTerm) -> Option<bool> {
        let i = *self.index.get(&s.canonicalize().ok()?)?;
        let j = *self.index.get(&t.canonicalize().ok()?)?;
        Some(self.le[i][j])
    }

    pub fn equivalent(&self, s: &ExperimentTerm, t: &ExperimentTerm) -> Option<bool> {
        Some(self.le(s, t)? && self.le(t, s)?)
    }
}

pub fn term_preorder(sys: &SepSystem) -> Result<TermPreorder, Error> {
    sys.require_valid()?;
    let terms: Vec<ExperimentTerm> = enumerate_terms(sys.base())?.into_iter().collect();
    let cert: Vec<BTreeSet<usize>> = terms
        .iter()
        .map(|t| {
            sys.states()
                .iter()
                .enumerate()
                .filter(|(_, p)| sys.is_certain(t, p).unwrap_or(false))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let n = terms.len();
    let le: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| cert[i].is_subset(&cert[j])).collect())
        .collect();
    let index = terms.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    Ok(TermPreorder { terms, index, le })
}

/// One equivalence class of the full term universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermClass {
    pub certainty_set: CertaintySet,
    /// All members in term order; the first is the class representative.
    pub members: Vec<ExperimentTerm>,
}

/// Partition the full canonical term universe by certainty set, by direct
/// evaluation. Exponential in the base size; the lattice derivation computes
/// the same classes without enumeration.
pub fn equivalence_classes(sys: &SepSystem) -> Result<Vec<TermClass>, Error> {
    sys.require_valid()?;
    let terms = enumerate_terms(sys.base())?;
    let mut grouped: BTreeMap<CertaintySet, Vec<ExperimentTerm>> = BTreeMap::new();
    for t in terms {
        let cs: CertaintySet = sys
            .states()
            .iter()
            .filter(|p| sys.is_certain(&t, p).unwrap_or(false))
            .cloned()
            .collect();
        grouped.entry(cs).or_default().push(t);
    }
    Ok(grouped
        .into_iter()
        .map(|(certainty_set, members)| TermClass { certainty_set, members })
        .collect())
}

/// Map each state to the ids of the lattice elements actual in it.
pub fn actual_property_map(
    sys: &SepSystem,
    lattice: &PropertyLattice,
) -> BTreeMap<StateId, BTreeSet<ElementId>> {
    sys.states()
        .iter()
        .map(|p| {
            let ids = (0..lattice.len())
                .filter(|&id| lattice.element(id).certainty_set.contains(p))
                .collect();
            (p.clone(), ids)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn wood() -> SepSystem {
        SepSystem::from_rows(
            &["dry_light", "wet_light", "dry_dense"],
            &["tau", "burn", "float"],
            &[
                ("burn", "dry_light", "{1}"),
                ("burn", "wet_light", "[0, 1/10]"),
                ("burn", "dry_dense", "{1}"),
                ("float", "dry_light", "{1}"),
                ("float", "wet_light", "{1}"),
                ("float", "dry_dense", "{0}"),
            ],
        )
        .unwrap()
    }

    fn term(s: &str) -> ExperimentTerm {
        ExperimentTerm::parse(s).unwrap()
    }

    fn certset(sp: &StatePropertySystem, id: ElementId) -> Vec<String> {
        sp.lattice()
            .element(id)
            .certainty_set
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    #[test]
    fn wood_lattice_shape() {
        let sp = derive_property_system(&wood()).unwrap();
        let lat = sp.lattice();
        assert_eq!(lat.len(), 6);
        assert_eq!(lat.element(lat.top()).representative, term("tau"));
        assert_eq!(lat.element(lat.bottom()).representative, term("~burn"));
        assert!(lat.element(lat.bottom()).certainty_set.is_empty());
        assert_eq!(certset(&sp, lat.top()), vec!["dry_dense", "dry_light", "wet_light"]);
    }

    #[test]
    fn wood_meet_is_the_product_class() {
        let sp = derive_property_system(&wood()).unwrap();
        let lat = sp.lattice();
        let burn = lat.class_of_term(&term("burn")).unwrap();
        let float = lat.class_of_term(&term("float")).unwrap();
        let both = lat.meet(burn, float);
        assert_eq!(lat.element(both).representative, term("prod(burn, float)"));
        assert_eq!(certset(&sp, both), vec!["dry_light"]);
        assert_eq!(lat.class_of_term(&term("prod(burn, float)")).unwrap(), both);
        assert_eq!(lat.join(burn, float), lat.top());
    }

    #[test]
    fn wood_inverted_unit_is_bottom() {
        let sp = derive_property_system(&wood()).unwrap();
        let lat = sp.lattice();
        assert_eq!(lat.class_of_term(&term("~tau")).unwrap(), lat.bottom());
        assert_eq!(lat.class_of_term(&term("prod(tau, burn)")).unwrap(),
                   lat.class_of_term(&term("burn")).unwrap());
    }

    #[test]
    fn wood_actuality_map() {
        let sys = wood();
        let sp = derive_property_system(&sys).unwrap();
        let lat = sp.lattice();
        let dl = sys.state_ref("dry_light").unwrap();
        let wl = sys.state_ref("wet_light").unwrap();
        let actual_dl = sp.actual_properties(dl).unwrap();
        assert_eq!(actual_dl.len(), 4);
        assert!(actual_dl.contains(&lat.top()));
        assert!(actual_dl.contains(&lat.class_of_term(&term("prod(burn, float)")).unwrap()));
        let actual_wl = sp.actual_properties(wl).unwrap();
        assert_eq!(actual_wl.len(), 2);
        assert!(!actual_wl.contains(&lat.class_of_term(&term("burn")).unwrap()));
    }

    #[test]
    fn wood_state_order() {
        let sys = wood();
        let sp = derive_property_system(&sys).unwrap();
        let dl = sys.state_ref("dry_light").unwrap();
        let wl = sys.state_ref("wet_light").unwrap();
        let dd = sys.state_ref("dry_dense").unwrap();
        assert_eq!(sp.state_le(dl, wl), Some(true));
        assert_eq!(sp.state_le(wl, dl), Some(false));
        assert_eq!(sp.state_le(dl, dd), Some(false));
        assert_eq!(sp.state_le(dd, wl), Some(false));
        assert_eq!(sp.state_le(dl, dl), Some(true));

        let pre = state_preorder(&sys).unwrap();
        assert_eq!(pre.le(dl, wl), Some(true));
        assert_eq!(pre.equivalent(dl, wl), Some(false));
    }

    #[test]
    fn trivial_system_has_two_properties() {
        let sys = SepSystem::from_rows(&["p"], &["tau"], &[]).unwrap();
        let sp = derive_property_system(&sys).unwrap();
        let lat = sp.lattice();
        assert_eq!(lat.len(), 2);
        assert_eq!(lat.element(lat.top()).representative, term("tau"));
        assert_eq!(lat.element(lat.bottom()).representative, term("~tau"));
        let p = sys.state_ref("p").unwrap();
        assert_eq!(sp.actual_properties(p).unwrap().len(), 1);
    }

    #[test]
    fn derivation_requires_a_valid_system() {
        let holey = SepSystem::from_rows(&["p"], &["tau", "a"], &[]).unwrap();
        assert!(matches!(
            derive_property_system(&holey),
            Err(Error::InvalidSystem { .. })
        ));
    }

    #[test]
    fn derived_systems_validate() {
        let sp = derive_property_system(&wood()).unwrap();
        assert_eq!(sp.validate(), Vec::new());
    }

    #[test]
    fn corrupted_actuality_is_caught() {
        let sp = derive_property_system(&wood()).unwrap();
        let lat = sp.lattice().clone();
        let mut actual = sp.actual_by_index().to_vec();
        actual[0].remove(&lat.top());
        let broken = StatePropertySystem::from_parts(
            sp.states().to_vec(),
            sp.state_le_matrix().clone(),
            lat.clone(),
            actual,
        )
        .unwrap();
        assert!(broken
            .validate()
            .iter()
            .any(|v| matches!(v, SpViolation::TopNotActual { .. })));

        let mut actual = sp.actual_by_index().to_vec();
        actual[1].insert(lat.bottom());
        let broken = StatePropertySystem::from_parts(
            sp.states().to_vec(),
            sp.state_le_matrix().clone(),
            lat.clone(),
            actual,
        )
        .unwrap();
        let violations = broken.validate();
        assert!(violations.iter().any(|v| matches!(v, SpViolation::BottomActual { .. })));
    }

    #[test]
    fn corrupted_meet_table_is_caught() {
        let sp = derive_property_system(&wood()).unwrap();
        let lat = sp.lattice();
        let burn = lat.class_of_term(&term("burn")).unwrap();
        let float = lat.class_of_term(&term("float")).unwrap();
        let mut meet = (0..lat.len())
            .map(|a| (0..lat.len()).map(|b| lat.meet(a, b)).collect::<Vec<_>>())
            .collect::<Vec<_>>();
        meet[burn][float] = lat.top();
        meet[float][burn] = lat.top();
        let le = (0..lat.len())
            .map(|a| (0..lat.len()).map(|b| lat.le(a, b)).collect::<Vec<_>>())
            .collect::<Vec<_>>();
        let join = (0..lat.len())
            .map(|a| (0..lat.len()).map(|b| lat.join(a, b)).collect::<Vec<_>>())
            .collect::<Vec<_>>();
        let corrupt = PropertyLattice::from_parts(
            lat.elements().to_vec(),
            le,
            meet,
            join,
            lat.top(),
            lat.bottom(),
            BTreeMap::new(),
        )
        .unwrap();
        let broken = StatePropertySystem::from_parts(
            sp.states().to_vec(),
            sp.state_le_matrix().clone(),
            corrupt,
            sp.actual_by_index().to_vec(),
        )
        .unwrap();
        assert!(broken
            .validate()
            .iter()
            .any(|v| matches!(v, SpViolation::MeetActualityMismatch { .. })));
    }

    #[test]
    fn corrupted_state_order_is_caught() {
        let sp = derive_property_system(&wood()).unwrap();
        let mut state_le = sp.state_le_matrix().clone();
        state_le[0][1] = !state_le[0][1];
        let broken = StatePropertySystem::from_parts(
            sp.states().to_vec(),
            state_le,
            sp.lattice().clone(),
            sp.actual_by_index().to_vec(),
        )
        .unwrap();
        assert!(broken
            .validate()
            .iter()
            .any(|v| matches!(v, SpViolation::StateOrderMismatch { .. })));
    }

    #[test]
    fn equivalence_classes_agree_with_the_lattice() {
        let sys = wood();
        let sp = derive_property_system(&sys).unwrap();
        let classes = equivalence_classes(&sys).unwrap();
        let lat = sp.lattice();
        assert_eq!(classes.len(), lat.len());
        let total: usize = classes.iter().map(|c| c.members.len()).sum();
        assert_eq!(total, 63);
        for class in &classes {
            let id = lat.class_of_term(&class.members[0]).unwrap();
            assert_eq!(lat.element(id).certainty_set, class.certainty_set);
            assert_eq!(lat.element(id).representative, class.members[0]);
            for m in &class.members {
                assert_eq!(lat.class_of_term(m).unwrap(), id);
            }
        }
    }

    #[test]
    fn class_members_match_the_brute_force_partition() {
        let sys = wood();
        let sp = derive_property_system(&sys).unwrap();
        let lat = sp.lattice();
        let classes = equivalence_classes(&sys).unwrap();
        for class in &classes {
            let id = lat.class_of_term(&class.members[0]).unwrap();
            assert_eq!(lat.class_members(id).unwrap(), class.members);
        }
    }

    #[test]
    fn term_preorder_matches_certainty_inclusion() {
        let sys = wood();
        let pre = term_preorder(&sys).unwrap();
        assert_eq!(pre.terms().len(), 63);
        assert_eq!(pre.le(&term("burn"), &term("tau")), Some(true));
        assert_eq!(pre.le(&term("tau"), &term("burn")), Some(false));
        assert_eq!(pre.le(&term("prod(burn, float)"), &term("float")), Some(true));
        assert_eq!(pre.le(&term("~tau"), &term("burn")), Some(true));
        assert_eq!(
            pre.equivalent(&term("prod(tau, burn)"), &term("burn")),
            Some(true)
        );
    }

    #[test]
    fn hasse_covers_and_dot_output() {
        let sp = derive_property_system(&wood()).unwrap();
        let lat = sp.lattice();
        let covers = lat.covers();
        for (a, b) in &covers {
            assert!(lat.le(*a, *b) && a != b);
        }
        // Bottom is covered, top covers; nothing points beyond them.
        assert!(covers.iter().any(|(a, _)| *a == lat.bottom()));
        assert!(covers.iter().any(|(_, b)| *b == lat.top()));
        assert!(!covers.iter().any(|(_, b)| *b == lat.bottom()));
        let dot = lat.to_dot();
        assert!(dot.starts_with("digraph property_lattice {"));
        assert!(dot.contains("rankdir=BT"));
        assert!(dot.contains("prod(burn, float)"));
        assert_eq!(dot.matches(" -> ").count(), covers.len());
    }

    #[test]
    fn report_mentions_every_representative() {
        let sp = derive_property_system(&wood()).unwrap();
        let text = sp.report();
        for e in sp.lattice().elements() {
            assert!(text.contains(&e.representative.to_string()));
        }
        assert!(text.contains("dry_light <= wet_light"));
    }

    #[test]
    fn near_certainty_target_widens_actuality() {
        let sys = SepSystem::from_rows(
            &["p"],
            &["tau", "a"],
            &[("a", "p", "{19/20}")],
        )
        .unwrap();
        let sp = derive_property_system(&sys).unwrap();
        let lat = sp.lattice();
        let p = sys.state_ref("p").unwrap();
        let a = lat.class_of_term(&term("a")).unwrap();
        assert!(!sp.actual_properties(p).unwrap().contains(&a));

        let band = UnitIntervalSet::parse("[9/10, 1]").unwrap();
        let (wide, warnings) = derive_property_system_with(&sys, &band).unwrap();
        assert!(warnings.is_empty());
        let a_wide = wide.lattice().class_of_term(&term("a")).unwrap();
        assert!(wide.actual_properties(p).unwrap().contains(&a_wide));
        assert_eq!(wide.validate(), Vec::new());
    }

    #[test]
    fn permissive_target_degenerates_with_warnings() {
        let sys = wood();
        let (sp, warnings) =
            derive_property_system_with(&sys, &UnitIntervalSet::full()).unwrap();
        assert_eq!(sp.lattice().len(), 1);
        assert!(warnings
            .iter()
            .any(|w| matches!(w, DerivationWarning::BottomNotEmpty { .. })));
    }

    #[test]
    fn target_excluding_one_warns_about_the_unit() {
        let sys = wood();
        let (_, warnings) =
            derive_property_system_with(&sys, &UnitIntervalSet::zero()).unwrap();
        assert!(warnings
            .iter()
            .any(|w| matches!(w, DerivationWarning::UnitNotCertainEverywhere { .. })));
    }

    #[test]
    fn missing_upper_bounds_fall_back_with_a_warning() {
        // A target containing neither 0 nor 1 empties the certainty sets of
        // the unit and its inverse, so nothing sits above both `a` and `b`.
        let sys = SepSystem::from_rows(
            &["p", "q"],
            &["tau", "a", "b"],
            &[
                ("a", "p", "{1/3}"),
                ("a", "q", "{0}"),
                ("b", "p", "{0}"),
                ("b", "q", "{1/3}"),
            ],
        )
        .unwrap();
        let target = UnitIntervalSet::singleton(crate::rational::ratio(1, 3)).unwrap();
        let (_, warnings) = derive_property_system_with(&sys, &target).unwrap();
        assert!(warnings
            .iter()
            .any(|w| matches!(w, DerivationWarning::JoinFallback { .. })));
    }

    fn glb_from_order(lat: &PropertyLattice, a: ElementId, b: ElementId) -> Option<ElementId> {
        let lowers: Vec<ElementId> =
            (0..lat.len()).filter(|&c| lat.le(c, a) && lat.le(c, b)).collect();
        lowers
            .iter()
            .copied()
            .find(|&c| lowers.iter().all(|&d| lat.le(d, c)))
    }

    fn lub_from_order(lat: &PropertyLattice, a: ElementId, b: ElementId) -> Option<ElementId> {
        let uppers: Vec<ElementId> =
            (0..lat.len()).filter(|&c| lat.le(a, c) && lat.le(b, c)).collect();
        uppers
            .iter()
            .copied()
            .find(|&c| uppers.iter().all(|&d| lat.le(c, d)))
    }

    #[test]
    fn random_lattices_agree_with_order_theoretic_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..25 {
            let sys = random::sep_system(&mut rng, 4, 3, 10);
            let sp = derive_property_system(&sys).unwrap();
            let lat = sp.lattice();
            for a in 0..lat.len() {
                for b in 0..lat.len() {
                    assert_eq!(Some(lat.meet(a, b)), glb_from_order(lat, a, b));
                    assert_eq!(Some(lat.join(a, b)), lub_from_order(lat, a, b));
                }
            }
            assert!((0..lat.len()).all(|c| lat.le(lat.bottom(), c) && lat.le(c, lat.top())));
            assert_eq!(sp.validate(), Vec::new());
        }
    }

    #[test]
    fn random_product_classes_are_meets() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..50 {
            let sys = random::sep_system(&mut rng, 3, 3, 10);
            let sp = derive_property_system(&sys).unwrap();
            let lat = sp.lattice();
            let s = random::canonical_term(&mut rng, sys.base());
            let t = random::canonical_term(&mut rng, sys.base());
            let product = ExperimentTerm::product([s.clone(), t.clone()]).unwrap();
            assert_eq!(
                lat.class_of_term(&product).unwrap(),
                lat.meet(
                    lat.class_of_term(&s).unwrap(),
                    lat.class_of_term(&t).unwrap()
                )
            );
        }
    }

    #[test]
    fn random_state_order_matches_term_quantification() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..10 {
            let sys = random::sep_system(&mut rng, 3, 2, 8);
            let sp = derive_property_system(&sys).unwrap();
            let universe = enumerate_terms(sys.base()).unwrap();
            for p in sys.states() {
                for q in sys.states() {
                    let by_terms = universe.iter().all(|t| {
                        !sys.is_certain(t, q).unwrap() || sys.is_certain(t, p).unwrap()
                    });
                    assert_eq!(sp.state_le(p, q), Some(by_terms));
                }
            }
        }
    }

    #[test]
    fn random_class_certainty_sets_match_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..20 {
            let sys = random::sep_system(&mut rng, 4, 2, 10);
            let sp = derive_property_system(&sys).unwrap();
            let lat = sp.lattice();
            let t = random::raw_term(&mut rng, sys.base(), 3);
            let id = lat.class_of_term(&t).unwrap();
            let direct: CertaintySet = sys
                .states()
                .iter()
                .filter(|p| sys.is_certain(&t, p).unwrap())
                .cloned()
                .collect();
            assert_eq!(lat.element(id).certainty_set, direct);
        }
    }
}
