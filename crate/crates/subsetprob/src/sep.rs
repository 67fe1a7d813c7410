//! State-experiment-probability systems.
//!
//! A [`SepSystem`] lists the states of an entity, a base of yes/no
//! experiments, and a table assigning each base experiment in each state a
//! [`UnitIntervalSet`] of possible relative frequencies. Term values follow
//! from the table: an inverse reflects the set through `x -> 1 - x`, and a
//! product takes the union over its factors, since whichever factor is
//! actually performed contributes its frequencies. The unit experiment `tau`
//! has value `{1}` in every state; an empty value means the experiment cannot
//! be performed in that state.
//!
//! # Text format
//!
//! One `states:` line, one `experiments:` line, then `mu` lines:
//!
//! ```text
//! # wood in various conditions
//! states: dry_light, wet_light
//! experiments: tau, burn, float
//! mu burn dry_light = {1}
//! mu burn wet_light = [0, 1/10]
//! mu float dry_light = {1}
//! mu float wet_light = {1}
//! ```
//!
//! Blank lines and lines starting with `#` are skipped. Rows for `tau` may be
//! omitted; writing a system back out prints the table in declaration order,
//! so a parse/print cycle is lossless.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::Error;
use crate::interval::UnitIntervalSet;
use crate::rational::{in_unit_interval, one, Rational};
use crate::scan::Cursor;
use crate::term::{is_valid_identifier, ExperimentSymbol, ExperimentTerm};

/// Name of a state of the entity under study.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(String);

impl StateId {
    pub fn new(id: impl Into<String>) -> Result<Self, Error> {
        let id = id.into();
        if is_valid_identifier(&id) {
            Ok(StateId(id))
        } else {
            Err(Error::InvalidIdentifier { id })
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The table behind a system: explicit values per base experiment and state.
///
/// Rows for the unit experiment are usually left implicit; lookups go through
/// [`SepSystem`], which supplies `{1}` for `tau` when no row is stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubsetProbabilityTable {
    entries: BTreeMap<(ExperimentSymbol, StateId), UnitIntervalSet>,
}

impl SubsetProbabilityTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Set the value of `experiment` in `state`, returning any previous one.
    pub fn insert(
        &mut self,
        experiment: ExperimentSymbol,
        state: StateId,
        value: UnitIntervalSet,
    ) -> Option<UnitIntervalSet> {
        self.entries.insert((experiment, state), value)
    }

    pub fn get(
        &self,
        experiment: &ExperimentSymbol,
        state: &StateId,
    ) -> Option<&UnitIntervalSet> {
        self.entries.get(&(experiment.clone(), state.clone()))
    }

    pub fn entries(
        &self,
    ) -> impl Iterator<Item = (&ExperimentSymbol, &StateId, &UnitIntervalSet)> {
        self.entries.iter().map(|((e, s), v)| (e, s, v))
    }
}

/// A structural problem found by [`SepSystem::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SepViolation {
    /// A base experiment has no value in some state.
    MissingEntry { experiment: ExperimentSymbol, state: StateId },
    /// The unit experiment has a value other than `{1}` in some state.
    UnitNotCertain { state: StateId, found: UnitIntervalSet },
}

impl fmt::Display for SepViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SepViolation::MissingEntry { experiment, state } => {
                write!(f, "no value for experiment `{experiment}` in state `{state}`")
            }
            SepViolation::UnitNotCertain { state, found } => {
                write!(f, "unit experiment has value {found} in state `{state}`, expected {{1}}")
            }
        }
    }
}

/// Outcome of checking the containment transfer law for a product: the
/// product value sits inside a target set exactly when every factor value
/// does.
#[derive(Clone, Debug)]
pub struct TransferReport {
    pub product_term: ExperimentTerm,
    pub product_value: UnitIntervalSet,
    pub target: UnitIntervalSet,
    pub product_holds: bool,
    /// Containment verdict for each factor in turn.
    pub factors: Vec<(ExperimentTerm, bool)>,
}

impl TransferReport {
    pub fn factors_hold(&self) -> bool {
        self.factors.iter().all(|(_, ok)| *ok)
    }

    /// True when the two sides of the law agree, as they always should.
    pub fn agrees(&self) -> bool {
        self.product_holds == self.factors_hold()
    }
}

impl fmt::Display for TransferReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "target set: {}", self.target)?;
        writeln!(
            f,
            "product {} has value {}: {}",
            self.product_term,
            self.product_value,
            if self.product_holds { "inside" } else { "outside" }
        )?;
        for (t, ok) in &self.factors {
            writeln!(f, "factor {}: {}", t, if *ok { "inside" } else { "outside" })?;
        }
        write!(f, "sides agree: {}", if self.agrees() { "yes" } else { "no" })
    }
}

/// A state-experiment-probability system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SepSystem {
    states: Vec<StateId>,
    base: Vec<ExperimentSymbol>,
    table: SubsetProbabilityTable,
}

impl SepSystem {
    /// Assemble a system, checking identifiers rather than the table content:
    /// states must be nonempty and unique, the base unique and containing
    /// `tau`, and every table row must name a declared experiment and state.
    /// Table completeness is a semantic question left to [`Self::validate`].
    pub fn new(
        states: Vec<StateId>,
        base: Vec<ExperimentSymbol>,
        table: SubsetProbabilityTable,
    ) -> Result<Self, Error> {
        if states.is_empty() {
            return Err(Error::NoStates);
        }
        let mut seen_states = BTreeMap::new();
        for s in &states {
            if seen_states.insert(s.clone(), ()).is_some() {
                return Err(Error::DuplicateState { id: s.to_string() });
            }
        }
        let mut seen_base = BTreeMap::new();
        for b in &base {
            if seen_base.insert(b.clone(), ()).is_some() {
                return Err(Error::DuplicateExperiment { id: b.to_string() });
            }
        }
        if !base.iter().any(ExperimentSymbol::is_unit) {
            return Err(Error::MissingUnitSymbol);
        }
        for (e, s, _) in table.entries() {
            if !seen_base.contains_key(e) {
                return Err(Error::UnknownExperiment { id: e.to_string() });
            }
            if !seen_states.contains_key(s) {
                return Err(Error::UnknownState { id: s.to_string() });
            }
        }
        Ok(SepSystem { states, base, table })
    }

    /// Build a small system from string literals; meant for tests, examples,
    /// and documentation. Rows are `(experiment, state, value)` with the
    /// value in set syntax.
    pub fn from_rows(
        states: &[&str],
        base: &[&str],
        rows: &[(&str, &str, &str)],
    ) -> Result<Self, Error> {
        let states: Vec<StateId> =
            states.iter().map(|s| StateId::new(*s)).collect::<Result<_, _>>()?;
        let base: Vec<ExperimentSymbol> =
            base.iter().map(|b| ExperimentSymbol::new(*b)).collect::<Result<_, _>>()?;
        let mut table = SubsetProbabilityTable::new();
        for (e, s, v) in rows {
            table.insert(
                ExperimentSymbol::new(*e)?,
                StateId::new(*s)?,
                UnitIntervalSet::parse(v)?,
            );
        }
        SepSystem::new(states, base, table)
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn base(&self) -> &[ExperimentSymbol] {
        &self.base
    }

    pub fn table(&self) -> &SubsetProbabilityTable {
        &self.table
    }

    pub fn state_ref(&self, id: &str) -> Option<&StateId> {
        self.states.iter().find(|s| s.as_str() == id)
    }

    pub fn has_state(&self, state: &StateId) -> bool {
        self.states.contains(state)
    }

    pub fn has_experiment(&self, experiment: &ExperimentSymbol) -> bool {
        self.base.contains(experiment)
    }

    /// Value of a base experiment in a state. `tau` defaults to `{1}` when it
    /// has no explicit row; other missing rows are an error.
    pub fn base_probability(
        &self,
        experiment: &ExperimentSymbol,
        state: &StateId,
    ) -> Result<UnitIntervalSet, Error> {
        if !self.has_experiment(experiment) {
            return Err(Error::UnknownExperiment { id: experiment.to_string() });
        }
        if !self.has_state(state) {
            return Err(Error::UnknownState { id: state.to_string() });
        }
        match self.table.get(experiment, state) {
            Some(v) => Ok(v.clone()),
            None if experiment.is_unit() => Ok(UnitIntervalSet::one()),
            None => Err(Error::MissingTableEntry {
                experiment: experiment.to_string(),
                state: state.to_string(),
            }),
        }
    }

    /// Value of an arbitrary term: inverses reflect, products take unions.
    /// The term need not be canonical; evaluation is structural and gives the
    /// same value as evaluating the canonical form.
    pub fn probability(
        &self,
        term: &ExperimentTerm,
        state: &StateId,
    ) -> Result<UnitIntervalSet, Error> {
        match term {
            ExperimentTerm::Base(sym) => self.base_probability(sym, state),
            ExperimentTerm::Tilde(inner) => {
                Ok(self.probability(inner, state)?.one_minus())
            }
            ExperimentTerm::Product(factors) => {
                if factors.is_empty() {
                    return Err(Error::EmptyProduct);
                }
                let values: Vec<UnitIntervalSet> = factors
                    .iter()
                    .map(|f| self.probability(f, state))
                    .collect::<Result<_, _>>()?;
                Ok(UnitIntervalSet::union_all(&values))
            }
        }
    }

    /// An experiment is certain when only the frequency 1 can occur.
    pub fn is_certain(
        &self,
        term: &ExperimentTerm,
        state: &StateId,
    ) -> Result<bool, Error> {
        Ok(self.probability(term, state)?.is_subset(&UnitIntervalSet::one()))
    }

    /// An experiment is performable when some frequency can occur at all.
    pub fn is_performable(
        &self,
        term: &ExperimentTerm,
        state: &StateId,
    ) -> Result<bool, Error> {
        Ok(!self.probability(term, state)?.is_empty())
    }

    /// Certainty up to `epsilon`: the value lies inside `[1 - epsilon, 1]`.
    /// With `epsilon = 0` this is exactly [`Self::is_certain`].
    pub fn is_close_to_certain(
        &self,
        term: &ExperimentTerm,
        state: &StateId,
        epsilon: &Rational,
    ) -> Result<bool, Error> {
        if !in_unit_interval(epsilon) {
            return Err(Error::OutOfUnitInterval {
                what: "epsilon",
                value: epsilon.clone(),
            });
        }
        let band = UnitIntervalSet::interval(one() - epsilon, one())?;
        Ok(self.probability(term, state)?.is_subset(&band))
    }

    /// Check the containment transfer law for the product of `factors`
    /// against the target set `a`: the product value lies in `a` exactly when
    /// every factor value does. The report carries both sides.
    pub fn transfer_check(
        &self,
        factors: &[ExperimentTerm],
        state: &StateId,
        a: &UnitIntervalSet,
    ) -> Result<TransferReport, Error> {
        let product_term = ExperimentTerm::product(factors.iter().cloned())?;
        let product_value = self.probability(&product_term, state)?;
        let product_holds = product_value.is_subset(a);
        let mut per_factor = Vec::with_capacity(factors.len());
        for f in factors {
            let ok = self.probability(f, state)?.is_subset(a);
            per_factor.push((f.clone(), ok));
        }
        Ok(TransferReport {
            product_term,
            product_value,
            target: a.clone(),
            product_holds,
            factors: per_factor,
        })
    }

    /// All semantic defects of the table: missing rows, and unit rows whose
    /// value is not `{1}`. An empty report means the system is a valid model.
    pub fn validate(&self) -> Vec<SepViolation> {
        let mut out = Vec::new();
        for e in &self.base {
            for s in &self.states {
                match self.table.get(e, s) {
                    Some(v) if e.is_unit() && *v != UnitIntervalSet::one() => {
                        out.push(SepViolation::UnitNotCertain {
                            state: s.clone(),
                            found: v.clone(),
                        });
                    }
                    Some(_) => {}
                    None if e.is_unit() => {}
                    None => out.push(SepViolation::MissingEntry {
                        experiment: e.clone(),
                        state: s.clone(),
                    }),
                }
            }
        }
        out
    }

    /// Shorthand used by the derivation functions, which require valid input.
    pub(crate) fn require_valid(&self) -> Result<(), Error> {
        let violations = self.validate();
        if violations.is_empty() {
            return Ok(());
        }
        let mut summary = violations
            .iter()
            .take(3)
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        if violations.len() > 3 {
            summary.push_str(&format!("; and {} more", violations.len() - 3));
        }
        Err(Error::InvalidSystem { summary })
    }

    pub fn parse_str(text: &str) -> Result<Self, Error> {
        let mut states: Option<Vec<StateId>> = None;
        let mut base: Option<Vec<ExperimentSymbol>> = None;
        let mut table = SubsetProbabilityTable::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end();
            let trimmed = line.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut cur = Cursor::new(line);
            cur.skip_ws();
            let col = cur.col();
            let keyword = cur.ident().map_err(|e| e.at_line(line_no))?;
            match keyword.as_str() {
                "states" => {
                    cur.expect(b':').map_err(|e| e.at_line(line_no))?;
                    if states.is_some() {
                        return Err(Error::Parse {
                            line: line_no,
                            col,
                            msg: "second `states:` line".to_string(),
                        });
                    }
                    states = Some(
                        Self::parse_id_list(&mut cur, StateId::new)
                            .map_err(|e| e.at_line(line_no))?,
                    );
                }
                "experiments" => {
                    cur.expect(b':').map_err(|e| e.at_line(line_no))?;
                    if base.is_some() {
                        return Err(Error::Parse {
                            line: line_no,
                            col,
                            msg: "second `experiments:` line".to_string(),
                        });
                    }
                    base = Some(
                        Self::parse_id_list(&mut cur, ExperimentSymbol::new)
                            .map_err(|e| e.at_line(line_no))?,
                    );
                }
                "mu" => {
                    let (states, base) = match (&states, &base) {
                        (Some(s), Some(b)) => (s, b),
                        _ => {
                            return Err(Error::Parse {
                                line: line_no,
                                col,
                                msg: "`mu` line before `states:` and `experiments:`"
                                    .to_string(),
                            })
                        }
                    };
                    cur.skip_ws();
                    let e_col = cur.col();
                    let e_name = cur.ident().map_err(|e| e.at_line(line_no))?;
                    let experiment = base
                        .iter()
                        .find(|b| b.as_str() == e_name)
                        .cloned()
                        .ok_or_else(|| Error::Parse {
                            line: line_no,
                            col: e_col,
                            msg: format!("undeclared experiment {e_name:?}"),
                        })?;
                    cur.skip_ws();
                    let s_col = cur.col();
                    let s_name = cur.ident().map_err(|e| e.at_line(line_no))?;
                    let state = states
                        .iter()
                        .find(|s| s.as_str() == s_name)
                        .cloned()
                        .ok_or_else(|| Error::Parse {
                            line: line_no,
                            col: s_col,
                            msg: format!("undeclared state {s_name:?}"),
                        })?;
                    cur.skip_ws();
                    cur.expect(b'=').map_err(|e| e.at_line(line_no))?;
                    let value = UnitIntervalSet::parse_from(&mut cur)
                        .map_err(|e| e.at_line(line_no))?;
                    // A `tau = {1}` row just restates the default.
                    if experiment.is_unit() && value == UnitIntervalSet::one() {
                        continue;
                    }
                    if table.insert(experiment, state, value).is_some() {
                        return Err(Error::Parse {
                            line: line_no,
                            col: e_col,
                            msg: format!("duplicate entry for `{e_name}` in `{s_name}`"),
                        });
                    }
                }
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        col,
                        msg: format!(
                            "expected `states:`, `experiments:`, or `mu`, found {other:?}"
                        ),
                    });
                }
            }
        }
        let states = states.ok_or_else(|| Error::Parse {
            line: 1,
            col: 1,
            msg: "missing `states:` line".to_string(),
        })?;
        let base = base.ok_or_else(|| Error::Parse {
            line: 1,
            col: 1,
            msg: "missing `experiments:` line".to_string(),
        })?;
        SepSystem::new(states, base, table)
    }

    fn parse_id_list<T>(
        cur: &mut Cursor,
        make: impl Fn(String) -> Result<T, Error>,
    ) -> Result<Vec<T>, Error> {
        let mut out = Vec::new();
        loop {
            cur.skip_ws();
            out.push(make(cur.ident()?)?);
            cur.skip_ws();
            if !cur.eat(b',') {
                break;
            }
        }
        cur.finish()?;
        Ok(out)
    }

    /// Render in the text format; parsing the result reproduces the system.
    pub fn to_text(&self) -> String {
        use fmt::Write;
        let mut out = String::new();
        let states: Vec<&str> = self.states.iter().map(StateId::as_str).collect();
        let base: Vec<&str> = self.base.iter().map(ExperimentSymbol::as_str).collect();
        writeln!(out, "states: {}", states.join(", ")).unwrap();
        writeln!(out, "experiments: {}", base.join(", ")).unwrap();
        for e in &self.base {
            for s in &self.states {
                if let Some(v) = self.table.get(e, s) {
                    writeln!(out, "mu {e} {s} = {v}").unwrap();
                }
            }
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), Error> {
        Ok(std::fs::write(path, self.to_text())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

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

    fn state(sys: &SepSystem, id: &str) -> StateId {
        sys.state_ref(id).unwrap().clone()
    }

    #[test]
    fn unit_rows_are_implied() {
        let sys = wood();
        let p = state(&sys, "wet_light");
        assert_eq!(sys.probability(&term("tau"), &p).unwrap(), UnitIntervalSet::one());
        assert_eq!(sys.probability(&term("~tau"), &p).unwrap(), UnitIntervalSet::zero());
    }

    #[test]
    fn product_value_is_the_union_of_factor_values() {
        let sys = wood();
        let p = state(&sys, "wet_light");
        let v = sys.probability(&term("prod(burn, float)"), &p).unwrap();
        assert_eq!(v, UnitIntervalSet::parse("[0, 1/10] u {1}").unwrap());
    }

    #[test]
    fn product_of_certain_factors_is_certain() {
        let sys = wood();
        let p = state(&sys, "dry_light");
        assert!(sys.is_certain(&term("prod(burn, float)"), &p).unwrap());
    }

    #[test]
    fn inverse_reflects_the_value() {
        let sys = SepSystem::from_rows(
            &["p"],
            &["tau", "a", "b"],
            &[("a", "p", "{0.3}"), ("b", "p", "[0.6, 0.7]")],
        )
        .unwrap();
        let p = state(&sys, "p");
        assert_eq!(
            sys.probability(&term("~b"), &p).unwrap(),
            UnitIntervalSet::parse("[0.3, 0.4]").unwrap()
        );
        // {3/10} merges into the reflected interval.
        assert_eq!(
            sys.probability(&term("prod(a, ~b)"), &p).unwrap(),
            UnitIntervalSet::parse("[0.3, 0.4]").unwrap()
        );
    }

    #[test]
    fn empty_value_marks_unperformable_experiments() {
        let sys = SepSystem::from_rows(
            &["p"],
            &["tau", "a", "b"],
            &[("a", "p", "empty"), ("b", "p", "{1/2}")],
        )
        .unwrap();
        let p = state(&sys, "p");
        assert!(!sys.is_performable(&term("a"), &p).unwrap());
        assert!(!sys.is_performable(&term("~a"), &p).unwrap());
        // A product can be performed when some factor can.
        assert_eq!(
            sys.probability(&term("prod(a, b)"), &p).unwrap(),
            UnitIntervalSet::parse("{1/2}").unwrap()
        );
        assert!(sys.is_performable(&term("prod(a, b)"), &p).unwrap());
    }

    #[test]
    fn certainty_requires_exactly_one() {
        let sys = SepSystem::from_rows(
            &["p"],
            &["tau", "a", "b", "c"],
            &[("a", "p", "{1}"), ("b", "p", "[0.999, 1]"), ("c", "p", "{0}")],
        )
        .unwrap();
        let p = state(&sys, "p");
        assert!(sys.is_certain(&term("a"), &p).unwrap());
        assert!(!sys.is_certain(&term("b"), &p).unwrap());
        assert!(sys.is_certain(&term("~c"), &p).unwrap());
    }

    #[test]
    fn near_certainty_widens_the_band() {
        let sys = SepSystem::from_rows(
            &["p"],
            &["tau", "a"],
            &[("a", "p", "[0.95, 1]")],
        )
        .unwrap();
        let p = state(&sys, "p");
        let a = term("a");
        assert!(sys.is_close_to_certain(&a, &p, &ratio(1, 10)).unwrap());
        assert!(!sys.is_close_to_certain(&a, &p, &ratio(1, 100)).unwrap());
        assert!(!sys.is_close_to_certain(&a, &p, &ratio(0, 1)).unwrap());
        assert!(sys.is_close_to_certain(&a, &p, &ratio(1, 1)).unwrap());
        assert!(sys.is_close_to_certain(&a, &p, &ratio(1, 20)).unwrap());
        assert!(matches!(
            sys.is_close_to_certain(&a, &p, &ratio(3, 2)),
            Err(Error::OutOfUnitInterval { .. })
        ));
    }

    #[test]
    fn transfer_law_agrees_on_both_sides() {
        let sys = SepSystem::from_rows(
            &["p"],
            &["tau", "a", "b"],
            &[("a", "p", "{0.6}"), ("b", "p", "[0.7, 0.8]")],
        )
        .unwrap();
        let p = state(&sys, "p");
        let half_up = UnitIntervalSet::parse("[1/2, 1]").unwrap();
        let report = sys.transfer_check(&[term("a"), term("b")], &p, &half_up).unwrap();
        assert!(report.product_holds);
        assert!(report.factors_hold());
        assert!(report.agrees());

        let sys2 = SepSystem::from_rows(
            &["p"],
            &["tau", "a", "b"],
            &[("a", "p", "{0.95}"), ("b", "p", "{0.85}")],
        )
        .unwrap();
        let p2 = state(&sys2, "p");
        let band = UnitIntervalSet::parse("[0.9, 1]").unwrap();
        let report2 = sys2.transfer_check(&[term("a"), term("b")], &p2, &band).unwrap();
        assert!(!report2.product_holds);
        assert!(!report2.factors_hold());
        assert_eq!(report2.factors.iter().filter(|(_, ok)| *ok).count(), 1);
        assert!(report2.agrees());
    }

    #[test]
    fn validation_finds_holes_and_unit_defects() {
        let sys = wood();
        assert!(sys.validate().is_empty());

        let holey = SepSystem::from_rows(
            &["p", "q"],
            &["tau", "a"],
            &[("a", "p", "{1}")],
        )
        .unwrap();
        let violations = holey.validate();
        assert_eq!(violations.len(), 1);
        assert!(matches!(&violations[0], SepViolation::MissingEntry { state, .. }
            if state.as_str() == "q"));

        let bad_unit = SepSystem::from_rows(
            &["p"],
            &["tau", "a"],
            &[("tau", "p", "{1/2}"), ("a", "p", "{1}")],
        )
        .unwrap();
        let violations = bad_unit.validate();
        assert_eq!(violations.len(), 1);
        assert!(matches!(&violations[0], SepViolation::UnitNotCertain { .. }));
    }

    #[test]
    fn construction_rejects_structural_defects() {
        assert!(matches!(
            SepSystem::from_rows(&[], &["tau"], &[]),
            Err(Error::NoStates)
        ));
        assert!(matches!(
            SepSystem::from_rows(&["p", "p"], &["tau"], &[]),
            Err(Error::DuplicateState { .. })
        ));
        assert!(matches!(
            SepSystem::from_rows(&["p"], &["tau", "a", "a"], &[]),
            Err(Error::DuplicateExperiment { .. })
        ));
        assert!(matches!(
            SepSystem::from_rows(&["p"], &["a"], &[]),
            Err(Error::MissingUnitSymbol)
        ));
        assert!(matches!(
            SepSystem::from_rows(&["p"], &["tau"], &[("x", "p", "{1}")]),
            Err(Error::UnknownExperiment { .. })
        ));
        assert!(matches!(
            SepSystem::from_rows(&["p"], &["tau", "a"], &[("a", "q", "{1}")]),
            Err(Error::UnknownState { .. })
        ));
    }

    #[test]
    fn probability_checks_its_arguments() {
        let sys = wood();
        let p = state(&sys, "dry_light");
        assert!(matches!(
            sys.probability(&term("nope"), &p),
            Err(Error::UnknownExperiment { .. })
        ));
        let foreign = StateId::new("soaked").unwrap();
        assert!(matches!(
            sys.probability(&term("burn"), &foreign),
            Err(Error::UnknownState { .. })
        ));
        let raw_empty = ExperimentTerm::Product(Default::default());
        assert!(matches!(sys.probability(&raw_empty, &p), Err(Error::EmptyProduct)));
    }

    #[test]
    fn text_format_round_trips() {
        let sys = wood();
        let text = sys.to_text();
        let reparsed = SepSystem::parse_str(&text).unwrap();
        assert_eq!(reparsed, sys);
        assert_eq!(reparsed.to_text(), text);
    }

    #[test]
    fn parser_accepts_comments_and_implied_unit_rows() {
        let text = "\
# a comment
states: p, q

experiments: tau, a
mu tau p = {1}
mu a p = {1/4} u [3/5, 7/10]
mu a q = empty
";
        let sys = SepSystem::parse_str(text).unwrap();
        assert_eq!(sys.states().len(), 2);
        // The explicit tau row restates the default and is not stored.
        assert_eq!(sys.table().entries().count(), 2);
        assert!(sys.validate().is_empty());
    }

    #[test]
    fn parser_reports_line_and_column() {
        let text = "states: p\nexperiments: tau, a\nmu a p = [0.5, 0.2]\n";
        match SepSystem::parse_str(text) {
            Err(Error::Parse { line, col, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(col, 10);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parser_rejects_bad_structure() {
        let cases = [
            "experiments: tau\nmu tau p = {1}\n",
            "states: p\nmu a p = {1}\n",
            "states: p\nexperiments: tau, a\nmu b p = {1}\n",
            "states: p\nexperiments: tau, a\nmu a q = {1}\n",
            "states: p\nexperiments: tau, a\nmu a p = {1}\nmu a p = {0}\n",
            "states: p\nstates: q\nexperiments: tau\n",
            "bogus: p\n",
            "states: p\nexperiments: tau\nmu tau p = {1} extra\n",
        ];
        for text in cases {
            assert!(
                matches!(SepSystem::parse_str(text), Err(Error::Parse { .. })),
                "expected parse error for {text:?}"
            );
        }
    }

    #[test]
    fn loading_requires_headers_before_rows() {
        let text = "mu a p = {1}\nstates: p\nexperiments: tau, a\n";
        assert!(matches!(SepSystem::parse_str(text), Err(Error::Parse { line: 1, .. })));
    }

    fn arb_wood_term() -> impl Strategy<Value = ExperimentTerm> {
        let leaf = prop_oneof![
            Just(term("tau")),
            Just(term("burn")),
            Just(term("float")),
        ];
        leaf.prop_recursive(3, 24, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|t| ExperimentTerm::Tilde(Box::new(t))),
                prop::collection::btree_set(inner, 1..=3).prop_map(ExperimentTerm::Product),
            ]
        })
    }

    proptest! {
        #[test]
        fn inverse_value_is_the_reflection(t in arb_wood_term()) {
            let sys = wood();
            for p in sys.states() {
                let direct = sys.probability(&t.inverse(), p).unwrap();
                let reflected = sys.probability(&t, p).unwrap().one_minus();
                prop_assert_eq!(direct, reflected);
            }
        }

        #[test]
        fn evaluation_is_invariant_under_canonicalization(t in arb_wood_term()) {
            let sys = wood();
            let c = t.canonicalize().unwrap();
            for p in sys.states() {
                prop_assert_eq!(
                    sys.probability(&t, p).unwrap(),
                    sys.probability(&c, p).unwrap()
                );
            }
        }

        #[test]
        fn product_value_is_the_union(
            ts in prop::collection::vec(arb_wood_term(), 1..=4)
        ) {
            let sys = wood();
            let product = ExperimentTerm::product(ts.clone()).unwrap();
            for p in sys.states() {
                let values: Vec<_> = ts
                    .iter()
                    .map(|t| sys.probability(t, p).unwrap())
                    .collect();
                prop_assert_eq!(
                    sys.probability(&product, p).unwrap(),
                    UnitIntervalSet::union_all(&values)
                );
            }
        }
    }
}
