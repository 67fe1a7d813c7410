//! Structure-preserving maps between systems and between their derived
//! property systems.
//!
//! A morphism from a source system to a destination system is a pair of
//! maps running in opposite directions: states travel forward (each source
//! state is realized as a destination state) while experiments travel
//! backward (each destination base experiment is implemented by a term over
//! the source base). The pair is lawful when probability is preserved:
//! asking a destination experiment in the image of a source state must give
//! the same value as asking its implementation in the source state itself.
//! Checking that law on base experiments is enough, because both evaluation
//! and pull-back commute with product and inverse.
//!
//! A lawful morphism acts on the derived property systems: a destination
//! property (a class of terms) pulls back to the class of the pull-back of
//! any member, and lawfulness makes the choice of member irrelevant.
//! [`derive_sp_morphism`] computes that action, [`validate_sp_morphism`]
//! checks the lattice-level laws directly, and [`SepMorphism::after`] and
//! [`SpMorphism::after`] compose in a way that commutes with derivation.
//!
//! The text format for morphism files is line-oriented:
//!
//! ```text
//! # source states map forward, destination experiments map backward
//! state p1 -> dry_light
//! exp burn -> prod(strike, catch)
//! ```
//!
//! A missing `exp tau -> ...` line defaults to the unit experiment mapping
//! to the unit experiment.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::Error;
use crate::interval::UnitIntervalSet;
use crate::property::{ElementId, StatePropertySystem};
use crate::scan::Cursor;
use crate::sep::{SepSystem, StateId};
use crate::term::{ExperimentSymbol, ExperimentTerm};

/// A candidate morphism between two systems: source states forward,
/// destination base experiments backward. Lawfulness is a separate check,
/// [`validate_sep_morphism`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SepMorphism {
    state_map: BTreeMap<StateId, StateId>,
    experiment_map: BTreeMap<ExperimentSymbol, ExperimentTerm>,
}

impl SepMorphism {
    /// The empty morphism; populate it with [`SepMorphism::map_state`] and
    /// [`SepMorphism::map_experiment`].
    pub fn new() -> Self {
        Self::default()
    }

    /// The identity morphism of a system.
    pub fn identity(sys: &SepSystem) -> Self {
        let state_map = sys.states().iter().map(|p| (p.clone(), p.clone())).collect();
        let experiment_map = sys
            .base()
            .iter()
            .filter(|s| !s.is_unit())
            .map(|s| (s.clone(), ExperimentTerm::Base(s.clone())))
            .collect();
        SepMorphism { state_map, experiment_map }
    }

    /// Send source state `from` to destination state `to`.
    pub fn map_state(&mut self, from: StateId, to: StateId) -> &mut Self {
        self.state_map.insert(from, to);
        self
    }

    /// Implement destination experiment `symbol` by source term `image`.
    /// Mapping the unit to the unit restates the default and keeps no entry,
    /// so composites and round-trips compare equal whether or not it was
    /// spelled out.
    pub fn map_experiment(&mut self, symbol: ExperimentSymbol, image: ExperimentTerm) -> &mut Self {
        if symbol.is_unit() && image == ExperimentTerm::unit() {
            self.experiment_map.remove(&symbol);
        } else {
            self.experiment_map.insert(symbol, image);
        }
        self
    }

    pub fn state_image(&self, state: &StateId) -> Option<&StateId> {
        self.state_map.get(state)
    }

    /// Image of a destination base symbol; the unit maps to the unit unless
    /// explicitly overridden.
    pub fn experiment_image(&self, symbol: &ExperimentSymbol) -> Option<ExperimentTerm> {
        match self.experiment_map.get(symbol) {
            Some(t) => Some(t.clone()),
            None if symbol.is_unit() => Some(ExperimentTerm::unit()),
            None => None,
        }
    }

    pub fn state_entries(&self) -> impl Iterator<Item = (&StateId, &StateId)> {
        self.state_map.iter()
    }

    pub fn experiment_entries(&self) -> impl Iterator<Item = (&ExperimentSymbol, &ExperimentTerm)> {
        self.experiment_map.iter()
    }

    /// Pull a destination term back to a source term: base symbols are
    /// replaced by their implementations, inverse and product pass through.
    /// The result is canonical.
    pub fn pull_back(&self, term: &ExperimentTerm) -> Result<ExperimentTerm, Error> {
        match term {
            ExperimentTerm::Base(s) => self.experiment_image(s).ok_or_else(|| {
                Error::MissingExperimentMapping { id: s.to_string() }
            }),
            ExperimentTerm::Tilde(inner) => {
                Ok(self.pull_back(inner)?.canonicalize()?.inverse())
            }
            ExperimentTerm::Product(factors) => {
                let images = factors
                    .iter()
                    .map(|f| self.pull_back(f))
                    .collect::<Result<Vec<_>, _>>()?;
                ExperimentTerm::product(images)
            }
        }
    }

    /// Composite morphism: `self` runs after `earlier`, so states go through
    /// `earlier` first and experiment implementations are pulled back
    /// through `earlier` last.
    pub fn after(&self, earlier: &SepMorphism) -> Result<SepMorphism, Error> {
        let mut state_map = BTreeMap::new();
        for (p, mid) in &earlier.state_map {
            let q = self
                .state_image(mid)
                .ok_or_else(|| Error::MissingStateMapping { id: mid.to_string() })?;
            state_map.insert(p.clone(), q.clone());
        }
        let mut composite = SepMorphism { state_map, experiment_map: BTreeMap::new() };
        for (sym, image) in &self.experiment_map {
            composite.map_experiment(sym.clone(), earlier.pull_back(image)?);
        }
        Ok(composite)
    }

    /// Parse the line-oriented morphism format; see the module docs.
    pub fn parse_str(text: &str) -> Result<Self, Error> {
        let mut out = SepMorphism::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            Self::parse_line(line, &mut out).map_err(|e| e.at_line(line_no))?;
        }
        Ok(out)
    }

    fn parse_line(line: &str, out: &mut SepMorphism) -> Result<(), Error> {
        let mut cur = Cursor::new(line);
        cur.skip_ws();
        let keyword = cur.ident()?;
        cur.skip_ws();
        match keyword.as_str() {
            "state" => {
                let from = StateId::new(cur.ident()?)?;
                Self::parse_arrow(&mut cur)?;
                let to = StateId::new(cur.ident()?)?;
                cur.finish()?;
                if out.state_map.contains_key(&from) {
                    return Err(cur.err(format!("duplicate state mapping for `{from}`")));
                }
                out.map_state(from, to);
            }
            "exp" => {
                let col = cur.col();
                let name = cur.ident()?;
                let symbol = ExperimentSymbol::new(&name).map_err(|_| Error::Parse {
                    line: 0,
                    col,
                    msg: format!("`{name}` is not a valid experiment name"),
                })?;
                Self::parse_arrow(&mut cur)?;
                let image = ExperimentTerm::parse_term(&mut cur)?;
                cur.finish()?;
                if out.experiment_map.contains_key(&symbol) {
                    return Err(cur.err(format!("duplicate experiment mapping for `{symbol}`")));
                }
                out.map_experiment(symbol, image);
            }
            other => {
                return Err(cur.err(format!(
                    "expected `state` or `exp`, found `{other}`"
                )));
            }
        }
        Ok(())
    }

    fn parse_arrow(cur: &mut Cursor) -> Result<(), Error> {
        cur.skip_ws();
        cur.expect(b'-')?;
        cur.expect(b'>')?;
        cur.skip_ws();
        Ok(())
    }

    /// Render in the same format [`SepMorphism::parse_str`] reads; the two
    /// round-trip.
    pub fn to_text(&self) -> String {
        use fmt::Write;
        let mut out = String::new();
        for (from, to) in &self.state_map {
            writeln!(out, "state {from} -> {to}").unwrap();
        }
        for (sym, image) in &self.experiment_map {
            writeln!(out, "exp {sym} -> {image}").unwrap();
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        Self::parse_str(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), Error> {
        Ok(fs::write(path, self.to_text())?)
    }
}

/// A way a candidate morphism fails to be lawful between two given systems.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MorphismViolation {
    /// A source state has no image.
    MissingStateMapping { state: StateId },
    /// A source state maps to something the destination does not have.
    UnknownStateImage { state: StateId, image: StateId },
    /// A destination base experiment has no implementation.
    MissingExperimentMapping { experiment: ExperimentSymbol },
    /// An implementation cannot be brought to canonical form.
    MalformedExperimentImage { experiment: ExperimentSymbol, detail: String },
    /// An implementation mentions a symbol outside the source base.
    ForeignSymbolInImage { experiment: ExperimentSymbol, symbol: ExperimentSymbol },
    /// Probability is not preserved at this experiment and state.
    Covariance {
        experiment: ExperimentSymbol,
        state: StateId,
        expected: UnitIntervalSet,
        found: UnitIntervalSet,
    },
}

impl fmt::Display for MorphismViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorphismViolation::MissingStateMapping { state } => {
                write!(f, "source state `{state}` has no image")
            }
            MorphismViolation::UnknownStateImage { state, image } => write!(
                f,
                "source state `{state}` maps to `{image}`, which the destination lacks"
            ),
            MorphismViolation::MissingExperimentMapping { experiment } => {
                write!(f, "destination experiment `{experiment}` has no implementation")
            }
            MorphismViolation::MalformedExperimentImage { experiment, detail } => write!(
                f,
                "implementation of `{experiment}` is malformed: {detail}"
            ),
            MorphismViolation::ForeignSymbolInImage { experiment, symbol } => write!(
                f,
                "implementation of `{experiment}` uses `{symbol}`, which the source lacks"
            ),
            MorphismViolation::Covariance { experiment, state, expected, found } => write!(
                f,
                "value of `{experiment}` in the image of `{state}` is {expected}, \
                 but its implementation gives {found}"
            ),
        }
    }
}

/// Check a candidate morphism between two valid systems. An empty report
/// means the morphism is lawful. Probability preservation is checked on
/// base experiments only; it extends to all terms because evaluation and
/// pull-back both commute with product and inverse.
///
/// Entries for states or symbols outside the two systems are ignored.
pub fn validate_sep_morphism(
    src: &SepSystem,
    dst: &SepSystem,
    phi: &SepMorphism,
) -> Result<Vec<MorphismViolation>, Error> {
    src.require_valid()?;
    dst.require_valid()?;
    let mut out = Vec::new();

    let mut mapped_states: Vec<(&StateId, &StateId)> = Vec::new();
    for p in src.states() {
        match phi.state_image(p) {
            None => out.push(MorphismViolation::MissingStateMapping { state: p.clone() }),
            Some(q) if !dst.has_state(q) => out.push(MorphismViolation::UnknownStateImage {
                state: p.clone(),
                image: q.clone(),
            }),
            Some(q) => mapped_states.push((p, q)),
        }
    }

    for sym in dst.base() {
        let image = match phi.experiment_image(sym) {
            None => {
                out.push(MorphismViolation::MissingExperimentMapping {
                    experiment: sym.clone(),
                });
                continue;
            }
            Some(t) => t,
        };
        let image = match image.canonicalize() {
            Ok(t) => t,
            Err(e) => {
                out.push(MorphismViolation::MalformedExperimentImage {
                    experiment: sym.clone(),
                    detail: e.to_string(),
                });
                continue;
            }
        };
        let foreign: Vec<&ExperimentSymbol> = image
            .symbols()
            .into_iter()
            .filter(|s| !src.has_experiment(s))
            .collect();
        if !foreign.is_empty() {
            for s in foreign {
                out.push(MorphismViolation::ForeignSymbolInImage {
                    experiment: sym.clone(),
                    symbol: s.clone(),
                });
            }
            continue;
        }
        for (p, q) in &mapped_states {
            let expected = dst.base_probability(sym, q)?;
            let found = src.probability(&image, p)?;
            if expected != found {
                out.push(MorphismViolation::Covariance {
                    experiment: sym.clone(),
                    state: (*p).clone(),
                    expected,
                    found,
                });
            }
        }
    }
    Ok(out)
}

/// The action of a lawful morphism on derived property systems: states
/// still travel forward, and each destination property pulls back to a
/// source property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpMorphism {
    state_map: BTreeMap<StateId, StateId>,
    /// Indexed by destination element id, yielding a source element id.
    class_map: Vec<ElementId>,
}

impl SpMorphism {
    pub fn from_parts(state_map: BTreeMap<StateId, StateId>, class_map: Vec<ElementId>) -> Self {
        SpMorphism { state_map, class_map }
    }

    pub fn state_image(&self, state: &StateId) -> Option<&StateId> {
        self.state_map.get(state)
    }

    /// Source class implementing a destination class.
    pub fn class_image(&self, dst_class: ElementId) -> Option<ElementId> {
        self.class_map.get(dst_class).copied()
    }

    pub fn class_map(&self) -> &[ElementId] {
        &self.class_map
    }

    /// Composite action: `self` runs after `earlier`. Properties compose the
    /// other way round: a far-destination class pulls back through `self`
    /// first, then through `earlier`.
    pub fn after(&self, earlier: &SpMorphism) -> Result<SpMorphism, Error> {
        let mut state_map = BTreeMap::new();
        for (p, mid) in &earlier.state_map {
            let q = self
                .state_image(mid)
                .ok_or_else(|| Error::MissingStateMapping { id: mid.to_string() })?;
            state_map.insert(p.clone(), q.clone());
        }
        let class_map = self
            .class_map
            .iter()
            .map(|&mid| {
                earlier.class_image(mid).ok_or(Error::LengthMismatch {
                    expected: mid + 1,
                    found: earlier.class_map.len(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SpMorphism { state_map, class_map })
    }
}

/// Derive the property-level action of a morphism from the two derived
/// systems. Every member of every destination class is pulled back, and all
/// members of one class must land in one source class; a disagreement
/// (possible only for unlawful morphisms) is reported as
/// [`Error::IllDefinedClass`].
pub fn derive_sp_morphism(
    phi: &SepMorphism,
    sp_src: &StatePropertySystem,
    sp_dst: &StatePropertySystem,
) -> Result<SpMorphism, Error> {
    let mut state_map = BTreeMap::new();
    for p in sp_src.states() {
        let q = phi
            .state_image(p)
            .ok_or_else(|| Error::MissingStateMapping { id: p.to_string() })?;
        if sp_dst.state_index(q).is_none() {
            return Err(Error::UnknownState { id: q.to_string() });
        }
        state_map.insert(p.clone(), q.clone());
    }

    let dst_lat = sp_dst.lattice();
    let src_lat = sp_src.lattice();
    let literals: Vec<(&ExperimentTerm, ElementId)> =
        dst_lat.literal_classes().iter().map(|(t, &id)| (t, id)).collect();
    if literals.len() > 16 {
        return Err(Error::UniverseTooLarge { experiments: literals.len() / 2 });
    }

    let mut class_map: Vec<Option<ElementId>> = vec![None; dst_lat.len()];
    for mask in 1u32..(1 << literals.len()) {
        let chosen: Vec<ExperimentTerm> = literals
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, (t, _))| (*t).clone())
            .collect();
        let dst_class = dst_lat.meet_all(
            literals
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, (_, id))| *id),
        );
        let member = ExperimentTerm::product(chosen)?;
        let pulled = phi.pull_back(&member)?;
        let src_class = src_lat.class_of_term(&pulled)?;
        match class_map[dst_class] {
            None => class_map[dst_class] = Some(src_class),
            Some(prev) if prev == src_class => {}
            Some(prev) => {
                return Err(Error::IllDefinedClass {
                    class: dst_lat.element(dst_class).representative.to_string(),
                    detail: format!(
                        "member `{member}` pulls back into a different class \
                         ({} instead of {})",
                        src_lat.element(src_class).representative,
                        src_lat.element(prev).representative
                    ),
                });
            }
        }
    }
    let class_map = class_map
        .into_iter()
        .map(|c| c.expect("every class contains a product of literals"))
        .collect();
    Ok(SpMorphism { state_map, class_map })
}

/// A way a candidate property-level morphism fails the structural laws.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpMorphismViolation {
    /// A source state has no image.
    MissingStateMapping { state: StateId },
    /// A source state maps to a state the destination lacks.
    UnknownStateImage { state: StateId, image: StateId },
    /// The class map does not line up with the two lattices.
    ClassMapShape { expected: usize, found: usize },
    /// The destination top does not pull back to the source top.
    TopNotPreserved,
    /// Pull-back fails to commute with meet on this pair.
    MeetNotPreserved { a: ElementId, b: ElementId },
    /// A destination property is actual in an image state, but its pull-back
    /// is not actual in the preimage (or vice versa).
    ActualityMismatch { state: StateId, class: ElementId },
    /// The state map is not monotone for this pair.
    StateOrderNotPreserved { p: StateId, q: StateId },
}

impl fmt::Display for SpMorphismViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpMorphismViolation::MissingStateMapping { state } => {
                write!(f, "source state `{state}` has no image")
            }
            SpMorphismViolation::UnknownStateImage { state, image } => write!(
                f,
                "source state `{state}` maps to `{image}`, which the destination lacks"
            ),
            SpMorphismViolation::ClassMapShape { expected, found } => write!(
                f,
                "class map covers {found} classes, the destination has {expected}"
            ),
            SpMorphismViolation::TopNotPreserved => {
                write!(f, "the destination top does not pull back to the source top")
            }
            SpMorphismViolation::MeetNotPreserved { a, b } => write!(
                f,
                "pull-back of the meet of e{a} and e{b} is not the meet of the pull-backs"
            ),
            SpMorphismViolation::ActualityMismatch { state, class } => write!(
                f,
                "actuality of class e{class} disagrees across the image of `{state}`"
            ),
            SpMorphismViolation::StateOrderNotPreserved { p, q } => write!(
                f,
                "`{p}` <= `{q}` in the source, but their images are not ordered"
            ),
        }
    }
}

/// Check a candidate property-level morphism between two derived systems.
/// An empty report means it satisfies the structural laws; anything
/// produced by [`derive_sp_morphism`] from a lawful morphism does.
pub fn validate_sp_morphism(
    sp_src: &StatePropertySystem,
    sp_dst: &StatePropertySystem,
    n: &SpMorphism,
) -> Vec<SpMorphismViolation> {
    let mut out = Vec::new();
    let src_lat = sp_src.lattice();
    let dst_lat = sp_dst.lattice();

    let mut mapped: Vec<(&StateId, &StateId)> = Vec::new();
    for p in sp_src.states() {
        match n.state_image(p) {
            None => out.push(SpMorphismViolation::MissingStateMapping { state: p.clone() }),
            Some(q) if sp_dst.state_index(q).is_none() => {
                out.push(SpMorphismViolation::UnknownStateImage {
                    state: p.clone(),
                    image: q.clone(),
                })
            }
            Some(q) => mapped.push((p, q)),
        }
    }

    if n.class_map().len() != dst_lat.len()
        || n.class_map().iter().any(|&c| c >= src_lat.len())
    {
        out.push(SpMorphismViolation::ClassMapShape {
            expected: dst_lat.len(),
            found: n.class_map().len(),
        });
        return out;
    }

    if n.class_image(dst_lat.top()) != Some(src_lat.top()) {
        out.push(SpMorphismViolation::TopNotPreserved);
    }
    for a in 0..dst_lat.len() {
        for b in a..dst_lat.len() {
            let direct = n.class_image(dst_lat.meet(a, b)).unwrap();
            let stepwise =
                src_lat.meet(n.class_image(a).unwrap(), n.class_image(b).unwrap());
            if direct != stepwise {
                out.push(SpMorphismViolation::MeetNotPreserved { a, b });
            }
        }
    }

    for (p, q) in &mapped {
        let src_actual = sp_src.actual_properties(p).expect("state comes from sp_src");
        let dst_actual = sp_dst.actual_properties(q).expect("image checked above");
        for b in 0..dst_lat.len() {
            let in_dst = dst_actual.contains(&b);
            let in_src = src_actual.contains(&n.class_image(b).unwrap());
            if in_dst != in_src {
                out.push(SpMorphismViolation::ActualityMismatch {
                    state: (*p).clone(),
                    class: b,
                });
            }
        }
    }

    for (p, pi) in &mapped {
        for (q, qi) in &mapped {
            if sp_src.state_le(p, q) == Some(true)
                && sp_dst.state_le(pi, qi) != Some(true)
            {
                out.push(SpMorphismViolation::StateOrderNotPreserved {
                    p: (*p).clone(),
                    q: (*q).clone(),
                });
            }
        }
    }
    out
}
