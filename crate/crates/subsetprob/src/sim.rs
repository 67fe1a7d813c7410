//! A stochastic process whose long-run behavior realizes a subset value.
//!
//! The operational reading of a value `mu(alpha, p)` is: each time the
//! experiment is set up, hidden context fixes one success probability `x`
//! from the set, and repeated trials under that context produce a relative
//! frequency converging to `x`. The set itself is then the collection of
//! limit points observable across contexts.
//!
//! The simulator makes that reading concrete. A session resolves the
//! context: it walks the term, choosing one factor at each product (the
//! context decides which component experiment actually runs), flipping
//! perspective under each inverse, and finally sampling a success
//! probability from the base value it lands on. The session then runs
//! Bernoulli trials at that probability and reports the relative frequency.
//! [`recover_subset`] runs many sessions and checks the two directions of
//! the realization against the exactly computed value: soundness (every
//! observed frequency is near the set) and coverage (every component of the
//! set is approached, across its whole span for interval components).
//!
//! Sessions are deterministic given a seed: session `i` always draws from
//! stream `i` of a counter-based generator, so reports are reproducible
//! regardless of thread scheduling.

use std::fmt;

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::choice::ChoiceWeights;
use crate::error::Error;
use crate::interval::{ClosedInterval, UnitIntervalSet};
use crate::rational::Rational;
use crate::sep::{SepSystem, StateId};
use crate::term::ExperimentTerm;

fn to_f64(r: &Rational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().expect("unit-interval rationals fit in an f64")
}

/// How a session turns a base value into one success probability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ContextSampler {
    /// Pick a component uniformly, then a point uniformly inside it.
    #[default]
    ComponentUniform,
    /// Pick a component uniformly, then one of its endpoints; contexts sit
    /// at the extremes, which makes spans easy to see with few sessions.
    ComponentEndpoints,
}

impl ContextSampler {
    fn sample(&self, value: &UnitIntervalSet, rng: &mut impl Rng) -> f64 {
        let components = value.components();
        let c = &components[rng.random_range(0..components.len())];
        let lo = to_f64(c.lo());
        let hi = to_f64(c.hi());
        match self {
            ContextSampler::ComponentUniform => {
                if lo == hi {
                    lo
                } else {
                    lo + rng.random::<f64>() * (hi - lo)
                }
            }
            ContextSampler::ComponentEndpoints => {
                if rng.random_bool(0.5) {
                    lo
                } else {
                    hi
                }
            }
        }
    }
}

/// How a session chooses which factor of a product actually runs.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum FactorChoice {
    /// Uniformly among the performable factors.
    #[default]
    Uniform,
    /// By fixed weights over the factors in term order; applies to every
    /// product node whose arity matches the weight count. A positive weight
    /// on an unperformable factor is an error when it is drawn.
    Weighted(ChoiceWeights),
}

/// Everything a simulation needs besides the system and the question.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimulationPolicy {
    pub seed: u64,
    pub sampler: ContextSampler,
    pub factor_choice: FactorChoice,
}

impl SimulationPolicy {
    pub fn new(seed: u64) -> Self {
        SimulationPolicy { seed, ..Self::default() }
    }
}

/// Resolve the hidden context of one session: walk the term and come out
/// with the success probability the trials will run at.
fn resolve_probability(
    sys: &SepSystem,
    term: &ExperimentTerm,
    state: &StateId,
    policy: &SimulationPolicy,
    rng: &mut impl Rng,
) -> Result<f64, Error> {
    match term {
        ExperimentTerm::Base(sym) => {
            let value = sys.base_probability(sym, state)?;
            if value.is_empty() {
                return Err(Error::Unperformable {
                    term: term.to_string(),
                    state: state.to_string(),
                });
            }
            Ok(policy.sampler.sample(&value, rng))
        }
        ExperimentTerm::Tilde(inner) => {
            Ok(1.0 - resolve_probability(sys, inner, state, policy, rng)?)
        }
        ExperimentTerm::Product(factors) => {
            let factors: Vec<&ExperimentTerm> = factors.iter().collect();
            let mut performable = Vec::with_capacity(factors.len());
            for f in &factors {
                performable.push(!sys.probability(f, state)?.is_empty());
            }
            let index = match &policy.factor_choice {
                FactorChoice::Uniform => {
                    let open: Vec<usize> =
                        (0..factors.len()).filter(|&i| performable[i]).collect();
                    if open.is_empty() {
                        return Err(Error::Unperformable {
                            term: term.to_string(),
                            state: state.to_string(),
                        });
                    }
                    open[rng.random_range(0..open.len())]
                }
                FactorChoice::Weighted(weights) if weights.len() == factors.len() => {
                    let drawn = weighted_index(weights, rng);
                    if !performable[drawn] {
                        return Err(Error::UnperformableFactor { index: drawn });
                    }
                    drawn
                }
                FactorChoice::Weighted(weights) => {
                    return Err(Error::LengthMismatch {
                        expected: factors.len(),
                        found: weights.len(),
                    });
                }
            };
            resolve_probability(sys, factors[index], state, policy, rng)
        }
    }
}

/// Draw an index according to the weights; zero-weight indices are never
/// drawn.
fn weighted_index(weights: &ChoiceWeights, rng: &mut impl Rng) -> usize {
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, w) in weights.iter().enumerate() {
        let w = to_f64(w);
        if w > 0.0 {
            last_positive = i;
        }
        acc += w;
        if w > 0.0 && u < acc {
            return i;
        }
    }
    last_positive
}

/// What one session observed.
#[derive(Clone, Debug, PartialEq)]
pub struct SessionRecord {
    pub session: u64,
    /// The success probability the hidden context settled on.
    pub context_probability: f64,
    pub trials: u64,
    pub successes: u64,
}

impl SessionRecord {
    pub fn frequency(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Run one session: resolve the context, then run Bernoulli trials at the
/// resolved probability. Session `i` of a given seed is always the same,
/// whatever else runs.
pub fn simulate_session(
    sys: &SepSystem,
    term: &ExperimentTerm,
    state: &StateId,
    policy: &SimulationPolicy,
    session: u64,
    trials: u64,
) -> Result<SessionRecord, Error> {
    if trials == 0 {
        return Err(Error::ZeroCount { what: "trial count" });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    rng.set_stream(session);
    let context_probability = resolve_probability(sys, term, state, policy, &mut rng)?;
    let dist = Bernoulli::new(context_probability.clamp(0.0, 1.0))
        .expect("resolved probabilities lie in [0, 1]");
    let successes = (0..trials).filter(|_| dist.sample(&mut rng)).count() as u64;
    Ok(SessionRecord { session, context_probability, trials, successes })
}

/// The relative frequency after each trial of one session, for watching the
/// sequence settle. The last entry equals the frequency reported by
/// [`simulate_session`] for the same arguments.
pub fn session_frequencies(
    sys: &SepSystem,
    term: &ExperimentTerm,
    state: &StateId,
    policy: &SimulationPolicy,
    session: u64,
    trials: u64,
) -> Result<Vec<f64>, Error> {
    if trials == 0 {
        return Err(Error::ZeroCount { what: "trial count" });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    rng.set_stream(session);
    let p = resolve_probability(sys, term, state, policy, &mut rng)?;
    let dist = Bernoulli::new(p.clamp(0.0, 1.0))
        .expect("resolved probabilities lie in [0, 1]");
    let mut successes = 0u64;
    let mut out = Vec::with_capacity(trials as usize);
    for n in 1..=trials {
        if dist.sample(&mut rng) {
            successes += 1;
        }
        out.push(successes as f64 / n as f64);
    }
    Ok(out)
}

/// How thoroughly the sessions explored one component of the target set.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentCoverage {
    pub component: ClosedInterval,
    /// Sessions whose frequency lies closer to this component than to any
    /// other.
    pub hits: usize,
    /// Some session frequency came within `delta` of the component.
    pub covered: bool,
    /// For interval components: attributed frequencies reached near both
    /// endpoints (within a fifth of the width plus `delta`). Point
    /// components carry `None`.
    pub span_covered: Option<bool>,
}

/// The verdict of a recovery run: the exact target, every session, and the
/// soundness and coverage analysis against the target.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryReport {
    pub term: ExperimentTerm,
    pub state: StateId,
    pub target: UnitIntervalSet,
    pub delta: f64,
    pub sessions: Vec<SessionRecord>,
    /// Greatest distance from any session frequency to the target set.
    pub max_distance: f64,
    pub coverage: Vec<ComponentCoverage>,
}

fn component_distance(f: f64, c: &ClosedInterval) -> f64 {
    let lo = to_f64(c.lo());
    let hi = to_f64(c.hi());
    if f < lo {
        lo - f
    } else if f > hi {
        f - hi
    } else {
        0.0
    }
}

impl RecoveryReport {
    /// Every session frequency lies within `delta` of the target set.
    pub fn sound(&self) -> bool {
        self.max_distance <= self.delta
    }

    /// Sound, every component reached, and every interval component
    /// explored across its span.
    pub fn pass(&self) -> bool {
        self.sound()
            && self
                .coverage
                .iter()
                .all(|c| c.covered && c.span_covered != Some(false))
    }

    /// One row per session; the term is quoted because product notation
    /// contains commas.
    pub fn to_csv(&self) -> String {
        use fmt::Write;
        let mut out = String::new();
        writeln!(
            out,
            "session,term,state,context_probability,successes,trials,frequency"
        )
        .unwrap();
        let quoted = format!("\"{}\"", self.term.to_string().replace('"', "\"\""));
        for s in &self.sessions {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                s.session,
                quoted,
                self.state,
                s.context_probability,
                s.successes,
                s.trials,
                s.frequency()
            )
            .unwrap();
        }
        out
    }
}

impl fmt::Display for RecoveryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "recovery of `{}` in `{}`: target {}",
            self.term, self.state, self.target
        )?;
        writeln!(
            f,
            "{} sessions of {} trials, tolerance {}",
            self.sessions.len(),
            self.sessions.first().map_or(0, |s| s.trials),
            self.delta
        )?;
        writeln!(
            f,
            "soundness: {} (greatest distance to target {:.6})",
            if self.sound() { "ok" } else { "FAILED" },
            self.max_distance
        )?;
        for c in &self.coverage {
            let span = match c.span_covered {
                None => String::new(),
                Some(true) => ", span explored".to_string(),
                Some(false) => ", span NOT explored".to_string(),
            };
            writeln!(
                f,
                "component {}: {} sessions, {}{}",
                c.component,
                c.hits,
                if c.covered { "reached" } else { "NOT reached" },
                span
            )?;
        }
        write!(f, "verdict: {}", if self.pass() { "pass" } else { "fail" })
    }
}

/// Run many sessions and compare the observed frequencies with the exact
/// value. Sessions run in parallel; the report is identical for a given
/// seed regardless of parallelism.
pub fn recover_subset(
    sys: &SepSystem,
    term: &ExperimentTerm,
    state: &StateId,
    policy: &SimulationPolicy,
    sessions: u64,
    trials: u64,
    delta: f64,
) -> Result<RecoveryReport, Error> {
    if !(delta > 0.0) {
        return Err(Error::DeltaNotPositive { delta });
    }
    if sessions == 0 {
        return Err(Error::ZeroCount { what: "session count" });
    }
    let target = sys.probability(term, state)?;
    if target.is_empty() {
        return Err(Error::Unperformable {
            term: term.to_string(),
            state: state.to_string(),
        });
    }

    let records: Vec<SessionRecord> = (0..sessions)
        .into_par_iter()
        .map(|i| simulate_session(sys, term, state, policy, i, trials))
        .collect::<Result<_, _>>()?;

    let components = target.components();
    let mut max_distance: f64 = 0.0;
    let mut attributed: Vec<Vec<f64>> = vec![Vec::new(); components.len()];
    for r in &records {
        let freq = r.frequency();
        let (nearest, dist) = components
            .iter()
            .enumerate()
            .map(|(i, c)| (i, component_distance(freq, c)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("performable targets have at least one component");
        attributed[nearest].push(freq);
        max_distance = max_distance.max(dist);
    }

    let coverage = components
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let lo = to_f64(c.lo());
            let hi = to_f64(c.hi());
            let covered = records
                .iter()
                .any(|r| component_distance(r.frequency(), c) <= delta);
            let span_covered = if c.is_point() {
                None
            } else {
                let margin = (hi - lo) / 5.0 + delta;
                let near_lo = attributed[i].iter().any(|&f| f <= lo + margin);
                let near_hi = attributed[i].iter().any(|&f| f >= hi - margin);
                Some(near_lo && near_hi)
            };
            ComponentCoverage { component: c.clone(), hits: attributed[i].len(), covered, span_covered }
        })
        .collect();

    Ok(RecoveryReport {
        term: term.clone(),
        state: state.clone(),
        target,
        delta,
        sessions: records,
        max_distance,
        coverage,
    })
}
