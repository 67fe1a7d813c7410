//! Random instance generators backing the law tests, the acceptance suite,
//! and the demo examples.
//!
//! Every generator takes the `Rng` it draws from, so callers get determinism
//! by seeding. Generated systems always have a complete table (every base
//! experiment has a value in every state) and therefore validate cleanly;
//! the values themselves are biased toward the interesting boundary cases
//! (certain, impossible, unperformable) so that derived structures are not
//! trivially flat.

use rand::Rng;

use crate::interval::UnitIntervalSet;
use crate::morphism::SepMorphism;
use crate::rational::{ratio, Rational};
use crate::sep::{SepSystem, StateId, SubsetProbabilityTable};
use crate::term::{ExperimentSymbol, ExperimentTerm};

/// A rational drawn from [0, 1] with denominator at most `max_denominator`.
pub fn unit_rational(rng: &mut impl Rng, max_denominator: u32) -> Rational {
    let den = rng.random_range(1..=max_denominator.max(1));
    let num = rng.random_range(0..=den);
    ratio(num as i64, den as i64)
}

/// An arbitrary set with up to `max_components` components, possibly empty.
pub fn interval_set(
    rng: &mut impl Rng,
    max_components: usize,
    max_denominator: u32,
) -> UnitIntervalSet {
    let count = rng.random_range(0..=max_components);
    let pairs = (0..count).map(|_| {
        let a = unit_rational(rng, max_denominator);
        let b = unit_rational(rng, max_denominator);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    });
    UnitIntervalSet::normalize(pairs.collect::<Vec<_>>()).unwrap()
}

/// Like [`interval_set`] but never empty.
pub fn nonempty_interval_set(
    rng: &mut impl Rng,
    max_components: usize,
    max_denominator: u32,
) -> UnitIntervalSet {
    loop {
        let v = interval_set(rng, max_components.max(1), max_denominator);
        if !v.is_empty() {
            return v;
        }
    }
}

/// A table value, biased toward the boundary cases that drive certainty,
/// impossibility, and performability logic.
pub fn table_value(rng: &mut impl Rng, max_denominator: u32) -> UnitIntervalSet {
    match rng.random_range(0..100) {
        0..25 => UnitIntervalSet::one(),
        25..40 => {
            UnitIntervalSet::interval(unit_rational(rng, max_denominator), ratio(1, 1))
                .unwrap()
        }
        40..50 => UnitIntervalSet::zero(),
        50..60 => UnitIntervalSet::empty(),
        _ => interval_set(rng, 3, max_denominator),
    }
}

/// A complete random system with `n_states` states `p1..` and `n_extra`
/// experiments `e1..` besides the unit.
pub fn sep_system(
    rng: &mut impl Rng,
    n_states: usize,
    n_extra: usize,
    max_denominator: u32,
) -> SepSystem {
    assert!(n_states >= 1, "a system needs at least one state");
    let states: Vec<StateId> = (1..=n_states)
        .map(|i| StateId::new(format!("p{i}")).unwrap())
        .collect();
    let mut base = vec![ExperimentSymbol::unit()];
    base.extend((1..=n_extra).map(|i| ExperimentSymbol::new(format!("e{i}")).unwrap()));
    let mut table = SubsetProbabilityTable::new();
    for sym in base.iter().skip(1) {
        for state in &states {
            table.insert(sym.clone(), state.clone(), table_value(rng, max_denominator));
        }
    }
    SepSystem::new(states, base, table).unwrap()
}

/// A random literal over the given base: a symbol or an inverted symbol.
pub fn literal(rng: &mut impl Rng, base: &[ExperimentSymbol]) -> ExperimentTerm {
    let sym = base[rng.random_range(0..base.len())].clone();
    let t = ExperimentTerm::Base(sym);
    if rng.random_bool(0.5) {
        t.inverse()
    } else {
        t
    }
}

/// A random canonical term over the given base.
pub fn canonical_term(rng: &mut impl Rng, base: &[ExperimentSymbol]) -> ExperimentTerm {
    let mut chosen = Vec::new();
    for sym in base {
        let t = ExperimentTerm::Base(sym.clone());
        if rng.random_bool(0.25) {
            chosen.push(t.clone());
        }
        if rng.random_bool(0.25) {
            chosen.push(t.inverse());
        }
    }
    if chosen.is_empty() {
        chosen.push(literal(rng, base));
    }
    ExperimentTerm::product(chosen).unwrap()
}

/// A random system with `n_states` states `q1..` mapping lawfully onto
/// `dst`, together with the morphism. Each destination experiment is
/// implemented by a fresh source literal whose table is pulled from the
/// destination through a random state map (reflected when the literal is
/// inverted), so probability preservation holds by construction; `n_extra`
/// further source experiments get unconstrained values.
pub fn pullback_morphism(
    rng: &mut impl Rng,
    n_states: usize,
    dst: &SepSystem,
    n_extra: usize,
    max_denominator: u32,
) -> (SepSystem, SepMorphism) {
    assert!(n_states >= 1, "a system needs at least one state");
    let states: Vec<StateId> = (1..=n_states)
        .map(|i| StateId::new(format!("q{i}")).unwrap())
        .collect();
    let mut phi = SepMorphism::new();
    for p in &states {
        let image = dst.states()[rng.random_range(0..dst.states().len())].clone();
        phi.map_state(p.clone(), image);
    }
    let mut base = vec![ExperimentSymbol::unit()];
    let mut table = SubsetProbabilityTable::new();
    for (i, sym) in dst.base().iter().enumerate() {
        if sym.is_unit() {
            continue;
        }
        let fresh = ExperimentSymbol::new(format!("f{i}")).unwrap();
        base.push(fresh.clone());
        let invert = rng.random_bool(0.5);
        for p in &states {
            let q = phi.state_image(p).unwrap();
            let v = dst.base_probability(sym, q).unwrap();
            table.insert(fresh.clone(), p.clone(), if invert { v.one_minus() } else { v });
        }
        let image = ExperimentTerm::Base(fresh);
        phi.map_experiment(sym.clone(), if invert { image.inverse() } else { image });
    }
    for j in 1..=n_extra {
        let sym = ExperimentSymbol::new(format!("g{j}")).unwrap();
        base.push(sym.clone());
        for p in &states {
            table.insert(sym.clone(), p.clone(), table_value(rng, max_denominator));
        }
    }
    let src = SepSystem::new(states, base, table).unwrap();
    (src, phi)
}

/// A random term tree that is generally not canonical: inverses wrap whole
/// products, products nest, duplicates appear. Useful for checking that
/// evaluation and canonicalization agree on arbitrary shapes.
pub fn raw_term(rng: &mut impl Rng, base: &[ExperimentSymbol], depth: usize) -> ExperimentTerm {
    if depth == 0 || rng.random_bool(0.4) {
        return literal(rng, base);
    }
    if rng.random_bool(0.4) {
        ExperimentTerm::Tilde(Box::new(raw_term(rng, base, depth - 1)))
    } else {
        let n = rng.random_range(1..=3);
        let factors: std::collections::BTreeSet<_> =
            (0..n).map(|_| raw_term(rng, base, depth - 1)).collect();
        ExperimentTerm::Product(factors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_systems_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let sys = sep_system(&mut rng, 4, 3, 12);
            assert!(sys.validate().is_empty());
            assert_eq!(sys.states().len(), 4);
            assert_eq!(sys.base().len(), 4);
        }
    }

    #[test]
    fn generated_terms_are_canonical() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sys = sep_system(&mut rng, 2, 3, 12);
        for _ in 0..100 {
            let t = canonical_term(&mut rng, sys.base());
            assert!(t.is_canonical());
            let raw = raw_term(&mut rng, sys.base(), 3);
            assert_eq!(
                raw.canonicalize().unwrap(),
                raw.canonicalize().unwrap().canonicalize().unwrap()
            );
        }
    }

    #[test]
    fn generation_is_deterministic_under_a_seed() {
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(sep_system(&mut a, 3, 2, 10), sep_system(&mut b, 3, 2, 10));
        assert_eq!(interval_set(&mut a, 4, 16), interval_set(&mut b, 4, 16));
    }
}
