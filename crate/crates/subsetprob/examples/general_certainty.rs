//! Properties against a softened standard. The strict derivation counts an
//! experiment as a property holder only where its value is exactly {1};
//! passing a target set like [1 - epsilon, 1] relaxes that to "certain up
//! to epsilon" and can merge or split classes. An aging car makes the
//! difference visible: a start test that succeeds at least 17 times in 20
//! is not strictly certain, but it is certain up to 3/20.

use subsetprob::rational::{one, ratio};
use subsetprob::{derive_property_system, derive_property_system_with, Error, SepSystem, UnitIntervalSet};

fn main() -> Result<(), Error> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/car.sep");
    let sys = SepSystem::load(path)?;

    println!("strict certainty:");
    println!("{}", derive_property_system(&sys)?.report());

    let epsilon = ratio(3, 20);
    let target = UnitIntervalSet::interval(one() - &epsilon, one())?;
    let (relaxed, warnings) = derive_property_system_with(&sys, &target)?;
    println!("certainty up to {epsilon} (target {target}):");
    println!("{}", relaxed.report());
    for w in &warnings {
        println!("warning: {w}");
    }

    println!("with the softer standard, `starts` now holds in the aged state too,");
    println!("so fresh and aged support the same properties and become equivalent");
    println!("in the state order, while the wreck stays apart.");
    Ok(())
}
