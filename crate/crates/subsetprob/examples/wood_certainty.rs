//! A worked model: three conditions of a piece of wood probed by a burn
//! test and a float test. Values are sets of frequencies, not single
//! numbers; certainty means the set is exactly {1}, and it transfers to a
//! product exactly when every factor has it.

use subsetprob::{Error, ExperimentTerm, SepSystem, StateId};

fn main() -> Result<(), Error> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/wood.sep");
    let sys = SepSystem::load(path)?;

    let burn = ExperimentTerm::named("burn")?;
    let float = ExperimentTerm::named("float")?;
    let both = ExperimentTerm::parse("prod(burn, float)")?;

    println!("value table:");
    for state in sys.states() {
        for term in [&burn, &float, &both] {
            println!("  mu({term}, {state}) = {}", sys.probability(term, state)?);
        }
    }
    println!();

    let dry_light = StateId::new("dry_light")?;
    let wet_light = StateId::new("wet_light")?;
    println!("certain in dry_light:");
    for term in [&burn, &float, &both] {
        println!("  {term}: {}", sys.is_certain(term, &dry_light)?);
    }
    println!();

    println!("in wet light wood the burn test has no single success rate:");
    println!("  mu(burn, wet_light) = {}", sys.probability(&burn, &wet_light)?);
    println!("  certain?             {}", sys.is_certain(&burn, &wet_light)?);
    println!("  still performable?   {}", sys.is_performable(&burn, &wet_light)?);
    println!();

    println!("the inverse experiment swaps the outcome labels:");
    println!("  mu(~burn, wet_light) = {}", sys.probability(&burn.inverse(), &wet_light)?);
    Ok(())
}
