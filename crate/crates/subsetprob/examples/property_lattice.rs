//! From a value table to a property system. Experiments with the same
//! certainty set (the states where the value is exactly {1}) land in one
//! property class; classes order by certainty-set inclusion, meet by
//! intersection, and every state gets its set of actual properties. The
//! derived state order reads "p is at least as specific as q".

use subsetprob::{derive_property_system, Error, ExperimentTerm, SepSystem, StateId};

fn main() -> Result<(), Error> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/wood.sep");
    let sys = SepSystem::load(path)?;
    let sp = derive_property_system(&sys)?;
    println!("{}", sp.report());

    let lat = sp.lattice();
    let burn = ExperimentTerm::named("burn")?;
    let float = ExperimentTerm::named("float")?;
    let both = ExperimentTerm::parse("prod(burn, float)")?;
    let meet = lat.meet(lat.class_of_term(&burn)?, lat.class_of_term(&float)?);
    println!("class(burn) meet class(float) = class [{}]", lat.element(meet).representative);
    println!("class(prod(burn, float))      = class [{}]", lat.element(lat.class_of_term(&both)?).representative);
    println!();

    let dry_light = StateId::new("dry_light")?;
    println!("actual in dry_light:");
    for &id in sp.actual_properties(&dry_light)? {
        println!("  [{}]", lat.element(id).representative);
    }
    println!();

    println!("Graphviz Hasse diagram (render with `dot -Tsvg`):");
    println!("{}", lat.to_dot());
    Ok(())
}
