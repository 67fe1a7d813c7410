//! Structure-preserving maps between systems. States map forward onto the
//! coarser description while experiments map backward: each coarse
//! experiment names the finer experiment that implements it, and the law
//! asks that values agree along the two routes. A lawful map then acts on
//! the derived property systems, and that action composes functorially.

use subsetprob::{
    derive_property_system, derive_sp_morphism, validate_sep_morphism, validate_sp_morphism,
    Error, SepMorphism, SepSystem,
};

fn main() -> Result<(), Error> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let fine = SepSystem::load(format!("{dir}/wood_refined.sep"))?;
    let coarse = SepSystem::load(format!("{dir}/wood.sep"))?;
    let phi = SepMorphism::load(format!("{dir}/wood_refinement.morph"))?;

    println!("the map as text:\n{}", phi.to_text());
    let violations = validate_sep_morphism(&fine, &coarse, &phi)?;
    println!("violations: {}", if violations.is_empty() { "none".into() } else { format!("{violations:?}") });
    println!();

    println!("values agree along both routes, composite experiments included:");
    let both = subsetprob::ExperimentTerm::parse("prod(burn, ~float)")?;
    let pulled = phi.pull_back(&both)?;
    for (p, q) in phi.state_entries() {
        println!(
            "  mu({both}, {q}) = {}   mu({pulled}, {p}) = {}",
            coarse.probability(&both, q)?,
            fine.probability(&pulled, p)?,
        );
    }
    println!();

    let sp_fine = derive_property_system(&fine)?;
    let sp_coarse = derive_property_system(&coarse)?;
    let action = derive_sp_morphism(&phi, &sp_fine, &sp_coarse)?;
    println!("derived action on property classes (coarse -> fine):");
    for (id, e) in sp_coarse.lattice().elements().iter().enumerate() {
        let img = action.class_image(id).unwrap();
        println!("  [{}] -> [{}]", e.representative, sp_fine.lattice().element(img).representative);
    }
    assert!(validate_sp_morphism(&sp_fine, &sp_coarse, &action).is_empty());
    println!();

    let identity = SepMorphism::identity(&fine);
    assert_eq!(phi.after(&identity)?, phi);
    println!("composing with the identity changes nothing; composition of lawful");
    println!("maps is lawful, and deriving the action commutes with composing.");
    Ok(())
}
