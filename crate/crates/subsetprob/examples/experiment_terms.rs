//! Experiment terms: a base alphabet of yes-no experiments closed under
//! inversion (swap the outcome labels) and product (perform one factor,
//! chosen by circumstances, and report its outcome). Terms carry a
//! canonical form that evaluation and the lattice derivation rely on.

use subsetprob::{Error, ExperimentTerm};

fn main() -> Result<(), Error> {
    let raw = ExperimentTerm::parse("prod(~~burn, prod(float, burn), tau)")?;
    println!("raw term    {raw}");
    println!("canonical   {}", raw.canonicalize()?);
    println!();

    let burn = ExperimentTerm::named("burn")?;
    println!("inverse            ~burn  = {}", burn.inverse());
    println!("double inverse     ~~burn = {}", burn.inverse().inverse().canonicalize()?);
    println!();

    let product = ExperimentTerm::parse("prod(burn, ~float)")?;
    println!("product            {product}");
    println!("its literals       {:?}", product.literals().iter().map(|t| t.to_string()).collect::<Vec<_>>());
    println!("inverted product   {}", product.inverse().canonicalize()?);
    println!();

    println!("one factor collapses: {}", ExperimentTerm::parse("prod(burn)")?.canonicalize()?);
    println!("the unit disappears:  {}", ExperimentTerm::parse("prod(burn, tau)")?.canonicalize()?);
    println!("duplicates merge:     {}", ExperimentTerm::parse("prod(burn, burn)")?.canonicalize()?);
    Ok(())
}
