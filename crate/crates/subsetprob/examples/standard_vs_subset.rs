//! Why products take the union of factor values rather than a weighted
//! average. With a fixed weight vector, a weighted average of exact
//! probabilities is certain only when every positively weighted factor is
//! certain; a zero weight lets its factor do anything unnoticed. The grid
//! diagnostic searches a whole grid of factor probabilities and confirms
//! this, exhibiting explicit counterexamples.

use subsetprob::choice::{attainable_hull, certainty_grid_diagnostic, convex_combination, ChoiceWeights};
use subsetprob::rational::ratio;
use subsetprob::{Error, UnitIntervalSet};

fn main() -> Result<(), Error> {
    let values = [ratio(1, 2), ratio(1, 1)];
    for weights in [
        ChoiceWeights::new(vec![ratio(3, 10), ratio(7, 10)])?,
        ChoiceWeights::new(vec![ratio(0, 1), ratio(1, 1)])?,
    ] {
        let combined = convex_combination(&weights, &values)?;
        println!("weights {weights} on values (1/2, 1) combine to {combined}");
    }
    println!();

    let step = ratio(1, 10);
    for weights in [
        ChoiceWeights::new(vec![ratio(1, 2), ratio(1, 2)])?,
        ChoiceWeights::new(vec![ratio(0, 1), ratio(1, 1)])?,
    ] {
        let report = certainty_grid_diagnostic(&weights, &step)?;
        println!("{report}");
    }

    println!("varying the weights over all distributions fills the gaps in the union:");
    let a = UnitIntervalSet::parse("{3/10}")?;
    let b = UnitIntervalSet::parse("{7/10} u {1}")?;
    println!("  union of factor values: {}", a.union(&b));
    println!("  attainable by weighting: {}", attainable_hull(&[a, b])?);
    Ok(())
}
