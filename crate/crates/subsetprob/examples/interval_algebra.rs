//! The exact set algebra underneath everything else: finite unions of
//! closed rational subintervals of [0, 1]. Values parse from text, combine
//! by union and intersection, and reflect through x -> 1 - x without any
//! rounding.

use subsetprob::rational::ratio;
use subsetprob::{Error, UnitIntervalSet};

fn main() -> Result<(), Error> {
    let v = UnitIntervalSet::parse("{1/4} u [3/5, 7/10]")?;
    let w = UnitIntervalSet::interval(ratio(1, 2), ratio(9, 10))?;
    println!("v                = {v}");
    println!("w                = {w}");
    println!("v union w        = {}", v.union(&w));
    println!("v intersect w    = {}", v.intersect(&w));
    println!("1 - v            = {}", v.one_minus());
    println!("1 - (1 - v)      = {}", v.one_minus().one_minus());
    println!();

    println!("touching pieces merge: {}", UnitIntervalSet::parse("[0, 1/2] u [1/2, 3/4]")?);
    println!("points are intervals:  {}", UnitIntervalSet::parse("[2/3, 2/3]")?);
    println!("nothing at all:        {}", UnitIntervalSet::parse("empty")?);
    println!();

    let reflected = v.one_minus();
    println!("is 2/5 in 1 - v? {}", reflected.contains(&ratio(2, 5)));
    println!("is 3/4 in 1 - v? {}", reflected.contains(&ratio(3, 4)));
    println!("1 - v inside [1/4, 1]? {}", {
        let band = UnitIntervalSet::interval(ratio(1, 4), ratio(1, 1))?;
        reflected.is_subset(&band)
    });
    Ok(())
}
