//! The algebra of yes/no experiment terms.
//!
//! Terms are built from named base experiments by two operations: `~t` is the
//! inverse experiment (same procedure, yes and no swapped) and `prod(..)` is
//! the product experiment (an unspecified factor is performed and its answer
//! returned). The distinguished base symbol `tau` is the unit experiment that
//! always answers yes.
//!
//! Every term has a canonical form: a literal (a base symbol or the inverse
//! of one) or a set of at least two literals under `prod`. Products flatten
//! and deduplicate because performing "one of one of" collapses, and inverses
//! push through products onto the factors. [`ExperimentTerm::canonicalize`]
//! rewrites an arbitrary term tree into this form.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::scan::Cursor;

pub(crate) fn is_valid_identifier(s: &str) -> bool {
    let mut bytes = s.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_alphabetic() || b == b'_' => {}
        _ => return false,
    }
    bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'\'')
}

/// Name of a base experiment. `tau` is reserved for the unit experiment.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExperimentSymbol(String);

/// How the unit experiment is spelled in all text formats.
pub const UNIT_SYMBOL: &str = "tau";

impl ExperimentSymbol {
    pub fn new(id: impl Into<String>) -> Result<Self, Error> {
        let id = id.into();
        if is_valid_identifier(&id) && id != "prod" {
            Ok(ExperimentSymbol(id))
        } else {
            Err(Error::InvalidIdentifier { id })
        }
    }

    /// The unit experiment, which answers yes whatever the state.
    pub fn unit() -> Self {
        ExperimentSymbol(UNIT_SYMBOL.to_string())
    }

    pub fn is_unit(&self) -> bool {
        self.0 == UNIT_SYMBOL
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ExperimentSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A term over the experiment algebra.
///
/// The variants are public so terms can be pattern matched; building through
/// them directly may produce non-canonical trees, which every evaluator in
/// the crate still accepts. The constructors [`ExperimentTerm::product`] and
/// [`ExperimentTerm::inverse`] preserve canonical form, and
/// [`ExperimentTerm::canonicalize`] establishes it.
///
/// The derived order sorts base symbols before inverses before products; the
/// least term in a class is used as the class representative elsewhere.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentTerm {
    Base(ExperimentSymbol),
    Tilde(Box<ExperimentTerm>),
    Product(BTreeSet<ExperimentTerm>),
}

impl ExperimentTerm {
    pub fn base(symbol: ExperimentSymbol) -> Self {
        ExperimentTerm::Base(symbol)
    }

    /// Convenience constructor from a symbol name.
    pub fn named(id: &str) -> Result<Self, Error> {
        Ok(ExperimentTerm::Base(ExperimentSymbol::new(id)?))
    }

    /// The unit experiment as a term.
    pub fn unit() -> Self {
        ExperimentTerm::Base(ExperimentSymbol::unit())
    }

    /// The inverse experiment: swap the yes and no outcomes.
    ///
    /// Inverting a product inverts each factor, because answering the product
    /// with no means answering the performed factor with no. Inverting an
    /// inverse unwraps it. Canonical input gives canonical output.
    pub fn inverse(&self) -> Self {
        match self {
            ExperimentTerm::Base(_) => ExperimentTerm::Tilde(Box::new(self.clone())),
            ExperimentTerm::Tilde(inner) => (**inner).clone(),
            ExperimentTerm::Product(factors) => {
                ExperimentTerm::Product(factors.iter().map(Self::inverse).collect())
            }
        }
    }

    /// The product experiment over the given factors.
    ///
    /// Factors that are themselves canonical products are flattened in, and
    /// duplicates collapse; a product of one factor is that factor. At least
    /// one factor is required.
    pub fn product(
        factors: impl IntoIterator<Item = ExperimentTerm>,
    ) -> Result<Self, Error> {
        let mut set = BTreeSet::new();
        for f in factors {
            match f {
                ExperimentTerm::Product(inner) if inner.iter().all(Self::is_literal) => {
                    set.extend(inner);
                }
                other => {
                    set.insert(other);
                }
            }
        }
        match set.len() {
            0 => Err(Error::EmptyProduct),
            1 => Ok(set.into_iter().next().unwrap()),
            _ => Ok(ExperimentTerm::Product(set)),
        }
    }

    /// A base symbol or the inverse of one.
    pub fn is_literal(&self) -> bool {
        match self {
            ExperimentTerm::Base(_) => true,
            ExperimentTerm::Tilde(inner) => matches!(**inner, ExperimentTerm::Base(_)),
            ExperimentTerm::Product(_) => false,
        }
    }

    /// True if the term is a literal or a product of two or more literals,
    /// the unique normal form produced by [`ExperimentTerm::canonicalize`].
    pub fn is_canonical(&self) -> bool {
        match self {
            ExperimentTerm::Product(factors) => {
                factors.len() >= 2 && factors.iter().all(Self::is_literal)
            }
            _ => self.is_literal(),
        }
    }

    /// Rewrite into canonical form: push inverses down to the base symbols,
    /// flatten nested products, collapse duplicates and single factors.
    /// Fails only on a directly constructed empty product.
    pub fn canonicalize(&self) -> Result<Self, Error> {
        match self {
            ExperimentTerm::Base(_) => Ok(self.clone()),
            ExperimentTerm::Tilde(inner) => Ok(inner.canonicalize()?.inverse()),
            ExperimentTerm::Product(factors) => {
                let canonical: Vec<_> = factors
                    .iter()
                    .map(Self::canonicalize)
                    .collect::<Result<_, _>>()?;
                Self::product(canonical)
            }
        }
    }

    /// The literals of a canonical term: its factors, or the term itself.
    pub fn literals(&self) -> BTreeSet<ExperimentTerm> {
        debug_assert!(self.is_canonical());
        match self {
            ExperimentTerm::Product(factors) => factors.clone(),
            _ => BTreeSet::from([self.clone()]),
        }
    }

    /// All base symbols mentioned anywhere in the term tree.
    pub fn symbols(&self) -> BTreeSet<&ExperimentSymbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols<'a>(&'a self, out: &mut BTreeSet<&'a ExperimentSymbol>) {
        match self {
            ExperimentTerm::Base(s) => {
                out.insert(s);
            }
            ExperimentTerm::Tilde(inner) => inner.collect_symbols(out),
            ExperimentTerm::Product(factors) => {
                for f in factors {
                    f.collect_symbols(out);
                }
            }
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        let mut cur = Cursor::new(s);
        cur.skip_ws();
        let term = Self::parse_term(&mut cur)?;
        cur.finish()?;
        Ok(term)
    }

    /// One term; products are assembled through [`ExperimentTerm::product`],
    /// so written nesting like `prod(a, prod(b, c))` flattens on the spot.
    pub(crate) fn parse_term(cur: &mut Cursor) -> Result<Self, Error> {
        if cur.eat(b'~') {
            cur.skip_ws();
            let inner = Self::parse_term(cur)?;
            return Ok(ExperimentTerm::Tilde(Box::new(inner)));
        }
        let col = cur.col();
        let name = cur.ident()?;
        if name == "prod" {
            cur.skip_ws();
            cur.expect(b'(')?;
            let mut factors = Vec::new();
            loop {
                cur.skip_ws();
                factors.push(Self::parse_term(cur)?);
                cur.skip_ws();
                if cur.eat(b',') {
                    continue;
                }
                cur.expect(b')')?;
                break;
            }
            Self::product(factors)
        } else {
            ExperimentSymbol::new(name).map(ExperimentTerm::Base).map_err(|e| {
                Error::Parse { line: 1, col, msg: e.to_string() }
            })
        }
    }
}

impl fmt::Display for ExperimentTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentTerm::Base(s) => write!(f, "{s}"),
            ExperimentTerm::Tilde(inner) => write!(f, "~{inner}"),
            ExperimentTerm::Product(factors) => {
                write!(f, "prod(")?;
                for (i, t) in factors.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for ExperimentTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// All canonical terms over the given base: every nonempty set of literals,
/// 2^(2n) - 1 terms for n base symbols. The base must contain `tau` and stay
/// small; enumeration is meant for analysis of handwritten systems.
pub fn enumerate_terms<'a>(
    base: impl IntoIterator<Item = &'a ExperimentSymbol>,
) -> Result<BTreeSet<ExperimentTerm>, Error> {
    let symbols: BTreeSet<_> = base.into_iter().cloned().collect();
    if !symbols.contains(&ExperimentSymbol::unit()) {
        return Err(Error::MissingUnitSymbol);
    }
    if symbols.len() > 8 {
        return Err(Error::UniverseTooLarge { experiments: symbols.len() });
    }
    let literals: Vec<ExperimentTerm> = symbols
        .iter()
        .map(|s| ExperimentTerm::Base(s.clone()))
        .chain(symbols.iter().map(|s| ExperimentTerm::Base(s.clone()).inverse()))
        .collect();
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << literals.len()) {
        let chosen = literals
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, l)| l.clone());
        out.insert(ExperimentTerm::product(chosen).unwrap());
    }
    Ok(out)
}
