//! μ-terms: variables, finite products and coproducts, and least/greatest
//! fixed-point binders. A term in context `[X1, ..., Xn]` denotes an n-ary
//! functor; variables double as projections.

mod equations;
mod parse;
pub(crate) mod syntax;

pub use equations::{Equation, EquationSystem, SystemError};
pub use parse::{is_valid_name, parse, parse_with_warnings, print, to_file, ParseError, Parsed};
pub use syntax::{
    all_names, alpha_eq, barendregt, free_vars, fresh_name, is_barendregt, occurs_free, simplify,
    substitute, Context, FixKind, MuTerm, TermNode,
};
