//! Parsing, printing, substitution and binder hygiene for μ-terms.

use parity_mu::semantics::unroll;
use parity_mu::term::{
    alpha_eq, barendregt, free_vars, is_barendregt, parse, print, substitute, MuTerm,
};

fn main() {
    let lists = parse("(mu L (sum (prod) (prod (var A) (var L))))").expect("valid term");
    println!("lists        {}", print(&lists));
    println!("free vars    {:?}", free_vars(&lists).names());
    println!("one unroll   {}", unroll(&lists).expect("a binder"));

    // Lists of booleans.
    let bools = MuTerm::coprod(vec![MuTerm::one(), MuTerm::one()]);
    println!("A := 2       {}", substitute(&lists, "A", &bools));

    // Substituting a term that mentions L under the binder L renames the binder.
    let captured = substitute(&lists, "A", &MuTerm::var("L"));
    println!("A := L       {}", print(&captured));

    let renamed = parse("(mu K (sum (prod) (prod (var A) (var K))))").unwrap();
    println!(
        "alpha-equal to a renamed copy: {}",
        alpha_eq(&lists, &renamed)
    );

    // Sharing a subterm under its own binder leaves shadowed names behind.
    let nested = parse("(mu X (prod (var Y) (var X)))").unwrap();
    let shared = substitute(&nested, "Y", &nested);
    let (canon, renaming) = barendregt(&shared);
    println!(
        "shadowed     {} (distinct binders: {})",
        print(&shared),
        is_barendregt(&shared)
    );
    println!("canonical    {} renaming {:?}", print(&canon), renaming);
}
