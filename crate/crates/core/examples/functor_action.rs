//! Terms act on functions between the sets their variables range over.

use std::collections::BTreeMap;

use parity_mu::semantics::{eval_on_morphism, Carrier, FiniteFunction};
use parity_mu::term::parse;

fn main() {
    // Options of pairs, mapped through the function 3 -> 2 that merges a1 into a0.
    let t = parse("(sum (prod) (prod (var A) (var A)))").unwrap();
    let f = FiniteFunction::from_indices(
        Carrier::atoms("a", 3),
        Carrier::atoms("b", 2),
        vec![0, 0, 1],
    )
    .unwrap();
    let fs = BTreeMap::from([("A".to_string(), f.clone())]);
    let tf = eval_on_morphism(&t, &fs, 64).expect("finite");
    for (x, j) in tf.domain().elements().iter().zip(tf.indices()) {
        println!("{x}  ->  {}", tf.codomain().elements()[*j]);
    }

    let id = FiniteFunction::identity(f.domain());
    let tid = eval_on_morphism(&t, &BTreeMap::from([("A".to_string(), id)]), 64).unwrap();
    println!("identity is preserved: {}", tid.is_identity());
}
