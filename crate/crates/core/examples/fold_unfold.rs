//! A fixed point is isomorphic to its one-step unrolling.

use parity_mu::semantics::{fold, sized_env, unfold, unroll};
use parity_mu::term::{parse, print};

fn main() {
    let env = sized_env([("A", 2)]);
    for src in [
        "(mu X (sum (prod) (prod (var A) (prod))))",
        "(nu S (prod (var A) (sum (prod) (var A))))",
    ] {
        let t = parse(src).unwrap();
        let f = fold(&t, &env, 64).expect("finite fixed point");
        let u = unfold(&t, &env, 64).expect("finite fixed point");
        let round = f.then(&u).expect("composable");
        println!("{}", print(&t));
        println!("  unrolled {}", print(&unroll(&t).unwrap()));
        println!(
            "  {} elements, unfold after fold is the identity: {}",
            f.domain().len(),
            round.is_identity()
        );
        for (x, y) in f.domain().elements().iter().zip(f.indices()) {
            println!("    {x}  ->  {}", f.codomain().elements()[*y]);
        }
    }
}
