//! Counting Eva's winning strategy prefixes and comparing with the term's size.

use parity_mu::bridge::term_to_game;
use parity_mu::oracle::{count_sequence, enumerate_prefixes, stabilized_count};
use parity_mu::semantics::{eval, Env};
use parity_mu::term::parse;

fn main() {
    for src in [
        "(mu X (sum (prod) (var X)))",
        "(sum (prod) (prod (sum (prod) (prod)) (sum (prod) (prod))))",
        "(nu X (sum (prod) (prod)))",
    ] {
        let t = parse(src).unwrap();
        let g = term_to_game(&t);
        let seq = count_sequence(&g, 6).expect("small game");
        let value = eval(&t, &Env::new(), 64).expect("closed term");
        println!("{src}");
        println!(
            "  prefix counts {seq:?}, {}",
            stabilized_count(&g, 12).unwrap()
        );
        println!("  cardinality   {:?}", value.cardinality());
        if let Some(p) = enumerate_prefixes(&g, 2, 100).unwrap().first() {
            println!("  a depth-2 prefix chooses {:?}", p.choices());
        }
    }
}
