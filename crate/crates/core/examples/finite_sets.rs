//! Denotations of terms as finite sets of canonical trees.

use parity_mu::semantics::{eval, finiteness_analysis, sized_env, SetValue};
use parity_mu::term::parse;

fn show(src: &str, sizes: &[(&str, usize)]) {
    let t = parse(src).expect("valid term");
    let env = sized_env(sizes.iter().copied());
    let an = finiteness_analysis(&t, sizes.iter().copied()).expect("free variables bound");
    match eval(&t, &env, 64).expect("evaluable") {
        SetValue::Finite { elements, nu_table } => {
            println!(
                "{src} with {sizes:?}: {} element(s), {:?}",
                elements.len(),
                an.verdict
            );
            for e in elements.elements().iter().take(4) {
                println!("    {e}");
            }
            if let Some(t) = nu_table {
                println!("    ν {} stabilised after {} stage(s)", t.binder, t.stage);
            }
        }
        SetValue::Infinite { certificate } => {
            println!("{src} with {sizes:?}: infinite, {certificate}")
        }
    }
}

fn main() {
    show("(sum (prod) (prod))", &[]);
    show("(mu X (var X))", &[]);
    show("(nu X (var X))", &[]);
    show("(mu L (sum (prod) (prod (var A) (var L))))", &[("A", 0)]);
    show("(mu L (sum (prod) (prod (var A) (var L))))", &[("A", 2)]);
    show("(nu S (prod (var A) (var S)))", &[("A", 1)]);
    show("(nu S (prod (var A) (var S)))", &[("A", 2)]);
}
