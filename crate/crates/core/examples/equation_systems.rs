//! Simultaneous solutions of an equation system against nested ones.

use parity_mu::bekic::{bekic_nest, gaussian_eliminate};
use parity_mu::semantics::{
    comparison_maps, eval, eval_system, sized_env, EvalOptions, SystemValue,
};
use parity_mu::term::{print, EquationSystem};

const SYSTEM: &str = "\
param A;
X =mu[1] (sum (prod) (prod (var A) (var Y)))
Y =mu[1] (sum (prod) (var X))
";

fn main() {
    let sys = EquationSystem::parse(SYSTEM).expect("valid system");
    let env = sized_env([("A", 1)]);
    let opts = EvalOptions::with_budget(64);

    let nested = bekic_nest(&sys).unwrap();
    let gauss = gaussian_eliminate(&sys).unwrap();
    for (x, t) in gauss.solutions() {
        let size = match eval(t, &env, 64).unwrap().cardinality() {
            Some(n) => n.to_string(),
            None => "infinite".into(),
        };
        println!("{x} = {}  ({size})", print(t));
        println!("  nested form {}", print(nested.get(x).unwrap()));
    }

    // With A nonempty both components are infinite.
    let env = sized_env([("A", 0)]);
    match eval_system(&sys, &env, &opts).unwrap() {
        SystemValue::Stabilized {
            components,
            iterations,
            ..
        } => {
            println!(
                "simultaneous: sizes {:?} after {iterations} steps",
                components.iter().map(|c| c.len()).collect::<Vec<_>>()
            );
            let maps = comparison_maps(&sys, &env, &opts, &components, &gauss).unwrap();
            println!(
                "comparison maps are bijections: {}",
                maps.iter().all(|m| m.is_bijection())
            );
        }
        SystemValue::Diverged { reason, .. } => println!("diverged: {reason}"),
    }
}
