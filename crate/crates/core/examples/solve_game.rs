//! Solving a small parity game and its dual.

use std::collections::BTreeMap;

use parity_mu::game::{print_pg, zielonka_solve, ParityGame, Player};

fn main() {
    // Eva at 0 can loop through the even vertex 1 or run to Adam's odd trap 2.
    let mut b = ParityGame::builder();
    b.vertex(0, Player::Eva, 1)
        .vertex(1, Player::Adam, 2)
        .vertex(2, Player::Adam, 3)
        .edge(0, 1)
        .edge(0, 2)
        .edge(1, 0)
        .edge(2, 2)
        .initial(0);
    let g = b.build().expect("well formed");
    print!("{}", print_pg(&g));

    for (name, game) in [("game", g.clone()), ("dual", g.dual())] {
        let r = zielonka_solve(&game, &BTreeMap::new()).expect("closed game");
        println!(
            "{name}: eva wins {:?}, adam wins {:?}",
            r.eva_region, r.adam_region
        );
        for (v, e) in &r.eva_strategy {
            println!("  eva plays edge {e:?} at {v:?}");
        }
    }
}
