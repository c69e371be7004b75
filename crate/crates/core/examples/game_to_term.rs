//! Reading a game as an equation system, solving it to a term and back.

use parity_mu::bekic::gaussian_eliminate;
use parity_mu::bridge::{game_to_system, game_to_term, term_to_game};
use parity_mu::game::{parse_pg, print_pg};
use parity_mu::term::{print, simplify};

const GAME: &str = "\
parity 2;
0 1 0 1,2;
1 0 1;
2 0 1 0,1;
";

fn main() {
    let g = parse_pg(GAME).expect("valid game");
    let sys = game_to_system(&g).expect("translatable");
    print!("{}", sys.to_text());

    let solved = gaussian_eliminate(&sys).expect("solvable");
    print!("{solved}");

    let t = simplify(&game_to_term(&g).expect("translatable"));
    println!("term: {}", print(&t));

    let back = term_to_game(&t);
    print!("game of the term:\n{}", print_pg(&back));
}
