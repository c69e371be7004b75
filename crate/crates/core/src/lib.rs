pub mod bekic;
pub mod bridge;
pub mod cli;
pub mod game;
pub mod generate;
pub mod graph;
pub mod oracle;
pub mod semantics;
pub mod term;
