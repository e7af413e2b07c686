//! Modal effect types parameterised by an effect theory, with two
//! source calculi translated into the core and a differential harness.

pub mod cli;
pub mod effect;
pub mod feps;
pub mod harness;
pub mod met;
pub mod syntax;
pub mod systemc;
