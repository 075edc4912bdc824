//! Strategy synthesis for two-player concurrent stochastic games in which
//! the players hold opposite, possibly incomplete preferences over LTLf
//! goals.
//!
//! The pipeline: LTLf goals are compiled to DFAs ([`ltlf`]), combined into a
//! preference automaton whose states are preordered ([`preference`]),
//! multiplied with a game ([`game`], [`product`]), layered into ranks
//! ([`rank`]), and solved for non-dominated almost-sure winning strategies
//! ([`solver`]). [`analysis`] holds brute-force checkers for the dominance,
//! equilibrium and rank identities; [`gridworld`] compiles the drone
//! delivery scenario.

pub mod error;
pub mod ltlf;

pub use error::{Error, Result};
pub mod analysis;
pub mod game;
pub mod gridworld;
pub mod order;
pub mod preference;
pub mod product;
pub mod rank;
pub mod solver;
