//! LTLf formulas over finite, nonempty traces and their compilation to DFAs.

mod dfa;
mod formula;
mod parse;
pub mod progress;
mod semantics;

pub use dfa::{to_dfa, to_dfa_bounded, Dfa, DfaBounds};
pub use formula::{Alphabet, Formula, Letter, DEFAULT_AP_BOUND};
pub use parse::parse_ltlf;
pub use progress::{last_value_formula, progress_formula};
pub use semantics::eval_word;
