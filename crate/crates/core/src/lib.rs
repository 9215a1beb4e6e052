//! Non-deterministic Cannon's algorithms, growing context-sensitive grammars,
//! the conversions between them, and reduction histories.

pub mod cli;
pub mod grammar;
pub mod history;
pub mod io;
pub mod nca;
pub(crate) mod search;
pub mod transforms;
pub mod word;

pub use search::Limits;
