pub mod cli;
pub mod conv;
pub mod dsl;
pub mod env;
pub mod error;
pub mod expr;
pub mod monop;
pub mod number;
pub mod oracle;
pub mod output;
pub mod penalty;
pub(crate) mod piece;
pub mod pwf;
pub mod risk;
pub mod sep;
