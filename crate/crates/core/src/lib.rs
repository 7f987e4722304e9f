//! Non-singular simultaneous zeros of pairs of diagonal forms of degree
//! `k = p^tau (p - 1)` modulo `p^(tau + 1)`.

pub mod contraction;
pub mod error;
pub mod forms;
pub mod gen;
pub mod oracle;
pub mod padic;
pub mod solver;
pub mod zerosum;

pub use error::{Error, Result};
pub use forms::FormPair;
pub use padic::{derive_params, Params, Valuation};
