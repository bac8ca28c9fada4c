//! Execution-time and resource estimates for adders and Shor's algorithm.

mod adder;
mod depth;
mod layout;
mod shor;

pub use adder::*;
pub use depth::*;
pub use layout::*;
pub use shor::*;
