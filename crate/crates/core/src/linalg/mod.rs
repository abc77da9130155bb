//! Dense complex linear algebra and multi-subsystem index bookkeeping.

pub mod eig;
pub mod layout;
pub mod matrix;
pub mod state;
