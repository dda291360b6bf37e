//! Evaluation of proposed beliefs under uncertainty and the information-sharing
//! subdialogues used to resolve it.

pub mod belief;
pub mod error;
pub mod evaluation;
pub mod focus;
pub mod tree;
pub mod acts;
pub mod strategy;
pub mod transcript;
pub mod dialogue;
pub mod scenario;
