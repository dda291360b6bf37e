//! Session service and batch runner for the parley dialogue engine.

pub mod api;
pub mod cli;
pub mod store;

pub use api::router;
pub use store::{SessionHandle, SessionStore};
