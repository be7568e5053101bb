pub mod chain;
pub mod channel;
pub mod code;
pub mod decode;
pub mod error;
pub mod exceptional;
pub mod gr1n;
pub mod graph;
pub mod group;
pub mod numerics;
pub mod par;
pub mod partial;
pub mod verify;
pub mod wreath;

pub use error::{Error, Result};
