//! Certified coarse geometry on finite truncations of metric spaces.

pub mod cli;
pub mod combing;
pub mod cover;
pub mod cylinder;
pub mod dispersed;
pub mod error;
pub mod io;
pub mod maps;
pub mod pipeline;
pub mod plot;
pub mod rational;
pub mod space;
pub mod upgrade;

pub use error::{Error, Result};
pub use rational::Q;
