//! Revenue-maximizing certification menus.
//!
//! A monopolist certifier sells a menu of experiments to a sender whose type
//! is high or low; a Bayesian receiver then accepts or rejects based on the
//! realized likelihood-ratio signal. Given the set of signals the receiver
//! accepts, the optimal menu is the solution of a small exact-rational LP.

pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod model;
pub mod obedience;
pub mod optimizer;
pub mod oracle;
pub mod rational;
pub mod simplex;

pub use error::{Error, Result};
pub use rational::Q;
