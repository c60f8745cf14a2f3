//! Ribbon graphs, divisors on graphs, and the torsor structures of the
//! Jacobian on spanning trees: Bernardi bijections, rotor routing and planar
//! duality.

pub mod bernardi;
pub mod break_divisor;
pub mod corpus;
pub mod divisor;
pub mod duality;
pub mod error;
pub mod graph;
pub mod lab;
pub mod rotor;

pub use break_divisor::{BreakDivisor, BreakClassTable};
pub use divisor::{Divisor, DivisorClass, PicardGroup};
pub use error::{Error, Result, ValidationKind};
pub use graph::{Dart, RibbonGraph, SpanningTree};
