//! Core kernel for generating and certifying (dynamical system, Lyapunov function) pairs.
//!
//! Everything here is `no_std` with `alloc`. File formats, the CLI and
//! wall-clock deadlines live in the `lyapforge` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod backward;
pub mod deadline;
pub mod diff;
pub mod expr;
pub mod forward;
pub mod interval;
pub mod linalg;
pub mod num;
pub mod parse;
pub mod poly;
pub mod rng;
pub mod sample;
pub mod score;
pub mod sdp;
pub mod simplify;
pub mod sos;
pub mod stability;
pub mod tokenizer;
pub mod verify;

pub use expr::{BinaryOp, DomainError, Expr, System, UnaryOp};
pub use num::{Decimal, Num};
pub use poly::{Monomial, Poly, PolyNF};
