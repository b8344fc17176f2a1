//! Sharp Bellman function for the two-exponent Muckenhoupt weight class.
//!
//! Given exponents `p1 > p2` and a class constant `Q > 1`, a weight `w` on
//! `[0,1]` belongs to the class when
//! `<w^p1>_J^{1/p1} <w^p2>_J^{-1/p2} <= Q` on every subinterval `J`.
//! The crate evaluates the largest possible measure of `{w >= 1}` given the
//! pair of moments `(<w^p1>, <w^p2>)`, builds weights that attain it, and
//! ships numerical campaigns that check the result independently.

pub mod ainf;
pub mod bellman;
pub mod cli;
pub mod error;
pub mod extremal;
pub mod geometry;
pub mod implicit_v;
pub mod params;
pub mod quad;
pub mod rh;
pub mod roots;
pub mod verify;
pub mod weights;

pub use error::{ApqError, Result};
pub use geometry::Region;
pub use params::{derive_constants, solve_gammas, DerivedConstants, Model, Params};
