//! Numerical differential geometry for special Kähler metrics on `T*CP¹(k,l)`,
//! Gibbons–Hawking multi-instantons, Kummer-type gluing and G2 structures.

pub mod chart_atlas;
pub mod cli;
pub mod error;
pub mod fit;
pub mod g2_structures;
pub mod gibbons_hawking;
pub mod kummer_gluing;
pub mod ode;
pub mod quad;
pub mod report;
pub mod scalar;
pub mod special_kahler;
pub mod tensor;

pub use error::{GeomError, Result};
