//! Geometry of the snowflake groups
//! `G_L = <a, x, y, s, t | s a s^-1 = x, t a t^-1 = y, a^L = x y, H abelian>`.
//!
//! * [`vertex_group`]: exact word metric on the vertex group `H = Z^2`.
//! * [`hnn_group`]: normal forms, balls and distances in `G_L`.
//! * [`paths`]: snowflake paths, escapes, enfilades and loop checks.
//! * [`filling`]: van Kampen diagrams for polygons and snowflake loops.
//! * [`distortion`]: tables and limits for the distortion of `<a>`.

mod serde_big;

pub mod distortion;
pub mod error;
pub mod filling;
pub mod hnn_group;
pub mod paths;
pub mod vertex_group;

pub use error::{Error, Result};
