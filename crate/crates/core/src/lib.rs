//! Orbit registries, truncated function spaces and exactness certificates for
//! the coefficient-system complex of a locally analytic principal series of
//! `GL2(Q_p)` on its Bruhat-Tits tree.

pub mod cli;
pub mod complex;
pub mod error;
pub mod linalg;
pub mod orbits;
pub mod padic;
pub mod projline;
pub mod tree;

pub use complex::{BoundaryMatrix, ComplexModel, ExactnessReport, LocalFun, TruncFun};
pub use error::{Error, Result};
pub use orbits::{Orbit, OrbitRecord, OrbitRegistry};
pub use padic::{PadicConfig, PadicError, PadicNum, Valuation};
pub use projline::{Ball, Chart, ProjPoint, GL2};
pub use tree::{BtTree, OrientedEdge, Simplex, Vertex};
