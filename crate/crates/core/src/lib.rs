//! Exact-arithmetic construction, Jacobi analysis, canonical reduction and
//! classification of solvable Lie algebras whose nilradical is the algebra
//! `T(n)` of strictly upper triangular matrices.

pub mod basis;
pub mod canonical;
pub mod catalog;
pub mod cli;
pub mod document;
pub mod error;
pub mod expr;
pub mod family;
pub mod jacobi;
pub mod liecore;
pub mod linalg;
pub mod scalar;
pub mod triangular;

pub use basis::{BasisOrder, PairIdx};
pub use catalog::{table_entries, CatalogEntry};
pub use document::AlgebraDocument;
pub use error::{Error, Result};
pub use expr::ParamExpr;
pub use family::{ExtensionFamily, FieldFlag, DEFAULT_SEED};
pub use liecore::{LieAlgebra, Vector};
pub use scalar::Scalar;
pub use triangular::{build_tn, TriangularAlgebra};
