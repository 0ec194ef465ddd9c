//! Factorization of sparse multilinear polynomials over GF(2) into
//! irreducible factors over disjoint variable sets.

pub mod apps;
pub mod bench;
pub mod error;
pub mod factor;
pub mod gen;
pub mod identity;
pub mod poly;
pub mod precheck;

pub use error::{Error, Result};
pub use factor::{factor_complete, Driver, FactorConfig, Factorization};
pub use identity::{is_equal, IsEqualConfig, PivotRule, Quad};
pub use poly::{parse, Polynomial, VarSet, VarTable};
