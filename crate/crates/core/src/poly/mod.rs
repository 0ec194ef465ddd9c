//! Canonical sparse representation of multilinear polynomials over GF(2)
//! and the primitive operations the factorization algorithms build on.

mod polynomial;
mod product;
mod text;
mod vars;

pub use polynomial::{Monomial, Polynomial};
pub use product::Product;
pub use text::{format, parse, PolynomialJson};
pub use vars::{VarSet, VarTable};

pub(crate) use polynomial::mono_len;
pub(crate) use product::products_equal;
pub(crate) use vars::iter_bits;
