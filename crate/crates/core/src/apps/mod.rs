//! Front-ends that reduce decomposition problems to factorization.

pub mod dnf;
pub mod table;

pub use dnf::{decompose_dnf, dnf_to_polynomial, minimize_monotone, DnfFormula, DnfMode};
pub use table::{decompose_table, table_to_polynomial, DataTable, MergeConstants, TableDecomposition};
