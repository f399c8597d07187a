#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod tableau;
pub mod trees;
pub mod wiener;
pub mod problems;
pub mod integrator;
pub mod experiments;
pub mod cli;
