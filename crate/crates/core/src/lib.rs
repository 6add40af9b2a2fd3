pub mod calculus;
pub mod cli;
pub mod composition;
pub mod dsl;
pub mod error;
pub mod field;
pub mod grid;
pub mod json;
pub mod monomial;
pub mod numeric;
pub mod real;
pub mod sample;
pub mod scalar;
pub mod selftest;
pub mod series;
