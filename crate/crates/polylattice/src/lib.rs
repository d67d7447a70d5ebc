//! Exact-arithmetic toolkit for convex-polyomino enumeration.
//!
//! The crate has three layers that check each other:
//!
//! * [`geometry`] and [`enumerator`] build polyominoes cell by cell and
//!   measure their statistics from first principles,
//! * [`series`], [`gfs`] and [`recurrences`] manipulate truncated formal
//!   power series over exact rationals and reproduce the same numbers from
//!   closed-form generating functions and transfer recurrences,
//! * [`formulas`] evaluates explicit counting formulas and asymptotic
//!   expressions with big-integer and fixed-point arithmetic.
//!
//! Every number that leaves the crate is exact except for the asymptotic
//! evaluations, which are fixed-point decimals with stated precision.

pub mod decimal;
pub mod enumerator;
pub mod formulas;
pub mod geometry;
pub mod gfs;
pub mod recurrences;
pub mod series;
